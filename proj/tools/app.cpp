#include "app.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <optional>

#include "commands.hpp"
#include "hdflow/errors.hpp"
#include "plot.hpp"

namespace hdflow::cli {

namespace {

struct Invocation {
  std::string config_file;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  bool dry_run = false;
};

void add_run_options(CLI::App* sub, Invocation& inv) {
  sub->add_option("--out,-o", inv.out_dir, "output directory (key: out)");
  sub->add_option("--seed", inv.seed, "random seed (key: seed)");
  sub->add_flag("--dry-run", inv.dry_run, "print the resolved config and exit");
  sub->add_option("assignments", inv.overrides, "key=value overrides");
}

RunConfig assemble(const std::string& command, const Invocation& inv) {
  RunConfig cfg;
  if (!inv.config_file.empty()) {
    cfg = read_config(inv.config_file);
    if (!command.empty() && !cfg.command.empty() && cfg.command != command)
      throw InvalidArgument("command: config file is for '" + cfg.command + "', not '" + command + "'");
  }
  if (!command.empty()) cfg.command = command;
  if (cfg.command.empty()) throw InvalidArgument("command: the config file names no command");
  for (const auto& a : inv.overrides) apply_override(cfg, a);
  if (!inv.out_dir.empty()) cfg.out_dir = inv.out_dir;
  if (inv.seed) cfg.seed = *inv.seed;
  return cfg;
}

int execute(const std::string& command, const Invocation& inv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = assemble(command, inv);
    if (inv.dry_run) {
      const auto& c = find_command(cfg.command);
      out << serialize(Params(cfg, c.schema).resolved());
      return kOk;
    }
  } catch (...) {
    return exit_code_for(std::current_exception(), err);
  }
  return run(cfg, out, err);
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"hdflow: homoenergetic flow experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("hdflow ") + HDFLOW_VERSION);

  Invocation inv;
  std::string chosen;
  for (const auto& c : registry()) {
    auto* sub = app.add_subcommand(c.name, c.summary);
    sub->add_option("--config,-c", inv.config_file, "key = value config file");
    add_run_options(sub, inv);
    sub->callback([&chosen, name = c.name] { chosen = name; });
  }

  auto* rerun = app.add_subcommand("run", "run a config file or manifest; the file names the command");
  rerun->add_option("config", inv.config_file, "config or manifest.cfg")->required();
  add_run_options(rerun, inv);

  std::string kind, script;
  std::vector<std::string> csvs;
  auto* plot = app.add_subcommand("plot", "write a matplotlib script for result CSVs");
  plot->add_option("--kind,-k", kind, "moments, trace, front, decay or dispersion")->required();
  plot->add_option("--csv", csvs, "input CSV (repeatable)")->required();
  plot->add_option("--output,-o", script, "script path")->required();

  // Catch a misspelt subcommand before CLI11 reports it as a stray positional.
  if (args.size() > 1 && !args[1].empty() && args[1][0] != '-') {
    bool known = args[1] == "run" || args[1] == "plot";
    for (const auto& c : registry()) known = known || c.name == args[1];
    if (!known) {
      err << "config error: unknown subcommand '" << args[1] << "'\n";
      return kConfigError;
    }
  }

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << "hdflow " << HDFLOW_VERSION << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  }

  if (plot->parsed()) {
    try {
      std::vector<std::filesystem::path> paths(csvs.begin(), csvs.end());
      const auto text = emit_plot_script(kind, paths);
      std::ofstream os(script);
      os << text;
      if (!os) throw InvalidArgument("output: cannot write " + script);
      out << "wrote " << script << '\n';
      return kOk;
    } catch (...) {
      return exit_code_for(std::current_exception(), err);
    }
  }
  return execute(rerun->parsed() ? std::string() : chosen, inv, out, err);
}

}  // namespace hdflow::cli
