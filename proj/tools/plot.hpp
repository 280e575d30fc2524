#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace hdflow::cli {

// Kinds: moments (moments.csv + fit.csv), trace (one or more CSVs with t and
// epsilon), front (front.csv), decay (slopes.csv), dispersion (roots.csv).
// The data are embedded, so the script runs without the CSVs. Throws
// InvalidArgument naming the first missing column or an unknown kind.
std::string emit_plot_script(const std::string& kind, const std::vector<std::filesystem::path>& csvs);
const std::vector<std::string>& plot_kinds();

}  // namespace hdflow::cli
