#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qmdp::cli {

/// Runs `qmdp <subcommand> ...`; args excludes the program name. Returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Self-contained SVG bar chart of (label, value) pairs.
std::string bar_chart_svg(const std::vector<std::pair<std::string, double>>& bars, const std::string& title);

} // namespace qmdp::cli
