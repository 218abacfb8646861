#pragma once

#include <string>
#include <vector>

#include "mppi/bench.hpp"

namespace mppi {

/// Parses a `.summary.csv` file back into cell summaries. Comment lines
/// (leading '#') are skipped; any structural problem is reported with its
/// 1-based line number. A file with no data rows is an error.
std::vector<CellSummary> read_summary_csv(const std::string& path);

/// Standalone SVG bar chart for one task: steps-to-goal bars, one per
/// method, annotated with each method's success rate. Output bytes are a
/// pure function of the input rows.
std::string render_task_chart(const std::string& task,
                              const std::vector<CellSummary>& rows);

/// Writes one `<task>.svg` per task (config order) into `out_dir`.
/// Returns the file paths written.
std::vector<std::string> write_summary_charts(const std::vector<CellSummary>& summaries,
                                              const std::string& out_dir);

}  // namespace mppi
