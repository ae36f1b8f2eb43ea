#pragma once

#include <string>
#include <vector>

#include "shopfloor/metrics/runner.hpp"

namespace shopfloor::metrics {

// One CSV row per run, sorted by (scenario, controller, seed); repeatability
// is the run-set value repeated on each of its rows. Equal inputs produce
// byte-equal output.
std::string to_csv(const std::vector<RunRecord>& records);

// JSON mirror of the CSV with run metadata (resolved config echo, message
// and audit counters, wall time) and emission notes.
std::string to_json(const std::vector<RunRecord>& records);

// gnuplot-ready columnar files: per metric, one row per (scenario,
// controller) group mean.
std::string to_gnuplot_dat(const std::vector<RunRecord>& records, const std::string& metric);

// Writes results.csv, results.json and figs/{lead_time,throughput,
// utilization_cnc}.dat under out_dir. Returns the file paths written.
std::vector<std::string> compare_and_emit(const std::vector<RunRecord>& records,
                                          const std::string& out_dir);

}  // namespace shopfloor::metrics
