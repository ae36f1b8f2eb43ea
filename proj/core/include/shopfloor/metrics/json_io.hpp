#pragma once

#include <string>
#include <vector>

#include "shopfloor/metrics/runner.hpp"

namespace shopfloor::metrics {

// Parses a results.json document back into run records (KPIs and config
// echo; traces are not persisted). Used by the compare command to merge
// result sets from disk.
std::vector<RunRecord> records_from_json(const std::string& bytes);

}  // namespace shopfloor::metrics
