#pragma once

#include <map>
#include <string>
#include <vector>

#include "shopfloor/fms/config.hpp"
#include "shopfloor/mes/types.hpp"

namespace shopfloor::mes {

// Capability-based knowledge model: which resource at which station provides
// which capability, and how long the operation takes.
std::vector<CapabilityRecord> default_capability_records(const fms::FmsConfig& config);

// Stations whose resources jointly cover all required capabilities, ranked by
// (earliest_start, station id). An empty result is the distinguished
// no-capable-station outcome (the task is deferred, not an error).
std::vector<std::string> match_capability(
    const std::vector<std::string>& required_capabilities,
    const std::vector<CapabilityRecord>& records,
    const std::map<std::string, TimeMs>& earliest_start_by_station = {});

}  // namespace shopfloor::mes
