#pragma once

#include <map>
#include <string>
#include <vector>

#include "shopfloor/mes/system.hpp"
#include "shopfloor/mes/types.hpp"

namespace shopfloor::mes {

struct ConformanceReport {
    std::size_t conversations = 0;
    std::size_t messages = 0;
    std::vector<std::string> violations;

    bool ok() const { return violations.empty(); }
};

// Replays every conversation in the log against the task-allocation automaton
// (request, data query/inform, availability query/propose-or-refuse with
// parked retries, accept, requirement forwarding, dispatch) or the execution
// automaton (started, bridge forward, then failure/repair blocks and exactly
// one completion block). Also checks per-sender sequence monotonicity and
// that replies reference previously delivered sequence numbers.
ConformanceReport check_conformance(const std::vector<AgentMessage>& log);

// Overlap audit over the allocation calendars; returns one line per clash.
std::vector<std::string> audit_calendars(
    const std::map<std::string, std::vector<CalendarEntry>>& calendars);

}  // namespace shopfloor::mes
