#pragma once

#include <set>
#include <string>

#include "shopfloor/petri/types.hpp"

namespace shopfloor::petri {

struct ReachResult {
    // Canonical untimed markings (see Marking::canonical_untimed).
    std::set<std::string> markings;
};

// Exhaustive untimed reachability for small nets, by breadth-first search.
// Timestamps are ignored entirely: any binding whose tokens exist and whose
// guard holds may fire, and produced tokens carry timestamp 0. Uses its own
// naive binding enumeration, independent of the engine's pruned path, so it
// can serve as a brute-force oracle for run().
//
// Throws BoundExceededError when more than `bound` distinct markings are
// discovered.
ReachResult reachable_markings(const NetModel& net, const Marking& initial, std::size_t bound);

}  // namespace shopfloor::petri
