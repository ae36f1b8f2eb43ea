#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "shopfloor/petri/types.hpp"

namespace shopfloor::fms {

using petri::TimeMs;

enum class PartKind { Body, Handle, Cover };

std::string part_kind_str(PartKind k);
// Throws UnknownKindError for anything but body/handle/cover.
PartKind part_kind_from(const std::string& s);

enum class PartState { Stored, InTransport, Machining, AwaitingAssembly, Assembled };

struct Part {
    std::int64_t part_id = 0;
    PartKind kind = PartKind::Body;
    std::int64_t order_id = 0;
    PartState state = PartState::Stored;
};

// Legal state graph: stored -> in-transport -> machining -> in-transport ->
// awaiting-assembly -> assembled.
bool part_state_step_ok(PartState from, PartState to);

struct BookOrder {
    std::int64_t order_id = 0;
    TimeMs release_time = 0;
    std::vector<Part> parts;  // exactly one body, one handle, one cover
    std::optional<TimeMs> completion_time;
};

struct FailureModel {
    std::string target_resource = "cnc";
    double probability = 0.0;  // per machining start
    TimeMs repair_time = 30000;
    std::uint64_t rng_seed = 0;
};

struct FmsConfig {
    std::int64_t order_count = 0;
    TimeMs transport_time = 8000;
    TimeMs cnc_time = 10000;
    TimeMs assembly_time = 15000;
    std::optional<FailureModel> failure;
    std::uint64_t seed = 0;
    int wip_limit = 10;  // orders the shop executes concurrently
};

// Throws InvalidConfigError on violated invariants.
void check(const FmsConfig& config);

// key = value file, '#' comments. Unknown keys are an error so typos are
// caught. Recognized keys: orders, transport_ms, cnc_ms, assembly_ms,
// failure_probability, repair_ms, failure_target, seed, wip_limit.
FmsConfig load_config(std::istream& is);
FmsConfig load_config_file(const std::string& path);
std::string print_config(const FmsConfig& config);

// Stations and resources.
inline constexpr const char* kStationMachining = "station1-machining";
inline constexpr const char* kStationAssembly = "station2-assembly";
inline constexpr const char* kStationAsrs = "station3-asrs";

inline constexpr const char* kResCnc = "cnc";
inline constexpr const char* kResRobot = "robot";
inline constexpr const char* kResGlueAssembly = "glue-assembly";
inline constexpr const char* kResLaserQc = "laser-qc";
inline constexpr const char* kResAsrsCrane = "asrs-crane";
inline constexpr const char* kResConveyor = "conveyor";

struct StationSpec {
    std::string id;
    std::vector<std::string> resources;
    TimeMs process_time = 0;
};

std::vector<StationSpec> station_specs(const FmsConfig& config);

// Bernoulli draw for one machining start. Deterministic: advances the
// splitmix64 state once and compares the 53-bit draw against
// floor(probability * 2^53).
std::pair<bool, std::uint64_t> sample_failure(const FailureModel& model, std::uint64_t rng_state);

std::int64_t failure_threshold(double probability);

// Canonical per-part processing route; identical for all three kinds.
std::vector<std::string> part_route(PartKind kind);
std::vector<std::string> part_route(const std::string& kind_name);

// The three parts of each order, ids assigned order-major
// (order k holds part ids 3k-2, 3k-1, 3k for 1-based k).
std::vector<BookOrder> make_orders(const FmsConfig& config);

}  // namespace shopfloor::fms
