#pragma once

#include <optional>
#include <string>
#include <vector>

#include "shopfloor/fms/config.hpp"
#include "shopfloor/metrics/kpi.hpp"
#include "shopfloor/petri/types.hpp"

namespace shopfloor::metrics {

enum class Scenario { A, B };
enum class Controller { Agents, Conventional };

std::string scenario_str(Scenario s);
std::string controller_str(Controller c);

struct ScenarioConfig {
    Scenario scenario = Scenario::A;
    fms::FmsConfig base;
    int runs = 5;
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    Controller controller = Controller::Agents;
    petri::TimeMs horizon_cap = 1'000'000'000;  // auto: run to completion below this
    bool keep_traces = false;
    // When set, per-run artifacts are written here as line-delimited records:
    // trace_<scenario>_<controller>_seed<seed>.log and, for agent runs,
    // transcript_<scenario>_<controller>_seed<seed>.log.
    std::string artifact_dir;
};

// Throws InvalidConfigError when seeds do not cover `runs`, etc.
void check(const ScenarioConfig& config);

// Scenario A strips disturbances; scenario B guarantees a failure model
// (probability 0.2, repair 30000 ms unless the base overrides it) and seeds
// it per run.
fms::FmsConfig resolve_run_config(const ScenarioConfig& config, std::uint64_t seed);

struct RunRecord {
    Scenario scenario = Scenario::A;
    Controller controller = Controller::Agents;
    std::uint64_t seed = 0;
    fms::FmsConfig config;  // fully resolved; reproduces the run bit-exactly
    KpiReport kpi;
    double wall_ms = 0.0;
    std::size_t messages_delivered = 0;      // agents runs only
    std::size_t conformance_violations = 0;  // agents runs only
    std::size_t calendar_violations = 0;     // agents runs only
    std::size_t conversations = 0;           // agents runs only
    std::optional<petri::EventTrace> trace;  // kept when config.keep_traces
};

// One coupled run per seed. Conformance and calendar audits run while the
// agent layer is still alive; their outcomes travel in the records.
std::vector<RunRecord> run_scenario(const ScenarioConfig& config);

}  // namespace shopfloor::metrics
