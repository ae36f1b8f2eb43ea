#include "shopfloor/metrics/json_io.hpp"

#include <json.hpp>

#include "shopfloor/errors.hpp"

namespace shopfloor::metrics {

std::vector<RunRecord> records_from_json(const std::string& bytes) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(bytes);
    } catch (const std::exception& e) {
        throw InvalidConfigError(std::string("bad results json: ") + e.what());
    }
    if (!doc.contains("runs") || !doc["runs"].is_array())
        throw InvalidConfigError("results json lacks a runs array");

    std::vector<RunRecord> out;
    for (const auto& run : doc["runs"]) {
        RunRecord r;
        r.scenario = run.at("scenario").get<std::string>() == "A" ? Scenario::A : Scenario::B;
        r.controller = run.at("controller").get<std::string>() == "agents"
                           ? Controller::Agents
                           : Controller::Conventional;
        r.seed = run.at("seed").get<std::uint64_t>();
        r.kpi.lead_time_mean_ms = run.at("lead_time_mean_ms").get<double>();
        r.kpi.throughput_per_hour = run.at("throughput_per_hour").get<double>();
        r.kpi.repeatability_pct = run.at("repeatability").get<double>();
        for (const auto& [res, value] : run.at("utilization_pct").items())
            r.kpi.utilization_pct[res] = value.get<double>();
        r.kpi.makespan_ms = run.at("makespan_ms").get<petri::TimeMs>();
        r.kpi.orders_released = run.at("orders_released").get<std::size_t>();
        r.kpi.orders_completed = run.at("orders_completed").get<std::size_t>();
        r.kpi.machine_starts = run.at("machine_starts").get<std::size_t>();
        r.kpi.failures = run.at("failures").get<std::size_t>();
        r.messages_delivered = run.at("messages_delivered").get<std::size_t>();
        r.conformance_violations = run.at("conformance_violations").get<std::size_t>();
        r.calendar_violations = run.at("calendar_violations").get<std::size_t>();
        r.wall_ms = run.at("wall_ms").get<double>();

        const auto& cfg = run.at("config");
        r.config.order_count = cfg.at("orders").get<std::int64_t>();
        r.config.transport_time = cfg.at("transport_ms").get<petri::TimeMs>();
        r.config.cnc_time = cfg.at("cnc_ms").get<petri::TimeMs>();
        r.config.assembly_time = cfg.at("assembly_ms").get<petri::TimeMs>();
        const double p = cfg.at("failure_probability").get<double>();
        if (p > 0.0) {
            fms::FailureModel f;
            f.probability = p;
            f.repair_time = cfg.at("repair_ms").get<petri::TimeMs>();
            f.rng_seed = r.seed;
            r.config.failure = f;
        }
        r.config.seed = cfg.at("seed").get<std::uint64_t>();
        r.config.wip_limit = cfg.at("wip_limit").get<int>();
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace shopfloor::metrics
