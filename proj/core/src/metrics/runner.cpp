#include "shopfloor/metrics/runner.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>

#include "shopfloor/bridge/coupled.hpp"
#include "shopfloor/errors.hpp"
#include "shopfloor/fms/model.hpp"
#include "shopfloor/mes/conformance.hpp"
#include "shopfloor/metrics/conventional.hpp"
#include "shopfloor/petri/trace_io.hpp"

namespace shopfloor::metrics {

std::string scenario_str(Scenario s) { return s == Scenario::A ? "A" : "B"; }

std::string controller_str(Controller c) {
    return c == Controller::Agents ? "agents" : "conventional";
}

void check(const ScenarioConfig& config) {
    fms::check(config.base);
    if (config.runs < 1) throw InvalidConfigError("runs must be >= 1");
    if (config.seeds.size() < static_cast<std::size_t>(config.runs))
        throw InvalidConfigError("need at least one seed per run");
    if (config.horizon_cap <= 0) throw InvalidConfigError("horizon cap must be > 0");
}

fms::FmsConfig resolve_run_config(const ScenarioConfig& config, std::uint64_t seed) {
    fms::FmsConfig out = config.base;
    out.seed = seed;
    if (config.scenario == Scenario::A) {
        out.failure.reset();
    } else {
        fms::FailureModel f = out.failure.value_or(fms::FailureModel{});
        if (f.probability <= 0.0) f.probability = 0.2;
        f.rng_seed = seed;
        out.failure = f;
    }
    fms::check(out);
    return out;
}

std::vector<RunRecord> run_scenario(const ScenarioConfig& config) {
    check(config);
    std::vector<RunRecord> records;
    for (int i = 0; i < config.runs; ++i) {
        const std::uint64_t seed = config.seeds[static_cast<std::size_t>(i)];
        RunRecord rec;
        rec.scenario = config.scenario;
        rec.controller = config.controller;
        rec.seed = seed;
        rec.config = resolve_run_config(config, seed);

        const auto net = fms::build_fms_net(rec.config);
        const auto marking = fms::build_initial_marking(net, rec.config);
        const auto orders = fms::make_orders(rec.config);

        std::string artifact_stem;
        if (!config.artifact_dir.empty()) {
            std::filesystem::create_directories(config.artifact_dir);
            artifact_stem = config.artifact_dir + "/" + scenario_str(config.scenario) + "_" +
                            controller_str(config.controller) + "_seed" + std::to_string(seed);
        }

        const auto wall_start = std::chrono::steady_clock::now();
        petri::EventTrace trace;
        if (config.controller == Controller::Agents) {
            mes::MesSystem mes(rec.config, orders);
            auto coupled = bridge::step_coupled(net, marking, mes, config.horizon_cap, seed);
            trace = std::move(coupled.trace);
            if (coupled.divergence) {
                std::string where;
                if (!artifact_stem.empty()) {
                    where = artifact_stem + ".diverged.trace.log";
                    std::ofstream os(where);
                    petri::write_trace(os, trace);
                }
                throw DivergenceError(*coupled.divergence + " after " +
                                      std::to_string(trace.events.size()) + " events" +
                                      (where.empty() ? "" : ", trace written to " + where));
            }
            rec.messages_delivered = coupled.messages_delivered;
            auto report = mes::check_conformance(mes.message_log());
            rec.conformance_violations = report.violations.size();
            rec.conversations = report.conversations;
            rec.calendar_violations = mes::audit_calendars(mes.calendars()).size();
            if (!artifact_stem.empty()) {
                std::ofstream os(artifact_stem + ".transcript.log");
                for (const auto& m : mes.message_log()) os << mes::message_line(m) << '\n';
            }
        } else {
            ConventionalController controller(rec.config);
            petri::RunOptions options;
            options.horizon = config.horizon_cap;
            options.seed = seed;
            auto kernel = petri::run(net, marking, options, &controller);
            trace = std::move(kernel.trace);
            if (kernel.divergence)
                throw DivergenceError(*kernel.divergence + " after " +
                                      std::to_string(trace.events.size()) + " events");
        }
        const auto wall_end = std::chrono::steady_clock::now();
        rec.wall_ms = std::chrono::duration<double, std::milli>(wall_end - wall_start).count();

        rec.kpi = compute_kpis(trace, orders);
        if (!artifact_stem.empty()) {
            std::ofstream os(artifact_stem + ".trace.log");
            petri::write_trace(os, trace);
        }
        if (config.keep_traces) rec.trace = std::move(trace);
        records.push_back(std::move(rec));
    }

    // Repeatability is a property of the run set; stamp it onto each record.
    if (records.size() >= 2) {
        std::vector<KpiReport> kpis;
        kpis.reserve(records.size());
        for (const auto& r : records) kpis.push_back(r.kpi);
        const double repeatability = compute_repeatability(kpis);
        for (auto& r : records) r.kpi.repeatability_pct = repeatability;
    }
    return records;
}

}  // namespace shopfloor::metrics
