// Command-line front end: scenario runs, result comparison, model validation
// and trace replay checks.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "shopfloor/bridge/codec.hpp"
#include "shopfloor/bridge/net_xml.hpp"
#include "shopfloor/bridge/wire.hpp"
#include "shopfloor/errors.hpp"
#include "shopfloor/fms/config.hpp"
#include "shopfloor/fms/model.hpp"
#include "shopfloor/mes/conformance.hpp"
#include "shopfloor/metrics/emit.hpp"
#include "shopfloor/metrics/json_io.hpp"
#include "shopfloor/metrics/runner.hpp"
#include "shopfloor/petri/engine.hpp"
#include "shopfloor/petri/trace_io.hpp"

namespace fs = std::filesystem;
using namespace shopfloor;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open '" + path + "'");
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

struct RunArgs {
    std::string scenario = "A";
    std::string controller = "agents";
    std::string config_file;
    std::int64_t orders = 1000;
    std::uint64_t seed = 1;
    int runs = 5;
    petri::TimeMs repair_ms = 30000;
    petri::TimeMs transport_ms = 8000;
    petri::TimeMs cnc_ms = 10000;
    petri::TimeMs assembly_ms = 15000;
    double failure_probability = -1.0;  // <0: scenario default
    int wip = 10;
    std::string out_dir = "out";
    bool artifacts = false;
    bool remote = false;  // agent layer behind the framed socket transport
};

int cmd_run(const RunArgs& args, const CLI::App& cli) {
    metrics::ScenarioConfig cfg;
    if (!args.config_file.empty()) cfg.base = fms::load_config_file(args.config_file);
    // Explicit flags override file values.
    if (cli.count("--transport-ms") || args.config_file.empty())
        cfg.base.transport_time = args.transport_ms;
    if (cli.count("--cnc-ms") || args.config_file.empty()) cfg.base.cnc_time = args.cnc_ms;
    if (cli.count("--assembly-ms") || args.config_file.empty())
        cfg.base.assembly_time = args.assembly_ms;
    if (cli.count("--orders") || args.config_file.empty()) cfg.base.order_count = args.orders;
    if (cli.count("--wip") || args.config_file.empty()) cfg.base.wip_limit = args.wip;
    cfg.scenario = args.scenario == "B" ? metrics::Scenario::B : metrics::Scenario::A;
    if (cfg.scenario == metrics::Scenario::B) {
        fms::FailureModel f = cfg.base.failure.value_or(fms::FailureModel{});
        if (args.failure_probability >= 0.0) f.probability = args.failure_probability;
        f.repair_time = args.repair_ms;
        cfg.base.failure = f;
    }
    cfg.controller = args.controller == "conventional" ? metrics::Controller::Conventional
                                                       : metrics::Controller::Agents;
    cfg.runs = args.runs;
    cfg.seeds.clear();
    for (int i = 0; i < args.runs; ++i) cfg.seeds.push_back(args.seed + static_cast<std::uint64_t>(i));
    if (args.artifacts) cfg.artifact_dir = (fs::path(args.out_dir) / "runs").string();

    std::vector<metrics::RunRecord> records;
    if (args.remote) {
        if (cfg.controller != metrics::Controller::Agents)
            throw InvalidConfigError("--remote applies to the agents controller");
        for (int i = 0; i < cfg.runs; ++i) {
            const std::uint64_t seed = cfg.seeds[static_cast<std::size_t>(i)];
            metrics::RunRecord rec;
            rec.scenario = cfg.scenario;
            rec.controller = cfg.controller;
            rec.seed = seed;
            rec.config = metrics::resolve_run_config(cfg, seed);
            auto net = fms::build_fms_net(rec.config);
            auto marking = fms::build_initial_marking(net, rec.config);
            bridge::RemoteMesStats stats;
            auto result =
                bridge::step_coupled_remote(net, marking, rec.config, cfg.horizon_cap, seed, &stats);
            rec.kpi = metrics::compute_kpis(result.trace, fms::make_orders(rec.config));
            rec.messages_delivered = stats.messages_delivered;
            rec.conformance_violations = stats.conformance_violations;
            rec.calendar_violations = stats.calendar_violations;
            records.push_back(std::move(rec));
        }
    } else {
        records = metrics::run_scenario(cfg);
    }

    auto written = metrics::compare_and_emit(records, args.out_dir);
    for (const auto& path : written) std::cout << "wrote " << path << "\n";
    std::size_t incomplete = 0;
    for (const auto& r : records)
        if (!r.kpi.complete()) ++incomplete;
    for (const auto& r : records) {
        std::cout << "scenario " << metrics::scenario_str(r.scenario) << " "
                  << metrics::controller_str(r.controller) << " seed " << r.seed << ": "
                  << r.kpi.orders_completed << "/" << r.kpi.orders_released << " orders, lead mean "
                  << r.kpi.lead_time_mean_ms << " ms, throughput " << r.kpi.throughput_per_hour
                  << "/h\n";
    }
    if (incomplete) {
        std::cerr << incomplete << " run(s) left orders incomplete within the horizon\n";
        return 2;
    }
    return 0;
}

int cmd_compare(const std::string& in_dir, const std::string& out_dir) {
    std::vector<metrics::RunRecord> all;
    for (const auto& entry : fs::recursive_directory_iterator(in_dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
        auto records = metrics::records_from_json(slurp(entry.path().string()));
        for (auto& r : records) all.push_back(std::move(r));
    }
    if (all.empty()) throw InvalidConfigError("no results.json files under '" + in_dir + "'");
    auto written = metrics::compare_and_emit(all, out_dir);
    for (const auto& path : written) std::cout << "wrote " << path << "\n";
    return 0;
}

int cmd_check_transcript(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot open '" + path + "'");
    std::vector<mes::AgentMessage> log;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        log.push_back(mes::message_from_line(line));
    }
    auto report = mes::check_conformance(log);
    std::cout << report.messages << " messages, " << report.conversations << " conversations, "
              << report.violations.size() << " violations\n";
    for (const auto& v : report.violations) std::cerr << v << "\n";
    return report.ok() ? 0 : 1;
}

int cmd_validate_model(const std::string& path) {
    auto model = bridge::net_from_xml(slurp(path));
    auto diagnostics = petri::validate(model.net);
    if (diagnostics.empty()) {
        std::cout << "model '" << model.net.name << "': " << model.net.places.size() << " places, "
                  << model.net.transitions.size() << " transitions, ok\n";
        return 0;
    }
    for (const auto& d : diagnostics) std::cerr << d.element << ": " << d.message << "\n";
    return 1;
}

int cmd_replay(const std::string& trace_path, const std::string& model_path) {
    std::ifstream is(trace_path);
    if (!is) throw Error("cannot open '" + trace_path + "'");
    auto trace = petri::read_trace(is);

    std::size_t fires = 0, commands = 0, failures = 0;
    for (const auto& ev : trace.events) {
        if (ev.kind == petri::EventKind::Fire) ++fires;
        if (ev.kind == petri::EventKind::ExternalCommand) ++commands;
        if (ev.kind == petri::EventKind::Failure) ++failures;
    }
    std::cout << trace.events.size() << " events, " << fires << " firings, " << commands
              << " external commands, " << failures << " failures\n";

    if (!trace.times_monotonic()) {
        std::cerr << "violation: event times decrease\n";
        return 1;
    }
    std::cout << "event times non-decreasing: ok\n";

    if (!model_path.empty()) {
        // Re-execute the firing sequence against the model: every fire must
        // name a binding that enabled_bindings reports at that clock.
        auto model = bridge::net_from_xml(slurp(model_path));
        if (!model.has_marking) throw InvalidConfigError("model file lacks an initial marking");
        petri::Marking m = model.initial;
        for (const auto& ev : trace.events) {
            if (ev.kind == petri::EventKind::ExternalCommand) {
                m.clock = std::max(m.clock, ev.time);
                petri::ColorToken token;  // payload: place + canonical token
                // Canonical token forms are parsed back by the kernel helpers.
                const auto& place = ev.payload.at("place");
                const auto* spec = model.net.find_place(place);
                if (!spec) {
                    std::cerr << "violation: command into unknown place " << place << "\n";
                    return 1;
                }
                // Commands re-applied from the trace payload.
                token = petri::token_from_canonical(ev.payload.at("token"));
                m.insert(model.net, place, token);
                continue;
            }
            if (ev.kind != petri::EventKind::Fire) continue;
            m.clock = std::max(m.clock, ev.time);
            auto bindings = petri::enabled_bindings(model.net, m);
            const petri::Binding* match = nullptr;
            for (const auto& b : bindings)
                if (b.transition->id == ev.transition && b.enabling_time <= ev.time) {
                    match = &b;
                    break;
                }
            if (!match) {
                std::cerr << "violation: " << ev.transition << " fired at t=" << ev.time
                          << " without an enabled binding\n";
                return 1;
            }
            auto result = petri::fire(model.net, m, *match->transition, match->token_idx);
            m = std::move(result.marking);
        }
        std::cout << "firing sequence enabled at every step: ok\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"shop-floor simulation platform: timed colored Petri-net plant, "
                 "multi-agent execution layer, XML coupling bridge"};
    app.require_subcommand(0, 1);

    bool print_config = false;
    app.add_flag("--print-config", print_config, "print default configuration keys and exit");

    RunArgs run_args;
    auto* run = app.add_subcommand("run", "execute a scenario and emit results");
    run->add_option("--scenario", run_args.scenario, "A (no disturbances) or B (CNC failures)")
        ->check(CLI::IsMember({"A", "B"}));
    run->add_option("--controller", run_args.controller, "agents or conventional")
        ->check(CLI::IsMember({"agents", "conventional"}));
    run->add_option("--config", run_args.config_file, "key = value configuration file");
    run->add_option("--orders", run_args.orders, "book orders to release");
    run->add_option("--seed", run_args.seed, "first seed; runs use seed, seed+1, ...");
    run->add_option("--runs", run_args.runs, "independent runs");
    run->add_option("--repair-ms", run_args.repair_ms, "CNC repair time for scenario B");
    run->add_option("--failure-probability", run_args.failure_probability,
                    "failure probability for scenario B (default 0.2)");
    run->add_option("--transport-ms", run_args.transport_ms, "per-move transport time");
    run->add_option("--cnc-ms", run_args.cnc_ms, "machining time per part");
    run->add_option("--assembly-ms", run_args.assembly_ms, "assembly time per order");
    run->add_option("--wip", run_args.wip, "orders executed concurrently");
    run->add_option("--out", run_args.out_dir, "output directory");
    run->add_flag("--artifacts", run_args.artifacts, "write per-run trace and transcript files");
    run->add_flag("--remote", run_args.remote,
                  "run the agent layer behind the framed loopback transport");

    std::string compare_in, compare_out = "out";
    auto* compare = app.add_subcommand("compare", "merge results.json files and emit comparisons");
    compare->add_option("--in", compare_in, "directory holding results.json files")->required();
    compare->add_option("--out", compare_out, "output directory");

    std::string model_path;
    auto* validate = app.add_subcommand("validate-model", "structural checks on a net model file");
    validate->add_option("file", model_path, "XML model file")->required();

    std::string export_path;
    std::int64_t export_orders = 10;
    std::string export_scenario = "A";
    bool export_autonomous = false;
    auto* export_model =
        app.add_subcommand("export-model", "write the shop-floor net as an XML model file");
    export_model->add_option("file", export_path, "destination path")->required();
    export_model->add_option("--orders", export_orders, "orders in the initial marking");
    export_model->add_option("--scenario", export_scenario, "A or B")
        ->check(CLI::IsMember({"A", "B"}));
    export_model->add_flag("--autonomous", export_autonomous,
                           "pre-authorize every operation (free-running plant)");

    std::string transcript_path;
    auto* check_transcript = app.add_subcommand(
        "check-transcript", "replay a conversation transcript against the choreography automata");
    check_transcript->add_option("file", transcript_path, "line-delimited transcript file")
        ->required();

    std::string trace_path, replay_model;
    auto* replay = app.add_subcommand("replay", "check a trace file (optionally against its model)");
    replay->add_option("file", trace_path, "line-delimited trace file")->required();
    replay->add_option("--model", replay_model, "XML model file with initial marking");

    CLI11_PARSE(app, argc, argv);

    try {
        if (print_config) {
            std::cout << fms::print_config(fms::FmsConfig{});
            std::cout << "runs = 5\nseeds = 1..5\nscenario = A\ncontroller = agents\n"
                      << "horizon_cap_ms = 1000000000\n";
            return 0;
        }
        if (run->parsed()) return cmd_run(run_args, *run);
        if (compare->parsed()) return cmd_compare(compare_in, compare_out);
        if (validate->parsed()) return cmd_validate_model(model_path);
        if (check_transcript->parsed()) return cmd_check_transcript(transcript_path);
        if (export_model->parsed()) {
            fms::FmsConfig cfg;
            cfg.order_count = export_orders;
            if (export_scenario == "B") cfg.failure = fms::FailureModel{"cnc", 0.2, 30000, cfg.seed};
            auto net = fms::build_fms_net(cfg);
            auto marking = fms::build_initial_marking(net, cfg, export_autonomous);
            std::ofstream os(export_path, std::ios::binary);
            if (!os) throw Error("cannot write '" + export_path + "'");
            os << bridge::net_to_xml(net, &marking);
            std::cout << "wrote " << export_path << "\n";
            return 0;
        }
        if (replay->parsed()) return cmd_replay(trace_path, replay_model);
        std::cout << app.help();
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
