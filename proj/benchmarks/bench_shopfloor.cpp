#include <benchmark/benchmark.h>

#include <sstream>

#include "shopfloor/bridge/codec.hpp"
#include "shopfloor/bridge/coupled.hpp"
#include "shopfloor/bridge/framing.hpp"
#include "shopfloor/fms/model.hpp"
#include "shopfloor/metrics/conventional.hpp"
#include "shopfloor/petri/engine.hpp"
#include "shopfloor/petri/trace_io.hpp"

using namespace shopfloor;

namespace {

void BM_EngineAutonomousRun(benchmark::State& state) {
    fms::FmsConfig cfg;
    cfg.order_count = state.range(0);
    auto net = fms::build_fms_net(cfg);
    auto marking = fms::build_initial_marking(net, cfg, true);
    std::size_t fires = 0;
    for (auto _ : state) {
        auto result = petri::run(net, marking, petri::RunOptions{.horizon = 1'000'000'000});
        fires = result.trace.events.size();
        benchmark::DoNotOptimize(result.final_marking);
    }
    state.counters["events"] = static_cast<double>(fires);
}
BENCHMARK(BM_EngineAutonomousRun)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_EnabledBindings(benchmark::State& state) {
    fms::FmsConfig cfg;
    cfg.order_count = state.range(0);
    auto net = fms::build_fms_net(cfg);
    auto marking = fms::build_initial_marking(net, cfg, true);
    for (auto _ : state) {
        auto bindings = petri::enabled_bindings(net, marking);
        benchmark::DoNotOptimize(bindings);
    }
}
BENCHMARK(BM_EnabledBindings)->Arg(10)->Arg(100)->Unit(benchmark::kMicrosecond);

void BM_CoupledRun(benchmark::State& state) {
    fms::FmsConfig cfg;
    cfg.order_count = state.range(0);
    auto net = fms::build_fms_net(cfg);
    auto marking = fms::build_initial_marking(net, cfg);
    for (auto _ : state) {
        mes::MesSystem mes(cfg, fms::make_orders(cfg));
        auto result = bridge::step_coupled(net, marking, mes, 1'000'000'000);
        benchmark::DoNotOptimize(result.orders_completed);
    }
}
BENCHMARK(BM_CoupledRun)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_ConventionalRun(benchmark::State& state) {
    fms::FmsConfig cfg;
    cfg.order_count = state.range(0);
    auto net = fms::build_fms_net(cfg);
    auto marking = fms::build_initial_marking(net, cfg);
    for (auto _ : state) {
        metrics::ConventionalController controller(cfg);
        auto result =
            petri::run(net, marking, petri::RunOptions{.horizon = 1'000'000'000}, &controller);
        benchmark::DoNotOptimize(result.final_marking);
    }
}
BENCHMARK(BM_ConventionalRun)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_SerializeMessage(benchmark::State& state) {
    mes::AgentMessage m;
    m.conversation_id = "task-T123-4";
    m.sender = mes::shop_agent(mes::Role::AM);
    m.receiver = mes::station_agent(mes::Role::SCA, fms::kStationMachining);
    m.performative = mes::Performative::Query;
    m.seq = 321;
    m.in_reply_to = 320;
    m.sent_at = 48000;
    m.payload = {{"task", "T123-4"}, {"op", "machine"}, {"order", "123"}, {"part_id", "368"}};
    for (auto _ : state) {
        auto bytes = bridge::serialize(m);
        benchmark::DoNotOptimize(bytes);
    }
}
BENCHMARK(BM_SerializeMessage);

void BM_ParseMessage(benchmark::State& state) {
    mes::AgentMessage m;
    m.conversation_id = "task-T123-4";
    m.sender = mes::shop_agent(mes::Role::AM);
    m.receiver = mes::station_agent(mes::Role::SCA, fms::kStationMachining);
    m.performative = mes::Performative::Query;
    m.seq = 321;
    m.sent_at = 48000;
    m.payload = {{"task", "T123-4"}, {"op", "machine"}, {"order", "123"}, {"part_id", "368"}};
    const auto bytes = bridge::serialize(m);
    for (auto _ : state) {
        auto parsed = bridge::parse(bytes);
        benchmark::DoNotOptimize(parsed);
    }
}
BENCHMARK(BM_ParseMessage);

void BM_Deframe(benchmark::State& state) {
    std::string wire;
    for (int i = 0; i < 100; ++i) wire += bridge::frame(std::string(200, 'x'));
    for (auto _ : state) {
        bridge::Deframer d;
        std::size_t n = 0;
        for (std::size_t off = 0; off < wire.size(); off += 1024)
            n += d.feed(std::string_view(wire).substr(off, 1024)).size();
        benchmark::DoNotOptimize(n);
    }
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * wire.size()));
}
BENCHMARK(BM_Deframe);

void BM_TraceRoundTrip(benchmark::State& state) {
    fms::FmsConfig cfg;
    cfg.order_count = 10;
    auto net = fms::build_fms_net(cfg);
    auto marking = fms::build_initial_marking(net, cfg, true);
    auto result = petri::run(net, marking, petri::RunOptions{.horizon = 1'000'000'000});
    const auto text = petri::trace_to_string(result.trace);
    for (auto _ : state) {
        auto back = petri::trace_from_string(text);
        benchmark::DoNotOptimize(back);
    }
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_TraceRoundTrip);

}  // namespace

BENCHMARK_MAIN();
