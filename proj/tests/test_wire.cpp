#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <thread>

#include "shopfloor/bridge/coupled.hpp"
#include "shopfloor/bridge/wire.hpp"
#include "shopfloor/errors.hpp"
#include "shopfloor/fms/model.hpp"
#include "shopfloor/petri/trace_io.hpp"

using namespace shopfloor;
using namespace shopfloor::bridge;

TEST_CASE("frame channel carries messages across a loopback socket") {
    ListenSocket listener;
    std::thread server([&] {
        FrameChannel ch(listener.accept_one());
        auto m = ch.recv();
        REQUIRE(m.has_value());
        ch.send("pong:" + *m);
        CHECK(!ch.recv().has_value());  // orderly close
    });
    {
        FrameChannel ch(connect_loopback(listener.port()));
        ch.send("ping");
        auto reply = ch.recv();
        REQUIRE(reply.has_value());
        CHECK(*reply == "pong:ping");
    }
    server.join();
}

TEST_CASE("transport equivalence: remote run trace equals in-process trace") {
    fms::FmsConfig cfg;
    cfg.order_count = 10;
    auto net = fms::build_fms_net(cfg);
    auto marking = fms::build_initial_marking(net, cfg);

    mes::MesSystem local(cfg, fms::make_orders(cfg));
    auto in_process = step_coupled(net, marking, local, 1'000'000'000);

    RemoteMesStats stats;
    auto remote = step_coupled_remote(net, marking, cfg, 1'000'000'000, 0, &stats);

    CHECK(in_process.orders_completed == 10);
    CHECK(remote.orders_completed == 10);
    CHECK(petri::trace_to_string(remote.trace) == petri::trace_to_string(in_process.trace));
    CHECK(remote.messages_delivered == in_process.messages_delivered);
    CHECK(stats.conformance_violations == 0);
    CHECK(stats.calendar_violations == 0);

    // Same command stream, byte for byte.
    REQUIRE(remote.commands.size() == in_process.commands.size());
    for (std::size_t i = 0; i < remote.commands.size(); ++i)
        CHECK(serialize(remote.commands[i]) == serialize(in_process.commands[i]));
}

TEST_CASE("transport equivalence holds under failures") {
    fms::FmsConfig cfg;
    cfg.order_count = 6;
    cfg.seed = 11;
    fms::FailureModel f;
    f.probability = 0.3;
    f.rng_seed = 11;
    cfg.failure = f;

    auto net = fms::build_fms_net(cfg);
    auto marking = fms::build_initial_marking(net, cfg);

    mes::MesSystem local(cfg, fms::make_orders(cfg));
    auto in_process = step_coupled(net, marking, local, 1'000'000'000);
    auto remote = step_coupled_remote(net, marking, cfg, 1'000'000'000);

    CHECK(petri::trace_to_string(remote.trace) == petri::trace_to_string(in_process.trace));
}
