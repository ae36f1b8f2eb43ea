#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <set>
#include <random>
#include <sstream>

#include "shopfloor/bridge/codec.hpp"
#include "shopfloor/bridge/coupled.hpp"
#include "shopfloor/bridge/framing.hpp"
#include "shopfloor/bridge/net_xml.hpp"
#include "shopfloor/bridge/translate.hpp"
#include "shopfloor/bridge/xml.hpp"
#include "shopfloor/errors.hpp"
#include "shopfloor/fms/model.hpp"
#include "shopfloor/mes/conformance.hpp"
#include "shopfloor/petri/trace_io.hpp"

using namespace shopfloor;
using namespace shopfloor::bridge;

#ifndef SHOPFLOOR_FIXTURE_DIR
#define SHOPFLOOR_FIXTURE_DIR "tests/fixtures"
#endif

namespace {

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    REQUIRE(is.good());
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

std::string fixture(const std::string& name) {
    return slurp(std::string(SHOPFLOOR_FIXTURE_DIR) + "/" + name);
}

mes::AgentMessage random_message(std::mt19937_64& rng) {
    using mes::Performative;
    using mes::Role;
    static const Role roles[] = {Role::SMA, Role::AM, Role::SMCA, Role::DbaShop};
    static const Role station_roles[] = {Role::SCA, Role::SMonA, Role::AMI, Role::MRA,
                                         Role::DbaStation};
    static const Performative perfs[] = {Performative::Request, Performative::Inform,
                                         Performative::Query, Performative::Propose,
                                         Performative::Accept, Performative::Refuse,
                                         Performative::Command, Performative::Notify};
    static const char* stations[] = {fms::kStationMachining, fms::kStationAssembly,
                                     fms::kStationAsrs};

    auto pick_id = [&](std::uint64_t r) {
        if (r % 3 == 0) return mes::shop_agent(roles[r / 3 % 4]);
        return mes::station_agent(station_roles[r / 3 % 5], stations[r / 15 % 3],
                                  static_cast<int>(r % 2));
    };

    mes::AgentMessage m;
    m.conversation_id = "conv-" + std::to_string(rng() % 1000);
    m.sender = pick_id(rng());
    m.receiver = pick_id(rng());
    m.performative = perfs[rng() % 8];
    if (rng() % 2) m.in_reply_to = rng() % 100;
    m.seq = rng() % 100000;
    m.sent_at = static_cast<petri::TimeMs>(rng() % 1000000);
    const int fields = static_cast<int>(rng() % 5);
    for (int i = 0; i < fields; ++i) {
        std::string key = "k" + std::to_string(rng() % 50);
        std::string value;
        const int len = static_cast<int>(rng() % 12);
        const char alphabet[] = "abc XYZ<>&\"'0123456789-_";
        for (int j = 0; j < len; ++j) value += alphabet[rng() % (sizeof(alphabet) - 1)];
        m.payload[key] = value;
    }
    return m;
}

}  // namespace

TEST_CASE("golden fixtures match canonical serialization byte for byte") {
    CHECK(serialize(platform_mas_descriptor()) == fixture("mas_descriptor.xml"));
    CHECK(serialize(platform_agent_descriptor()) == fixture("agent_descriptor.xml"));
    CHECK(serialize(platform_objects_descriptor()) == fixture("objects_descriptor.xml"));

    const std::string mas = serialize(platform_mas_descriptor());
    CHECK(mas.rfind("<MAS NAME=\"RFIDMAS\"><AGENTS-LIST><AGENT NAME=\"HA\">", 0) == 0);
    // Empty collections keep their section tags.
    CHECK(mas.find("<STATES-LIST></STATES-LIST>") != std::string::npos);
}

TEST_CASE("serialization is canonical: equal values, equal bytes") {
    auto a = platform_agent_descriptor();
    auto b = platform_agent_descriptor();
    CHECK(serialize(a) == serialize(b));
}

TEST_CASE("parse(serialize(m)) = m for generated protocol messages") {
    std::mt19937_64 rng(20240817);
    for (int i = 0; i < 1000; ++i) {
        mes::AgentMessage m = random_message(rng);
        auto bytes = serialize(m);
        auto back = parse(bytes);
        REQUIRE(std::holds_alternative<mes::AgentMessage>(back));
        const auto& r = std::get<mes::AgentMessage>(back);
        CHECK(r.conversation_id == m.conversation_id);
        CHECK(r.sender == m.sender);
        CHECK(r.receiver == m.receiver);
        CHECK(r.performative == m.performative);
        CHECK(r.in_reply_to == m.in_reply_to);
        CHECK(r.seq == m.seq);
        CHECK(r.sent_at == m.sent_at);
        CHECK(r.payload == m.payload);
        // Round-trip through bytes is the identity on the canonical form.
        CHECK(serialize(r) == bytes);
    }
}

TEST_CASE("descriptor documents round-trip") {
    auto mas = platform_mas_descriptor();
    CHECK(std::get<MasDescriptor>(parse(serialize(mas))) == mas);
    auto agent = platform_agent_descriptor();
    CHECK(std::get<AgentDescriptor>(parse(serialize(agent))) == agent);
    auto objects = platform_objects_descriptor();
    CHECK(std::get<std::vector<ObjectDescriptor>>(parse(serialize(objects))) == objects);
}

TEST_CASE("parse errors carry byte offsets and kinds") {
    // Truncated input.
    try {
        parse("<MAS NAME=\"X\"><AGENTS-LIST>");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.kind == ParseError::Kind::MalformedXml);
        CHECK(e.offset > 0);
    }
    // Agent without NAME.
    try {
        parse("<MAS NAME=\"X\"><AGENTS-LIST><AGENT></AGENT></AGENTS-LIST>"
              "<OBJECT-LIST></OBJECT-LIST><STATES-LIST></STATES-LIST>"
              "<ACTIONS-LIST></ACTIONS-LIST></MAS>");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.kind == ParseError::Kind::MissingName);
    }
    // Unknown element inside a known section.
    try {
        parse("<MAS NAME=\"X\"><AGENTS-LIST><ROBOT NAME=\"R\"></ROBOT></AGENTS-LIST>"
              "<OBJECT-LIST></OBJECT-LIST><STATES-LIST></STATES-LIST>"
              "<ACTIONS-LIST></ACTIONS-LIST></MAS>");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.kind == ParseError::Kind::UnknownElement);
    }
}

TEST_CASE("framing: length prefix and arbitrary chunk reassembly") {
    const std::string m1 = "<MAS NAME=\"RFIDMAS\"></MAS>";
    const std::string m2 = "<OBJECTS-LIST></OBJECTS-LIST>";
    std::string wire = frame(m1) + frame(m2);
    REQUIRE(wire.size() == m1.size() + m2.size() + 8);
    CHECK(static_cast<unsigned char>(wire[3]) == m1.size());

    // Feed in every possible split position: both messages always recovered.
    for (std::size_t split = 0; split <= wire.size(); ++split) {
        Deframer d;
        std::vector<std::string> got;
        for (auto& m : d.feed(std::string_view(wire).substr(0, split))) got.push_back(m);
        for (auto& m : d.feed(std::string_view(wire).substr(split))) got.push_back(m);
        REQUIRE(got.size() == 2);
        CHECK(got[0] == m1);
        CHECK(got[1] == m2);
        d.finish();
    }
}

TEST_CASE("framing: oversize and broken streams are errors") {
    Deframer d(16);
    std::string big(17, 'x');
    CHECK_THROWS_AS(d.feed(frame(big)), OversizeFrameError);

    Deframer d2;
    d2.feed(frame("hello").substr(0, 7));
    CHECK_THROWS_AS(d2.finish(), BrokenStreamError);
}

TEST_CASE("translate_decision maps dispatches onto the command table") {
    mes::Dispatch d;
    d.task_id = "T7-1";
    d.op = mes::kOpMachine;
    d.station = fms::kStationMachining;
    d.order_id = 3;
    d.part_id = 7;
    d.issued_at = 8000;
    auto cmd = translate_decision(d);
    CHECK(cmd.target == "CNC");
    CHECK(cmd.action == "start-machining");
    CHECK(cmd.params.at("PART-ID") == "7");

    auto inj = command_to_injection(cmd);
    CHECK(inj.place == fms::kPlaceAuthMachine);

    mes::Dispatch a;
    a.task_id = "T3-9";
    a.op = mes::kOpAssemble;
    a.station = fms::kStationAssembly;
    a.order_id = 3;
    auto acmd = translate_decision(a);
    CHECK(acmd.target == "GLUE-ASSEMBLY");
    CHECK(acmd.action == "start-assembly");
    CHECK(command_to_injection(acmd).place == fms::kPlaceAuthAssemble);

    mes::Dispatch bad = d;
    bad.op = "polish";
    CHECK_THROWS_AS(translate_decision(bad), UnknownObjectError);

    ActionCommand unknown;
    unknown.target = "LATHE";
    unknown.action = "start";
    CHECK_THROWS_AS(command_to_injection(unknown), UnknownObjectError);
}

TEST_CASE("translate_event: completions notify, movements only update") {
    petri::SimEvent done;
    done.time = 18000;
    done.kind = petri::EventKind::Fire;
    done.transition = fms::kTMachineDone;
    done.payload = {{"p.order", "1"}, {"p.part_id", "2"}, {"p.kind", "handle"}, {"delay_ms", "0"}};
    auto t = translate_event(done);
    REQUIRE(t.signal.has_value());
    CHECK(t.signal->kind == mes::PlantSignal::Kind::Completed);
    CHECK(t.signal->station == fms::kStationMachining);
    CHECK(t.signal->op == mes::kOpMachine);
    REQUIRE(t.signal->part_id.has_value());
    CHECK(*t.signal->part_id == 2);

    petri::SimEvent fail;
    fail.time = 20000;
    fail.kind = petri::EventKind::Failure;
    fail.transition = fms::kTCncFail;
    fail.payload = {{"p.order", "1"}, {"p.part_id", "2"}};
    auto tf = translate_event(fail);
    REQUIRE(tf.signal.has_value());
    CHECK(tf.signal->kind == mes::PlantSignal::Kind::Failure);

    petri::SimEvent moved;
    moved.time = 100;
    moved.kind = petri::EventKind::TokenCreated;
    moved.transition = fms::kTRetrieveStart;
    moved.payload = {{"place", fms::kPlaceMovingS1}, {"token", "{...}@8100"}};
    auto tm = translate_event(moved);
    CHECK(!tm.signal.has_value());
    REQUIRE(tm.update.has_value());
    CHECK(tm.update->state == "token-in");
}

TEST_CASE("net model xml round-trips and loaded nets behave identically") {
    fms::FmsConfig cfg;
    cfg.order_count = 2;
    cfg.seed = 9;
    fms::FailureModel f;
    f.probability = 0.3;
    f.rng_seed = 9;
    cfg.failure = f;

    auto net = fms::build_fms_net(cfg);
    auto marking = fms::build_initial_marking(net, cfg, true);
    auto bytes = net_to_xml(net, &marking);

    auto loaded = net_from_xml(bytes);
    CHECK(net_to_xml(loaded.net, &loaded.initial) == bytes);
    CHECK(validate(loaded.net).empty());
    REQUIRE(loaded.has_marking);

    auto a = petri::run(net, marking, petri::RunOptions{.horizon = 10'000'000, .seed = 0});
    auto b = petri::run(loaded.net, loaded.initial, petri::RunOptions{.horizon = 10'000'000, .seed = 0});
    CHECK(petri::trace_to_string(a.trace) == petri::trace_to_string(b.trace));
}

TEST_CASE("coupled single order completes in exactly 101000 ms") {
    // Sequential per-order dispatch: 3 x (8000 + 10000 + 8000) + 15000 + 8000.
    fms::FmsConfig cfg;
    cfg.order_count = 1;
    auto net = fms::build_fms_net(cfg);
    auto marking = fms::build_initial_marking(net, cfg);
    mes::MesSystem mes(cfg, fms::make_orders(cfg));

    auto result = step_coupled(net, marking, mes, 1'000'000'000);
    CHECK(result.orders_completed == 1);

    petri::TimeMs completion = -1;
    for (const auto& ev : result.trace.events)
        if (ev.kind == petri::EventKind::Fire && ev.transition == fms::kTStoreDone)
            completion = ev.time;
    CHECK(completion == 101000);

    auto report = mes::check_conformance(mes.message_log());
    for (const auto& v : report.violations) MESSAGE(v);
    CHECK(report.ok());
    CHECK(mes::audit_calendars(mes.calendars()).empty());
}

TEST_CASE("coupled zero orders reach immediate quiescence") {
    fms::FmsConfig cfg;
    cfg.order_count = 0;
    auto net = fms::build_fms_net(cfg);
    auto marking = fms::build_initial_marking(net, cfg);
    mes::MesSystem mes(cfg, fms::make_orders(cfg));
    auto result = step_coupled(net, marking, mes, 1'000'000'000);
    CHECK(result.orders_completed == 0);
    CHECK(result.commands.empty());
    for (const auto& ev : result.trace.events)
        CHECK(ev.kind == petri::EventKind::Deadlock);
}

TEST_CASE("coupled two orders: second machining waits for the first to release") {
    fms::FmsConfig cfg;
    cfg.order_count = 2;
    auto net = fms::build_fms_net(cfg);
    auto marking = fms::build_initial_marking(net, cfg);
    mes::MesSystem mes(cfg, fms::make_orders(cfg));
    auto result = step_coupled(net, marking, mes, 1'000'000'000);
    CHECK(result.orders_completed == 2);

    // Allocation calendar: order 1 part 1 machines [8000,18000], order 2
    // part 1 parks and follows back-to-back at 18000.
    petri::TimeMs t11 = -1, t21 = -1;
    for (const auto& a : mes.allocations()) {
        if (a.task_id == "T1-1") t11 = a.start;
        if (a.task_id == "T2-1") t21 = a.start;
    }
    CHECK(t11 == 8000);
    CHECK(t21 == 18000);
    CHECK(mes::audit_calendars(mes.calendars()).empty());

    auto report = mes::check_conformance(mes.message_log());
    for (const auto& v : report.violations) MESSAGE(v);
    CHECK(report.ok());
}

TEST_CASE("coupled run audit: one command per dispatch, one signal per completion") {
    fms::FmsConfig cfg;
    cfg.order_count = 3;
    auto net = fms::build_fms_net(cfg);
    auto marking = fms::build_initial_marking(net, cfg);
    mes::MesSystem mes(cfg, fms::make_orders(cfg));
    auto result = step_coupled(net, marking, mes, 1'000'000'000);
    CHECK(result.orders_completed == 3);

    // 11 operations per order, each dispatched exactly once, each with
    // exactly one allocation.
    CHECK(result.commands.size() == 33);
    CHECK(mes.allocations().size() == 33);
    std::set<std::string> allocated_tasks;
    for (const auto& a : mes.allocations()) allocated_tasks.insert(a.task_id);
    CHECK(allocated_tasks.size() == 33);
    std::size_t external_commands = 0;
    std::size_t op_completion_fires = 0;
    for (const auto& ev : result.trace.events) {
        if (ev.kind == petri::EventKind::ExternalCommand) ++external_commands;
        if (ev.kind == petri::EventKind::Fire &&
            (ev.transition == fms::kTRetrieveDone || ev.transition == fms::kTMachineDone ||
             ev.transition == fms::kTMove2Done || ev.transition == fms::kTAssembleDone ||
             ev.transition == fms::kTStoreDone))
            ++op_completion_fires;
    }
    CHECK(external_commands == 33);
    CHECK(op_completion_fires == 33);
}

TEST_CASE("divergence keeps the partial joint trace for diagnosis") {
    fms::FmsConfig cfg;
    cfg.order_count = 1;
    auto net = fms::build_fms_net(cfg);
    auto marking = fms::build_initial_marking(net, cfg);
    mes::MesSystem mes(cfg, fms::make_orders(cfg));
    mes.set_message_budget(4);  // far below one allocation conversation

    auto result = step_coupled(net, marking, mes, 1'000'000'000);
    REQUIRE(result.divergence.has_value());
    CHECK(result.divergence->find("budget") != std::string::npos);
    CHECK(result.orders_completed == 0);
}
