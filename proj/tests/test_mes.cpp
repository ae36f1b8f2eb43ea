#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "shopfloor/errors.hpp"
#include "shopfloor/mes/conformance.hpp"
#include "shopfloor/mes/database.hpp"
#include "shopfloor/mes/ontology.hpp"
#include "shopfloor/mes/system.hpp"
#include "shopfloor/mes/types.hpp"

using namespace shopfloor;
using namespace shopfloor::mes;

namespace {

fms::FmsConfig basic_config(std::int64_t orders = 0) {
    fms::FmsConfig c;
    c.order_count = orders;
    return c;
}

MesSystem make_system(std::int64_t orders = 0) {
    auto cfg = basic_config(orders);
    return MesSystem(cfg, fms::make_orders(cfg));
}

TaskAnnouncement machine_task(const std::string& id, std::int64_t order, std::int64_t part) {
    TaskAnnouncement t;
    t.task_id = id;
    t.order_id = order;
    t.op = kOpMachine;
    t.part_id = part;
    t.required_capabilities = op_required_capabilities(kOpMachine);
    return t;
}

}  // namespace

TEST_CASE("idle shop: one milling task allocates on station1 in 8 messages") {
    auto mes = make_system();
    auto result = mes.start_new_task(machine_task("J1", 1, 1), 0);

    REQUIRE(result.outcome == StartTaskResult::Outcome::Allocated);
    REQUIRE(result.allocation.has_value());
    CHECK(result.allocation->station == fms::kStationMachining);
    CHECK(result.allocation->start == 0);
    CHECK(result.allocation->end == 10000);
    REQUIRE(result.transcript.size() == 8);

    // The documented choreography, message by message.
    auto expect = [&](std::size_t i, Performative p, Role from, Role to) {
        CHECK(result.transcript[i].performative == p);
        CHECK(result.transcript[i].sender.role == from);
        CHECK(result.transcript[i].receiver.role == to);
    };
    expect(0, Performative::Request, Role::SMA, Role::AM);
    expect(1, Performative::Query, Role::AM, Role::DbaShop);
    expect(2, Performative::Inform, Role::DbaShop, Role::AM);
    expect(3, Performative::Query, Role::AM, Role::SCA);
    expect(4, Performative::Propose, Role::SCA, Role::AM);
    expect(5, Performative::Accept, Role::AM, Role::DbaShop);
    expect(6, Performative::Inform, Role::DbaShop, Role::SCA);
    expect(7, Performative::Command, Role::SCA, Role::MRA);

    // The dispatch crossed to the bridge.
    auto dispatches = mes.take_dispatches();
    REQUIRE(dispatches.size() == 1);
    CHECK(dispatches[0].op == kOpMachine);
    CHECK(dispatches[0].station == fms::kStationMachining);
}

TEST_CASE("unknown capability: transcript ends with a DBA refusal and the task defers") {
    auto mes = make_system();
    TaskAnnouncement t;
    t.task_id = "J2";
    t.order_id = 1;
    t.op = kOpMachine;
    t.required_capabilities = {"teleportation"};
    auto result = mes.start_new_task(t, 0);

    CHECK(result.outcome == StartTaskResult::Outcome::Deferred);
    REQUIRE(result.transcript.size() == 3);
    CHECK(result.transcript.back().performative == Performative::Refuse);
    CHECK(result.transcript.back().sender.role == Role::DbaShop);
    CHECK(mes.take_dispatches().empty());
}

TEST_CASE("busy station: second task parks and is allocated on release") {
    auto mes = make_system();
    auto first = mes.start_new_task(machine_task("J1", 1, 1), 0);
    REQUIRE(first.outcome == StartTaskResult::Outcome::Allocated);

    auto second = mes.start_new_task(machine_task("J2", 2, 4), 0);
    CHECK(second.outcome == StartTaskResult::Outcome::Parked);
    REQUIRE(second.transcript.size() == 5);
    CHECK(second.transcript.back().performative == Performative::Refuse);
    CHECK(second.transcript.back().payload.at("available") == "false");

    // Plant reports the first machining complete at t=10000: the parked task
    // must be re-evaluated and allocated back-to-back.
    PlantSignal done;
    done.kind = PlantSignal::Kind::Completed;
    done.station = fms::kStationMachining;
    done.op = kOpMachine;
    done.order_id = 1;
    done.part_id = 1;
    done.time = 10000;
    mes.deliver_plant_signal(done);
    mes.drain(10000);

    REQUIRE(mes.allocations().size() == 2);
    CHECK(mes.allocations()[1].task_id == "J2");
    CHECK(mes.allocations()[1].start == 10000);
    CHECK(mes.allocations()[1].end == 20000);
    CHECK(audit_calendars(mes.calendars()).empty());
}

TEST_CASE("databases: read-your-writes, negative results, last-writer-wins") {
    Database db("test");
    CHECK(db.query("missing") == nullptr);
    db.write("k", {{"v", "1"}}, 5);
    REQUIRE(db.query("k") != nullptr);
    CHECK(db.query("k")->value.at("v") == "1");
    db.write("k", {{"v", "2"}}, 5);  // same instant, later seq wins
    CHECK(db.query("k")->value.at("v") == "2");
    db.write("k", {{"v", "3"}}, 9);
    CHECK(db.query("k")->value.at("v") == "3");
    CHECK(db.journal().size() == 3);
}

TEST_CASE("shop DBA answers plain queries with negative informs") {
    auto mes = make_system();
    mes.inject_message_for_test(shop_agent(Role::SMCA), shop_agent(Role::DbaShop),
                                Performative::Query, "q-1", {{"key", "no/such/key"}}, 0);
    mes.drain(0);
    const auto& log = mes.message_log();
    REQUIRE(log.size() == 2);
    CHECK(log[1].performative == Performative::Inform);
    CHECK(log[1].payload.at("found") == "false");
}

TEST_CASE("match_capability ranks stations and reports no-capable-station") {
    auto records = default_capability_records(basic_config());
    CHECK(match_capability({"milling"}, records) ==
          std::vector<std::string>{fms::kStationMachining});
    CHECK(match_capability({"assembly"}, records) ==
          std::vector<std::string>{fms::kStationAssembly});
    CHECK(match_capability({"storage", "transport"}, records) ==
          std::vector<std::string>{fms::kStationAsrs});
    CHECK(match_capability({"teleportation"}, records).empty());

    // Ranking: earlier earliest_start wins; ties break on station id.
    std::vector<CapabilityRecord> two = {
        {"m1", "milling", "stationA", 1000},
        {"m2", "milling", "stationB", 1000},
    };
    CHECK(match_capability({"milling"}, two) ==
          std::vector<std::string>({"stationA", "stationB"}));
    CHECK(match_capability({"milling"}, two, {{"stationA", 500}, {"stationB", 0}}) ==
          std::vector<std::string>({"stationB", "stationA"}));
}

TEST_CASE("calendar overlap detection") {
    std::vector<CalendarEntry> entries = {{"a", 0, 10000, true}};
    CHECK(calendar_has_overlap(entries, 5000, 15000));
    CHECK(calendar_has_overlap(entries, 0, 1));
    CHECK(!calendar_has_overlap(entries, 10000, 20000));
    CHECK(!calendar_has_overlap(entries, 20000, 30000));

    std::map<std::string, std::vector<CalendarEntry>> calendars;
    calendars["cnc"] = {{"a", 0, 10000, true}, {"b", 5000, 15000, true}};
    CHECK(audit_calendars(calendars).size() == 1);
}

TEST_CASE("message budget turns livelock into a divergence error") {
    auto mes = make_system();
    mes.set_message_budget(200);

    struct PingPong : Agent {
        PingPong(AgentId self, AgentId peer) : self_(self), peer_(peer) {}
        const AgentId& id() const override { return self_; }
        void handle(const AgentMessage& msg, MesContext& ctx) override {
            ctx.send(self_, peer_, Performative::Notify, msg.conversation_id, msg.payload,
                     msg.seq);
        }
        AgentId self_, peer_;
    };
    auto a = station_agent(Role::MRA, fms::kStationMachining, 1);
    auto b = station_agent(Role::MRA, fms::kStationAssembly, 1);
    mes.add_agent_for_test(std::make_unique<PingPong>(a, b));
    mes.add_agent_for_test(std::make_unique<PingPong>(b, a));
    mes.inject_message_for_test(a, b, Performative::Notify, "loop", {{"n", "0"}}, 0);
    CHECK_THROWS_AS(mes.drain(0), DivergenceError);
}

TEST_CASE("system behaviour is deterministic across identical runs") {
    auto run_once = [](std::vector<std::string>& lines, std::map<std::string, std::string>& states) {
        auto mes = make_system();
        mes.start_new_task(machine_task("J1", 1, 1), 0);
        auto second = mes.start_new_task(machine_task("J2", 2, 4), 0);
        PlantSignal done;
        done.kind = PlantSignal::Kind::Completed;
        done.station = fms::kStationMachining;
        done.op = kOpMachine;
        done.order_id = 1;
        done.part_id = 1;
        done.time = 10000;
        mes.deliver_plant_signal(done);
        mes.drain(10000);
        for (const auto& m : mes.message_log()) lines.push_back(message_line(m));
        states = mes.agent_state_summaries();
        (void)second;
    };
    std::vector<std::string> lines1, lines2;
    std::map<std::string, std::string> states1, states2;
    run_once(lines1, states1);
    run_once(lines2, states2);
    CHECK(lines1 == lines2);
    CHECK(states1 == states2);
}

TEST_CASE("conformance checker accepts real transcripts and rejects corrupted ones") {
    auto mes = make_system();
    mes.start_new_task(machine_task("J1", 1, 1), 0);
    auto parked = mes.start_new_task(machine_task("J2", 2, 4), 0);
    (void)parked;
    PlantSignal done;
    done.kind = PlantSignal::Kind::Completed;
    done.station = fms::kStationMachining;
    done.op = kOpMachine;
    done.order_id = 1;
    done.part_id = 1;
    done.time = 10000;
    mes.deliver_plant_signal(done);
    mes.drain(10000);
    done.order_id = 2;
    done.part_id = 4;
    done.time = 20000;
    mes.deliver_plant_signal(done);
    mes.drain(20000);

    auto report = check_conformance(mes.message_log());
    for (const auto& v : report.violations) MESSAGE(v);
    CHECK(report.ok());
    CHECK(report.conversations >= 3);

    // Corrupt one message: the accept skips the availability check.
    auto log = mes.message_log();
    for (auto& m : log) {
        if (m.performative == Performative::Propose) {
            m.performative = Performative::Accept;
            std::swap(m.sender, m.receiver);
            break;
        }
    }
    CHECK(!check_conformance(log).ok());
}

TEST_CASE("agent ids carry stations exactly for station-level roles") {
    CHECK(shop_agent(Role::SMA).str() == "SMA#0");
    CHECK(station_agent(Role::SCA, fms::kStationMachining).str() ==
          "SCA#0@station1-machining");
    CHECK_THROWS_AS(shop_agent(Role::SCA), UnknownAgentError);
    CHECK_THROWS_AS(station_agent(Role::SMA, fms::kStationMachining), UnknownAgentError);
}

TEST_CASE("op capability and exclusivity tables") {
    CHECK(op_required_capabilities(kOpMachine) == std::vector<std::string>{"milling"});
    CHECK(op_required_capabilities(kOpRetrieveMove) ==
          std::vector<std::string>({"storage", "transport"}));
    CHECK(op_exclusive_resources(kOpMachine) == std::vector<std::string>{fms::kResCnc});
    CHECK(op_exclusive_resources(kOpMoveToAssembly).empty());
    CHECK_THROWS_AS(op_required_capabilities("paint"), MalformedTaskError);
}

TEST_CASE("shop DBA write commands are acknowledged and readable back") {
    auto mes = make_system();
    mes.inject_message_for_test(shop_agent(Role::SMCA), shop_agent(Role::DbaShop),
                                Performative::Command, "w-1",
                                {{"write_key", "note/cnc"}, {"value.state", "watch"}}, 3);
    mes.drain(3);
    const auto& log = mes.message_log();
    REQUIRE(log.size() == 2);
    CHECK(log[1].performative == Performative::Inform);
    CHECK(log[1].payload.at("written") == "true");
    REQUIRE(mes.shop_db().query("note/cnc") != nullptr);
    CHECK(mes.shop_db().query("note/cnc")->value.at("state") == "watch");
    CHECK(mes.shop_db().query("note/cnc")->last_updated == 3);
}

TEST_CASE("transcript lines round-trip through the parser") {
    auto mes = make_system();
    mes.start_new_task(machine_task("J1", 1, 1), 0);
    for (const auto& m : mes.message_log()) {
        auto back = message_from_line(message_line(m));
        CHECK(back.conversation_id == m.conversation_id);
        CHECK(back.sender == m.sender);
        CHECK(back.receiver == m.receiver);
        CHECK(back.performative == m.performative);
        CHECK(back.seq == m.seq);
        CHECK(back.in_reply_to == m.in_reply_to);
        CHECK(back.sent_at == m.sent_at);
        CHECK(back.payload == m.payload);
    }
    CHECK_THROWS_AS(message_from_line("not a transcript line"), Error);
}

TEST_CASE("messages to unregistered agents are an unknown-agent error") {
    auto mes = make_system();
    mes.inject_message_for_test(shop_agent(Role::SMCA),
                                station_agent(Role::MRA, fms::kStationMachining, 9),
                                Performative::Notify, "x-1", {{"k", "v"}}, 0);
    CHECK_THROWS_AS(mes.drain(0), UnknownAgentError);
}
