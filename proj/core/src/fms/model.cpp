#include "shopfloor/fms/model.hpp"

#include "shopfloor/errors.hpp"
#include "shopfloor/petri/expr.hpp"
#include "shopfloor/petri/rng.hpp"

namespace shopfloor::fms {

using petri::Color;
using petri::ColorSet;
using petri::ColorToken;
using petri::Expr;
using petri::ExprPtr;
using petri::FieldType;
using petri::InputArc;
using petri::Marking;
using petri::NetModel;
using petri::OutputArc;
using petri::Place;
using petri::TokenInjection;
using petri::TokenSpec;
using petri::Transition;

namespace {

const ColorSet kPartColors = {{"kind", FieldType::Str},
                              {"order", FieldType::Int},
                              {"part_id", FieldType::Int}};
const ColorSet kOrderColors = {{"order", FieldType::Int}};
const ColorSet kAuthPartColors = {{"part_id", FieldType::Int}};
const ColorSet kRngColors = {{"state", FieldType::Int}};

// Finishing transitions fire before new starts at the same instant so
// resources release first and controllers can react back-to-back.
constexpr int kDonePriority = 0;
constexpr int kStartPriority = 10;

ExprPtr part_match(const char* auth_var, const char* part_var) {
    return Expr::eq(Expr::field(auth_var, "part_id"), Expr::field(part_var, "part_id"));
}

ExprPtr order_match(const char* auth_var, const char* other_var) {
    return Expr::eq(Expr::field(auth_var, "order"), Expr::field(other_var, "order"));
}

TokenSpec copy_of(const char* var) { return TokenSpec{var, {}}; }

TokenSpec order_of(const char* var) {
    TokenSpec spec;
    spec.fields = {{"order", Expr::field(var, "order")}};
    return spec;
}

}  // namespace

NetModel build_fms_net(const FmsConfig& config) {
    check(config);
    const bool failures = config.failure && config.failure->probability > 0.0;

    NetModel net;
    net.name = "fms-lab";
    net.places = {
        {kPlaceStoreParts, kPartColors, std::nullopt},
        {kPlaceOrderQueue, kOrderColors, std::nullopt},
        {kPlaceMovingS1, kPartColors, std::nullopt},
        {kPlaceS1In, kPartColors, std::nullopt},
        {kPlaceMachining, kPartColors, 1},
        {kPlaceS1Done, kPartColors, std::nullopt},
        {kPlaceMovingS2, kPartColors, std::nullopt},
        {kPlaceS2In, kPartColors, std::nullopt},
        {kPlaceAssembling, kOrderColors, 1},
        {kPlaceS2Done, kOrderColors, std::nullopt},
        {kPlaceStoring, kOrderColors, std::nullopt},
        {kPlaceCompleted, kOrderColors, std::nullopt},
        {kPlaceCncFree, {}, 1},
        {kPlaceAsmFree, {}, 1},
        {kPlaceAuthRetrieve, kAuthPartColors, std::nullopt},
        {kPlaceAuthMachine, kAuthPartColors, std::nullopt},
        {kPlaceAuthMove2, kAuthPartColors, std::nullopt},
        {kPlaceAuthAssemble, kOrderColors, std::nullopt},
        {kPlaceAuthStore, kOrderColors, std::nullopt},
    };
    if (failures) {
        net.places.push_back({kPlaceRepairing, kPartColors, 1});
        net.places.push_back({kPlaceRng, kRngColors, 1});
    }

    const ExprPtr transport_delay = Expr::int_const(config.transport_time);
    const ExprPtr zero_delay = Expr::int_const(0);

    {
        Transition t;
        t.id = kTRetrieveStart;
        t.priority = kStartPriority;
        t.inputs = {{kPlaceAuthRetrieve, "a"}, {kPlaceStoreParts, "p"}};
        t.guard = part_match("a", "p");
        t.delay = transport_delay;
        t.outputs = {{kPlaceMovingS1, {copy_of("p")}}};
        net.transitions.push_back(std::move(t));
    }
    {
        Transition t;
        t.id = kTRetrieveDone;
        t.priority = kDonePriority;
        t.inputs = {{kPlaceMovingS1, "p"}};
        t.delay = zero_delay;
        t.outputs = {{kPlaceS1In, {copy_of("p")}}};
        net.transitions.push_back(std::move(t));
    }
    {
        Transition t;
        t.id = kTMachineStart;
        t.priority = kStartPriority;
        t.inputs = {{kPlaceAuthMachine, "a"}, {kPlaceS1In, "p"}, {kPlaceCncFree, "c"}};
        t.guard = part_match("a", "p");
        t.delay = Expr::int_const(config.cnc_time);
        t.outputs = {{kPlaceMachining, {copy_of("p")}}};
        if (failures) {
            // Survives only when the start draw clears the failure threshold;
            // the rng state advances either way.
            t.inputs.push_back({kPlaceRng, "r"});
            auto advanced = Expr::rng_next(Expr::field("r", "state"));
            t.guard = Expr::both(
                t.guard, Expr::binary(Expr::Op::Ge, Expr::rng_draw(advanced),
                                      Expr::int_const(failure_threshold(config.failure->probability))));
            TokenSpec rng_out;
            rng_out.fields = {{"state", Expr::rng_next(Expr::field("r", "state"))}};
            t.outputs.push_back({kPlaceRng, {rng_out}});
        }
        net.transitions.push_back(std::move(t));
    }
    {
        Transition t;
        t.id = kTMachineDone;
        t.priority = kDonePriority;
        t.inputs = {{kPlaceMachining, "p"}};
        t.delay = zero_delay;
        t.outputs = {{kPlaceS1Done, {copy_of("p")}}, {kPlaceCncFree, {TokenSpec{std::nullopt, {}}}}};
        net.transitions.push_back(std::move(t));
    }
    if (failures) {
        {
            Transition t;
            t.id = kTCncFail;
            t.priority = kStartPriority;
            t.tag = Transition::Tag::Failure;
            t.inputs = {{kPlaceAuthMachine, "a"}, {kPlaceS1In, "p"}, {kPlaceCncFree, "c"},
                        {kPlaceRng, "r"}};
            auto advanced = Expr::rng_next(Expr::field("r", "state"));
            t.guard = Expr::both(
                part_match("a", "p"),
                Expr::binary(Expr::Op::Lt, Expr::rng_draw(advanced),
                             Expr::int_const(failure_threshold(config.failure->probability))));
            t.delay = Expr::int_const(config.failure->repair_time);
            TokenSpec rng_out;
            rng_out.fields = {{"state", Expr::rng_next(Expr::field("r", "state"))}};
            t.outputs = {{kPlaceRepairing, {copy_of("p")}}, {kPlaceRng, {rng_out}}};
            net.transitions.push_back(std::move(t));
        }
        {
            // Machine back up: part returns to the input buffer with its
            // authorization restored, so the operation restarts and redraws.
            Transition t;
            t.id = kTCncRepair;
            t.priority = kDonePriority;
            t.tag = Transition::Tag::Repair;
            t.inputs = {{kPlaceRepairing, "p"}};
            t.delay = zero_delay;
            TokenSpec auth_back;
            auth_back.fields = {{"part_id", Expr::field("p", "part_id")}};
            t.outputs = {{kPlaceS1In, {copy_of("p")}},
                         {kPlaceCncFree, {TokenSpec{std::nullopt, {}}}},
                         {kPlaceAuthMachine, {auth_back}}};
            net.transitions.push_back(std::move(t));
        }
    }
    {
        Transition t;
        t.id = kTMove2Start;
        t.priority = kStartPriority;
        t.inputs = {{kPlaceAuthMove2, "a"}, {kPlaceS1Done, "p"}};
        t.guard = part_match("a", "p");
        t.delay = transport_delay;
        t.outputs = {{kPlaceMovingS2, {copy_of("p")}}};
        net.transitions.push_back(std::move(t));
    }
    {
        Transition t;
        t.id = kTMove2Done;
        t.priority = kDonePriority;
        t.inputs = {{kPlaceMovingS2, "p"}};
        t.delay = zero_delay;
        t.outputs = {{kPlaceS2In, {copy_of("p")}}};
        net.transitions.push_back(std::move(t));
    }
    {
        Transition t;
        t.id = kTAssembleStart;
        t.priority = kStartPriority;
        t.inputs = {{kPlaceAuthAssemble, "a"},
                    {kPlaceS2In, "b"},
                    {kPlaceS2In, "h"},
                    {kPlaceS2In, "c"},
                    {kPlaceAsmFree, "m"}};
        auto kind_is = [](const char* var, const char* kind) {
            return Expr::eq(Expr::field(var, "kind"), Expr::str_const(kind));
        };
        t.guard = Expr::both(
            Expr::both(Expr::both(kind_is("b", "body"), kind_is("h", "handle")),
                       kind_is("c", "cover")),
            Expr::both(Expr::both(order_match("a", "b"), order_match("a", "h")),
                       order_match("a", "c")));
        t.delay = Expr::int_const(config.assembly_time);
        t.outputs = {{kPlaceAssembling, {order_of("a")}}};
        net.transitions.push_back(std::move(t));
    }
    {
        Transition t;
        t.id = kTAssembleDone;
        t.priority = kDonePriority;
        t.inputs = {{kPlaceAssembling, "x"}};
        t.delay = zero_delay;
        t.outputs = {{kPlaceS2Done, {copy_of("x")}}, {kPlaceAsmFree, {TokenSpec{std::nullopt, {}}}}};
        net.transitions.push_back(std::move(t));
    }
    {
        Transition t;
        t.id = kTStoreStart;
        t.priority = kStartPriority;
        t.inputs = {{kPlaceAuthStore, "a"}, {kPlaceS2Done, "x"}, {kPlaceOrderQueue, "o"}};
        t.guard = Expr::both(order_match("a", "x"), order_match("a", "o"));
        t.delay = transport_delay;
        t.outputs = {{kPlaceStoring, {order_of("x")}}};
        net.transitions.push_back(std::move(t));
    }
    {
        Transition t;
        t.id = kTStoreDone;
        t.priority = kDonePriority;
        t.inputs = {{kPlaceStoring, "x"}};
        t.delay = zero_delay;
        t.outputs = {{kPlaceCompleted, {copy_of("x")}}};
        net.transitions.push_back(std::move(t));
    }

    const auto diagnostics = validate(net);
    if (!diagnostics.empty())
        throw InvalidConfigError("fms net failed validation: " + diagnostics.front().element +
                                 ": " + diagnostics.front().message);
    return net;
}

ColorToken part_token(const Part& part) {
    Color c;
    c["kind"] = part_kind_str(part.kind);
    c["order"] = part.order_id;
    c["part_id"] = part.part_id;
    return ColorToken{std::move(c), 0};
}

ColorToken order_token(std::int64_t order_id) {
    return ColorToken{{{"order", order_id}}, 0};
}

ColorToken auth_part_token(std::int64_t part_id) {
    return ColorToken{{{"part_id", part_id}}, 0};
}

ColorToken auth_order_token(std::int64_t order_id) {
    return ColorToken{{{"order", order_id}}, 0};
}

std::vector<TokenInjection> release_orders(const FmsConfig& config) {
    check(config);
    std::vector<TokenInjection> out;
    for (const auto& order : make_orders(config)) {
        out.push_back({kPlaceOrderQueue, order_token(order.order_id), "release"});
        for (const auto& part : order.parts)
            out.push_back({kPlaceStoreParts, part_token(part), "release"});
    }
    return out;
}

Marking build_initial_marking(const NetModel& net, const FmsConfig& config, bool autonomous) {
    Marking m;
    m.insert(net, kPlaceCncFree, ColorToken{{}, 0});
    m.insert(net, kPlaceAsmFree, ColorToken{{}, 0});
    if (config.failure && config.failure->probability > 0.0) {
        m.insert(net, kPlaceRng,
                 ColorToken{{{"state", static_cast<std::int64_t>(config.failure->rng_seed)}}, 0});
    }
    for (const auto& inj : release_orders(config)) m.insert(net, inj.place, inj.token);
    if (autonomous) {
        for (const auto& order : make_orders(config)) {
            for (const auto& part : order.parts) {
                m.insert(net, kPlaceAuthRetrieve, auth_part_token(part.part_id));
                m.insert(net, kPlaceAuthMachine, auth_part_token(part.part_id));
                m.insert(net, kPlaceAuthMove2, auth_part_token(part.part_id));
            }
            m.insert(net, kPlaceAuthAssemble, auth_order_token(order.order_id));
            m.insert(net, kPlaceAuthStore, auth_order_token(order.order_id));
        }
    }
    return m;
}

std::vector<std::string> resources_busy_during(const std::string& transition_id) {
    // Conveyor carries every move; the station-1 robot tends moves touching
    // the CNC; the AS/RS crane handles retrieve and store legs.
    if (transition_id == kTRetrieveStart) return {kResConveyor, kResRobot, kResAsrsCrane};
    if (transition_id == kTMove2Start) return {kResConveyor, kResRobot};
    if (transition_id == kTStoreStart) return {kResConveyor, kResAsrsCrane};
    if (transition_id == kTMachineStart) return {kResCnc};
    if (transition_id == kTCncFail) return {kResCnc};
    if (transition_id == kTAssembleStart) return {kResGlueAssembly, kResLaserQc};
    return {};
}

}  // namespace shopfloor::fms
