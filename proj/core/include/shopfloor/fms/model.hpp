#pragma once

#include <string>
#include <vector>

#include "shopfloor/fms/config.hpp"
#include "shopfloor/petri/engine.hpp"
#include "shopfloor/petri/types.hpp"

namespace shopfloor::fms {

// Plant places.
inline constexpr const char* kPlaceStoreParts = "store_parts";
inline constexpr const char* kPlaceOrderQueue = "order_queue";
inline constexpr const char* kPlaceMovingS1 = "moving_s1";
inline constexpr const char* kPlaceS1In = "s1_in";
inline constexpr const char* kPlaceMachining = "machining";
inline constexpr const char* kPlaceRepairing = "repairing";
inline constexpr const char* kPlaceS1Done = "s1_done";
inline constexpr const char* kPlaceMovingS2 = "moving_s2";
inline constexpr const char* kPlaceS2In = "s2_in";
inline constexpr const char* kPlaceAssembling = "assembling";
inline constexpr const char* kPlaceS2Done = "s2_done";
inline constexpr const char* kPlaceStoring = "storing";
inline constexpr const char* kPlaceCompleted = "completed";
inline constexpr const char* kPlaceCncFree = "cnc_free";
inline constexpr const char* kPlaceAsmFree = "asm_free";
inline constexpr const char* kPlaceRng = "rng";
// Authorization places; the controller unlocks one operation by injecting a
// token here (this is the only way the plant moves).
inline constexpr const char* kPlaceAuthRetrieve = "auth_retrieve";
inline constexpr const char* kPlaceAuthMachine = "auth_machine";
inline constexpr const char* kPlaceAuthMove2 = "auth_move2";
inline constexpr const char* kPlaceAuthAssemble = "auth_assemble";
inline constexpr const char* kPlaceAuthStore = "auth_store";

// Plant transitions.
inline constexpr const char* kTRetrieveStart = "retrieve_start";
inline constexpr const char* kTRetrieveDone = "retrieve_done";
inline constexpr const char* kTMachineStart = "machine_start";
inline constexpr const char* kTMachineDone = "machine_done";
inline constexpr const char* kTCncFail = "cnc_fail";
inline constexpr const char* kTCncRepair = "cnc_repair";
inline constexpr const char* kTMove2Start = "move2_start";
inline constexpr const char* kTMove2Done = "move2_done";
inline constexpr const char* kTAssembleStart = "assemble_start";
inline constexpr const char* kTAssembleDone = "assemble_done";
inline constexpr const char* kTStoreStart = "store_start";
inline constexpr const char* kTStoreDone = "store_done";

// Builds the shop-floor net: AS/RS stores, conveyor moves (8 s each,
// non-exclusive), one CNC (exclusive), one assembly cell (exclusive), and the
// failure/repair subnet when config.failure has probability > 0.
// Throws InvalidConfigError and guarantees validate(net).empty().
petri::NetModel build_fms_net(const FmsConfig& config);

// Token injections realizing the order release: all orders at t=0, FIFO by
// order id; three part tokens per order plus one order-queue token.
std::vector<petri::TokenInjection> release_orders(const FmsConfig& config);

// Initial marking: resource tokens, rng state (when failures are on) and the
// released orders. With `autonomous` set, every operation of every order is
// pre-authorized so the plant free-runs with maximal overlap; used by kernel
// tests and benchmarks, not by the controllers.
petri::Marking build_initial_marking(const petri::NetModel& net, const FmsConfig& config,
                                     bool autonomous = false);

petri::ColorToken part_token(const Part& part);
petri::ColorToken order_token(std::int64_t order_id);
petri::ColorToken auth_part_token(std::int64_t part_id);
petri::ColorToken auth_order_token(std::int64_t order_id);

// Resources a firing of the given transition occupies for its delay; empty
// for bookkeeping transitions. Drives per-resource utilization.
std::vector<std::string> resources_busy_during(const std::string& transition_id);

}  // namespace shopfloor::fms
