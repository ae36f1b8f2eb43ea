#include "shopfloor/metrics/conventional.hpp"

#include "shopfloor/fms/model.hpp"
#include "shopfloor/mes/types.hpp"

namespace shopfloor::metrics {

namespace {

// Completion classification, local to the dispatcher: transition -> op kind.
const char* op_of_done_transition(const std::string& transition) {
    if (transition == fms::kTRetrieveDone) return mes::kOpRetrieveMove;
    if (transition == fms::kTMachineDone) return mes::kOpMachine;
    if (transition == fms::kTMove2Done) return mes::kOpMoveToAssembly;
    if (transition == fms::kTAssembleDone) return mes::kOpAssemble;
    if (transition == fms::kTStoreDone) return mes::kOpStore;
    return nullptr;
}

std::optional<std::int64_t> payload_int(const petri::SimEvent& ev, const char* key) {
    auto it = ev.payload.find(key);
    if (it == ev.payload.end()) return std::nullopt;
    return std::stoll(it->second);
}

}  // namespace

ConventionalController::ConventionalController(const fms::FmsConfig& config) {
    for (const auto& order : fms::make_orders(config)) {
        OrderState st;
        st.order_id = order.order_id;
        for (const auto& part : order.parts) {
            st.chain.push_back({mes::kOpRetrieveMove, part.part_id});
            st.chain.push_back({mes::kOpMachine, part.part_id});
            st.chain.push_back({mes::kOpMoveToAssembly, part.part_id});
        }
        st.chain.push_back({mes::kOpAssemble, std::nullopt});
        st.chain.push_back({mes::kOpStore, std::nullopt});
        orders_.push_back(std::move(st));
    }
    admitted_ = orders_.empty() ? 0 : 1;
}

petri::TokenInjection ConventionalController::injection_for(const OrderState& order,
                                                            const Op& op) const {
    petri::TokenInjection inj;
    inj.source = "conventional";
    if (op.op == mes::kOpMachine) {
        inj.place = fms::kPlaceAuthMachine;
        inj.token = fms::auth_part_token(*op.part_id);
    } else if (op.op == mes::kOpRetrieveMove) {
        inj.place = fms::kPlaceAuthRetrieve;
        inj.token = fms::auth_part_token(*op.part_id);
    } else if (op.op == mes::kOpMoveToAssembly) {
        inj.place = fms::kPlaceAuthMove2;
        inj.token = fms::auth_part_token(*op.part_id);
    } else if (op.op == mes::kOpAssemble) {
        inj.place = fms::kPlaceAuthAssemble;
        inj.token = fms::auth_order_token(order.order_id);
    } else {
        inj.place = fms::kPlaceAuthStore;
        inj.token = fms::auth_order_token(order.order_id);
    }
    return inj;
}

void ConventionalController::match_completion(const petri::SimEvent& ev) {
    const char* op = op_of_done_transition(ev.transition);
    if (!op) return;
    const auto order_id = payload_int(ev, "p.order") ? payload_int(ev, "p.order")
                                                     : payload_int(ev, "x.order");
    if (!order_id) return;
    const auto part_id = payload_int(ev, "p.part_id");

    for (auto& st : orders_) {
        if (st.order_id != *order_id || !st.in_flight) continue;
        const Op& current = st.chain[st.next];
        if (current.op != op) continue;
        if (current.part_id.has_value() != part_id.has_value()) continue;
        if (current.part_id && *current.part_id != *part_id) continue;
        st.in_flight = false;
        ++st.next;
        // All of this order's parts are now through the CNC: the next order's
        // parts may enter the CNC queue.
        if (op == std::string(mes::kOpMachine) && st.next == 8 && admitted_ < orders_.size())
            ++admitted_;
        return;
    }
}

petri::HookResult ConventionalController::on_step(petri::TimeMs, std::span<const petri::SimEvent> fresh_events,
                                                  const petri::Marking&) {
    petri::HookResult result;
    for (const auto& ev : fresh_events) {
        if (ev.kind == petri::EventKind::Fire) match_completion(ev);
        // Failures and repairs need no reaction: blocking wait.
    }
    for (std::size_t i = 0; i < admitted_ && i < orders_.size(); ++i) {
        auto& st = orders_[i];
        if (st.in_flight || st.next >= st.chain.size()) continue;
        result.commands.push_back(injection_for(st, st.chain[st.next]));
        st.in_flight = true;
        ++dispatched_;
    }
    return result;
}

}  // namespace shopfloor::metrics
