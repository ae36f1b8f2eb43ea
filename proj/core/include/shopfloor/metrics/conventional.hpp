#pragma once

#include <optional>
#include <vector>

#include "shopfloor/fms/config.hpp"
#include "shopfloor/petri/engine.hpp"

namespace shopfloor::metrics {

// The comparison baseline: one centralized dispatcher, no negotiation.
// Static route, strict global FIFO — an order's parts must be fully processed
// through the CNC before the next order's parts enter the CNC queue — and
// failures are handled by blocking until the machine recovers. Drives the
// same plant net through the same authorization places, so traces are
// directly comparable.
class ConventionalController : public petri::RunHooks {
public:
    explicit ConventionalController(const fms::FmsConfig& config);

    petri::HookResult on_step(petri::TimeMs now, std::span<const petri::SimEvent> fresh_events,
                              const petri::Marking& marking) override;

    std::size_t dispatches_issued() const { return dispatched_; }

private:
    struct Op {
        std::string op;
        std::optional<std::int64_t> part_id;
    };
    struct OrderState {
        std::int64_t order_id = 0;
        std::vector<Op> chain;
        std::size_t next = 0;      // next op to dispatch
        bool in_flight = false;    // an op is dispatched and not yet complete
    };

    petri::TokenInjection injection_for(const OrderState& order, const Op& op) const;
    void match_completion(const petri::SimEvent& ev);

    std::vector<OrderState> orders_;
    std::size_t admitted_ = 0;   // orders allowed to enter the CNC queue
    std::size_t dispatched_ = 0;
};

}  // namespace shopfloor::metrics
