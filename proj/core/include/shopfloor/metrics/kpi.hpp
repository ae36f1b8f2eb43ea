#pragma once

#include <map>
#include <string>
#include <vector>

#include "shopfloor/fms/config.hpp"
#include "shopfloor/petri/types.hpp"

namespace shopfloor::metrics {

using petri::TimeMs;

struct KpiReport {
    double lead_time_mean_ms = 0.0;
    std::vector<TimeMs> lead_times;  // per completed order, sorted by order id
    double throughput_per_hour = 0.0;
    double repeatability_pct = 0.0;  // mean std dev across runs; set by aggregation
    std::map<std::string, double> utilization_pct;  // per resource
    TimeMs makespan_ms = 0;
    std::size_t orders_released = 0;
    std::size_t orders_completed = 0;
    std::size_t machine_starts = 0;  // successful starts plus failed starts
    std::size_t failures = 0;

    bool complete() const { return orders_completed == orders_released; }
};

// Scans a (joint) trace: lead time per order = completion - release (orders
// release at t=0), throughput = completed orders per hour of makespan,
// utilization = union of busy intervals / makespan. Orders that never
// complete inside the trace leave the report marked incomplete; that is a
// reported condition, not an error.
KpiReport compute_kpis(const petri::EventTrace& trace, const std::vector<fms::BookOrder>& orders);

// Mean over resources of the population standard deviation of utilization
// across runs. Throws InsufficientRunsError for fewer than two runs.
double compute_repeatability(const std::vector<KpiReport>& runs);

// Interval union length; intervals may overlap arbitrarily.
TimeMs union_length(std::vector<std::pair<TimeMs, TimeMs>> intervals);

}  // namespace shopfloor::metrics
