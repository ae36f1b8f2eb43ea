#include "shopfloor/metrics/kpi.hpp"

#include <algorithm>
#include <cmath>

#include "shopfloor/errors.hpp"
#include "shopfloor/fms/model.hpp"

namespace shopfloor::metrics {

TimeMs union_length(std::vector<std::pair<TimeMs, TimeMs>> intervals) {
    if (intervals.empty()) return 0;
    std::sort(intervals.begin(), intervals.end());
    TimeMs total = 0;
    TimeMs cur_start = intervals.front().first;
    TimeMs cur_end = intervals.front().second;
    for (std::size_t i = 1; i < intervals.size(); ++i) {
        const auto& [s, e] = intervals[i];
        if (s > cur_end) {
            total += cur_end - cur_start;
            cur_start = s;
            cur_end = e;
        } else {
            cur_end = std::max(cur_end, e);
        }
    }
    total += cur_end - cur_start;
    return total;
}

KpiReport compute_kpis(const petri::EventTrace& trace, const std::vector<fms::BookOrder>& orders) {
    KpiReport report;
    report.orders_released = orders.size();

    std::map<std::int64_t, TimeMs> completions;
    std::map<std::string, std::vector<std::pair<TimeMs, TimeMs>>> busy;

    for (const auto& ev : trace.events) {
        if (ev.kind != petri::EventKind::Fire) continue;
        if (ev.transition == fms::kTStoreDone) {
            auto it = ev.payload.find("x.order");
            if (it != ev.payload.end()) completions[std::stoll(it->second)] = ev.time;
        }
        if (ev.transition == fms::kTMachineStart) ++report.machine_starts;
        if (ev.transition == fms::kTCncFail) {
            ++report.machine_starts;
            ++report.failures;
        }
        const auto resources = fms::resources_busy_during(ev.transition);
        if (!resources.empty()) {
            const TimeMs delay = std::stoll(ev.payload.at("delay_ms"));
            for (const auto& res : resources) busy[res].emplace_back(ev.time, ev.time + delay);
        }
    }

    for (const auto& order : orders) {
        auto it = completions.find(order.order_id);
        if (it == completions.end()) continue;
        report.lead_times.push_back(it->second - order.release_time);
        report.makespan_ms = std::max(report.makespan_ms, it->second);
    }
    report.orders_completed = report.lead_times.size();

    if (!report.lead_times.empty()) {
        long double sum = 0;
        for (auto t : report.lead_times) sum += static_cast<long double>(t);
        report.lead_time_mean_ms =
            static_cast<double>(sum / static_cast<long double>(report.lead_times.size()));
    }
    if (report.makespan_ms > 0) {
        report.throughput_per_hour = static_cast<double>(report.orders_completed) /
                                     (static_cast<double>(report.makespan_ms) / 3'600'000.0);
    }

    for (const char* res : {fms::kResCnc, fms::kResRobot, fms::kResGlueAssembly, fms::kResLaserQc,
                            fms::kResAsrsCrane, fms::kResConveyor}) {
        double pct = 0.0;
        if (report.makespan_ms > 0) {
            auto it = busy.find(res);
            const TimeMs occupied = it == busy.end() ? 0 : union_length(it->second);
            pct = 100.0 * static_cast<double>(occupied) / static_cast<double>(report.makespan_ms);
        }
        report.utilization_pct[res] = pct;
    }
    return report;
}

double compute_repeatability(const std::vector<KpiReport>& runs) {
    if (runs.size() < 2)
        throw InsufficientRunsError("repeatability needs at least 2 runs, got " +
                                    std::to_string(runs.size()));
    double sum_of_std = 0.0;
    std::size_t resources = 0;
    for (const auto& [res, first_value] : runs.front().utilization_pct) {
        (void)first_value;
        double mean = 0.0;
        for (const auto& r : runs) mean += r.utilization_pct.at(res);
        mean /= static_cast<double>(runs.size());
        double var = 0.0;
        for (const auto& r : runs) {
            const double d = r.utilization_pct.at(res) - mean;
            var += d * d;
        }
        var /= static_cast<double>(runs.size());  // population variance
        sum_of_std += std::sqrt(var);
        ++resources;
    }
    return resources == 0 ? 0.0 : sum_of_std / static_cast<double>(resources);
}

}  // namespace shopfloor::metrics
