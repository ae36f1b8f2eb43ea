#include "shopfloor/metrics/emit.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include <json.hpp>

#include "shopfloor/errors.hpp"
#include "shopfloor/fms/config.hpp"

namespace shopfloor::metrics {

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

std::vector<const RunRecord*> sorted_view(const std::vector<RunRecord>& records) {
    std::vector<const RunRecord*> view;
    view.reserve(records.size());
    for (const auto& r : records) view.push_back(&r);
    std::sort(view.begin(), view.end(), [](const RunRecord* a, const RunRecord* b) {
        if (a->scenario != b->scenario) return a->scenario < b->scenario;
        if (a->controller != b->controller) return a->controller < b->controller;
        return a->seed < b->seed;
    });
    return view;
}

const char* kResourceColumns[] = {fms::kResCnc,       fms::kResRobot,     fms::kResGlueAssembly,
                                  fms::kResLaserQc,   fms::kResAsrsCrane, fms::kResConveyor};

std::string column_name(const std::string& resource) {
    std::string out = "util_";
    for (char c : resource) out += (c == '-') ? '_' : c;
    return out;
}

double group_mean(const std::vector<const RunRecord*>& view, Scenario s, Controller c,
                  const std::function<double(const RunRecord&)>& metric) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto* r : view) {
        if (r->scenario != s || r->controller != c) continue;
        sum += metric(*r);
        ++n;
    }
    return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

}  // namespace

std::string to_csv(const std::vector<RunRecord>& records) {
    std::string out = "scenario,controller,seed,lead_time_mean_ms,throughput_per_hour,repeatability";
    for (const char* res : kResourceColumns) out += "," + column_name(res);
    out += ",makespan_ms,repair_time_ms\n";

    for (const auto* r : sorted_view(records)) {
        out += scenario_str(r->scenario);
        out += "," + controller_str(r->controller);
        out += "," + std::to_string(r->seed);
        out += "," + fmt(r->kpi.lead_time_mean_ms);
        out += "," + fmt(r->kpi.throughput_per_hour);
        out += "," + fmt(r->kpi.repeatability_pct);
        for (const char* res : kResourceColumns) out += "," + fmt(r->kpi.utilization_pct.at(res));
        out += "," + std::to_string(r->kpi.makespan_ms);
        const auto repair =
            r->config.failure ? r->config.failure->repair_time : fms::FailureModel{}.repair_time;
        out += "," + std::to_string(repair);
        out += "\n";
    }
    return out;
}

std::string to_json(const std::vector<RunRecord>& records) {
    nlohmann::ordered_json doc;
    doc["format"] = "shopfloor-results";
    doc["notes"] = {{"repeatability", "mean over resources of population std dev across runs"},
                    {"lead_time", "order completion minus release; all orders release at t=0"},
                    {"throughput", "orders completed per hour of makespan"}};
    doc["runs"] = nlohmann::ordered_json::array();
    for (const auto* r : sorted_view(records)) {
        nlohmann::ordered_json run;
        run["scenario"] = scenario_str(r->scenario);
        run["controller"] = controller_str(r->controller);
        run["seed"] = r->seed;
        run["lead_time_mean_ms"] = r->kpi.lead_time_mean_ms;
        run["throughput_per_hour"] = r->kpi.throughput_per_hour;
        run["repeatability"] = r->kpi.repeatability_pct;
        nlohmann::ordered_json util;
        for (const char* res : kResourceColumns) util[res] = r->kpi.utilization_pct.at(res);
        run["utilization_pct"] = util;
        run["makespan_ms"] = r->kpi.makespan_ms;
        run["orders_released"] = r->kpi.orders_released;
        run["orders_completed"] = r->kpi.orders_completed;
        run["machine_starts"] = r->kpi.machine_starts;
        run["failures"] = r->kpi.failures;
        run["messages_delivered"] = r->messages_delivered;
        run["conformance_violations"] = r->conformance_violations;
        run["calendar_violations"] = r->calendar_violations;
        run["wall_ms"] = r->wall_ms;
        nlohmann::ordered_json cfg;
        cfg["orders"] = r->config.order_count;
        cfg["transport_ms"] = r->config.transport_time;
        cfg["cnc_ms"] = r->config.cnc_time;
        cfg["assembly_ms"] = r->config.assembly_time;
        cfg["failure_probability"] = r->config.failure ? r->config.failure->probability : 0.0;
        cfg["repair_ms"] =
            r->config.failure ? r->config.failure->repair_time : fms::FailureModel{}.repair_time;
        cfg["seed"] = r->config.seed;
        cfg["wip_limit"] = r->config.wip_limit;
        run["config"] = cfg;
        doc["runs"].push_back(std::move(run));
    }
    return doc.dump(2) + "\n";
}

std::string to_gnuplot_dat(const std::vector<RunRecord>& records, const std::string& metric) {
    auto view = sorted_view(records);
    std::function<double(const RunRecord&)> pick;
    if (metric == "lead_time") {
        pick = [](const RunRecord& r) { return r.kpi.lead_time_mean_ms; };
    } else if (metric == "throughput") {
        pick = [](const RunRecord& r) { return r.kpi.throughput_per_hour; };
    } else if (metric == "utilization_cnc") {
        pick = [](const RunRecord& r) { return r.kpi.utilization_pct.at(fms::kResCnc); };
    } else {
        throw InvalidConfigError("unknown plot metric '" + metric + "'");
    }

    std::string out = "# group " + metric + "\n";
    for (Scenario s : {Scenario::A, Scenario::B}) {
        for (Controller c : {Controller::Agents, Controller::Conventional}) {
            bool any = false;
            for (const auto* r : view)
                if (r->scenario == s && r->controller == c) any = true;
            if (!any) continue;
            out += scenario_str(s) + "-" + controller_str(c) + " " +
                   fmt(group_mean(view, s, c, pick)) + "\n";
        }
    }
    return out;
}

std::vector<std::string> compare_and_emit(const std::vector<RunRecord>& records,
                                          const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::vector<std::string> written;
    fs::create_directories(fs::path(out_dir) / "figs");

    auto write_file = [&](const fs::path& path, const std::string& content) {
        std::ofstream os(path, std::ios::binary);
        if (!os) throw Error("cannot write " + path.string());
        os << content;
        written.push_back(path.string());
    };

    write_file(fs::path(out_dir) / "results.csv", to_csv(records));
    write_file(fs::path(out_dir) / "results.json", to_json(records));
    for (const char* metric : {"lead_time", "throughput", "utilization_cnc"})
        write_file(fs::path(out_dir) / "figs" / (std::string(metric) + ".dat"),
                   to_gnuplot_dat(records, metric));
    return written;
}

}  // namespace shopfloor::metrics
