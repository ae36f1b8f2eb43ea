#include "shopfloor/fms/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "shopfloor/errors.hpp"
#include "shopfloor/petri/rng.hpp"

namespace shopfloor::fms {

std::string part_kind_str(PartKind k) {
    switch (k) {
        case PartKind::Body: return "body";
        case PartKind::Handle: return "handle";
        case PartKind::Cover: return "cover";
    }
    return "?";
}

PartKind part_kind_from(const std::string& s) {
    if (s == "body") return PartKind::Body;
    if (s == "handle") return PartKind::Handle;
    if (s == "cover") return PartKind::Cover;
    throw UnknownKindError("unknown part kind '" + s + "'");
}

bool part_state_step_ok(PartState from, PartState to) {
    switch (from) {
        case PartState::Stored: return to == PartState::InTransport;
        case PartState::InTransport:
            return to == PartState::Machining || to == PartState::AwaitingAssembly;
        case PartState::Machining: return to == PartState::InTransport;
        case PartState::AwaitingAssembly: return to == PartState::Assembled;
        case PartState::Assembled: return false;
    }
    return false;
}

void check(const FmsConfig& config) {
    if (config.order_count < 0) throw InvalidConfigError("order_count must be >= 0");
    if (config.transport_time <= 0) throw InvalidConfigError("transport_ms must be > 0");
    if (config.cnc_time <= 0) throw InvalidConfigError("cnc_ms must be > 0");
    if (config.assembly_time <= 0) throw InvalidConfigError("assembly_ms must be > 0");
    if (config.wip_limit < 1) throw InvalidConfigError("wip_limit must be >= 1");
    if (config.failure) {
        const auto& f = *config.failure;
        if (f.probability < 0.0 || f.probability > 1.0)
            throw InvalidConfigError("failure_probability must be in [0, 1]");
        if (f.repair_time <= 0) throw InvalidConfigError("repair_ms must be > 0");
        if (f.target_resource != kResCnc)
            throw InvalidConfigError("only cnc failures are modeled (failure_target=" +
                                     f.target_resource + ")");
    }
}

FmsConfig load_config(std::istream& is) {
    FmsConfig config;
    std::optional<double> failure_probability;
    std::optional<TimeMs> repair_ms;
    std::optional<std::string> failure_target;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto trim = [](std::string s) {
            const char* ws = " \t\r";
            auto b = s.find_first_not_of(ws);
            if (b == std::string::npos) return std::string();
            auto e = s.find_last_not_of(ws);
            return s.substr(b, e - b + 1);
        };
        std::string stripped = trim(line);
        if (stripped.empty()) continue;
        auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw InvalidConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        std::string key = trim(stripped.substr(0, eq));
        std::string value = trim(stripped.substr(eq + 1));
        try {
            if (key == "orders") config.order_count = std::stoll(value);
            else if (key == "transport_ms") config.transport_time = std::stoll(value);
            else if (key == "cnc_ms") config.cnc_time = std::stoll(value);
            else if (key == "assembly_ms") config.assembly_time = std::stoll(value);
            else if (key == "failure_probability") failure_probability = std::stod(value);
            else if (key == "repair_ms") repair_ms = std::stoll(value);
            else if (key == "failure_target") failure_target = value;
            else if (key == "seed") config.seed = std::stoull(value);
            else if (key == "wip_limit") config.wip_limit = std::stoi(value);
            else
                throw InvalidConfigError("config line " + std::to_string(line_no) +
                                         ": unknown key '" + key + "'");
        } catch (const InvalidConfigError&) {
            throw;
        } catch (const std::exception&) {
            throw InvalidConfigError("config line " + std::to_string(line_no) + ": bad value '" +
                                     value + "' for key '" + key + "'");
        }
    }

    if (failure_probability && *failure_probability > 0.0) {
        FailureModel f;
        f.probability = *failure_probability;
        if (repair_ms) f.repair_time = *repair_ms;
        if (failure_target) f.target_resource = *failure_target;
        f.rng_seed = config.seed;
        config.failure = f;
    }
    check(config);
    return config;
}

FmsConfig load_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw InvalidConfigError("cannot open config file '" + path + "'");
    return load_config(is);
}

std::string print_config(const FmsConfig& config) {
    std::ostringstream os;
    os << "orders = " << config.order_count << "\n";
    os << "transport_ms = " << config.transport_time << "\n";
    os << "cnc_ms = " << config.cnc_time << "\n";
    os << "assembly_ms = " << config.assembly_time << "\n";
    os << "failure_probability = " << (config.failure ? config.failure->probability : 0.0) << "\n";
    os << "repair_ms = " << (config.failure ? config.failure->repair_time : FailureModel{}.repair_time)
       << "\n";
    os << "failure_target = " << (config.failure ? config.failure->target_resource : kResCnc) << "\n";
    os << "seed = " << config.seed << "\n";
    os << "wip_limit = " << config.wip_limit << "\n";
    return os.str();
}

std::vector<StationSpec> station_specs(const FmsConfig& config) {
    return {
        {kStationMachining, {kResCnc, kResRobot}, config.cnc_time},
        {kStationAssembly, {kResGlueAssembly, kResLaserQc}, config.assembly_time},
        {kStationAsrs, {kResAsrsCrane, kResConveyor}, config.transport_time},
    };
}

std::int64_t failure_threshold(double probability) {
    if (probability <= 0.0) return 0;
    if (probability >= 1.0) return petri::kDraw53Range;
    return static_cast<std::int64_t>(std::floor(probability * static_cast<double>(petri::kDraw53Range)));
}

std::pair<bool, std::uint64_t> sample_failure(const FailureModel& model, std::uint64_t rng_state) {
    const std::uint64_t next = petri::splitmix64_next(rng_state);
    const std::int64_t draw = petri::splitmix64_draw53(next);
    return {draw < failure_threshold(model.probability), next};
}

std::vector<std::string> part_route(PartKind) {
    // All three kinds travel the same route; kinds only matter at the
    // assembly join.
    return {
        "asrs-retrieve",
        "transport-to-station1",
        "cnc-machining",
        "transport-to-station2",
        "assembly-join",
        "transport-to-station3",
        "store",
    };
}

std::vector<std::string> part_route(const std::string& kind_name) {
    return part_route(part_kind_from(kind_name));
}

std::vector<BookOrder> make_orders(const FmsConfig& config) {
    std::vector<BookOrder> orders;
    orders.reserve(static_cast<std::size_t>(config.order_count));
    std::int64_t next_part = 1;
    for (std::int64_t k = 1; k <= config.order_count; ++k) {
        BookOrder order;
        order.order_id = k;
        order.release_time = 0;
        for (PartKind kind : {PartKind::Body, PartKind::Handle, PartKind::Cover}) {
            Part p;
            p.part_id = next_part++;
            p.kind = kind;
            p.order_id = k;
            order.parts.push_back(p);
        }
        orders.push_back(std::move(order));
    }
    return orders;
}

}  // namespace shopfloor::fms
