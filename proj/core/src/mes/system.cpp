#include "shopfloor/mes/system.hpp"

#include <algorithm>
#include <sstream>

#include "shopfloor/errors.hpp"

namespace shopfloor::mes {

std::string plant_signal_kind_str(PlantSignal::Kind k) {
    switch (k) {
        case PlantSignal::Kind::Completed: return "completed";
        case PlantSignal::Kind::Failure: return "failure";
        case PlantSignal::Kind::Repair: return "repair";
    }
    return "?";
}

int MesTopology::resource_instance(const std::string& station_id, const std::string& resource) const {
    const auto* spec = station(station_id);
    if (!spec) throw UnknownAgentError("unknown station '" + station_id + "'");
    for (std::size_t i = 0; i < spec->resources.size(); ++i)
        if (spec->resources[i] == resource) return static_cast<int>(i);
    throw UnknownAgentError("resource '" + resource + "' not at station '" + station_id + "'");
}

AgentId MesTopology::mra(const std::string& station_id, const std::string& resource) const {
    return station_agent(Role::MRA, station_id, resource_instance(station_id, resource));
}

const fms::StationSpec* MesTopology::station(const std::string& id) const {
    for (const auto& s : stations)
        if (s.id == id) return &s;
    return nullptr;
}

bool calendar_has_overlap(const std::vector<CalendarEntry>& entries, TimeMs start, TimeMs end) {
    for (const auto& e : entries)
        if (start < e.end && e.start < end) return true;
    return false;
}

namespace {

std::string join(const std::vector<std::string>& parts, char sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

// The operation the station resource agent reports to the machine interface,
// keyed to the physical object that executes it.
std::string primary_resource(const std::string& op) {
    if (op == kOpMachine) return fms::kResCnc;
    if (op == kOpAssemble) return fms::kResGlueAssembly;
    if (op == kOpMoveToAssembly) return fms::kResConveyor;
    if (op == kOpRetrieveMove || op == kOpStore) return fms::kResAsrsCrane;
    throw MalformedTaskError("unknown operation '" + op + "'");
}

}  // namespace

namespace {

// ---------------------------------------------------------------------------
// SMA: owns the order book; decomposes orders into operation chains, admits a
// bounded window of orders into execution, announces one task per order at a
// time to the AM.
class SmaAgent : public Agent {
public:
    struct OpSpec {
        std::string op;
        std::optional<std::int64_t> part_id;
        std::optional<std::size_t> part_index;
    };

    SmaAgent(std::vector<fms::BookOrder> orders, int wip_limit)
        : id_(shop_agent(Role::SMA)), orders_(std::move(orders)), wip_limit_(wip_limit) {
        for (auto& order : orders_) {
            std::vector<OpSpec> chain;
            for (std::size_t i = 0; i < order.parts.size(); ++i) {
                chain.push_back({kOpRetrieveMove, order.parts[i].part_id, i});
                chain.push_back({kOpMachine, order.parts[i].part_id, i});
                chain.push_back({kOpMoveToAssembly, order.parts[i].part_id, i});
            }
            chain.push_back({kOpAssemble, std::nullopt, std::nullopt});
            chain.push_back({kOpStore, std::nullopt, std::nullopt});
            chains_.push_back(std::move(chain));
        }
        progress_.assign(orders_.size(), 0);
    }

    const AgentId& id() const override { return id_; }

    void kick(MesContext& ctx) {
        while (admitted_ < orders_.size() &&
               admitted_ - completed_ < static_cast<std::size_t>(wip_limit_)) {
            announce(ctx, admitted_++);
        }
    }

    void announce_external(MesContext& ctx, const TaskAnnouncement& task) {
        if (task.required_capabilities.empty())
            throw MalformedTaskError("task '" + task.task_id + "' has no required capabilities");
        std::map<std::string, std::string> payload;
        payload["task"] = task.task_id;
        payload["op"] = task.op;
        payload["order"] = std::to_string(task.order_id);
        payload["capabilities"] = join(task.required_capabilities, ',');
        if (task.part_id) payload["part_id"] = std::to_string(*task.part_id);
        if (task.deadline) payload["deadline_ms"] = std::to_string(*task.deadline);
        external_.insert(task.task_id);
        ctx.send(id_, shop_agent(Role::AM), Performative::Request, "task-" + task.task_id, payload);
    }

    void handle(const AgentMessage& msg, MesContext& ctx) override {
        if (msg.performative != Performative::Notify) {
            ctx.note_unexpected(id_, msg);
            return;
        }
        const auto task = msg.payload.at("task");
        if (external_.count(task)) return;
        auto it = task_index_.find(task);
        if (it == task_index_.end()) return;
        const auto [order_idx, op_idx] = it->second;
        auto& chain = chains_[order_idx];
        apply_completion_state(order_idx, chain[op_idx]);
        progress_[order_idx] = op_idx + 1;
        if (op_idx + 1 < chain.size()) {
            announce_op(ctx, order_idx, op_idx + 1);
        } else {
            orders_[order_idx].completion_time = msg.sent_at;
            ++completed_;
            kick(ctx);
        }
    }

    std::string state_summary() const override {
        std::ostringstream os;
        os << "admitted=" << admitted_ << " completed=" << completed_ << " progress=";
        for (auto p : progress_) os << p << ",";
        return os.str();
    }

    std::size_t completed() const { return completed_; }
    const std::vector<fms::BookOrder>& orders() const { return orders_; }

private:
    void announce(MesContext& ctx, std::size_t order_idx) { announce_op(ctx, order_idx, 0); }

    void announce_op(MesContext& ctx, std::size_t order_idx, std::size_t op_idx) {
        const auto& order = orders_[order_idx];
        const auto& spec = chains_[order_idx][op_idx];
        std::string task = "T" + std::to_string(order.order_id) + "-" + std::to_string(op_idx);
        task_index_[task] = {order_idx, op_idx};
        apply_dispatch_state(order_idx, spec);

        std::map<std::string, std::string> payload;
        payload["task"] = task;
        payload["op"] = spec.op;
        payload["order"] = std::to_string(order.order_id);
        payload["capabilities"] = join(op_required_capabilities(spec.op), ',');
        if (spec.part_id) payload["part_id"] = std::to_string(*spec.part_id);
        ctx.send(id_, shop_agent(Role::AM), Performative::Request, "task-" + task, payload);
    }

    static void step_part_state(fms::Part& part, fms::PartState next) {
        if (!fms::part_state_step_ok(part.state, next))
            throw Error("part " + std::to_string(part.part_id) + " route violation");
        part.state = next;
    }

    void apply_dispatch_state(std::size_t order_idx, const OpSpec& spec) {
        using fms::PartState;
        if (!spec.part_index) return;
        auto& part = orders_[order_idx].parts[*spec.part_index];
        if (spec.op == kOpRetrieveMove) step_part_state(part, PartState::InTransport);
        if (spec.op == kOpMoveToAssembly) step_part_state(part, PartState::InTransport);
    }

    void apply_completion_state(std::size_t order_idx, const OpSpec& spec) {
        using fms::PartState;
        auto& order = orders_[order_idx];
        if (spec.op == kOpMachine && spec.part_index)
            step_part_state(order.parts[*spec.part_index], PartState::Machining);
        if (spec.op == kOpMoveToAssembly && spec.part_index)
            step_part_state(order.parts[*spec.part_index], PartState::AwaitingAssembly);
        if (spec.op == kOpAssemble)
            for (auto& p : order.parts) step_part_state(p, PartState::Assembled);
    }

    AgentId id_;
    std::vector<fms::BookOrder> orders_;
    std::vector<std::vector<OpSpec>> chains_;
    std::vector<std::size_t> progress_;
    std::map<std::string, std::pair<std::size_t, std::size_t>> task_index_;
    std::set<std::string> external_;
    int wip_limit_;
    std::size_t admitted_ = 0;
    std::size_t completed_ = 0;
};

// ---------------------------------------------------------------------------
// AM: drives the allocation conversation for each announced task, owns the
// resource calendars and the per-station queues of parked tasks.
class AmAgent : public Agent {
public:
    AmAgent() : id_(shop_agent(Role::AM)) {}

    const AgentId& id() const override { return id_; }

    enum class TaskState { AskedData, Deferred, AskedAvail, Parked, Accepted, Dispatched, Done };

    struct TaskRec {
        TaskAnnouncement task;
        std::string conv;
        TaskState state = TaskState::AskedData;
        std::string station;
        TimeMs duration = 0;
        std::uint64_t request_seq = 0;
    };

    void handle(const AgentMessage& msg, MesContext& ctx) override {
        switch (msg.performative) {
            case Performative::Request: on_request(msg, ctx); return;
            case Performative::Inform: on_inform(msg, ctx); return;
            case Performative::Refuse: on_refuse(msg, ctx); return;
            case Performative::Propose: on_propose(msg, ctx); return;
            case Performative::Notify: on_notify(msg, ctx); return;
            default: ctx.note_unexpected(id_, msg); return;
        }
    }

    std::string state_summary() const override {
        std::ostringstream os;
        os << "tasks=" << tasks_.size() << " states=";
        for (const auto& [task, rec] : tasks_) os << task << ":" << static_cast<int>(rec.state) << ",";
        return os.str();
    }

    const TaskRec* find(const std::string& task) const {
        auto it = tasks_.find(task);
        return it == tasks_.end() ? nullptr : &it->second;
    }

private:
    void on_request(const AgentMessage& msg, MesContext& ctx) {
        if (msg.sender.role != Role::SMA) {
            ctx.note_unexpected(id_, msg);
            return;
        }
        TaskRec rec;
        rec.task.task_id = msg.payload.at("task");
        rec.task.op = msg.payload.at("op");
        rec.task.order_id = std::stoll(msg.payload.at("order"));
        rec.task.required_capabilities = split(msg.payload.at("capabilities"), ',');
        if (msg.payload.count("part_id")) rec.task.part_id = std::stoll(msg.payload.at("part_id"));
        rec.conv = msg.conversation_id;
        rec.request_seq = msg.seq;
        rec.state = TaskState::AskedData;
        tasks_[rec.task.task_id] = rec;

        std::map<std::string, std::string> payload;
        payload["purpose"] = "task-data";
        payload["task"] = rec.task.task_id;
        payload["capabilities"] = msg.payload.at("capabilities");
        ctx.send(id_, shop_agent(Role::DbaShop), Performative::Query, rec.conv, payload, msg.seq);
    }

    void on_inform(const AgentMessage& msg, MesContext& ctx) {
        if (msg.sender.role != Role::DbaShop || !msg.payload.count("task")) {
            ctx.note_unexpected(id_, msg);
            return;
        }
        auto found = tasks_.find(msg.payload.at("task"));
        if (found == tasks_.end()) {
            ctx.note_unexpected(id_, msg);
            return;
        }
        auto& rec = found->second;
        std::vector<CapabilityRecord> records;
        for (const auto& cap : rec.task.required_capabilities) {
            CapabilityRecord r;
            r.capability = cap;
            r.station = msg.payload.at(cap + ".station");
            r.resource = msg.payload.at(cap + ".resource");
            r.duration_ms = std::stoll(msg.payload.at(cap + ".duration_ms"));
            records.push_back(std::move(r));
        }
        auto candidates = match_capability(rec.task.required_capabilities, records);
        if (candidates.empty()) {
            rec.state = TaskState::Deferred;
            return;
        }
        rec.station = candidates.front();
        rec.duration = 0;
        for (const auto& r : records) rec.duration = std::max(rec.duration, r.duration_ms);
        query_availability(rec, ctx, msg.seq);
    }

    void on_refuse(const AgentMessage& msg, MesContext& ctx) {
        if (!msg.payload.count("task")) {
            ctx.note_unexpected(id_, msg);
            return;
        }
        auto found = tasks_.find(msg.payload.at("task"));
        if (found == tasks_.end()) {
            ctx.note_unexpected(id_, msg);
            return;
        }
        auto& rec = found->second;
        if (msg.sender.role == Role::DbaShop) {
            rec.state = TaskState::Deferred;
            return;
        }
        if (msg.sender.role == Role::SCA) {
            // Station busy: park; retried on the next release or repair. A
            // refused retry is already queued and keeps its position.
            rec.state = TaskState::Parked;
            auto& queue = parked_[rec.station];
            if (std::find(queue.begin(), queue.end(), rec.task.task_id) == queue.end())
                queue.push_back(rec.task.task_id);
            return;
        }
        ctx.note_unexpected(id_, msg);
    }

    void on_propose(const AgentMessage& msg, MesContext& ctx) {
        if (msg.sender.role != Role::SCA) {
            ctx.note_unexpected(id_, msg);
            return;
        }
        const auto reply = AvailabilityReply::from_payload(msg.payload);
        auto found = tasks_.find(reply.task_id);
        if (found == tasks_.end() || !reply.available || !reply.earliest_start) {
            ctx.note_unexpected(id_, msg);
            return;
        }
        allocate(found->second, *reply.earliest_start, ctx, msg.seq);
    }

    void on_notify(const AgentMessage& msg, MesContext& ctx) {
        if (msg.sender.role != Role::SCA) {
            ctx.note_unexpected(id_, msg);
            return;
        }
        const auto& kind = msg.payload.at("kind");
        if (kind == "released") {
            auto found = tasks_.find(msg.payload.at("task"));
            if (found == tasks_.end()) {
                ctx.note_unexpected(id_, msg);
                return;
            }
            auto& rec = found->second;
            const TimeMs completion = std::stoll(msg.payload.at("completion_ms"));
            ctx.finalize_allocation(rec.task.task_id, completion);
            rec.state = TaskState::Done;

            std::map<std::string, std::string> payload;
            payload["task"] = rec.task.task_id;
            payload["op"] = rec.task.op;
            payload["order"] = std::to_string(rec.task.order_id);
            payload["completion_ms"] = std::to_string(completion);
            ctx.send(id_, shop_agent(Role::SMA), Performative::Notify, rec.conv, payload, msg.seq);
            retry_parked(rec.station, ctx, msg.seq);
            return;
        }
        if (kind == "repair") {
            retry_parked(msg.payload.at("station"), ctx, msg.seq);
            return;
        }
        ctx.note_unexpected(id_, msg);
    }

    void retry_parked(const std::string& station, MesContext& ctx,
                      std::optional<std::uint64_t> reply_to) {
        auto it = parked_.find(station);
        if (it == parked_.end()) return;
        auto& queue = it->second;
        while (!queue.empty() && tasks_.at(queue.front()).state != TaskState::Parked)
            queue.pop_front();
        if (queue.empty()) return;
        query_availability(tasks_.at(queue.front()), ctx, reply_to);
    }

    void query_availability(TaskRec& rec, MesContext& ctx, std::optional<std::uint64_t> reply_to) {
        rec.state = TaskState::AskedAvail;
        std::map<std::string, std::string> payload;
        payload["task"] = rec.task.task_id;
        payload["op"] = rec.task.op;
        payload["order"] = std::to_string(rec.task.order_id);
        if (rec.task.part_id) payload["part_id"] = std::to_string(*rec.task.part_id);
        ctx.send(id_, station_agent(Role::SCA, rec.station), Performative::Query, rec.conv, payload,
                 reply_to);
    }

    void allocate(TaskRec& rec, TimeMs start, MesContext& ctx, std::uint64_t reply_to) {
        const TimeMs end = start + rec.duration;
        const auto resources = op_exclusive_resources(rec.task.op);
        for (const auto& res : resources) {
            if (calendar_has_overlap(ctx.calendars()[res], start, end))
                throw OverlapConflictError("allocation for task '" + rec.task.task_id +
                                           "' overlaps calendar of '" + res + "'");
        }
        for (const auto& res : resources)
            ctx.calendars()[res].push_back({rec.task.task_id, start, end, false});

        Allocation a;
        a.task_id = rec.task.task_id;
        a.station = rec.station;
        a.resources = resources;
        a.start = start;
        a.end = end;
        ctx.record_allocation(a);

        // Remove from the parked queue if this was a retry.
        auto parked = parked_.find(rec.station);
        if (parked != parked_.end() && !parked->second.empty() &&
            parked->second.front() == rec.task.task_id)
            parked->second.pop_front();

        rec.state = TaskState::Accepted;
        std::map<std::string, std::string> payload;
        payload["task"] = rec.task.task_id;
        payload["op"] = rec.task.op;
        payload["order"] = std::to_string(rec.task.order_id);
        if (rec.task.part_id) payload["part_id"] = std::to_string(*rec.task.part_id);
        payload["station"] = rec.station;
        payload["resources"] = join(a.resources, ',');
        payload["start_ms"] = std::to_string(start);
        payload["end_ms"] = std::to_string(end);
        payload["duration_ms"] = std::to_string(rec.duration);
        ctx.send(id_, shop_agent(Role::DbaShop), Performative::Accept, rec.conv, payload, reply_to);
        rec.state = TaskState::Dispatched;
    }

    AgentId id_;
    std::map<std::string, TaskRec> tasks_;
    std::map<std::string, std::deque<std::string>> parked_;
};

// ---------------------------------------------------------------------------
// DBA-shop: the shop database behind an agent face. Task-data queries answer
// with capability records or a refusal; accepts record the allocation and
// forward requirement data to the executing station.
class DbaShopAgent : public Agent {
public:
    explicit DbaShopAgent(Database& db) : id_(shop_agent(Role::DbaShop)), db_(db) {}

    const AgentId& id() const override { return id_; }

    void handle(const AgentMessage& msg, MesContext& ctx) override {
        switch (msg.performative) {
            case Performative::Query: on_query(msg, ctx); return;
            case Performative::Accept: on_accept(msg, ctx); return;
            case Performative::Command: on_command(msg, ctx); return;
            default: ctx.note_unexpected(id_, msg); return;
        }
    }

private:
    void on_query(const AgentMessage& msg, MesContext& ctx) {
        if (msg.payload.count("purpose") && msg.payload.at("purpose") == "task-data") {
            std::map<std::string, std::string> payload;
            payload["task"] = msg.payload.at("task");
            for (const auto& cap : split(msg.payload.at("capabilities"), ',')) {
                const auto* rec = db_.query("capability/" + cap);
                if (!rec) {
                    std::map<std::string, std::string> refusal;
                    refusal["task"] = msg.payload.at("task");
                    refusal["reason"] = "no data for capability '" + cap + "'";
                    ctx.send(id_, msg.sender, Performative::Refuse, msg.conversation_id, refusal,
                             msg.seq);
                    return;
                }
                payload[cap + ".station"] = rec->value.at("station");
                payload[cap + ".resource"] = rec->value.at("resource");
                payload[cap + ".duration_ms"] = rec->value.at("duration_ms");
            }
            ctx.send(id_, msg.sender, Performative::Inform, msg.conversation_id, payload, msg.seq);
            return;
        }
        // Plain key lookup: missing keys are a negative inform, not an error.
        const auto& key = msg.payload.at("key");
        const auto* rec = db_.query(key);
        std::map<std::string, std::string> payload;
        payload["key"] = key;
        payload["found"] = rec ? "true" : "false";
        if (rec)
            for (const auto& [k, v] : rec->value) payload["value." + k] = v;
        ctx.send(id_, msg.sender, Performative::Inform, msg.conversation_id, payload, msg.seq);
    }

    void on_accept(const AgentMessage& msg, MesContext& ctx) {
        std::map<std::string, std::string> record(msg.payload.begin(), msg.payload.end());
        db_.write("alloc/" + msg.payload.at("task"), record, ctx.now());
        // Requirement data flows on to the executing station.
        ctx.send(id_, station_agent(Role::SCA, msg.payload.at("station")), Performative::Inform,
                 msg.conversation_id, record, msg.seq);
    }

    void on_command(const AgentMessage& msg, MesContext& ctx) {
        if (msg.payload.count("write_key")) {
            std::map<std::string, std::string> value;
            for (const auto& [k, v] : msg.payload)
                if (k.rfind("value.", 0) == 0) value[k.substr(6)] = v;
            db_.write(msg.payload.at("write_key"), value, ctx.now());
            std::map<std::string, std::string> ack;
            ack["key"] = msg.payload.at("write_key");
            ack["written"] = "true";
            ctx.send(id_, msg.sender, Performative::Inform, msg.conversation_id, ack, msg.seq);
            return;
        }
        ctx.note_unexpected(id_, msg);
    }

    AgentId id_;
    Database& db_;
};

// ---------------------------------------------------------------------------
// SCA: availability gatekeeping and dispatch for its station. A station that
// proposed availability holds the slot until the operation completes, so two
// negotiations can never claim the same resource within one instant.
class ScaAgent : public Agent {
public:
    ScaAgent(std::string station, const MesTopology& topology)
        : id_(station_agent(Role::SCA, station)), station_(std::move(station)), topology_(topology) {}

    const AgentId& id() const override { return id_; }

    void handle(const AgentMessage& msg, MesContext& ctx) override {
        switch (msg.performative) {
            case Performative::Query: on_availability_query(msg, ctx); return;
            case Performative::Inform: on_requirements(msg, ctx); return;
            case Performative::Notify: on_notify(msg, ctx); return;
            default: ctx.note_unexpected(id_, msg); return;
        }
    }

    std::string state_summary() const override {
        std::ostringstream os;
        os << "committed=";
        for (const auto& [res, task] : committed_) os << res << ":" << task << ",";
        return os.str();
    }

private:
    void on_availability_query(const AgentMessage& msg, MesContext& ctx) {
        const auto& op = msg.payload.at("op");
        AvailabilityReply reply;
        reply.task_id = msg.payload.at("task");
        reply.station = station_;
        reply.available = true;
        for (const auto& res : op_exclusive_resources(op))
            if (committed_.count(res)) reply.available = false;

        if (!reply.available) {
            ctx.send(id_, msg.sender, Performative::Refuse, msg.conversation_id,
                     reply.to_payload(), msg.seq);
            return;
        }
        for (const auto& res : op_exclusive_resources(op)) committed_[res] = reply.task_id;
        reply.earliest_start = ctx.now();
        ctx.send(id_, msg.sender, Performative::Propose, msg.conversation_id, reply.to_payload(),
                 msg.seq);
    }

    void on_requirements(const AgentMessage& msg, MesContext& ctx) {
        if (msg.sender.role != Role::DbaShop) {
            ctx.note_unexpected(id_, msg);
            return;
        }
        const auto& op = msg.payload.at("op");
        std::map<std::string, std::string> payload(msg.payload.begin(), msg.payload.end());
        ctx.send(id_, topology_.mra(station_, primary_resource(op)), Performative::Command,
                 msg.conversation_id, payload, msg.seq);
    }

    void on_notify(const AgentMessage& msg, MesContext& ctx) {
        if (msg.sender.role == Role::MRA) return;  // started acknowledgment
        if (msg.sender.role != Role::SMonA) {
            ctx.note_unexpected(id_, msg);
            return;
        }
        const auto& kind = msg.payload.at("kind");
        if (kind == "completed") {
            const auto& op = msg.payload.at("op");
            const auto& task = msg.payload.at("task");
            for (const auto& res : op_exclusive_resources(op)) {
                auto it = committed_.find(res);
                if (it != committed_.end() && it->second == task) committed_.erase(it);
            }
            std::map<std::string, std::string> payload;
            payload["kind"] = "released";
            payload["task"] = task;
            payload["station"] = station_;
            payload["completion_ms"] = std::to_string(msg.sent_at);
            ctx.send(id_, shop_agent(Role::AM), Performative::Notify, msg.conversation_id, payload,
                     msg.seq);
            return;
        }
        if (kind == "repair") {
            std::map<std::string, std::string> payload;
            payload["kind"] = "repair";
            payload["station"] = station_;
            ctx.send(id_, shop_agent(Role::AM), Performative::Notify, msg.conversation_id, payload,
                     msg.seq);
            return;
        }
        // Failures keep the commitment; the plant restarts on its own.
    }

    AgentId id_;
    std::string station_;
    const MesTopology& topology_;
    std::map<std::string, std::string> committed_;  // resource -> task
};

// ---------------------------------------------------------------------------
class SMonAAgent : public Agent {
public:
    explicit SMonAAgent(std::string station)
        : id_(station_agent(Role::SMonA, station)), station_(std::move(station)) {}

    const AgentId& id() const override { return id_; }

    void handle(const AgentMessage& msg, MesContext& ctx) override {
        if (msg.performative != Performative::Notify || msg.sender.role != Role::AMI) {
            ctx.note_unexpected(id_, msg);
            return;
        }
        ++observed_;
        ctx.send(id_, station_agent(Role::SCA, station_), Performative::Notify,
                 msg.conversation_id, msg.payload, msg.seq);
    }

    std::string state_summary() const override { return "observed=" + std::to_string(observed_); }

private:
    AgentId id_;
    std::string station_;
    std::uint64_t observed_ = 0;
};

class SmcaAgent : public Agent {
public:
    SmcaAgent() : id_(shop_agent(Role::SMCA)) {}

    const AgentId& id() const override { return id_; }

    void handle(const AgentMessage& msg, MesContext& ctx) override {
        if (msg.performative != Performative::Notify) {
            ctx.note_unexpected(id_, msg);
            return;
        }
        const auto& kind = msg.payload.at("kind");
        if (kind == "failure") ++failures_;
        if (kind == "repair") ++repairs_;
        if (kind == "completed") ++completions_;
    }

    std::string state_summary() const override {
        return "failures=" + std::to_string(failures_) + " repairs=" + std::to_string(repairs_) +
               " completions=" + std::to_string(completions_);
    }

private:
    AgentId id_;
    std::uint64_t failures_ = 0;
    std::uint64_t repairs_ = 0;
    std::uint64_t completions_ = 0;
};

class MraAgent : public Agent {
public:
    MraAgent(std::string station, std::string resource, int instance)
        : id_(station_agent(Role::MRA, station, instance)),
          station_(std::move(station)),
          resource_(std::move(resource)) {}

    const AgentId& id() const override { return id_; }

    void handle(const AgentMessage& msg, MesContext& ctx) override {
        if (msg.performative != Performative::Command || msg.sender.role != Role::SCA) {
            ctx.note_unexpected(id_, msg);
            return;
        }
        const std::string exec_conv = "exec-" + msg.payload.at("task");
        std::map<std::string, std::string> started;
        started["kind"] = "started";
        started["task"] = msg.payload.at("task");
        started["op"] = msg.payload.at("op");
        started["resource"] = resource_;
        ctx.send(id_, station_agent(Role::SCA, station_), Performative::Notify, exec_conv, started,
                 msg.seq);

        std::map<std::string, std::string> action(msg.payload.begin(), msg.payload.end());
        action["resource"] = resource_;
        ctx.send(id_, station_agent(Role::AMI, station_), Performative::Command, exec_conv, action,
                 msg.seq);
        ++dispatched_;
    }

    std::string state_summary() const override { return "dispatched=" + std::to_string(dispatched_); }

private:
    AgentId id_;
    std::string station_;
    std::string resource_;
    std::uint64_t dispatched_ = 0;
};

// AMI: forwards operation commands to the bridge and turns plant signals into
// monitoring notifications for its station.
class AmiAgent : public Agent {
public:
    explicit AmiAgent(std::string station)
        : id_(station_agent(Role::AMI, station)), station_(std::move(station)) {}

    const AgentId& id() const override { return id_; }

    void handle(const AgentMessage& msg, MesContext& ctx) override {
        if (msg.performative != Performative::Command || msg.sender.role != Role::MRA) {
            ctx.note_unexpected(id_, msg);
            return;
        }
        Dispatch d;
        d.task_id = msg.payload.at("task");
        d.conversation_id = msg.conversation_id;
        d.op = msg.payload.at("op");
        d.station = station_;
        d.order_id = std::stoll(msg.payload.at("order"));
        if (msg.payload.count("part_id")) d.part_id = std::stoll(msg.payload.at("part_id"));
        d.issued_at = ctx.now();
        pending_[pending_key(d.op, d.order_id, d.part_id)] = {d.task_id, d.conversation_id};
        ctx.push_dispatch(std::move(d));
    }

    void plant_signal(const PlantSignal& signal, MesContext& ctx) {
        const auto key = pending_key(signal.op, signal.order_id, signal.part_id);
        auto it = pending_.find(key);
        if (it == pending_.end()) return;  // movement updates never register here
        auto [task, conv] = it->second;
        if (signal.kind == PlantSignal::Kind::Completed) pending_.erase(it);

        std::map<std::string, std::string> payload;
        payload["kind"] = plant_signal_kind_str(signal.kind);
        payload["task"] = task;
        payload["op"] = signal.op;
        payload["order"] = std::to_string(signal.order_id);
        payload["station"] = station_;
        if (signal.part_id) payload["part_id"] = std::to_string(*signal.part_id);
        ctx.send(id_, station_agent(Role::SMonA, station_), Performative::Notify, conv, payload);
        ctx.send(id_, shop_agent(Role::SMCA), Performative::Notify, conv, payload);
    }

    std::string state_summary() const override { return "pending=" + std::to_string(pending_.size()); }

private:
    static std::string pending_key(const std::string& op, std::int64_t order,
                                   std::optional<std::int64_t> part) {
        return op + "/" + std::to_string(order) + "/" + (part ? std::to_string(*part) : "-");
    }

    AgentId id_;
    std::string station_;
    std::map<std::string, std::pair<std::string, std::string>> pending_;  // -> (task, conv)
};

class DbaStationAgent : public Agent {
public:
    DbaStationAgent(std::string station, Database& db)
        : id_(station_agent(Role::DbaStation, station)), db_(db) {}

    const AgentId& id() const override { return id_; }

    void handle(const AgentMessage& msg, MesContext& ctx) override {
        if (msg.performative == Performative::Query) {
            const auto& key = msg.payload.at("key");
            const auto* rec = db_.query(key);
            std::map<std::string, std::string> payload;
            payload["key"] = key;
            payload["found"] = rec ? "true" : "false";
            if (rec)
                for (const auto& [k, v] : rec->value) payload["value." + k] = v;
            ctx.send(id_, msg.sender, Performative::Inform, msg.conversation_id, payload, msg.seq);
            return;
        }
        ctx.note_unexpected(id_, msg);
    }

private:
    AgentId id_;
    Database& db_;
};

}  // namespace

// ---------------------------------------------------------------------------
struct detail::MesState {
    explicit MesState(const fms::FmsConfig& config) : shop_db("shop") {
        topology.stations = fms::station_specs(config);
    }

    MesTopology topology;
    Database shop_db;
    std::map<std::string, Database> station_dbs;

    std::map<std::string, std::unique_ptr<Agent>> agents;  // by id string
    SmaAgent* sma = nullptr;
    AmAgent* am = nullptr;
    std::map<std::string, AmiAgent*> amis;  // by station

    struct QueueCmp {
        bool operator()(const AgentMessage& a, const AgentMessage& b) const {
            if (a.sent_at != b.sent_at) return a.sent_at < b.sent_at;
            if (a.seq != b.seq) return a.seq < b.seq;
            return a.sender.str() < b.sender.str();
        }
    };
    std::multiset<AgentMessage, QueueCmp> queue;
    std::map<std::string, std::uint64_t> seq_counters;
    std::vector<AgentMessage> log;
    std::vector<Dispatch> dispatches;
    std::vector<Allocation> allocations;
    std::map<std::string, std::vector<CalendarEntry>> calendars;

    TimeMs now = 0;
    TimeMs budget_instant = -1;
    std::uint64_t budget_count = 0;
    std::uint64_t budget = 10000;
    std::uint64_t delivered = 0;
    std::uint64_t unexpected = 0;

    Agent* find_agent(const AgentId& id) {
        auto it = agents.find(id.str());
        return it == agents.end() ? nullptr : it->second.get();
    }

    void add(std::unique_ptr<Agent> agent) {
        auto key = agent->id().str();
        agents[key] = std::move(agent);
    }
};

TimeMs MesContext::now() const { return state_.now; }

std::uint64_t MesContext::send(const AgentId& sender, const AgentId& receiver, Performative p,
                               const std::string& conv, std::map<std::string, std::string> payload,
                               std::optional<std::uint64_t> reply_to) {
    AgentMessage m;
    m.conversation_id = conv;
    m.sender = sender;
    m.receiver = receiver;
    m.performative = p;
    m.in_reply_to = reply_to;
    m.seq = state_.seq_counters[sender.str()]++;
    m.payload = std::move(payload);
    m.sent_at = state_.now;
    state_.queue.insert(std::move(m));
    return state_.seq_counters[sender.str()] - 1;
}

void MesContext::push_dispatch(Dispatch d) { state_.dispatches.push_back(std::move(d)); }

void MesContext::record_allocation(const Allocation& a) { state_.allocations.push_back(a); }

void MesContext::finalize_allocation(const std::string& task_id, TimeMs completion) {
    for (auto& [res, entries] : state_.calendars) {
        for (auto& e : entries) {
            if (e.task_id == task_id && !e.finalized) {
                e.end = completion;
                e.finalized = true;
            }
        }
    }
    for (auto& a : state_.allocations)
        if (a.task_id == task_id) a.end = completion;
}

std::map<std::string, std::vector<CalendarEntry>>& MesContext::calendars() {
    return state_.calendars;
}

Database& MesContext::shop_db() { return state_.shop_db; }

Database& MesContext::station_db(const std::string& station) {
    return state_.station_dbs.at(station);
}

const MesTopology& MesContext::topology() const { return state_.topology; }


void MesContext::note_unexpected(const AgentId&, const AgentMessage&) { ++state_.unexpected; }

MesSystem::MesSystem(const fms::FmsConfig& config, std::vector<fms::BookOrder> orders)
    : state_(std::make_unique<detail::MesState>(config)) {
    // Capability knowledge preloaded into the shop database.
    for (const auto& rec : default_capability_records(config)) {
        state_->shop_db.write("capability/" + rec.capability,
                             {{"station", rec.station},
                              {"resource", rec.resource},
                              {"duration_ms", std::to_string(rec.duration_ms)}},
                             0);
    }

    auto sma = std::make_unique<SmaAgent>(std::move(orders), config.wip_limit);
    state_->sma = sma.get();
    state_->add(std::move(sma));
    auto am = std::make_unique<AmAgent>();
    state_->am = am.get();
    state_->add(std::move(am));
    state_->add(std::make_unique<SmcaAgent>());
    state_->add(std::make_unique<DbaShopAgent>(state_->shop_db));

    for (const auto& spec : state_->topology.stations) {
        state_->station_dbs.emplace(spec.id, Database("station:" + spec.id));
        state_->add(std::make_unique<ScaAgent>(spec.id, state_->topology));
        state_->add(std::make_unique<SMonAAgent>(spec.id));
        auto ami = std::make_unique<AmiAgent>(spec.id);
        state_->amis[spec.id] = ami.get();
        state_->add(std::move(ami));
        state_->add(std::make_unique<DbaStationAgent>(spec.id, state_->station_dbs.at(spec.id)));
        for (std::size_t i = 0; i < spec.resources.size(); ++i)
            state_->add(std::make_unique<MraAgent>(spec.id, spec.resources[i], static_cast<int>(i)));
    }
}

MesSystem::~MesSystem() = default;

void MesSystem::start(TimeMs now) {
    state_->now = now;
    MesContext ctx(*state_);
    state_->sma->kick(ctx);
    drain(now);
}

void MesSystem::drain(TimeMs now) {
    state_->now = now;
    if (state_->budget_instant != now) {
        state_->budget_instant = now;
        state_->budget_count = 0;
    }
    MesContext ctx(*state_);
    while (!state_->queue.empty()) {
        AgentMessage msg = *state_->queue.begin();
        state_->queue.erase(state_->queue.begin());
        if (++state_->budget_count > state_->budget)
            throw DivergenceError("message budget of " + std::to_string(state_->budget) +
                                  " exceeded at t=" + std::to_string(now));
        Agent* receiver = state_->find_agent(msg.receiver);
        if (!receiver) throw UnknownAgentError("no agent '" + msg.receiver.str() + "'");
        state_->log.push_back(msg);
        ++state_->delivered;
        receiver->handle(msg, ctx);
    }
}

StartTaskResult MesSystem::start_new_task(const TaskAnnouncement& task, TimeMs now) {
    state_->now = now;
    MesContext ctx(*state_);
    const std::size_t log_before = state_->log.size();
    state_->sma->announce_external(ctx, task);
    drain(now);

    StartTaskResult result;
    const std::string conv = "task-" + task.task_id;
    for (std::size_t i = log_before; i < state_->log.size(); ++i)
        if (state_->log[i].conversation_id == conv) result.transcript.push_back(state_->log[i]);

    const auto* rec = state_->am->find(task.task_id);
    if (!rec) throw MalformedTaskError("task '" + task.task_id + "' never reached the AM");
    using TS = AmAgent::TaskState;
    switch (rec->state) {
        case TS::Dispatched:
        case TS::Accepted:
        case TS::Done: {
            result.outcome = StartTaskResult::Outcome::Allocated;
            for (const auto& a : state_->allocations)
                if (a.task_id == task.task_id) result.allocation = a;
            break;
        }
        case TS::Parked:
            result.outcome = StartTaskResult::Outcome::Parked;
            break;
        default:
            result.outcome = StartTaskResult::Outcome::Deferred;
            break;
    }
    return result;
}

void MesSystem::deliver_plant_signal(const PlantSignal& signal) {
    state_->now = std::max(state_->now, signal.time);
    auto it = state_->amis.find(signal.station);
    if (it == state_->amis.end())
        throw UnknownAgentError("no AMI for station '" + signal.station + "'");
    MesContext ctx(*state_);
    it->second->plant_signal(signal, ctx);
}

std::vector<Dispatch> MesSystem::take_dispatches() {
    auto out = std::move(state_->dispatches);
    state_->dispatches.clear();
    return out;
}

bool MesSystem::has_pending_messages() const { return !state_->queue.empty(); }

const std::vector<AgentMessage>& MesSystem::message_log() const { return state_->log; }

const std::vector<Allocation>& MesSystem::allocations() const { return state_->allocations; }

const std::map<std::string, std::vector<CalendarEntry>>& MesSystem::calendars() const {
    return state_->calendars;
}

Database& MesSystem::shop_db() { return state_->shop_db; }

Database& MesSystem::station_db(const std::string& station) {
    return state_->station_dbs.at(station);
}

std::size_t MesSystem::orders_completed() const { return state_->sma->completed(); }

std::size_t MesSystem::messages_delivered() const { return state_->delivered; }

std::uint64_t MesSystem::message_budget() const { return state_->budget; }

void MesSystem::set_message_budget(std::uint64_t budget) { state_->budget = budget; }

std::map<std::string, std::string> MesSystem::agent_state_summaries() const {
    std::map<std::string, std::string> out;
    for (const auto& [key, agent] : state_->agents) out[key] = agent->state_summary();
    return out;
}

void MesSystem::add_agent_for_test(std::unique_ptr<Agent> agent) { state_->add(std::move(agent)); }

void MesSystem::inject_message_for_test(const AgentId& sender, const AgentId& receiver,
                                        Performative p, const std::string& conv,
                                        std::map<std::string, std::string> payload, TimeMs now) {
    state_->now = now;
    MesContext ctx(*state_);
    ctx.send(sender, receiver, p, conv, std::move(payload));
}

}  // namespace shopfloor::mes
