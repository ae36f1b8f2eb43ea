#include "shopfloor/bridge/wire.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>
#include <thread>

#include "shopfloor/bridge/xml.hpp"
#include "shopfloor/errors.hpp"
#include "shopfloor/fms/model.hpp"
#include "shopfloor/mes/conformance.hpp"

namespace shopfloor::bridge {

FrameChannel::FrameChannel(int fd, std::size_t frame_limit) : fd_(fd), deframer_(frame_limit) {}

FrameChannel::~FrameChannel() {
    if (fd_ >= 0) ::close(fd_);
}

void FrameChannel::send(std::string_view payload) {
    const std::string wire = frame(payload);
    std::size_t sent = 0;
    while (sent < wire.size()) {
        const ssize_t n = ::send(fd_, wire.data() + sent, wire.size() - sent, 0);
        if (n <= 0) throw BrokenStreamError("send failed: " + std::string(std::strerror(errno)));
        sent += static_cast<std::size_t>(n);
    }
}

std::optional<std::string> FrameChannel::recv() {
    while (ready_.empty()) {
        char buf[4096];
        const ssize_t n = ::recv(fd_, buf, sizeof(buf), 0);
        if (n == 0) {
            deframer_.finish();  // throws when a frame is cut short
            return std::nullopt;
        }
        if (n < 0) throw BrokenStreamError("recv failed: " + std::string(std::strerror(errno)));
        for (auto& m : deframer_.feed(std::string_view(buf, static_cast<std::size_t>(n))))
            ready_.push_back(std::move(m));
    }
    std::string out = std::move(ready_.front());
    ready_.erase(ready_.begin());
    return out;
}

ListenSocket::ListenSocket() {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0) throw Error("socket: " + std::string(std::strerror(errno)));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = 0;
    if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0)
        throw Error("bind: " + std::string(std::strerror(errno)));
    if (::listen(fd_, 1) != 0) throw Error("listen: " + std::string(std::strerror(errno)));
    socklen_t len = sizeof(addr);
    if (::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len) != 0)
        throw Error("getsockname: " + std::string(std::strerror(errno)));
    port_ = ntohs(addr.sin_port);
}

ListenSocket::~ListenSocket() {
    if (fd_ >= 0) ::close(fd_);
}

int ListenSocket::accept_one() {
    const int fd = ::accept(fd_, nullptr, nullptr);
    if (fd < 0) throw Error("accept: " + std::string(std::strerror(errno)));
    return fd;
}

int connect_loopback(int port) {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw Error("socket: " + std::string(std::strerror(errno)));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        ::close(fd);
        throw Error("connect: " + std::string(std::strerror(errno)));
    }
    return fd;
}

namespace {

const std::string& require_attr(const XmlNode& node, const char* name) {
    const std::string* v = node.attr(name);
    if (!v)
        throw ParseError(ParseError::Kind::MalformedXml, node.offset,
                         "<" + node.name + "> lacks attribute " + name);
    return *v;
}

XmlNode signal_to_node(const mes::PlantSignal& s) {
    XmlNode n;
    n.name = "SIGNAL";
    n.attrs = {{"KIND", mes::plant_signal_kind_str(s.kind)},
               {"STATION", s.station},
               {"OP", s.op},
               {"ORDER", std::to_string(s.order_id)}};
    if (s.part_id) n.attrs.emplace_back("PART-ID", std::to_string(*s.part_id));
    n.attrs.emplace_back("TIME", std::to_string(s.time));
    return n;
}

mes::PlantSignal node_to_signal(const XmlNode& n) {
    mes::PlantSignal s;
    const auto& kind = require_attr(n, "KIND");
    if (kind == "completed") s.kind = mes::PlantSignal::Kind::Completed;
    else if (kind == "failure") s.kind = mes::PlantSignal::Kind::Failure;
    else if (kind == "repair") s.kind = mes::PlantSignal::Kind::Repair;
    else
        throw ParseError(ParseError::Kind::MalformedXml, n.offset, "bad signal kind " + kind);
    s.station = require_attr(n, "STATION");
    s.op = require_attr(n, "OP");
    s.order_id = std::stoll(require_attr(n, "ORDER"));
    if (n.attr("PART-ID")) s.part_id = std::stoll(*n.attr("PART-ID"));
    s.time = std::stoll(require_attr(n, "TIME"));
    return s;
}

XmlNode update_to_node(const std::string& station, const StateUpdate& u) {
    XmlNode n;
    n.name = "UPDATE";
    n.attrs = {{"NAME", u.object},
               {"STATE", u.state},
               {"STATION", station},
               {"TIME", std::to_string(u.timestamp)}};
    for (const auto& [k, v] : u.payload) {
        XmlNode f;
        f.name = "FIELD";
        f.attrs = {{"NAME", k}, {"VALUE", v}};
        n.children.push_back(std::move(f));
    }
    return n;
}

std::pair<std::string, StateUpdate> node_to_update(const XmlNode& n) {
    StateUpdate u;
    u.object = require_attr(n, "NAME");
    u.state = require_attr(n, "STATE");
    u.timestamp = std::stoll(require_attr(n, "TIME"));
    for (const auto& f : n.children) u.payload[require_attr(f, "NAME")] = require_attr(f, "VALUE");
    return {require_attr(n, "STATION"), u};
}

XmlNode dispatch_to_node(const mes::Dispatch& d) {
    XmlNode n;
    n.name = "DISPATCH";
    n.attrs = {{"TASK", d.task_id},
               {"CONV", d.conversation_id},
               {"OP", d.op},
               {"STATION", d.station},
               {"ORDER", std::to_string(d.order_id)}};
    if (d.part_id) n.attrs.emplace_back("PART-ID", std::to_string(*d.part_id));
    n.attrs.emplace_back("TIME", std::to_string(d.issued_at));
    return n;
}

mes::Dispatch node_to_dispatch(const XmlNode& n) {
    mes::Dispatch d;
    d.task_id = require_attr(n, "TASK");
    d.conversation_id = require_attr(n, "CONV");
    d.op = require_attr(n, "OP");
    d.station = require_attr(n, "STATION");
    d.order_id = std::stoll(require_attr(n, "ORDER"));
    if (n.attr("PART-ID")) d.part_id = std::stoll(*n.attr("PART-ID"));
    d.issued_at = std::stoll(require_attr(n, "TIME"));
    return d;
}

}  // namespace

RemoteMesStats serve_mes(mes::MesSystem& mes, FrameChannel& channel) {
    while (true) {
        auto msg = channel.recv();
        if (!msg) throw BrokenStreamError("peer closed before SHUTDOWN");
        XmlNode root = parse_xml(*msg);

        if (root.name == "SHUTDOWN") {
            RemoteMesStats stats;
            stats.messages_delivered = mes.messages_delivered();
            stats.orders_completed = mes.orders_completed();
            auto report = mes::check_conformance(mes.message_log());
            stats.conformance_violations = report.violations.size();
            stats.calendar_violations = mes::audit_calendars(mes.calendars()).size();

            XmlNode bye;
            bye.name = "BYE";
            bye.attrs = {{"MESSAGES", std::to_string(stats.messages_delivered)},
                         {"ORDERS", std::to_string(stats.orders_completed)},
                         {"CONFORMANCE-VIOLATIONS", std::to_string(stats.conformance_violations)},
                         {"CALENDAR-VIOLATIONS", std::to_string(stats.calendar_violations)}};
            channel.send(write_xml(bye));
            return stats;
        }
        if (root.name != "TURN")
            throw ParseError(ParseError::Kind::UnknownElement, root.offset,
                             "expected <TURN>, got <" + root.name + ">");

        const petri::TimeMs now = std::stoll(require_attr(root, "TIME"));
        // Children carry the fresh plant observations in event order.
        for (const auto& child : root.children) {
            if (child.name == "UPDATE") {
                auto [station, update] = node_to_update(child);
                record_state_update(mes, station, update);
            } else if (child.name == "SIGNAL") {
                mes.deliver_plant_signal(node_to_signal(child));
            } else {
                throw ParseError(ParseError::Kind::UnknownElement, child.offset,
                                 "unknown element <" + child.name + "> in TURN");
            }
        }
        if (require_attr(root, "START") == "true") mes.start(now);
        else mes.drain(now);

        XmlNode done;
        done.name = "TURN-DONE";
        done.attrs = {{"TIME", std::to_string(now)}};
        for (const auto& d : mes.take_dispatches()) done.children.push_back(dispatch_to_node(d));
        channel.send(write_xml(done));
    }
}

petri::HookResult RemoteControllerHook::on_step(petri::TimeMs now,
                                                std::span<const petri::SimEvent> fresh_events,
                                                const petri::Marking&) {
    petri::HookResult result;

    XmlNode turn;
    turn.name = "TURN";
    turn.attrs = {{"TIME", std::to_string(now)}, {"START", started_ ? "false" : "true"}};
    started_ = true;

    for (const auto& ev : fresh_events) {
        TranslatedEvent t = translate_event(ev);
        if (t.update && t.station) turn.children.push_back(update_to_node(*t.station, *t.update));
        if (t.signal) {
            turn.children.push_back(signal_to_node(*t.signal));
            petri::NotifyRecord record;
            record["kind"] = mes::plant_signal_kind_str(t.signal->kind);
            record["station"] = t.signal->station;
            record["op"] = t.signal->op;
            record["order"] = std::to_string(t.signal->order_id);
            if (t.signal->part_id) record["part_id"] = std::to_string(*t.signal->part_id);
            result.notifications.push_back(std::move(record));
        }
    }
    channel_.send(write_xml(turn));

    auto reply = channel_.recv();
    if (!reply) throw BrokenStreamError("agent endpoint closed mid-run");
    XmlNode done = parse_xml(*reply);
    if (done.name != "TURN-DONE")
        throw ParseError(ParseError::Kind::UnknownElement, done.offset,
                         "expected <TURN-DONE>, got <" + done.name + ">");
    for (const auto& child : done.children) {
        ActionCommand cmd = translate_decision(node_to_dispatch(child));
        result.commands.push_back(command_to_injection(cmd));
        commands_.push_back(std::move(cmd));
    }
    return result;
}

RemoteMesStats RemoteControllerHook::shutdown() {
    XmlNode n;
    n.name = "SHUTDOWN";
    channel_.send(write_xml(n));
    auto reply = channel_.recv();
    if (!reply) throw BrokenStreamError("no BYE from agent endpoint");
    XmlNode bye = parse_xml(*reply);
    RemoteMesStats stats;
    stats.messages_delivered = std::stoull(require_attr(bye, "MESSAGES"));
    stats.orders_completed = std::stoull(require_attr(bye, "ORDERS"));
    stats.conformance_violations = std::stoull(require_attr(bye, "CONFORMANCE-VIOLATIONS"));
    stats.calendar_violations = std::stoull(require_attr(bye, "CALENDAR-VIOLATIONS"));
    return stats;
}

CoupledResult step_coupled_remote(const petri::NetModel& net, const petri::Marking& initial,
                                  const fms::FmsConfig& config, petri::TimeMs until,
                                  std::uint64_t seed, RemoteMesStats* stats) {
    ListenSocket listener;
    std::exception_ptr server_error;

    std::thread server([&] {
        try {
            FrameChannel channel(listener.accept_one());
            mes::MesSystem mes(config, fms::make_orders(config));
            serve_mes(mes, channel);
        } catch (...) {
            server_error = std::current_exception();
        }
    });

    CoupledResult out;
    try {
        FrameChannel channel(connect_loopback(listener.port()));
        RemoteControllerHook hook(channel);
        petri::RunOptions options;
        options.horizon = until;
        options.seed = seed;
        auto kernel = petri::run(net, initial, options, &hook);
        auto remote_stats = hook.shutdown();
        if (stats) *stats = remote_stats;

        out.trace = std::move(kernel.trace);
        out.final_marking = std::move(kernel.final_marking);
        out.orders_completed = remote_stats.orders_completed;
        out.messages_delivered = remote_stats.messages_delivered;
        out.commands = hook.commands_issued();
    } catch (...) {
        server.join();
        throw;
    }
    server.join();
    if (server_error) std::rethrow_exception(server_error);
    return out;
}

}  // namespace shopfloor::bridge
