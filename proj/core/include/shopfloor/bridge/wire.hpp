#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "shopfloor/bridge/coupled.hpp"
#include "shopfloor/bridge/framing.hpp"
#include "shopfloor/fms/config.hpp"
#include "shopfloor/mes/system.hpp"

namespace shopfloor::bridge {

// Blocking framed byte stream over a connected socket: 4-byte big-endian
// length prefix, UTF-8 XML payload.
class FrameChannel {
public:
    explicit FrameChannel(int fd, std::size_t frame_limit = kDefaultFrameLimit);
    ~FrameChannel();
    FrameChannel(const FrameChannel&) = delete;
    FrameChannel& operator=(const FrameChannel&) = delete;

    void send(std::string_view payload);
    // One whole message; nullopt on orderly close between frames. Throws
    // BrokenStreamError when the peer vanishes mid-frame.
    std::optional<std::string> recv();

private:
    int fd_;
    Deframer deframer_;
    std::vector<std::string> ready_;
};

// Loopback listener on an ephemeral port.
class ListenSocket {
public:
    ListenSocket();
    ~ListenSocket();
    int port() const { return port_; }
    int accept_one();

private:
    int fd_;
    int port_;
};

int connect_loopback(int port);

struct RemoteMesStats {
    std::size_t messages_delivered = 0;
    std::size_t orders_completed = 0;
    std::size_t conformance_violations = 0;
    std::size_t calendar_violations = 0;
};

// Server half: applies TURN frames (state updates + plant signals, in event
// order) to the agent layer, replies TURN-DONE with the dispatches. Returns
// after answering SHUTDOWN with BYE.
RemoteMesStats serve_mes(mes::MesSystem& mes, FrameChannel& channel);

// Client half: speaks the turn protocol instead of holding the MesSystem.
// Behaviour is observably identical to AgentControllerHook, so traces match.
class RemoteControllerHook : public petri::RunHooks {
public:
    explicit RemoteControllerHook(FrameChannel& channel) : channel_(channel) {}

    petri::HookResult on_step(petri::TimeMs now, std::span<const petri::SimEvent> fresh_events,
                              const petri::Marking& marking) override;
    RemoteMesStats shutdown();

    const std::vector<ActionCommand>& commands_issued() const { return commands_; }

private:
    FrameChannel& channel_;
    std::vector<ActionCommand> commands_;
    bool started_ = false;
};

// Full coupled run with the agent layer behind a loopback socket; the server
// thread is spawned and joined internally.
CoupledResult step_coupled_remote(const petri::NetModel& net, const petri::Marking& initial,
                                  const fms::FmsConfig& config, petri::TimeMs until,
                                  std::uint64_t seed = 0, RemoteMesStats* stats = nullptr);

}  // namespace shopfloor::bridge
