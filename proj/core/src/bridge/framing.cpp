#include "shopfloor/bridge/framing.hpp"

#include "shopfloor/errors.hpp"

namespace shopfloor::bridge {

std::string frame(std::string_view payload) {
    const auto n = static_cast<std::uint32_t>(payload.size());
    std::string out;
    out.reserve(4 + payload.size());
    out += static_cast<char>((n >> 24) & 0xFF);
    out += static_cast<char>((n >> 16) & 0xFF);
    out += static_cast<char>((n >> 8) & 0xFF);
    out += static_cast<char>(n & 0xFF);
    out += payload;
    return out;
}

std::vector<std::string> Deframer::feed(std::string_view bytes) {
    buffer_.append(bytes.data(), bytes.size());
    std::vector<std::string> out;
    while (buffer_.size() >= 4) {
        const auto b = [&](std::size_t i) {
            return static_cast<std::uint32_t>(static_cast<unsigned char>(buffer_[i]));
        };
        const std::uint32_t n = (b(0) << 24) | (b(1) << 16) | (b(2) << 8) | b(3);
        if (n > limit_)
            throw OversizeFrameError("declared frame length " + std::to_string(n) +
                                     " exceeds limit " + std::to_string(limit_));
        if (buffer_.size() < 4 + static_cast<std::size_t>(n)) break;
        out.push_back(buffer_.substr(4, n));
        buffer_.erase(0, 4 + static_cast<std::size_t>(n));
    }
    return out;
}

void Deframer::finish() const {
    if (!buffer_.empty())
        throw BrokenStreamError("stream ended inside a frame (" + std::to_string(buffer_.size()) +
                                " bytes buffered)");
}

}  // namespace shopfloor::bridge
