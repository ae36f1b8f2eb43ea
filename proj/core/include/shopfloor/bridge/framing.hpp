#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace shopfloor::bridge {

inline constexpr std::size_t kDefaultFrameLimit = 1 << 20;  // 1 MiB

// 4-byte big-endian payload length, then the payload.
std::string frame(std::string_view payload);

// Incremental deframer: feed arbitrary byte chunks, recover whole messages.
// A declared length beyond the limit throws OversizeFrameError; finish()
// throws BrokenStreamError when bytes of an incomplete frame remain.
class Deframer {
public:
    explicit Deframer(std::size_t limit = kDefaultFrameLimit) : limit_(limit) {}

    std::vector<std::string> feed(std::string_view bytes);
    void finish() const;
    std::size_t buffered() const { return buffer_.size(); }

private:
    std::size_t limit_;
    std::string buffer_;
};

}  // namespace shopfloor::bridge
