#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace shopfloor {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Kernel contract violations.
struct MalformedNetError : Error {
    using Error::Error;
};
struct NotEnabledError : Error {
    using Error::Error;
};
struct CapacityError : Error {
    using Error::Error;
};
struct BoundExceededError : Error {
    using Error::Error;
};
struct EvalError : Error {
    using Error::Error;
};

// Model / configuration.
struct InvalidConfigError : Error {
    using Error::Error;
};
struct UnknownKindError : Error {
    using Error::Error;
};

// Agent layer.
struct UnknownAgentError : Error {
    using Error::Error;
};
struct MalformedTaskError : Error {
    using Error::Error;
};
struct OverlapConflictError : Error {
    using Error::Error;
};
struct InsufficientRunsError : Error {
    using Error::Error;
};

// Bridge / wire protocol.
struct ParseError : Error {
    enum class Kind { MalformedXml, UnknownElement, MissingName };
    ParseError(Kind k, std::size_t byte_offset, const std::string& what)
        : Error(what), kind(k), offset(byte_offset) {}
    Kind kind;
    std::size_t offset;
};
struct UnserializableError : Error {
    using Error::Error;
};
struct UnknownObjectError : Error {
    using Error::Error;
};
struct OversizeFrameError : Error {
    using Error::Error;
};
struct BrokenStreamError : Error {
    using Error::Error;
};
struct DivergenceError : Error {
    using Error::Error;
};

}  // namespace shopfloor
