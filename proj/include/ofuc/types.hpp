#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace ofuc {

// Register contents are opaque byte strings. The empty string is reserved for ⊥;
// every encoded domain value is non-empty.
using Bytes = std::string;
using RegisterId = std::string;

inline const Bytes kBottom{};

inline bool is_bottom(const Bytes& b) noexcept { return b.empty(); }

// Identities only support equality and a fixed total order (for tie-breaks).
struct ProcessId {
    std::uint32_t value = 0;

    friend auto operator<=>(const ProcessId&, const ProcessId&) = default;

    std::string str() const { return "p" + std::to_string(value); }
};

inline std::ostream& operator<<(std::ostream& out, ProcessId p) { return out << p.str(); }

inline ProcessId parse_process_id(const std::string& s)
{
    if (s.size() < 2 || s[0] != 'p') {
        throw std::invalid_argument("bad process id: " + s);
    }
    return ProcessId{static_cast<std::uint32_t>(std::stoul(s.substr(1)))};
}

struct Timestamp {
    std::uint64_t value = 0;

    friend auto operator<=>(const Timestamp&, const Timestamp&) = default;

    Timestamp next() const
    {
        if (value == std::numeric_limits<std::uint64_t>::max()) {
            throw std::overflow_error("timestamp space exhausted");
        }
        return Timestamp{value + 1};
    }
};

inline std::string encode_nat(std::uint64_t n) { return std::to_string(n); }

inline std::uint64_t decode_nat(const Bytes& b) { return std::stoull(b); }

}  // namespace ofuc

template <>
struct std::hash<ofuc::ProcessId> {
    std::size_t operator()(ofuc::ProcessId p) const noexcept { return std::hash<std::uint32_t>{}(p.value); }
};
