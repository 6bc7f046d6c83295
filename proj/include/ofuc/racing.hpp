#pragma once

// Racing: a long-lived object ordering an unbounded family of laps.

#include <ofuc/primitives.hpp>

#include <algorithm>
#include <cstdint>
#include <string>

namespace ofuc {

// Deterministic lap naming; the same index always names the same object.
struct IndexFunction {
    std::string prefix;

    std::string operator()(std::uint64_t n) const { return prefix + std::to_string(n); }
};

inline IndexFunction default_index(const std::string& racing) { return IndexFunction{racing + ":lap:"}; }

struct Lap {
    std::uint64_t index = 0;
    std::string name;
};

// lastlap starts at 0; lap 0 is a sentinel that is never returned.
inline std::uint64_t last_lap(Mem m, const std::string& racing)
{
    const auto* p = m.proc().find_local<std::uint64_t>(m.scope(racing) + "@lastlap");
    return p ? *p : 0;
}

inline Task<Lap> enter(Mem m, std::string racing, IndexFunction iota)
{
    auto& last = m.proc().local<std::uint64_t>(m.scope(racing) + "@lastlap");
    co_await collect_store(m, racing + ":L", encode_nat(last));
    std::uint64_t top = 0;
    for (const auto& v : co_await collect(m, racing + ":L")) {
        top = std::max(top, decode_nat(v));
    }
    last = (last == top) ? top + 1 : top;
    Lap lap{last, iota(last)};
    if (auto* hooks = m.proc().hooks()) {
        hooks->lap_entered(m.proc(), racing, lap.name, lap.index);
    }
    co_return lap;
}

inline Task<Lap> enter(Mem m, std::string racing)
{
    auto iota = default_index(racing);
    co_return co_await enter(m, std::move(racing), std::move(iota));
}

}  // namespace ofuc
