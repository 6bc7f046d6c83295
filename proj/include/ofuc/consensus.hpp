#pragma once

// Obstruction-free consensus: a racing on grafarius objects plus a decision
// register. Solo, a propose decides after a single grafarius.

#include <ofuc/racing.hpp>

#include <cstdint>
#include <optional>
#include <string>

namespace ofuc {

struct ConsensusLimits {
    // Grafarius laps tried before giving up; 0 means unbounded. A bounded
    // propose that runs out reports starvation and leaves retrying (and any
    // back-off) to the caller.
    std::uint32_t max_laps = 0;
};

inline std::string decision_register(const std::string& consensus) { return consensus + ":d"; }

inline Task<Bytes> decided(Mem m, std::string consensus) { co_return co_await m.read(decision_register(consensus), kBottom); }

inline Task<std::optional<Bytes>> propose(Mem m, std::string consensus, Bytes u, ConsensusLimits limits = {})
{
    if (is_bottom(u)) {
        throw std::invalid_argument("propose: empty value");
    }
    const IndexFunction grafarius{consensus + ":grafarius:"};
    for (std::uint32_t laps = 0; limits.max_laps == 0 || laps <= limits.max_laps; ++laps) {
        auto d = co_await m.read(decision_register(consensus), kBottom);
        if (!is_bottom(d)) {
            co_return d;
        }
        if (limits.max_laps != 0 && laps == limits.max_laps) {
            break;
        }
        const auto lap = co_await enter(m, consensus + ":race", grafarius);
        const auto out = co_await adopt_commit(m, lap.name, u);
        u = out.value;
        if (out.flag == Flag::commit) {
            co_await m.write(decision_register(consensus), u);
            co_return u;
        }
    }
    co_return std::nullopt;
}

}  // namespace ofuc
