#pragma once

// Universal constructions.
//
//   invoke_runiv  racing on consensus objects; one fresh consensus per state
//                 change, so memory grows without bound.
//   invoke_buniv  the same protocol over a pool of recycled consensus objects
//                 indexed 0..k, each reused at increasing timestamp epochs.
//
// Both are obstruction-free: a bounded call that runs out of attempts returns
// nullopt and the caller decides whether to retry.

#include <ofuc/consensus.hpp>
#include <ofuc/serial_types.hpp>

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>

namespace ofuc {

struct UniversalLimits {
    ConsensusLimits consensus;
    // Proposals lost before giving up; 0 means unbounded.
    std::uint32_t max_attempts = 0;
};

// ---------------------------------------------------------------------------
// Recycled objects: once the base object is decided every operation returns
// f(d); otherwise its code runs over registers read and written at epoch t.

struct ProposeTrace {
    // True when the call wrote the decision register.
    bool modifier = false;
    // Access clock of the last decision-register access of the call.
    std::uint64_t lin_point = 0;
};

namespace detail {

// propose() with the bookkeeping needed to reconstruct a sequential history.
inline Task<std::optional<Bytes>> propose_traced(Mem m, std::string consensus, Bytes u, ConsensusLimits limits,
                                                 ProposeTrace* trace)
{
    const IndexFunction grafarius{consensus + ":grafarius:"};
    for (std::uint32_t laps = 0; limits.max_laps == 0 || laps <= limits.max_laps; ++laps) {
        auto d = co_await m.read(decision_register(consensus), kBottom);
        trace->lin_point = m.proc().last_clock();
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
            trace->modifier = true;
            trace->lin_point = m.proc().last_clock();
            co_return u;
        }
    }
    co_return std::nullopt;
}

}  // namespace detail

struct RecycledConsensus {
    std::string name;
    Timestamp epoch;

    Mem view(Mem base) const { return base.at_epoch(epoch); }

    // propose() reads the decision register first, which is exactly the
    // "decided ⇒ return f(d) = d" short-circuit.
    Task<std::optional<Bytes>> propose(Mem base, Bytes u, ConsensusLimits limits = {}, ProposeTrace* trace = nullptr) const
    {
        ProposeTrace scratch;
        ProposeTrace* sink = trace ? trace : &scratch;
        co_return co_await detail::propose_traced(view(base), name, std::move(u), limits, sink);
    }

    Task<Bytes> decided(Mem base) const { co_return co_await ofuc::decided(view(base), name); }
};

struct RecycledGrafarius {
    std::string name;
    Timestamp epoch;

    Task<AdoptCommit> adopt_commit(Mem base, Bytes u) const
    {
        const Mem m = base.at_epoch(epoch);
        auto d = co_await grafarius_decision(m, name);
        if (!is_bottom(d)) {
            co_return AdoptCommit{Flag::adopt, std::move(d)};
        }
        co_return co_await ofuc::adopt_commit(m, name, std::move(u));
    }
};

inline RecycledConsensus recycle_consensus(std::string name, Timestamp t) { return {std::move(name), t}; }
inline RecycledGrafarius recycle_grafarius(std::string name, Timestamp t) { return {std::move(name), t}; }

// ---------------------------------------------------------------------------
// Unbounded construction.

template <SerialType T>
struct RunivLocal {
    typename T::State state;
    std::optional<Lap> current;
};

inline std::string runiv_racing(const std::string& name) { return name + ":race"; }
inline IndexFunction runiv_index(const std::string& name) { return IndexFunction{name + ":consensus:"}; }

template <SerialType T>
Task<std::optional<typename T::Response>> invoke_runiv(Mem m, std::string name, T type, typename T::Op op,
                                                       UniversalLimits limits = {})
{
    const auto key = m.scope(name) + "@runiv";
    auto* local = m.proc().template find_local<RunivLocal<T>>(key);
    if (!local) {
        local = &m.proc().template local<RunivLocal<T>>(key);
        local->state = type.initial();
    }
    if (!local->current) {
        local->current = co_await enter(m, runiv_racing(name), runiv_index(name));
    }
    const auto me = static_cast<std::int64_t>(m.proc().id().value);

    for (std::uint32_t attempt = 0; limits.max_attempts == 0 || attempt < limits.max_attempts; ++attempt) {
        for (;;) {
            const auto d = co_await decided(m, local->current->name);
            if (is_bottom(d)) {
                break;
            }
            local->state = type.decode_state(json::parse(d).at("s").template get<std::string>());
            local->current = co_await enter(m, runiv_racing(name), runiv_index(name));
        }
        auto applied = type.apply(local->state, op);
        auto response = std::move(applied.second);
        const Bytes encoded = type.encode_state(applied.first);
        if (encoded == type.encode_state(local->state)) {
            co_return response;
        }
        const Bytes proposal = json{{"p", me}, {"s", encoded}}.dump();
        const auto decision = co_await propose(m, local->current->name, proposal, limits.consensus);
        if (!decision) {
            co_return std::nullopt;
        }
        const auto payload = json::parse(*decision);
        local->state = type.decode_state(payload.at("s").template get<std::string>());
        if (payload.at("p").template get<std::int64_t>() == me) {
            co_return response;
        }
    }
    co_return std::nullopt;
}

// ---------------------------------------------------------------------------
// Bounded construction.
//
// Shared variables, for an object `name`:
//   name:L             collect map; each process announces the pool index it is using
//   name:F             collect map; winners publish the frontier (index, epoch, state)
//   name:consensus:i   pool of recycled consensus objects
//
// A decision at epoch t carries (proposer, new state, next index, t+1). The
// next index comes from free(), the smallest index nobody announced.

// Smallest index in [0, gamma] absent from `busy`; gamma + 1 when all are busy.
inline std::uint64_t free_index(const std::set<std::uint64_t>& busy, std::uint64_t gamma)
{
    for (std::uint64_t i = 0; i <= gamma; ++i) {
        if (!busy.contains(i)) {
            return i;
        }
    }
    return gamma + 1;
}

inline std::string buniv_pool(const std::string& name, std::uint64_t index)
{
    return name + ":consensus:" + std::to_string(index);
}

// Every announced index has been accessed, so the greatest one bounds them all.
inline Task<std::uint64_t> free(Mem m, std::string name)
{
    const auto busy = co_await collect_codomain(m, name + ":L");
    const std::uint64_t gamma = busy.empty() ? 0 : *busy.rbegin();
    co_return free_index(busy, gamma);
}

template <SerialType T>
struct BunivLocal {
    typename T::State state;
    std::uint64_t index = 0;
    Timestamp epoch{0};
    std::optional<std::uint64_t> announced;
};

template <SerialType T>
Task<std::optional<typename T::Response>> invoke_buniv(Mem m, std::string name, T type, typename T::Op op,
                                                       UniversalLimits limits = {})
{
    const auto key = m.scope(name) + "@buniv";
    auto* local = m.proc().template find_local<BunivLocal<T>>(key);
    if (!local) {
        local = &m.proc().template local<BunivLocal<T>>(key);
        local->state = type.initial();
    }
    const auto me = static_cast<std::int64_t>(m.proc().id().value);

    auto fold = [&](const Bytes& decision) {
        const auto payload = json::parse(decision);
        local->state = type.decode_state(payload.at("s").template get<std::string>());
        local->index = payload.at("l").template get<std::uint64_t>();
        local->epoch = Timestamp{payload.at("t").template get<std::uint64_t>()};
        return payload;
    };

    // Catch up with the most recent frontier published by a winner.
    const auto published = co_await collect(m, name + ":F");
    for (const auto& entry : published) {
        const auto f = json::parse(entry);
        const Timestamp t{f.at("t").template get<std::uint64_t>()};
        if (local->epoch < t) {
            local->epoch = t;
            local->index = f.at("l").template get<std::uint64_t>();
            local->state = type.decode_state(f.at("s").template get<std::string>());
        }
    }

    for (std::uint32_t attempt = 0; limits.max_attempts == 0 || attempt < limits.max_attempts;) {
        if (local->announced != local->index) {
            co_await collect_store(m, name + ":L", encode_nat(local->index));
            local->announced = local->index;
        }
        const auto current = recycle_consensus(buniv_pool(name, local->index), local->epoch);
        const auto d = co_await current.decided(m);
        if (!is_bottom(d)) {
            fold(d);
            continue;
        }
        auto applied = type.apply(local->state, op);
        auto response = std::move(applied.second);
        const Bytes encoded = type.encode_state(applied.first);
        if (encoded == type.encode_state(local->state)) {
            co_return response;
        }
        const auto next_index = co_await free(m, name);
        const Timestamp epoch = local->epoch;
        const Bytes proposal =
            json{{"p", me}, {"s", encoded}, {"l", next_index}, {"t", epoch.next().value}}.dump();

        ProposeTrace trace;
        std::optional<Proc::OpToken> token;
        if (m.proc().tracing()) {
            token = m.proc().begin_op(current.name, "propose", proposal, epoch.value);
        }
        const auto decision = co_await current.propose(m, proposal, limits.consensus, &trace);
        if (!decision) {
            if (token) {
                m.proc().abandon_op(*token);
            }
            co_return std::nullopt;
        }
        if (token) {
            m.proc().end_op(*token, json{{"value", *decision},
                                         {"role", trace.modifier ? "modifier" : "observer"},
                                         {"lp", trace.lin_point}});
        }
        const auto payload = fold(*decision);
        if (payload.at("p").template get<std::int64_t>() == me &&
            payload.at("t").template get<std::uint64_t>() == epoch.next().value) {
            const Bytes frontier =
                json{{"l", local->index}, {"t", local->epoch.value}, {"s", type.encode_state(local->state)}}.dump();
            co_await collect_store(m, name + ":F", frontier);
            co_return response;
        }
        ++attempt;
    }
    co_return std::nullopt;
}

}  // namespace ofuc
