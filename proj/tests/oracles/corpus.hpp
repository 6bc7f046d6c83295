#pragma once

// Random corpus of small histories (at most six calls by up to three
// processes) for cross-validating the checkers against the oracles.

#include "oracles.hpp"

#include <ofuc/checkers.hpp>

#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace oracle {

using namespace ofuc;

inline constexpr std::size_t kMaxOps = 6;

struct Sample {
    Kind kind;
    std::vector<Operation> ops;
};

inline json random_response(Kind kind, const Operation& op, const std::vector<Operation>& all, std::mt19937_64& rng)
{
    switch (kind) {
    case Kind::reg: {
        if (op.op == "write") {
            return nullptr;
        }
        std::vector<std::string> values{"0"};
        for (const auto& o : all) {
            if (o.op == "write") {
                values.push_back(o.args.get<std::string>());
            }
        }
        return values[rng() % values.size()];
    }
    case Kind::counter: {
        if (op.op == "inc") {
            return nullptr;
        }
        const auto incs = std::count_if(all.begin(), all.end(), [](const Operation& o) { return o.op == "inc"; });
        return static_cast<std::int64_t>(rng() % (incs + 1));
    }
    default:
        return all[rng() % all.size()].args;
    }
}

inline Operation random_call(Kind kind, std::mt19937_64& rng)
{
    Operation op;
    op.obj = "o";
    switch (kind) {
    case Kind::reg:
        op.op = rng() % 2 ? "write" : "read";
        op.args = op.op == "write" ? json(std::to_string(1 + rng() % 2)) : json::array();
        break;
    case Kind::counter:
        op.op = rng() % 2 ? "inc" : "read";
        op.args = json::array();
        break;
    default:
        op.op = "propose";
        op.args = std::string(1, static_cast<char>('a' + rng() % 3));
    }
    return op;
}

// Random calls by up to three processes, randomly interleaved; a call still
// open at the end stays pending with probability 1/3.
inline Sample random_sample(std::mt19937_64& rng)
{
    Sample s;
    s.kind = static_cast<Kind>(rng() % 3);
    const std::size_t n = 1 + rng() % kMaxOps;
    const std::uint32_t procs = 1 + static_cast<std::uint32_t>(rng() % 3);
    for (std::size_t i = 0; i < n; ++i) {
        auto op = random_call(s.kind, rng);
        op.proc = ProcessId{static_cast<std::uint32_t>(rng() % procs)};
        s.ops.push_back(std::move(op));
    }
    std::map<std::uint32_t, std::vector<std::size_t>> queue;
    for (std::size_t i = 0; i < n; ++i) {
        queue[s.ops[i].proc.value].push_back(i);
    }
    std::map<std::uint32_t, std::size_t> next;
    std::map<std::uint32_t, std::optional<std::size_t>> open;
    std::uint64_t seq = 0;
    for (;;) {
        std::vector<std::uint32_t> movable;
        for (const auto& [p, q] : queue) {
            if (open[p] || next[p] < q.size()) {
                movable.push_back(p);
            }
        }
        if (movable.empty()) {
            break;
        }
        const auto p = movable[rng() % movable.size()];
        if (open[p]) {
            const bool last = next[p] == queue[p].size();
            if (last && rng() % 3 == 0) {
                open[p].reset();
                continue;
            }
            s.ops[*open[p]].response_seq = seq++;
            open[p].reset();
        } else {
            const auto i = queue[p][next[p]++];
            s.ops[i].invoke_seq = seq++;
            open[p] = i;
        }
    }
    for (auto& op : s.ops) {
        if (op.complete()) {
            op.res = random_response(s.kind, op, s.ops, rng);
        }
    }
    return s;
}

// Epochs and roles as a recycled object records them, at random.
inline void annotate(Sample& s, std::mt19937_64& rng)
{
    for (auto& op : s.ops) {
        op.epoch = rng() % 3;
        if (op.res) {
            op.res = json{{"value", *op.res}, {"role", rng() % 2 ? "modifier" : "observer"}, {"lp", 0}};
        }
    }
}

inline std::unique_ptr<Model> model_for(Kind kind)
{
    switch (kind) {
    case Kind::reg:
        return std::make_unique<RegisterModel>("0");
    case Kind::counter:
        return std::make_unique<SerialModel<CounterType>>();
    default:
        return std::make_unique<ConsensusModel>();
    }
}

inline std::string dump(const Sample& s)
{
    std::string out;
    for (const auto& op : s.ops) {
        out += op.proc.str() + " " + op.op + " " + op.args.dump() + " [" + std::to_string(op.invoke_seq) + "," +
               (op.response_seq ? std::to_string(*op.response_seq) : "-") + "] -> " + (op.res ? op.res->dump() : "?") +
               "\n";
    }
    return out;
}


struct Disagreements {
    std::size_t linearizability = 0;
    std::size_t rounds = 0;
    std::size_t unknown = 0;
    std::size_t accepted = 0;
};

// Checkers vs oracles on `count` random histories; half of the consensus
// histories carry epoch annotations for the rounds check.
inline Disagreements cross_validate(std::size_t count, std::uint64_t seed)
{
    std::mt19937_64 rng{seed};
    Disagreements d;
    for (std::size_t i = 0; i < count; ++i) {
        auto s = random_sample(rng);
        const auto model = model_for(s.kind);
        const auto lin = check_linearizable(s.ops, *model);
        const bool lin_ref = linearizable(s.kind, s.ops);
        d.unknown += lin.verdict == Verdict::unknown ? 1 : 0;
        d.linearizability += lin.ok() != lin_ref ? 1 : 0;
        d.accepted += lin_ref ? 1 : 0;
        if (s.kind == Kind::consensus && rng() % 2 == 0) {
            annotate(s, rng);
        }
        const auto rounds = check_rounds(s.ops, *model);
        d.unknown += rounds.verdict == Verdict::unknown ? 1 : 0;
        d.rounds += rounds.ok() != decomposable(s.kind, s.ops) ? 1 : 0;
    }
    return d;
}

}  // namespace oracle
