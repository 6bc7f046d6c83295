#pragma once

// Brute-force reference checkers for small histories (a handful of
// operations). They enumerate instead of search, and carry their own
// sequential specifications, so they share no logic with ofuc/checkers.hpp.

#include <ofuc/history.hpp>

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace oracle {

using ofuc::json;
using ofuc::Operation;

enum class Kind { reg, counter, consensus };

// Sequential semantics: applies `op` to `state`, returns the response.
// Register and consensus states are strings ("" = undecided), counter an int
// in decimal.
inline json apply(Kind kind, std::string& state, const Operation& op)
{
    switch (kind) {
    case Kind::reg:
        if (op.op == "write") {
            state = op.args.get<std::string>();
            return nullptr;
        }
        return state;
    case Kind::counter:
        if (op.op == "inc") {
            state = std::to_string(std::stoll(state) + 1);
            return nullptr;
        }
        return std::stoll(state);
    case Kind::consensus:
        if (state.empty()) {
            state = op.args.get<std::string>();
        }
        return state;
    }
    return nullptr;
}

inline std::string initial(Kind kind, const std::string& reg_init = "0")
{
    switch (kind) {
    case Kind::reg:
        return reg_init;
    case Kind::counter:
        return "0";
    default:
        return "";
    }
}

// Some permutation of the complete operations plus a subset of the pending
// ones respects real-time order and replays legally.
inline bool linearizable(Kind kind, const std::vector<Operation>& ops, const std::string& reg_init = "0")
{
    std::vector<std::size_t> pending;
    std::vector<std::size_t> complete;
    for (std::size_t i = 0; i < ops.size(); ++i) {
        (ops[i].complete() ? complete : pending).push_back(i);
    }
    for (std::uint32_t mask = 0; mask < (1u << pending.size()); ++mask) {
        std::vector<std::size_t> order = complete;
        for (std::size_t j = 0; j < pending.size(); ++j) {
            if (mask & (1u << j)) {
                order.push_back(pending[j]);
            }
        }
        std::sort(order.begin(), order.end());
        do {
            bool ok = true;
            for (std::size_t a = 0; a < order.size() && ok; ++a) {
                for (std::size_t b = a + 1; b < order.size() && ok; ++b) {
                    ok = !ops[order[b]].precedes(ops[order[a]]);
                }
            }
            std::string state = initial(kind, reg_init);
            for (std::size_t a = 0; a < order.size() && ok; ++a) {
                const auto& op = ops[order[a]];
                const json r = apply(kind, state, op);
                // Traced propose responses carry the value in a field.
                const bool traced = op.res && op.res->is_object() && op.res->contains("value");
                ok = !op.res || (traced ? op.res->at("value") : *op.res) == r;
            }
            if (ok) {
                return true;
            }
        } while (std::next_permutation(order.begin(), order.end()));
    }
    return false;
}

// Some split of the event sequence into consecutive segments keeps every
// complete operation inside one segment and makes each segment linearizable
// from the initial state.
inline bool decomposable(Kind kind, const std::vector<Operation>& ops)
{
    struct Ev {
        std::uint64_t seq;
        std::size_t op;
    };
    std::vector<Ev> ev;
    for (std::size_t i = 0; i < ops.size(); ++i) {
        ev.push_back({ops[i].invoke_seq, i});
        if (ops[i].response_seq) {
            ev.push_back({*ops[i].response_seq, i});
        }
    }
    std::sort(ev.begin(), ev.end(), [](const Ev& a, const Ev& b) { return a.seq < b.seq; });
    if (ev.empty()) {
        return true;
    }
    const std::size_t gaps = ev.size() - 1;
    for (std::uint32_t mask = 0; mask < (1u << gaps); ++mask) {
        std::vector<std::size_t> segment_of_event(ev.size(), 0);
        for (std::size_t i = 1; i < ev.size(); ++i) {
            segment_of_event[i] = segment_of_event[i - 1] + ((mask >> (i - 1)) & 1u);
        }
        std::vector<std::optional<std::size_t>> first(ops.size());
        bool ok = true;
        for (std::size_t i = 0; i < ev.size() && ok; ++i) {
            auto& f = first[ev[i].op];
            if (!f) {
                f = segment_of_event[i];
            } else {
                ok = *f == segment_of_event[i];
            }
        }
        for (std::size_t s = 0; ok && s <= segment_of_event.back(); ++s) {
            std::vector<Operation> seg;
            for (std::size_t i = 0; i < ops.size(); ++i) {
                if (*first[i] == s) {
                    seg.push_back(ops[i]);
                }
            }
            ok = linearizable(kind, seg);
        }
        if (ok) {
            return true;
        }
    }
    return false;
}

}  // namespace oracle
