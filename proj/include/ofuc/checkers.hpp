#pragma once

// History checkers: linearizability against a sequential model, the racing
// Ordering property, round decompositions of recycled objects, and the epoch
// precondition (P1) under which recycling is sound.

#include <ofuc/history.hpp>
#include <ofuc/serial_types.hpp>

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

namespace ofuc {

// Sequential specification over encoded states. `next` appends every state the
// object may move to when `op` takes effect in `state` and returns op.res; for
// a pending op (no response) any response is allowed.
class Model {
public:
    virtual ~Model() = default;
    virtual std::string initial() const = 0;
    virtual void next(const std::string& state, const Operation& op, std::vector<std::string>& out) const = 0;
};

// Register with string contents. write args = value (or {"v": value}); read
// res = value.
class RegisterModel final : public Model {
public:
    explicit RegisterModel(std::string init) : init_{std::move(init)} {}

    std::string initial() const override { return init_; }

    void next(const std::string& state, const Operation& op, std::vector<std::string>& out) const override
    {
        if (op.op == "write") {
            out.push_back((op.args.is_object() ? op.args.at("v") : op.args).get<std::string>());
        } else if (op.op == "read") {
            if (!op.res || op.res->get<std::string>() == state) {
                out.push_back(state);
            }
        }
    }

private:
    std::string init_;
};

// Initial value of a register as declared by its readers ({"init": ...} args).
inline std::string register_init(const std::vector<Operation>& ops)
{
    for (const auto& op : ops) {
        if (op.args.is_object() && op.args.contains("init") && op.op == "read") {
            return op.args.at("init").get<std::string>();
        }
    }
    return {};
}

template <SerialType T>
class SerialModel final : public Model {
public:
    explicit SerialModel(T type = {}) : type_{std::move(type)} {}

    std::string initial() const override { return type_.encode_state(type_.initial()); }

    void next(const std::string& state, const Operation& op, std::vector<std::string>& out) const override
    {
        auto [s, r] = type_.apply(type_.decode_state(state), type_.parse_op(op.op, op.args));
        if (!op.res || type_.response_json(r) == *op.res) {
            out.push_back(type_.encode_state(s));
        }
    }

private:
    T type_;
};

// Value carried by a propose response (plain, or {"value": ...} when traced).
inline std::string consensus_value(const json& j)
{
    const json& v = j.is_object() && j.contains("value") ? j.at("value") : j;
    return v.is_string() ? v.get<std::string>() : v.dump();
}

// One-shot consensus: the first propose fixes the decision.
class ConsensusModel final : public Model {
public:
    std::string initial() const override { return {}; }

    void next(const std::string& state, const Operation& op, std::vector<std::string>& out) const override
    {
        const auto proposal = consensus_value(op.args);
        const auto decision = state.empty() ? proposal : state;
        if (!op.res || consensus_value(*op.res) == decision) {
            out.push_back(decision);
        }
    }
};

// ---------------------------------------------------------------------------

enum class Verdict { accept, reject, unknown };

inline const char* to_string(Verdict v)
{
    switch (v) {
    case Verdict::accept:
        return "accept";
    case Verdict::reject:
        return "reject";
    default:
        return "unknown";
    }
}

struct LinResult {
    Verdict verdict = Verdict::reject;
    // Sequential witness (indices into the operation list) on accept; the
    // longest linearizable prefix found otherwise.
    std::vector<std::size_t> witness;
    std::size_t explored = 0;

    bool ok() const { return verdict == Verdict::accept; }
};

namespace detail {

class LinSearch {
public:
    LinSearch(const std::vector<Operation>& ops, const Model& model, std::size_t budget)
        : ops_{ops}, model_{model}, budget_{budget}, done_(ops.size(), false)
    {
        for (const auto& op : ops_) {
            required_ += op.complete() ? 1 : 0;
        }
    }

    LinResult run()
    {
        LinResult result;
        const bool found = dfs(model_.initial(), 0);
        result.explored = explored_;
        if (found) {
            result.verdict = Verdict::accept;
            result.witness = order_;
        } else {
            result.verdict = exhausted_ ? Verdict::unknown : Verdict::reject;
            result.witness = best_;
        }
        return result;
    }

private:
    bool dfs(const std::string& state, std::size_t completed)
    {
        if (completed == required_) {
            return true;
        }
        if (++explored_ > budget_) {
            exhausted_ = true;
            return false;
        }
        std::string key(done_.begin(), done_.end());
        key += '\x1f';
        key += state;
        if (!seen_.insert(std::move(key)).second) {
            return false;
        }

        std::uint64_t min_response = std::numeric_limits<std::uint64_t>::max();
        for (std::size_t i = 0; i < ops_.size(); ++i) {
            if (!done_[i] && ops_[i].response_seq) {
                min_response = std::min(min_response, *ops_[i].response_seq);
            }
        }
        std::vector<std::string> successors;
        for (std::size_t i = 0; i < ops_.size(); ++i) {
            if (done_[i] || ops_[i].invoke_seq > min_response) {
                continue;
            }
            successors.clear();
            model_.next(state, ops_[i], successors);
            for (const auto& s : successors) {
                done_[i] = true;
                order_.push_back(i);
                if (order_.size() > best_.size()) {
                    best_ = order_;
                }
                if (dfs(s, completed + (ops_[i].complete() ? 1 : 0))) {
                    return true;
                }
                order_.pop_back();
                done_[i] = false;
                if (exhausted_) {
                    return false;
                }
            }
        }
        return false;
    }

    const std::vector<Operation>& ops_;
    const Model& model_;
    std::size_t budget_;
    std::vector<char> done_;
    std::vector<std::size_t> order_;
    std::vector<std::size_t> best_;
    std::unordered_set<std::string> seen_;
    std::size_t required_ = 0;
    std::size_t explored_ = 0;
    bool exhausted_ = false;
};

}  // namespace detail

// Pending operations may either take effect (with any response) or be dropped.
inline LinResult check_linearizable(const std::vector<Operation>& ops, const Model& model,
                                    std::size_t budget = 2'000'000)
{
    return detail::LinSearch{ops, model, budget}.run();
}

inline LinResult check_linearizable(const History& h, const Model& model, const std::string& obj = {})
{
    return check_linearizable(operations(h, obj), model);
}

// ---------------------------------------------------------------------------
// Round decompositions.

struct RoundsResult {
    Verdict verdict = Verdict::reject;
    // Operation indices per round, in history order.
    std::vector<std::vector<std::size_t>> rounds;
    // For a rejection: the shortest prefix of events with no valid decomposition.
    std::vector<std::size_t> counterexample;

    bool ok() const { return verdict == Verdict::accept; }
};

namespace detail {

struct EventRef {
    std::uint64_t seq;
    std::size_t op;
    bool invoke;
};

inline std::vector<EventRef> event_order(const std::vector<Operation>& ops)
{
    std::vector<EventRef> ev;
    for (std::size_t i = 0; i < ops.size(); ++i) {
        ev.push_back({ops[i].invoke_seq, i, true});
        if (ops[i].response_seq) {
            ev.push_back({*ops[i].response_seq, i, false});
        }
    }
    std::sort(ev.begin(), ev.end(), [](const EventRef& a, const EventRef& b) { return a.seq < b.seq; });
    return ev;
}

// cut[i]: no complete operation is open between events i-1 and i.
inline std::vector<bool> valid_cuts(const std::vector<Operation>& ops, const std::vector<EventRef>& ev)
{
    std::vector<bool> cut(ev.size() + 1, false);
    std::size_t open = 0;
    cut[0] = true;
    for (std::size_t i = 0; i < ev.size(); ++i) {
        const auto& op = ops[ev[i].op];
        if (op.complete()) {
            open += ev[i].invoke ? 1 : 0;
            open -= ev[i].invoke ? 0 : 1;
        }
        cut[i + 1] = open == 0;
    }
    return cut;
}

inline bool segment_ok(const std::vector<Operation>& ops, const std::vector<EventRef>& ev, std::size_t from,
                       std::size_t to, const Model& model, std::vector<std::size_t>& members)
{
    members.clear();
    std::vector<Operation> seg;
    for (std::size_t i = from; i < to; ++i) {
        if (ev[i].invoke) {
            members.push_back(ev[i].op);
            seg.push_back(ops[ev[i].op]);
        }
    }
    return check_linearizable(seg, model).ok();
}

}  // namespace detail

// Accepts iff the history splits into consecutive rounds, every operation
// complete in the history being complete inside its round, and each round is
// a correct (linearizable) history of a fresh object of the model's type.
//
// Rounds are first guessed from epoch annotations (modifiers grouped by epoch,
// observers attached to the modifier whose decision they returned); when that
// guess fails every decomposition is searched.
inline RoundsResult check_rounds(const std::vector<Operation>& ops, const Model& model)
{
    RoundsResult result;
    const auto ev = detail::event_order(ops);
    const auto cut = detail::valid_cuts(ops, ev);
    std::vector<std::size_t> members;

    // Guess from epochs.
    {
        std::map<std::string, std::uint64_t> epoch_of_value;
        bool annotated = !ops.empty();
        for (const auto& op : ops) {
            if (!op.epoch || !op.res || !op.res->is_object() || !op.res->contains("role")) {
                annotated = false;
                break;
            }
            if (op.res->at("role") == "modifier") {
                epoch_of_value[consensus_value(*op.res)] = *op.epoch;
            }
        }
        if (annotated) {
            std::vector<std::uint64_t> round_of(ops.size());
            for (std::size_t i = 0; i < ops.size() && annotated; ++i) {
                auto it = epoch_of_value.find(consensus_value(*ops[i].res));
                annotated = it != epoch_of_value.end();
                if (annotated) {
                    round_of[i] = it->second;
                }
            }
            std::vector<std::size_t> bounds{0};
            for (std::size_t i = 1; annotated && i < ev.size(); ++i) {
                const auto prev = round_of[ev[i - 1].op];
                const auto cur = round_of[ev[i].op];
                if (cur < prev) {
                    annotated = false;
                } else if (cur > prev) {
                    annotated = cut[i];
                    bounds.push_back(i);
                }
            }
            if (annotated) {
                bounds.push_back(ev.size());
                std::vector<std::vector<std::size_t>> rounds;
                for (std::size_t r = 0; annotated && r + 1 < bounds.size(); ++r) {
                    annotated = detail::segment_ok(ops, ev, bounds[r], bounds[r + 1], model, members);
                    rounds.push_back(members);
                }
                if (annotated) {
                    result.verdict = Verdict::accept;
                    result.rounds = std::move(rounds);
                    return result;
                }
            }
        }
    }

    // Exhaustive search over cut positions.
    const std::size_t n = ev.size();
    std::vector<std::optional<std::size_t>> from(n + 1);
    std::vector<bool> reach(n + 1, false);
    reach[0] = true;
    for (std::size_t j = 1; j <= n; ++j) {
        if (!cut[j]) {
            continue;
        }
        for (std::size_t i = j; i-- > 0;) {
            if (!reach[i] || !cut[i]) {
                continue;
            }
            if (detail::segment_ok(ops, ev, i, j, model, members)) {
                reach[j] = true;
                from[j] = i;
                break;
            }
        }
    }
    // Pending operations may trail after the last cut.
    if (reach[n]) {
        result.verdict = Verdict::accept;
        std::vector<std::vector<std::size_t>> rounds;
        for (std::size_t j = n; j > 0; j = *from[j]) {
            detail::segment_ok(ops, ev, *from[j], j, model, members);
            rounds.push_back(members);
        }
        std::reverse(rounds.begin(), rounds.end());
        result.rounds = std::move(rounds);
        return result;
    }
    result.verdict = Verdict::reject;
    for (std::size_t j = 1; j <= n; ++j) {
        result.counterexample.push_back(ev[j - 1].op);
        if (cut[j] && !reach[j]) {
            break;
        }
    }
    return result;
}

// Sequential view of a recycled object's history: modifiers ordered by
// their decision write, observers by their decision read (the "lp" clock
// recorded in traced responses). Within one epoch, a call whose input is the
// decided value goes first, completed if it is pending; other pending
// operations are dropped.
inline std::vector<Operation> sequential_view(const std::vector<Operation>& ops)
{
    std::vector<Operation> seq;
    for (const auto& op : ops) {
        if (op.complete()) {
            seq.push_back(op);
        }
    }
    std::stable_sort(seq.begin(), seq.end(), [](const Operation& a, const Operation& b) {
        return a.res->at("lp").get<std::uint64_t>() < b.res->at("lp").get<std::uint64_t>();
    });
    for (std::size_t begin = 0; begin < seq.size();) {
        std::size_t end = begin + 1;
        while (end < seq.size() && seq[end].epoch == seq[begin].epoch) {
            ++end;
        }
        const auto decided = consensus_value(*seq[begin].res);
        bool found = false;
        for (std::size_t i = begin; i < end && !found; ++i) {
            if (consensus_value(seq[i].args) == decided) {
                std::rotate(seq.begin() + static_cast<std::ptrdiff_t>(begin), seq.begin() + static_cast<std::ptrdiff_t>(i),
                            seq.begin() + static_cast<std::ptrdiff_t>(i + 1));
                found = true;
            }
        }
        // The proposer may still be pending; it took effect all the same.
        for (std::size_t i = 0; i < ops.size() && !found; ++i) {
            const auto& op = ops[i];
            if (!op.complete() && op.epoch == seq[begin].epoch && consensus_value(op.args) == decided) {
                Operation taken = op;
                taken.res = json{{"value", decided}, {"role", "modifier"}, {"lp", seq[begin].res->at("lp")}};
                seq.insert(seq.begin() + static_cast<std::ptrdiff_t>(begin), std::move(taken));
                ++end;
                found = true;
            }
        }
        begin = end;
    }
    for (std::size_t i = 0; i < seq.size(); ++i) {
        seq[i].invoke_seq = 2 * i;
        seq[i].response_seq = 2 * i + 1;
    }
    return seq;
}

// ---------------------------------------------------------------------------
// Racing Ordering property, with ≪ the numeric order of lap indices.
//
// A process leaves its current lap when it invokes its next enter (the call
// publishes that lap first) and enters the returned lap when the call
// responds; every process starts in sentinel lap 0. Each entry must either
// follow some process leaving the lap, or come from the greatest entered lap
// below it.

struct RacingOrderResult {
    bool ok = true;
    std::string violation;
};

inline RacingOrderResult check_racing_order(const std::vector<Operation>& ops)
{
    std::map<std::uint32_t, std::vector<const Operation*>> by_proc;
    for (const auto& op : ops) {
        by_proc[op.proc.value].push_back(&op);
    }
    struct Entry {
        const Operation* op;
        std::uint64_t from;
        std::uint64_t lap;
    };
    std::vector<Entry> entries;
    // lap -> earliest leave (invocation seq of the leaving call)
    std::map<std::uint64_t, std::uint64_t> first_leave;
    std::set<std::uint64_t> entered{0};
    for (auto& [proc, list] : by_proc) {
        std::sort(list.begin(), list.end(), [](const Operation* a, const Operation* b) { return a->invoke_seq < b->invoke_seq; });
        std::uint64_t current = 0;
        for (const auto* op : list) {
            auto [it, inserted] = first_leave.try_emplace(current, op->invoke_seq);
            if (!inserted) {
                it->second = std::min(it->second, op->invoke_seq);
            }
            if (!op->complete()) {
                break;
            }
            const auto lap = op->res->get<std::uint64_t>();
            entries.push_back({op, current, lap});
            entered.insert(lap);
            current = lap;
        }
    }
    RacingOrderResult r;
    for (const auto& e : entries) {
        auto leave = first_leave.find(e.lap);
        if (leave != first_leave.end() && leave->second < *e.op->response_seq) {
            continue;
        }
        auto below = entered.lower_bound(e.lap);
        if (e.lap > 0 && below != entered.begin() && *std::prev(below) == e.from) {
            continue;
        }
        r.ok = false;
        r.violation = e.op->proc.str() + " entered lap " + std::to_string(e.lap) + " from lap " +
                      std::to_string(e.from) + " at seq " + std::to_string(*e.op->response_seq);
        return r;
    }
    return r;
}

// ---------------------------------------------------------------------------
// P1: for operations op on epoch t and op' on epoch t' < t, if op' does not
// precede op then some epoch-t' operation that wrote the decision register
// precedes op'.

struct P1Result {
    bool ok = true;
    // Offending pair (op, op') on violation.
    std::optional<std::pair<std::size_t, std::size_t>> violation;
};

inline bool is_modifier(const Operation& op)
{
    return op.res && op.res->is_object() && op.res->value("role", "") == "modifier";
}

inline P1Result check_p1(const std::vector<Operation>& ops)
{
    P1Result result;
    for (std::size_t a = 0; a < ops.size(); ++a) {
        for (std::size_t b = 0; b < ops.size(); ++b) {
            const auto& op = ops[a];
            const auto& late = ops[b];
            if (!op.epoch || !late.epoch || !(*late.epoch < *op.epoch) || late.precedes(op)) {
                continue;
            }
            const bool covered = std::any_of(ops.begin(), ops.end(), [&](const Operation& w) {
                return w.epoch == late.epoch && is_modifier(w) && w.precedes(late);
            });
            if (!covered) {
                result.ok = false;
                result.violation = std::make_pair(a, b);
                return result;
            }
        }
    }
    return result;
}

}  // namespace ofuc
