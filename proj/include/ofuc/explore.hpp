#pragma once

// Deterministic schedule exploration over the register substrate.
//
// A schedule is the sequence of processes chosen to take the next atomic
// register access. Runs are replayed from scratch (coroutine frames cannot be
// copied), so every history is reproducible from its schedule.

#include <ofuc/registers.hpp>

#include <algorithm>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

namespace ofuc {

using Schedule = std::vector<ProcessId>;

class World;

struct Program {
    std::uint32_t procs = 1;
    // Body run by every process; it can branch on proc.id().
    Proc::Body body;
    // Record inner recycled-object calls as well.
    bool trace_inner = false;
    // Optional probes; created fresh for every run.
    std::function<std::unique_ptr<Hooks>(World&)> make_hooks;
};

// Footprint of one executed step, for the independence relation.
struct StepInfo {
    RegisterId key;
    bool write = false;
    // Emitted history events or fired a hook: ordered against everything.
    bool global = false;
};

inline bool independent(const StepInfo& a, const StepInfo& b)
{
    if (a.global || b.global) {
        return false;
    }
    return a.key != b.key || (!a.write && !b.write);
}

class World {
public:
    explicit World(const Program& program)
    {
        recorder_.trace_inner = program.trace_inner;
        if (program.make_hooks) {
            user_hooks_ = program.make_hooks(*this);
        }
        counting_.inner = user_hooks_.get();
        for (std::uint32_t i = 0; i < program.procs; ++i) {
            procs_.push_back(std::make_unique<Proc>(ProcessId{i}, &recorder_, &counting_));
        }
        for (auto& p : procs_) {
            p->start(program.body);
        }
    }

    World(const World&) = delete;
    World& operator=(const World&) = delete;

    std::vector<ProcessId> enabled() const
    {
        std::vector<ProcessId> out;
        for (const auto& p : procs_) {
            if (p->has_pending()) {
                out.push_back(p->id());
            }
        }
        return out;
    }

    bool quiescent() const { return enabled().empty(); }

    StepInfo step(ProcessId id)
    {
        Proc& p = *procs_.at(id.value);
        const Access& a = p.pending();
        StepInfo info{a.key, a.is_write(), false};
        const auto emitted = p.emitted();
        const auto hooks = counting_.calls;
        Bytes result = memory_.serve(a);
        p.complete(std::move(result), ++clock_);
        info.global = p.emitted() != emitted || counting_.calls != hooks;
        schedule_.push_back(id);
        return info;
    }

    // Runs every unfinished process alone, in id order.
    void complete_solo()
    {
        for (auto& p : procs_) {
            while (p->has_pending()) {
                step(p->id());
            }
        }
    }

    const AtomicMemory& memory() const { return memory_; }
    const History& history() const { return recorder_.events; }
    const Schedule& schedule() const { return schedule_; }
    Proc& proc(ProcessId id) { return *procs_.at(id.value); }
    std::size_t procs() const { return procs_.size(); }
    Hooks* hooks() const { return user_hooks_.get(); }
    std::uint64_t clock() const { return clock_; }

private:
    struct CountingHooks final : Hooks {
        Hooks* inner = nullptr;
        std::uint64_t calls = 0;

        void lap_entered(Proc& p, const std::string& racing, const std::string& lap, std::uint64_t index) override
        {
            ++calls;
            if (inner) {
                inner->lap_entered(p, racing, lap, index);
            }
        }
    };

    AtomicMemory memory_;
    Recorder recorder_;
    std::unique_ptr<Hooks> user_hooks_;
    CountingHooks counting_;
    std::vector<std::unique_ptr<Proc>> procs_;
    Schedule schedule_;
    std::uint64_t clock_ = 0;
};

inline std::unique_ptr<World> replay(const Program& program, const Schedule& schedule)
{
    auto w = std::make_unique<World>(program);
    for (auto id : schedule) {
        if (!w->proc(id).has_pending()) {
            throw std::invalid_argument("replay: " + id.str() + " has no pending step");
        }
        w->step(id);
    }
    return w;
}

struct ExploreBounds {
    // Interleaved steps per run; past it, processes finish solo in id order.
    std::size_t max_steps = 24;
    // Sleep-set pruning of schedules equivalent up to commuting independent steps.
    bool reduce = true;
    // Stop after this many complete runs (0: no limit).
    std::uint64_t max_runs = 0;
    // If set, only schedules switching away from a still-enabled process at
    // most this many times.
    std::optional<std::size_t> max_preemptions;
};

struct ExploreStats {
    std::uint64_t runs = 0;
    std::uint64_t truncated = 0;
    // Branches cut because every enabled step was asleep.
    std::uint64_t pruned = 0;
    std::uint64_t distinct_histories = 0;
    bool incomplete = false;
};

struct RunView {
    World& world;
    bool truncated = false;
    // First run producing this history.
    bool fresh = false;
};

using RunVisitor = std::function<void(const RunView&)>;

namespace detail {

class Explorer {
public:
    Explorer(const Program& program, ExploreBounds bounds, RunVisitor visit)
        : program_{program}, bounds_{bounds}, visit_{std::move(visit)}
    {
    }

    ExploreStats run()
    {
        auto root = std::make_unique<World>(program_);
        dfs(std::move(root), {}, {}, 0);
        stats_.distinct_histories = seen_.size();
        return stats_;
    }

private:
    using Sleep = std::vector<std::pair<ProcessId, StepInfo>>;

    bool stop() const { return bounds_.max_runs != 0 && stats_.runs >= bounds_.max_runs; }

    void finish(World& w, bool truncated)
    {
        ++stats_.runs;
        stats_.truncated += truncated ? 1 : 0;
        const bool fresh = seen_.insert(fingerprint(w.history())).second;
        visit_(RunView{w, truncated, fresh});
    }

    void dfs(std::unique_ptr<World> w, Schedule prefix, Sleep sleep, std::size_t preemptions)
    {
        if (stop()) {
            stats_.incomplete = true;
            return;
        }
        const auto enabled = w->enabled();
        if (enabled.empty()) {
            finish(*w, false);
            return;
        }
        if (prefix.size() >= bounds_.max_steps) {
            w->complete_solo();
            finish(*w, true);
            return;
        }
        std::vector<ProcessId> todo;
        const bool last_enabled =
            !prefix.empty() && std::find(enabled.begin(), enabled.end(), prefix.back()) != enabled.end();
        for (auto id : enabled) {
            if (bounds_.max_preemptions && last_enabled && id != prefix.back() &&
                preemptions >= *bounds_.max_preemptions) {
                continue;
            }
            const bool asleep =
                std::any_of(sleep.begin(), sleep.end(), [id](const auto& s) { return s.first == id; });
            if (!asleep) {
                todo.push_back(id);
            }
        }
        if (todo.empty()) {
            ++stats_.pruned;
            return;
        }
        Sleep explored;
        for (std::size_t i = 0; i < todo.size(); ++i) {
            const auto id = todo[i];
            auto child = i == 0 ? std::move(w) : replay(program_, prefix);
            const auto info = child->step(id);
            Sleep next;
            if (bounds_.reduce) {
                for (const auto* set : {&sleep, &explored}) {
                    for (const auto& s : *set) {
                        if (independent(s.second, info)) {
                            next.push_back(s);
                        }
                    }
                }
            }
            const bool preempt = last_enabled && id != prefix.back();
            auto child_prefix = prefix;
            child_prefix.push_back(id);
            dfs(std::move(child), std::move(child_prefix), std::move(next), preemptions + (preempt ? 1 : 0));
            explored.emplace_back(id, info);
            if (stop()) {
                stats_.incomplete = true;
                return;
            }
        }
    }

    const Program& program_;
    ExploreBounds bounds_;
    RunVisitor visit_;
    ExploreStats stats_;
    std::unordered_set<std::string> seen_;
};

}  // namespace detail

// Visits every run reachable within the bounds (up to sleep-set equivalence
// when reduce is set).
inline ExploreStats explore(const Program& program, ExploreBounds bounds, const RunVisitor& visit)
{
    return detail::Explorer{program, bounds, visit}.run();
}

// One run with uniformly random scheduling choices.
inline std::unique_ptr<World> run_random(const Program& program, std::uint64_t seed, std::size_t max_steps = 100000)
{
    auto w = std::make_unique<World>(program);
    std::mt19937_64 rng{seed};
    for (std::size_t n = 0; n < max_steps; ++n) {
        const auto enabled = w->enabled();
        if (enabled.empty()) {
            return w;
        }
        std::uniform_int_distribution<std::size_t> pick{0, enabled.size() - 1};
        w->step(enabled[pick(rng)]);
    }
    w->complete_solo();
    return w;
}

}  // namespace ofuc

namespace ofuc {

// Runs `call` as one recorded operation: invocation on its first access,
// response (converted by `res`) right after its last.
template <typename T, typename ToJson>
Task<T> recorded(Proc& p, std::string obj, std::string op, json args, Task<T> call, ToJson res)
{
    const auto token = p.begin_op(std::move(obj), std::move(op), std::move(args));
    T out = co_await std::move(call);
    p.end_op(token, res(out));
    co_return out;
}

}  // namespace ofuc
