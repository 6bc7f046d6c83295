#pragma once

// Property suites over explored and random schedules. Each suite returns a
// report; `ofuc check <suite>` and the acceptance binary print them.

#include <ofuc/checkers.hpp>
#include <ofuc/explore.hpp>
#include <ofuc/scenario.hpp>
#include <ofuc/workload.hpp>

#include <chrono>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

namespace ofuc {

struct SuiteReport {
    std::string name;
    std::vector<std::string> failures;
    std::uint64_t runs = 0;
    std::uint64_t histories = 0;
    std::uint64_t truncated = 0;
    double seconds = 0;
    std::map<std::string, double> metrics;

    bool ok() const { return failures.empty(); }

    void fail(std::string what)
    {
        // Keep reports readable when a property breaks on many runs.
        if (failures.size() < 20) {
            failures.push_back(std::move(what));
        } else if (failures.size() == 20) {
            failures.push_back("...");
        }
    }

    void absorb(const ExploreStats& s)
    {
        runs += s.runs;
        histories += s.distinct_histories;
        truncated += s.truncated;
    }
};

inline std::ostream& operator<<(std::ostream& out, const SuiteReport& r)
{
    out << r.name << ": " << (r.ok() ? "PASS" : "FAIL") << " runs=" << r.runs << " histories=" << r.histories
        << " truncated=" << r.truncated << " time=" << r.seconds << "s";
    for (const auto& [k, v] : r.metrics) {
        out << ' ' << k << '=' << v;
    }
    for (const auto& f : r.failures) {
        out << "\n  " << f;
    }
    return out;
}

struct SuiteOptions {
    std::uint32_t procs = 0;  // 0: suite default
    std::size_t steps = 0;    // 0: suite default
    std::uint32_t laps = 3;
    // Full-depth schedules with at most this many preemptions (suite default if unset).
    std::optional<std::size_t> preemptions;
    std::uint32_t ops = 0;    // 0: suite default
    std::uint64_t seeds = 0;  // 0: suite default
};

namespace detail {

class Stopwatch {
public:
    double seconds() const
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline std::string describe(const Schedule& s)
{
    std::string out;
    for (auto p : s) {
        out += std::to_string(p.value);
    }
    return out;
}

// Every run must end with all processes finished.
inline void expect_quiescent(SuiteReport& r, const RunView& v)
{
    if (!v.world.quiescent()) {
        r.fail("run did not finish: schedule " + describe(v.world.schedule()));
    }
}

// Three passes over a program: every interleaving of the first `steps`
// steps (then solo completion), every full-depth schedule with at most
// `preemptions` preemptions, and `seeds` random schedules. `check(world,
// fresh)` sees every run; fresh marks the first run of each history.
template <typename Check>
void explore_in_depth(SuiteReport& r, const Program& prog, const SuiteOptions& opt, std::size_t steps,
                      std::size_t preemptions, std::uint64_t seeds, Check&& check)
{
    std::unordered_set<std::string> seen;
    auto visit = [&](const RunView& v) {
        expect_quiescent(r, v);
        check(v.world, seen.insert(fingerprint(v.world.history())).second);
    };
    r.absorb(explore(prog, {.max_steps = opt.steps ? opt.steps : steps}, visit));
    const auto depth = opt.preemptions.value_or(preemptions);
    r.absorb(explore(prog, {.max_steps = std::numeric_limits<std::size_t>::max(), .max_preemptions = depth}, visit));
    const auto n = opt.seeds ? opt.seeds : seeds;
    for (std::uint64_t seed = 0; seed < n; ++seed) {
        auto w = run_random(prog, seed);
        ++r.runs;
        visit(RunView{*w, false, false});
    }
    r.histories = seen.size();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Splitter: at most one winner; a solo caller wins; a caller arriving after a
// completed call loses.

inline SuiteReport splitter_suite(const SuiteOptions& opt = {})
{
    SuiteReport r{"splitter"};
    detail::Stopwatch clock;
    std::vector<std::uint32_t> sizes = opt.procs ? std::vector<std::uint32_t>{opt.procs} : std::vector<std::uint32_t>{2, 3};
    for (auto n : sizes) {
        Program prog;
        prog.procs = n;
        prog.body = [](Proc& p) -> Task<void> {
            co_await recorded(p, "s", "split", json::array(), split(Mem{p}, "s"), [](bool b) { return json(b); });
        };
        r.absorb(explore(prog, {.max_steps = std::max<std::size_t>(opt.steps ? opt.steps : 24, 4 * n)}, [&](const RunView& v) {
            detail::expect_quiescent(r, v);
            const auto ops = operations(v.world.history());
            int winners = 0;
            for (std::size_t i = 0; i < ops.size(); ++i) {
                const bool won = ops[i].res->get<bool>();
                winners += won ? 1 : 0;
                bool solo = true;
                bool late = false;
                for (std::size_t j = 0; j < ops.size(); ++j) {
                    if (i != j) {
                        solo = solo && ops[i].precedes(ops[j]);
                        late = late || ops[j].precedes(ops[i]);
                    }
                }
                if (solo && !won) {
                    r.fail("solo caller lost: schedule " + detail::describe(v.world.schedule()));
                }
                if (late && won) {
                    r.fail("late caller won: schedule " + detail::describe(v.world.schedule()));
                }
            }
            if (winners > 1) {
                r.fail("two winners: schedule " + detail::describe(v.world.schedule()));
            }
        }));
    }
    r.seconds = clock.seconds();
    return r;
}

// ---------------------------------------------------------------------------
// Grafarius: validity, coherence, solo convergence, continuation.

inline void check_grafarius_history(SuiteReport& r, const History& h, const std::string& where)
{
    const auto ops = operations(h);
    auto flag_of = [](const Operation& op) { return op.res->at("flag").get<std::string>(); };
    auto value_of = [](const Operation& op) { return op.res->at("value").get<std::string>(); };
    for (const auto& op : ops) {
        if (!op.complete()) {
            continue;
        }
        const auto v = value_of(op);
        // Validity: an adopted value was proposed by a call invoked before the response.
        const bool proposed = std::any_of(ops.begin(), ops.end(), [&](const Operation& o) {
            return o.args.get<std::string>() == v && o.invoke_seq < *op.response_seq;
        });
        if (!proposed) {
            r.fail("validity: " + v + " never proposed; " + where);
        }
        // Coherence.
        if (flag_of(op) == "commit") {
            for (const auto& other : ops) {
                if (other.complete() && value_of(other) != v) {
                    r.fail("coherence: commit " + v + " vs " + value_of(other) + "; " + where);
                }
            }
        }
        bool first_to_return = true;
        bool someone_returned_before = false;
        for (const auto& other : ops) {
            if (&other == &op) {
                continue;
            }
            first_to_return = first_to_return && other.invoke_seq > *op.response_seq;
            someone_returned_before = someone_returned_before || (other.response_seq && *other.response_seq < op.invoke_seq);
        }
        // Solo convergence.
        if (first_to_return && !(flag_of(op) == "commit" && v == op.args.get<std::string>())) {
            r.fail("solo convergence; " + where);
        }
        // Continuation: the value was proposed before this call was invoked.
        if (someone_returned_before) {
            const bool earlier = std::any_of(ops.begin(), ops.end(), [&](const Operation& o) {
                return &o != &op && o.args.get<std::string>() == v && o.invoke_seq < op.invoke_seq;
            });
            if (!earlier) {
                r.fail("continuation: " + v + "; " + where);
            }
        }
    }
}

inline Proc::Body grafarius_body(std::vector<std::string> proposals, std::string name = "g")
{
    return [proposals, name](Proc& p) -> Task<void> {
        const Bytes u = proposals.at(p.id().value);
        co_await recorded(p, name, "adopt_commit", json(u), adopt_commit(Mem{p}, name, u), [](const AdoptCommit& a) {
            return json{{"flag", to_string(a.flag)}, {"value", a.value}};
        });
    };
}

inline SuiteReport grafarius_suite(const SuiteOptions& opt = {})
{
    SuiteReport r{"grafarius"};
    detail::Stopwatch clock;
    std::vector<std::uint32_t> sizes = opt.procs ? std::vector<std::uint32_t>{opt.procs} : std::vector<std::uint32_t>{2, 3};
    for (auto n : sizes) {
        // Every assignment of two values to n proposers, up to swapping the
        // names (proposals are never compared), so p0 always proposes a.
        for (std::uint32_t mask = 0; mask < (1u << n); mask += 2) {
            std::vector<std::string> proposals;
            for (std::uint32_t i = 0; i < n; ++i) {
                proposals.push_back((mask >> i) & 1 ? "b" : "a");
            }
            Program prog;
            prog.procs = n;
            prog.body = grafarius_body(proposals);
            r.absorb(explore(prog, {.max_steps = std::max<std::size_t>(opt.steps ? opt.steps : 24, 7 * n)}, [&](const RunView& v) {
                detail::expect_quiescent(r, v);
                if (v.fresh) {
                    check_grafarius_history(r, v.world.history(), "schedule " + detail::describe(v.world.schedule()));
                }
            }));
        }
    }
    r.seconds = clock.seconds();
    return r;
}

// ---------------------------------------------------------------------------
// Racing: Ordering with ≪ the lap index order, bounded steps per enter, solo
// sequence ι(1..m).

// Steps of one enter when k processes ever accessed the racing: a first store
// walks at most k splitters of the grid (4 accesses each) then writes; collect
// reads the doors of the closed cells, at most k(k+1)/2 of them, plus their
// frontier and values. Frozen from the grid geometry.
inline std::uint64_t racing_enter_bound(std::uint64_t k)
{
    const std::uint64_t cells = k * (k + 1) / 2;
    return (4 * k + 1) + (3 * cells + 1);
}

inline SuiteReport racing_suite(const SuiteOptions& opt = {})
{
    SuiteReport r{"racing"};
    detail::Stopwatch clock;
    const std::uint32_t n = opt.procs ? opt.procs : 3;
    const std::uint32_t enters = opt.laps ? opt.laps : 3;

    // Solo sequence.
    {
        AtomicMemory mem;
        Proc p{ProcessId{0}};
        for (std::uint64_t i = 1; i <= 10; ++i) {
            std::optional<Lap> lap;
            run_sync(p, [&lap](Proc& self) -> Task<void> { lap = co_await enter(Mem{self}, "R"); }, mem);
            if (lap->index != i || lap->name != default_index("R")(i)) {
                r.fail("solo enter " + std::to_string(i) + " returned " + lap->name);
            }
        }
    }

    Program prog;
    prog.procs = n;
    prog.body = [enters](Proc& p) -> Task<void> {
        for (std::uint32_t i = 0; i < enters; ++i) {
            co_await recorded(p, "R", "enter", json::array(), enter(Mem{p}, "R"),
                              [](const Lap& l) { return json(l.index); });
        }
    };
    std::uint64_t max_steps = 0;
    auto check_run = [&](World& world, bool fresh) {
        if (!fresh) {
            return;
        }
        const auto ops = operations(world.history());
        for (const auto& op : ops) {
            max_steps = std::max(max_steps, op.steps);
            if (op.steps > racing_enter_bound(n)) {
                r.fail("enter took " + std::to_string(op.steps) + " steps");
            }
        }
        if (const auto order = check_racing_order(ops); !order.ok) {
            r.fail("ordering: " + order.violation + "; schedule " + detail::describe(world.schedule()));
        }
    };
    detail::explore_in_depth(r, prog, opt, 16, 2, 2000, check_run);
    r.metrics["max_enter_steps"] = static_cast<double>(max_steps);
    r.metrics["enter_bound"] = static_cast<double>(racing_enter_bound(n));
    r.seconds = clock.seconds();
    return r;
}

// ---------------------------------------------------------------------------
// Consensus: agreement, validity, linearizability, lap-order property, and the
// solo step count.

// Register accesses of a solo propose: decision read, enter (first store 5,
// collect 4), grafarius (splitter 4, d write, c read), decision write.
inline constexpr std::uint64_t kSoloProposeSteps = 17;
inline constexpr std::uint64_t kSoloSplitterSteps = 4;

// Checks at every enter of a consensus racing that all lower laps are decided.
class LapOrderProbe final : public Hooks {
public:
    explicit LapOrderProbe(std::function<std::optional<Bytes>(const RegisterId&)> peek) : peek_{std::move(peek)} {}

    void lap_entered(Proc&, const std::string& racing, const std::string&, std::uint64_t index) override
    {
        const auto suffix = std::string{":race"};
        if (racing.size() < suffix.size() || racing.compare(racing.size() - suffix.size(), suffix.size(), suffix) != 0) {
            return;
        }
        const auto consensus = racing.substr(0, racing.size() - suffix.size());
        for (std::uint64_t j = 1; j < index; ++j) {
            const auto d = peek_(consensus + ":grafarius:" + std::to_string(j) + ":d");
            if (!d || is_bottom(*d)) {
                violations.push_back(consensus + " lap " + std::to_string(index) + " entered with lap " +
                                     std::to_string(j) + " undecided");
            }
        }
    }

    std::vector<std::string> violations;

private:
    std::function<std::optional<Bytes>(const RegisterId&)> peek_;
};

struct SoloCounts {
    std::uint64_t propose = 0;
    std::uint64_t splitter = 0;
};

// Counts accesses of a solo propose, and of the grafarius splitter within it.
inline SoloCounts count_solo_propose()
{
    AtomicMemory mem;
    Proc p{ProcessId{0}};
    SoloCounts c;
    p.start([](Proc& self) -> Task<void> { co_await propose(Mem{self}, "c", "a"); });
    while (p.has_pending()) {
        if (p.pending().key.find(":grafarius:1:split:") != std::string::npos) {
            ++c.splitter;
        }
        p.complete(mem.serve(p.pending()));
    }
    c.propose = p.steps();
    return c;
}

inline void check_consensus_history(SuiteReport& r, const std::vector<Operation>& ops, const std::string& where)
{
    std::set<std::string> decided;
    std::set<std::string> proposed;
    for (const auto& op : ops) {
        proposed.insert(op.args.get<std::string>());
    }
    for (const auto& op : ops) {
        if (op.complete()) {
            const auto v = consensus_value(*op.res);
            decided.insert(v);
            if (!proposed.contains(v)) {
                r.fail("validity: " + v + "; " + where);
            }
        }
    }
    if (decided.size() > 1) {
        r.fail("agreement: " + std::to_string(decided.size()) + " decisions; " + where);
    }
    if (!check_linearizable(ops, ConsensusModel{}).ok()) {
        r.fail("not linearizable; " + where);
    }
}

inline SuiteReport consensus_suite(const SuiteOptions& opt = {})
{
    SuiteReport r{"consensus"};
    detail::Stopwatch clock;
    const std::uint32_t n = opt.procs ? opt.procs : 2;

    const auto solo = count_solo_propose();
    r.metrics["solo_steps"] = static_cast<double>(solo.propose);
    r.metrics["solo_splitter_steps"] = static_cast<double>(solo.splitter);
    if (solo.propose != kSoloProposeSteps) {
        r.fail("solo propose took " + std::to_string(solo.propose) + " steps, expected " +
               std::to_string(kSoloProposeSteps));
    }
    if (solo.splitter != kSoloSplitterSteps) {
        r.fail("solo splitter took " + std::to_string(solo.splitter) + " steps");
    }

    Workload w;
    w.construction = Construction::consensus;
    w.object = "c";
    w.limits.consensus.max_laps = opt.laps;
    for (std::uint32_t i = 0; i < n; ++i) {
        w.ops[i] = {"propose v" + std::to_string(i)};
    }
    Program prog;
    prog.procs = n;
    prog.body = workload_body(w);
    prog.make_hooks = [](World& world) -> std::unique_ptr<Hooks> {
        return std::make_unique<LapOrderProbe>([&world](const RegisterId& k) { return world.memory().peek(k); });
    };
    std::uint64_t starved = 0;
    detail::explore_in_depth(r, prog, opt, 40, 3, 5000, [&](World& world, bool fresh) {
        for (const auto& msg : static_cast<LapOrderProbe*>(world.hooks())->violations) {
            r.fail("lap order: " + msg + "; schedule " + detail::describe(world.schedule()));
        }
        if (!fresh) {
            return;
        }
        const auto ops = operations(world.history());
        starved += static_cast<std::uint64_t>(std::count_if(ops.begin(), ops.end(), [](const Operation& o) { return !o.complete(); }));
        check_consensus_history(r, ops, "schedule " + detail::describe(world.schedule()));
    });
    r.metrics["starved_calls"] = static_cast<double>(starved);
    r.seconds = clock.seconds();
    return r;
}

// ---------------------------------------------------------------------------
// Universal constructions.

// Consensus objects of `object` that received a proposal (reading the
// decision register of the next lap does not count).
inline std::set<std::string> proposed_consensus(const AtomicMemory& mem, const std::string& object)
{
    const auto prefix = object + ":consensus:";
    std::set<std::string> out;
    for (const auto& [key, value] : mem.cells()) {
        if (key.rfind(prefix, 0) != 0) {
            continue;
        }
        const auto rest = key.substr(prefix.size());
        const auto id = rest.substr(0, rest.find(':'));
        if (rest != id + ":d") {
            out.insert(id);
        }
    }
    return out;
}

// Pool indices of a bounded construction touched in any way.
inline std::set<std::uint64_t> pool_indices(const AtomicMemory& mem, const std::string& object)
{
    const auto prefix = object + ":consensus:";
    std::set<std::uint64_t> out;
    for (const auto& [key, value] : mem.cells()) {
        if (key.rfind(prefix, 0) == 0) {
            out.insert(std::stoull(key.substr(prefix.size())));
        }
    }
    return out;
}

struct UniversalCase {
    std::string type;
    std::map<std::uint32_t, std::vector<std::string>> ops;
};

// Two processes, four operations: the bounded-interleaving workloads.
inline std::vector<UniversalCase> universal_cases()
{
    return {
        {"cas", {{0, {"cas 0 1", "cas 1 2"}}, {1, {"cas 0 3", "read"}}}},
        {"counter", {{0, {"inc", "read"}}, {1, {"inc", "inc"}}}},
    };
}

inline Program universal_program(Construction c, const UniversalCase& u, std::uint32_t laps, bool trace_inner = false)
{
    Workload w;
    w.construction = c;
    w.type = u.type;
    w.ops = u.ops;
    w.limits.consensus.max_laps = laps;
    Program prog;
    prog.procs = static_cast<std::uint32_t>(u.ops.size());
    prog.body = workload_body(w);
    prog.trace_inner = trace_inner;
    return prog;
}

// Per-process response sequences of the top-level object.
inline std::string response_signature(const History& h, const std::string& object)
{
    std::map<std::uint32_t, std::vector<json>> by_proc;
    for (const auto& op : operations(h, object)) {
        by_proc[op.proc.value].push_back(op.res ? *op.res : json("pending"));
    }
    json j = json::object();
    for (const auto& [p, rs] : by_proc) {
        j[std::to_string(p)] = rs;
    }
    return j.dump();
}

inline SuiteReport runiv_suite(const SuiteOptions& opt = {})
{
    SuiteReport r{"runiv"};
    detail::Stopwatch clock;
    for (const auto& u : universal_cases()) {
        const auto prog = universal_program(Construction::runiv, u, 0);
        const auto model = workload_model(Workload{Construction::runiv, u.type});
        detail::explore_in_depth(r, prog, opt, 32, 2, 2000, [&](World& world, bool fresh) {
            if (fresh && !check_linearizable(operations(world.history(), "o"), *model).ok()) {
                r.fail(u.type + ": not linearizable; schedule " + detail::describe(world.schedule()));
            }
        });
    }
    // Trivial operations never propose.
    UniversalCase trivial{"cas", {{0, {"cas 5 6", "read"}}, {1, {"read", "cas 7 7"}}}};
    detail::explore_in_depth(r, universal_program(Construction::runiv, trivial, 0), opt, 24, 2, 200,
                             [&](World& world, bool) {
                                 if (!proposed_consensus(world.memory(), "o").empty()) {
                                     r.fail("trivial operation proposed; schedule " + detail::describe(world.schedule()));
                                 }
                             });
    r.seconds = clock.seconds();
    return r;
}

// Round decomposition and P1 for every pool object of a traced buniv run.
inline void check_recycled_objects(SuiteReport& r, const History& h, const std::string& object, const std::string& where)
{
    std::set<std::string> objects;
    for (const auto& e : h) {
        if (e.obj.rfind(object + ":consensus:", 0) == 0) {
            objects.insert(e.obj);
        }
    }
    for (const auto& obj : objects) {
        const auto ops = operations(h, obj);
        if (const auto p1 = check_p1(ops); !p1.ok) {
            r.fail("P1 on " + obj + "; " + where);
        }
        if (!check_rounds(sequential_view(ops), ConsensusModel{}).ok()) {
            r.fail("no round decomposition of " + obj + "; " + where);
        }
    }
}

inline SuiteReport buniv_suite(const SuiteOptions& opt = {})
{
    SuiteReport r{"buniv"};
    detail::Stopwatch clock;

    // (c) linearizability, with rounds/P1 on the inner objects and responses
    // matched against the unbounded construction.
    for (const auto& u : universal_cases()) {
        std::set<std::string> runiv_outcomes;
        detail::explore_in_depth(r, universal_program(Construction::runiv, u, 0), opt, 32, 2, 2000,
                                 [&](World& world, bool fresh) {
                                     if (fresh) {
                                         runiv_outcomes.insert(response_signature(world.history(), "o"));
                                     }
                                 });
        const auto prog = universal_program(Construction::buniv, u, 0, true);
        const auto model = workload_model(Workload{Construction::buniv, u.type});
        std::uint64_t unmatched = 0;
        detail::explore_in_depth(r, prog, opt, 32, 2, 2000, [&](World& world, bool fresh) {
            if (!fresh) {
                return;
            }
            const auto where = u.type + " schedule " + detail::describe(world.schedule());
            if (!check_linearizable(operations(world.history(), "o"), *model).ok()) {
                r.fail("not linearizable; " + where);
            }
            check_recycled_objects(r, world.history(), "o", where);
            if (!runiv_outcomes.contains(response_signature(world.history(), "o"))) {
                ++unmatched;
                r.fail("responses match no runiv run; " + where);
            }
        });
        r.metrics["unmatched_" + u.type] = static_cast<double>(unmatched);
    }

    // (a) pool bound and (b) recycled-object checks on random schedules.
    const std::uint64_t seeds = opt.seeds ? opt.seeds : 1000;
    const std::vector<std::string> mix{"cas 0 1", "cas 1 2", "cas 2 0", "read", "cas 1 0", "cas 0 2"};
    for (std::uint32_t k = 1; k <= 3; ++k) {
        UniversalCase u{"cas", {}};
        const std::uint32_t per_proc = k == 3 ? 10 : 6;
        std::size_t max_pool = 0;
        for (std::uint64_t seed = 0; seed < seeds; ++seed) {
            std::mt19937_64 rng{seed * 7919 + k};
            u.ops.clear();
            for (std::uint32_t p = 0; p < k; ++p) {
                for (std::uint32_t i = 0; i < per_proc; ++i) {
                    u.ops[p].push_back(mix[rng() % mix.size()]);
                }
            }
            const auto prog = universal_program(Construction::buniv, u, 0, true);
            auto w = run_random(prog, seed);
            ++r.runs;
            const auto where = "k=" + std::to_string(k) + " seed " + std::to_string(seed);
            const auto pool = pool_indices(w->memory(), "o");
            max_pool = std::max(max_pool, pool.size());
            if (pool.size() > k + 1) {
                r.fail("pool of " + std::to_string(pool.size()) + " consensus objects; " + where);
            }
            check_recycled_objects(r, w->history(), "o", where);
            if (!check_linearizable(operations(w->history(), "o"), SerialModel<CasType>{}).ok()) {
                r.fail("not linearizable; " + where);
            }
        }
        r.metrics["max_pool_k" + std::to_string(k)] = static_cast<double>(max_pool);
    }
    r.seconds = clock.seconds();
    return r;
}

// ---------------------------------------------------------------------------
// Contention-free complexity of buniv.

// Registers per k² after a contention-free k-process run; measured at k = 1
// (30 registers) and frozen.
inline constexpr double kRegisterConstant = 30.0;

struct LinearFit {
    double intercept = 0;
    double slope = 0;
    double r2 = 0;
};

inline LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y)
{
    const auto n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    LinearFit f;
    f.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    f.intercept = (sy - f.slope * sx) / n;
    double ss_res = 0, ss_tot = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = y[i] - (f.intercept + f.slope * x[i]);
        ss_res += e * e;
        ss_tot += (y[i] - sy / n) * (y[i] - sy / n);
    }
    f.r2 = ss_tot == 0 ? 1.0 : 1.0 - ss_res / ss_tot;
    return f;
}

struct ComplexityPoint {
    std::uint32_t k = 0;
    // Mean register steps of the last round's invokes (all k registered).
    double steps = 0;
    std::size_t registers = 0;
};

// k processes take turns, one whole "inc" at a time, for `rounds` rounds.
inline ComplexityPoint contention_free_point(std::uint32_t k, std::uint32_t rounds = 3)
{
    UniversalCase u{"counter", {}};
    for (std::uint32_t p = 0; p < k; ++p) {
        u.ops[p].assign(rounds, "inc");
    }
    World w(universal_program(Construction::buniv, u, 0));
    for (std::uint32_t i = 0; i < rounds; ++i) {
        for (std::uint32_t p = 0; p < k; ++p) {
            Proc& proc = w.proc(ProcessId{p});
            const auto target = proc.emitted() + 2;
            while (proc.has_pending() && proc.emitted() < target) {
                w.step(ProcessId{p});
            }
        }
    }
    std::vector<std::uint64_t> steps;
    for (const auto& e : w.history()) {
        if (e.kind == EventKind::response && e.obj == "o") {
            steps.push_back(e.steps);
        }
    }
    ComplexityPoint pt{k, 0, w.memory().cells().size()};
    for (std::size_t i = steps.size() - k; i < steps.size(); ++i) {
        pt.steps += static_cast<double>(steps[i]) / k;
    }
    return pt;
}

inline SuiteReport complexity_suite(const SuiteOptions& opt = {})
{
    SuiteReport r{"complexity"};
    detail::Stopwatch clock;
    const std::uint32_t k_max = opt.procs ? opt.procs : 8;
    std::vector<double> ks, steps;
    for (std::uint32_t k = 1; k <= k_max; ++k) {
        const auto pt = contention_free_point(k);
        ++r.runs;
        ks.push_back(k);
        steps.push_back(pt.steps);
        r.metrics["steps_k" + std::to_string(k)] = pt.steps;
        r.metrics["registers_k" + std::to_string(k)] = static_cast<double>(pt.registers);
        if (static_cast<double>(pt.registers) > kRegisterConstant * k * k) {
            r.fail("k=" + std::to_string(k) + ": " + std::to_string(pt.registers) + " registers");
        }
    }
    const auto fit = fit_line(ks, steps);
    r.metrics["slope"] = fit.slope;
    r.metrics["intercept"] = fit.intercept;
    r.metrics["r2"] = fit.r2;
    if (fit.r2 < 0.99) {
        r.fail("affine fit R^2 = " + std::to_string(fit.r2));
    }
    if (fit.slope <= 0) {
        r.fail("non-positive slope " + std::to_string(fit.slope));
    }
    r.seconds = clock.seconds();
    return r;
}

// ---------------------------------------------------------------------------
// Register emulation over the simulated network.

namespace detail {

// Reads and writes on a few shared registers, each recorded as one operation
// so start times apply.
inline Proc::Body register_body(std::vector<std::vector<std::string>> plans)
{
    return [plans = std::move(plans)](Proc& p) -> Task<void> {
        const auto& plan = plans.at(p.id().value);
        for (std::size_t i = 0; i < plan.size(); ++i) {
            const std::string key = plan[i].substr(1);
            if (plan[i][0] == 'w') {
                const Bytes value = p.id().str() + "." + std::to_string(i);
                const auto token = p.begin_op(key, "write", value);
                co_await Mem{p}.write(key, value);
                p.end_op(token, nullptr);
            } else {
                const auto token = p.begin_op(key, "read", json::array());
                const Bytes value = co_await Mem{p}.read(key, "0");
                p.end_op(token, value);
            }
        }
    };
}

inline void random_crashes(NetSim& sim, std::mt19937_64& rng, double horizon)
{
    const auto n = sim.config().n_servers;
    const auto count = static_cast<std::uint32_t>(rng() % (sim.config().f_max() + 1));
    std::vector<std::uint32_t> servers(n);
    std::iota(servers.begin(), servers.end(), 0u);
    std::shuffle(servers.begin(), servers.end(), rng);
    std::uniform_real_distribution<double> when{0.0, horizon};
    for (std::uint32_t i = 0; i < count; ++i) {
        sim.crash_at(when(rng), servers[i]);
    }
}

}  // namespace detail

inline SuiteReport abd_suite(const SuiteOptions& opt = {})
{
    SuiteReport r{"abd"};
    detail::Stopwatch clock;
    const std::uint64_t seeds = opt.seeds ? opt.seeds : 10000;
    std::uint64_t register_ops = 0;
    for (std::uint64_t seed = 0; seed < seeds; ++seed) {
        std::mt19937_64 rng{seed};
        NetConfig cfg;
        cfg.n_servers = seed % 2 == 0 ? 3 : 5;
        cfg.seed = seed;
        NetSim sim{cfg};
        const std::uint32_t procs = opt.procs ? opt.procs : 2 + static_cast<std::uint32_t>(rng() % 3);
        const std::uint32_t per_proc = opt.ops ? opt.ops : 3 + static_cast<std::uint32_t>(rng() % 3);
        std::vector<std::vector<std::string>> plans(procs);
        std::vector<std::vector<double>> starts(procs);
        std::uniform_real_distribution<double> start{0.0, 10.0};
        for (auto& plan : plans) {
            for (std::uint32_t i = 0; i < per_proc; ++i) {
                plan.push_back(std::string(rng() % 2 ? "r" : "w") + (rng() % 2 ? "x" : "y"));
            }
        }
        for (auto& t : starts) {
            for (std::uint32_t i = 0; i < per_proc; ++i) {
                t.push_back(start(rng));
            }
            std::sort(t.begin(), t.end());
        }
        const auto body = detail::register_body(plans);
        for (std::uint32_t p = 0; p < procs; ++p) {
            sim.add_process(body, starts[p]);
        }
        detail::random_crashes(sim, rng, 20.0);
        ++r.runs;
        const auto where = "seed " + std::to_string(seed) + " n=" + std::to_string(cfg.n_servers) +
                           " crashed=" + std::to_string(sim.crashed());
        if (!sim.run()) {
            r.fail("operations did not complete; " + where);
            continue;
        }
        std::string key;
        if (!registers_linearizable(sim.register_history(), &key)) {
            r.fail("register " + key + " not linearizable; " + where);
        }
        register_ops += sim.stats().register_ops;
    }
    r.metrics["register_ops"] = static_cast<double>(register_ops);

    // Consensus over the emulated registers.
    const std::uint64_t stack_seeds = std::min<std::uint64_t>(seeds, 100);
    for (std::uint64_t seed = 0; seed < stack_seeds; ++seed) {
        std::mt19937_64 rng{seed + 1'000'003};
        NetConfig cfg;
        cfg.n_servers = seed % 2 == 0 ? 3 : 5;
        cfg.seed = seed;
        NetSim sim{cfg};
        Workload w;
        w.construction = Construction::consensus;
        w.object = "c";
        const std::uint32_t procs = 2 + static_cast<std::uint32_t>(seed % 2);
        for (std::uint32_t p = 0; p < procs; ++p) {
            w.ops[p] = {"propose v" + std::to_string(p)};
        }
        const auto body = workload_body(w);
        std::uniform_real_distribution<double> start{0.0, 5.0};
        for (std::uint32_t p = 0; p < procs; ++p) {
            sim.add_process(body, {start(rng)});
        }
        detail::random_crashes(sim, rng, 30.0);
        ++r.runs;
        const auto where = "consensus seed " + std::to_string(seed) + " n=" + std::to_string(cfg.n_servers);
        if (!sim.run()) {
            r.fail("proposals did not complete; " + where);
            continue;
        }
        check_consensus_history(r, operations(sim.history(), "c"), where);

        // Solo proposal: same register-step count as on atomic memory.
        NetSim solo{cfg};
        Workload one = w;
        one.ops = {{0, {"propose a"}}};
        solo.add_process(workload_body(one));
        solo.run();
        const auto ops = operations(solo.history(), "c");
        if (ops.size() != 1 || !ops[0].complete() || solo.stats().register_ops != kSoloProposeSteps) {
            r.fail("solo propose over netsim took " + std::to_string(solo.stats().register_ops) + " steps; " + where);
        }
    }
    r.seconds = clock.seconds();
    return r;
}

}  // namespace ofuc
