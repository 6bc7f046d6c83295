#include "support.hpp"

#include <ofuc/universal.hpp>

#include <gtest/gtest.h>

using namespace ofuc;
using ofuc::testing::run_solo;

namespace {

// Objects with any register touched; with proposed_only, objects someone
// proposed to (reading the decision register of the next lap does not count).
std::size_t consensus_objects(const AtomicMemory& mem, const std::string& prefix, bool proposed_only = false)
{
    std::set<std::string> names;
    for (const auto& [key, value] : mem.cells()) {
        const bool decision = key.size() >= 2 && key.compare(key.size() - 2, 2, ":d") == 0 &&
                              key.find(":grafarius:") == std::string::npos;
        if (key.rfind(prefix, 0) == 0 && !(proposed_only && decision)) {
            const auto rest = key.substr(prefix.size());
            names.insert(rest.substr(0, rest.find(':')));
        }
    }
    return names.size();
}

template <typename T>
std::optional<json> runiv(AtomicMemory& mem, Proc& p, const std::string& op)
{
    return run_solo<std::optional<json>>(mem, p, [op](Mem m) -> Task<std::optional<json>> {
        co_return co_await invoke_runiv(m, "o", T{}, parse_op_text(op));
    });
}

template <typename T>
std::optional<json> buniv(AtomicMemory& mem, Proc& p, const std::string& op)
{
    return run_solo<std::optional<json>>(mem, p, [op](Mem m) -> Task<std::optional<json>> {
        co_return co_await invoke_buniv(m, "o", T{}, parse_op_text(op));
    });
}

}  // namespace

TEST(SerialTypes, CounterSoloIncrements)
{
    CounterType c;
    auto [s1, r1] = c.apply(c.initial(), parse_op_text("inc"));
    EXPECT_EQ(s1, 1);
    EXPECT_EQ(r1, nullptr);
    auto [s2, r2] = c.apply(s1, parse_op_text("inc"));
    EXPECT_EQ(s2, 2);
    EXPECT_THROW(c.apply(s2, parse_op_text("inc 3")), std::invalid_argument);
    EXPECT_THROW(c.apply(s2, parse_op_text("dec")), std::invalid_argument);
}

TEST(SerialTypes, QueueStateRoundTrip)
{
    QueueType q;
    auto [s, r] = q.apply(q.initial(), parse_op_text("enq 4"));
    std::tie(s, r) = q.apply(s, parse_op_text("enq 9"));
    EXPECT_EQ(q.decode_state(q.encode_state(s)), s);
    std::tie(s, r) = q.apply(s, parse_op_text("deq"));
    EXPECT_EQ(r, 4);
}

TEST(Runiv, CounterSolo)
{
    AtomicMemory mem;
    Proc p{ProcessId{0}};
    EXPECT_EQ(runiv<CounterType>(mem, p, "inc"), json(nullptr));
    EXPECT_EQ(runiv<CounterType>(mem, p, "inc"), json(nullptr));
    EXPECT_EQ(runiv<CounterType>(mem, p, "read"), json(2));
    Proc q{ProcessId{1}};
    EXPECT_EQ(runiv<CounterType>(mem, q, "read"), json(2));
    EXPECT_EQ(runiv<CounterType>(mem, q, "inc"), json(nullptr));
    EXPECT_EQ(runiv<CounterType>(mem, p, "read"), json(3));
}

TEST(Runiv, TrivialOpsAllocateNothing)
{
    AtomicMemory mem;
    Proc p{ProcessId{0}};
    runiv<CasType>(mem, p, "cas 0 1");
    const auto before = consensus_objects(mem, "o:consensus:", true);
    EXPECT_EQ(before, 1u);
    EXPECT_EQ(runiv<CasType>(mem, p, "cas 0 5"), json(false));
    EXPECT_EQ(runiv<CasType>(mem, p, "read"), json(1));
    EXPECT_EQ(runiv<CasType>(mem, p, "cas 1 1"), json(true));
    EXPECT_EQ(consensus_objects(mem, "o:consensus:", true), before);
}

TEST(Free, Examples)
{
    EXPECT_EQ(free_index({0}, 0), 1u);
    EXPECT_EQ(free_index({0, 2}, 2), 1u);
    EXPECT_EQ(free_index({}, 0), 0u);
}

TEST(Recycle, UndecidedEpochBehavesFresh)
{
    AtomicMemory mem;
    Proc p{ProcessId{0}};
    const auto o = recycle_consensus("o", Timestamp{1});
    EXPECT_EQ(run_solo<std::optional<Bytes>>(mem, p, [o](Mem m) { return o.propose(m, "a"); }), "a");
}

TEST(Recycle, DecidedAtSameEpochReturnsDecision)
{
    AtomicMemory mem;
    Proc p{ProcessId{0}};
    Proc q{ProcessId{1}};
    const auto o = recycle_consensus("o", Timestamp{2});
    run_solo<std::optional<Bytes>>(mem, p, [o](Mem m) { return o.propose(m, "v"); });
    EXPECT_EQ(run_solo<std::optional<Bytes>>(mem, q, [o](Mem m) { return o.propose(m, "b"); }), "v");
    EXPECT_EQ(q.steps(), 1u);
}

TEST(Recycle, NextEpochMasksOldDecision)
{
    AtomicMemory mem;
    Proc p{ProcessId{0}};
    run_solo<std::optional<Bytes>>(mem, p, [](Mem m) { return recycle_consensus("o", Timestamp{1}).propose(m, "a"); });
    Proc q{ProcessId{1}};
    EXPECT_EQ(run_solo<std::optional<Bytes>>(mem, q,
                                             [](Mem m) { return recycle_consensus("o", Timestamp{2}).propose(m, "b"); }),
              "b");
}

TEST(Recycle, DecidedGrafariusAdopts)
{
    AtomicMemory mem;
    Proc p{ProcessId{0}};
    Proc q{ProcessId{1}};
    const auto g = recycle_grafarius("g", Timestamp{1});
    run_solo<AdoptCommit>(mem, p, [g](Mem m) { return g.adopt_commit(m, "v"); });
    EXPECT_EQ(run_solo<AdoptCommit>(mem, q, [g](Mem m) { return g.adopt_commit(m, "u"); }),
              (AdoptCommit{Flag::adopt, "v"}));
}

TEST(Buniv, SoloUsesAtMostTwoConsensusObjects)
{
    AtomicMemory mem;
    Proc p{ProcessId{0}};
    for (int i = 0; i < 20; ++i) {
        EXPECT_EQ(buniv<CounterType>(mem, p, "inc"), json(nullptr));
    }
    EXPECT_EQ(buniv<CounterType>(mem, p, "read"), json(20));
    EXPECT_LE(consensus_objects(mem, "o:consensus:"), 2u);
}

TEST(Buniv, SequentialProcessesAgree)
{
    AtomicMemory mem;
    std::vector<std::unique_ptr<Proc>> procs;
    for (std::uint32_t i = 0; i < 3; ++i) {
        procs.push_back(std::make_unique<Proc>(ProcessId{i}));
    }
    for (int round = 0; round < 5; ++round) {
        for (auto& p : procs) {
            buniv<CounterType>(mem, *p, "inc");
        }
    }
    for (auto& p : procs) {
        EXPECT_EQ(buniv<CounterType>(mem, *p, "read"), json(15));
    }
    EXPECT_LE(consensus_objects(mem, "o:consensus:"), 4u);
}
