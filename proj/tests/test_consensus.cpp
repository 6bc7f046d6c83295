#include "support.hpp"

#include <ofuc/consensus.hpp>

#include <gtest/gtest.h>

using namespace ofuc;
using ofuc::testing::run_solo;

namespace {

// Frozen solo cost: decision read (1), enter (store 5 + collect 4), grafarius
// (splitter 4 + d write + c read), decision write (1).
constexpr std::uint64_t kSoloProposeSteps = 17;

}  // namespace

TEST(Consensus, SoloProposeDecidesOwnValue)
{
    AtomicMemory mem;
    Proc p{ProcessId{0}};
    const auto d = run_solo<std::optional<Bytes>>(mem, p, [](Mem m) { return propose(m, "c", "a"); });
    EXPECT_EQ(d, "a");
    EXPECT_EQ(p.steps(), kSoloProposeSteps);
}

TEST(Consensus, LateProposerGetsDecision)
{
    AtomicMemory mem;
    Proc p{ProcessId{0}};
    Proc q{ProcessId{1}};
    run_solo<std::optional<Bytes>>(mem, p, [](Mem m) { return propose(m, "c", "a"); });
    EXPECT_EQ(run_solo<std::optional<Bytes>>(mem, q, [](Mem m) { return propose(m, "c", "b"); }), "a");
    EXPECT_EQ(q.steps(), 1u);
}

TEST(Consensus, DecidedReadsBottomThenValue)
{
    AtomicMemory mem;
    Proc p{ProcessId{0}};
    EXPECT_EQ(run_solo<Bytes>(mem, p, [](Mem m) { return decided(m, "c"); }), kBottom);
    run_solo<std::optional<Bytes>>(mem, p, [](Mem m) { return propose(m, "c", "a"); });
    EXPECT_EQ(run_solo<Bytes>(mem, p, [](Mem m) { return decided(m, "c"); }), "a");
}

TEST(Consensus, LapBoundStarves)
{
    AtomicMemory mem;
    // A grafarius lap whose collision flag is already raised never commits.
    mem.write("c:grafarius:1:c", "1");
    mem.write("c:grafarius:2:c", "1");
    Proc p{ProcessId{0}};
    const auto d = run_solo<std::optional<Bytes>>(mem, p, [](Mem m) { return propose(m, "c", "a", {.max_laps = 2}); });
    EXPECT_FALSE(d.has_value());
}
