#include "support.hpp"

#include <ofuc/primitives.hpp>

#include <gtest/gtest.h>

using namespace ofuc;
using ofuc::testing::run_solo;

TEST(Splitter, SoloCallerWinsInFourSteps)
{
    AtomicMemory mem;
    Proc p{ProcessId{0}};
    EXPECT_TRUE(run_solo<bool>(mem, p, [](Mem m) { return split(m, "s"); }));
    EXPECT_EQ(p.steps(), 4u);
}

TEST(Splitter, LateCallerLoses)
{
    AtomicMemory mem;
    Proc p{ProcessId{0}};
    Proc q{ProcessId{1}};
    EXPECT_TRUE(run_solo<bool>(mem, p, [](Mem m) { return split(m, "s"); }));
    EXPECT_EQ(run_solo<SplitOutcome>(mem, q, [](Mem m) { return split_direction(m, "s"); }), SplitOutcome::right);
}

TEST(Collect, EmptyMap)
{
    AtomicMemory mem;
    Proc p{ProcessId{0}};
    EXPECT_TRUE(run_solo<std::set<std::uint64_t>>(mem, p, [](Mem m) { return collect_codomain(m, "L"); }).empty());
    EXPECT_EQ(p.steps(), 1u);
}

TEST(Collect, StoreThenCodomain)
{
    AtomicMemory mem;
    Proc p{ProcessId{0}};
    run_solo(mem, p, [](Mem m) { return collect_store(m, "L", encode_nat(0)); });
    EXPECT_EQ(p.steps(), 5u);
    EXPECT_EQ(run_solo<std::set<std::uint64_t>>(mem, p, [](Mem m) { return collect_codomain(m, "L"); }),
              (std::set<std::uint64_t>{0}));
}

TEST(Collect, OverwriteOwnSlot)
{
    AtomicMemory mem;
    Proc p{ProcessId{0}};
    run_solo(mem, p, [](Mem m) -> Task<void> {
        co_await collect_store(m, "L", encode_nat(1));
        co_await collect_store(m, "L", encode_nat(4));
    });
    EXPECT_EQ(p.steps(), 6u);
    EXPECT_EQ(run_solo<std::set<std::uint64_t>>(mem, p, [](Mem m) { return collect_codomain(m, "L"); }),
              (std::set<std::uint64_t>{4}));
}

TEST(Collect, TwoWriters)
{
    AtomicMemory mem;
    Proc p{ProcessId{0}};
    Proc q{ProcessId{1}};
    run_solo(mem, p, [](Mem m) { return collect_store(m, "L", encode_nat(2)); });
    run_solo(mem, q, [](Mem m) { return collect_store(m, "L", encode_nat(7)); });
    Proc r{ProcessId{2}};
    EXPECT_EQ(run_solo<std::set<std::uint64_t>>(mem, r, [](Mem m) { return collect_codomain(m, "L"); }),
              (std::set<std::uint64_t>{2, 7}));
}

TEST(Collect, ContentionFreeCostIsLinear)
{
    for (std::uint32_t k = 1; k <= 6; ++k) {
        AtomicMemory mem;
        std::vector<std::unique_ptr<Proc>> procs;
        for (std::uint32_t i = 0; i < k; ++i) {
            procs.push_back(std::make_unique<Proc>(ProcessId{i}));
            run_solo(mem, *procs.back(), [](Mem m) { return collect_store(m, "L", "x"); });
        }
        Proc r{ProcessId{99}};
        run_solo<std::vector<Bytes>>(mem, r, [](Mem m) { return collect(m, "L"); });
        EXPECT_EQ(r.steps(), 3 * k + 1) << "k=" << k;
    }
}

TEST(Grafarius, SoloCommits)
{
    AtomicMemory mem;
    Proc p{ProcessId{0}};
    const auto out = run_solo<AdoptCommit>(mem, p, [](Mem m) { return adopt_commit(m, "g", "a"); });
    EXPECT_EQ(out, (AdoptCommit{Flag::commit, "a"}));
    EXPECT_EQ(p.steps(), 6u);
}

TEST(Grafarius, LateProposerAdoptsDecision)
{
    AtomicMemory mem;
    Proc p{ProcessId{0}};
    Proc q{ProcessId{1}};
    run_solo<AdoptCommit>(mem, p, [](Mem m) { return adopt_commit(m, "g", "a"); });
    const auto out = run_solo<AdoptCommit>(mem, q, [](Mem m) { return adopt_commit(m, "g", "b"); });
    EXPECT_EQ(out, (AdoptCommit{Flag::adopt, "a"}));
}

TEST(Grafarius, RejectsEmptyProposal)
{
    AtomicMemory mem;
    Proc p{ProcessId{0}};
    EXPECT_THROW(run_solo<AdoptCommit>(mem, p, [](Mem m) { return adopt_commit(m, "g", kBottom); }),
                 std::invalid_argument);
}
