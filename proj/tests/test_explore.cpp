#include <ofuc/checkers.hpp>
#include <ofuc/explore.hpp>
#include <ofuc/primitives.hpp>

#include <gtest/gtest.h>

#include <map>

using namespace ofuc;

namespace {

Program writers(std::uint32_t procs, int steps, bool same_key)
{
    Program prog;
    prog.procs = procs;
    prog.body = [steps, same_key](Proc& p) -> Task<void> {
        Mem m{p};
        const RegisterId key = same_key ? "x" : "x" + p.id().str();
        for (int i = 0; i < steps; ++i) {
            co_await m.write(key, p.id().str());
        }
    };
    return prog;
}

}  // namespace

TEST(Explore, SingleProcessSingleHistory)
{
    std::uint64_t runs = 0;
    const auto stats = explore(writers(1, 3, true), {}, [&](const RunView&) { ++runs; });
    EXPECT_EQ(runs, 1u);
    EXPECT_EQ(stats.distinct_histories, 1u);
}

TEST(Explore, TwoByTwoGivesSixSchedules)
{
    std::set<Schedule> schedules;
    const auto stats = explore(writers(2, 2, true), {.reduce = false},
                               [&](const RunView& r) { schedules.insert(r.world.schedule()); });
    EXPECT_EQ(stats.runs, 6u);
    EXPECT_EQ(schedules.size(), 6u);
}

TEST(Explore, ReductionCollapsesIndependentSteps)
{
    const auto stats = explore(writers(2, 2, false), {}, [](const RunView&) {});
    EXPECT_EQ(stats.runs, 1u);
    const auto conflicting = explore(writers(2, 2, true), {}, [](const RunView&) {});
    EXPECT_EQ(conflicting.runs, 6u);
}

TEST(Explore, BoundCompletesSoloAndCountsTruncation)
{
    const auto stats = explore(writers(2, 3, true), {.max_steps = 2, .reduce = false}, [](const RunView& r) {
        EXPECT_TRUE(r.truncated);
        EXPECT_TRUE(r.world.quiescent());
    });
    EXPECT_EQ(stats.runs, 4u);
    EXPECT_EQ(stats.truncated, 4u);
}

TEST(Explore, ReplayIsDeterministic)
{
    Program prog = writers(3, 2, true);
    auto a = run_random(prog, 7);
    auto b = replay(prog, a->schedule());
    EXPECT_EQ(a->memory().peek("x"), b->memory().peek("x"));
    EXPECT_EQ(a->schedule(), b->schedule());
}

TEST(Explore, SplitterOutcomeSet)
{
    Program prog;
    prog.procs = 2;
    prog.body = [](Proc& p) -> Task<void> {
        co_await recorded(p, "s", "split", json::array(), split(Mem{p}, "s"), [](bool b) { return json(b); });
    };
    std::set<std::pair<bool, bool>> outcomes;
    explore(prog, {}, [&](const RunView& r) {
        std::map<std::uint32_t, bool> won;
        for (const auto& op : operations(r.world.history())) {
            won[op.proc.value] = op.res->get<bool>();
        }
        outcomes.emplace(won[0], won[1]);
    });
    EXPECT_EQ(outcomes, (std::set<std::pair<bool, bool>>{{true, false}, {false, true}, {false, false}}));
}
