#include <ofuc/scenario.hpp>

#include <gtest/gtest.h>

using namespace ofuc;

namespace {

Task<void> write_then_read(Proc& p, Bytes v, Bytes* out)
{
    Mem m{p};
    co_await m.write("r", v);
    *out = co_await m.read("r", "init");
}

}  // namespace

TEST(NetConfig, QuorumAndCrashBudget)
{
    EXPECT_EQ((NetConfig{.n_servers = 3}.quorum()), 2u);
    EXPECT_EQ((NetConfig{.n_servers = 3}.f_max()), 1u);
    EXPECT_EQ((NetConfig{.n_servers = 5}.quorum()), 3u);
    EXPECT_EQ((NetConfig{.n_servers = 5}.f_max()), 2u);
}

TEST(Abd, WriteThenRead)
{
    NetSim sim{NetConfig{.n_servers = 3, .seed = 1}};
    Bytes got;
    sim.add_process([&got](Proc& p) { return write_then_read(p, "v", &got); });
    EXPECT_TRUE(sim.run());
    EXPECT_EQ(got, "v");
    EXPECT_TRUE(registers_linearizable(sim.register_history()));
}

TEST(Abd, FreshRegisterReadsInit)
{
    NetSim sim{NetConfig{.n_servers = 3, .seed = 1}};
    Bytes got;
    sim.add_process([&got](Proc& p) -> Task<void> { got = co_await Mem{p}.read("fresh", "init"); });
    EXPECT_TRUE(sim.run());
    EXPECT_EQ(got, "init");
}

TEST(Abd, CrashMidWriteStillCompletes)
{
    NetSim sim{NetConfig{.n_servers = 3, .seed = 3}};
    Bytes got;
    sim.add_process([&got](Proc& p) { return write_then_read(p, "v", &got); });
    sim.crash_at(0.5, 1);
    EXPECT_TRUE(sim.run());
    EXPECT_EQ(got, "v");
}

TEST(Abd, TooManyCrashesStall)
{
    NetSim sim{NetConfig{.n_servers = 3, .seed = 3}};
    Bytes got;
    sim.add_process([&got](Proc& p) { return write_then_read(p, "v", &got); });
    sim.crash_at(0, 0);
    sim.crash_at(0, 1);
    EXPECT_FALSE(sim.run());
    EXPECT_EQ(got, "");
}

TEST(Abd, EmptyQueueIsQuiescent)
{
    NetSim sim{NetConfig{}};
    EXPECT_FALSE(sim.step());
    EXPECT_TRUE(sim.run());
}

TEST(Scenario, ParseAndRunDeterministically)
{
    const auto j = json::parse(R"({"n_servers": 3, "seed": 9, "crashes": [[4.0, 2]],
        "workload": [[0, 0, "cas 0 1"], [0, 1, "cas 0 2"], [1, 0, "read"], [2, 1, "read"]]})");
    const auto s = parse_scenario(j);
    EXPECT_EQ(s.workload.size(), 4u);
    const auto a = run_scenario(s);
    const auto b = run_scenario(s);
    EXPECT_TRUE(a.completed);
    EXPECT_EQ(fingerprint(a.history), fingerprint(b.history));
    EXPECT_EQ(fingerprint(a.registers), fingerprint(b.registers));
    EXPECT_TRUE(check_linearizable(a.history, SerialModel<CasType>{}).ok());
    EXPECT_TRUE(registers_linearizable(a.registers));
}

TEST(Scenario, RejectsTooManyCrashes)
{
    const auto j = json::parse(R"({"n_servers": 3, "crashes": [[1, 0], [2, 1]], "workload": []})");
    EXPECT_THROW(parse_scenario(j), std::invalid_argument);
}

TEST(Scenario, ConsensusOverNetsim)
{
    const auto j = json::parse(R"({"n_servers": 5, "seed": 4, "construction": "consensus", "crashes": [[3, 4], [6, 0]],
        "workload": [[0, 0, "propose a"], [0, 1, "propose b"], [0, 2, "propose c"]]})");
    const auto r = run_scenario(parse_scenario(j));
    ASSERT_TRUE(r.completed);
    const auto ops = operations(r.history);
    ASSERT_EQ(ops.size(), 3u);
    for (const auto& op : ops) {
        EXPECT_EQ(*op.res, *ops[0].res);
    }
    EXPECT_TRUE(check_linearizable(ops, ConsensusModel{}).ok());
}
