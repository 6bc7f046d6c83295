#pragma once

// Netsim scenario files:
//
//   {"n_servers": 3, "seed": 7,
//    "crashes":  [[12.5, 0]],
//    "workload": [[0, 0, "cas 0 1"], [0, 1, "cas 0 2"], [5, 0, "read"]]}
//
// Optional keys: "construction" (consensus | runiv | buniv, default buniv),
// "object" (serial type, default cas), "mean_delay" (default 1),
// "max_time" (default 1e6). Tuples may also be objects with the keys
// time/server and time/process/op.

#include <ofuc/netsim.hpp>
#include <ofuc/workload.hpp>

#include <fstream>
#include <map>
#include <string>
#include <tuple>
#include <vector>

namespace ofuc {

struct Scenario {
    NetConfig net;
    std::vector<std::pair<double, std::uint32_t>> crashes;
    std::vector<std::tuple<double, std::uint32_t, std::string>> workload;
    Construction construction = Construction::buniv;
    std::string type = "cas";
    double max_time = 1e6;
};

namespace detail {

inline std::uint32_t parse_process(const json& j)
{
    return j.is_string() ? parse_process_id(j.get<std::string>()).value : j.get<std::uint32_t>();
}

}  // namespace detail

inline Scenario parse_scenario(const json& j)
{
    Scenario s;
    s.net.n_servers = j.at("n_servers").get<std::uint32_t>();
    s.net.seed = j.value("seed", std::uint64_t{1});
    s.net.mean_delay = j.value("mean_delay", 1.0);
    s.max_time = j.value("max_time", 1e6);
    s.construction = parse_construction(j.value("construction", std::string{"buniv"}));
    s.type = j.value("object", std::string{"cas"});
    for (const auto& c : j.value("crashes", json::array())) {
        if (c.is_array()) {
            s.crashes.emplace_back(c.at(0).get<double>(), c.at(1).get<std::uint32_t>());
        } else {
            s.crashes.emplace_back(c.at("time").get<double>(), c.at("server").get<std::uint32_t>());
        }
    }
    for (const auto& w : j.at("workload")) {
        if (w.is_array()) {
            s.workload.emplace_back(w.at(0).get<double>(), detail::parse_process(w.at(1)), w.at(2).get<std::string>());
        } else {
            s.workload.emplace_back(w.at("time").get<double>(), detail::parse_process(w.at("process")),
                                    w.at("op").get<std::string>());
        }
    }
    if (s.crashes.size() > s.net.f_max()) {
        throw std::invalid_argument("scenario: " + std::to_string(s.crashes.size()) + " crashes exceed f_max = " +
                                    std::to_string(s.net.f_max()));
    }
    return s;
}

inline Scenario load_scenario(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    return parse_scenario(json::parse(in));
}

struct SimResult {
    // Every operation returned before max_time.
    bool completed = false;
    History history;
    History registers;
    NetStats stats;
    double end_time = 0;
};

// Each process issues its operations in time order; an operation starts at
// its scheduled time or when the previous one returns, whichever is later.
inline SimResult run_scenario(const Scenario& s, bool trace_inner = false)
{
    Workload w;
    w.construction = s.construction;
    w.type = s.type;
    std::map<std::uint32_t, std::vector<std::pair<double, std::string>>> per_proc;
    for (const auto& [time, proc, op] : s.workload) {
        per_proc[proc].emplace_back(time, op);
    }
    std::uint32_t procs = per_proc.empty() ? 0 : per_proc.rbegin()->first + 1;
    std::map<std::uint32_t, std::vector<double>> times;
    for (auto& [proc, ops] : per_proc) {
        std::stable_sort(ops.begin(), ops.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        for (const auto& [time, op] : ops) {
            w.ops[proc].push_back(op);
            times[proc].push_back(time);
        }
    }

    NetSim sim{s.net};
    sim.recorder().trace_inner = trace_inner;
    const auto body = workload_body(w);
    for (std::uint32_t p = 0; p < procs; ++p) {
        sim.add_process(body, times[p]);
    }
    for (const auto& [time, server] : s.crashes) {
        sim.crash_at(time, server);
    }
    SimResult r;
    r.completed = sim.run(s.max_time);
    r.history = sim.history();
    r.registers = sim.register_history();
    r.stats = sim.stats();
    r.end_time = sim.now();
    return r;
}

// Linearizability of every register in a register-level history.
inline bool registers_linearizable(const History& h, std::string* failed_key = nullptr)
{
    std::map<std::string, std::vector<Event>> by_key;
    for (const auto& e : h) {
        by_key[e.obj].push_back(e);
    }
    for (const auto& [key, events] : by_key) {
        const auto ops = operations(events);
        if (!check_linearizable(ops, RegisterModel{register_init(ops)}).ok()) {
            if (failed_key) {
                *failed_key = key;
            }
            return false;
        }
    }
    return true;
}

}  // namespace ofuc
