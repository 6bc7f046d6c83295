#include <ofuc/bench.hpp>
#include <ofuc/suites.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace ofuc;

int run_check(const std::string& suite, const SuiteOptions& opt)
{
    SuiteReport r;
    if (suite == "splitter") {
        r = splitter_suite(opt);
    } else if (suite == "grafarius") {
        r = grafarius_suite(opt);
    } else if (suite == "racing") {
        r = racing_suite(opt);
    } else if (suite == "consensus") {
        r = consensus_suite(opt);
    } else if (suite == "runiv") {
        r = runiv_suite(opt);
    } else if (suite == "buniv") {
        r = buniv_suite(opt);
    } else if (suite == "abd") {
        r = abd_suite(opt);
    } else if (suite == "complexity") {
        r = complexity_suite(opt);
    } else {
        std::cerr << "unknown suite: " << suite << '\n';
        return 2;
    }
    std::cout << r << '\n';
    return r.ok() ? 0 : 1;
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) {
        out.push_back(item);
    }
    return out;
}

// Default per-process operations for `explore`.
std::vector<std::string> default_ops(const std::string& object, std::uint32_t p)
{
    const auto v = std::to_string(p + 1);
    if (object == "consensus") {
        return {"propose v" + v};
    }
    if (object == "counter") {
        return {"inc", "read"};
    }
    if (object == "register") {
        return {"write " + v, "read"};
    }
    if (object == "queue") {
        return {"enq " + v, "deq"};
    }
    return {"cas 0 " + v, "read"};
}

struct ExploreArgs {
    std::string object = "cas";
    std::string construction = "buniv";
    std::uint32_t procs = 2;
    std::string ops;
    std::size_t steps = 24;
    std::uint64_t max_runs = 0;
    std::uint64_t pick = 0;
    bool inner = false;
    std::string out;
};

// Explores the workload, checks every distinct history, and writes one:
// the first violation, else the `pick`-th distinct history (default last).
int run_explore(const ExploreArgs& a)
{
    Workload w;
    w.object = "o";
    if (a.object == "consensus") {
        w.construction = Construction::consensus;
    } else {
        w.construction = parse_construction(a.construction);
        w.type = a.object;
    }
    const auto per_proc = split(a.ops, '|');
    for (std::uint32_t p = 0; p < a.procs; ++p) {
        w.ops[p] = p < per_proc.size() && !per_proc[p].empty() ? split(per_proc[p], ',') : default_ops(a.object, p);
    }
    Program prog;
    prog.procs = a.procs;
    prog.body = workload_body(w);
    prog.trace_inner = a.inner;
    const auto model = workload_model(w);

    ExploreBounds bounds;
    bounds.max_steps = a.steps;
    bounds.max_runs = a.max_runs;
    std::uint64_t distinct = 0;
    std::uint64_t violations = 0;
    History chosen;
    Schedule chosen_schedule;
    const auto stats = explore(prog, bounds, [&](const RunView& v) {
        if (!v.fresh) {
            return;
        }
        ++distinct;
        const bool ok = check_linearizable(operations(v.world.history(), "o"), *model).ok();
        if (!ok && violations++ == 0) {
            chosen = v.world.history();
            chosen_schedule = v.world.schedule();
        } else if (violations == 0 && (a.pick == 0 || distinct == a.pick)) {
            chosen = v.world.history();
            chosen_schedule = v.world.schedule();
        }
    });
    std::cout << "runs=" << stats.runs << " distinct=" << stats.distinct_histories << " truncated=" << stats.truncated
              << " pruned=" << stats.pruned << " violations=" << violations
              << (stats.incomplete ? " (stopped at --max-runs)" : "") << '\n';
    std::cout << "written schedule: " << detail::describe(chosen_schedule) << '\n';
    if (!a.out.empty()) {
        std::ofstream out(a.out);
        if (!out) {
            throw std::runtime_error("cannot write " + a.out);
        }
        write_jsonl(out, chosen);
    }
    return violations == 0 ? 0 : 1;
}

int run_lin(const std::string& path, const std::string& spec, std::string obj, std::uint64_t budget)
{
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    const auto h = read_jsonl(in);
    if (spec == "registers") {
        std::string key;
        const bool ok = registers_linearizable(h, &key);
        std::cout << (ok ? "accept" : "reject: register " + key) << '\n';
        return ok ? 0 : 1;
    }
    if (obj.empty()) {
        for (const auto& e : h) {
            if (e.obj.find(':') == std::string::npos) {
                obj = e.obj;
                break;
            }
        }
    }
    const auto ops = operations(h, obj);
    std::unique_ptr<Model> model;
    if (spec == "consensus") {
        model = std::make_unique<ConsensusModel>();
    } else if (spec == "register-bytes") {
        model = std::make_unique<RegisterModel>(register_init(ops));
    } else {
        model = with_builtin_type(spec, [](auto type) -> std::unique_ptr<Model> {
            return std::make_unique<SerialModel<decltype(type)>>(type);
        });
    }
    const auto r = check_linearizable(ops, *model, budget);
    std::cout << to_string(r.verdict) << " obj=" << obj << " ops=" << ops.size() << " explored=" << r.explored;
    if (r.ok()) {
        std::cout << " witness=";
        for (std::size_t i = 0; i < r.witness.size(); ++i) {
            std::cout << (i ? "," : "") << r.witness[i];
        }
    }
    std::cout << '\n';
    return r.ok() ? 0 : r.verdict == Verdict::reject ? 1 : 2;
}

int run_sim(const std::string& path, const std::string& out_path, const std::string& regs_path, bool inner)
{
    const auto s = load_scenario(path);
    const auto r = run_scenario(s, inner);
    std::string key;
    const bool regs_ok = registers_linearizable(r.registers, &key);
    Workload w;
    w.construction = s.construction;
    w.type = s.type;
    const bool app_ok = check_linearizable(operations(r.history, "o"), *workload_model(w)).ok() &&
                        check_linearizable(operations(r.history, "c"), ConsensusModel{}).ok();
    std::cout << "completed=" << (r.completed ? "yes" : "no") << " end_time=" << r.end_time
              << " register_ops=" << r.stats.register_ops << " delivered=" << r.stats.delivered
              << " dropped=" << r.stats.dropped << " registers_linearizable=" << (regs_ok ? "yes" : "no (" + key + ")")
              << " object_linearizable=" << (app_ok ? "yes" : "no") << '\n';
    const auto write = [](const std::string& p, const History& h) {
        if (p.empty()) {
            return;
        }
        std::ofstream out(p);
        if (!out) {
            throw std::runtime_error("cannot write " + p);
        }
        write_jsonl(out, h);
    };
    write(out_path, r.history);
    write(regs_path, r.registers);
    return r.completed && regs_ok && app_ok ? 0 : 1;
}

// "1..20", "1,2,4" or a mix ("1..4,8").
std::vector<std::uint32_t> parse_counts(const std::string& s)
{
    std::vector<std::uint32_t> out;
    for (const auto& part : split(s, ',')) {
        const auto dots = part.find("..");
        if (dots == std::string::npos) {
            out.push_back(static_cast<std::uint32_t>(std::stoul(part)));
            continue;
        }
        const auto lo = static_cast<std::uint32_t>(std::stoul(part.substr(0, dots)));
        const auto hi = static_cast<std::uint32_t>(std::stoul(part.substr(dots + 2)));
        for (auto n = lo; n <= hi; ++n) {
            out.push_back(n);
        }
    }
    if (out.empty()) {
        throw std::invalid_argument("empty list: " + s);
    }
    return out;
}

int run_bench(ConvoyConfig cfg, const std::string& Ms, const std::string& clients, const std::string& out_path)
{
    cfg.Ms = parse_counts(Ms);
    cfg.clients = parse_counts(clients);
    const auto rep = bench_convoy(cfg);
    std::cout << "lambda_s=" << rep.lambda_s << " lambda_f=" << rep.lambda_f << '\n';
    for (const auto& f : rep.fits) {
        std::cout << "M=" << f.M << " slope=" << f.slope << " model_slope=" << f.predicted_slope
                  << " relative_error=" << f.relative_error << " decreases=" << f.decreases << '\n';
    }
    if (out_path.empty() || out_path == "-") {
        write_csv(std::cout, rep);
    } else {
        std::ofstream out(out_path);
        if (!out) {
            throw std::runtime_error("cannot write " + out_path);
        }
        write_csv(out, rep);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"ofuc: obstruction-free universal constructions over registers"};
    app.require_subcommand(1);

    std::string suite;
    SuiteOptions opt;
    auto* check = app.add_subcommand("check", "Run a property suite");
    check->add_option("suite", suite, "splitter | grafarius | racing | consensus | runiv | buniv | abd | complexity")
        ->required();
    check->add_option("--procs", opt.procs, "Processes (0: suite default)");
    check->add_option("--steps", opt.steps, "Interleaved steps per explored run");
    check->add_option("--laps", opt.laps, "Lap / enter bound");
    check->add_option("--preemptions", opt.preemptions, "Preemption bound of the full-depth pass");
    check->add_option("--ops", opt.ops, "Operations per run (0: suite default)");
    check->add_option("--seeds", opt.seeds, "Random schedules (0: suite default)");

    ExploreArgs ex;
    auto* exp = app.add_subcommand("explore", "Enumerate interleavings of a workload and check each history");
    exp->add_option("--object", ex.object, "cas | counter | register | queue | consensus");
    exp->add_option("--construction", ex.construction, "runiv | buniv");
    exp->add_option("--procs", ex.procs, "Processes");
    exp->add_option("--ops", ex.ops, "Per-process operations, e.g. 'cas 0 1,read|inc'");
    exp->add_option("--steps", ex.steps, "Interleaved steps per run");
    exp->add_option("--max-runs", ex.max_runs, "Stop after this many runs (0: no limit)");
    exp->add_option("--pick", ex.pick, "Write the n-th distinct history (default: last; a violation wins)");
    exp->add_flag("--inner", ex.inner, "Also record inner consensus calls");
    exp->add_option("--out", ex.out, "History JSONL");

    std::string lin_path;
    std::string lin_spec = "cas";
    std::string lin_obj;
    std::uint64_t lin_budget = 2'000'000;
    auto* lin = app.add_subcommand("lin", "Check a history for linearizability");
    lin->add_option("history", lin_path, "History JSONL")->required();
    lin->add_option("--spec", lin_spec, "counter | register | cas | queue | consensus | register-bytes | registers");
    lin->add_option("--obj", lin_obj, "Object to check (default: first top-level object)");
    lin->add_option("--budget", lin_budget, "Search nodes before answering unknown");

    std::string sim_path;
    std::string sim_out;
    std::string sim_regs;
    bool sim_inner = false;
    auto* sim = app.add_subcommand("sim", "Run a scenario over the simulated network");
    sim->add_option("scenario", sim_path, "Scenario JSON")->required();
    sim->add_option("--out", sim_out, "Object history JSONL");
    sim->add_option("--registers", sim_regs, "Register history JSONL");
    sim->add_flag("--inner", sim_inner, "Also record inner consensus calls");

    ConvoyConfig convoy;
    std::string bench_name;
    std::string bench_Ms = "10,20,40";
    std::string bench_clients = "1..20";
    std::string bench_out;
    auto* bench = app.add_subcommand("bench", "Latency sweeps");
    bench->add_option("name", bench_name, "convoy")->required()->check(CLI::IsMember({"convoy"}));
    bench->add_option("--M", bench_Ms, "Argument ranges, e.g. 10,20,40");
    bench->add_option("--clients", bench_clients, "Client counts, e.g. 1..20");
    bench->add_option("--servers", convoy.n_servers, "Servers");
    bench->add_option("--ops", convoy.ops_per_client, "Calls per client");
    bench->add_option("--repeats", convoy.repeats, "Runs averaged per point");
    bench->add_option("--seed", convoy.seed, "Seed");
    bench->add_option("--out", bench_out, "CSV path ('-' for stdout)");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*check) {
            return run_check(suite, opt);
        }
        if (*exp) {
            return run_explore(ex);
        }
        if (*lin) {
            return run_lin(lin_path, lin_spec, lin_obj, lin_budget);
        }
        if (*sim) {
            return run_sim(sim_path, sim_out, sim_regs, sim_inner);
        }
        if (*bench) {
            return run_bench(convoy, bench_Ms, bench_clients, bench_out);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
