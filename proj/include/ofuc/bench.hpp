#pragma once

// Closed-loop compare-and-swap latency over the simulated network, against
// the convoy approximation  lat(n) = λ_f(1-ρ) + λ_s·ρ·n,  ρ = 1/M.
//
// Each client repeatedly issues cas(u, v) with u, v uniform in [0, M) on one
// buniv replica. λ_s and λ_f are the solo latencies of a successful and a
// failed call; latency is simulated time from invocation to return.

#include <ofuc/netsim.hpp>
#include <ofuc/serial_types.hpp>
#include <ofuc/universal.hpp>

#include <cmath>
#include <stdexcept>
#include <tuple>
#include <cstdint>
#include <memory>
#include <ostream>
#include <random>
#include <string>
#include <vector>

namespace ofuc {

struct ConvoyConfig {
    std::uint32_t n_servers = 3;
    double mean_delay = 1.0;
    std::uint64_t seed = 1;
    std::vector<std::uint32_t> Ms{10, 20, 40};
    std::vector<std::uint32_t> clients{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20};
    // Calls per client, the first `warmup` of which are not measured.
    std::uint32_t ops_per_client = 200;
    std::uint32_t warmup = 20;
    // Independent runs averaged per (M, n).
    std::uint32_t repeats = 3;
    // Solo calls per outcome when measuring λ_s and λ_f.
    std::uint32_t solo_samples = 200;
};

struct ConvoyPoint {
    std::uint32_t M = 0;
    std::uint32_t n = 0;
    double latency = 0;
    // Mean latency of the calls that returned true / false.
    double success_latency = 0;
    double failure_latency = 0;
    double success_ratio = 0;
    std::uint64_t ops = 0;
};

struct ConvoyFit {
    std::uint32_t M = 0;
    double slope = 0;
    double predicted_slope = 0;
    double relative_error = 0;
    // Points where latency went down as n grew.
    std::uint32_t decreases = 0;
};

struct ConvoyReport {
    double lambda_s = 0;
    double lambda_f = 0;
    std::vector<ConvoyPoint> points;
    std::vector<ConvoyFit> fits;

    bool within(double tolerance) const
    {
        for (const auto& f : fits) {
            if (!(f.relative_error <= tolerance)) {
                return false;
            }
        }
        return !fits.empty();
    }
};

namespace detail {

struct Sample {
    double latency = 0;
    bool success = false;
    bool measured = false;
};

// A client issuing the given calls back to back; appends one sample per call.
inline Proc::Body cas_client(NetSim* sim, std::vector<std::vector<std::pair<std::int64_t, std::int64_t>>> calls,
                             std::vector<std::vector<Sample>>* out, std::uint32_t warmup)
{
    return [sim, calls = std::move(calls), out, warmup](Proc& p) -> Task<void> {
        const auto& mine = calls.at(p.id().value);
        auto& samples = out->at(p.id().value);
        for (std::size_t i = 0; i < mine.size(); ++i) {
            const OpCall op{"cas", {mine[i].first, mine[i].second}};
            const double start = sim->now();
            const auto r = co_await invoke_buniv(Mem{p}, "o", CasType{}, op);
            Sample s;
            s.latency = sim->now() - start;
            s.success = r && *r == json(true);
            s.measured = i >= warmup;
            samples.push_back(s);
        }
    };
}

inline std::vector<std::vector<Sample>> run_clients(const ConvoyConfig& cfg, std::uint64_t seed,
                                                   std::vector<std::vector<std::pair<std::int64_t, std::int64_t>>> calls,
                                                   std::uint32_t warmup)
{
    NetConfig net;
    net.n_servers = cfg.n_servers;
    net.mean_delay = cfg.mean_delay;
    net.seed = seed;
    NetSim sim{net};
    std::vector<std::vector<Sample>> out(calls.size());
    const auto body = cas_client(&sim, std::move(calls), &out, warmup);
    for (std::size_t i = 0; i < out.size(); ++i) {
        sim.add_process(body);
    }
    if (!sim.run()) {
        throw std::runtime_error("convoy: clients did not finish");
    }
    return out;
}

}  // namespace detail

// Solo latencies (λ_s, λ_f): one client alternating a call that succeeds and
// one that fails.
inline std::pair<double, double> solo_latencies(const ConvoyConfig& cfg)
{
    std::vector<std::pair<std::int64_t, std::int64_t>> calls;
    for (std::uint32_t i = 0; i < cfg.solo_samples + 2; ++i) {
        const std::int64_t cur = i % 2;
        calls.emplace_back(cur, 1 - cur);
        calls.emplace_back(cur, cur + 5);
    }
    const auto out = detail::run_clients(cfg, cfg.seed, {calls}, 4);
    double s = 0, f = 0;
    std::uint64_t ns = 0, nf = 0;
    for (const auto& x : out[0]) {
        if (!x.measured) {
            continue;
        }
        (x.success ? s : f) += x.latency;
        (x.success ? ns : nf) += 1;
    }
    return {s / static_cast<double>(ns), f / static_cast<double>(nf)};
}

inline ConvoyPoint convoy_point(const ConvoyConfig& cfg, std::uint32_t M, std::uint32_t n)
{
    ConvoyPoint pt{M, n};
    double total = 0;
    double won = 0;
    std::uint64_t wins = 0;
    for (std::uint32_t rep = 0; rep < cfg.repeats; ++rep) {
        std::mt19937_64 rng{cfg.seed * 1'000'003 + M * 1009 + n * 17 + rep};
        std::uniform_int_distribution<std::int64_t> arg{0, static_cast<std::int64_t>(M) - 1};
        std::vector<std::vector<std::pair<std::int64_t, std::int64_t>>> calls(n);
        for (auto& c : calls) {
            for (std::uint32_t i = 0; i < cfg.ops_per_client; ++i) {
                const auto u = arg(rng);
                const auto v = arg(rng);
                c.emplace_back(u, v);
            }
        }
        const auto out = detail::run_clients(cfg, rng(), std::move(calls), cfg.warmup);
        for (const auto& client : out) {
            for (const auto& x : client) {
                if (x.measured) {
                    total += x.latency;
                    won += x.success ? x.latency : 0.0;
                    wins += x.success ? 1 : 0;
                    ++pt.ops;
                }
            }
        }
    }
    pt.latency = total / static_cast<double>(pt.ops);
    pt.success_ratio = static_cast<double>(wins) / static_cast<double>(pt.ops);
    pt.success_latency = wins ? won / static_cast<double>(wins) : 0.0;
    pt.failure_latency = wins < pt.ops ? (total - won) / static_cast<double>(pt.ops - wins) : 0.0;
    return pt;
}

inline ConvoyReport bench_convoy(const ConvoyConfig& cfg)
{
    ConvoyReport rep;
    std::tie(rep.lambda_s, rep.lambda_f) = solo_latencies(cfg);
    for (const auto M : cfg.Ms) {
        std::vector<ConvoyPoint> row;
        for (const auto n : cfg.clients) {
            row.push_back(convoy_point(cfg, M, n));
        }
        ConvoyFit fit{M};
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (const auto& pt : row) {
            sx += pt.n;
            sy += pt.latency;
            sxx += static_cast<double>(pt.n) * pt.n;
            sxy += pt.n * pt.latency;
        }
        const auto k = static_cast<double>(row.size());
        fit.slope = row.size() > 1 ? (k * sxy - sx * sy) / (k * sxx - sx * sx) : 0.0;
        fit.predicted_slope = rep.lambda_s / M;
        fit.relative_error = std::abs(fit.slope - fit.predicted_slope) / fit.predicted_slope;
        for (std::size_t i = 1; i < row.size(); ++i) {
            fit.decreases += row[i].latency < row[i - 1].latency ? 1 : 0;
        }
        rep.fits.push_back(fit);
        rep.points.insert(rep.points.end(), row.begin(), row.end());
    }
    return rep;
}

inline void write_csv(std::ostream& out, const ConvoyReport& rep)
{
    out << "M,n,latency,model,success_latency,failure_latency,success_ratio,ops\n";
    for (const auto& pt : rep.points) {
        const double rho = 1.0 / pt.M;
        const double model = rep.lambda_f * (1 - rho) + rep.lambda_s * rho * pt.n;
        out << pt.M << ',' << pt.n << ',' << pt.latency << ',' << model << ',' << pt.success_latency << ','
            << pt.failure_latency << ',' << pt.success_ratio << ',' << pt.ops << '\n';
    }
}

}  // namespace ofuc
