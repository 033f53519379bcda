// Monte Carlo oracle for the drawdown-capped put under an arbitrary stopping
// policy. Paths are exact at grid points (Gaussian increments, no Euler
// error); the drawdown trigger and any fixed barrier are monitored at grid
// times only, which makes the estimator's bias one-sided and shrinking in dt.
//
// Reproducibility contract: every path owns an RNG stream addressed by
// (base_seed, path_index) only, per-path results land in a preallocated
// vector, and reduction is a fixed-shape pairwise sum. The estimate is
// therefore bitwise identical for any thread count.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "ddput/pricing.hpp"

namespace ddput {

// --- RNG ---------------------------------------------------------------

namespace rng {

// Finalizer of the SplitMix64 generator; full-avalanche 64-bit mix.
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

struct SplitMix64 {
    std::uint64_t s;
    std::uint64_t next() {
        s += 0x9E3779B97F4A7C15ULL;
        return mix64(s);
    }
};

// Stream for one path. The double mix decorrelates the per-path starting
// states; a plain additive offset would make neighbouring paths produce the
// same outputs shifted by a step.
inline SplitMix64 path_stream(std::uint64_t base_seed,
                              std::uint64_t path_index) {
    return {mix64(base_seed ^ mix64(path_index + 0x9E3779B97F4A7C15ULL))};
}

// Uniform in the open interval (0, 1), 53 usable bits.
inline double uniform01(SplitMix64& g) {
    return static_cast<double>(g.next() >> 11) * 0x1.0p-53 + 0x1.0p-54;
}

// Inverse standard normal CDF, Wichura's PPND16 (algorithm AS 241).
// Relative accuracy ~1e-15 over the full open interval.
inline double inverse_normal_cdf(double u) {
    static constexpr double a[8] = {
        3.3871328727963666080e0, 1.3314166789178437745e2,
        1.9715909503065514427e3, 1.3731693765509461125e4,
        4.5921953931549871457e4, 6.7265770927008700853e4,
        3.3430575583588128105e4, 2.5090809287301226727e3};
    static constexpr double b[8] = {
        1.0, 4.2313330701600911252e1, 6.8718700749205790830e2,
        5.3941960214247511077e3, 2.1213794301586595867e4,
        3.9307895800092710610e4, 2.8729085735721942674e4,
        5.2264952788528545610e3};
    static constexpr double cc[8] = {
        1.42343711074968357734e0, 4.63033784615654529590e0,
        5.76949722146069140550e0, 3.64784832476320460504e0,
        1.27045825245236838258e0, 2.41780725177450611770e-1,
        2.27238449892691845833e-2, 7.74545014278341407640e-4};
    static constexpr double d[8] = {
        1.0, 2.05319162663775882187e0, 1.67638483018380384940e0,
        6.89767334985100004550e-1, 1.48103976427480074590e-1,
        1.51986665636164571966e-2, 5.47593808499534494600e-4,
        1.05075007164441684324e-9};
    static constexpr double e[8] = {
        6.65790464350110377720e0, 5.46378491116411436990e0,
        1.78482653991729133580e0, 2.96560571828504891230e-1,
        2.65321895265761230930e-2, 1.24266094738807843860e-3,
        2.71155556874348757815e-5, 2.01033439929228813265e-7};
    static constexpr double f[8] = {
        1.0, 5.99832206555887937690e-1, 1.36929880922735805310e-1,
        1.48753612908506148525e-2, 7.86869131145613259100e-4,
        1.84631831751005468180e-5, 1.42151175831644588870e-7,
        2.04426310338993978564e-15};
    auto horner = [](const double (&k)[8], double t) {
        double s = k[7];
        for (int i = 6; i >= 0; --i) s = s * t + k[i];
        return s;
    };
    const double q = u - 0.5;
    if (std::abs(q) <= 0.425) {
        const double t = 0.180625 - q * q;
        return q * horner(a, t) / horner(b, t);
    }
    double t = q < 0.0 ? u : 1.0 - u;
    t = std::sqrt(-std::log(t));
    double val;
    if (t <= 5.0) {
        t -= 1.6;
        val = horner(cc, t) / horner(d, t);
    } else {
        t -= 5.0;
        val = horner(e, t) / horner(f, t);
    }
    return q < 0.0 ? -val : val;
}

inline double normal(SplitMix64& g) { return inverse_normal_cdf(uniform01(g)); }

}  // namespace rng

// --- configuration and results ------------------------------------------

struct McConfig {
    std::uint64_t n_paths = 100000;
    double dt = 1e-4;        // years
    double t_max = 0.0;      // years; 0 picks the default horizon below
    std::uint64_t base_seed = 1;
};

// Horizon making the discarded-tail bound e^{-r t_max} K less than 1e-4 K.
inline double default_t_max(const ModelParams& p) {
    return std::log(1e4) / p.r + 1.0;
}

inline double resolved_t_max(const ModelParams& p, const McConfig& cfg) {
    return cfg.t_max > 0.0 ? cfg.t_max : default_t_max(p);
}

inline void validate(const ModelParams& p, const McConfig& cfg) {
    validate(p);
    if (cfg.n_paths == 0)
        throw std::invalid_argument("McConfig: n_paths must be >= 1");
    if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt))
        throw std::invalid_argument("McConfig: dt must be finite and > 0");
    const double tm = resolved_t_max(p, cfg);
    if (!(tm >= cfg.dt))
        throw std::invalid_argument("McConfig: t_max must be >= dt");
}

enum class StopReason { Barrier, Drawdown, HorizonTruncated };

struct StopResult {
    double time;
    double x;
    StopReason reason;
};

// Either a fixed log barrier a (plus the always-armed drawdown trigger) or
// the drawdown trigger alone, i.e. the moving barrier x_bar - c.
struct StoppingPolicy {
    bool has_fixed_barrier;
    double barrier;

    static StoppingPolicy fixed(double a) { return {true, a}; }
    static StoppingPolicy drawdown_only() {
        return {false, -std::numeric_limits<double>::infinity()};
    }
    std::string describe() const {
        return has_fixed_barrier
                   ? "stop at log barrier " + std::to_string(barrier) +
                         " or drawdown"
                   : "stop at drawdown only";
    }
};

struct McEstimate {
    double mean = 0.0;
    std::optional<double> std_err;  // absent when n_paths == 1
    std::uint64_t n_effective = 0;
    std::uint64_t n_truncated = 0;
    double truncation_bound = 0.0;  // e^{-r t_max} K
    std::string policy;
};

namespace detail {

inline std::uint64_t horizon_steps(const ModelParams& p, const McConfig& cfg) {
    return static_cast<std::uint64_t>(
        std::ceil(resolved_t_max(p, cfg) / cfg.dt));
}

// Fixed-shape pairwise sum over [lo, hi); reduction order depends only on n.
inline double pairwise_sum(const std::vector<double>& v, std::size_t lo,
                           std::size_t hi) {
    const std::size_t n = hi - lo;
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += v[i];
        return s;
    }
    const std::size_t mid = lo + n / 2;
    return pairwise_sum(v, lo, mid) + pairwise_sum(v, mid, hi);
}

inline double pairwise_sum(const std::vector<double>& v) {
    return pairwise_sum(v, 0, v.size());
}

inline unsigned resolve_threads(unsigned n_threads, std::uint64_t n_paths) {
    unsigned n = n_threads > 0 ? n_threads : std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    if (n > n_paths) n = static_cast<unsigned>(n_paths);
    return n;
}

// Runs body(path_index) over [0, n_paths) on the requested thread count.
template <class Body>
void parallel_paths(std::uint64_t n_paths, unsigned n_threads,
                    const Body& body) {
    const unsigned n = resolve_threads(n_threads, n_paths);
    if (n == 1) {
        for (std::uint64_t i = 0; i < n_paths; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(n);
    const std::uint64_t chunk = (n_paths + n - 1) / n;
    for (unsigned t = 0; t < n; ++t) {
        const std::uint64_t lo = t * chunk;
        const std::uint64_t hi = std::min(n_paths, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&body, lo, hi] {
            for (std::uint64_t i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

inline McEstimate reduce_estimate(const ModelParams& p, const McConfig& cfg,
                                  const std::vector<double>& payoffs,
                                  std::uint64_t n_truncated,
                                  const std::string& policy) {
    McEstimate est;
    const auto n = payoffs.size();
    est.mean = pairwise_sum(payoffs) / static_cast<double>(n);
    if (n > 1) {
        std::vector<double> sq(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double d = payoffs[i] - est.mean;
            sq[i] = d * d;
        }
        const double var = pairwise_sum(sq) / static_cast<double>(n - 1);
        est.std_err = std::sqrt(var / static_cast<double>(n));
    }
    est.n_effective = n;
    est.n_truncated = n_truncated;
    est.truncation_bound =
        std::exp(-p.r * resolved_t_max(p, cfg)) * p.strike_k;
    est.policy = policy;
    return est;
}

}  // namespace detail

// Simulates one path on the time grid and reports the first grid time at
// which the policy stops: drawdown trigger first on ties, then the fixed
// barrier, with horizon truncation as a reported outcome.
inline StopResult simulate_stop(const ModelParams& p, const MarketState& s,
                                const StoppingPolicy& policy,
                                const McConfig& cfg,
                                std::uint64_t path_index) {
    const double mu = (p.r - 0.5 * p.sigma * p.sigma) * cfg.dt;
    const double sd = p.sigma * std::sqrt(cfg.dt);
    double x = s.x;
    double xb = s.x_bar;
    if (xb - x >= p.c) return {0.0, x, StopReason::Drawdown};
    if (policy.has_fixed_barrier && x <= policy.barrier)
        return {0.0, x, StopReason::Barrier};
    rng::SplitMix64 g = rng::path_stream(cfg.base_seed, path_index);
    const std::uint64_t steps = detail::horizon_steps(p, cfg);
    for (std::uint64_t k = 1; k <= steps; ++k) {
        x += mu + sd * rng::normal(g);
        if (x > xb) xb = x;
        if (xb - x >= p.c)
            return {static_cast<double>(k) * cfg.dt, x, StopReason::Drawdown};
        if (policy.has_fixed_barrier && x <= policy.barrier)
            return {static_cast<double>(k) * cfg.dt, x, StopReason::Barrier};
    }
    return {static_cast<double>(steps) * cfg.dt, x,
            StopReason::HorizonTruncated};
}

inline McEstimate mc_price(const ModelParams& p, const MarketState& s,
                           const StoppingPolicy& policy, const McConfig& cfg,
                           unsigned n_threads = 0) {
    validate(p, s);
    validate(p, cfg);
    std::vector<double> payoffs(cfg.n_paths);
    std::vector<unsigned char> truncated(cfg.n_paths, 0);
    detail::parallel_paths(cfg.n_paths, n_threads, [&](std::uint64_t i) {
        const StopResult r = simulate_stop(p, s, policy, cfg, i);
        payoffs[i] = std::exp(-p.r * r.time) * payoff(p, r.x);
        truncated[i] = r.reason == StopReason::HorizonTruncated ? 1 : 0;
    });
    std::uint64_t n_trunc = 0;
    for (auto t : truncated) n_trunc += t;
    return detail::reduce_estimate(p, cfg, payoffs, n_trunc,
                                   policy.describe());
}

// --- barrier search with common random numbers ---------------------------

struct BarrierSearchResult {
    double best_barrier = 0.0;
    std::size_t best_index = 0;
    std::vector<double> candidates;
    std::vector<McEstimate> estimates;
};

// All candidate barriers are evaluated on the same paths: one stream per
// path, one pass per path, each candidate dropping out as the path first
// touches it (or the common drawdown trigger fires for all of them at once).
inline BarrierSearchResult barrier_search(const ModelParams& p,
                                          const MarketState& s,
                                          const McConfig& cfg,
                                          const std::vector<double>& grid,
                                          unsigned n_threads = 0) {
    validate(p, s);
    validate(p, cfg);
    if (grid.empty())
        throw std::invalid_argument("barrier_search: candidate grid is empty");
    const double cap = std::min(s.x, std::log(p.strike_k));
    for (double a : grid)
        if (!(a < cap))
            throw std::invalid_argument(
                "barrier_search: candidates must be < min(x, log K)");

    const std::size_t n_cand = grid.size();
    // Candidate indices ordered by descending barrier: as a path makes a new
    // low it crosses them in this order, so one cursor per path suffices.
    std::vector<std::size_t> order(n_cand);
    for (std::size_t j = 0; j < n_cand; ++j) order[j] = j;
    std::sort(order.begin(), order.end(),
              [&grid](std::size_t a, std::size_t b) { return grid[a] > grid[b]; });

    const std::uint64_t steps = detail::horizon_steps(p, cfg);
    const double mu = (p.r - 0.5 * p.sigma * p.sigma) * cfg.dt;
    const double sd = p.sigma * std::sqrt(cfg.dt);
    std::vector<std::vector<double>> payoffs(
        n_cand, std::vector<double>(cfg.n_paths));
    std::vector<std::vector<unsigned char>> truncated(
        n_cand, std::vector<unsigned char>(cfg.n_paths, 0));

    detail::parallel_paths(cfg.n_paths, n_threads, [&](std::uint64_t i) {
        double x = s.x;
        double xb = s.x_bar;
        std::size_t cursor = 0;
        auto settle_rest = [&](double t, double val, bool trunc) {
            for (std::size_t j = cursor; j < n_cand; ++j) {
                payoffs[order[j]][i] = std::exp(-p.r * t) * val;
                truncated[order[j]][i] = trunc ? 1 : 0;
            }
            cursor = n_cand;
        };
        if (xb - x >= p.c) {
            settle_rest(0.0, payoff(p, x), false);
            return;
        }
        while (cursor < n_cand && x <= grid[order[cursor]]) {
            payoffs[order[cursor]][i] = payoff(p, x);
            ++cursor;
        }
        if (cursor < n_cand) {
            rng::SplitMix64 g = rng::path_stream(cfg.base_seed, i);
            for (std::uint64_t k = 1; k <= steps; ++k) {
                x += mu + sd * rng::normal(g);
                if (x > xb) xb = x;
                const double t = static_cast<double>(k) * cfg.dt;
                if (xb - x >= p.c) {
                    settle_rest(t, payoff(p, x), false);
                    break;
                }
                while (cursor < n_cand && x <= grid[order[cursor]]) {
                    payoffs[order[cursor]][i] =
                        std::exp(-p.r * t) * payoff(p, x);
                    ++cursor;
                }
                if (cursor == n_cand) break;
            }
            if (cursor < n_cand)
                settle_rest(static_cast<double>(steps) * cfg.dt,
                            payoff(p, x), true);
        }
    });

    BarrierSearchResult out;
    out.candidates = grid;
    out.estimates.reserve(n_cand);
    for (std::size_t j = 0; j < n_cand; ++j) {
        std::uint64_t n_trunc = 0;
        for (auto t : truncated[j]) n_trunc += t;
        out.estimates.push_back(detail::reduce_estimate(
            p, cfg, payoffs[j], n_trunc,
            StoppingPolicy::fixed(grid[j]).describe()));
    }
    out.best_index = 0;
    for (std::size_t j = 1; j < n_cand; ++j)
        if (out.estimates[j].mean > out.estimates[out.best_index].mean)
            out.best_index = j;
    out.best_barrier = grid[out.best_index];
    return out;
}

// --- coupled step-size refinement -----------------------------------------

struct DtLevel {
    double dt;
    McEstimate estimate;
};

// Estimates the same policy value at step sizes {f * cfg.dt : f in factors}
// from one fine path per seed, monitoring the triggers every f-th fine step.
// Gaussian increments aggregate exactly, so each level is distributed
// exactly as an independent run at its own dt; sharing the paths only
// removes the noise from the level-to-level comparison.
inline std::vector<DtLevel> dt_refinement(const ModelParams& p,
                                          const MarketState& s,
                                          const StoppingPolicy& policy,
                                          const McConfig& cfg,
                                          const std::vector<std::uint64_t>&
                                              factors = {4, 2, 1},
                                          unsigned n_threads = 0) {
    validate(p, s);
    validate(p, cfg);
    if (factors.empty() || factors.size() > 8)
        throw std::invalid_argument(
            "dt_refinement: need between 1 and 8 factors");
    std::uint64_t align = 1;
    for (auto f : factors) {
        if (f == 0) throw std::invalid_argument("dt_refinement: factor 0");
        align = std::max(align, f);
    }
    for (auto f : factors)
        if (align % f != 0)
            throw std::invalid_argument(
                "dt_refinement: factors must divide the largest factor");

    const std::size_t n_lev = factors.size();
    std::uint64_t steps = detail::horizon_steps(p, cfg);
    steps = ((steps + align - 1) / align) * align;
    const double mu = (p.r - 0.5 * p.sigma * p.sigma) * cfg.dt;
    const double sd = p.sigma * std::sqrt(cfg.dt);

    std::vector<std::vector<double>> payoffs(
        n_lev, std::vector<double>(cfg.n_paths));
    std::vector<std::vector<unsigned char>> truncated(
        n_lev, std::vector<unsigned char>(cfg.n_paths, 0));

    detail::parallel_paths(cfg.n_paths, n_threads, [&](std::uint64_t i) {
        double x = s.x;
        double xb[8];
        unsigned char live[8];
        std::fill(xb, xb + n_lev, s.x_bar);
        std::fill(live, live + n_lev, static_cast<unsigned char>(1));
        std::size_t n_live = n_lev;
        for (std::size_t j = 0; j < n_lev; ++j) {
            const bool dd = s.x_bar - s.x >= p.c;
            const bool bar = policy.has_fixed_barrier && s.x <= policy.barrier;
            if (dd || bar) {
                payoffs[j][i] = payoff(p, s.x);
                live[j] = 0;
                --n_live;
            }
        }
        if (n_live == 0) return;
        rng::SplitMix64 g = rng::path_stream(cfg.base_seed, i);
        for (std::uint64_t k = 1; k <= steps && n_live > 0; ++k) {
            x += mu + sd * rng::normal(g);
            for (std::size_t j = 0; j < n_lev; ++j) {
                if (!live[j] || k % factors[j] != 0) continue;
                if (x > xb[j]) xb[j] = x;
                const bool dd = xb[j] - x >= p.c;
                const bool bar =
                    policy.has_fixed_barrier && x <= policy.barrier;
                if (dd || bar) {
                    const double t = static_cast<double>(k) * cfg.dt;
                    payoffs[j][i] = std::exp(-p.r * t) * payoff(p, x);
                    live[j] = 0;
                    --n_live;
                }
            }
        }
        if (n_live > 0) {
            const double t = static_cast<double>(steps) * cfg.dt;
            for (std::size_t j = 0; j < n_lev; ++j) {
                if (!live[j]) continue;
                payoffs[j][i] = std::exp(-p.r * t) * payoff(p, x);
                truncated[j][i] = 1;
            }
        }
    });

    std::vector<DtLevel> out;
    out.reserve(n_lev);
    for (std::size_t j = 0; j < n_lev; ++j) {
        std::uint64_t n_trunc = 0;
        for (auto t : truncated[j]) n_trunc += t;
        McConfig level_cfg = cfg;
        level_cfg.dt = cfg.dt * static_cast<double>(factors[j]);
        out.push_back({level_cfg.dt,
                       detail::reduce_estimate(p, cfg, payoffs[j], n_trunc,
                                               policy.describe())});
    }
    return out;
}

}  // namespace ddput
