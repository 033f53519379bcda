// Closed-form value of the perpetual American put whose life ends at the
// first time the log-price drawdown reaches c. The state is (x, x_bar) with
// x <= x_bar; the optimal rule exercises at the fixed log barrier a* or at the
// moving barrier x_bar - c, whichever is hit first.
//
// The value splits by regime:
//   x_bar < a* + c           V = V1 + V2 (V3 + V4 V5)      (barrier a* live)
//   a* + c <= x_bar < logK+c V = V6 + V7 V8                (only the moving
//                                                           barrier matters)
//   x_bar >= logK + c        V = (K - e^x)^+               (max exhausted)
// together with the two immediate-exercise regimes below/at the barriers.
//
// price_with_barrier(a) prices the same stop-at-a-or-drawdown policy for an
// arbitrary barrier a; price() uses a = optimal_barrier().

#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>

#include "ddput/scale.hpp"

namespace ddput {

struct MarketState {
    double x;      // current log price
    double x_bar;  // running log maximum, >= x
};

inline void validate(const ModelParams& p, const MarketState& s) {
    validate(p);
    if (!std::isfinite(s.x) || !std::isfinite(s.x_bar))
        throw std::invalid_argument("MarketState: x and x_bar must be finite");
    if (!(s.x <= s.x_bar))
        throw std::invalid_argument("MarketState: x must be <= x_bar");
}

enum class Regime {
    DrawdownTriggered,
    StoppedAtBarrier,
    ContinuationLowMax,
    ContinuationHighMax,
    ExhaustedMax,
};

inline const char* regime_name(Regime r) {
    switch (r) {
        case Regime::DrawdownTriggered: return "drawdown_triggered";
        case Regime::StoppedAtBarrier: return "stopped_at_barrier";
        case Regime::ContinuationLowMax: return "continuation_low_max";
        case Regime::ContinuationHighMax: return "continuation_high_max";
        case Regime::ExhaustedMax: return "exhausted_max";
    }
    return "unknown";
}

inline double payoff(const ModelParams& p, double x) {
    return std::max(p.strike_k - std::exp(x), 0.0);
}

// a* = log K + (W(c)/W'(c)) log( (-gamma)(1 - e^{(gamma-1)c}) / (1-gamma) ).
// The log's argument is in (0,1), so a* < log K for every valid parameter set.
inline double optimal_barrier(const ModelParams& p) {
    validate(p);
    const double g = gamma(p);
    const double t = std::exp((g - 1.0) * p.c);
    const double w_over_w1 = (1.0 - t) / (1.0 - g * t);
    const double base = (-g) * (1.0 - t) / (1.0 - g);
    return std::log(p.strike_k) + w_over_w1 * std::log(base);
}

// Boundary ties: the drawdown trigger wins, then exhaustion, then the
// high-max branch, then the barrier. The value is continuous across every
// one of these boundaries, so the tie rules fix only the tag.
inline Regime classify_regime(const ModelParams& p, const MarketState& s,
                              double barrier) {
    validate(p, s);
    const double log_k = std::log(p.strike_k);
    if (s.x_bar - s.x >= p.c) return Regime::DrawdownTriggered;
    if (s.x_bar >= log_k + p.c) return Regime::ExhaustedMax;
    if (s.x_bar >= barrier + p.c) return Regime::ContinuationHighMax;
    if (s.x <= barrier) return Regime::StoppedAtBarrier;
    return Regime::ContinuationLowMax;
}

inline Regime classify_regime(const ModelParams& p, const MarketState& s) {
    return classify_regime(p, s, optimal_barrier(p));
}

namespace detail {

inline void require_low_max_geometry(const ModelParams& p, double x,
                                     double x_bar, double a) {
    if (!(a <= x && x <= x_bar && x_bar < a + p.c))
        throw std::invalid_argument(
            "v1..v5: state must satisfy a <= x <= x_bar < a + c");
}

inline void require_high_max_geometry(const ModelParams& p, double x,
                                      double x_bar) {
    if (!(x_bar - p.c <= x && x <= x_bar &&
          x_bar < std::log(p.strike_k) + p.c))
        throw std::invalid_argument(
            "v6..v7: state must satisfy x_bar - c <= x <= x_bar < log K + c");
}

}  // namespace detail

// --- low-max components: barrier a live, x_bar < a + c ---------------------

inline double v1(const ModelParams& p, const MarketState& s, double a) {
    detail::require_low_max_geometry(p, s.x, s.x_bar, a);
    if (s.x == s.x_bar) return 0.0;
    return (p.strike_k - std::exp(a)) * exit_down(p, s.x - a, s.x_bar - a);
}

inline double v2(const ModelParams& p, const MarketState& s, double a) {
    detail::require_low_max_geometry(p, s.x, s.x_bar, a);
    if (s.x == s.x_bar) return 1.0;
    return scale_w_ratio(p, s.x - a, s.x_bar - a);
}

inline double v3(const ModelParams& p, double x_bar, double a) {
    detail::require_low_max_geometry(p, x_bar, x_bar, a);
    return (p.strike_k - std::exp(a)) * exit_down(p, x_bar - a, p.c);
}

inline double v4(const ModelParams& p, double x_bar, double a) {
    detail::require_low_max_geometry(p, x_bar, x_bar, a);
    return scale_w_ratio(p, x_bar - a, p.c);
}

// Value collected when the maximum ratchets past a + c with the barrier still
// live: the level where the drawdown finally bites is exponentially
// distributed with rate lambda(c) above a + c, capped at log K + c.
inline double v5(const ModelParams& p, double a) {
    validate(p);
    const double log_k = std::log(p.strike_k);
    if (!(a < log_k))
        throw std::invalid_argument("v5: barrier must satisfy a < log K");
    const double lam = lambda_c(p, p.c);
    const double del = delta_c(p, p.c);
    const double big_l = log_k - a;
    return del * (p.strike_k * (1.0 - std::exp(-lam * big_l) / (1.0 - lam)) +
                  lam * std::exp(a) / (1.0 - lam));
}

// --- high-max components: x_bar >= a + c, only the moving barrier ----------

// Both components depend on the state only through the drawdown gap
// x_bar - x, which is exact at the diagonal (gap 0) and therefore yields
// v6 = 0, v7 = 1 there bitwise. The clamp absorbs one ulp of rounding in
// c - gap for states sitting on the trigger boundary.
inline double high_max_height(const ModelParams& p, const MarketState& s) {
    return std::max(0.0, p.c - (s.x_bar - s.x));
}

inline double v6(const ModelParams& p, const MarketState& s) {
    detail::require_high_max_geometry(p, s.x, s.x_bar);
    return (p.strike_k - std::exp(s.x_bar - p.c)) *
           exit_down(p, high_max_height(p, s), p.c);
}

inline double v7(const ModelParams& p, const MarketState& s) {
    detail::require_high_max_geometry(p, s.x, s.x_bar);
    return scale_w_ratio(p, high_max_height(p, s), p.c);
}

// v8 = Delta K - e^{x_bar} + K e^{lambda w} (e^c - Delta), w = x_bar - logK - c.
// Regrouped as K Delta (1 - e^{lambda w}) + e^{x_bar} (e^{(lambda-1) w} - 1)
// so the two near-cancelling exponential blocks subtract exactly at w = 0.
inline double v8(const ModelParams& p, double x_bar) {
    validate(p);
    const double log_k = std::log(p.strike_k);
    if (!(x_bar <= log_k + p.c))
        throw std::invalid_argument("v8: x_bar must be <= log K + c");
    const double lam = lambda_c(p, p.c);
    const double del = delta_c(p, p.c);
    const double w = x_bar - log_k - p.c;
    return p.strike_k * del * (-std::expm1(lam * w)) +
           std::exp(x_bar) * std::expm1((lam - 1.0) * w);
}

struct PriceBreakdown {
    double value = 0.0;
    Regime regime = Regime::DrawdownTriggered;
    double a_star = 0.0;  // barrier the evaluation used
    std::optional<double> v1, v2, v3, v4, v5;
    std::optional<double> v6, v7, v8;
};

inline PriceBreakdown price_with_barrier(const ModelParams& p,
                                         const MarketState& s, double a) {
    validate(p, s);
    if (!(a < std::log(p.strike_k)))
        throw std::invalid_argument(
            "price_with_barrier: barrier must satisfy a < log K");
    PriceBreakdown out;
    out.a_star = a;
    out.regime = classify_regime(p, s, a);
    switch (out.regime) {
        case Regime::DrawdownTriggered:
        case Regime::StoppedAtBarrier:
        case Regime::ExhaustedMax:
            out.value = payoff(p, s.x);
            break;
        case Regime::ContinuationLowMax: {
            out.v1 = v1(p, s, a);
            out.v2 = v2(p, s, a);
            out.v3 = v3(p, s.x_bar, a);
            out.v4 = v4(p, s.x_bar, a);
            out.v5 = v5(p, a);
            out.value = *out.v1 + *out.v2 * (*out.v3 + *out.v4 * *out.v5);
            break;
        }
        case Regime::ContinuationHighMax: {
            out.v6 = v6(p, s);
            out.v7 = v7(p, s);
            out.v8 = v8(p, s.x_bar);
            out.value = *out.v6 + *out.v7 * *out.v8;
            break;
        }
    }
    return out;
}

inline PriceBreakdown price(const ModelParams& p, const MarketState& s) {
    return price_with_barrier(p, s, optimal_barrier(p));
}

}  // namespace ddput
