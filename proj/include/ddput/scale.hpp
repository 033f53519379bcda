// Scale functions of the drifted Brownian motion X_t = (r - sigma^2/2) t + sigma B_t,
// killed at rate r, together with the derived quantities gamma, C, lambda, Delta
// that the drawdown-capped put formulas are built from.
//
//   W(x) = C (e^x - e^{gamma x}),   gamma = -2r/sigma^2,  C = 1/(r + sigma^2/2)
//   Z(x) = 1 + r * int_0^x W(y) dy = C (r e^x + (sigma^2/2) e^{gamma x})
//
// Everything here is a pure function of its arguments.

#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace ddput {

struct ModelParams {
    double r;         // risk-free rate per year, > 0
    double sigma;     // volatility per sqrt(year), > 0
    double strike_k;  // strike K, > 0
    double c;         // log drawdown threshold, >= 1e-6; contract dies when x_bar - x >= c
};

inline void validate(const ModelParams& p) {
    if (!(p.r > 0.0) || !std::isfinite(p.r))
        throw std::invalid_argument("ModelParams: r must be finite and > 0");
    if (!(p.sigma > 0.0) || !std::isfinite(p.sigma))
        throw std::invalid_argument("ModelParams: sigma must be finite and > 0");
    if (!(p.strike_k > 0.0) || !std::isfinite(p.strike_k))
        throw std::invalid_argument("ModelParams: strike_k must be finite and > 0");
    if (!(p.c >= 1e-6) || !std::isfinite(p.c))
        throw std::invalid_argument("ModelParams: c must be finite and >= 1e-6");
}

inline double gamma(const ModelParams& p) {
    return -2.0 * p.r / (p.sigma * p.sigma);
}

inline double c_const(const ModelParams& p) {
    return 1.0 / (p.r + 0.5 * p.sigma * p.sigma);
}

namespace detail {

inline void require_nonneg(double x, const char* fn) {
    if (!(x >= 0.0))
        throw std::invalid_argument(std::string(fn) + ": argument must be >= 0");
}

inline void require_pos(double x, const char* fn) {
    if (!(x > 0.0))
        throw std::invalid_argument(std::string(fn) + ": argument must be > 0");
}

}  // namespace detail

inline double scale_w(const ModelParams& p, double x) {
    detail::require_nonneg(x, "scale_w");
    const double g = gamma(p);
    return c_const(p) * (std::exp(x) - std::exp(g * x));
}

struct WDerivs {
    double w1;  // W'
    double w2;  // W''
};

inline WDerivs scale_w_derivs(const ModelParams& p, double x) {
    detail::require_nonneg(x, "scale_w_derivs");
    const double g = gamma(p);
    const double cc = c_const(p);
    const double ex = std::exp(x);
    const double egx = std::exp(g * x);
    return {cc * (ex - g * egx), cc * (ex - g * g * egx)};
}

inline double scale_z(const ModelParams& p, double x) {
    detail::require_nonneg(x, "scale_z");
    const double g = gamma(p);
    const double s = 0.5 * p.sigma * p.sigma;
    return c_const(p) * (p.r * std::exp(x) + s * std::exp(g * x));
}

inline double scale_z_deriv(const ModelParams& p, double x) {
    return p.r * scale_w(p, x);
}

struct ScaleEval {
    double w;
    double w1;
    double w2;
    double z;
    double z1;
};

inline ScaleEval scale_eval(const ModelParams& p, double x) {
    detail::require_nonneg(x, "scale_eval");
    const double g = gamma(p);
    const double cc = c_const(p);
    const double s = 0.5 * p.sigma * p.sigma;
    const double ex = std::exp(x);
    const double egx = std::exp(g * x);
    const double w = cc * (ex - egx);
    return {w, cc * (ex - g * egx), cc * (ex - g * g * egx),
            cc * (p.r * ex + s * egx), p.r * w};
}

// lambda(d) = W'(d)/W(d) = (1 - gamma t)/(1 - t) with t = e^{(gamma-1)d} in (0,1).
// Always > 1 and stable for any d > 0 (no overflow even for huge d).
inline double lambda_c(const ModelParams& p, double d) {
    detail::require_pos(d, "lambda_c");
    const double g = gamma(p);
    const double t = std::exp((g - 1.0) * d);
    return (1.0 - g * t) / (1.0 - t);
}

// Delta(d) = (sigma^2/2) [W'(d) - W''(d)/lambda(d)]
//          = (sigma^2/2) C (1-gamma)^2 e^{gamma d} / (1 - gamma e^{(gamma-1)d}),
// the second form avoiding the cancellation in the bracket.
inline double delta_c(const ModelParams& p, double d) {
    detail::require_pos(d, "delta_c");
    const double g = gamma(p);
    const double s = 0.5 * p.sigma * p.sigma;
    const double t = std::exp((g - 1.0) * d);
    return s * c_const(p) * (1.0 - g) * (1.0 - g) * std::exp(g * d) / (1.0 - g * t);
}

// W(u)/W(v) for u, v >= 0, v > 0, computed through log differences so the
// ratio stays finite even when e^u or e^v would overflow.
inline double scale_w_ratio(const ModelParams& p, double u, double v) {
    detail::require_nonneg(u, "scale_w_ratio");
    detail::require_pos(v, "scale_w_ratio");
    if (u == v) return 1.0;
    if (u == 0.0) return 0.0;
    const double g = gamma(p);
    return std::exp((u - v) + std::log1p(-std::exp((g - 1.0) * u)) -
                    std::log1p(-std::exp((g - 1.0) * v)));
}

// Z(u) - Z(v) W(u)/W(v) for 0 <= u <= v. Direct evaluation cancels badly for
// u close to v; the algebraic identity
//   Z(u) W(v) - Z(v) W(u) = C (e^{gamma u + v} - e^{u + gamma v})
// gives the equivalent stable form below. Equals 1 at u = 0 and 0 at u = v,
// and is the discounted probability of exiting [v - u distance down] before
// the width-v band is crossed upward, so it lies in [0, 1].
inline double exit_down(const ModelParams& p, double u, double v) {
    detail::require_nonneg(u, "exit_down");
    detail::require_pos(v, "exit_down");
    if (u == v) return 0.0;
    const double g = gamma(p);
    return std::exp(g * u) * std::expm1((1.0 - g) * (u - v)) /
           std::expm1((g - 1.0) * v);
}

// psi(theta) = (r - sigma^2/2) theta + (sigma^2/2) theta^2, the Laplace
// exponent of X. psi(theta) = r has roots {1, gamma}.
inline double laplace_exponent(const ModelParams& p, double theta) {
    const double s = 0.5 * p.sigma * p.sigma;
    return (p.r - s) * theta + s * theta * theta;
}

}  // namespace ddput
