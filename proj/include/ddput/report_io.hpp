// JSON serialization of engine results, shared by the command line tool and
// the tests that parse its output.

#pragma once

#include <json.hpp>

#include "ddput/mc.hpp"
#include "ddput/pricing.hpp"
#include "ddput/verification.hpp"

namespace ddput {

inline nlohmann::json to_json(const ModelParams& p) {
    return {{"r", p.r},
            {"sigma", p.sigma},
            {"strike", p.strike_k},
            {"drawdown", std::exp(p.c)},
            {"c", p.c}};
}

inline nlohmann::json to_json(const PriceBreakdown& b, const MarketState& s) {
    nlohmann::json j{{"value", b.value},
                     {"regime", regime_name(b.regime)},
                     {"a_star", b.a_star},
                     {"exp_a_star", std::exp(b.a_star)},
                     {"x", s.x},
                     {"xbar", s.x_bar}};
    nlohmann::json comp;
    auto put = [&comp](const char* name, const std::optional<double>& v) {
        if (v) comp[name] = *v;
    };
    put("v1", b.v1);
    put("v2", b.v2);
    put("v3", b.v3);
    put("v4", b.v4);
    put("v5", b.v5);
    put("v6", b.v6);
    put("v7", b.v7);
    put("v8", b.v8);
    j["components"] = comp;
    return j;
}

inline nlohmann::json to_json(const McEstimate& e, const McConfig& cfg) {
    nlohmann::json j{{"mean", e.mean},
                     {"n_effective", e.n_effective},
                     {"n_truncated", e.n_truncated},
                     {"truncation_bound", e.truncation_bound},
                     {"policy", e.policy},
                     {"n_paths", cfg.n_paths},
                     {"dt", cfg.dt},
                     {"seed", cfg.base_seed}};
    if (e.std_err)
        j["stderr"] = *e.std_err;
    else
        j["warning"] = "standard error undefined for a single path";
    return j;
}

inline nlohmann::json to_json(const CheckReport& r) {
    return {{"check_name", r.check_name},
            {"max_abs_residual", r.max_abs_residual},
            {"tolerance", r.tolerance},
            {"passed", r.passed},
            {"sample_points", r.sample_points},
            {"detail", r.detail}};
}

}  // namespace ddput
