#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ddput/report_io.hpp"
#include "ddput/verification.hpp"

namespace {

using nlohmann::json;

// full-precision rendering so downstream plotting round-trips exactly
std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// flat `key=value` lines mirroring the long flag names; # starts a comment
std::vector<std::pair<std::string, std::string>> read_config_file(
    const std::string& path) {
    std::ifstream f(path);
    if (!f)
        throw std::invalid_argument("--config: cannot open '" + path + "'");
    std::vector<std::pair<std::string, std::string>> entries;
    std::string line;
    while (std::getline(f, line)) {
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';' || t[0] == '[') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(
                "--config: expected key=value, got '" + t + "'");
        const std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') &&
            value.back() == value.front())
            value = value.substr(1, value.size() - 2);
        if (key.empty())
            throw std::invalid_argument("--config: empty key in '" + t + "'");
        entries.emplace_back(key, value);
    }
    return entries;
}

// Splices config-file entries in as flags right after the subcommand token;
// the real command line comes later, so with take-last options flags win.
std::vector<std::string> args_with_config(int argc, char** argv) {
    std::vector<std::string> in(argv + 1, argv + argc);
    std::string cfg;
    for (std::size_t i = 0; i < in.size(); ++i) {
        if (in[i] == "--config" && i + 1 < in.size())
            cfg = in[i + 1];
        else if (in[i].rfind("--config=", 0) == 0)
            cfg = in[i].substr(9);
    }
    if (cfg.empty() || in.empty() || in[0].empty() || in[0][0] == '-')
        return in;
    std::vector<std::string> out{in[0]};
    for (const auto& [key, value] : read_config_file(cfg)) {
        out.push_back("--" + key);
        out.push_back(value);
    }
    out.insert(out.end(), in.begin() + 1, in.end());
    return out;
}

struct ModelFlags {
    double r = 0.1;
    double sigma = 0.2;
    double strike = 100.0;
    double drawdown = 1.2;  // e^c, the multiplicative drawdown level

    void add_to(CLI::App* cmd) {
        cmd->add_option("--r", r, "risk-free rate")->capture_default_str();
        cmd->add_option("--sigma", sigma, "volatility")->capture_default_str();
        cmd->add_option("--strike", strike, "strike K")->capture_default_str();
        cmd->add_option("--drawdown", drawdown,
                        "drawdown trigger level e^c as a price ratio > 1")
            ->capture_default_str();
    }

    ddput::ModelParams params() const {
        if (!(drawdown > 1.0) || !std::isfinite(drawdown))
            throw std::invalid_argument(
                "--drawdown is the ratio e^c and must be > 1");
        ddput::ModelParams p{r, sigma, strike, std::log(drawdown)};
        ddput::validate(p);
        return p;
    }
};

struct StateFlags {
    double x_spot = 0.0;
    double xbar_spot = 0.0;

    void add_to(CLI::App* cmd, bool required) {
        auto* ox = cmd->add_option("--x", x_spot, "current price S");
        auto* ob = cmd->add_option("--xbar", xbar_spot,
                                   "running maximum price, >= --x");
        if (required) {
            ox->required();
            ob->required();
        }
    }

    ddput::MarketState state(const ddput::ModelParams& p) const {
        if (!(x_spot > 0.0) || !(xbar_spot > 0.0))
            throw std::invalid_argument(
                "--x and --xbar are prices and must be > 0");
        ddput::MarketState s{std::log(x_spot), std::log(xbar_spot)};
        ddput::validate(p, s);
        return s;
    }
};

struct McFlags {
    std::uint64_t paths = 100000;
    double dt = 1e-4;
    double tmax = 0.0;
    std::uint64_t seed = 1;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--paths", paths, "Monte Carlo paths")
            ->capture_default_str();
        cmd->add_option("--dt", dt, "time step in years")
            ->capture_default_str();
        cmd->add_option("--tmax", tmax,
                        "simulation horizon in years; 0 picks e^{-r t} K < 1e-4 K")
            ->capture_default_str();
        cmd->add_option("--seed", seed, "base seed")->capture_default_str();
    }

    ddput::McConfig config() const { return {paths, dt, tmax, seed}; }
};

struct OutFlags {
    std::string out;
    std::string format;

    void add_to(CLI::App* cmd, const std::string& default_format) {
        format = default_format;
        cmd->add_option("--out", out, "output file (default stdout)");
        cmd->add_option("--format", format, "output format")
            ->check(CLI::IsMember({"csv", "json"}))
            ->capture_default_str();
    }

    void write(const std::string& text) const {
        if (out.empty()) {
            std::cout << text;
            return;
        }
        std::ofstream f(out, std::ios::binary);
        if (!f)
            throw std::invalid_argument("--out: cannot open '" + out +
                                        "' for writing");
        f << text;
    }
};

std::string model_comment(const ddput::ModelParams& p) {
    return "# r=" + g17(p.r) + " sigma=" + g17(p.sigma) + " strike=" +
           g17(p.strike_k) + " c=" + g17(p.c) + " drawdown_level=" +
           g17(std::exp(p.c)) + "\n";
}

std::string mc_comment(const ddput::ModelParams& p, const ddput::McConfig& cfg) {
    return "# paths=" + std::to_string(cfg.n_paths) + " dt=" + g17(cfg.dt) +
           " tmax=" + g17(ddput::resolved_t_max(p, cfg)) +
           " seed=" + std::to_string(cfg.base_seed) + "\n";
}

constexpr const char* kSweepHeader =
    "x,xbar,r,sigma,c,K,a_star,exp_a_star,regime,price\n";

std::string sweep_row(const ddput::ModelParams& p, const ddput::MarketState& s,
                      double a, const ddput::PriceBreakdown& b) {
    return g17(s.x) + "," + g17(s.x_bar) + "," + g17(p.r) + "," +
           g17(p.sigma) + "," + g17(p.c) + "," + g17(p.strike_k) + "," +
           g17(a) + "," + g17(std::exp(a)) + "," +
           ddput::regime_name(b.regime) + "," + g17(b.value) + "\n";
}

json sweep_row_json(const ddput::ModelParams& p, const ddput::MarketState& s,
                    double a, const ddput::PriceBreakdown& b) {
    return json{{"x", s.x},
                {"xbar", s.x_bar},
                {"r", p.r},
                {"sigma", p.sigma},
                {"c", p.c},
                {"K", p.strike_k},
                {"a_star", a},
                {"exp_a_star", std::exp(a)},
                {"regime", ddput::regime_name(b.regime)},
                {"price", b.value}};
}

std::vector<double> linspace(double lo, double hi, int n) {
    if (n < 1 || !(hi >= lo))
        throw std::invalid_argument(
            "sweep axis is degenerate: need max >= min and >= 1 point");
    std::vector<double> v;
    v.reserve(static_cast<std::size_t>(n));
    if (n == 1) {
        v.push_back(lo);
        return v;
    }
    for (int i = 0; i < n; ++i)
        v.push_back(lo + (hi - lo) * static_cast<double>(i) /
                             static_cast<double>(n - 1));
    return v;
}

// --- price ----------------------------------------------------------------

int run_price(const ModelFlags& mf, const StateFlags& sf, const OutFlags& of) {
    const ddput::ModelParams p = mf.params();
    const ddput::MarketState s = sf.state(p);
    const ddput::PriceBreakdown b = ddput::price(p, s);
    if (of.format == "json") {
        json rec{{"params", ddput::to_json(p)},
                 {"result", ddput::to_json(b, s)}};
        of.write(rec.dump(2) + "\n");
    } else {
        of.write(model_comment(p) + kSweepHeader +
                 sweep_row(p, s, b.a_star, b));
    }
    return 0;
}

// --- barrier ----------------------------------------------------------------

int run_barrier(const ModelFlags& mf, const StateFlags& sf, const McFlags& mc,
                const OutFlags& of, const std::vector<double>& offsets,
                bool has_state) {
    const ddput::ModelParams p = mf.params();
    const double a = ddput::optimal_barrier(p);
    if (!has_state) {
        if (of.format == "json") {
            json rec{{"params", ddput::to_json(p)},
                     {"a_star", a},
                     {"exp_a_star", std::exp(a)}};
            of.write(rec.dump(2) + "\n");
        } else {
            of.write(model_comment(p) + "a_star,exp_a_star\n" + g17(a) + "," +
                     g17(std::exp(a)) + "\n");
        }
        return 0;
    }
    const ddput::MarketState s = sf.state(p);
    const ddput::McConfig cfg = mc.config();
    std::vector<double> grid;
    grid.reserve(offsets.size());
    for (double d : offsets) grid.push_back(a + d);
    const ddput::BarrierSearchResult res =
        ddput::barrier_search(p, s, cfg, grid);
    if (of.format == "json") {
        json curve = json::array();
        for (std::size_t j = 0; j < res.candidates.size(); ++j) {
            json e = ddput::to_json(res.estimates[j], cfg);
            e["candidate_a"] = res.candidates[j];
            e["exp_candidate_a"] = std::exp(res.candidates[j]);
            curve.push_back(e);
        }
        json rec{{"params", ddput::to_json(p)},
                 {"state", {{"x", s.x}, {"xbar", s.x_bar}}},
                 {"a_star", a},
                 {"exp_a_star", std::exp(a)},
                 {"best_barrier", res.best_barrier},
                 {"best_index", res.best_index},
                 {"curve", curve}};
        of.write(rec.dump(2) + "\n");
    } else {
        std::string text = model_comment(p) + mc_comment(p, cfg) +
                           "# x=" + g17(s.x) + " xbar=" + g17(s.x_bar) +
                           " a_star=" + g17(a) + "\n" +
                           "candidate_a,exp_candidate_a,mean,stderr,is_best\n";
        for (std::size_t j = 0; j < res.candidates.size(); ++j) {
            const auto& est = res.estimates[j];
            text += g17(res.candidates[j]) + "," +
                    g17(std::exp(res.candidates[j])) + "," + g17(est.mean) +
                    "," + (est.std_err ? g17(*est.std_err) : std::string()) +
                    "," + (j == res.best_index ? "1" : "0") + "\n";
        }
        of.write(text);
    }
    return 0;
}

// --- sweep ------------------------------------------------------------------

struct SweepFlags {
    int figure = 0;
    int grid_n = 0;  // 0 = per-figure default
    double x_min = 50.0, x_max = 130.0;
    double r_min = 0.01, r_max = 0.2;
    double sigma_min = 0.1, sigma_max = 0.5;
    bool has_x_axis = false, has_r_axis = false, has_sigma_axis = false;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--figure", figure,
                        "figure preset: 1 price slice, 2 (x, xbar) surface, "
                        "3/4 (r, sigma) sensitivity")
            ->check(CLI::Range(1, 4));
        cmd->add_option("--grid-n", grid_n, "points per axis (0 = preset default)");
        auto* xmin = cmd->add_option("--x-min", x_min,
                                     "price axis lower end")->capture_default_str();
        auto* xmax = cmd->add_option("--x-max", x_max,
                                     "price axis upper end")->capture_default_str();
        auto* rmin = cmd->add_option("--r-min", r_min,
                                     "rate axis lower end")->capture_default_str();
        auto* rmax = cmd->add_option("--r-max", r_max,
                                     "rate axis upper end")->capture_default_str();
        auto* smin = cmd->add_option("--sigma-min", sigma_min,
                                     "volatility axis lower end")
                         ->capture_default_str();
        auto* smax = cmd->add_option("--sigma-max", sigma_max,
                                     "volatility axis upper end")
                         ->capture_default_str();
        cmd->parse_complete_callback([this, xmin, xmax, rmin, rmax, smin, smax] {
            has_x_axis = xmin->count() > 0 || xmax->count() > 0;
            has_r_axis = rmin->count() > 0 || rmax->count() > 0;
            has_sigma_axis = smin->count() > 0 || smax->count() > 0;
        });
    }
};

int run_sweep(const ModelFlags& mf, const StateFlags& sf, const SweepFlags& sw,
              const OutFlags& of, bool has_x, bool has_xbar) {
    const ddput::ModelParams base = mf.params();
    std::string csv;
    json rows = json::array();
    auto emit = [&](const ddput::ModelParams& p, const ddput::MarketState& s) {
        const double a = ddput::optimal_barrier(p);
        const ddput::PriceBreakdown b = ddput::price(p, s);
        if (of.format == "json")
            rows.push_back(sweep_row_json(p, s, a, b));
        else
            csv += sweep_row(p, s, a, b);
    };

    std::string axes_comment;
    if (sw.figure == 1) {
        // price slice in the current price at a fixed running maximum:
        // the curve meets the payoff tangentially at exp(a_star)
        const int n = sw.grid_n > 0 ? sw.grid_n : 81;
        const double xbar_spot = has_xbar ? sf.xbar_spot : 100.0;
        if (!(xbar_spot > 0.0))
            throw std::invalid_argument("--xbar must be > 0");
        const double hi = std::min(sw.x_max, xbar_spot);
        for (double spot : linspace(std::min(sw.x_min, hi), hi, n))
            emit(base, {std::log(spot), std::log(xbar_spot)});
        axes_comment = "# figure=1 x_spot=[" + g17(std::min(sw.x_min, hi)) +
                       "," + g17(hi) + "] n=" + std::to_string(n) +
                       " xbar_spot=" + g17(xbar_spot) + "\n";
    } else if (sw.figure == 2) {
        const int n = sw.grid_n > 0 ? sw.grid_n : 41;
        const std::vector<double> axis = linspace(sw.x_min, sw.x_max, n);
        for (double xbar_spot : axis)
            for (double spot : axis)
                if (spot <= xbar_spot)
                    emit(base, {std::log(spot), std::log(xbar_spot)});
        axes_comment = "# figure=2 x_spot=xbar_spot=[" + g17(sw.x_min) + "," +
                       g17(sw.x_max) + "] n=" + std::to_string(n) + "\n";
    } else if (sw.figure == 3 || sw.figure == 4) {
        const int n = sw.grid_n > 0 ? sw.grid_n : 17;
        const double spot = has_x ? sf.x_spot : 100.0;
        const double xbar_spot = has_xbar ? sf.xbar_spot : spot;
        for (double sig : linspace(sw.sigma_min, sw.sigma_max, n))
            for (double rr : linspace(sw.r_min, sw.r_max, n)) {
                ModelFlags m = mf;
                m.r = rr;
                m.sigma = sig;
                emit(m.params(), {std::log(spot), std::log(xbar_spot)});
            }
        axes_comment = "# figure=" + std::to_string(sw.figure) + " r=[" +
                       g17(sw.r_min) + "," + g17(sw.r_max) + "] sigma=[" +
                       g17(sw.sigma_min) + "," + g17(sw.sigma_max) +
                       "] n=" + std::to_string(n) + " x_spot=" + g17(spot) +
                       " xbar_spot=" + g17(xbar_spot) + "\n";
    } else {
        // free-form sweep: cross product of whichever axes were requested
        if (!sw.has_x_axis && !sw.has_r_axis && !sw.has_sigma_axis)
            throw std::invalid_argument(
                "sweep needs --figure or at least one of --x-min/--x-max, "
                "--r-min/--r-max, --sigma-min/--sigma-max");
        const int n = sw.grid_n > 0 ? sw.grid_n : 21;
        const std::vector<double> xs =
            sw.has_x_axis ? linspace(sw.x_min, sw.x_max, n)
                          : std::vector<double>{has_x ? sf.x_spot : 100.0};
        const std::vector<double> rs =
            sw.has_r_axis ? linspace(sw.r_min, sw.r_max, n)
                          : std::vector<double>{mf.r};
        const std::vector<double> sigs =
            sw.has_sigma_axis ? linspace(sw.sigma_min, sw.sigma_max, n)
                              : std::vector<double>{mf.sigma};
        for (double sig : sigs)
            for (double rr : rs)
                for (double spot : xs) {
                    if (!(spot > 0.0))
                        throw std::invalid_argument(
                            "sweep price axis must stay > 0");
                    const double xbar_spot =
                        has_xbar ? sf.xbar_spot : std::max(spot, 100.0);
                    ModelFlags m = mf;
                    m.r = rr;
                    m.sigma = sig;
                    emit(m.params(), {std::log(spot), std::log(xbar_spot)});
                }
        axes_comment = "# custom sweep n=" + std::to_string(n) + "\n";
    }

    if (of.format == "json") {
        json rec{{"params", ddput::to_json(base)}, {"rows", rows}};
        of.write(rec.dump(2) + "\n");
    } else {
        of.write(model_comment(base) + axes_comment + kSweepHeader + csv);
    }
    return 0;
}

// --- verify -----------------------------------------------------------------

int run_verify(const ModelFlags& mf, const McFlags& mc, const OutFlags& of,
               double perturb_astar) {
    const ddput::ModelParams p = mf.params();
    const double a = ddput::optimal_barrier(p) + perturb_astar;
    if (!(a < std::log(p.strike_k)))
        throw std::invalid_argument(
            "--perturb-astar pushes the barrier to or above log K");

    std::vector<ddput::CheckReport> reports;
    reports.push_back(ddput::check_identities(ddput::default_params_grid()));
    reports.push_back(ddput::check_laplace(p));
    reports.push_back(ddput::check_hjb(p));
    reports.push_back(
        ddput::check_smooth_paste(p, ddput::default_paste_grid(p, a), a));
    reports.push_back(ddput::check_normal_reflection(p));
    reports.push_back(
        ddput::check_against_mc(p, ddput::default_regime_states(p), mc.config()));

    bool all_passed = true;
    json checks = json::array();
    for (const auto& rep : reports) {
        all_passed = all_passed && rep.passed;
        checks.push_back(ddput::to_json(rep));
    }
    json rec{{"params", ddput::to_json(p)},
             {"perturb_astar", perturb_astar},
             {"mc", {{"paths", mc.paths}, {"dt", mc.dt}, {"seed", mc.seed}}},
             {"all_passed", all_passed},
             {"checks", checks}};
    of.write(rec.dump(2) + "\n");
    return all_passed ? 0 : 1;
}

// --- mc ---------------------------------------------------------------------

int run_mc(const ModelFlags& mf, const StateFlags& sf, const McFlags& mc,
           const OutFlags& of, double barrier_spot, bool has_barrier) {
    const ddput::ModelParams p = mf.params();
    const ddput::MarketState s = sf.state(p);
    const ddput::McConfig cfg = mc.config();
    double a = ddput::optimal_barrier(p);
    if (has_barrier) {
        if (!(barrier_spot > 0.0))
            throw std::invalid_argument("--barrier must be a positive price");
        a = std::log(barrier_spot);
        if (!(a < std::log(p.strike_k)))
            throw std::invalid_argument("--barrier must stay below the strike");
    }
    const ddput::McEstimate est =
        ddput::mc_price(p, s, ddput::StoppingPolicy::fixed(a), cfg);
    const double closed = has_barrier
                              ? ddput::price_with_barrier(p, s, a).value
                              : ddput::price(p, s).value;
    const bool has_z = est.std_err.has_value() && *est.std_err > 0.0;
    const double z = has_z ? (est.mean - closed) / *est.std_err : 0.0;

    if (of.format == "json") {
        json rec{{"params", ddput::to_json(p)},
                 {"state", {{"x", s.x}, {"xbar", s.x_bar}}},
                 {"barrier", a},
                 {"estimate", ddput::to_json(est, cfg)},
                 {"closed_form", closed}};
        if (has_z)
            rec["z_score"] = z;
        else
            rec["z_score"] = nullptr;
        of.write(rec.dump(2) + "\n");
    } else {
        std::string text = model_comment(p) + mc_comment(p, cfg);
        if (!est.std_err)
            text += "# warning: single path, standard error undefined\n";
        text +=
            "mean,stderr,n_effective,n_truncated,truncation_bound,closed_form,"
            "z_score\n";
        text += g17(est.mean) + "," +
                (est.std_err ? g17(*est.std_err) : std::string()) + "," +
                std::to_string(est.n_effective) + "," +
                std::to_string(est.n_truncated) + "," +
                g17(est.truncation_bound) + "," + g17(closed) + "," +
                (has_z ? g17(z) : std::string()) + "\n";
        of.write(text);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Pricing and verification toolkit for the perpetual American put "
        "capped by the first drawdown epoch"};
    app.require_subcommand(1);
    // config entries are spliced in before the command line, so with
    // take-last semantics explicit flags override the file
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    int rc = 0;
    std::string config_path;
    const auto add_config_flag = [&config_path](CLI::App* sub) {
        sub->add_option("--config", config_path,
                        "flat key=value config file; explicit flags win");
    };

    // price
    auto* cp = app.add_subcommand("price",
                                  "closed-form value at one (x, xbar) state");
    add_config_flag(cp);
    ModelFlags p_model;
    StateFlags p_state;
    OutFlags p_out;
    p_model.add_to(cp);
    p_state.add_to(cp, true);
    p_out.add_to(cp, "json");
    cp->callback([&] { rc = run_price(p_model, p_state, p_out); });

    // barrier
    auto* cb = app.add_subcommand(
        "barrier",
        "optimal barrier a*; with a state, Monte Carlo search around it");
    add_config_flag(cb);
    ModelFlags b_model;
    StateFlags b_state;
    McFlags b_mc;
    OutFlags b_out;
    std::vector<double> b_offsets{-0.1, -0.05, -0.02, 0.0, 0.02, 0.05, 0.1};
    b_model.add_to(cb);
    b_state.add_to(cb, false);
    b_mc.add_to(cb);
    b_out.add_to(cb, "csv");
    cb->add_option("--offsets", b_offsets,
                   "log offsets from a* for the candidate grid")
        ->expected(-1);
    cb->callback([&] {
        const bool has_state =
            cb->count("--x") > 0 || cb->count("--xbar") > 0;
        if (has_state && (cb->count("--x") == 0 || cb->count("--xbar") == 0))
            throw std::invalid_argument(
                "barrier search needs both --x and --xbar");
        rc = run_barrier(b_model, b_state, b_mc, b_out, b_offsets, has_state);
    });

    // sweep
    auto* cs = app.add_subcommand("sweep",
                                  "grid sweeps; --figure 1-4 reproduces the "
                                  "bundled figure data sets");
    add_config_flag(cs);
    ModelFlags s_model;
    StateFlags s_state;
    SweepFlags s_sweep;
    OutFlags s_out;
    s_model.add_to(cs);
    s_state.add_to(cs, false);
    s_sweep.add_to(cs);
    s_out.add_to(cs, "csv");
    cs->callback([&] {
        rc = run_sweep(s_model, s_state, s_sweep, s_out,
                       cs->count("--x") > 0, cs->count("--xbar") > 0);
    });

    // verify
    auto* cv = app.add_subcommand(
        "verify", "run the full verification suite, JSON report");
    add_config_flag(cv);
    ModelFlags v_model;
    McFlags v_mc;
    // defaults chosen so the monitoring bias at dt sits well inside the
    // 3 stderr + truncation allowance at this path count
    v_mc.paths = 30000;
    v_mc.dt = 1e-4;
    OutFlags v_out;
    double v_perturb = 0.0;
    v_model.add_to(cv);
    v_mc.add_to(cv);
    v_out.add_to(cv, "json");
    cv->add_option("--perturb-astar", v_perturb,
                   "offset the barrier used by the smooth-paste check; any "
                   "nonzero value must make that check fail")
        ->capture_default_str();
    cv->callback([&] { rc = run_verify(v_model, v_mc, v_out, v_perturb); });

    // mc
    auto* cm = app.add_subcommand(
        "mc", "Monte Carlo estimate next to the closed form at one state");
    add_config_flag(cm);
    ModelFlags m_model;
    StateFlags m_state;
    McFlags m_mc;
    OutFlags m_out;
    double m_barrier_spot = 0.0;
    m_model.add_to(cm);
    m_state.add_to(cm, true);
    m_mc.add_to(cm);
    m_out.add_to(cm, "json");
    cm->add_option("--barrier", m_barrier_spot,
                   "fixed stopping barrier as a price (default: exp(a*))");
    cm->callback([&] {
        rc = run_mc(m_model, m_state, m_mc, m_out, m_barrier_spot,
                    cm->count("--barrier") > 0);
    });

    try {
        std::vector<std::string> args = args_with_config(argc, argv);
        std::reverse(args.begin(), args.end());
        app.parse(std::move(args));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return rc;
}
