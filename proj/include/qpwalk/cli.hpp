#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qpwalk/errors.hpp"
#include "qpwalk/verify.hpp"

// Command-line front end. Every data command resolves its full configuration
// first, computes, then writes artifacts: a CSV (or JSON) result stamped with
// the config hash, plus a <command>-<hash>.config.json replay file. Running
// `qpwalk --config <that file>` reproduces the artifact bytes; thread count
// and output directory are execution knobs outside the config identity.
//
// Exit codes: 0 success, 1 verification failure, 2 usage or input error,
// 3 resource cap exceeded.

namespace qpwalk::cli {

namespace detail {

struct EnvOptions {
    std::string env_file;
    std::string alpha = "golden";
    std::vector<double> cosc = {1.0};
    std::vector<double> sinc;
};

inline void add_env_options(CLI::App* sub, EnvOptions& o) {
    sub->add_option("--env", o.env_file, "environment JSON file, overrides --alpha/--cos/--sin");
    sub->add_option("--alpha", o.alpha, "rotation number: golden, silver, liouville-demo, or a float in (0,1)");
    sub->add_option("--cos", o.cosc, "cosine coefficients a_1,a_2,...")->delimiter(',');
    sub->add_option("--sin", o.sinc, "sine coefficients b_1,b_2,...")->delimiter(',');
}

inline json env_json(const EnvOptions& o) {
    if (!o.env_file.empty()) return env_to_json(load_environment_file(o.env_file));
    TrigPolynomial f;
    f.cosc = o.cosc;
    f.sinc = o.sinc;
    return env_to_json(Environment::make(std::move(f), alpha_preset(o.alpha)));
}

template <typename T>
T param(const json& p, const char* key, T fallback) {
    return p.contains(key) ? p.at(key).get<T>() : fallback;
}

inline std::string artifact_stem(const ExperimentConfig& ec) {
    return ec.command + "-" + ec.hash_hex();
}

inline void write_replay_config(const ExperimentConfig& ec) {
    auto path = write_text_artifact(ec, artifact_stem(ec) + ".config.json", ec.to_json().dump(2) + "\n");
    std::printf("wrote %s\n", path.string().c_str());
}

inline void emit_csv(const ExperimentConfig& ec, const std::string& name, const CsvTable& t) {
    auto path = write_csv_artifact(ec, name, t);
    std::printf("wrote %s\n", path.string().c_str());
}

inline std::string harmonic_label(const Harmonic& h) {
    return std::string(h.kind()) + std::to_string(h.k);
}

inline ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& ex) {
        throw std::invalid_argument("config file " + path + ": " + ex.what());
    }
    // JSON result artifacts wrap the config; replay files and canonical
    // configs are the object itself.
    if (j.is_object() && j.contains("config") && j.at("config").is_object()) j = j.at("config");
    return ExperimentConfig::from_json(j);
}

inline SimConfig sim_config_from(const json& p, unsigned threads) {
    SimConfig cfg;
    cfg.seed = param<std::uint64_t>(p, "seed", 1);
    cfg.paths = param<std::int64_t>(p, "paths", 10000);
    cfg.horizon = param<std::int64_t>(p, "horizon", 10000);
    cfg.checkpoints = param<std::vector<std::int64_t>>(p, "checkpoints", {});
    if (cfg.checkpoints.empty()) cfg.checkpoints = SimConfig::default_checkpoints(cfg.horizon);
    cfg.threads = threads;
    return cfg;
}

inline int run_cf(const ExperimentConfig& ec) {
    Environment e = env_from_json(ec.env);
    int depth = param<int>(ec.params, "depth", 8);
    if (depth < 1) throw std::invalid_argument("cf: depth must be >= 1");
    std::vector<std::int64_t> quot;
    if (e.alpha.exact()) {
        quot = e.alpha.quotients;
        if (depth < static_cast<int>(quot.size())) quot.resize(static_cast<std::size_t>(depth));
    } else {
        quot = continued_fraction(e.alpha.value, depth);
    }
    std::vector<Convergent> convs = convergents_from_quotients(quot, e.alpha.value);
    CsvTable t;
    t.columns = {"k", "a_k", "p_k", "q_k", "err_k"};
    for (std::size_t i = 0; i < convs.size(); ++i)
        t.add_row({fmt_int(static_cast<std::int64_t>(i + 1)), fmt_int(quot[i]), fmt_int(convs[i].p),
                   fmt_int(convs[i].q), fmt_double(convs[i].err)});
    std::printf("alpha %s, %zu quotients certified\n", fmt_double(e.alpha.value).c_str(), quot.size());
    emit_csv(ec, detail::artifact_stem(ec) + ".csv", t);
    write_replay_config(ec);
    return 0;
}

inline int run_env(const ExperimentConfig& ec) {
    Environment e = env_from_json(ec.env);
    int grid = param<int>(ec.params, "grid", 256);
    CsvTable t;
    t.columns = {"x", "p", "q"};
    for (double x : uniform_grid(grid))
        t.add_row({fmt_double(x), fmt_double(eval_p(e, x)), fmt_double(eval_q(e, x))});
    json summary{{"pmin", e.pmin}, {"pmax", e.pmax}, {"variation", total_variation(e.f)}};
    std::printf("p in [%s, %s], variation %s on %d grid points\n", fmt_double(e.pmin).c_str(),
                fmt_double(e.pmax).c_str(), fmt_double(total_variation(e.f)).c_str(), grid);
    emit_csv(ec, detail::artifact_stem(ec) + ".csv", t);
    auto jpath = write_json_artifact(ec, detail::artifact_stem(ec) + ".json", summary);
    std::printf("wrote %s\n", jpath.string().c_str());
    write_replay_config(ec);
    return 0;
}

inline int run_scale(const ExperimentConfig& ec) {
    Environment e = env_from_json(ec.env);
    double x = param<double>(ec.params, "x", 0.0);
    int radius = param<int>(ec.params, "radius", 100);
    MartingaleTable t = build_martingale(e, x, radius);
    CsvTable csv;
    csv.columns = {"k", "M"};
    for (std::int64_t k = -radius; k <= radius; ++k)
        csv.add_row({fmt_int(k), fmt_double(t.at(k))});
    std::printf("harmonicity residual %s over [-%d, %d]\n",
                fmt_double(martingale_residual(t, e)).c_str(), radius, radius);
    emit_csv(ec, detail::artifact_stem(ec) + ".csv", csv);
    write_replay_config(ec);
    return 0;
}

inline int run_mu(const ExperimentConfig& ec) {
    Environment e = env_from_json(ec.env);
    double x = param<double>(ec.params, "x", 0.0);
    int radius = param<int>(ec.params, "radius", 20);
    bool origin_factor = param<bool>(ec.params, "origin_factor", false);
    VisitProfile v = visit_counts(e, x, radius, origin_factor);
    CsvTable csv;
    csv.columns = {"a", "mu"};
    for (std::int64_t a = -radius; a <= radius; ++a) csv.add_row({fmt_int(a), fmt_double(v.at(a))});
    std::printf("stationarity residual %s\n", fmt_double(invariant_density_residual(v, e)).c_str());
    emit_csv(ec, detail::artifact_stem(ec) + ".csv", csv);
    write_replay_config(ec);
    return 0;
}

inline int run_nu(const ExperimentConfig& ec) {
    Environment e = env_from_json(ec.env);
    double x = param<double>(ec.params, "x", 0.0);
    std::int64_t q = param<std::int64_t>(ec.params, "q", 55);
    NuPair nu = nu_measures(e, x, q);
    CsvTable csv;
    csv.columns = {"position", "weight", "parity"};
    for (const Atom& a : nu.even.atoms) csv.add_row({fmt_double(a.pos), fmt_double(a.w), "even"});
    for (const Atom& a : nu.odd.atoms) csv.add_row({fmt_double(a.pos), fmt_double(a.w), "odd"});
    std::printf("block masses even %s, odd %s over q = %lld\n", fmt_double(nu.mass_even).c_str(),
                fmt_double(nu.mass_odd).c_str(), static_cast<long long>(q));
    emit_csv(ec, detail::artifact_stem(ec) + ".csv", csv);
    write_replay_config(ec);
    return 0;
}

inline int run_stationary(const ExperimentConfig& ec) {
    Environment e = env_from_json(ec.env);
    double x = param<double>(ec.params, "x", 0.0);
    std::int64_t q = param<std::int64_t>(ec.params, "q", 55);
    int kmax = param<int>(ec.params, "kmax", 2);
    StationaryEstimate st = stationary_estimate(e, x, q);
    CsvTable atoms;
    atoms.columns = {"position", "weight"};
    for (const Atom& a : st.measure.atoms) atoms.add_row({fmt_double(a.pos), fmt_double(a.w)});
    CsvTable harm;
    harm.columns = {"harmonic", "integral", "rotated", "reweighted", "qi_gap"};
    for (const QuasiInvarianceRow& r : quasi_invariance_diagnostic(st.measure, e, harmonic_family(kmax)))
        harm.add_row({harmonic_label(r.h), fmt_double(test_integral(st.measure, r.h)),
                      fmt_double(r.rotated), fmt_double(r.reweighted), fmt_double(r.gap)});
    std::printf("%zu atoms, block masses %s / %s%s\n", st.measure.atoms.size(),
                fmt_double(st.mass_even).c_str(), fmt_double(st.mass_odd).c_str(),
                st.mass_ok ? "" : " (window too small for stable masses)");
    emit_csv(ec, detail::artifact_stem(ec) + "-atoms.csv", atoms);
    emit_csv(ec, detail::artifact_stem(ec) + "-harmonics.csv", harm);
    write_replay_config(ec);
    return 0;
}

inline int run_dp(const ExperimentConfig& ec) {
    Environment e = env_from_json(ec.env);
    double x = param<double>(ec.params, "x", 0.0);
    std::int64_t n = param<std::int64_t>(ec.params, "n", 1000);
    std::int64_t cap = param<std::int64_t>(ec.params, "cap", kDefaultHorizon);
    ChainKind kind = param<bool>(ec.params, "half", false) ? ChainKind::half : ChainKind::walk;
    std::optional<std::int64_t> taboo;
    if (ec.params.contains("taboo")) taboo = ec.params.at("taboo").get<std::int64_t>();
    LatticeDistribution d = distribution_at(e, x, n, taboo, kind, cap);
    std::int64_t stride = d.site_stride();
    CsvTable csv;
    csv.columns = {"site", "position", "mass"};
    for (std::int64_t s = d.lo; s <= d.hi(); ++s) {
        double m = d.at(s);
        if (m == 0.0) continue;
        csv.add_row({fmt_int(s), fmt_double(wrap_unit(d.x0 + static_cast<double>(s * stride) * d.alpha)),
                     fmt_double(m)});
    }
    std::string absorbed = taboo ? ", absorbed " + fmt_double(d.absorbed) : std::string();
    std::printf("mass %s%s at time %lld on the %s chain\n", fmt_double(d.total()).c_str(),
                absorbed.c_str(), static_cast<long long>(n),
                kind == ChainKind::half ? "half" : "walk");
    emit_csv(ec, detail::artifact_stem(ec) + ".csv", csv);
    write_replay_config(ec);
    return 0;
}

inline int run_srlp(const ExperimentConfig& ec) {
    Environment e = env_from_json(ec.env);
    double x = param<double>(ec.params, "x", 0.0);
    std::int64_t n = param<std::int64_t>(ec.params, "n", 10000);
    int window = param<int>(ec.params, "window", 5);
    SrlpReport r = srlp_check(e, x, n, window);
    CsvTable csv;
    csv.columns = {"a", "b", "prob_ratio", "mu_ratio", "deviation"};
    for (const SrlpReport::Row& row : r.rows)
        csv.add_row({fmt_int(row.a), fmt_int(row.b), fmt_double(row.prob_ratio),
                     fmt_double(row.mu_ratio), fmt_double(row.deviation)});
    std::printf("max deviation %s over window %d at n = %lld\n", fmt_double(r.max_deviation).c_str(),
                window, static_cast<long long>(n));
    emit_csv(ec, detail::artifact_stem(ec) + ".csv", csv);
    write_replay_config(ec);
    return 0;
}

inline int run_renewal(const ExperimentConfig& ec) {
    Environment e = env_from_json(ec.env);
    double x = param<double>(ec.params, "x", 0.0);
    std::int64_t n = param<std::int64_t>(ec.params, "n", 200);
    std::vector<std::int64_t> targets =
        param<std::vector<std::int64_t>>(ec.params, "targets", {0, 1, -1, 2, -2});
    RenewalReport r = renewal_identity_check(e, x, n, targets);
    CsvTable csv;
    csv.columns = {"a", "lhs", "rhs", "residual"};
    for (const RenewalReport::Row& row : r.rows)
        csv.add_row({fmt_int(row.a), fmt_double(row.lhs), fmt_double(row.rhs),
                     fmt_double(row.residual)});
    std::printf("max residual %s at n = %lld\n", fmt_double(r.max_residual).c_str(),
                static_cast<long long>(n));
    emit_csv(ec, detail::artifact_stem(ec) + ".csv", csv);
    write_replay_config(ec);
    return 0;
}

inline int run_mix(const ExperimentConfig& ec) {
    Environment e = env_from_json(ec.env);
    double x1 = param<double>(ec.params, "x1", 0.0);
    double x2 = param<double>(ec.params, "x2", 0.37);
    std::int64_t n = param<std::int64_t>(ec.params, "n", 20000);
    int kmax = param<int>(ec.params, "kmax", 1);
    std::int64_t q = param<std::int64_t>(ec.params, "q", 0);
    MixingReport r = mixing_distance(e, x1, x2, n, harmonic_family(kmax), q);
    CsvTable csv;
    csv.columns = {"harmonic", "e1", "e2", "stationary", "gap12", "gap1s", "gap2s"};
    for (const MixingReport::Row& row : r.rows)
        csv.add_row({harmonic_label(row.h), fmt_double(row.e1), fmt_double(row.e2),
                     fmt_double(row.stationary), fmt_double(row.gap12), fmt_double(row.gap1s),
                     fmt_double(row.gap2s)});
    std::printf("max start-point gap %s at n = %lld, stationary window q = %lld\n",
                fmt_double(r.max_gap12).c_str(), static_cast<long long>(r.n),
                static_cast<long long>(r.q_stationary));
    emit_csv(ec, detail::artifact_stem(ec) + ".csv", csv);
    write_replay_config(ec);
    return 0;
}

inline int run_mc(const ExperimentConfig& ec, unsigned threads) {
    Environment e = env_from_json(ec.env);
    double x = param<double>(ec.params, "x", 0.0);
    SimConfig cfg = sim_config_from(ec.params, threads);
    ExperimentConfig out_cfg = verify::mc_experiment_config(e, x, cfg, "mc");
    out_cfg.out_dir = ec.out_dir;
    CsvTable t = verify::mc_statistics_table(e, x, cfg);
    std::printf("seed %llu, %lld paths to horizon %lld\n",
                static_cast<unsigned long long>(cfg.seed), static_cast<long long>(cfg.paths),
                static_cast<long long>(cfg.horizon));
    emit_csv(out_cfg, detail::artifact_stem(out_cfg) + ".csv", t);
    write_replay_config(out_cfg);
    return 0;
}

inline int run_cond16(const ExperimentConfig& ec, unsigned threads) {
    Environment e = env_from_json(ec.env);
    double x = param<double>(ec.params, "x", 0.0);
    SimConfig cfg = sim_config_from(ec.params, threads);
    ExperimentConfig out_cfg = verify::mc_experiment_config(e, x, cfg, "cond16");
    out_cfg.out_dir = ec.out_dir;
    CsvTable t;
    t.columns = {"checkpoint", "statistic", "estimate", "ci_lo", "ci_hi"};
    for (const Condition16Row& row : condition16_rows(simulate(e, x, cfg))) {
        t.add_row({fmt_int(row.n), "p_max", fmt_double(row.p_max), fmt_double(row.ci_max.lo),
                   fmt_double(row.ci_max.hi)});
        t.add_row({fmt_int(row.n), "p_min", fmt_double(row.p_min), fmt_double(row.ci_min.lo),
                   fmt_double(row.ci_min.hi)});
    }
    std::printf("seed %llu, %lld paths to horizon %lld\n",
                static_cast<unsigned long long>(cfg.seed), static_cast<long long>(cfg.paths),
                static_cast<long long>(cfg.horizon));
    emit_csv(out_cfg, detail::artifact_stem(out_cfg) + ".csv", t);
    write_replay_config(out_cfg);
    return 0;
}

inline int run_verify(const ExperimentConfig& ec, unsigned threads) {
    std::vector<verify::CheckResult> rows = verify::run_verification(threads);
    int failed = 0;
    json data = json::array();
    for (const verify::CheckResult& r : rows) {
        std::printf("%s %-26s (%.2fs) %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.seconds,
                    r.detail.c_str());
        if (!r.pass) ++failed;
        data.push_back(json{{"name", r.name}, {"pass", r.pass}, {"seconds", r.seconds},
                            {"detail", r.detail}});
    }
    std::printf("%zu checks, %d failed\n", rows.size(), failed);
    auto path = write_json_artifact(ec, detail::artifact_stem(ec) + ".json", data);
    std::printf("wrote %s\n", path.string().c_str());
    return failed == 0 ? 0 : 1;
}

inline int dispatch(const ExperimentConfig& ec, unsigned threads) {
    if (ec.command == "cf") return run_cf(ec);
    if (ec.command == "env") return run_env(ec);
    if (ec.command == "scale") return run_scale(ec);
    if (ec.command == "mu") return run_mu(ec);
    if (ec.command == "nu") return run_nu(ec);
    if (ec.command == "stationary") return run_stationary(ec);
    if (ec.command == "dp") return run_dp(ec);
    if (ec.command == "srlp") return run_srlp(ec);
    if (ec.command == "renewal") return run_renewal(ec);
    if (ec.command == "mix") return run_mix(ec);
    if (ec.command == "mc") return run_mc(ec, threads);
    if (ec.command == "cond16") return run_cond16(ec, threads);
    if (ec.command == "verify") return run_verify(ec, threads);
    throw std::invalid_argument("unknown command: " + ec.command);
}

}  // namespace detail

inline int run(std::vector<std::string> args) {
    CLI::App app{"random walks in quasi-periodic environments on the circle"};
    app.name("qpwalk");
    app.require_subcommand(0, 1);

    std::string config_path;
    unsigned replay_threads = 0;
    app.add_option("--config", config_path, "replay a stored experiment config (JSON)");
    app.add_option("--threads", replay_threads, "worker threads for --config replays (0 = all cores)");

    struct SubState {
        CLI::App* sub = nullptr;
        detail::EnvOptions env;
        std::string out = ".";
        unsigned threads = 0;
        json params = json::object();
    };
    std::vector<SubState> subs(13);

    auto add_common = [&](std::size_t i, const char* name, const char* help, bool with_env = true) {
        subs[i].sub = app.add_subcommand(name, help);
        if (with_env) detail::add_env_options(subs[i].sub, subs[i].env);
        subs[i].sub->add_option("--out", subs[i].out, "artifact output directory");
        return subs[i].sub;
    };

    // Distinct storage per subcommand keeps CLI11 bindings alive through
    // parse; only numeric options differ below.
    struct NumericOpts {
        int depth = 8, grid = 256, radius_scale = 100, radius_mu = 20, window = 5;
        int kmax_st = 2, kmax_mix = 1;
        double x_scale = 0.0, x_mu = 0.0, x_nu = 0.0, x_st = 0.0, x_dp = 0.0, x_srlp = 0.0;
        double x_renewal = 0.0, x_mc = 0.0, x_c16 = 0.0, x1 = 0.0, x2 = 0.37;
        std::int64_t q_nu = 55, q_st = 55, q_mix = 0;
        std::int64_t n_dp = 1000, n_srlp = 10000, n_renewal = 200, n_mix = 20000;
        std::int64_t cap_dp = kDefaultHorizon, taboo = 0;
        bool origin_factor = false, half = false;
        std::uint64_t seed_mc = 1, seed_c16 = 1;
        std::int64_t paths_mc = 10000, paths_c16 = 10000;
        std::int64_t horizon_mc = 10000, horizon_c16 = 10000;
        std::vector<std::int64_t> cp_mc, cp_c16, targets = {0, 1, -1, 2, -2};
    } v;

    auto* cf = add_common(0, "cf", "continued fraction and convergents of the rotation number");
    cf->add_option("--depth", v.depth, "number of partial quotients");

    auto* env = add_common(1, "env", "jump probability table and variation of the environment");
    env->add_option("--grid", v.grid, "number of grid points");

    auto* scale = add_common(2, "scale", "scale function table M(k) on the orbit through x");
    scale->add_option("--x", v.x_scale, "start point on the circle");
    scale->add_option("--radius", v.radius_scale, "window half-width N");

    auto* mu = add_common(3, "mu", "closed-form expected visit counts before returning to 0");
    mu->add_option("--x", v.x_mu, "start point on the circle");
    mu->add_option("--radius", v.radius_mu, "largest |a| tabulated");
    mu->add_flag("--origin-factor", v.origin_factor, "use the j = 0 product variant (known to break stationarity)");

    auto* nu = add_common(4, "nu", "parity-split visit measures over one close-return block");
    nu->add_option("--x", v.x_nu, "start point on the circle");
    nu->add_option("--q", v.q_nu, "close-return block length");

    auto* stationary = add_common(5, "stationary", "recombined visit measure and its harmonic integrals");
    stationary->add_option("--x", v.x_st, "start point on the circle");
    stationary->add_option("--q", v.q_st, "close-return block length");
    stationary->add_option("--kmax", v.kmax_st, "largest harmonic frequency");

    auto* dp = add_common(6, "dp", "exact site distribution of the walk at time n");
    dp->add_option("--x", v.x_dp, "start point on the circle");
    dp->add_option("--n", v.n_dp, "number of steps");
    dp->add_option("--taboo", v.taboo, "absorb at this site (omit for the free walk)");
    dp->add_flag("--half", v.half, "evolve the aperiodic half chain instead");
    dp->add_option("--cap", v.cap_dp, "largest horizon the evolver may allocate");

    auto* srlp = add_common(7, "srlp", "site-probability ratios against visit-count ratios");
    srlp->add_option("--x", v.x_srlp, "start point on the circle");
    srlp->add_option("--n", v.n_srlp, "number of steps");
    srlp->add_option("--window", v.window, "sites |a| <= window enter the ratio matrix");

    auto* renewal = add_common(8, "renewal", "last-visit decomposition residuals on the half chain");
    renewal->add_option("--x", v.x_renewal, "start point on the circle");
    renewal->add_option("--n", v.n_renewal, "number of half-chain steps");
    renewal->add_option("--targets", v.targets, "half-chain sites to check")->delimiter(',');

    auto* mix = add_common(9, "mix", "harmonic averages from two starts, exact evolution");
    mix->add_option("--x1", v.x1, "first start point");
    mix->add_option("--x2", v.x2, "second start point");
    mix->add_option("--n", v.n_mix, "number of steps (parity-matched internally)");
    mix->add_option("--kmax", v.kmax_mix, "largest harmonic frequency");
    mix->add_option("--q", v.q_mix, "stationary window, 0 picks the largest close return below n");

    auto* mc = add_common(10, "mc", "Monte Carlo path ensemble with checkpointed statistics");
    mc->add_option("--x", v.x_mc, "start point on the circle");
    mc->add_option("--seed", v.seed_mc, "master seed, echoed into the artifact header");
    mc->add_option("--paths", v.paths_mc, "ensemble size");
    mc->add_option("--horizon", v.horizon_mc, "steps per path");
    mc->add_option("--checkpoints", v.cp_mc, "checkpoint times (default n/8, n/4, n/2, n)")->delimiter(',');
    mc->add_option("--threads", subs[10].threads, "worker threads (0 = all cores)");

    auto* c16 = add_common(11, "cond16", "running-extremum hit frequencies with confidence intervals");
    c16->add_option("--x", v.x_c16, "start point on the circle");
    c16->add_option("--seed", v.seed_c16, "master seed, echoed into the artifact header");
    c16->add_option("--paths", v.paths_c16, "ensemble size");
    c16->add_option("--horizon", v.horizon_c16, "steps per path");
    c16->add_option("--checkpoints", v.cp_c16, "checkpoint times (default n/8, n/4, n/2, n)")->delimiter(',');
    c16->add_option("--threads", subs[11].threads, "worker threads (0 = all cores)");

    auto* verify_cmd = add_common(12, "verify", "run the full invariant and acceptance suite", false);
    verify_cmd->add_option("--threads", subs[12].threads, "worker threads for the simulation checks");

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        unsigned threads = 0;
        ExperimentConfig ec;
        if (!config_path.empty()) {
            ec = detail::load_config_file(config_path);
            threads = replay_threads;
        } else if (cf->parsed()) {
            ec.command = "cf";
            ec.env = detail::env_json(subs[0].env);
            ec.params = json{{"depth", v.depth}};
            ec.out_dir = subs[0].out;
        } else if (env->parsed()) {
            ec.command = "env";
            ec.env = detail::env_json(subs[1].env);
            ec.params = json{{"grid", v.grid}};
            ec.out_dir = subs[1].out;
        } else if (scale->parsed()) {
            ec.command = "scale";
            ec.env = detail::env_json(subs[2].env);
            ec.params = json{{"x", v.x_scale}, {"radius", v.radius_scale}};
            ec.out_dir = subs[2].out;
        } else if (mu->parsed()) {
            ec.command = "mu";
            ec.env = detail::env_json(subs[3].env);
            ec.params = json{{"x", v.x_mu}, {"radius", v.radius_mu}};
            if (v.origin_factor) ec.params["origin_factor"] = true;
            ec.out_dir = subs[3].out;
        } else if (nu->parsed()) {
            ec.command = "nu";
            ec.env = detail::env_json(subs[4].env);
            ec.params = json{{"x", v.x_nu}, {"q", v.q_nu}};
            ec.out_dir = subs[4].out;
        } else if (stationary->parsed()) {
            ec.command = "stationary";
            ec.env = detail::env_json(subs[5].env);
            ec.params = json{{"x", v.x_st}, {"q", v.q_st}, {"kmax", v.kmax_st}};
            ec.out_dir = subs[5].out;
        } else if (dp->parsed()) {
            ec.command = "dp";
            ec.env = detail::env_json(subs[6].env);
            ec.params = json{{"x", v.x_dp}, {"n", v.n_dp}, {"cap", v.cap_dp}};
            if (v.half) ec.params["half"] = true;
            if (dp->count("--taboo") > 0) ec.params["taboo"] = v.taboo;
            ec.out_dir = subs[6].out;
        } else if (srlp->parsed()) {
            ec.command = "srlp";
            ec.env = detail::env_json(subs[7].env);
            ec.params = json{{"x", v.x_srlp}, {"n", v.n_srlp}, {"window", v.window}};
            ec.out_dir = subs[7].out;
        } else if (renewal->parsed()) {
            ec.command = "renewal";
            ec.env = detail::env_json(subs[8].env);
            ec.params = json{{"x", v.x_renewal}, {"n", v.n_renewal}, {"targets", v.targets}};
            ec.out_dir = subs[8].out;
        } else if (mix->parsed()) {
            ec.command = "mix";
            ec.env = detail::env_json(subs[9].env);
            ec.params = json{{"x1", v.x1}, {"x2", v.x2}, {"n", v.n_mix}, {"kmax", v.kmax_mix}};
            if (v.q_mix > 0) ec.params["q"] = v.q_mix;
            ec.out_dir = subs[9].out;
        } else if (mc->parsed()) {
            ec.command = "mc";
            ec.env = detail::env_json(subs[10].env);
            ec.params = json{{"x", v.x_mc}, {"seed", v.seed_mc}, {"paths", v.paths_mc},
                             {"horizon", v.horizon_mc}};
            if (!v.cp_mc.empty()) ec.params["checkpoints"] = v.cp_mc;
            ec.out_dir = subs[10].out;
            threads = subs[10].threads;
        } else if (c16->parsed()) {
            ec.command = "cond16";
            ec.env = detail::env_json(subs[11].env);
            ec.params = json{{"x", v.x_c16}, {"seed", v.seed_c16}, {"paths", v.paths_c16},
                             {"horizon", v.horizon_c16}};
            if (!v.cp_c16.empty()) ec.params["checkpoints"] = v.cp_c16;
            ec.out_dir = subs[11].out;
            threads = subs[11].threads;
        } else if (verify_cmd->parsed()) {
            ec.command = "verify";
            ec.env = env_to_json(default_environment());
            ec.params = json::object();
            ec.out_dir = subs[12].out;
            threads = subs[12].threads;
        } else {
            std::fputs(app.help().c_str(), stderr);
            return 2;
        }
        return detail::dispatch(ec, threads);
    } catch (const CapError& e) {
        std::fprintf(stderr, "resource cap: %s\n", e.what());
        return 3;
    } catch (const PrecisionError& e) {
        std::fprintf(stderr, "precision: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}

inline int run(int argc, const char* const* argv) {
    std::vector<std::string> args;
    args.reserve(static_cast<std::size_t>(argc > 1 ? argc - 1 : 0));
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(std::move(args));
}

}  // namespace qpwalk::cli
