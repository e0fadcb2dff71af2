#include <catch2/catch_amalgamated.hpp>

#include <atomic>
#include <set>

#include "oracles.hpp"
#include "qpwalk/errors.hpp"
#include "qpwalk/monte_carlo.hpp"
#include "qpwalk/parallel.hpp"
#include "qpwalk/rng.hpp"

using namespace qpwalk;

namespace {

Environment cos_golden() {
    TrigPolynomial f;
    f.cosc = {1.0};
    return Environment::make(std::move(f), golden_alpha());
}

Environment flat() { return Environment::make(TrigPolynomial{}, golden_alpha()); }

}  // namespace

TEST_CASE("stream seeds separate paths and generators stay in range") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(stream_seed(12345, i));
    CHECK(seen.size() == 1000);
    CHECK(mix64(1) != 0);
    CHECK(mix64(1) != mix64(2));
    CHECK(stream_seed(0, 0) != 0);

    SplitMix64 rng(42);
    SplitMix64 rng2(42);
    for (int i = 0; i < 1000; ++i) {
        double u = rng.next_double();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        CHECK(u == rng2.next_double());
    }
}

TEST_CASE("parallel loops cover the index range once and forward errors") {
    std::vector<std::atomic<int>> hits(10000);
    parallel_for(10000, 4, [&](std::uint64_t i) { hits[i].fetch_add(1); });
    for (const auto& h : hits) CHECK(h.load() == 1);
    CHECK(resolve_threads(3) == 3);
    CHECK(resolve_threads(0) >= 1);
    CHECK_THROWS_AS(parallel_for(100, 4,
                                 [](std::uint64_t i) {
                                     if (i == 57) throw std::runtime_error("worker failure");
                                 }),
                    std::runtime_error);
}

TEST_CASE("config validation rejects malformed ensembles") {
    SimConfig cfg;
    cfg.paths = 0;
    cfg.horizon = 10;
    cfg.checkpoints = {10};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.paths = 1;
    cfg.checkpoints = {};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.checkpoints = {4, 4};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.checkpoints = {4, 20};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.checkpoints = {4, 10};
    CHECK_NOTHROW(cfg.validate());
    CHECK(SimConfig::default_checkpoints(1000) == std::vector<std::int64_t>({125, 250, 500, 1000}));
    CHECK(SimConfig::default_checkpoints(1) == std::vector<std::int64_t>({1}));
}

TEST_CASE("simulation summaries are internally consistent and reproducible") {
    SimConfig cfg;
    cfg.seed = 9001;
    cfg.paths = 4000;
    cfg.horizon = 300;
    cfg.checkpoints = {100, 300};
    cfg.threads = 1;
    SimResult a = simulate(cos_golden(), 0.37, cfg);
    REQUIRE(a.rows.size() == 2);
    REQUIRE(a.rows[0].size() == 4000);
    for (std::size_t c = 0; c < 2; ++c)
        for (const PathSummary& ps : a.rows[c]) {
            CHECK(ps.min <= ps.site);
            CHECK(ps.site <= ps.max);
            CHECK(ps.min <= 0);
            CHECK(ps.max >= 0);
            CHECK(ps.gap == ps.max - ps.site);
            CHECK(ps.at_max == (ps.site == ps.max));
            CHECK(ps.at_min == (ps.site == ps.min));
            CHECK((ps.site % 2 + 2) % 2 == a.checkpoints[c] % 2);
        }

    cfg.threads = 3;
    SimResult b = simulate(cos_golden(), 0.37, cfg);
    for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t i = 0; i < a.rows[c].size(); ++i) {
            CHECK(a.rows[c][i].site == b.rows[c][i].site);
            CHECK(a.rows[c][i].max == b.rows[c][i].max);
            CHECK(a.rows[c][i].min == b.rows[c][i].min);
        }
}

TEST_CASE("ensemble frequencies match the exact path law at a short horizon") {
    Environment e = cos_golden();
    double x = 0.37;
    const int horizon = 10;
    auto law = oracles::enumerate_paths(e, x, horizon);
    double p_at_max = 0.0, p_at_min = 0.0, mean_site = 0.0;
    for (const auto& row : law) {
        if (row.site == row.max) p_at_max += row.prob;
        if (row.site == row.min) p_at_min += row.prob;
        mean_site += row.prob * static_cast<double>(row.site);
    }

    SimConfig cfg;
    cfg.seed = 777;
    cfg.paths = 200000;
    cfg.horizon = horizon;
    cfg.checkpoints = {horizon};
    cfg.threads = 2;
    SimResult sim = simulate(e, x, cfg);
    std::int64_t hits_max = 0, hits_min = 0;
    double sum = 0.0;
    for (const PathSummary& ps : sim.rows[0]) {
        hits_max += ps.at_max ? 1 : 0;
        hits_min += ps.at_min ? 1 : 0;
        sum += static_cast<double>(ps.site);
    }
    double m = static_cast<double>(cfg.paths);
    // three-sigma bands around the exact values, binomial and CLT widths
    CHECK(std::fabs(static_cast<double>(hits_max) / m - p_at_max) <
          3.0 * std::sqrt(p_at_max * (1.0 - p_at_max) / m));
    CHECK(std::fabs(static_cast<double>(hits_min) / m - p_at_min) <
          3.0 * std::sqrt(p_at_min * (1.0 - p_at_min) / m));
    CHECK(std::fabs(sum / m - mean_site) < 3.0 * std::sqrt(static_cast<double>(horizon) / m));
}

TEST_CASE("extremum rows recount the ensemble and wrap wilson intervals") {
    SimConfig cfg;
    cfg.seed = 5;
    cfg.paths = 3000;
    cfg.horizon = 200;
    cfg.checkpoints = {50, 200};
    cfg.threads = 1;
    SimResult sim = simulate(flat(), 0.0, cfg);
    std::vector<Condition16Row> rows = condition16_rows(sim);
    REQUIRE(rows.size() == 2);
    for (std::size_t c = 0; c < rows.size(); ++c) {
        std::int64_t want_max = 0, want_min = 0;
        for (const PathSummary& ps : sim.rows[c]) {
            want_max += ps.at_max ? 1 : 0;
            want_min += ps.at_min ? 1 : 0;
        }
        CHECK(rows[c].hits_max == want_max);
        CHECK(rows[c].hits_min == want_min);
        CHECK(rows[c].p_max == Catch::Approx(static_cast<double>(want_max) / 3000.0).margin(1e-15));
        Interval w = wilson_interval(want_max, 3000);
        CHECK(rows[c].ci_max.lo == Catch::Approx(w.lo).margin(1e-15));
        CHECK(rows[c].ci_max.hi == Catch::Approx(w.hi).margin(1e-15));
        CHECK(rows[c].ci_max.lo <= rows[c].p_max);
        CHECK(rows[c].p_max <= rows[c].ci_max.hi);
    }
}

TEST_CASE("running maximum frequency tracks the reflection asymptotics") {
    // P(at running max) ~ sqrt(2/(pi n)) for the symmetric walk
    SimConfig cfg;
    cfg.seed = 31337;
    cfg.paths = 50000;
    cfg.horizon = 4096;
    cfg.checkpoints = {1024, 4096};
    cfg.threads = 2;
    std::vector<Condition16Row> rows = condition16_rows(simulate(flat(), 0.0, cfg));
    for (std::size_t c = 0; c < rows.size(); ++c) {
        double n = static_cast<double>(rows[c].n);
        double want = std::sqrt(2.0 / (3.14159265358979324 * n));
        CHECK(rows[c].p_max == Catch::Approx(want).epsilon(0.15));
    }
    CHECK(rows[1].p_max < rows[0].p_max);
}

TEST_CASE("empirical harmonic averages sit near the exact evolution") {
    Environment e = cos_golden();
    SimConfig cfg;
    cfg.seed = 271828;
    cfg.paths = 20000;
    cfg.horizon = 500;
    cfg.checkpoints = {500};
    cfg.threads = 2;
    std::vector<MixingEstimateRow> rows = empirical_mixing(e, {0.37}, cfg, harmonic_family(1));
    REQUIRE(rows.size() == 2);
    LatticeDistribution d = distribution_at(e, 0.37, 500);
    AtomicCircleMeasure m = circle_projection(d);
    for (const MixingEstimateRow& r : rows) {
        double exact = test_integral(m, r.h);
        CHECK(std::fabs(r.mean - exact) < 4.0 * r.sem);
        CHECK(r.ci.lo <= r.mean);
        CHECK(r.mean <= r.ci.hi);
    }
}

TEST_CASE("gap law of the symmetric walk approaches the reflected gaussian") {
    SimConfig cfg;
    cfg.seed = 1618;
    cfg.paths = 30000;
    cfg.horizon = 2000;
    cfg.checkpoints = {2000};
    cfg.threads = 2;
    BrownianReport rep = brownian_functional_check(flat(), 0.0, cfg, {0.25, 0.5, 1.0, 2.0});
    CHECK(rep.sigma_hat == Catch::Approx(1.0).epsilon(0.05));
    REQUIRE(rep.rows.size() == 4);
    for (const BrownianRow& row : rep.rows) {
        CHECK(row.gap == Catch::Approx(std::fabs(row.empirical - row.integral)).margin(1e-15));
        CHECK(row.gap < 0.02);
    }
    CHECK_THROWS_AS(brownian_functional_check(flat(), 0.0, cfg, {-0.5}), std::invalid_argument);
}

TEST_CASE("simulation rejects undersized orbit tables and oversized horizons") {
    OrbitTable orbit = OrbitTable::constant(0.5, 100);
    SimConfig cfg;
    cfg.paths = 10;
    cfg.horizon = 200;
    cfg.checkpoints = {200};
    CHECK_THROWS_AS(simulate(orbit, cfg), CapError);
    cfg.horizon = kDefaultHorizon + 1;
    cfg.checkpoints = {kDefaultHorizon + 1};
    CHECK_THROWS_AS(simulate(flat(), 0.0, cfg), CapError);
}
