#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "qpwalk/errors.hpp"
#include "qpwalk/lattice.hpp"
#include "qpwalk/occupation.hpp"

using namespace qpwalk;

namespace {

Environment cos_golden() {
    TrigPolynomial f;
    f.cosc = {1.0};
    return Environment::make(std::move(f), golden_alpha());
}

Environment flat() { return Environment::make(TrigPolynomial{}, golden_alpha()); }

}  // namespace

TEST_CASE("walk evolution matches a sparse-map reference") {
    Environment e = cos_golden();
    double x = 0.37;
    oracles::NaiveWalk w = oracles::NaiveWalk::start();
    for (int t = 1; t <= 40; ++t) w.step_walk(e, x);
    LatticeDistribution d = distribution_at(e, x, 40);
    for (std::int64_t s = -40; s <= 40; ++s)
        CHECK(d.at(s) == Catch::Approx(w.at(s)).margin(1e-14));
    CHECK(d.total() == Catch::Approx(1.0).margin(1e-13));
}

TEST_CASE("taboo evolution ledgers the absorbed mass") {
    Environment e = cos_golden();
    double x = 0.37;
    oracles::NaiveWalk w = oracles::NaiveWalk::start();
    for (int t = 1; t <= 30; ++t) w.step_walk(e, x, 0);
    LatticeDistribution d = distribution_at(e, x, 30, 0);
    CHECK(d.absorbed == Catch::Approx(w.absorbed).margin(1e-14));
    for (std::int64_t s = -30; s <= 30; ++s)
        CHECK(d.at(s) == Catch::Approx(w.at(s)).margin(1e-14));
    CHECK(d.total() + d.absorbed == Catch::Approx(1.0).margin(1e-13));
}

TEST_CASE("half chain composes two walk moves exactly") {
    Environment e = cos_golden();
    double x = 0.37;
    oracles::NaiveWalk w = oracles::NaiveWalk::start();
    for (int t = 1; t <= 25; ++t) w.step_half(e, x);
    LatticeDistribution d = distribution_at(e, x, 25, std::nullopt, ChainKind::half);
    for (std::int64_t k = -25; k <= 25; ++k)
        CHECK(d.at(k) == Catch::Approx(w.at(k)).margin(1e-14));

    LatticeDistribution walk50 = distribution_at(e, x, 50);
    for (std::int64_t k = -25; k <= 25; ++k)
        CHECK(d.at(k) == Catch::Approx(walk50.at(2 * k)).margin(1e-13));
}

TEST_CASE("free walk mass sits on one parity class only") {
    LatticeDistribution d = distribution_at(cos_golden(), 0.0, 31);
    for (std::int64_t s = d.lo; s <= d.hi(); ++s)
        if (((s % 2) + 2) % 2 != 1) CHECK(d.at(s) == 0.0);
    CHECK(d.at(1) > 0.0);
}

TEST_CASE("horizon caps reject oversized evolutions before allocating") {
    Environment e = cos_golden();
    CHECK_THROWS_AS(distribution_at(e, 0.0, 2000, std::nullopt, ChainKind::walk, 100), CapError);
    CHECK_THROWS_AS(mu_via_dp(e, 0.0, 2, 2000, 100), CapError);
    CHECK_THROWS_AS(distribution_at(e, 0.0, -1), std::invalid_argument);
}

TEST_CASE("taboo return series increases to at most one") {
    Environment e = cos_golden();
    TabooSeries ts = taboo_series(e, 0.0, 0, 400);
    REQUIRE(ts.terms.size() == 400);
    double run = 0.0;
    for (double v : ts.terms) {
        CHECK(v >= 0.0);
        run += v;
        CHECK(run <= 1.0 + 1e-12);
    }
    CHECK(ts.partial_sum() == Catch::Approx(run).margin(1e-12));
    CHECK(ts.partial_sum() > 0.5);
}

TEST_CASE("batched taboo sums agree with the single-target path") {
    Environment e = cos_golden();
    std::vector<double> batch = mu_via_dp_batch(e, 0.37, {-2, 0, 3}, 2000);
    REQUIRE(batch.size() == 3);
    CHECK(batch[0] == Catch::Approx(mu_via_dp(e, 0.37, -2, 2000)).margin(1e-15));
    CHECK(batch[1] == 1.0);
    CHECK(batch[2] == Catch::Approx(mu_via_dp(e, 0.37, 3, 2000)).margin(1e-15));
}

TEST_CASE("visit-number brackets nest and decay") {
    Environment e = cos_golden();
    VisitNumberBrackets br = visit_number_brackets(e, 0.0, 1, 4, 2000);
    REQUIRE(br.lower.size() == 4);
    REQUIRE(br.upper.size() == 4);
    for (std::size_t j = 0; j < 4; ++j) {
        CHECK(br.lower[j] >= 0.0);
        CHECK(br.lower[j] <= br.upper[j]);
        CHECK(br.upper[j] <= 1.0);
        if (j > 0) {
            CHECK(br.lower[j] <= br.lower[j - 1] + 1e-15);
            CHECK(br.upper[j] <= br.upper[j - 1] + 1e-15);
        }
        CHECK(br.upper[j] - br.lower[j] <= br.unresolved + 1e-12);
    }
}

TEST_CASE("lazy chain return probabilities match the exact binomial law") {
    KORatioReport r = kingman_orey_ratio(flat(), 0.0, 100);
    REQUIRE(r.p0.size() == 101);
    CHECK_FALSE(r.truncated);
    for (std::int64_t k = 0; k <= 100; ++k) {
        double exact = oracles::binomial_site_prob(2 * k, 0);
        CHECK(r.p0[static_cast<std::size_t>(k)] == Catch::Approx(exact).epsilon(1e-11));
    }
    for (std::size_t k = 0; k + 1 < r.p0.size(); ++k) {
        double want = (2.0 * static_cast<double>(k) + 1.0) / (2.0 * static_cast<double>(k) + 2.0);
        CHECK(r.ratio[k] == Catch::Approx(want).epsilon(1e-11));
    }
}

TEST_CASE("return probabilities are subexponential and subadditive") {
    SubexpReport r = subexponential_check(cos_golden(), 0.0, {50, 100, 200});
    CHECK(r.pass);
    REQUIRE(r.rows.size() == 3);
    CHECK(r.rows[0].u_over_n > r.rows[1].u_over_n);
    CHECK(r.rows[1].u_over_n > r.rows[2].u_over_n);
    for (const auto& spot : r.spots) {
        CHECK(spot.ok);
        CHECK(spot.defect <= 1e-9);
    }
}

TEST_CASE("last-visit decomposition closes on the half chain") {
    RenewalReport r = renewal_identity_check(cos_golden(), 0.37, 60, {0, 1, -1});
    REQUIRE(r.rows.size() == 3);
    for (const RenewalReport::Row& row : r.rows) {
        CHECK(row.residual == Catch::Approx(std::fabs(row.lhs - row.rhs)).margin(1e-16));
        CHECK(row.residual < 1e-13);
    }
}

TEST_CASE("ratio matrix pairs sites of equal parity") {
    SrlpReport r = srlp_check(cos_golden(), 0.0, 500, 4);
    REQUIRE(!r.rows.empty());
    for (const SrlpReport::Row& row : r.rows) {
        CHECK(((row.a - row.b) % 2 + 2) % 2 == 0);
        CHECK(row.deviation == Catch::Approx(std::fabs(row.prob_ratio - row.mu_ratio)).margin(1e-15));
    }
    CHECK_THROWS_AS(srlp_check(cos_golden(), 0.0, 4, 5), std::invalid_argument);
}

TEST_CASE("circle projection lands the lattice mass on orbit points") {
    Environment e = cos_golden();
    LatticeDistribution d = distribution_at(e, 0.25, 20);
    AtomicCircleMeasure m = circle_projection(d);
    CHECK(m.normalized);
    CHECK(m.total() == Catch::Approx(1.0).margin(1e-13));
    LatticeDistribution dt = distribution_at(e, 0.25, 20, 0);
    AtomicCircleMeasure mt = circle_projection(dt);
    CHECK_FALSE(mt.normalized);

    MixingReport mix = mixing_distance(e, 0.0, 0.37, 144, harmonic_family(1), 55);
    CHECK(mix.q_stationary == 55);
    REQUIRE(mix.rows.size() == 2);
    for (const MixingReport::Row& row : mix.rows) {
        CHECK(row.gap12 == Catch::Approx(std::fabs(row.e1 - row.e2)).margin(1e-15));
        CHECK(std::fabs(row.e1) <= 1.0);
        CHECK(std::fabs(row.e2) <= 1.0);
    }
}
