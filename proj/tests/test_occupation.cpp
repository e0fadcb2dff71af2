#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "qpwalk/lattice.hpp"
#include "qpwalk/martingale.hpp"
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

TEST_CASE("visit counts are anchored at the origin and stationary") {
    for (const Environment& e : {flat(), cos_golden()}) {
        for (double x : {0.0, 0.37}) {
            VisitProfile v = visit_counts(e, x, 12);
            CHECK(v.at(0) == 1.0);
            CHECK(invariant_density_residual(v, e) < 1e-12);
            for (std::int64_t a = -12; a <= 12; ++a) CHECK(v.at(a) > 0.0);
        }
    }
}

TEST_CASE("symmetric walk visits every site once on average before returning") {
    VisitProfile v = visit_counts(flat(), 0.0, 10);
    for (std::int64_t a = -10; a <= 10; ++a)
        CHECK(v.at(a) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("the origin-factor variant breaks stationarity on nonconstant environments") {
    Environment e = cos_golden();
    CHECK(invariant_density_residual(visit_counts(e, 0.0, 8, true), e) > 1e-3);
    CHECK(invariant_density_residual(visit_counts(flat(), 0.0, 8, true), flat()) < 1e-12);
}

TEST_CASE("taboo evolution reproduces the closed-form visit counts") {
    Environment e = cos_golden();
    VisitProfile v = visit_counts(e, 0.37, 6);
    for (std::int64_t a : {-3, -1, 1, 2}) {
        double dp = mu_via_dp(e, 0.37, a, 20000);
        CHECK(dp == Catch::Approx(v.at(a)).epsilon(0.02));
    }
    CHECK(mu_via_dp(e, 0.37, 0, 100) == 1.0);
}

TEST_CASE("geometric escape parameter lies strictly inside the unit interval") {
    Environment e = cos_golden();
    MartingaleTable t = build_martingale(e, 0.37, 16);
    for (std::int64_t a = -10; a <= 10; ++a) {
        if (a == 0) continue;
        double r = geometric_parameter(e, 0.37, a, t);
        CHECK(r > 0.0);
        CHECK(r < 1.0);
    }
    CHECK_THROWS_AS(geometric_parameter(e, 0.37, 0, t), std::invalid_argument);
    CHECK_THROWS_AS(geometric_parameter(e, 0.37, 17, t), std::invalid_argument);
}

TEST_CASE("parity blocks carry the visit mass split") {
    Environment e = cos_golden();
    NuPair nu = nu_measures(e, 0.0, 13);
    VisitProfile v = visit_counts(e, 0.0, 13);
    double even = 0.0, odd = 0.0;
    for (std::int64_t k = 0; k < 13; ++k) (k % 2 == 0 ? even : odd) += v.at(k);
    CHECK(nu.mass_even == Catch::Approx(even).margin(1e-12));
    CHECK(nu.mass_odd == Catch::Approx(odd).margin(1e-12));
    CHECK(nu.even.total() == Catch::Approx(1.0).margin(1e-12));
    CHECK(nu.odd.total() == Catch::Approx(1.0).margin(1e-12));
    CHECK(nu.even.atoms.size() == 7);
    CHECK(nu.odd.atoms.size() == 6);
    CHECK_THROWS_AS(nu_measures(e, 0.0, 1), std::invalid_argument);
}

TEST_CASE("recombined estimate is a probability measure with settled masses") {
    Environment e = cos_golden();
    StationaryEstimate st = stationary_estimate(e, 0.0, 55);
    CHECK(st.measure.normalized);
    CHECK(st.measure.total() == Catch::Approx(1.0).margin(1e-12));
    CHECK(st.mass_ok);
    for (const Atom& a : st.measure.atoms) {
        CHECK(a.w > 0.0);
        CHECK(a.pos >= 0.0);
        CHECK(a.pos < 1.0);
    }
}

TEST_CASE("harmonic integrals require normalization and respect bounds") {
    Environment e = cos_golden();
    StationaryEstimate st = stationary_estimate(e, 0.0, 34);
    for (const Harmonic& h : harmonic_family(2)) {
        double v = test_integral(st.measure, h);
        CHECK(std::fabs(v) <= 1.0);
    }
    AtomicCircleMeasure raw;
    raw.atoms = {{0.25, 2.0}};
    CHECK_THROWS_AS(test_integral(raw, harmonic_family(1)[0]), std::invalid_argument);
}

TEST_CASE("kernel pushforward conserves mass and shifts atoms by the rotation") {
    Environment e = cos_golden();
    AtomicCircleMeasure m;
    m.atoms = {{0.2, 0.5}, {0.7, 0.5}};
    m.normalized = true;
    AtomicCircleMeasure out = pushforward(m, e);
    CHECK(out.total() == Catch::Approx(1.0).margin(1e-14));
    CHECK(out.atoms.size() == 4);
    for (const Atom& a : out.atoms) {
        bool from_known = false;
        for (double src : {0.2, 0.7})
            for (double sgn : {1.0, -1.0})
                if (std::fabs(a.pos - wrap_unit(src + sgn * e.alpha.value)) < 1e-12)
                    from_known = true;
        CHECK(from_known);
    }
}

TEST_CASE("quasi-invariance diagnostic reports one row per harmonic") {
    Environment e = cos_golden();
    StationaryEstimate st = stationary_estimate(e, 0.0, 55);
    auto rows = quasi_invariance_diagnostic(st.measure, e, harmonic_family(2));
    REQUIRE(rows.size() == 4);
    for (const QuasiInvarianceRow& r : rows) {
        CHECK(r.gap == Catch::Approx(std::fabs(r.rotated - r.reweighted)).margin(1e-15));
        CHECK(r.gap < 0.01);
    }
}
