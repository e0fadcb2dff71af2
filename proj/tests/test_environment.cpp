#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "qpwalk/environment.hpp"
#include "qpwalk/martingale.hpp"

using namespace qpwalk;

namespace {

Environment cos_env(double a1) {
    TrigPolynomial f;
    f.cosc = {a1};
    return Environment::make(std::move(f), golden_alpha());
}

}  // namespace

TEST_CASE("jump probabilities are complementary and certified") {
    TrigPolynomial f;
    f.cosc = {0.8, -0.3};
    f.sinc = {0.0, 0.5};
    Environment e = Environment::make(std::move(f), silver_alpha());
    for (int i = 0; i < 9973; ++i) {
        double x = wrap_unit(static_cast<double>(i) / 9973.0 + 0.000271828);
        double p = eval_p(e, x);
        CHECK(eval_q(e, x) == 1.0 - p);
        CHECK(p >= e.pmin);
        CHECK(p <= e.pmax);
    }
    CHECK(e.pmin > 0.0);
    CHECK(e.pmax < 1.0);
}

TEST_CASE("flat environment gives the symmetric walk exactly") {
    Environment e = Environment::make(TrigPolynomial{}, golden_alpha());
    CHECK(e.pmin == 0.5);
    CHECK(e.pmax == 0.5);
    CHECK(eval_p(e, 0.123) == 0.5);
    CHECK(logistic(0.0) == 0.5);
    CHECK(logistic(-1.7) == Catch::Approx(1.0 - logistic(1.7)).epsilon(1e-15));
}

TEST_CASE("total variation of trig polynomials matches a dense scan") {
    TrigPolynomial mixed;
    mixed.cosc = {1.0, 0.25};
    mixed.sinc = {0.5};
    for (const TrigPolynomial& f :
         {cos_env(1.0).f, cos_env(-2.0).f, mixed}) {
        const int grid = 200000;
        double scan = 0.0;
        double prev = f.eval(0.0);
        for (int i = 1; i <= grid; ++i) {
            double cur = f.eval(static_cast<double>(i) / grid);
            scan += std::fabs(cur - prev);
            prev = cur;
        }
        CHECK(total_variation(f) == Catch::Approx(scan).epsilon(1e-4));
    }
    CHECK(total_variation(TrigPolynomial{}) == 0.0);
    CHECK(total_variation(cos_env(1.0).f) == Catch::Approx(4.0).margin(1e-9));
}

TEST_CASE("birkhoff sums equal the direct orbit accumulation") {
    Environment e = cos_env(1.0);
    for (double x : {0.0, 0.37, 0.91}) {
        double direct = 0.0;
        double y = x;
        for (int j = 0; j < 233; ++j) {
            y = wrap_unit(y + e.alpha.value);
            direct += e.f.eval(y);
        }
        CHECK(birkhoff_sum(e, x, 233) == Catch::Approx(direct).margin(1e-10));
    }
    CHECK(birkhoff_sum(e, 0.37, 0) == 0.0);
    CHECK_THROWS_AS(birkhoff_sum(e, 0.37, -1), std::invalid_argument);
}

TEST_CASE("variation bound certificate holds at close returns and rejects other times") {
    Environment e = cos_env(1.0);
    std::vector<double> grid = uniform_grid(256);
    DKReport r = denjoy_koksma_certificate(e, grid, 55);
    CHECK(r.pass);
    CHECK(r.violations == 0);
    CHECK(r.max_abs_sum <= r.variation);
    CHECK_THROWS_AS(denjoy_koksma_certificate(e, grid, 20), std::invalid_argument);
}

TEST_CASE("multiplicative drift products stay above the variation floor") {
    Environment e = cos_env(1.0);
    std::vector<double> grid = uniform_grid(128);
    ProductBandReport r = close_return_product_check(e, grid, 89);
    CHECK(r.pass);
    CHECK(r.min_product >= r.floor_value);
    CHECK(r.max_abs_log <= r.variation);
    CHECK_THROWS_AS(close_return_product_check(e, grid, 90), std::invalid_argument);
}

TEST_CASE("orbit tables agree with direct evaluation") {
    Environment e = cos_env(1.0);
    OrbitTable t = OrbitTable::build(e, 0.37, 50);
    for (std::int64_t k = -50; k <= 50; ++k) {
        double x = wrap_unit(0.37 + static_cast<double>(k) * e.alpha.value);
        CHECK(t.pos_at(k) == Catch::Approx(x).margin(1e-11));
        CHECK(t.p_at(k) == eval_p(e, t.pos_at(k)));
        CHECK(t.q_at(k) == 1.0 - t.p_at(k));
    }
    CHECK_THROWS_AS(OrbitTable::build(e, 0.0, -1), std::invalid_argument);

    OrbitTable c = OrbitTable::constant(0.7, 10);
    CHECK(c.p_at(-10) == 0.7);
    CHECK(c.p_at(10) == 0.7);
}
