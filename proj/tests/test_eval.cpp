#include "fdreg/eval.hpp"
#include "fdreg/rng.hpp"
#include "fdreg/tensor.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

using namespace fdreg;

namespace {

// Two-sided p for a t statistic: 2 * P(T_df > |t|) = I_x(df/2, 1/2) with
// x = df / (df + t^2).
double two_sided_p(double t, std::size_t df) {
    double x = double(df) / (double(df) + t * t);
    return betai(double(df) / 2.0, 0.5, x);
}

}  // namespace

TEST_CASE("rmse: exact values and the per-target/overall relation") {
    Tensor perfect = Tensor::matrix({{1, 2}, {3, 4}});
    EvalReport zero = rmse(perfect, perfect);
    CHECK(zero.overall == 0.0);
    CHECK(zero.per_target == std::vector<double>{0.0, 0.0});
    CHECK(zero.n == 2);

    // constant offset c: every error is c, so every rmse is |c|
    Tensor shifted = Tensor::matrix({{1 - 2.5, 2 - 2.5}, {3 - 2.5, 4 - 2.5}});
    EvalReport off = rmse(shifted, Tensor::matrix({{1, 2}, {3, 4}}));
    CHECK(off.overall == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(off.per_target[0] == doctest::Approx(2.5).epsilon(1e-15));

    // errors {1, 2}: rmse = sqrt((1 + 4) / 2) = sqrt(2.5)
    EvalReport mixed = rmse(Tensor::matrix({{1}, {2}}), Tensor::matrix({{0}, {0}}));
    CHECK(mixed.overall == doctest::Approx(1.5811388300841898).epsilon(1e-15));

    CHECK_THROWS_AS(rmse(Tensor::matrix({{1}}), Tensor::matrix({{1, 2}})),
                    std::invalid_argument);
}

TEST_CASE("rmse: the overall value pools the per-target mean squares") {
    Rng rng(201);
    Tensor preds({7, 3}), targets({7, 3});
    for (double& v : preds.data) v = rng.uniform(-2.0, 2.0);
    for (double& v : targets.data) v = rng.uniform(-2.0, 2.0);
    EvalReport rep = rmse(preds, targets);
    double pooled = 0.0;
    for (double r : rep.per_target) pooled += r * r;
    pooled /= double(rep.per_target.size());
    CHECK(rep.overall * rep.overall == doctest::Approx(pooled).epsilon(1e-12));
}

TEST_CASE("paired test: identical errors are a clean null") {
    std::vector<double> a = {1.0, 2.0, 3.0, 4.0};
    TTestResult res = paired_t_test(a, a);
    CHECK(res.t == 0.0);
    CHECK(res.p == 1.0);
    CHECK(res.df == 3);
    CHECK_FALSE(res.significant);
    CHECK_FALSE(res.degenerate);
}

TEST_CASE("paired test: the worked three-sample case") {
    // differences {1, 2, 3}: mean 2, sample sd 1, t = 2 / (1/sqrt(3))
    std::vector<double> a = {2.0, 4.0, 6.0};
    std::vector<double> b = {1.0, 2.0, 3.0};
    TTestResult res = paired_t_test(a, b);
    CHECK(res.t == doctest::Approx(3.4641016151377544).epsilon(1e-14));
    CHECK(res.df == 2);
    CHECK(res.p == doctest::Approx(0.074179900227448581).epsilon(1e-12));
    CHECK(res.p == doctest::Approx(0.07418).epsilon(1e-3));  // printed reference
    CHECK(res.significant);  // 0.0742 < 0.1
    CHECK(res.level == 0.1);

    TTestResult strict = paired_t_test(a, b, 0.05);
    CHECK_FALSE(strict.significant);

    // swapping the sides flips the sign of t and keeps p
    TTestResult flipped = paired_t_test(b, a);
    CHECK(flipped.t == doctest::Approx(-res.t).epsilon(1e-14));
    CHECK(flipped.p == doctest::Approx(res.p).epsilon(1e-14));
}

TEST_CASE("paired test: adding a common constant to both sides changes nothing") {
    Rng rng(203);
    std::vector<double> a(12), b(12);
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = rng.uniform(0.0, 3.0);
        b[i] = rng.uniform(0.0, 3.0);
    }
    TTestResult base = paired_t_test(a, b);
    std::vector<double> a2 = a, b2 = b;
    for (std::size_t i = 0; i < a.size(); ++i) {
        a2[i] += 7.5;
        b2[i] += 7.5;
    }
    TTestResult shifted = paired_t_test(a2, b2);
    CHECK(shifted.t == doctest::Approx(base.t).epsilon(1e-12));
    CHECK(shifted.p == doctest::Approx(base.p).epsilon(1e-12));
}

TEST_CASE("paired test: degenerate and invalid inputs") {
    // constant nonzero differences: infinitely strong signal, flagged as such
    TTestResult deg = paired_t_test({2.0, 3.0, 4.0}, {1.0, 2.0, 3.0});
    CHECK(deg.degenerate);
    CHECK(deg.p == 0.0);
    CHECK(std::isinf(deg.t));
    CHECK(deg.t > 0.0);
    CHECK(deg.significant);

    TTestResult neg = paired_t_test({1.0, 2.0}, {2.0, 3.0});
    CHECK(neg.degenerate);
    CHECK(neg.t < 0.0);

    CHECK_THROWS_AS(paired_t_test({1.0}, {2.0}), std::invalid_argument);  // N < 2
    CHECK_THROWS_AS(paired_t_test({1.0, 2.0}, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(paired_t_test({1.0, 2.0}, {1.0, 2.0}, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(paired_t_test({1.0, 2.0}, {1.0, 2.0}, 1.0), std::invalid_argument);
}

TEST_CASE("t-distribution tail probabilities match reference values") {
    // scipy.stats.t.sf(|t|, df) * 2, frozen as 12-digit references
    struct Case {
        std::size_t df;
        double t;
        double p;
    };
    const Case cases[] = {
        {2, 0.5, 0.666666666667}, {2, 1.5, 0.272393124891},  {2, 3.0, 0.095465966267},
        {9, 0.5, 0.629071299826}, {9, 1.5, 0.167850656057},  {9, 3.0, 0.014956363910},
        {14, 0.5, 0.624841916240}, {14, 1.5, 0.155825318097}, {14, 3.0, 0.009551512754},
    };
    for (const Case& c : cases) {
        CHECK(two_sided_p(c.t, c.df) == doctest::Approx(c.p).epsilon(1e-9));
        // symmetry of the two-sided value
        CHECK(two_sided_p(-c.t, c.df) == doctest::Approx(c.p).epsilon(1e-9));
    }
}

TEST_CASE("incomplete beta: edges and symmetry") {
    CHECK(betai(2.0, 3.0, 0.0) == 0.0);
    CHECK(betai(2.0, 3.0, 1.0) == 1.0);
    // I_x(a,b) = 1 - I_{1-x}(b,a)
    for (double x : {0.1, 0.37, 0.5, 0.83}) {
        CHECK(betai(2.5, 1.5, x) ==
              doctest::Approx(1.0 - betai(1.5, 2.5, 1.0 - x)).epsilon(1e-13));
    }
    // closed form: I_x(1, 1) = x
    CHECK(betai(1.0, 1.0, 0.42) == doctest::Approx(0.42).epsilon(1e-14));
    // closed form: I_x(1, b) = 1 - (1-x)^b
    CHECK(betai(1.0, 4.0, 0.3) ==
          doctest::Approx(1.0 - std::pow(0.7, 4.0)).epsilon(1e-13));
    CHECK_THROWS_AS(betai(2.0, 3.0, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(betai(0.0, 3.0, 0.5), std::invalid_argument);
}

TEST_CASE("tail probabilities agree with Monte Carlo draws from the t distribution") {
    // Simulate T = Z / sqrt(V / df) with V a sum of df squared normals, then
    // compare the empirical two-sided tail mass with the analytic p-value.
    Rng rng(207);
    const std::size_t n_draws = 200000;
    for (std::size_t df : {2u, 9u, 14u}) {
        std::vector<double> ts(n_draws);
        for (std::size_t i = 0; i < n_draws; ++i) {
            double z = rng.next_gaussian();
            double v = 0.0;
            for (std::size_t k = 0; k < df; ++k) {
                double u = rng.next_gaussian();
                v += u * u;
            }
            ts[i] = z / std::sqrt(v / double(df));
        }
        for (double thresh : {0.8, 1.5, 2.5}) {
            std::size_t beyond = 0;
            for (double t : ts) beyond += std::abs(t) > thresh;
            double empirical = double(beyond) / double(n_draws);
            CHECK(std::abs(empirical - two_sided_p(thresh, df)) < 0.005);
        }
    }
}
