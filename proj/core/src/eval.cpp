#include "fdreg/eval.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace fdreg {

EvalReport rmse(const Tensor& preds, const Tensor& targets) {
    preds.require_ndim(2);
    targets.require_ndim(2);
    if (!preds.same_shape(targets))
        throw std::invalid_argument("rmse: prediction/target shapes differ");
    const std::size_t n = preds.rows(), d2 = preds.cols();
    EvalReport rep;
    rep.n = n;
    rep.per_target.resize(d2);
    double total = 0.0;
    for (std::size_t j = 0; j < d2; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double diff = preds(i, j) - targets(i, j);
            s += diff * diff;
        }
        rep.per_target[j] = std::sqrt(s / double(n));
        total += s;
    }
    rep.overall = std::sqrt(total / double(n * d2));
    return rep;
}

namespace {

// Continued fraction for the incomplete beta (modified Lentz iteration).
double betacf(double a, double b, double x) {
    constexpr int max_iter = 300;
    constexpr double eps = 3e-16;
    constexpr double fpmin = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) break;
    }
    return h;
}

}  // namespace

double betai(double a, double b, double x) {
    if (!(a > 0.0 && b > 0.0)) throw std::invalid_argument("betai: a, b must be positive");
    if (x < 0.0 || x > 1.0) throw std::invalid_argument("betai: x must lie in [0, 1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double bt = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                               a * std::log(x) + b * std::log1p(-x));
    if (x < (a + 1.0) / (a + b + 2.0)) return bt * betacf(a, b, x) / a;
    return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

TTestResult paired_t_test(const std::vector<double>& errors_a,
                          const std::vector<double>& errors_b, double level) {
    if (errors_a.size() != errors_b.size())
        throw std::invalid_argument("paired_t_test: vectors must pair up");
    const std::size_t n = errors_a.size();
    if (n < 2) throw std::invalid_argument("paired_t_test: need at least 2 pairs");
    if (!(level > 0.0 && level < 1.0))
        throw std::invalid_argument("paired_t_test: significance level must lie in (0, 1)");

    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += errors_a[i] - errors_b[i];
    mean /= double(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double d = (errors_a[i] - errors_b[i]) - mean;
        ss += d * d;
    }
    const double sd = std::sqrt(ss / double(n - 1));  // sample standard deviation

    TTestResult res;
    res.df = n - 1;
    res.level = level;
    if (sd == 0.0) {
        if (mean == 0.0) {
            res.t = 0.0;
            res.p = 1.0;
        } else {
            // Identical nonzero differences: the statistic blows up.
            res.t = mean > 0.0 ? std::numeric_limits<double>::infinity()
                               : -std::numeric_limits<double>::infinity();
            res.p = 0.0;
            res.degenerate = true;
        }
    } else {
        res.t = mean / (sd / std::sqrt(double(n)));
        const double df = double(res.df);
        res.p = betai(0.5 * df, 0.5, df / (df + res.t * res.t));
    }
    res.significant = res.p < level;
    return res;
}

}  // namespace fdreg
