#include "toxtree/stats.hpp"

#include <cmath>
#include <limits>

namespace toxtree {

namespace {

// Continued fraction for the incomplete beta function (modified Lentz).
double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 1e-15;
    constexpr double kFpMin = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    // Use the symmetry relation to keep the continued fraction convergent.
    if (x < (a + 1.0) / (a + b + 2.0))
        return front * betacf(a, b, x) / a;
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double student_t_two_tailed_p(double t, double nu) {
    if (!(nu > 0.0)) throw InputError("degrees of freedom must be positive");
    if (std::isinf(t)) return 0.0;
    const double x = nu / (nu + t * t);
    return regularized_incomplete_beta(nu / 2.0, 0.5, x);
}

PearsonResult pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw InputError("pearson: length mismatch");
    const std::size_t n = x.size();
    if (n < 3) throw InputError("pearson: need at least 3 samples");

    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);

    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw InputError("pearson: zero variance, correlation undefined");

    PearsonResult res;
    res.n = n;
    res.r = sxy / std::sqrt(sxx * syy);
    if (res.r > 1.0) res.r = 1.0;
    if (res.r < -1.0) res.r = -1.0;

    const double nu = static_cast<double>(n - 2);
    if (std::fabs(res.r) >= 1.0) {
        res.p_value = 0.0;
    } else {
        const double t = res.r * std::sqrt(nu / (1.0 - res.r * res.r));
        res.p_value = student_t_two_tailed_p(t, nu);
    }
    return res;
}

std::vector<double> ols_fit(const std::vector<std::vector<double>>& design,
                            const std::vector<double>& target) {
    const std::size_t n = design.size();
    if (n == 0 || n != target.size())
        throw InputError("ols_fit: empty design or length mismatch");
    const std::size_t k = design[0].size();
    if (n <= k) throw InputError("ols_fit: need more rows than columns");

    // Normal equations: A = X^T X, b = X^T y.
    std::vector<double> a(k * k, 0.0);
    std::vector<double> b(k, 0.0);
    for (std::size_t row = 0; row < n; ++row) {
        const auto& x = design[row];
        if (x.size() != k) throw InputError("ols_fit: ragged design matrix");
        for (std::size_t i = 0; i < k; ++i) {
            b[i] += x[i] * target[row];
            for (std::size_t j = i; j < k; ++j) a[i * k + j] += x[i] * x[j];
        }
    }
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < i; ++j) a[i * k + j] = a[j * k + i];

    // Cholesky A = L L^T; a pivot near zero relative to the diagonal scale
    // means rank deficiency.
    double scale = 0.0;
    for (std::size_t i = 0; i < k; ++i) scale = std::max(scale, a[i * k + i]);
    const double tol = scale * 1e-12;
    std::vector<double> l(k * k, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double sum = a[i * k + j];
            for (std::size_t p = 0; p < j; ++p) sum -= l[i * k + p] * l[j * k + p];
            if (i == j) {
                if (sum <= tol) throw SingularDesignError("ols_fit: singular design matrix");
                l[i * k + i] = std::sqrt(sum);
            } else {
                l[i * k + j] = sum / l[j * k + j];
            }
        }
    }

    // Forward then back substitution.
    std::vector<double> z(k);
    for (std::size_t i = 0; i < k; ++i) {
        double sum = b[i];
        for (std::size_t p = 0; p < i; ++p) sum -= l[i * k + p] * z[p];
        z[i] = sum / l[i * k + i];
    }
    std::vector<double> beta(k);
    for (std::size_t i = k; i-- > 0;) {
        double sum = z[i];
        for (std::size_t p = i + 1; p < k; ++p) sum -= l[p * k + i] * beta[p];
        beta[i] = sum / l[i * k + i];
    }
    return beta;
}

double r_squared(const std::vector<std::vector<double>>& design,
                 const std::vector<double>& target,
                 const std::vector<double>& betas) {
    const std::size_t n = design.size();
    double mean = 0.0;
    for (double y : target) mean += y;
    mean /= static_cast<double>(n);
    double ssr = 0.0, sst = 0.0;
    for (std::size_t row = 0; row < n; ++row) {
        double pred = 0.0;
        for (std::size_t j = 0; j < betas.size(); ++j) pred += design[row][j] * betas[j];
        ssr += (target[row] - pred) * (target[row] - pred);
        sst += (target[row] - mean) * (target[row] - mean);
    }
    if (sst == 0.0) return 1.0;
    return 1.0 - ssr / sst;
}

}  // namespace toxtree
