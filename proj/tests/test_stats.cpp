#include <doctest.h>

#include <cmath>
#include <random>

#include "toxtree/stats.hpp"

using namespace toxtree;

TEST_CASE("pearson: perfect positive and negative correlation") {
    auto pos = pearson({1, 2, 3}, {2, 4, 6});
    CHECK(pos.r == doctest::Approx(1.0).epsilon(1e-12));
    auto neg = pearson({1, 2, 3}, {6, 4, 2});
    CHECK(neg.r == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("pearson: hand-computed r = 0.5") {
    auto res = pearson({1, 2, 3}, {1, 3, 2});
    CHECK(res.r == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("pearson: error paths") {
    CHECK_THROWS_AS(pearson({1, 2}, {1, 2, 3}), InputError);
    CHECK_THROWS_AS(pearson({1, 2}, {3, 4}), InputError);       // n < 3
    CHECK_THROWS_AS(pearson({1, 1, 1}, {1, 2, 3}), InputError); // zero variance
}

TEST_CASE("pearson: invariance under positive affine transforms") {
    std::mt19937_64 rng(11);
    std::vector<double> x, y;
    for (int i = 0; i < 50; ++i) {
        x.push_back(static_cast<double>(rng() >> 11) * 0x1.0p-53);
        y.push_back(static_cast<double>(rng() >> 11) * 0x1.0p-53);
    }
    const double base = pearson(x, y).r;

    std::vector<double> ax;
    for (double v : x) ax.push_back(3.5 * v + 2.0);
    CHECK(pearson(ax, y).r == doctest::Approx(base).epsilon(1e-12));
    CHECK(pearson(x, ax).r == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("pearson: p-value matches the t-distribution") {
    // r=0.5, n=3 gives t = 0.5*sqrt(1/0.75) and nu=1; the Cauchy CDF is
    // closed form: p = 1 - (2/pi) atan(|t|).
    auto res = pearson({1, 2, 3}, {1, 3, 2});
    const double t = 0.5 * std::sqrt(1.0 / 0.75);
    const double expected = 1.0 - 2.0 / M_PI * std::atan(t);
    CHECK(res.p_value == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("student t p-value: symmetric, monotone, calibrated") {
    CHECK(student_t_two_tailed_p(0.0, 10) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(student_t_two_tailed_p(2.0, 10) ==
          doctest::Approx(student_t_two_tailed_p(-2.0, 10)).epsilon(1e-12));
    // Large nu approaches the normal: P(|Z|>1.959964) ~ 0.05.
    CHECK(student_t_two_tailed_p(1.959964, 1e7) == doctest::Approx(0.05).epsilon(1e-4));
    // nu=1 closed form again.
    CHECK(student_t_two_tailed_p(1.0, 1.0) == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("incomplete beta: symmetry and edges") {
    CHECK(regularized_incomplete_beta(2.0, 3.0, 0.0) == 0.0);
    CHECK(regularized_incomplete_beta(2.0, 3.0, 1.0) == 1.0);
    const double x = 0.37;
    CHECK(regularized_incomplete_beta(2.0, 3.0, x) ==
          doctest::Approx(1.0 - regularized_incomplete_beta(3.0, 2.0, 1.0 - x))
              .epsilon(1e-12));
    // I_x(1,1) = x.
    CHECK(regularized_incomplete_beta(1.0, 1.0, 0.42) ==
          doctest::Approx(0.42).epsilon(1e-12));
}

TEST_CASE("ols_fit: exact linear fit") {
    std::vector<std::vector<double>> design;
    std::vector<double> y;
    for (double x : {0.0, 1.0, 2.0, 3.0, 4.0}) {
        design.push_back({1.0, x});
        y.push_back(2.0 + 3.0 * x);
    }
    auto betas = ols_fit(design, y);
    REQUIRE(betas.size() == 2);
    CHECK(betas[0] == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(betas[1] == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(r_squared(design, y, betas) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ols_fit: constant target gives zero slope") {
    std::vector<std::vector<double>> design;
    std::vector<double> y;
    for (double x : {1.0, 2.0, 5.0, 9.0}) {
        design.push_back({1.0, x});
        y.push_back(7.0);
    }
    auto betas = ols_fit(design, y);
    CHECK(betas[0] == doctest::Approx(7.0).epsilon(1e-10));
    CHECK(betas[1] == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("ols_fit: planted coefficients recovered under tiny noise") {
    std::mt19937_64 rng(3);
    auto u = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    std::vector<std::vector<double>> design;
    std::vector<double> y;
    for (int i = 0; i < 1000; ++i) {
        const double x1 = u(), x2 = u();
        design.push_back({1.0, x1, x2});
        y.push_back(0.5 + 0.13 * x1 + 0.07 * x2 + (2.0 * u() - 1.0) * 1e-6);
    }
    auto betas = ols_fit(design, y);
    CHECK(betas[0] == doctest::Approx(0.5).epsilon(1e-4));
    CHECK(betas[1] == doctest::Approx(0.13).epsilon(1e-3));
    CHECK(betas[2] == doctest::Approx(0.07).epsilon(1e-3));
}

TEST_CASE("ols_fit: residual orthogonal to every design column") {
    std::mt19937_64 rng(5);
    auto u = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    std::vector<std::vector<double>> design;
    std::vector<double> y;
    for (int i = 0; i < 500; ++i) {
        design.push_back({1.0, u(), u(), u()});
        y.push_back(u());
    }
    auto betas = ols_fit(design, y);
    for (std::size_t col = 0; col < 4; ++col) {
        double dot = 0.0;
        for (std::size_t row = 0; row < design.size(); ++row) {
            double pred = 0.0;
            for (std::size_t j = 0; j < betas.size(); ++j)
                pred += design[row][j] * betas[j];
            dot += design[row][col] * (y[row] - pred);
        }
        CHECK(std::fabs(dot) <= 1e-8);
    }
}

TEST_CASE("ols_fit: collinear duplicate column is singular") {
    std::vector<std::vector<double>> design;
    std::vector<double> y;
    std::mt19937_64 rng(9);
    for (int i = 0; i < 50; ++i) {
        const double x = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        design.push_back({1.0, x, x});
        y.push_back(x);
    }
    CHECK_THROWS_AS(ols_fit(design, y), SingularDesignError);
}
