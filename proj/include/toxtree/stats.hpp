#pragma once
// Statistics kernels: sample Pearson correlation with a two-tailed
// t-distribution p-value, and ordinary least squares.

#include <cstddef>
#include <vector>

#include "toxtree/errors.hpp"

namespace toxtree {

struct PearsonResult {
    double r = 0.0;
    double p_value = 1.0;
    std::size_t n = 0;
};

// Sample Pearson r; p-value two-tailed from t = r*sqrt((n-2)/(1-r^2))
// against Student's t with n-2 degrees of freedom. Requires equal lengths
// >= 3 and non-zero variance in both inputs.
PearsonResult pearson(const std::vector<double>& x, const std::vector<double>& y);

// Row-major design matrix with an explicit leading ones column. Solves
// the normal equations by Cholesky; near-zero pivots raise
// SingularDesignError.
std::vector<double> ols_fit(const std::vector<std::vector<double>>& design,
                            const std::vector<double>& target);

// R^2 of an OLS fit (1 - SSR/SST).
double r_squared(const std::vector<std::vector<double>>& design,
                 const std::vector<double>& target,
                 const std::vector<double>& betas);

// Regularized incomplete beta I_x(a,b), evaluated by the standard
// continued-fraction expansion (modified Lentz), accurate to ~1e-12.
double regularized_incomplete_beta(double a, double b, double x);

// P(|T| > |t|) for Student's t with nu degrees of freedom.
double student_t_two_tailed_p(double t, double nu);

}  // namespace toxtree
