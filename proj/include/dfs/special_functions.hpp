#pragma once

namespace dfs::special {

double normal_cdf(double x);

// Regularized incomplete beta I_x(a, b) by Lentz's continued fraction,
// relative accuracy near 1e-14 for the argument ranges used here.
double incomplete_beta(double a, double b, double x);

// P(|T| >= |t|) for Student's t with `df` degrees of freedom.
double student_t_two_sided(double t, double df);

// Survival function of the limiting Kolmogorov distribution,
// Q(lambda) = 2 * sum_{k>=1} (-1)^(k-1) exp(-2 k^2 lambda^2).
// Uses the Jacobi theta form below lambda = 1.18, where the alternating
// series converges slowly. Absolute error below 1e-12.
double kolmogorov_survival(double lambda);

}  // namespace dfs::special
