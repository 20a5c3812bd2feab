#pragma once

namespace innervsense {

// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double x, double a, double b);

// P(F <= x) for F(d1, d2). Throws Errc::domain_error for x < 0 or df <= 0.
double f_cdf(double x, double d1, double d2);

// P(T <= x) for Student's t with nu degrees of freedom.
double t_cdf(double x, double nu);
double t_two_sided_p(double t, double nu);

// P(Q <= q) for the studentized range of k means with nu error degrees of
// freedom (nu = infinity allowed). Absolute error below 1e-6.
double studentized_range_cdf(double q, double k, double nu);

}  // namespace innervsense
