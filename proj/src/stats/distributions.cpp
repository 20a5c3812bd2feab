#include "innervsense/distributions.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "innervsense/error.hpp"

namespace innervsense {

namespace {

// Continued fraction for I_x(a, b) (modified Lentz), valid for x < (a+1)/(a+b+2).
double beta_cf(double x, double a, double b) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-16;
  double c = 1.0;
  double d = 1.0 - (a + b) * x / (a + 1.0);
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 10000; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((a + m2 - 1.0) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (a + b + m) * x / ((a + m2) * (a + m2 + 1.0));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return h;
}

struct GaussLegendre {
  std::vector<double> x;
  std::vector<double> w;
};

// Nodes and weights on [-1, 1] by Newton iteration on P_n.
GaussLegendre gauss_legendre(int n) {
  GaussLegendre g{std::vector<double>(n), std::vector<double>(n)};
  for (int i = 0; i < n; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    g.x[i] = z;
    g.w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return g;
}

const GaussLegendre& gl20() {
  static const GaussLegendre g = gauss_legendre(20);
  return g;
}

template <class F>
double integrate(F&& f, double lo, double hi, int panels) {
  const auto& g = gl20();
  const double h = (hi - lo) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = lo + (p + 0.5) * h;
    double s = 0.0;
    for (std::size_t i = 0; i < g.x.size(); ++i) s += g.w[i] * f(mid + 0.5 * h * g.x[i]);
    total += 0.5 * h * s;
  }
  return total;
}

double phi(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }
double big_phi(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// P(range of k iid standard normals <= w).
double range_cdf(double w, double k) {
  if (w <= 0.0) return 0.0;
  const auto integrand = [&](double z) {
    const double inner = big_phi(z) - big_phi(z - w);
    return inner > 0.0 ? phi(z) * std::pow(inner, k - 1.0) : 0.0;
  };
  // phi(z) is below 1e-16 outside [-8.5, 8.5].
  const double value = k * integrate(integrand, -8.5, 8.5, 12);
  return std::min(1.0, std::max(0.0, value));
}

}  // namespace

double incomplete_beta(double x, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw Error(Errc::domain_error, "beta parameters must be positive");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(x, a, b) / a;
  return 1.0 - front * beta_cf(1.0 - x, b, a) / b;
}

double f_cdf(double x, double d1, double d2) {
  if (std::isnan(x) || x < 0.0) throw Error(Errc::domain_error, "F statistic must be non-negative");
  if (!(d1 > 0.0) || !(d2 > 0.0)) throw Error(Errc::domain_error, "degrees of freedom must be positive");
  if (std::isinf(x)) return 1.0;
  return incomplete_beta(d1 * x / (d1 * x + d2), 0.5 * d1, 0.5 * d2);
}

double t_cdf(double x, double nu) {
  if (!(nu > 0.0)) throw Error(Errc::domain_error, "degrees of freedom must be positive");
  if (std::isnan(x)) throw Error(Errc::domain_error, "t statistic is NaN");
  if (std::isinf(x)) return x > 0.0 ? 1.0 : 0.0;
  const double tail = 0.5 * incomplete_beta(nu / (nu + x * x), 0.5 * nu, 0.5);
  return x > 0.0 ? 1.0 - tail : tail;
}

double t_two_sided_p(double t, double nu) {
  if (!(nu > 0.0)) throw Error(Errc::domain_error, "degrees of freedom must be positive");
  if (std::isnan(t)) throw Error(Errc::domain_error, "t statistic is NaN");
  if (std::isinf(t)) return 0.0;
  return incomplete_beta(nu / (nu + t * t), 0.5 * nu, 0.5);
}

double studentized_range_cdf(double q, double k, double nu) {
  if (!(k >= 2.0) || !(nu > 0.0)) throw Error(Errc::domain_error, "need k >= 2 groups and nu > 0");
  if (std::isnan(q)) throw Error(Errc::domain_error, "q is NaN");
  if (q <= 0.0) return 0.0;
  if (std::isinf(q)) return 1.0;
  if (std::isinf(nu) || nu > 1e5) return range_cdf(q, k);

  // Mix over s = sqrt(chi2_nu / nu): P = E[range_cdf(q s)].
  const double log_norm = 0.5 * nu * std::log(nu) - std::lgamma(0.5 * nu) - (0.5 * nu - 1.0) * std::log(2.0);
  const auto density = [&](double s) {
    if (s <= 0.0) return 0.0;
    return std::exp(log_norm + (nu - 1.0) * std::log(s) - 0.5 * nu * s * s);
  };
  const double spread = 12.0 / std::sqrt(nu);
  const double lo = std::max(0.0, 1.0 - spread);
  const double hi = 1.0 + spread;
  const double value = integrate([&](double s) { return density(s) * range_cdf(q * s, k); }, lo, hi, 16);
  return std::min(1.0, std::max(0.0, value));
}

}  // namespace innervsense
