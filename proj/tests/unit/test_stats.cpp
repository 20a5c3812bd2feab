#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "innervsense/anova.hpp"
#include "innervsense/distributions.hpp"
#include "test_support.hpp"

using namespace innervsense;

namespace {

struct FRow {
  double x, d1, d2, cdf;
};
struct QRow {
  double q, k, nu, cdf;
};
struct TRow {
  double t, nu, cdf, p2;
};

// Frozen from scipy 1.15.3 (scipy.stats.f, studentized_range, t).
const FRow kF[] = {
    {0.05, 1, 1, 0.14004869609310205},
    {0.05, 2, 60, 0.04873098409945661},
    {0.05, 4, 60, 0.004813967688068099},
    {0.05, 8, 60, 6.750484982860141e-05},
    {0.05, 3, 7, 0.015993684352011078},
    {0.05, 10, 200, 7.222885800690777e-06},
    {0.05, 200, 200, 2.2802501064475935e-76},
    {0.05, 150, 20, 1.0484350547897481e-32},
    {0.05, 1, 200, 0.17670849044183343},
    {0.05, 37, 3, 7.13754790151391e-08},
    {0.3, 1, 1, 0.3190057200399772},
    {0.3, 2, 60, 0.25807708221287584},
    {0.3, 4, 60, 0.12318152926719875},
    {0.3, 8, 60, 0.036837461097596884},
    {0.3, 3, 7, 0.17534136610063897},
    {0.3, 10, 200, 0.019457982688219827},
    {0.3, 200, 200, 6.966836168236351e-17},
    {0.3, 150, 20, 1.2877453888506826e-05},
    {0.3, 1, 200, 0.41550683829821355},
    {0.3, 37, 3, 0.029727440497565375},
    {0.9, 1, 1, 0.4832391038343557},
    {0.9, 2, 60, 0.5880132404840936},
    {0.9, 4, 60, 0.5302311562222504},
    {0.9, 8, 60, 0.47753939594452016},
    {0.9, 3, 7, 0.5125131671751135},
    {0.9, 10, 200, 0.4658011559955666},
    {0.9, 200, 200, 0.22846579122522834},
    {0.9, 150, 20, 0.3439256594876481},
    {0.9, 1, 200, 0.6560733862656293},
    {0.9, 37, 3, 0.3569384794536653},
    {1.0, 1, 1, 0.5000000000000001},
    {1.0, 2, 60, 0.6260729988426408},
    {1.0, 4, 60, 0.5852597921179011},
    {1.0, 8, 60, 0.5543631610902892},
    {1.0, 3, 7, 0.5529203865315163},
    {1.0, 10, 200, 0.5552363595582464},
    {1.0, 200, 200, 0.5000000000000132},
    {1.0, 150, 20, 0.46569807802431146},
    {1.0, 1, 200, 0.6814811520902532},
    {1.0, 37, 3, 0.4036703667252205},
    {1.7, 1, 1, 0.5834784097728859},
    {1.7, 2, 60, 0.8086362049897886},
    {1.7, 4, 60, 0.838148833139769},
    {1.7, 8, 60, 0.8829696017157525},
    {1.7, 3, 7, 0.7467560729351993},
    {1.7, 10, 200, 0.9172443233158121},
    {1.7, 200, 200, 0.999902654530858},
    {1.7, 150, 20, 0.916296692909447},
    {1.7, 1, 200, 0.806213312371706},
    {1.7, 37, 3, 0.626566224963007},
    {2.87, 1, 1, 0.6605271057674903},
    {2.87, 2, 60, 0.9354871067894299},
    {2.87, 4, 60, 0.9695361570379228},
    {2.87, 8, 60, 0.9909893480181141},
    {2.87, 3, 7, 0.8867479182018259},
    {2.87, 10, 200, 0.9977050954760902},
    {2.87, 200, 200, 0.9999999999998375},
    {2.87, 150, 20, 0.995921741106},
    {2.87, 1, 200, 0.9081984902462689},
    {2.87, 37, 3, 0.7904749403695268},
    {5.0, 1, 1, 0.73227952719877},
    {5.0, 2, 60, 0.9901916419527138},
    {5.0, 4, 60, 0.9984820522335549},
    {5.0, 8, 60, 0.9999105004343403},
    {5.0, 3, 7, 0.9633266457818135},
    {5.0, 10, 200, 0.9999982337594382},
    {5.0, 200, 200, 0.9999999999999999},
    {5.0, 150, 20, 0.9999332106421679},
    {5.0, 1, 200, 0.9735478367245298},
    {5.0, 37, 3, 0.8957154526641333},
    {20.0, 1, 1, 0.8599513039068979},
    {20.0, 2, 60, 0.9999997789260803},
    {20.0, 4, 60, 0.9999999998342696},
    {20.0, 8, 60, 0.9999999999999744},
    {20.0, 3, 7, 0.9991774207533924},
    {20.0, 10, 200, 0.9999999999999999},
    {20.0, 200, 200, 0.9999999999999999},
    {20.0, 150, 20, 0.9999999997131879},
    {20.0, 1, 200, 0.9999870292807713},
    {20.0, 37, 3, 0.9849822845646355},
};
const QRow kQ[] = {
    {3.399, 3, 60.0, 0.9500281560471127},
    {3.977, 5, 60.0, 0.9499632574689292},
    {2.0, 2, 10.0, 0.8123301291303988},
    {4.5, 4, 20.0, 0.9776628420601758},
    {1.5, 3, 5.0, 0.4246358948473537},
    {5.5, 6, 30.0, 0.993750460772158},
    {3.0, 5, 1000.0, 0.788271156758619},
    {0.5, 3, 60.0, 0.06650379425552644},
    {2.5, 10, 12.0, 0.2574709008293169},
    {6.0, 3, 4.0, 0.9714435537590064},
};
const TRow kT[] = {
    {2.0, 60.0, 0.9749834781742712, 0.050033043651457436},
    {1.0, 5.0, 0.8183912661754387, 0.36321746764912255},
    {3.5, 10.0, 0.9971367472850574, 0.0057265054298852106},
    {0.0, 7.0, 0.5, 1.0},
    {-2.5, 3.0, 0.04385332350403277, 0.08770664700806555},
    {10.0, 1.0, 0.9682744825694464, 0.06345103486110712},
};

struct OracleEffects {
  long double ss_a, ss_b, ss_ab, ss_e, ss_t;
};

// Sums of squares straight from the definitions, in long double.
OracleEffects anova_oracle(const FactorialTable& t) {
  const std::size_t A = t.a_levels().size(), B = t.b_levels().size(), R = t.n_rep();
  long double gm = 0.0L;
  std::vector<long double> ma(A, 0.0L), mb(B, 0.0L);
  std::vector<std::vector<long double>> cell(A, std::vector<long double>(B, 0.0L));
  for (std::size_t i = 0; i < A; ++i)
    for (std::size_t j = 0; j < B; ++j)
      for (std::size_t r = 0; r < R; ++r) {
        const long double x = t.at(i, j, r);
        gm += x;
        ma[i] += x;
        mb[j] += x;
        cell[i][j] += x;
      }
  gm /= static_cast<long double>(A * B * R);
  for (auto& m : ma) m /= static_cast<long double>(B * R);
  for (auto& m : mb) m /= static_cast<long double>(A * R);
  for (auto& row : cell)
    for (auto& m : row) m /= static_cast<long double>(R);
  OracleEffects o{0, 0, 0, 0, 0};
  for (std::size_t i = 0; i < A; ++i) o.ss_a += (ma[i] - gm) * (ma[i] - gm);
  o.ss_a *= static_cast<long double>(B * R);
  for (std::size_t j = 0; j < B; ++j) o.ss_b += (mb[j] - gm) * (mb[j] - gm);
  o.ss_b *= static_cast<long double>(A * R);
  for (std::size_t i = 0; i < A; ++i)
    for (std::size_t j = 0; j < B; ++j) {
      const long double d = cell[i][j] - ma[i] - mb[j] + gm;
      o.ss_ab += d * d;
      for (std::size_t r = 0; r < R; ++r) {
        const long double e = t.at(i, j, r) - cell[i][j];
        const long double g = t.at(i, j, r) - gm;
        o.ss_e += e * e;
        o.ss_t += g * g;
      }
    }
  o.ss_ab *= static_cast<long double>(R);
  return o;
}

FactorialTable random_table(std::mt19937_64& rng, std::size_t A, std::size_t B, std::size_t R, double noise) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> al, bl, obs;
  for (std::size_t i = 0; i < A; ++i) al.push_back(10.0 * static_cast<double>(i + 1));
  for (std::size_t j = 0; j < B; ++j) bl.push_back(0.5 * static_cast<double>(j));
  std::vector<double> ea(A), eb(B);
  for (auto& e : ea) e = 50.0 * n(rng);
  for (auto& e : eb) e = 30.0 * n(rng);
  const double level = 1000.0 * n(rng);
  for (std::size_t i = 0; i < A; ++i)
    for (std::size_t j = 0; j < B; ++j) {
      const double inter = 10.0 * n(rng);
      for (std::size_t r = 0; r < R; ++r) obs.push_back(level + ea[i] + eb[j] + inter + noise * n(rng));
    }
  return FactorialTable(al, bl, R, obs);
}

void check_against_oracle(const FactorialTable& t, const AnovaResult& r) {
  const auto o = anova_oracle(t);
  const double A = static_cast<double>(t.a_levels().size()), B = static_cast<double>(t.b_levels().size());
  const double R = static_cast<double>(t.n_rep());
  REQUIRE(r.a.df == A - 1.0);
  REQUIRE(r.b.df == B - 1.0);
  REQUIRE(r.ab.df == (A - 1.0) * (B - 1.0));
  REQUIRE(r.df_error == A * B * (R - 1.0));
  const double tol = 1e-9;
  REQUIRE(r.a.ss == doctest::Approx(static_cast<double>(o.ss_a)).epsilon(tol));
  REQUIRE(r.b.ss == doctest::Approx(static_cast<double>(o.ss_b)).epsilon(tol));
  REQUIRE(r.ab.ss == doctest::Approx(static_cast<double>(o.ss_ab)).epsilon(tol));
  REQUIRE(r.ss_error == doctest::Approx(static_cast<double>(o.ss_e)).epsilon(tol));
  REQUIRE(r.ss_total == doctest::Approx(static_cast<double>(o.ss_t)).epsilon(tol));
  const long double mse = o.ss_e / (A * B * (R - 1.0));
  REQUIRE(r.ms_error == doctest::Approx(static_cast<double>(mse)).epsilon(tol));
  REQUIRE(r.a.f == doctest::Approx(static_cast<double>(o.ss_a / (A - 1.0) / mse)).epsilon(tol));
  REQUIRE(r.b.f == doctest::Approx(static_cast<double>(o.ss_b / (B - 1.0) / mse)).epsilon(tol));
  REQUIRE(r.ab.f == doctest::Approx(static_cast<double>(o.ss_ab / ((A - 1.0) * (B - 1.0)) / mse)).epsilon(tol));
  REQUIRE(r.ss_total == doctest::Approx(r.a.ss + r.b.ss + r.ab.ss + r.ss_error).epsilon(tol));
  REQUIRE(r.a.p == doctest::Approx(1.0 - f_cdf(r.a.f, r.a.df, r.df_error)).epsilon(1e-12));
}

bool share_letter(const std::string& x, const std::string& y) {
  return std::any_of(x.begin(), x.end(), [&](char c) { return y.find(c) != std::string::npos; });
}

}  // namespace

TEST_CASE("f cdf against frozen reference values") {
  for (const auto& r : kF) {
    CAPTURE(r.x);
    CAPTURE(r.d1);
    CAPTURE(r.d2);
    CHECK(std::abs(f_cdf(r.x, r.d1, r.d2) - r.cdf) < 1e-10);
  }
  CHECK(std::abs(f_cdf(2.2, 10, 200) - 0.9808005264847673) < 1e-10);
  CHECK(std::abs(f_cdf(0.5, 2, 60) - 0.390964705761134) < 1e-10);
  CHECK(std::abs(f_cdf(3.0, 4, 60) - 0.9747236786014755) < 1e-10);
}

TEST_CASE("f cdf identities") {
  for (double d : {1.0, 2.0, 7.0, 60.0, 200.0}) {
    CHECK(f_cdf(0.0, d, 3.0) == 0.0);
    CHECK(f_cdf(1.0, d, d) == doctest::Approx(0.5).epsilon(1e-12));
  }
  // P(F(d1,d2) <= x) = 1 - P(F(d2,d1) <= 1/x)
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.01, 10.0);
  for (int i = 0; i < 200; ++i) {
    const double x = u(rng), d1 = 1.0 + static_cast<double>(rng() % 200), d2 = 1.0 + static_cast<double>(rng() % 200);
    REQUIRE(f_cdf(x, d1, d2) == doctest::Approx(1.0 - f_cdf(1.0 / x, d2, d1)).epsilon(1e-10).scale(1.0));
  }
  CHECK_ERRC(f_cdf(-0.1, 2, 3), Errc::domain_error);
  CHECK_ERRC(f_cdf(1.0, 0, 3), Errc::domain_error);
}

TEST_CASE("the interaction p-value near 0.009") {
  const double p = 1.0 - f_cdf(2.87, 8, 60);
  CHECK(std::abs(p - 0.009) <= 0.001);
  CHECK(p == doctest::Approx(0.00901065198188582).epsilon(1e-8));
}

TEST_CASE("incomplete beta") {
  CHECK(incomplete_beta(0.0, 2.0, 3.0) == 0.0);
  CHECK(incomplete_beta(1.0, 2.0, 3.0) == 1.0);
  CHECK(incomplete_beta(0.3, 1.0, 1.0) == doctest::Approx(0.3));
  // I_x(a, 1) = x^a
  for (double a : {0.5, 2.0, 7.5}) CHECK(incomplete_beta(0.4, a, 1.0) == doctest::Approx(std::pow(0.4, a)).epsilon(1e-12));
}

TEST_CASE("student t") {
  for (const auto& r : kT) {
    CAPTURE(r.t);
    CHECK(std::abs(t_cdf(r.t, r.nu) - r.cdf) < 1e-10);
    CHECK(std::abs(t_two_sided_p(r.t, r.nu) - r.p2) < 1e-10);
  }
}

TEST_CASE("studentized range against frozen reference values") {
  for (const auto& r : kQ) {
    CAPTURE(r.q);
    CAPTURE(r.k);
    CAPTURE(r.nu);
    CHECK(std::abs(studentized_range_cdf(r.q, r.k, r.nu) - r.cdf) < 1e-6);
  }
  CHECK(std::abs(studentized_range_cdf(3.3, 3, std::numeric_limits<double>::infinity()) - 0.9486890935818101) < 1e-6);
  CHECK(studentized_range_cdf(0.0, 3, 10) == 0.0);
}

TEST_CASE("studentized range for two means reduces to t") {
  for (double nu : {2.0, 5.0, 10.0, 60.0, 500.0}) {
    for (double q : {0.3, 1.0, 2.0, 3.5, 6.0}) {
      const double via_t = 1.0 - t_two_sided_p(q / std::sqrt(2.0), nu);
      CHECK(std::abs(studentized_range_cdf(q, 2, nu) - via_t) < 1e-6);
    }
  }
}

TEST_CASE("studentized range is monotone") {
  double prev = 0.0;
  for (double q = 0.1; q < 8.0; q += 0.1) {
    const double c = studentized_range_cdf(q, 5, 30);
    REQUIRE(c >= prev - 1e-12);
    prev = c;
  }
  CHECK(prev > 0.999);
  CHECK(studentized_range_cdf(3.0, 3, 20) > studentized_range_cdf(3.0, 6, 20));
}

TEST_CASE("table construction") {
  CHECK_ERRC(FactorialTable({1.0}, {1.0, 2.0}, 2, {1, 2, 3, 4}), Errc::bad_params);
  CHECK_ERRC(FactorialTable({1.0, 2.0}, {1.0, 2.0}, 1, {1, 2, 3, 4}), Errc::insufficient_replicates);
  CHECK_ERRC(FactorialTable({1.0, 2.0}, {1.0, 2.0}, 2, {1, 2, 3}), Errc::unbalanced_design);

  std::vector<FactorialTable::Row> rows;
  for (double a : {135.0, 120.0})
    for (double b : {0.0, 1.0})
      for (int r = 0; r < 3; ++r) rows.push_back({a, b, r, a + b + r});
  const auto t = FactorialTable::from_rows(rows);
  CHECK(t.a_levels() == std::vector<double>{120.0, 135.0});
  CHECK(t.n_rep() == 3);
  CHECK(t.at(1, 1, 2) == 138.0);
  CHECK(t.cell_mean(0, 1) == doctest::Approx(122.0));
  rows.pop_back();
  CHECK_ERRC(FactorialTable::from_rows(rows), Errc::unbalanced_design);
}

TEST_CASE("table csv round-trip") {
  std::mt19937_64 rng(3);
  const auto t = random_table(rng, 3, 5, 5, 10.0);
  std::stringstream ss;
  write_table_csv(ss, t);
  CHECK(ss.str().rfind("angle_deg,mass_kg,rep,pressure_pa\n", 0) == 0);
  const auto back = read_table_csv(ss);
  CHECK(back.a_levels() == t.a_levels());
  CHECK(back.b_levels() == t.b_levels());
  CHECK(back.observations() == t.observations());

  std::stringstream reordered("pressure_pa,rep,mass_kg,angle_deg\n1,0,0,1\n2,1,0,1\n3,0,1,1\n4,1,1,1\n5,0,0,2\n6,1,0,2\n7,0,1,2\n8,1,1,2\n");
  const auto r = read_table_csv(reordered);
  CHECK(r.at(1, 1, 1) == 8.0);
  std::stringstream missing("angle_deg,mass_kg,pressure_pa\n1,2,3\n");
  CHECK_ERRC(read_table_csv(missing), Errc::io_error);
  CHECK_ERRC(read_table_csv_file("/nonexistent/table.csv"), Errc::io_error);
}

TEST_CASE("anova matches the definition oracle on random tables") {
  std::mt19937_64 rng(60);
  for (int trial = 0; trial < 150; ++trial) {
    const std::size_t A = 2 + rng() % 4, B = 2 + rng() % 5, R = 2 + rng() % 6;
    const double noise = std::pow(10.0, static_cast<double>(rng() % 5) - 2.0);
    const auto t = random_table(rng, A, B, R, noise);
    CAPTURE(trial);
    check_against_oracle(t, anova2(t));
  }
}

TEST_CASE("3x5x5 design has dfs 2, 4, 8 over 60") {
  std::mt19937_64 rng(7);
  const auto t = random_table(rng, 3, 5, 5, 5.0);
  const auto r = anova2(t);
  CHECK(r.a.df == 2.0);
  CHECK(r.b.df == 4.0);
  CHECK(r.ab.df == 8.0);
  CHECK(r.df_error == 60.0);
  check_against_oracle(t, r);
}

TEST_CASE("anova invariances") {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 50; ++trial) {
    const auto t = random_table(rng, 3, 4, 4, 20.0);
    const auto base = anova2(t);
    SUBCASE("replicate order") {
      std::vector<double> obs = t.observations();
      for (std::size_t c = 0; c < obs.size(); c += t.n_rep())
        std::shuffle(obs.begin() + static_cast<long>(c), obs.begin() + static_cast<long>(c + t.n_rep()), rng);
      const auto r = anova2(FactorialTable(t.a_levels(), t.b_levels(), t.n_rep(), obs));
      REQUIRE(r.a.ss == doctest::Approx(base.a.ss).epsilon(1e-12));
      REQUIRE(r.ab.f == doctest::Approx(base.ab.f).epsilon(1e-10));
      REQUIRE(r.b.p == doctest::Approx(base.b.p).epsilon(1e-9));
    }
    SUBCASE("scaling") {
      const double c = 0.001 + 50.0 * static_cast<double>(rng() % 1000) / 1000.0;
      std::vector<double> obs = t.observations();
      for (auto& x : obs) x *= c;
      const auto r = anova2(FactorialTable(t.a_levels(), t.b_levels(), t.n_rep(), obs));
      REQUIRE(r.a.ss == doctest::Approx(c * c * base.a.ss).epsilon(1e-9));
      REQUIRE(r.ss_error == doctest::Approx(c * c * base.ss_error).epsilon(1e-9));
      REQUIRE(r.a.f == doctest::Approx(base.a.f).epsilon(1e-9));
      REQUIRE(r.b.f == doctest::Approx(base.b.f).epsilon(1e-9));
      REQUIRE(r.ab.f == doctest::Approx(base.ab.f).epsilon(1e-9));
      REQUIRE(r.ab.p == doctest::Approx(base.ab.p).epsilon(1e-9));
    }
    SUBCASE("offset") {
      std::vector<double> obs = t.observations();
      for (auto& x : obs) x += 1234.5;
      const auto r = anova2(FactorialTable(t.a_levels(), t.b_levels(), t.n_rep(), obs));
      REQUIRE(r.grand_mean == doctest::Approx(base.grand_mean + 1234.5));
      REQUIRE(r.a.ss == doctest::Approx(base.a.ss).epsilon(1e-9));
      REQUIRE(r.ab.ss == doctest::Approx(base.ab.ss).epsilon(1e-9));
      REQUIRE(r.ss_error == doctest::Approx(base.ss_error).epsilon(1e-9));
      REQUIRE(r.a.f == doctest::Approx(base.a.f).epsilon(1e-9));
    }
  }
}

TEST_CASE("degenerate tables") {
  const FactorialTable flat({1, 2, 3}, {1, 2}, 3, std::vector<double>(18, 7.0));
  const auto r = anova2(flat);
  CHECK(r.a.ss == 0.0);
  CHECK(r.b.ss == 0.0);
  CHECK(r.ab.ss == 0.0);
  CHECK(r.ss_error == 0.0);
  CHECK(r.a.f == 0.0);
  CHECK(r.a.p == 1.0);
  CHECK(r.degenerate);

  // Cell means differ, no within-cell noise: F is infinite.
  std::vector<double> obs;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) obs.push_back(10.0 * i);
  const auto s = anova2(FactorialTable({1, 2}, {1, 2}, 2, obs));
  CHECK(std::isinf(s.a.f));
  CHECK(s.a.p == 0.0);
  CHECK(s.b.f == 0.0);
  CHECK(s.degenerate);
}

TEST_CASE("posthoc: equal means share one letter") {
  std::vector<double> obs;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 2; ++j)
      for (int r = 0; r < 3; ++r) obs.push_back(5.0 + j);
  const FactorialTable t({1, 2, 3}, {0, 1}, 3, obs);
  const auto res = anova2(t);
  const auto ph = posthoc(t, res, Factor::a);
  CHECK(ph.skipped);
  CHECK(ph.comparisons.empty());
  CHECK(ph.letters == std::vector<std::string>{"a", "a", "a"});
}

TEST_CASE("posthoc: means 0, 0, 10 give letters a, a, b") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 0.01);
  std::vector<double> obs;
  const double level[] = {0.0, 0.0, 10.0};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int r = 0; r < 4; ++r) obs.push_back(level[i] + n(rng));
  const FactorialTable t({120, 135, 150}, {0, 1, 2}, 4, obs);
  const auto res = anova2(t);
  for (auto method : {PosthocMethod::fisher_lsd, PosthocMethod::tukey_hsd}) {
    const auto ph = posthoc(t, res, Factor::a, method);
    CHECK_FALSE(ph.skipped);
    CHECK(ph.letters == std::vector<std::string>{"a", "a", "b"});
    REQUIRE(ph.comparisons.size() == 3);
    // Hand formula for the first pair: t = diff / sqrt(2 MSE / (b n)).
    const double se = std::sqrt(2.0 * res.ms_error / 12.0);
    const double tt = std::abs(ph.means[0] - ph.means[1]) / se;
    if (method == PosthocMethod::fisher_lsd) CHECK(ph.comparisons[0].p == doctest::Approx(t_two_sided_p(tt, res.df_error)));
    CHECK_FALSE(ph.comparisons[0].significant);
    CHECK(ph.comparisons[1].significant);
    CHECK(ph.comparisons[2].significant);
  }
  CHECK(posthoc(t, res, Factor::b).skipped);
}

TEST_CASE("tukey is never less conservative than fisher") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    const auto t = random_table(rng, 4, 3, 3, 40.0);
    const auto res = anova2(t);
    const auto f = posthoc(t, res, Factor::a, PosthocMethod::fisher_lsd, 0.999);
    const auto q = posthoc(t, res, Factor::a, PosthocMethod::tukey_hsd, 0.999);
    if (f.skipped) continue;
    for (std::size_t c = 0; c < f.comparisons.size(); ++c) REQUIRE(q.comparisons[c].p >= f.comparisons[c].p - 1e-6);
  }
}

TEST_CASE("letters agree with the significance matrix") {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t m = 2 + rng() % 8;
    std::vector<double> means(m);
    for (auto& x : means) x = u(rng);
    const double d = u(rng) / 2.0;
    std::vector<std::vector<bool>> sig(m, std::vector<bool>(m, false));
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) sig[i][j] = std::abs(means[i] - means[j]) > d;
    const auto letters = letter_groups(means, sig);
    REQUIRE(letters.size() == m);
    for (std::size_t i = 0; i < m; ++i) {
      REQUIRE_FALSE(letters[i].empty());
      for (std::size_t j = 0; j < m; ++j) REQUIRE(share_letter(letters[i], letters[j]) == !sig[i][j]);
    }
  }
}

TEST_CASE("factor and method names") {
  const FactorialTable t({1, 2}, {1, 2}, 2, std::vector<double>(8, 1.0));
  CHECK(parse_factor("angle_deg", t) == Factor::a);
  CHECK(parse_factor("mass_kg", t) == Factor::b);
  CHECK(parse_factor("A", t) == Factor::a);
  CHECK_ERRC(parse_factor("speed", t), Errc::unknown_factor);
  CHECK(parse_posthoc_method("tukey_hsd") == PosthocMethod::tukey_hsd);
  CHECK(posthoc_method_name(PosthocMethod::fisher_lsd) == "fisher_lsd");
  CHECK_ERRC(parse_posthoc_method("scheffe"), Errc::usage);
}
