#include "innervsense/anova.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>

#include "innervsense/distributions.hpp"
#include "innervsense/error.hpp"

namespace innervsense {

namespace {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s, const std::string& what) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw Error(Errc::io_error, "cannot parse " + what + " value '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    out.push_back(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

EffectRow effect(double ss, double df, double ms_error, double df_error, bool& degenerate) {
  EffectRow row;
  row.ss = ss;
  row.df = df;
  row.ms = ss / df;
  if (ms_error > 0.0) {
    row.f = row.ms / ms_error;
    row.p = 1.0 - f_cdf(row.f, df, df_error);
  } else if (row.ms > 0.0) {
    row.f = std::numeric_limits<double>::infinity();
    row.p = 0.0;
    degenerate = true;
  } else {
    row.f = 0.0;
    row.p = 1.0;
    degenerate = true;
  }
  return row;
}

}  // namespace

FactorialTable::FactorialTable(std::vector<double> a_levels, std::vector<double> b_levels, std::size_t n_rep,
                               std::vector<double> observations, std::string a_name, std::string b_name)
    : a_levels_(std::move(a_levels)),
      b_levels_(std::move(b_levels)),
      n_rep_(n_rep),
      obs_(std::move(observations)),
      a_name_(std::move(a_name)),
      b_name_(std::move(b_name)) {
  if (a_levels_.size() < 2 || b_levels_.size() < 2) {
    throw Error(Errc::bad_params, "each factor needs at least two levels");
  }
  if (n_rep_ < 2) throw Error(Errc::insufficient_replicates, "need at least 2 replicates per cell");
  if (obs_.size() != a_levels_.size() * b_levels_.size() * n_rep_) {
    throw Error(Errc::unbalanced_design, "observation count does not match levels x replicates");
  }
  for (double v : obs_) {
    if (!std::isfinite(v)) throw Error(Errc::non_finite_input, "observations must be finite");
  }
}

FactorialTable FactorialTable::from_rows(std::vector<Row> rows, std::string a_name, std::string b_name) {
  std::map<double, std::map<double, std::vector<std::pair<int, double>>>> cells;
  std::vector<double> a_levels;
  std::vector<double> b_levels;
  for (const auto& r : rows) {
    cells[r.a][r.b].emplace_back(r.rep, r.value);
    a_levels.push_back(r.a);
    b_levels.push_back(r.b);
  }
  for (auto* levels : {&a_levels, &b_levels}) {
    std::sort(levels->begin(), levels->end());
    levels->erase(std::unique(levels->begin(), levels->end()), levels->end());
  }
  std::size_t n_rep = 0;
  std::vector<double> obs;
  for (double a : a_levels) {
    for (double b : b_levels) {
      auto ai = cells.find(a);
      auto bi = ai->second.find(b);
      if (bi == ai->second.end()) throw Error(Errc::unbalanced_design, "empty cell in factorial table");
      auto cell = bi->second;
      std::stable_sort(cell.begin(), cell.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
      if (n_rep == 0) n_rep = cell.size();
      if (cell.size() != n_rep) throw Error(Errc::unbalanced_design, "cells have different replicate counts");
      for (const auto& [rep, v] : cell) obs.push_back(v);
    }
  }
  if (n_rep < 2) throw Error(Errc::insufficient_replicates, "need at least 2 replicates per cell");
  return FactorialTable(std::move(a_levels), std::move(b_levels), n_rep, std::move(obs), std::move(a_name),
                        std::move(b_name));
}

double FactorialTable::cell_mean(std::size_t i, std::size_t j) const {
  double s = 0.0;
  for (std::size_t r = 0; r < n_rep_; ++r) s += at(i, j, r);
  return s / static_cast<double>(n_rep_);
}

std::vector<FactorialTable::Row> FactorialTable::rows() const {
  std::vector<Row> out;
  out.reserve(obs_.size());
  for (std::size_t i = 0; i < a_levels_.size(); ++i) {
    for (std::size_t j = 0; j < b_levels_.size(); ++j) {
      for (std::size_t r = 0; r < n_rep_; ++r) {
        out.push_back({a_levels_[i], b_levels_[j], static_cast<int>(r + 1), at(i, j, r)});
      }
    }
  }
  return out;
}

FactorialTable read_table_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::io_error, "table is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(line);
  int col_a = -1;
  int col_b = -1;
  int col_rep = -1;
  int col_v = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const auto h = header[i];
    if (h == "angle_deg") col_a = static_cast<int>(i);
    if (h == "mass_kg") col_b = static_cast<int>(i);
    if (h == "rep") col_rep = static_cast<int>(i);
    if (h == "pressure_pa") col_v = static_cast<int>(i);
  }
  if (col_a < 0 || col_b < 0 || col_rep < 0 || col_v < 0) {
    throw Error(Errc::io_error, "table header must contain angle_deg, mass_kg, rep, pressure_pa");
  }
  std::vector<FactorialTable::Row> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cols = split(line);
    if (cols.size() != header.size()) {
      throw Error(Errc::io_error, "line " + std::to_string(line_no) + " has the wrong number of columns");
    }
    FactorialTable::Row r;
    r.a = parse_double(cols[col_a], "angle_deg");
    r.b = parse_double(cols[col_b], "mass_kg");
    r.rep = static_cast<int>(parse_double(cols[col_rep], "rep"));
    r.value = parse_double(cols[col_v], "pressure_pa");
    rows.push_back(r);
  }
  return FactorialTable::from_rows(std::move(rows));
}

FactorialTable read_table_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot open table " + path);
  return read_table_csv(in);
}

void write_table_csv(std::ostream& out, const FactorialTable& table) {
  out << "angle_deg,mass_kg,rep,pressure_pa\n";
  for (const auto& r : table.rows()) {
    out << format_double(r.a) << ',' << format_double(r.b) << ',' << r.rep << ',' << format_double(r.value) << '\n';
  }
}

AnovaResult anova2(const FactorialTable& table) {
  const std::size_t na = table.a_levels().size();
  const std::size_t nb = table.b_levels().size();
  const std::size_t n = table.n_rep();
  const auto& obs = table.observations();
  const double total_n = static_cast<double>(obs.size());

  AnovaResult res;
  res.grand_mean = std::accumulate(obs.begin(), obs.end(), 0.0) / total_n;
  const double gm = res.grand_mean;

  std::vector<double> cell(na * nb);
  std::vector<double> mean_a(na, 0.0);
  std::vector<double> mean_b(nb, 0.0);
  for (std::size_t i = 0; i < na; ++i) {
    for (std::size_t j = 0; j < nb; ++j) {
      cell[i * nb + j] = table.cell_mean(i, j);
      mean_a[i] += cell[i * nb + j] / static_cast<double>(nb);
      mean_b[j] += cell[i * nb + j] / static_cast<double>(na);
    }
  }
  double ss_a = 0.0;
  for (double m : mean_a) ss_a += (m - gm) * (m - gm);
  ss_a *= static_cast<double>(nb * n);
  double ss_b = 0.0;
  for (double m : mean_b) ss_b += (m - gm) * (m - gm);
  ss_b *= static_cast<double>(na * n);
  double ss_ab = 0.0;
  double ss_e = 0.0;
  double ss_t = 0.0;
  for (std::size_t i = 0; i < na; ++i) {
    for (std::size_t j = 0; j < nb; ++j) {
      const double inter = cell[i * nb + j] - mean_a[i] - mean_b[j] + gm;
      ss_ab += inter * inter;
      for (std::size_t r = 0; r < n; ++r) {
        const double y = table.at(i, j, r);
        ss_e += (y - cell[i * nb + j]) * (y - cell[i * nb + j]);
        ss_t += (y - gm) * (y - gm);
      }
    }
  }
  ss_ab *= static_cast<double>(n);

  res.df_error = static_cast<double>(na * nb * (n - 1));
  res.ss_error = ss_e;
  res.ms_error = ss_e / res.df_error;
  res.ss_total = ss_t;
  res.a = effect(ss_a, static_cast<double>(na - 1), res.ms_error, res.df_error, res.degenerate);
  res.b = effect(ss_b, static_cast<double>(nb - 1), res.ms_error, res.df_error, res.degenerate);
  res.ab = effect(ss_ab, static_cast<double>((na - 1) * (nb - 1)), res.ms_error, res.df_error, res.degenerate);
  return res;
}

Factor parse_factor(std::string_view name, const FactorialTable& table) {
  if (name == "A" || name == "a" || name == table.a_name() || name == "angle") return Factor::a;
  if (name == "B" || name == "b" || name == table.b_name() || name == "mass") return Factor::b;
  throw Error(Errc::unknown_factor, "unknown factor '" + std::string(name) + "'");
}

PosthocMethod parse_posthoc_method(std::string_view name) {
  if (name == "fisher_lsd") return PosthocMethod::fisher_lsd;
  if (name == "tukey_hsd") return PosthocMethod::tukey_hsd;
  throw Error(Errc::usage, "unknown post-hoc method '" + std::string(name) + "' (fisher_lsd, tukey_hsd)");
}

std::string_view posthoc_method_name(PosthocMethod m) noexcept {
  return m == PosthocMethod::fisher_lsd ? "fisher_lsd" : "tukey_hsd";
}

std::vector<std::string> letter_groups(const std::vector<double>& means,
                                       const std::vector<std::vector<bool>>& significant) {
  const std::size_t m = means.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return means[x] < means[y]; });

  std::vector<std::string> letters(m);
  std::size_t covered_to = 0;  // runs ending at or before this sorted index are redundant
  bool any = false;
  char next = 'a';
  for (std::size_t s = 0; s < m; ++s) {
    std::size_t e = s;
    while (e + 1 < m) {
      bool ok = true;
      for (std::size_t k = s; k <= e && ok; ++k) ok = !significant[order[k]][order[e + 1]];
      if (!ok) break;
      ++e;
    }
    if (any && e <= covered_to) continue;
    for (std::size_t k = s; k <= e; ++k) letters[order[k]] += next;
    next = next == 'z' ? 'A' : static_cast<char>(next + 1);
    covered_to = e;
    any = true;
  }
  return letters;
}

PosthocResult posthoc(const FactorialTable& table, const AnovaResult& result, Factor factor, PosthocMethod method,
                      double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(Errc::bad_params, "alpha must be in (0, 1)");
  PosthocResult out;
  out.method = method;
  out.alpha = alpha;
  const bool is_a = factor == Factor::a;
  out.factor = is_a ? table.a_name() : table.b_name();
  out.levels = is_a ? table.a_levels() : table.b_levels();
  const std::size_t k = out.levels.size();
  const std::size_t other = is_a ? table.b_levels().size() : table.a_levels().size();
  const double per_level = static_cast<double>(other * table.n_rep());

  out.means.assign(k, 0.0);
  for (std::size_t i = 0; i < table.a_levels().size(); ++i) {
    for (std::size_t j = 0; j < table.b_levels().size(); ++j) {
      out.means[is_a ? i : j] += table.cell_mean(i, j) / static_cast<double>(other);
    }
  }

  const EffectRow& main = is_a ? result.a : result.b;
  std::vector<std::vector<bool>> sig(k, std::vector<bool>(k, false));
  if (!(main.p < alpha)) {
    out.skipped = true;
    out.letters = letter_groups(out.means, sig);
    return out;
  }

  const double se_unit = std::sqrt(result.ms_error / per_level);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      Comparison c;
      c.level_i = out.levels[i];
      c.level_j = out.levels[j];
      c.mean_diff = out.means[i] - out.means[j];
      const double diff = std::abs(c.mean_diff);
      if (se_unit > 0.0) {
        if (method == PosthocMethod::fisher_lsd) {
          c.p = t_two_sided_p(diff / (se_unit * std::numbers::sqrt2), result.df_error);
        } else {
          c.p = 1.0 - studentized_range_cdf(diff / se_unit, static_cast<double>(k), result.df_error);
        }
      } else {
        c.p = diff > 0.0 ? 0.0 : 1.0;
      }
      c.significant = c.p < alpha;
      sig[i][j] = sig[j][i] = c.significant;
      out.comparisons.push_back(c);
    }
  }
  out.letters = letter_groups(out.means, sig);
  return out;
}

}  // namespace innervsense
