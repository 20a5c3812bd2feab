#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace innervsense {

// Balanced two-factor layout: observation (i, j, r) for level i of factor A,
// level j of factor B, replicate r.
class FactorialTable {
 public:
  struct Row {
    double a = 0.0;
    double b = 0.0;
    int rep = 0;
    double value = 0.0;
  };

  FactorialTable(std::vector<double> a_levels, std::vector<double> b_levels, std::size_t n_rep,
                 std::vector<double> observations, std::string a_name = "angle_deg",
                 std::string b_name = "mass_kg");

  // Groups rows by level values (sorted ascending). Throws
  // Errc::unbalanced_design, Errc::insufficient_replicates.
  static FactorialTable from_rows(std::vector<Row> rows, std::string a_name = "angle_deg",
                                  std::string b_name = "mass_kg");

  const std::vector<double>& a_levels() const noexcept { return a_levels_; }
  const std::vector<double>& b_levels() const noexcept { return b_levels_; }
  std::size_t n_rep() const noexcept { return n_rep_; }
  const std::vector<double>& observations() const noexcept { return obs_; }
  const std::string& a_name() const noexcept { return a_name_; }
  const std::string& b_name() const noexcept { return b_name_; }

  double at(std::size_t i, std::size_t j, std::size_t r) const { return obs_.at((i * b_levels_.size() + j) * n_rep_ + r); }
  double cell_mean(std::size_t i, std::size_t j) const;

  std::vector<Row> rows() const;

 private:
  std::vector<double> a_levels_;
  std::vector<double> b_levels_;
  std::size_t n_rep_ = 0;
  std::vector<double> obs_;
  std::string a_name_;
  std::string b_name_;
};

// CSV with header angle_deg,mass_kg,rep,pressure_pa (any column order).
FactorialTable read_table_csv(std::istream& in);
FactorialTable read_table_csv_file(const std::string& path);
void write_table_csv(std::ostream& out, const FactorialTable& table);

struct EffectRow {
  double ss = 0.0;
  double df = 0.0;
  double ms = 0.0;
  double f = 0.0;  // +inf when MS_error == 0 and MS > 0
  double p = 1.0;
};

struct AnovaResult {
  EffectRow a;
  EffectRow b;
  EffectRow ab;
  double ss_error = 0.0;
  double df_error = 0.0;
  double ms_error = 0.0;
  double ss_total = 0.0;
  double grand_mean = 0.0;
  bool degenerate = false;  // some F was 0/0 (reported as 0) or x/0
};

AnovaResult anova2(const FactorialTable& table);

enum class Factor { a, b };
enum class PosthocMethod { fisher_lsd, tukey_hsd };

Factor parse_factor(std::string_view name, const FactorialTable& table);  // Errc::unknown_factor
PosthocMethod parse_posthoc_method(std::string_view name);
std::string_view posthoc_method_name(PosthocMethod m) noexcept;

struct Comparison {
  double level_i = 0.0;
  double level_j = 0.0;
  double mean_diff = 0.0;  // mean_i - mean_j
  double p = 1.0;
  bool significant = false;
};

struct PosthocResult {
  std::string factor;
  PosthocMethod method = PosthocMethod::fisher_lsd;
  double alpha = 0.05;
  bool skipped = false;  // main effect not significant
  std::vector<double> levels;
  std::vector<double> means;
  std::vector<Comparison> comparisons;
  std::vector<std::string> letters;  // per level, in level order
};

PosthocResult posthoc(const FactorialTable& table, const AnovaResult& result, Factor factor,
                      PosthocMethod method = PosthocMethod::fisher_lsd, double alpha = 0.05);

// Letters from the sorted means: each maximal run of consecutive levels with
// no significant pair inside gets a letter unless an earlier run covers it.
// significant[i][j] is indexed like means.
std::vector<std::string> letter_groups(const std::vector<double>& means,
                                       const std::vector<std::vector<bool>>& significant);

}  // namespace innervsense
