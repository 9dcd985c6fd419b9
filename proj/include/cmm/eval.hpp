#pragma once

#include "cmm/common.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cmm {

/// Hubert-Arabie adjusted Rand index. Throws InputError on a length
/// mismatch or fewer than two items.
double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

struct ReplicateOutcome {
  int selected_groups = 0;
  double ari = 0.0;
};

struct EvalSummary {
  std::string model;
  std::vector<double> ari;  // per replicate
  double mean_ari = 0.0;
  double sd_ari = 0.0;      // sample sd; 0 for a single replicate
  int g_min = 1;
  std::vector<int> histogram;  // times each G in [g_min, g_min + size) was chosen

  int count(int groups) const;
};

EvalSummary selection_table(std::string model,
                            std::span<const ReplicateOutcome> outcomes,
                            int g_min, int g_max);

double mean(std::span<const double> values);
double sample_sd(std::span<const double> values);
double median(std::vector<double> values);

/// Rows in the layout "Model | G=1 ... | mean ARI (sd)".
std::string format_selection_table(std::string_view title,
                                   std::span<const EvalSummary> rows);
std::string selection_table_csv(std::span<const EvalSummary> rows);

struct BicRow {
  std::string model;
  std::vector<std::optional<double>> values;  // G = g_min, g_min + 1, ...

  std::optional<std::size_t> argmax() const;  // ties toward smaller G
  std::optional<double> spread() const;       // max - min over fitted G
};

struct BicTable {
  int g_min = 1;
  std::vector<BicRow> rows;

  std::string to_text() const;  // aligned; each row maximum marked with '*'
  std::string to_csv() const;
};

/// Long-format "study,model,replicate,ari" lines for boxplots.
std::string ari_plot_csv(std::string_view study,
                         std::span<const EvalSummary> rows);

}  // namespace cmm
