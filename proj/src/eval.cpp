#include "cmm/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>

namespace cmm {

namespace {

double choose2(double n) { return n * (n - 1.0) / 2.0; }

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw InputError("partitions have different lengths");
  if (a.size() < 2) throw InputError("ARI needs at least two items");
  std::map<std::pair<int, int>, double> cells;
  std::map<int, double> rows;
  std::map<int, double> cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cells[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  double index = 0.0;
  for (const auto& [key, n] : cells) index += choose2(n);
  double sum_rows = 0.0;
  for (const auto& [key, n] : rows) sum_rows += choose2(n);
  double sum_cols = 0.0;
  for (const auto& [key, n] : cols) sum_cols += choose2(n);
  const double expected = sum_rows * sum_cols / choose2(static_cast<double>(a.size()));
  const double max_index = 0.5 * (sum_rows + sum_cols);
  // Both partitions trivial (one block, or all singletons): identical.
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

double mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double sample_sd(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

int EvalSummary::count(int groups) const {
  const int idx = groups - g_min;
  if (idx < 0 || idx >= static_cast<int>(histogram.size())) return 0;
  return histogram[static_cast<std::size_t>(idx)];
}

EvalSummary selection_table(std::string model, std::span<const ReplicateOutcome> outcomes,
                            int g_min, int g_max) {
  EvalSummary s;
  s.model = std::move(model);
  s.g_min = g_min;
  s.histogram.assign(static_cast<std::size_t>(g_max - g_min + 1), 0);
  for (const auto& o : outcomes) {
    s.ari.push_back(o.ari);
    if (o.selected_groups >= g_min && o.selected_groups <= g_max)
      ++s.histogram[static_cast<std::size_t>(o.selected_groups - g_min)];
  }
  s.mean_ari = mean(s.ari);
  s.sd_ari = sample_sd(s.ari);
  return s;
}

std::string format_selection_table(std::string_view title, std::span<const EvalSummary> rows) {
  std::ostringstream out;
  out << title << '\n';
  if (rows.empty()) return out.str();
  const auto& first = rows.front();
  out << std::string(12, ' ');
  char buf[32];
  for (std::size_t k = 0; k < first.histogram.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%6s", ("G=" + std::to_string(first.g_min + static_cast<int>(k))).c_str());
    out << buf;
  }
  out << "   ARI (sd)\n";
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-12s", r.model.c_str());
    out << buf;
    for (int c : r.histogram) {
      std::snprintf(buf, sizeof buf, "%6d", c);
      out << buf;
    }
    out << "   " << fixed(r.mean_ari, 3) << '(' << fixed(r.sd_ari, 3) << ")\n";
  }
  return out.str();
}

std::string selection_table_csv(std::span<const EvalSummary> rows) {
  std::ostringstream out;
  out << "model";
  if (!rows.empty())
    for (std::size_t k = 0; k < rows.front().histogram.size(); ++k)
      out << ",G" << rows.front().g_min + static_cast<int>(k);
  out << ",mean_ari,sd_ari\n";
  for (const auto& r : rows) {
    out << r.model;
    for (int c : r.histogram) out << ',' << c;
    out << ',' << fixed(r.mean_ari, 6) << ',' << fixed(r.sd_ari, 6) << '\n';
  }
  return out.str();
}

std::optional<std::size_t> BicRow::argmax() const {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < values.size(); ++i)
    if (values[i] && (!best || *values[i] > *values[*best])) best = i;
  return best;
}

std::optional<double> BicRow::spread() const {
  std::optional<double> lo, hi;
  for (const auto& v : values) {
    if (!v) continue;
    lo = lo ? std::min(*lo, *v) : *v;
    hi = hi ? std::max(*hi, *v) : *v;
  }
  if (!lo) return std::nullopt;
  return *hi - *lo;
}

std::string BicTable::to_text() const {
  std::ostringstream out;
  std::size_t columns = 0;
  for (const auto& r : rows) columns = std::max(columns, r.values.size());
  char buf[64];
  out << "      ";
  for (std::size_t k = 0; k < columns; ++k) {
    std::snprintf(buf, sizeof buf, "%16s", ("G=" + std::to_string(g_min + static_cast<int>(k))).c_str());
    out << buf;
  }
  out << '\n';
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-6s", r.model.c_str());
    out << buf;
    const auto best = r.argmax();
    for (std::size_t k = 0; k < columns; ++k) {
      std::string cell = "-";
      if (k < r.values.size() && r.values[k])
        cell = fixed(*r.values[k], 2) + (best && *best == k ? "*" : " ");
      std::snprintf(buf, sizeof buf, "%16s", cell.c_str());
      out << buf;
    }
    out << '\n';
  }
  return out.str();
}

std::string BicTable::to_csv() const {
  std::ostringstream out;
  out << "model,groups,bic,selected\n";
  for (const auto& r : rows) {
    const auto best = r.argmax();
    for (std::size_t k = 0; k < r.values.size(); ++k) {
      out << r.model << ',' << g_min + static_cast<int>(k) << ',';
      if (r.values[k]) out << fixed(*r.values[k], 6);
      out << ',' << (best && *best == k ? 1 : 0) << '\n';
    }
  }
  return out.str();
}

std::string ari_plot_csv(std::string_view study, std::span<const EvalSummary> rows) {
  std::ostringstream out;
  out << "study,model,replicate,ari\n";
  for (const auto& r : rows)
    for (std::size_t i = 0; i < r.ari.size(); ++i)
      out << study << ',' << r.model << ',' << i + 1 << ',' << fixed(r.ari[i], 6) << '\n';
  return out.str();
}

}  // namespace cmm
