#include "cmm/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace cmm {

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) return -std::numeric_limits<double>::infinity();
  const double top = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(top)) return top;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - top);
  return top + std::log(sum);
}

EStepResult normalize_log_joint(const Matrix& log_joint,
                                const std::vector<std::optional<int>>& labels) {
  const auto groups = log_joint.rows();
  const auto n = log_joint.cols();
  EStepResult out;
  out.responsibilities = Matrix::Zero(groups, n);
  std::vector<double> column(static_cast<std::size_t>(groups));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index g = 0; g < groups; ++g) column[g] = log_joint(g, i);
    if (std::any_of(column.begin(), column.end(),
                    [](double v) { return std::isnan(v); }))
      throw FitFailure("NaN in component log-densities for sequence " +
                       std::to_string(i + 1));
    if (const auto& label = labels[static_cast<std::size_t>(i)]) {
      out.responsibilities(*label, i) = 1.0;
      out.log_likelihood += column[*label];
      continue;
    }
    const double top = *std::max_element(column.begin(), column.end());
    if (!std::isfinite(top))
      throw FitFailure("sequence " + std::to_string(i + 1) + " has zero density in every group");
    double total = 0.0;
    for (Eigen::Index g = 0; g < groups; ++g)
      total += out.responsibilities(g, i) = std::exp(column[g] - top);
    out.responsibilities.col(i) /= total;
    out.log_likelihood += top + std::log(total);
  }
  return out;
}

int normalize_with_floor(std::span<double> weights, double floor) {
  const std::size_t n = weights.size();
  if (n == 0) return 0;
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0)) {
    std::fill(weights.begin(), weights.end(), 1.0 / static_cast<double>(n));
    return static_cast<int>(n);
  }
  for (auto& w : weights) w /= total;

  std::vector<bool> pinned(n, false);
  int num_pinned = 0;
  while (true) {
    const double free_mass = 1.0 - floor * num_pinned;
    double free_sum = 0.0;
    for (std::size_t k = 0; k < n; ++k)
      if (!pinned[k]) free_sum += weights[k];
    const double scale = free_sum > 0.0 ? free_mass / free_sum : 0.0;
    bool changed = false;
    for (std::size_t k = 0; k < n; ++k)
      if (!pinned[k] && weights[k] * scale < floor) {
        pinned[k] = true;
        ++num_pinned;
        changed = true;
      }
    if (!changed) {
      for (std::size_t k = 0; k < n; ++k)
        weights[k] = pinned[k] ? floor : weights[k] * scale;
      return num_pinned;
    }
  }
}

Vector group_masses(const Matrix& responsibilities, double min_mass) {
  Vector masses = responsibilities.rowwise().sum();
  for (Eigen::Index g = 0; g < masses.size(); ++g)
    if (!(masses[g] >= min_mass))
      throw DegenerateGroup("group " + std::to_string(g + 1) +
                            " has no responsibility mass");
  return masses;
}

Vector update_weights(const Vector& masses, double floor, MStepReport& report) {
  Vector w = masses;
  report.floored_entries += normalize_with_floor({w.data(), static_cast<std::size_t>(w.size())}, floor);
  return w;
}

Matrix update_initial_probs(const DatasetStats& data,
                            const Matrix& responsibilities, double floor,
                            MStepReport& report) {
  const auto groups = responsibilities.rows();
  const int states = data.num_states;
  Matrix alpha = Matrix::Zero(groups, states);
  for (std::size_t i = 0; i < data.size(); ++i)
    for (Eigen::Index g = 0; g < groups; ++g)
      alpha(g, data.stats[i].first_state) += responsibilities(g, static_cast<Eigen::Index>(i));
  Vector row(states);
  for (Eigen::Index g = 0; g < groups; ++g) {
    row = alpha.row(g).transpose();
    report.floored_entries += normalize_with_floor({row.data(), static_cast<std::size_t>(states)}, floor);
    alpha.row(g) = row.transpose();
  }
  return alpha;
}

void check_distribution(std::span<const double> v, double floor, const char* what) {
  double sum = 0.0;
  for (double x : v) {
    if (!std::isfinite(x) || x < floor)
      throw InputError(std::string(what) + ": entry below the floor or not finite");
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw InputError(std::string(what) + ": entries do not sum to 1");
}

}  // namespace cmm
