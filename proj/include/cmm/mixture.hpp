#pragma once

// Pieces shared by the discrete- and continuous-time mixtures.

#include "cmm/common.hpp"
#include "cmm/seqdata.hpp"

#include <optional>
#include <span>
#include <vector>

namespace cmm {

/// Responsibilities and observed log-likelihood from one E-step.
struct EStepResult {
  Matrix responsibilities;  // G x N; labelled columns are one-hot
  double log_likelihood = 0.0;
};

/// Normalizes log_joint(g, i) = log pi_g + log f_g(x_i) column-wise with
/// log-sum-exp. Unlabelled columns contribute log sum_g exp(.) to the
/// likelihood; labelled columns contribute the entry of their own group.
EStepResult normalize_log_joint(const Matrix& log_joint,
                                const std::vector<std::optional<int>>& labels);

double log_sum_exp(std::span<const double> values);

/// What an M-step had to do to keep the parameters inside the floor.
struct MStepReport {
  int floored_entries = 0;
  bool floor_bound() const { return floored_entries > 0; }
};

/// Turns nonnegative weights into a distribution whose entries are all at
/// least `floor`: entries that would fall below are pinned at the floor and
/// the remaining ones are rescaled to fill the rest of the unit mass. A zero
/// vector becomes uniform. Returns how many entries were pinned.
int normalize_with_floor(std::span<double> weights, double floor);

/// Sum of responsibilities per group; throws DegenerateGroup when a group
/// holds less than `min_mass`.
Vector group_masses(const Matrix& responsibilities, double min_mass = 1e-8);

/// Mixing proportions from group masses, floored.
Vector update_weights(const Vector& masses, double floor, MStepReport& report);

/// Rows are groups: initial-state probabilities weighted by responsibility.
Matrix update_initial_probs(const DatasetStats& data,
                            const Matrix& responsibilities, double floor,
                            MStepReport& report);

/// Throws InputError unless `v` is a distribution with entries >= floor.
void check_distribution(std::span<const double> v, double floor,
                        const char* what);

}  // namespace cmm
