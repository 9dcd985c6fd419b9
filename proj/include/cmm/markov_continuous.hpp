#pragma once

#include "cmm/mixture.hpp"
#include "cmm/seqdata.hpp"

#include <vector>

namespace cmm {

/// Infinitesimal generator: nonnegative off-diagonal rates, rows summing to 0.
class GeneratorMatrix {
 public:
  GeneratorMatrix() = default;

  /// Takes a full matrix and checks it: off-diagonals >= `floor`, diagonal
  /// equal to minus the off-diagonal row sum within 1e-12.
  explicit GeneratorMatrix(Matrix rates, double floor = 0.0);

  /// Keeps the off-diagonal entries of `rates` and recomputes the diagonal.
  static GeneratorMatrix from_off_diagonal(const Matrix& rates,
                                           double floor = 0.0);

  const Matrix& rates() const { return rates_; }
  int num_states() const { return static_cast<int>(rates_.rows()); }
  double operator()(int from, int to) const { return rates_(from, to); }
  /// Total rate of leaving `state`, i.e. -q_jj.
  double exit_rate(int state) const { return -rates_(state, state); }

  friend bool operator==(const GeneratorMatrix&, const GeneratorMatrix&) = default;

 private:
  Matrix rates_;
};

/// Jump-chain probabilities -q_jk / q_jj with a zero diagonal.
Matrix embedded_transition_probs(const GeneratorMatrix& q);

/// Mean of the exponential holding time in `state`, 1 / (-q_jj).
double expected_holding_time(const GeneratorMatrix& q, int state);

/// Mixture of continuous-time Markov chains with exponential holding times.
struct ContinuousMixtureModel {
  Vector weights;                         // pi_g
  Matrix initial_probs;                   // G x J
  std::vector<GeneratorMatrix> generators;  // Q_g

  int num_groups() const { return static_cast<int>(weights.size()); }
  int num_states() const { return static_cast<int>(initial_probs.cols()); }
};

void validate(const ContinuousMixtureModel& model, double floor = 0.0);

/// log alpha_{g,x1} + sum_{j != k} n_jk log q_gjk + log(-q_{g,xL,xL})
///   + sum_j q_gjj * time_in_state_j.
/// Throws InputError for counts without times or with self-transitions.
double log_component_density(const TransitionCounts& stats, int group,
                             const ContinuousMixtureModel& model);

Matrix log_joint(const DatasetStats& data, const ContinuousMixtureModel& model);

EStepResult e_step(const DatasetStats& data, const ContinuousMixtureModel& model);

double observed_log_likelihood(const DatasetStats& data,
                               const ContinuousMixtureModel& model);

/// Responsibility-weighted aggregates that drive the generator update for one
/// group: transition counts, exits, terminal visits and time per state.
struct GeneratorAggregates {
  Matrix transitions;  // nbar_jk
  Vector exits;        // N_j = sum_{k != j} nbar_jk
  Vector terminal;     // E_j
  Vector time;         // T_j
};

GeneratorAggregates aggregate_for_group(const DatasetStats& data,
                                        const Matrix& responsibilities,
                                        int group);

/// Maximizer of the expected complete-data log-likelihood for one generator:
/// q_jk = nbar_jk (N_j + E_j) / (T_j N_j) and q_jj = -(N_j + E_j) / T_j.
/// Rows without any weighted visit are set to the floor. A row visited only
/// as the terminal state splits its total rate evenly. Off-diagonals are then
/// floored and the diagonal recomputed.
GeneratorMatrix generator_update(const GeneratorAggregates& agg, double floor,
                                 MStepReport& report);

/// Throws DegenerateGroup on an empty group, or on a visited state with no
/// holding time.
ContinuousMixtureModel continuous_m_step(const DatasetStats& data,
                                         const Matrix& responsibilities,
                                         double floor = kDefaultFloor,
                                         MStepReport* report = nullptr);

/// The generator update exactly as it is sometimes printed,
/// q_jk = nbar_jk (E_j + N_j) / (T_j + N_j), without flooring. Kept only to
/// compare against `generator_update`; it does not maximize the
/// complete-data log-likelihood.
Matrix printed_ratio_generator_update(const GeneratorAggregates& agg);

}  // namespace cmm
