#pragma once

#include "cmm/markov_continuous.hpp"
#include "cmm/markov_discrete.hpp"
#include "cmm/rng.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace cmm {

using MixtureModel = std::variant<DiscreteMixtureModel, ContinuousMixtureModel>;

int num_groups(const MixtureModel& model);
int num_states(const MixtureModel& model);
ModelKind kind_of(const MixtureModel& model);

struct EmConfig {
  int num_starts = 50;
  int short_iters = 5;
  double epsilon = 1e-6;
  int max_iters = 1000;
  double floor = kDefaultFloor;
  int g_min = 1;
  int g_max = 5;
  std::uint64_t seed = 0;
  ModelKind kind = ModelKind::CM;
  int threads = 1;  // workers used for the starts of one fit
};

void validate(const EmConfig& config);  // throws InputError

/// Log-likelihood decreases seen while iterating EM. A decrease counts when
/// it exceeds 1e-8 * |previous value|; it is attributed to the floor when
/// the M-step that produced it had to pin a parameter at the floor.
struct MonotonicityLog {
  long iterations = 0;
  long decreases_at_floor = 0;
  long decreases_unexplained = 0;
  double worst_relative_drop = 0.0;

  void merge(const MonotonicityLog& other);
};

inline constexpr double kMonotonicityTolerance = 1e-8;

struct FitResult {
  MixtureModel model;
  ModelKind kind = ModelKind::CM;
  int num_groups = 0;
  Matrix responsibilities;  // G x N, labelled columns one-hot
  std::vector<double> loglik_trace;
  double bic = 0.0;
  int num_parameters = 0;
  int iterations = 0;
  int chosen_start = 0;
  int failed_starts = 0;
  bool converged = false;
  MonotonicityLog monotonicity;

  double log_likelihood() const { return loglik_trace.back(); }
};

/// Random valid starting model: flat-Dirichlet weights, initial rows and
/// transition rows; generator off-diagonals uniform on (0.05, 1).
MixtureModel random_initialize(int num_states, int groups, ModelKind kind,
                               Rng& rng, double floor = kDefaultFloor);

/// Throws InputError when `kind` cannot be fitted to `data` with `groups`
/// groups (missing times, repeats for CM/DM, labels out of range, J < 2).
void check_compatible(const DatasetStats& data, ModelKind kind, int groups);

struct ShortRun {
  MixtureModel model;
  double log_likelihood = 0.0;
  int start = 0;
};

/// emEM initialization: `num_starts` random starts, each run for
/// `short_iters` EM iterations; the end state with the largest observed
/// log-likelihood wins (ties go to the lower start index). Throws FitFailure
/// when every start degenerates.
ShortRun em_em(const DatasetStats& data, int groups, const EmConfig& config);

/// Aitken-accelerated stopping rule on three consecutive log-likelihoods.
bool aitken_should_stop(double l_prev, double l_curr, double l_next,
                        double epsilon);

FitResult fit(const DatasetStats& data, int groups, const EmConfig& config);

int free_parameter_count(ModelKind kind, int groups, int num_states);

/// 2 * loglik - p * log(N); larger is better.
double bic(double loglik, int num_parameters, std::size_t n);

struct SweepEntry {
  int groups = 0;
  std::optional<FitResult> fit;
  std::string failure;  // set when `fit` is empty
};

struct SweepResult {
  std::vector<SweepEntry> entries;  // one per G, ascending
  std::size_t best = 0;             // index into entries

  const FitResult& best_fit() const { return *entries[best].fit; }
};

/// Fits every G in [g_min, g_max] and picks the largest BIC, ties toward the
/// smaller G. Throws FitFailure only when every G failed.
SweepResult sweep(const DatasetStats& data, const EmConfig& config);

/// MAP group per column; ties go to the smallest group index.
std::vector<int> classify(const Matrix& responsibilities);
std::vector<int> classify(const MixtureModel& model, const DatasetStats& data);

/// E-step and M-step dispatched on the model alternative.
EStepResult e_step(const DatasetStats& data, const MixtureModel& model);
MixtureModel m_step(const DatasetStats& data, const Matrix& responsibilities,
                    ModelKind kind, double floor, MStepReport* report = nullptr);
double observed_log_likelihood(const DatasetStats& data, const MixtureModel& model);

}  // namespace cmm
