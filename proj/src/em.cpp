#include "cmm/em.hpp"
#include "cmm/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace cmm {

int num_groups(const MixtureModel& model) {
  return std::visit([](const auto& m) { return m.num_groups(); }, model);
}

int num_states(const MixtureModel& model) {
  return std::visit([](const auto& m) { return m.num_states(); }, model);
}

ModelKind kind_of(const MixtureModel& model) {
  if (const auto* d = std::get_if<DiscreteMixtureModel>(&model))
    return d->variant == DiscreteVariant::DM ? ModelKind::DM : ModelKind::DWM;
  return ModelKind::CM;
}

void validate(const EmConfig& c) {
  if (c.num_starts < 1) throw InputError("need at least one start");
  if (c.short_iters < 1) throw InputError("need at least one short EM iteration");
  if (!(c.epsilon > 0.0)) throw InputError("epsilon must be positive");
  if (c.max_iters < 1) throw InputError("max_iters must be positive");
  if (!(c.floor > 0.0) || c.floor >= 1.0) throw InputError("floor must lie in (0, 1)");
  if (c.g_min < 1 || c.g_max < c.g_min) throw InputError("invalid range of group counts");
}

void MonotonicityLog::merge(const MonotonicityLog& other) {
  iterations += other.iterations;
  decreases_at_floor += other.decreases_at_floor;
  decreases_unexplained += other.decreases_unexplained;
  worst_relative_drop = std::max(worst_relative_drop, other.worst_relative_drop);
}

EStepResult e_step(const DatasetStats& data, const MixtureModel& model) {
  return std::visit([&](const auto& m) { return e_step(data, m); }, model);
}

double observed_log_likelihood(const DatasetStats& data, const MixtureModel& model) {
  return e_step(data, model).log_likelihood;
}

MixtureModel m_step(const DatasetStats& data, const Matrix& responsibilities,
                    ModelKind kind, double floor, MStepReport* report) {
  switch (kind) {
    case ModelKind::CM:
      return continuous_m_step(data, responsibilities, floor, report);
    case ModelKind::DM:
      return discrete_m_step(data, responsibilities, DiscreteVariant::DM, floor, report);
    case ModelKind::DWM:
      return discrete_m_step(data, responsibilities, DiscreteVariant::DWM, floor, report);
  }
  throw InputError("unknown model kind");
}

namespace {

void random_simplex(double* out, std::size_t n, Rng& rng, double floor) {
  std::exponential_distribution<double> exp1(1.0);
  for (std::size_t k = 0; k < n; ++k) out[k] = exp1(rng);
  normalize_with_floor({out, n}, floor);
}

struct Iterate {
  MixtureModel model;
  EStepResult estep;
};

// One EM iteration (M-step, then the E-step of the new parameters).
void em_iteration(const DatasetStats& data, ModelKind kind, double floor,
                  Iterate& state, MonotonicityLog& log) {
  MStepReport report;
  MixtureModel next = m_step(data, state.estep.responsibilities, kind, floor, &report);
  EStepResult estep = e_step(data, next);
  const double prev = state.estep.log_likelihood;
  ++log.iterations;
  const double drop = prev - estep.log_likelihood;
  if (drop > kMonotonicityTolerance * std::abs(prev)) {
    if (report.floor_bound())
      ++log.decreases_at_floor;
    else
      ++log.decreases_unexplained;
    log.worst_relative_drop = std::max(log.worst_relative_drop, drop / std::abs(prev));
  }
  state = {std::move(next), std::move(estep)};
}

Matrix fixed_responsibilities(const DatasetStats& data, int groups) {
  Matrix z = Matrix::Constant(groups, static_cast<Eigen::Index>(data.size()),
                              groups == 1 ? 1.0 : 0.0);
  for (std::size_t i = 0; i < data.size(); ++i)
    if (const auto& label = data.labels[i]) {
      z.col(static_cast<Eigen::Index>(i)).setZero();
      z(*label, static_cast<Eigen::Index>(i)) = 1.0;
    }
  return z;
}

struct StartOutcome {
  std::optional<ShortRun> run;
  MonotonicityLog log;
};

std::vector<StartOutcome> short_runs(const DatasetStats& data, int groups,
                                     const EmConfig& config) {
  std::vector<StartOutcome> outcomes(static_cast<std::size_t>(config.num_starts));
  parallel_for(outcomes.size(), config.threads, [&](std::size_t s) {
    Rng rng = make_stream(config.seed, {static_cast<std::uint64_t>(groups), s});
    auto& out = outcomes[s];
    try {
      Iterate state;
      state.model = random_initialize(data.num_states, groups, config.kind, rng, config.floor);
      state.estep = e_step(data, state.model);
      for (int it = 0; it < config.short_iters; ++it)
        em_iteration(data, config.kind, config.floor, state, out.log);
      out.run = ShortRun{std::move(state.model), state.estep.log_likelihood,
                         static_cast<int>(s)};
    } catch (const FitFailure&) {
      out.run.reset();
    }
  });
  return outcomes;
}

// Start indices ordered by short-run log-likelihood, best first.
std::vector<std::size_t> ranking(const std::vector<StartOutcome>& outcomes) {
  std::vector<std::size_t> order;
  for (std::size_t s = 0; s < outcomes.size(); ++s)
    if (outcomes[s].run) order.push_back(s);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return outcomes[a].run->log_likelihood > outcomes[b].run->log_likelihood;
  });
  return order;
}

void finish(FitResult& result, const DatasetStats& data, Iterate&& state) {
  result.num_groups = num_groups(state.model);
  result.num_parameters = free_parameter_count(result.kind, result.num_groups, data.num_states);
  result.bic = bic(result.loglik_trace.back(), result.num_parameters, data.size());
  result.model = std::move(state.model);
  result.responsibilities = std::move(state.estep.responsibilities);
}

}  // namespace

MixtureModel random_initialize(int num_states, int groups, ModelKind kind, Rng& rng,
                               double floor) {
  if (groups < 1 || num_states < 1) throw InputError("need at least one group and state");
  Vector weights(groups);
  random_simplex(weights.data(), static_cast<std::size_t>(groups), rng, floor);
  Matrix initial(groups, num_states);
  Vector row(num_states);
  for (int g = 0; g < groups; ++g) {
    random_simplex(row.data(), static_cast<std::size_t>(num_states), rng, floor);
    initial.row(g) = row.transpose();
  }

  if (kind == ModelKind::CM) {
    ContinuousMixtureModel m{std::move(weights), std::move(initial), {}};
    std::uniform_real_distribution<double> rate(0.05, 1.0);
    for (int g = 0; g < groups; ++g) {
      Matrix q = Matrix::Zero(num_states, num_states);
      for (int j = 0; j < num_states; ++j)
        for (int k = 0; k < num_states; ++k)
          if (k != j) q(j, k) = rate(rng);
      m.generators.push_back(GeneratorMatrix::from_off_diagonal(q, floor));
    }
    return m;
  }

  const bool dm = kind == ModelKind::DM;
  DiscreteMixtureModel m{std::move(weights), std::move(initial), {},
                         dm ? DiscreteVariant::DM : DiscreteVariant::DWM};
  std::vector<double> free(static_cast<std::size_t>(num_states));
  for (int g = 0; g < groups; ++g) {
    Matrix t = Matrix::Zero(num_states, num_states);
    for (int j = 0; j < num_states; ++j) {
      const std::size_t n = static_cast<std::size_t>(num_states - (dm ? 1 : 0));
      random_simplex(free.data(), n, rng, floor);
      std::size_t next = 0;
      for (int k = 0; k < num_states; ++k)
        if (!dm || k != j) t(j, k) = free[next++];
    }
    m.transitions.push_back(std::move(t));
  }
  return m;
}

void check_compatible(const DatasetStats& data, ModelKind kind, int groups) {
  if (data.size() == 0) throw InputError("dataset has no sequences");
  if (groups < 1) throw InputError("need at least one group");
  for (const auto& label : data.labels)
    if (label && *label >= groups)
      throw InputError("label " + std::to_string(*label + 1) + " exceeds G = " +
                       std::to_string(groups));
  if (kind == ModelKind::DWM) return;
  if (data.num_states < 2)
    throw InputError(std::string(to_string(kind)) + " needs at least two states");
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& s = data.stats[i];
    if (s.has_self_transitions())
      throw InputError("sequence " + std::to_string(i + 1) + " repeats a state; " +
                       std::string(to_string(kind)) +
                       " forbids self-transitions (collapse repeats first)");
    if (kind == ModelKind::CM && !s.has_times())
      throw InputError("sequence " + std::to_string(i + 1) +
                       " has no holding times; CM needs times");
  }
}

ShortRun em_em(const DatasetStats& data, int groups, const EmConfig& config) {
  validate(config);
  check_compatible(data, config.kind, groups);
  auto outcomes = short_runs(data, groups, config);
  const auto order = ranking(outcomes);
  if (order.empty())
    throw FitFailure("all " + std::to_string(config.num_starts) +
                     " starts degenerated for G = " + std::to_string(groups));
  return std::move(*outcomes[order.front()].run);
}

bool aitken_should_stop(double l_prev, double l_curr, double l_next, double epsilon) {
  const double denom = l_curr - l_prev;
  if (std::abs(denom) < 1e-14) return true;
  const double a = (l_next - l_curr) / denom;
  const double l_inf = l_curr + (l_next - l_curr) / (1.0 - a);
  const double diff = l_inf - l_curr;
  return diff >= 0.0 && diff < epsilon;
}

FitResult fit(const DatasetStats& data, int groups, const EmConfig& config) {
  validate(config);
  check_compatible(data, config.kind, groups);
  if (config.floor * data.num_states >= 1.0)
    throw InputError("floor too large for " + std::to_string(data.num_states) + " states");

  FitResult result;
  result.kind = config.kind;

  // Nothing to estimate in the E-step: one M-step gives the MLE.
  if (groups == 1 || data.num_unlabelled() == 0) {
    Iterate state;
    state.estep.responsibilities = fixed_responsibilities(data, groups);
    state.model = m_step(data, state.estep.responsibilities, config.kind, config.floor);
    state.estep = e_step(data, state.model);
    result.loglik_trace = {state.estep.log_likelihood};
    result.iterations = 1;
    result.converged = true;
    finish(result, data, std::move(state));
    return result;
  }

  auto outcomes = short_runs(data, groups, config);
  for (const auto& o : outcomes) result.monotonicity.merge(o.log);
  for (const auto& o : outcomes)
    if (!o.run) ++result.failed_starts;

  for (std::size_t s : ranking(outcomes)) {
    Iterate state;
    state.model = outcomes[s].run->model;
    MonotonicityLog log;
    std::vector<double> trace;
    bool converged = false;
    try {
      state.estep = e_step(data, state.model);
      trace.push_back(state.estep.log_likelihood);
      for (int it = 0; it < config.max_iters; ++it) {
        em_iteration(data, config.kind, config.floor, state, log);
        trace.push_back(state.estep.log_likelihood);
        const auto n = trace.size();
        if (n >= 3 && aitken_should_stop(trace[n - 3], trace[n - 2], trace[n - 1],
                                         config.epsilon)) {
          converged = true;
          break;
        }
      }
    } catch (const FitFailure&) {
      ++result.failed_starts;
      result.monotonicity.merge(log);
      continue;
    }
    result.monotonicity.merge(log);
    result.chosen_start = static_cast<int>(s);
    result.iterations = static_cast<int>(trace.size()) - 1;
    result.loglik_trace = std::move(trace);
    result.converged = converged;
    finish(result, data, std::move(state));
    return result;
  }
  throw FitFailure("every start degenerated for G = " + std::to_string(groups));
}

int free_parameter_count(ModelKind kind, int groups, int num_states) {
  if (groups < 1 || num_states < 1) throw InputError("G and J must be positive");
  const int g = groups;
  const int j = num_states;
  if (kind == ModelKind::DM) return (g - 1) + g * (j - 1) + g * j * std::max(j - 2, 0);
  return (g - 1) + g * (j - 1) + g * j * (j - 1);
}

double bic(double loglik, int num_parameters, std::size_t n) {
  if (n < 1) throw InputError("BIC needs at least one observation");
  return 2.0 * loglik - num_parameters * std::log(static_cast<double>(n));
}

SweepResult sweep(const DatasetStats& data, const EmConfig& config) {
  validate(config);
  SweepResult out;
  for (int g = config.g_min; g <= config.g_max; ++g) {
    SweepEntry entry;
    entry.groups = g;
    try {
      entry.fit = fit(data, g, config);
    } catch (const std::runtime_error& e) {
      entry.failure = e.what();
    }
    out.entries.push_back(std::move(entry));
  }
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < out.entries.size(); ++i)
    if (out.entries[i].fit && (!best || out.entries[i].fit->bic > out.entries[*best].fit->bic))
      best = i;
  if (!best) {
    std::string why;
    for (const auto& e : out.entries)
      why += "\n  G=" + std::to_string(e.groups) + ": " + e.failure;
    throw FitFailure("no G could be fitted:" + why);
  }
  out.best = *best;
  return out;
}

std::vector<int> classify(const Matrix& responsibilities) {
  std::vector<int> out(static_cast<std::size_t>(responsibilities.cols()));
  for (Eigen::Index i = 0; i < responsibilities.cols(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index g = 1; g < responsibilities.rows(); ++g)
      if (responsibilities(g, i) > responsibilities(best, i)) best = g;
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

std::vector<int> classify(const MixtureModel& model, const DatasetStats& data) {
  return classify(e_step(data, model).responsibilities);
}

}  // namespace cmm
