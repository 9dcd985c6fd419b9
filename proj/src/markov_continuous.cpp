#include "cmm/markov_continuous.hpp"

#include <cmath>
#include <string>

namespace cmm {

namespace {

// Weighted visits below this carry no information about a rate row.
constexpr double kMinRowSupport = 1e-8;

void check_counts(const TransitionCounts& stats, const ContinuousMixtureModel& model) {
  if (stats.counts.rows() != model.num_states())
    throw InputError("sequence statistics do not match the model's state count");
  if (!stats.has_times())
    throw InputError("the continuous-time model needs holding times");
  if (stats.has_self_transitions())
    throw InputError("continuous-time sequences cannot repeat a state");
}

struct LogTables {
  Vector log_weights;
  Matrix log_initial;
  std::vector<Matrix> log_rates;  // log q_jk off the diagonal, log(-q_jj) on it
  std::vector<Vector> diagonal;   // q_jj

  explicit LogTables(const ContinuousMixtureModel& m)
      : log_weights(m.weights.array().log()),
        log_initial(m.initial_probs.array().log()) {
    for (const auto& q : m.generators) {
      Matrix lr = q.rates().array().abs().log();
      log_rates.push_back(std::move(lr));
      diagonal.emplace_back(q.rates().diagonal());
    }
  }

  double component(const TransitionCounts& s, int g) const {
    const auto& lr = log_rates[static_cast<std::size_t>(g)];
    double out = log_initial(g, s.first_state) + lr(s.last_state, s.last_state);
    for (const auto& t : s.nonzero) out += t.count * lr(t.from, t.to);
    out += diagonal[static_cast<std::size_t>(g)].dot(s.time_in_state);
    return out;
  }
};

}  // namespace

GeneratorMatrix::GeneratorMatrix(Matrix rates, double floor) : rates_(std::move(rates)) {
  const auto n = rates_.rows();
  if (n < 1 || rates_.cols() != n) throw InputError("generator must be square");
  for (Eigen::Index j = 0; j < n; ++j) {
    double off = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
      if (k == j) continue;
      const double q = rates_(j, k);
      if (!std::isfinite(q) || q < floor)
        throw InputError("generator off-diagonal rate below the floor at (" +
                         std::to_string(j + 1) + "," + std::to_string(k + 1) + ")");
      off += q;
    }
    if (std::abs(rates_(j, j) + off) > 1e-12)
      throw InputError("generator row " + std::to_string(j + 1) + " does not sum to zero");
  }
}

GeneratorMatrix GeneratorMatrix::from_off_diagonal(const Matrix& rates, double floor) {
  Matrix q = rates;
  for (Eigen::Index j = 0; j < q.rows(); ++j) {
    q(j, j) = 0.0;
    q(j, j) = -q.row(j).sum();
  }
  return GeneratorMatrix(std::move(q), floor);
}

Matrix embedded_transition_probs(const GeneratorMatrix& q) {
  const int n = q.num_states();
  Matrix p = Matrix::Zero(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      if (k != j) p(j, k) = q(j, k) / q.exit_rate(j);
  return p;
}

double expected_holding_time(const GeneratorMatrix& q, int state) {
  return 1.0 / q.exit_rate(state);
}

void validate(const ContinuousMixtureModel& model, double floor) {
  const int groups = model.num_groups();
  const int states = model.num_states();
  if (groups < 1 || states < 2)
    throw InputError("continuous model needs at least one group and two states");
  if (model.initial_probs.rows() != groups ||
      static_cast<int>(model.generators.size()) != groups)
    throw InputError("model arrays disagree on the number of groups");
  Vector w = model.weights;
  check_distribution({w.data(), static_cast<std::size_t>(groups)}, floor, "weights");
  std::vector<double> row(static_cast<std::size_t>(states));
  for (int g = 0; g < groups; ++g) {
    for (int j = 0; j < states; ++j) row[j] = model.initial_probs(g, j);
    check_distribution(row, floor, "initial probabilities");
    const auto& q = model.generators[static_cast<std::size_t>(g)];
    if (q.num_states() != states) throw InputError("generator has the wrong shape");
    GeneratorMatrix recheck(q.rates(), floor);
    for (int j = 0; j < states; ++j)
      if (!(q.exit_rate(j) > 0.0)) throw InputError("generator has an absorbing state");
  }
}

double log_component_density(const TransitionCounts& stats, int group,
                             const ContinuousMixtureModel& model) {
  check_counts(stats, model);
  const auto& q = model.generators.at(static_cast<std::size_t>(group));
  double out = std::log(model.initial_probs(group, stats.first_state));
  for (const auto& t : stats.nonzero) out += t.count * std::log(q(t.from, t.to));
  out += std::log(q.exit_rate(stats.last_state));
  for (int j = 0; j < q.num_states(); ++j) out += q(j, j) * stats.time_in_state[j];
  return out;
}

Matrix log_joint(const DatasetStats& data, const ContinuousMixtureModel& model) {
  const LogTables tables(model);
  const int groups = model.num_groups();
  Matrix out(groups, static_cast<Eigen::Index>(data.size()));
  for (std::size_t i = 0; i < data.size(); ++i) {
    check_counts(data.stats[i], model);
    for (int g = 0; g < groups; ++g)
      out(g, static_cast<Eigen::Index>(i)) =
          tables.log_weights[g] + tables.component(data.stats[i], g);
  }
  return out;
}

EStepResult e_step(const DatasetStats& data, const ContinuousMixtureModel& model) {
  return normalize_log_joint(log_joint(data, model), data.labels);
}

double observed_log_likelihood(const DatasetStats& data,
                               const ContinuousMixtureModel& model) {
  return e_step(data, model).log_likelihood;
}

GeneratorAggregates aggregate_for_group(const DatasetStats& data,
                                        const Matrix& responsibilities, int group) {
  const int states = data.num_states;
  GeneratorAggregates agg{Matrix::Zero(states, states), Vector::Zero(states),
                          Vector::Zero(states), Vector::Zero(states)};
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double z = responsibilities(group, static_cast<Eigen::Index>(i));
    if (z == 0.0) continue;
    const auto& s = data.stats[i];
    if (!s.has_times()) throw InputError("the continuous-time model needs holding times");
    for (const auto& t : s.nonzero) agg.transitions(t.from, t.to) += z * t.count;
    agg.terminal[s.last_state] += z;
    agg.time += z * s.time_in_state;
  }
  agg.exits = agg.transitions.rowwise().sum();
  return agg;
}

GeneratorMatrix generator_update(const GeneratorAggregates& agg, double floor,
                                 MStepReport& report) {
  const auto states = agg.transitions.rows();
  Matrix q = Matrix::Zero(states, states);
  for (Eigen::Index j = 0; j < states; ++j) {
    const double visits = agg.exits[j] + agg.terminal[j];
    if (visits >= kMinRowSupport) {
      if (!(agg.time[j] > 0.0))
        throw DegenerateGroup("state " + std::to_string(j + 1) +
                              " visited without any holding time");
      const double total_rate = visits / agg.time[j];
      for (Eigen::Index k = 0; k < states; ++k) {
        if (k == j) continue;
        q(j, k) = agg.exits[j] > 0.0
                      ? agg.transitions(j, k) * total_rate / agg.exits[j]
                      : total_rate / static_cast<double>(states - 1);
      }
    }
    for (Eigen::Index k = 0; k < states; ++k) {
      if (k == j || q(j, k) >= floor) continue;
      q(j, k) = floor;
      ++report.floored_entries;
    }
    if (!q.row(j).allFinite())
      throw DegenerateGroup("non-finite rate estimate for state " + std::to_string(j + 1));
  }
  return GeneratorMatrix::from_off_diagonal(q, floor);
}

ContinuousMixtureModel continuous_m_step(const DatasetStats& data,
                                         const Matrix& responsibilities,
                                         double floor, MStepReport* report) {
  MStepReport local;
  MStepReport& rep = report ? *report : local;
  const auto groups = static_cast<int>(responsibilities.rows());
  const Vector masses = group_masses(responsibilities);

  ContinuousMixtureModel model;
  model.weights = update_weights(masses, floor, rep);
  model.initial_probs = update_initial_probs(data, responsibilities, floor, rep);
  model.generators.reserve(static_cast<std::size_t>(groups));
  for (int g = 0; g < groups; ++g)
    model.generators.push_back(
        generator_update(aggregate_for_group(data, responsibilities, g), floor, rep));
  return model;
}

Matrix printed_ratio_generator_update(const GeneratorAggregates& agg) {
  const auto states = agg.transitions.rows();
  Matrix q = Matrix::Zero(states, states);
  for (Eigen::Index j = 0; j < states; ++j) {
    const double ratio = (agg.time[j] + agg.exits[j]) / (agg.terminal[j] + agg.exits[j]);
    for (Eigen::Index k = 0; k < states; ++k)
      if (k != j) q(j, k) = agg.transitions(j, k) / ratio;
    q(j, j) = -q.row(j).sum();
  }
  return q;
}

}  // namespace cmm
