#include "cmm/markov_discrete.hpp"

#include <cmath>
#include <string>

namespace cmm {

namespace {

bool forbids_repeats(const DiscreteMixtureModel& m) {
  return m.variant == DiscreteVariant::DM;
}

void check_counts(const TransitionCounts& stats, const DiscreteMixtureModel& model) {
  if (stats.counts.rows() != model.num_states())
    throw InputError("sequence statistics do not match the model's state count");
  if (forbids_repeats(model) && stats.has_self_transitions())
    throw InputError("the DM model cannot score sequences with self-transitions");
}

// Log parameters of one model, computed once per E-step.
struct LogTables {
  Vector log_weights;
  Matrix log_initial;
  std::vector<Matrix> log_transitions;

  explicit LogTables(const DiscreteMixtureModel& m)
      : log_weights(m.weights.array().log()),
        log_initial(m.initial_probs.array().log()) {
    for (const auto& t : m.transitions) log_transitions.emplace_back(t.array().log());
  }

  double component(const TransitionCounts& s, int g) const {
    double out = log_initial(g, s.first_state);
    const auto& lt = log_transitions[static_cast<std::size_t>(g)];
    for (const auto& t : s.nonzero) out += t.count * lt(t.from, t.to);
    return out;
  }
};

}  // namespace

void validate(const DiscreteMixtureModel& model, double floor) {
  const int groups = model.num_groups();
  const int states = model.num_states();
  if (groups < 1 || states < 1) throw InputError("model needs at least one group and state");
  if (model.initial_probs.rows() != groups ||
      static_cast<int>(model.transitions.size()) != groups)
    throw InputError("model arrays disagree on the number of groups");
  Vector w = model.weights;
  check_distribution({w.data(), static_cast<std::size_t>(groups)}, floor, "weights");
  std::vector<double> row;
  for (int g = 0; g < groups; ++g) {
    row.assign(states, 0.0);
    for (int j = 0; j < states; ++j) row[j] = model.initial_probs(g, j);
    check_distribution(row, floor, "initial probabilities");
    const Matrix& t = model.transitions[static_cast<std::size_t>(g)];
    if (t.rows() != states || t.cols() != states)
      throw InputError("transition matrix has the wrong shape");
    for (int j = 0; j < states; ++j) {
      row.clear();
      for (int k = 0; k < states; ++k) {
        if (forbids_repeats(model) && k == j) {
          if (t(j, k) != 0.0) throw InputError("DM transition matrix needs a zero diagonal");
          continue;
        }
        row.push_back(t(j, k));
      }
      check_distribution(row, floor, "transition row");
    }
  }
}

double log_component_density(const TransitionCounts& stats, int group,
                             const DiscreteMixtureModel& model) {
  check_counts(stats, model);
  const Matrix& t = model.transitions.at(static_cast<std::size_t>(group));
  double out = std::log(model.initial_probs(group, stats.first_state));
  for (const auto& tr : stats.nonzero) out += tr.count * std::log(t(tr.from, tr.to));
  return out;
}

Matrix log_joint(const DatasetStats& data, const DiscreteMixtureModel& model) {
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

EStepResult e_step(const DatasetStats& data, const DiscreteMixtureModel& model) {
  return normalize_log_joint(log_joint(data, model), data.labels);
}

double observed_log_likelihood(const DatasetStats& data,
                               const DiscreteMixtureModel& model) {
  return e_step(data, model).log_likelihood;
}

DiscreteMixtureModel discrete_m_step(const DatasetStats& data,
                                     const Matrix& responsibilities,
                                     DiscreteVariant variant, double floor,
                                     MStepReport* report) {
  MStepReport local;
  MStepReport& rep = report ? *report : local;
  const int states = data.num_states;
  const auto groups = static_cast<int>(responsibilities.rows());
  const Vector masses = group_masses(responsibilities);

  DiscreteMixtureModel model;
  model.variant = variant;
  model.weights = update_weights(masses, floor, rep);
  model.initial_probs = update_initial_probs(data, responsibilities, floor, rep);

  model.transitions.assign(static_cast<std::size_t>(groups), Matrix::Zero(states, states));
  for (std::size_t i = 0; i < data.size(); ++i)
    for (int g = 0; g < groups; ++g) {
      const double z = responsibilities(g, static_cast<Eigen::Index>(i));
      if (z == 0.0) continue;
      auto& t = model.transitions[static_cast<std::size_t>(g)];
      for (const auto& tr : data.stats[i].nonzero) t(tr.from, tr.to) += z * tr.count;
    }

  std::vector<double> row;
  for (auto& t : model.transitions)
    for (int j = 0; j < states; ++j) {
      row.clear();
      for (int k = 0; k < states; ++k)
        if (variant == DiscreteVariant::DWM || k != j) row.push_back(t(j, k));
      rep.floored_entries += normalize_with_floor(row, floor);
      std::size_t next = 0;
      for (int k = 0; k < states; ++k)
        t(j, k) = (variant == DiscreteVariant::DWM || k != j) ? row[next++] : 0.0;
    }
  return model;
}

}  // namespace cmm
