#pragma once

#include "cmm/mixture.hpp"
#include "cmm/seqdata.hpp"

#include <vector>

namespace cmm {

enum class DiscreteVariant {
  DWM,  // self-transitions allowed
  DM,   // self-transitions forbidden; diagonal fixed at zero
};

/// Mixture of first-order discrete-time Markov chains.
struct DiscreteMixtureModel {
  Vector weights;                   // pi_g
  Matrix initial_probs;             // G x J, row g is alpha_g
  std::vector<Matrix> transitions;  // G row-stochastic J x J matrices
  DiscreteVariant variant = DiscreteVariant::DWM;

  int num_groups() const { return static_cast<int>(weights.size()); }
  int num_states() const { return static_cast<int>(initial_probs.cols()); }
};

/// Throws InputError when shapes, stochasticity (1e-12), the floor, or the
/// DM zero diagonal are violated.
void validate(const DiscreteMixtureModel& model, double floor = 0.0);

/// log[ alpha_{g,x1} * prod_{j,k} lambda_{gjk}^{n_jk} ]. Throws InputError if
/// a DM model is handed counts with self-transitions.
double log_component_density(const TransitionCounts& stats, int group,
                             const DiscreteMixtureModel& model);

/// log pi_g + log f_g(x_i) for every group and sequence (G x N).
Matrix log_joint(const DatasetStats& data, const DiscreteMixtureModel& model);

/// G x N responsibilities; labelled columns stay one-hot at their label.
EStepResult e_step(const DatasetStats& data, const DiscreteMixtureModel& model);

double observed_log_likelihood(const DatasetStats& data,
                               const DiscreteMixtureModel& model);

/// Closed-form weighted maximum likelihood update. Rows are floored and the
/// free entries renormalized; for DM the diagonal stays exactly zero. Throws
/// DegenerateGroup when a group has (almost) no responsibility mass.
DiscreteMixtureModel discrete_m_step(const DatasetStats& data,
                                     const Matrix& responsibilities,
                                     DiscreteVariant variant,
                                     double floor = kDefaultFloor,
                                     MStepReport* report = nullptr);

}  // namespace cmm
