#pragma once

// Reference computations used only by the tests. They deliberately avoid the
// library's fast paths: densities are evaluated as plain products in long
// double, and the generator maximizer climbs the complete-data
// log-likelihood numerically instead of using the closed form.

#include "cmm/markov_continuous.hpp"
#include "cmm/markov_discrete.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace cmm::oracle {

using Real = long double;

/// Expected complete-data log-likelihood contribution of one generator row:
/// sum_k n_k log q_k + E log(sum_k q_k) - T sum_k q_k.
inline Real cll_row(const std::vector<Real>& n, Real terminal, Real time,
                    const std::vector<Real>& q) {
  Real total = 0, out = 0;
  for (std::size_t k = 0; k < q.size(); ++k) {
    total += q[k];
    if (n[k] > 0) out += n[k] * std::log(q[k]);
  }
  if (terminal > 0) out += terminal * std::log(total);
  return out - time * total;
}

/// Maximizes cll_row over q_k >= lower by cyclic coordinate ascent; each
/// coordinate's derivative is strictly decreasing, so its root is found by
/// bisection.
inline std::vector<Real> maximize_cll_row(const std::vector<Real>& n, Real terminal,
                                          Real time, Real lower = 0) {
  const std::size_t m = n.size();
  std::vector<Real> q(m, 1.0L);
  for (int sweep = 0; sweep < 20000; ++sweep) {
    Real biggest_change = 0;
    for (std::size_t k = 0; k < m; ++k) {
      Real others = 0;
      for (std::size_t i = 0; i < m; ++i)
        if (i != k) others += q[i];
      auto slope = [&](Real x) {
        Real s = (n[k] > 0 ? n[k] / x : 0) - time;
        if (terminal > 0) s += terminal / (others + x);
        return s;
      };
      Real lo = lower, hi = 1;
      Real x;
      if (lo > 0 ? slope(lo) <= 0 : (n[k] == 0 && (others == 0 ? false : slope(0) <= 0))) {
        x = lo;
      } else {
        while (slope(hi) > 0) hi *= 2;
        if (lo == 0) lo = hi * 1e-30L;
        for (int it = 0; it < 300; ++it) {
          const Real mid = 0.5L * (lo + hi);
          (slope(mid) > 0 ? lo : hi) = mid;
        }
        x = 0.5L * (lo + hi);
      }
      biggest_change = std::max(biggest_change, std::abs(x - q[k]) / std::max<Real>(x, 1e-300L));
      q[k] = x;
    }
    if (biggest_change < 1e-16L) break;
  }
  return q;
}

/// Unnormalized h_g(x) of the continuous model as a direct product.
inline Real continuous_h(const TransitionCounts& s, int g, const ContinuousMixtureModel& m) {
  const auto& q = m.generators[static_cast<std::size_t>(g)];
  Real h = static_cast<Real>(m.weights[g]) * static_cast<Real>(m.initial_probs(g, s.first_state));
  h *= static_cast<Real>(q.exit_rate(s.last_state));
  const int states = q.num_states();
  Real exponent = 0;
  for (int j = 0; j < states; ++j) {
    exponent += static_cast<Real>(q(j, j)) * static_cast<Real>(s.time_in_state[j]);
    for (int k = 0; k < states; ++k)
      for (int c = 0; c < s.counts(j, k); ++c) h *= static_cast<Real>(q(j, k));
  }
  return h * std::exp(exponent);
}

/// Unnormalized pi_g * f_g(x) of the discrete model as a direct product.
inline Real discrete_h(const TransitionCounts& s, int g, const DiscreteMixtureModel& m) {
  const auto& t = m.transitions[static_cast<std::size_t>(g)];
  Real h = static_cast<Real>(m.weights[g]) * static_cast<Real>(m.initial_probs(g, s.first_state));
  for (Eigen::Index j = 0; j < t.rows(); ++j)
    for (Eigen::Index k = 0; k < t.cols(); ++k)
      for (int c = 0; c < s.counts(j, k); ++c) h *= static_cast<Real>(t(j, k));
  return h;
}

template <typename Model, typename H>
std::vector<std::vector<Real>> direct_responsibilities(const DatasetStats& data,
                                                       const Model& m, H h) {
  std::vector<std::vector<Real>> out;
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::vector<Real> col(static_cast<std::size_t>(m.num_groups()));
    Real total = 0;
    for (int g = 0; g < m.num_groups(); ++g) total += col[g] = h(data.stats[i], g, m);
    for (auto& c : col) c /= total;
    out.push_back(std::move(col));
  }
  return out;
}

/// Observed log-likelihood by direct products: unlabelled sequences add
/// log sum_g h_g, labelled ones log h_label.
template <typename Model, typename H>
Real direct_log_likelihood(const DatasetStats& data, const Model& m, H h) {
  Real out = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (const auto& label = data.labels[i]) {
      out += std::log(h(data.stats[i], *label, m));
      continue;
    }
    Real total = 0;
    for (int g = 0; g < m.num_groups(); ++g) total += h(data.stats[i], g, m);
    out += std::log(total);
  }
  return out;
}

}  // namespace cmm::oracle
