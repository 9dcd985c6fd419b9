#pragma once

// Hand-rolled random generators for property tests.

#include "cmm/em.hpp"
#include "cmm/rng.hpp"
#include "cmm/seqdata.hpp"

#include <random>

namespace cmm::gen {

inline int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline double uniform_real(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

struct SequenceShape {
  int num_states = 3;
  int min_length = 1;
  int max_length = 8;
  bool times = true;
  bool repeats = false;
  int label_groups = 0;  // > 0: label each sequence with probability 1/2
};

inline ClickSequence sequence(Rng& rng, const SequenceShape& shape) {
  ClickSequence s;
  const int length = uniform_int(rng, shape.min_length, shape.max_length);
  for (int l = 0; l < length; ++l) {
    int next = uniform_int(rng, 0, shape.num_states - 1);
    if (!shape.repeats && l > 0)
      while (next == s.states.back()) next = uniform_int(rng, 0, shape.num_states - 1);
    s.states.push_back(next);
    if (shape.times) s.times.push_back(std::exponential_distribution<double>(1.0)(rng));
  }
  if (shape.label_groups > 0 && uniform_int(rng, 0, 1) == 1)
    s.label = uniform_int(rng, 0, shape.label_groups - 1);
  return s;
}

inline Dataset dataset(Rng& rng, int n, const SequenceShape& shape) {
  Dataset d;
  d.num_states = shape.num_states;
  for (int i = 0; i < n; ++i) d.sequences.push_back(sequence(rng, shape));
  return d;
}

/// G x N column-stochastic matrix; labelled columns one-hot.
inline Matrix responsibilities(Rng& rng, const DatasetStats& data, int groups) {
  Matrix z(groups, static_cast<Eigen::Index>(data.size()));
  for (Eigen::Index i = 0; i < z.cols(); ++i) {
    if (const auto& label = data.labels[static_cast<std::size_t>(i)]) {
      z.col(i).setZero();
      z(*label, i) = 1.0;
      continue;
    }
    for (int g = 0; g < groups; ++g) z(g, i) = std::exponential_distribution<double>(1.0)(rng);
    z.col(i) /= z.col(i).sum();
  }
  return z;
}

}  // namespace cmm::gen
