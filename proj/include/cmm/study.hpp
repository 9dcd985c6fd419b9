#pragma once

// End-to-end replication workflows: generate, fit or sweep, evaluate.

#include "cmm/em.hpp"
#include "cmm/eval.hpp"
#include "cmm/simulate.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cmm {

enum class Study { Sim1, Sim2, Sim3, Msnbc };

std::string_view to_string(Study s);
Study parse_study(std::string_view name);

struct StudyOptions {
  Study study = Study::Sim1;
  bool large = true;
  int replicates = 25;
  std::uint64_t seed = 1;
  EmConfig em;  // starts, iterations, floor and G range; kind is per row
  std::optional<int> num_sequences;  // override the scenario size
  bool ari_include_labelled = false;  // semi-supervised ARI over all items
  int threads = 1;                    // workers across replicates
};

struct StudyReport {
  std::string title;
  std::vector<EvalSummary> summaries;  // one per model kind
  std::optional<BicTable> bic;         // msnbc only
  MonotonicityLog monotonicity;
  std::string table_text;
  std::string table_csv;
  std::string ari_csv;  // per-replicate values
};

StudyReport run_study(const StudyOptions& options);

/// ARI against the truth, optionally restricted to unlabelled sequences.
double evaluate_assignments(const Dataset& data, std::span<const int> truth,
                            std::span<const int> assigned, bool include_labelled);

}  // namespace cmm
