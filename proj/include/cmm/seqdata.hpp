#pragma once

#include "cmm/common.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace cmm {

// States and labels are 0-based in memory and 1-based in every text format.

struct ClickSequence {
  std::vector<int> states;
  std::vector<double> times;  // empty when no holding times were observed
  std::optional<int> label;

  bool has_times() const { return !times.empty(); }
  std::size_t length() const { return states.size(); }
  bool has_repeats() const;
};

struct Dataset {
  std::vector<ClickSequence> sequences;
  int num_states = 0;

  std::size_t size() const { return sequences.size(); }
  std::size_t num_labelled() const;
  std::size_t num_unlabelled() const { return size() - num_labelled(); }
  bool all_have_times() const;
  bool any_repeats() const;
  int max_label() const;  // -1 when unlabelled
};

/// Throws InputError if `seq` breaks a ClickSequence invariant for `num_states`.
void validate(const ClickSequence& seq, int num_states);

enum class SequenceFormat { SequencesOnly, SequencesWithTimes };

struct ParseOptions {
  SequenceFormat format = SequenceFormat::SequencesOnly;
  bool read_labels = true;
  std::optional<int> num_states;  // inferred as the largest state when unset
};

/// Parses one non-comment line. `line_no` is only used in error messages.
ClickSequence parse_line(std::string_view line, SequenceFormat format,
                         bool read_labels, std::size_t line_no = 0);

Dataset parse_dataset(std::istream& in, const ParseOptions& options = {});
Dataset parse_dataset(const std::filesystem::path& path,
                      const ParseOptions& options = {});

std::string format_line(const ClickSequence& seq);
void write_dataset(std::ostream& out, const Dataset& data);
void write_dataset(const std::filesystem::path& path, const Dataset& data);

/// Shortest text that parses back to exactly `value`.
std::string format_double(double value);

/// Merges runs of equal consecutive states; merged visits add their times.
ClickSequence collapse_repeats(const ClickSequence& seq);
Dataset collapse_repeats(const Dataset& data);

/// Drops holding times (and optionally labels) from every sequence.
Dataset strip_times(const Dataset& data);
Dataset strip_labels(const Dataset& data);

struct Transition {
  int from;
  int to;
  int count;
};

/// Sufficient statistics of one sequence.
struct TransitionCounts {
  Eigen::MatrixXi counts;  // counts(j, k): number of adjacent (j, k) pairs
  Vector time_in_state;    // total holding time per state; size 0 without times
  int first_state = 0;
  int last_state = 0;
  std::vector<Transition> nonzero;  // sparse view of `counts`, row-major order

  int num_transitions() const { return counts.sum(); }
  bool has_times() const { return time_in_state.size() > 0; }
  bool has_self_transitions() const;
};

TransitionCounts summarize(const ClickSequence& seq, int num_states);

/// Per-sequence statistics plus the fixed labels, in dataset order.
struct DatasetStats {
  int num_states = 0;
  std::vector<TransitionCounts> stats;
  std::vector<std::optional<int>> labels;

  std::size_t size() const { return stats.size(); }
  std::size_t num_unlabelled() const;
};

DatasetStats summarize(const Dataset& data);

}  // namespace cmm
