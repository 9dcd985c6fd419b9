#include "cmm/seqdata.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace cmm {

namespace {

std::string where(std::size_t line_no) {
  return line_no ? "line " + std::to_string(line_no) + ": " : std::string();
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view token, std::size_t line_no, const char* what) {
  token = trim(token);
  T value{};
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (token.empty() || ec != std::errc() || ptr != end)
    throw InputError(where(line_no) + "malformed " + what + " '" +
                     std::string(token) + "'");
  return value;
}

template <typename T>
std::vector<T> parse_list(std::string_view field, std::size_t line_no,
                          const char* what) {
  std::vector<T> out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = field.find(',', pos);
    out.push_back(parse_number<T>(field.substr(pos, comma - pos), line_no, what));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace

bool ClickSequence::has_repeats() const {
  return std::adjacent_find(states.begin(), states.end()) != states.end();
}

std::size_t Dataset::num_labelled() const {
  return static_cast<std::size_t>(std::count_if(
      sequences.begin(), sequences.end(),
      [](const ClickSequence& s) { return s.label.has_value(); }));
}

bool Dataset::all_have_times() const {
  return std::all_of(sequences.begin(), sequences.end(),
                     [](const ClickSequence& s) { return s.has_times(); });
}

bool Dataset::any_repeats() const {
  return std::any_of(sequences.begin(), sequences.end(),
                     [](const ClickSequence& s) { return s.has_repeats(); });
}

int Dataset::max_label() const {
  int m = -1;
  for (const auto& s : sequences)
    if (s.label) m = std::max(m, *s.label);
  return m;
}

void validate(const ClickSequence& seq, int num_states) {
  if (seq.states.empty()) throw InputError("empty sequence");
  for (int s : seq.states)
    if (s < 0 || s >= num_states)
      throw InputError("state " + std::to_string(s + 1) + " outside 1.." +
                       std::to_string(num_states));
  if (seq.has_times()) {
    if (seq.times.size() != seq.states.size())
      throw InputError("times/states length mismatch");
    for (double t : seq.times)
      if (!(t > 0.0) || !std::isfinite(t))
        throw InputError("holding times must be positive and finite");
  }
  if (seq.label && *seq.label < 0) throw InputError("group labels start at 1");
}

ClickSequence parse_line(std::string_view line, SequenceFormat format,
                         bool read_labels, std::size_t line_no) {
  ClickSequence seq;
  line = trim(line);
  if (const auto bar = line.find('|'); bar != std::string_view::npos) {
    const int label = parse_number<int>(line.substr(bar + 1), line_no, "label");
    if (label < 1) throw InputError(where(line_no) + "group labels start at 1");
    if (read_labels) seq.label = label - 1;
    line = line.substr(0, bar);
  }
  std::string_view times_field;
  bool has_times = false;
  if (const auto semi = line.find(';'); semi != std::string_view::npos) {
    times_field = line.substr(semi + 1);
    has_times = true;
    line = line.substr(0, semi);
  }
  for (int s : parse_list<int>(line, line_no, "state")) {
    if (s < 1) throw InputError(where(line_no) + "state indices start at 1");
    seq.states.push_back(s - 1);
  }
  if (format == SequenceFormat::SequencesWithTimes) {
    if (!has_times) throw InputError(where(line_no) + "holding times missing");
    seq.times = parse_list<double>(times_field, line_no, "time");
    if (seq.times.size() != seq.states.size())
      throw InputError(where(line_no) + "length mismatch: " +
                       std::to_string(seq.states.size()) + " states, " +
                       std::to_string(seq.times.size()) + " times");
    for (double t : seq.times)
      if (!(t > 0.0) || !std::isfinite(t))
        throw InputError(where(line_no) + "holding times must be positive");
  }
  return seq;
}

Dataset parse_dataset(std::istream& in, const ParseOptions& options) {
  Dataset data;
  std::string line;
  std::size_t line_no = 0;
  int max_state = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    auto seq = parse_line(body, options.format, options.read_labels, line_no);
    max_state = std::max(max_state, *std::max_element(seq.states.begin(), seq.states.end()) + 1);
    data.sequences.push_back(std::move(seq));
  }
  if (options.num_states) {
    if (*options.num_states < max_state)
      throw InputError("state " + std::to_string(max_state) +
                       " exceeds the declared number of states " +
                       std::to_string(*options.num_states));
    data.num_states = *options.num_states;
  } else {
    data.num_states = max_state;
  }
  return data;
}

Dataset parse_dataset(const std::filesystem::path& path, const ParseOptions& options) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  try {
    return parse_dataset(in, options);
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

std::string format_line(const ClickSequence& seq) {
  std::string out;
  for (std::size_t l = 0; l < seq.states.size(); ++l) {
    if (l) out += ',';
    out += std::to_string(seq.states[l] + 1);
  }
  if (seq.has_times()) {
    out += ';';
    for (std::size_t l = 0; l < seq.times.size(); ++l) {
      if (l) out += ',';
      out += format_double(seq.times[l]);
    }
  }
  if (seq.label) out += '|' + std::to_string(*seq.label + 1);
  return out;
}

void write_dataset(std::ostream& out, const Dataset& data) {
  for (const auto& seq : data.sequences) out << format_line(seq) << '\n';
}

void write_dataset(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  write_dataset(out, data);
}

ClickSequence collapse_repeats(const ClickSequence& seq) {
  ClickSequence out;
  out.label = seq.label;
  for (std::size_t l = 0; l < seq.states.size(); ++l) {
    const bool repeat = !out.states.empty() && out.states.back() == seq.states[l];
    if (!repeat) out.states.push_back(seq.states[l]);
    if (seq.has_times()) {
      if (repeat)
        out.times.back() += seq.times[l];
      else
        out.times.push_back(seq.times[l]);
    }
  }
  return out;
}

Dataset collapse_repeats(const Dataset& data) {
  Dataset out{{}, data.num_states};
  out.sequences.reserve(data.size());
  for (const auto& s : data.sequences) out.sequences.push_back(collapse_repeats(s));
  return out;
}

Dataset strip_times(const Dataset& data) {
  Dataset out = data;
  for (auto& s : out.sequences) s.times.clear();
  return out;
}

Dataset strip_labels(const Dataset& data) {
  Dataset out = data;
  for (auto& s : out.sequences) s.label.reset();
  return out;
}

bool TransitionCounts::has_self_transitions() const {
  return counts.diagonal().any();
}

TransitionCounts summarize(const ClickSequence& seq, int num_states) {
  TransitionCounts out;
  out.counts = Eigen::MatrixXi::Zero(num_states, num_states);
  out.first_state = seq.states.front();
  out.last_state = seq.states.back();
  for (std::size_t l = 0; l + 1 < seq.states.size(); ++l)
    ++out.counts(seq.states[l], seq.states[l + 1]);
  if (seq.has_times()) {
    out.time_in_state = Vector::Zero(num_states);
    for (std::size_t l = 0; l < seq.states.size(); ++l)
      out.time_in_state[seq.states[l]] += seq.times[l];
  }
  for (int j = 0; j < num_states; ++j)
    for (int k = 0; k < num_states; ++k)
      if (out.counts(j, k) > 0) out.nonzero.push_back({j, k, out.counts(j, k)});
  return out;
}

std::size_t DatasetStats::num_unlabelled() const {
  return static_cast<std::size_t>(
      std::count(labels.begin(), labels.end(), std::nullopt));
}

DatasetStats summarize(const Dataset& data) {
  DatasetStats out;
  out.num_states = data.num_states;
  out.stats.reserve(data.size());
  out.labels.reserve(data.size());
  for (const auto& seq : data.sequences) {
    validate(seq, data.num_states);
    out.stats.push_back(summarize(seq, data.num_states));
    out.labels.push_back(seq.label);
  }
  return out;
}

}  // namespace cmm
