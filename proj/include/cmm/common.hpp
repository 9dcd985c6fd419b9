#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <string_view>

namespace cmm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Lower bound applied to every estimated probability and rate.
inline constexpr double kDefaultFloor = 1e-6;

/// Malformed or inconsistent user input (files, flags, labels out of range).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A fit could not produce a usable model (every start degenerated, ...).
class FitFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by an M-step when a group lost all of its responsibility mass or a
/// rate row cannot be estimated; the calling start is abandoned.
class DegenerateGroup : public FitFailure {
 public:
  using FitFailure::FitFailure;
};

enum class ModelKind { CM, DM, DWM };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view text);  // throws InputError

}  // namespace cmm
