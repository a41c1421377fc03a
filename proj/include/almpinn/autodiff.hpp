#pragma once

// Scalar automatic differentiation for PINN residuals.
//
// Values are second-order jets in the two network inputs (x, t). A Tape
// records jet operations so that a scalar loss built from jets can be
// differentiated with respect to every registered parameter leaf in a single
// reverse sweep.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace almpinn {

enum class Field : int { kValue = 0, kGx, kGt, kHxx, kHxt, kHtt };

inline constexpr int kJetFields = 6;

/// Value of an expression together with its first and second derivatives
/// with respect to (x, t).
struct Jet2 {
  double v = 0.0;
  double gx = 0.0;
  double gt = 0.0;
  double hxx = 0.0;
  double hxt = 0.0;
  double htt = 0.0;

  static constexpr Jet2 constant(double c) { return Jet2{c, 0, 0, 0, 0, 0}; }

  double operator[](Field f) const;
  double& operator[](Field f);

  bool is_finite() const;

  friend bool operator==(const Jet2&, const Jet2&) = default;
};

/// Input jets for x and t with unit first-derivative seeds.
std::pair<Jet2, Jet2> seed_input(double x, double t);

// Plain jet arithmetic (no recording).
Jet2 operator+(const Jet2& a, const Jet2& b);
Jet2 operator-(const Jet2& a, const Jet2& b);
Jet2 operator*(const Jet2& a, const Jet2& b);
Jet2 operator*(double c, const Jet2& a);
Jet2 operator-(const Jet2& a);
Jet2 operator+(const Jet2& a, double c);
Jet2 tanh(const Jet2& a);
Jet2 square(const Jet2& a);
Jet2 exp(const Jet2& a);
Jet2 log(const Jet2& a);
Jet2 sin(const Jet2& a);
Jet2 cos(const Jet2& a);
Jet2 reciprocal(const Jet2& a);

enum class JetOp {
  kAdd,
  kSub,
  kMul,
  kScale,
  kTanh,
  kSquare,
  kExp,
  kLn,
  kSin,
};

/// d(output field i) / d(operand field j), stored row-major.
using JetPartials = std::array<double, kJetFields * kJetFields>;

class Tape;

/// Handle to a node on a Tape. Arithmetic on handles records new nodes.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t index) : tape_(tape), index_(index) {}

  Tape* tape() const { return tape_; }
  std::size_t index() const { return index_; }
  const Jet2& jet() const;
  double value() const { return jet().v; }

 private:
  Tape* tape_ = nullptr;
  std::size_t index_ = 0;
};

Var operator+(const Var& a, const Var& b);
Var operator-(const Var& a, const Var& b);
Var operator*(const Var& a, const Var& b);
Var operator*(double c, const Var& a);
Var operator*(const Var& a, double c);
Var operator+(const Var& a, double c);
Var operator+(double c, const Var& a);
Var operator-(const Var& a, double c);
Var operator-(const Var& a);
Var tanh(const Var& a);
Var square(const Var& a);
Var exp(const Var& a);
Var log(const Var& a);
Var sin(const Var& a);

/// Append-only record of jet operations.
class Tape {
 public:
  struct Node {
    enum class Kind { kParameter, kConstant, kInput, kOp, kField };
    Kind kind = Kind::kConstant;
    JetOp op = JetOp::kAdd;
    std::array<std::ptrdiff_t, 2> operands{-1, -1};
    std::array<JetPartials, 2> partials{};
    Jet2 value;
    std::ptrdiff_t parameter = -1;
    // True when the node does not depend on the seeded inputs (x, t).
    bool scalar = true;
  };

  /// Trainable leaf; its gradient lands in entry `parameter_index`.
  Var parameter(std::size_t parameter_index, double value);
  Var constant(double value);
  /// Leaf carrying input-derivative seeds (not differentiated by backward).
  Var input(const Jet2& seed);
  /// Records `op` applied to `operands`; `scale` is used only by kScale.
  Var apply(JetOp op, std::span<const Var> operands, double scale = 1.0);
  /// Extracts one field of a jet as a scalar node.
  Var field(const Var& a, Field f);

  const Node& node(std::size_t i) const { return nodes_.at(i); }
  std::size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

 private:
  Var push(Node node);

  std::vector<Node> nodes_;
};

/// Output jet and local partials of a single jet operation.
struct JetOpResult {
  Jet2 out;
  std::array<JetPartials, 2> partials{};
};

/// Applies `op` with exact second-order propagation. Throws DomainError for
/// ln of a non-positive value and OverflowError on a non-finite result.
JetOpResult jet_apply(JetOp op, std::span<const Jet2> operands, double scale = 1.0);

/// Convenience overload that records the node on `tape`.
Var jet_apply(JetOp op, std::span<const Var> operands, Tape& tape, double scale = 1.0);

using GradientVector = std::vector<double>;

/// Reverse sweep from `loss` (must be a scalar node). Returns d loss / d p for
/// each parameter index in [0, parameter_count).
GradientVector backward(const Tape& tape, const Var& loss, std::size_t parameter_count);

/// f(theta, grad) returns the value and, when grad is non-null, writes the
/// analytic gradient into it.
using GradFunction = std::function<double(std::span<const double>, std::vector<double>*)>;

/// Max over parameters of |analytic - central difference| / max(1, |central difference|).
double grad_check(const GradFunction& f, std::span<const double> theta, double step);

}  // namespace almpinn
