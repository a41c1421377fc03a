#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "almpinn/autodiff.hpp"

namespace almpinn {

struct Domain {
  double x_lo = 0.0;
  double x_hi = 1.0;
  double t_lo = 0.0;
  double t_hi = 1.0;
};

/// Fixed affine map of (x, t) onto [-1, 1]^2.
struct InputScaling {
  double x_scale = 1.0;
  double x_shift = 0.0;
  double t_scale = 1.0;
  double t_shift = 0.0;

  static InputScaling identity() { return {}; }
  static InputScaling from_domain(const Domain& domain);

  double x(double raw) const { return x_scale * raw + x_shift; }
  double t(double raw) const { return t_scale * raw + t_shift; }
};

enum class Activation { kTanh, kIdentity };

/// Fully connected network u(x, t; theta) with optional PDE coefficients v.
///
/// Parameters flatten as: for each layer, weights row-major then biases;
/// the coefficients v follow all layers.
class Network {
 public:
  Network() = default;

  /// Layer sizes must start with 2 and end with 1. Hidden layers use tanh and
  /// the output layer is linear.
  Network(std::vector<int> layer_sizes, const InputScaling& scaling);

  const std::vector<int>& layer_sizes() const { return layer_sizes_; }
  std::size_t layer_count() const { return weights_.size(); }
  const Eigen::MatrixXd& weight(std::size_t l) const { return weights_.at(l); }
  const Eigen::VectorXd& bias(std::size_t l) const { return biases_.at(l); }
  Eigen::MatrixXd& weight(std::size_t l) { return weights_.at(l); }
  Eigen::VectorXd& bias(std::size_t l) { return biases_.at(l); }
  Activation activation(std::size_t l) const { return activations_.at(l); }
  void set_activation(std::size_t l, Activation a) { activations_.at(l) = a; }

  const InputScaling& scaling() const { return scaling_; }
  void set_scaling(const InputScaling& s) { scaling_ = s; }

  const std::vector<double>& coeffs() const { return coeffs_; }
  std::vector<double>& coeffs() { return coeffs_; }
  void set_coeffs(std::vector<double> v) { coeffs_ = std::move(v); }

  double dropout_rate() const { return dropout_rate_; }
  void set_dropout_rate(double rate);

  /// Weights and biases only.
  std::size_t theta_count() const;
  /// theta_count() + coeffs().size().
  std::size_t parameter_count() const { return theta_count() + coeffs_.size(); }

  std::vector<double> flatten() const;
  void assign(std::span<const double> params);

  /// Inserts `count` linear layers with identity weights and zero biases just
  /// before the output layer; the represented function is unchanged.
  void insert_identity_layers(int count);

  /// Plain scalar forward evaluation (no derivatives, no dropout).
  double evaluate(double x, double t) const;

 private:
  std::vector<int> layer_sizes_;
  std::vector<Eigen::MatrixXd> weights_;
  std::vector<Eigen::VectorXd> biases_;
  std::vector<Activation> activations_;
  InputScaling scaling_;
  std::vector<double> coeffs_;
  double dropout_rate_ = 0.0;
};

/// Glorot-uniform weights, zero biases; deterministic in `seed`.
Network init_network(const std::vector<int>& layer_sizes, std::uint64_t seed, const Domain& domain);

/// Network parameters registered as leaves of a tape, for reverse-mode
/// differentiation of losses built point by point.
class TapeNetwork {
 public:
  TapeNetwork(const Network& net, Tape& tape);

  /// u(x, t) as a jet, with its parameter dependencies recorded.
  Var forward(double x, double t);
  const std::vector<Var>& coeffs() const { return coeffs_; }

 private:
  const Network& net_;
  Tape& tape_;
  std::vector<std::vector<Var>> weights_;  // per layer, row-major
  std::vector<std::vector<Var>> biases_;
  std::vector<Var> coeffs_;
};

/// u and its input derivatives at (x, t), recorded on `tape`.
Jet2 forward_jet(const Network& net, double x, double t, Tape& tape);

/// Which derivative channels the batched evaluator propagates for jet points.
enum class JetOrder {
  kValue,    // u only
  kSpatial,  // u, u_x, u_t, u_xx
  kFull,     // all six jet fields
};

int channel_count(JetOrder order);

/// Batched jet evaluation of a Network with a hand-derived reverse pass.
///
/// Evaluates `jet_points` with the derivative channels of `order` and
/// `value_points` with values only, then maps output adjoints back to a
/// parameter gradient. Columns of every stacked matrix are points; channel
/// blocks are laid out [values(jet + value points) | gx | gt | hxx | hxt | htt].
class BatchEvaluator {
 public:
  struct Outputs {
    std::vector<Jet2> jets;       // one per jet point (unused channels stay 0)
    std::vector<double> values;   // one per value point
  };

  /// Output adjoints: `jets[i]` holds d loss / d (field of jet point i).
  struct Adjoints {
    std::vector<Jet2> jets;
    std::vector<double> values;
  };

  /// `dropout_seed` is only used when `training` and the net has a nonzero rate.
  const Outputs& forward(const Network& net, std::span<const std::pair<double, double>> jet_points,
                         std::span<const std::pair<double, double>> value_points, JetOrder order,
                         bool training = false, std::uint64_t dropout_seed = 0);

  /// Gradient of the loss with respect to the network weights and biases
  /// (theta_count() entries) for the most recent forward call.
  std::vector<double> backward(const Adjoints& adjoints) const;

 private:
  void activation_backward(std::size_t layer, Eigen::MatrixXd& bar) const;

  const Network* net_ = nullptr;
  JetOrder order_ = JetOrder::kValue;
  Eigen::Index n_jet_ = 0;
  Eigen::Index n_value_ = 0;
  std::vector<Eigen::MatrixXd> inputs_;   // stacked input of each layer
  std::vector<Eigen::MatrixXd> pre_;      // stacked pre-activations
  std::vector<Eigen::ArrayXXd> act_;      // tanh of the value columns, before dropout
  std::vector<Eigen::MatrixXd> masks_;    // dropout masks (empty when off)
  Outputs outputs_;
};

/// Evaluates u at many points (value channel only).
std::vector<double> evaluate_points(const Network& net, std::span<const std::pair<double, double>> points);

struct CheckpointMeta {
  std::string problem_id;
  std::int64_t iteration = 0;
  std::vector<double> loss_history_tail;
};

inline constexpr int kCheckpointVersion = 1;

void save_checkpoint(const Network& net, const CheckpointMeta& meta, const std::filesystem::path& path);

struct LoadedCheckpoint {
  Network net;
  CheckpointMeta meta;
};

/// Throws CheckpointError (kVersionMismatch, kDimensionMismatch, kCorrupt, kIo).
/// When `expected_layer_sizes` is given, the stored hidden structure must match.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path,
                                 const std::optional<std::vector<int>>& expected_layer_sizes = std::nullopt);

}  // namespace almpinn
