#include "almpinn/network.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "almpinn/error.hpp"
#include "almpinn/format.hpp"
#include "almpinn/rng.hpp"

namespace almpinn {

namespace {

// tanh through a vectorised exp; Eigen evaluates the double tanh one lane at a
// time. Absolute error stays at the 1e-16 level.
template <class Derived>
Eigen::ArrayXXd batch_tanh(const Eigen::ArrayBase<Derived>& z) {
  const Eigen::ArrayXXd e = (-2.0 * z.abs()).exp();
  return (1.0 - e) / (1.0 + e) * z.sign();
}

}  // namespace

InputScaling InputScaling::from_domain(const Domain& d) {
  if (!(d.x_hi > d.x_lo) || !(d.t_hi > d.t_lo)) {
    throw InvalidArgument("InputScaling: degenerate domain");
  }
  InputScaling s;
  s.x_scale = 2.0 / (d.x_hi - d.x_lo);
  s.x_shift = -1.0 - s.x_scale * d.x_lo;
  s.t_scale = 2.0 / (d.t_hi - d.t_lo);
  s.t_shift = -1.0 - s.t_scale * d.t_lo;
  return s;
}

Network::Network(std::vector<int> layer_sizes, const InputScaling& scaling)
    : layer_sizes_(std::move(layer_sizes)), scaling_(scaling) {
  if (layer_sizes_.size() < 2) throw InvalidArgument("Network: need at least input and output layers");
  if (layer_sizes_.front() != 2) throw InvalidArgument("Network: input layer must have 2 units");
  if (layer_sizes_.back() != 1) throw InvalidArgument("Network: output layer must have 1 unit");
  for (int w : layer_sizes_) {
    if (w <= 0) throw InvalidArgument("Network: layer widths must be positive");
  }
  for (std::size_t l = 0; l + 1 < layer_sizes_.size(); ++l) {
    weights_.emplace_back(Eigen::MatrixXd::Zero(layer_sizes_[l + 1], layer_sizes_[l]));
    biases_.emplace_back(Eigen::VectorXd::Zero(layer_sizes_[l + 1]));
    activations_.push_back(l + 2 == layer_sizes_.size() ? Activation::kIdentity : Activation::kTanh);
  }
}

void Network::set_dropout_rate(double rate) {
  if (!(rate >= 0.0 && rate < 1.0)) throw InvalidArgument("dropout rate must lie in [0, 1)");
  dropout_rate_ = rate;
}

std::size_t Network::theta_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    n += static_cast<std::size_t>(weights_[l].size() + biases_[l].size());
  }
  return n;
}

std::vector<double> Network::flatten() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    const auto& w = weights_[l];
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) out.push_back(w(i, j));
    }
    for (Eigen::Index i = 0; i < biases_[l].size(); ++i) out.push_back(biases_[l](i));
  }
  out.insert(out.end(), coeffs_.begin(), coeffs_.end());
  return out;
}

void Network::assign(std::span<const double> params) {
  if (params.size() != parameter_count()) {
    throw InvalidArgument("Network::assign: parameter count mismatch");
  }
  std::size_t k = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    auto& w = weights_[l];
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = params[k++];
    }
    for (Eigen::Index i = 0; i < biases_[l].size(); ++i) biases_[l](i) = params[k++];
  }
  for (double& c : coeffs_) c = params[k++];
}

void Network::insert_identity_layers(int count) {
  if (count < 0) throw InvalidArgument("insert_identity_layers: negative count");
  if (layer_sizes_.size() < 3) throw InvalidArgument("insert_identity_layers: network has no hidden layer");
  const int width = layer_sizes_[layer_sizes_.size() - 2];
  for (int c = 0; c < count; ++c) {
    const auto pos = weights_.size() - 1;
    weights_.insert(weights_.begin() + static_cast<std::ptrdiff_t>(pos),
                    Eigen::MatrixXd::Identity(width, width));
    biases_.insert(biases_.begin() + static_cast<std::ptrdiff_t>(pos), Eigen::VectorXd::Zero(width));
    activations_.insert(activations_.begin() + static_cast<std::ptrdiff_t>(pos), Activation::kIdentity);
    layer_sizes_.insert(layer_sizes_.end() - 1, width);
  }
}

double Network::evaluate(double x, double t) const {
  Eigen::VectorXd a(2);
  a << scaling_.x(x), scaling_.t(t);
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    Eigen::VectorXd z = weights_[l] * a + biases_[l];
    if (activations_[l] == Activation::kTanh) z = batch_tanh(z.array()).matrix();
    a = std::move(z);
  }
  return a(0);
}

Network init_network(const std::vector<int>& layer_sizes, std::uint64_t seed, const Domain& domain) {
  Network net(layer_sizes, InputScaling::from_domain(domain));
  CounterRng rng(CounterRng::derive(seed, 0x1d17));
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    auto& w = net.weight(l);
    const double bound = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = rng.uniform(-bound, bound);
    }
  }
  return net;
}

// ---------------------------------------------------------------------------
// Tape route

TapeNetwork::TapeNetwork(const Network& net, Tape& tape) : net_(net), tape_(tape) {
  std::size_t k = 0;
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const auto& w = net.weight(l);
    std::vector<Var> wl;
    wl.reserve(static_cast<std::size_t>(w.size()));
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) wl.push_back(tape.parameter(k++, w(i, j)));
    }
    std::vector<Var> bl;
    for (Eigen::Index i = 0; i < net.bias(l).size(); ++i) bl.push_back(tape.parameter(k++, net.bias(l)(i)));
    weights_.push_back(std::move(wl));
    biases_.push_back(std::move(bl));
  }
  for (double c : net.coeffs()) coeffs_.push_back(tape.parameter(k++, c));
}

Var TapeNetwork::forward(double x, double t) {
  const auto [jx, jt] = seed_input(x, t);
  const InputScaling& s = net_.scaling();
  std::vector<Var> a{s.x_scale * tape_.input(jx) + s.x_shift, s.t_scale * tape_.input(jt) + s.t_shift};
  for (std::size_t l = 0; l < net_.layer_count(); ++l) {
    const auto rows = static_cast<std::size_t>(net_.weight(l).rows());
    const auto cols = static_cast<std::size_t>(net_.weight(l).cols());
    std::vector<Var> z;
    z.reserve(rows);
    for (std::size_t i = 0; i < rows; ++i) {
      Var acc = biases_[l][i];
      for (std::size_t j = 0; j < cols; ++j) acc = acc + weights_[l][i * cols + j] * a[j];
      z.push_back(net_.activation(l) == Activation::kTanh ? tanh(acc) : acc);
    }
    a = std::move(z);
  }
  return a[0];
}

Jet2 forward_jet(const Network& net, double x, double t, Tape& tape) {
  TapeNetwork tn(net, tape);
  return tn.forward(x, t).jet();
}

// ---------------------------------------------------------------------------
// Batched route

int channel_count(JetOrder order) {
  switch (order) {
    case JetOrder::kValue: return 1;
    case JetOrder::kSpatial: return 4;
    case JetOrder::kFull: return 6;
  }
  return 1;
}

namespace {

constexpr int kChGx = 1;
constexpr int kChGt = 2;
constexpr int kChHxx = 3;
constexpr int kChHxt = 4;
constexpr int kChHtt = 5;

}  // namespace

const BatchEvaluator::Outputs& BatchEvaluator::forward(const Network& net,
                                                       std::span<const std::pair<double, double>> jet_points,
                                                       std::span<const std::pair<double, double>> value_points,
                                                       JetOrder order, bool training, std::uint64_t dropout_seed) {
  net_ = &net;
  order_ = jet_points.empty() ? JetOrder::kValue : order;
  n_jet_ = static_cast<Eigen::Index>(jet_points.size());
  n_value_ = static_cast<Eigen::Index>(value_points.size());
  const int channels = channel_count(order_);
  const Eigen::Index nv = n_jet_ + n_value_;
  const Eigen::Index cols = nv + (channels - 1) * n_jet_;
  const Eigen::Index nj = n_jet_;
  const std::size_t layers = net.layer_count();

  inputs_.resize(layers);
  pre_.resize(layers);
  act_.resize(layers);
  masks_.assign(layers, Eigen::MatrixXd());

  const InputScaling& s = net.scaling();
  Eigen::MatrixXd& a0 = inputs_[0];
  a0.setZero(2, cols);
  for (Eigen::Index i = 0; i < nj; ++i) {
    a0(0, i) = s.x(jet_points[static_cast<std::size_t>(i)].first);
    a0(1, i) = s.t(jet_points[static_cast<std::size_t>(i)].second);
  }
  for (Eigen::Index i = 0; i < n_value_; ++i) {
    a0(0, nj + i) = s.x(value_points[static_cast<std::size_t>(i)].first);
    a0(1, nj + i) = s.t(value_points[static_cast<std::size_t>(i)].second);
  }
  if (channels > 1) {
    a0.block(0, nv + (kChGx - 1) * nj, 1, nj).setConstant(s.x_scale);
    a0.block(1, nv + (kChGt - 1) * nj, 1, nj).setConstant(s.t_scale);
  }

  const bool dropout = training && net.dropout_rate() > 0.0;
  CounterRng rng(CounterRng::derive(dropout_seed, 0xd0));
  const double keep = 1.0 - net.dropout_rate();

  Eigen::MatrixXd next;
  for (std::size_t l = 0; l < layers; ++l) {
    const Eigen::MatrixXd& a = inputs_[l];
    Eigen::MatrixXd& z = pre_[l];
    z.noalias() = net.weight(l) * a;
    z.leftCols(nv).colwise() += net.bias(l);
    const bool last = l + 1 == layers;
    if (net.activation(l) == Activation::kIdentity) {
      if (!last) inputs_[l + 1] = z;
      continue;
    }
    Eigen::MatrixXd& out = inputs_[l + 1];
    out.resize(z.rows(), cols);
    act_[l] = batch_tanh(z.leftCols(nv).array());
    out.leftCols(nv) = act_[l].matrix();
    if (channels > 1) {
      const auto sj = act_[l].leftCols(nj);
      const Eigen::ArrayXXd d1 = 1.0 - sj.square();
      const Eigen::ArrayXXd d2 = -2.0 * sj * d1;
      auto zc = [&](int c) { return z.middleCols(nv + (c - 1) * nj, nj).array(); };
      auto oc = [&](int c) { return out.middleCols(nv + (c - 1) * nj, nj).array(); };
      oc(kChGx) = d1 * zc(kChGx);
      oc(kChGt) = d1 * zc(kChGt);
      oc(kChHxx) = d2 * zc(kChGx).square() + d1 * zc(kChHxx);
      if (channels > 4) {
        oc(kChHxt) = d2 * zc(kChGx) * zc(kChGt) + d1 * zc(kChHxt);
        oc(kChHtt) = d2 * zc(kChGt).square() + d1 * zc(kChHtt);
      }
    }
    if (dropout) {
      Eigen::MatrixXd& m = masks_[l];
      m.resize(z.rows(), nv);
      for (Eigen::Index j = 0; j < nv; ++j) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = rng.uniform() < keep ? 1.0 / keep : 0.0;
      }
      out.leftCols(nv).array() *= m.array();
      for (int c = 1; c < channels; ++c) out.middleCols(nv + (c - 1) * nj, nj).array() *= m.leftCols(nj).array();
    }
  }

  const Eigen::MatrixXd& u = pre_[layers - 1];
  outputs_.jets.assign(static_cast<std::size_t>(nj), Jet2{});
  outputs_.values.resize(static_cast<std::size_t>(n_value_));
  for (Eigen::Index i = 0; i < nj; ++i) {
    Jet2& j = outputs_.jets[static_cast<std::size_t>(i)];
    j.v = u(0, i);
    if (channels > 1) {
      j.gx = u(0, nv + (kChGx - 1) * nj + i);
      j.gt = u(0, nv + (kChGt - 1) * nj + i);
      j.hxx = u(0, nv + (kChHxx - 1) * nj + i);
    }
    if (channels > 4) {
      j.hxt = u(0, nv + (kChHxt - 1) * nj + i);
      j.htt = u(0, nv + (kChHtt - 1) * nj + i);
    }
  }
  for (Eigen::Index i = 0; i < n_value_; ++i) outputs_.values[static_cast<std::size_t>(i)] = u(0, nj + i);
  for (const Jet2& j : outputs_.jets) {
    if (!j.is_finite()) throw OverflowError("BatchEvaluator: non-finite network output");
  }
  for (double v : outputs_.values) {
    if (!std::isfinite(v)) throw OverflowError("BatchEvaluator: non-finite network output");
  }
  return outputs_;
}

// Maps the adjoint of a tanh layer's output (all channels) to the adjoint of
// its pre-activation, in place.
void BatchEvaluator::activation_backward(std::size_t layer, Eigen::MatrixXd& bar) const {
  const int channels = channel_count(order_);
  const Eigen::Index nj = n_jet_;
  const Eigen::Index nv = n_jet_ + n_value_;
  const Eigen::MatrixXd& z = pre_[layer];

  if (masks_[layer].size() > 0) {
    const Eigen::MatrixXd& m = masks_[layer];
    bar.leftCols(nv).array() *= m.array();
    for (int c = 1; c < channels; ++c) bar.middleCols(nv + (c - 1) * nj, nj).array() *= m.leftCols(nj).array();
  }

  const Eigen::ArrayXXd& s = act_[layer];
  const Eigen::ArrayXXd d1 = 1.0 - s.square();
  if (channels == 1) {
    bar.leftCols(nv).array() *= d1;
    return;
  }
  // Plain value points.
  bar.middleCols(nj, n_value_).array() *= d1.rightCols(n_value_);

  const auto sj = s.leftCols(nj);
  const auto d1j = d1.leftCols(nj);
  const Eigen::ArrayXXd d2 = -2.0 * sj * d1j;
  const Eigen::ArrayXXd d3 = -2.0 * d1j.square() - 2.0 * sj * d2;
  auto zc = [&](int c) { return z.middleCols(nv + (c - 1) * nj, nj).array(); };
  auto bc = [&](int c) { return bar.middleCols(nv + (c - 1) * nj, nj).array(); };

  Eigen::ArrayXXd bar_d1 = bc(kChGx) * zc(kChGx) + bc(kChGt) * zc(kChGt) + bc(kChHxx) * zc(kChHxx);
  Eigen::ArrayXXd bar_d2 = bc(kChHxx) * zc(kChGx).square();
  Eigen::ArrayXXd bar_gx = bc(kChGx) * d1j + 2.0 * bc(kChHxx) * d2 * zc(kChGx);
  Eigen::ArrayXXd bar_gt = bc(kChGt) * d1j;
  if (channels > 4) {
    bar_d1 += bc(kChHxt) * zc(kChHxt) + bc(kChHtt) * zc(kChHtt);
    bar_d2 += bc(kChHxt) * zc(kChGx) * zc(kChGt) + bc(kChHtt) * zc(kChGt).square();
    bar_gx += bc(kChHxt) * d2 * zc(kChGt);
    bar_gt += 2.0 * bc(kChHtt) * d2 * zc(kChGt) + bc(kChHxt) * d2 * zc(kChGx);
    bc(kChHxt) *= d1j;
    bc(kChHtt) *= d1j;
  }
  bc(kChHxx) *= d1j;
  bc(kChGx) = bar_gx;
  bc(kChGt) = bar_gt;
  bar.leftCols(nj).array() = bar.leftCols(nj).array() * d1j + bar_d1 * d2 + bar_d2 * d3;
}

std::vector<double> BatchEvaluator::backward(const Adjoints& adj) const {
  if (net_ == nullptr) throw ContractViolation("BatchEvaluator::backward before forward");
  const Network& net = *net_;
  const int channels = channel_count(order_);
  const Eigen::Index nj = n_jet_;
  const Eigen::Index nv = n_jet_ + n_value_;
  const Eigen::Index cols = nv + (channels - 1) * nj;
  if (static_cast<Eigen::Index>(adj.jets.size()) != nj || static_cast<Eigen::Index>(adj.values.size()) != n_value_) {
    throw ContractViolation("BatchEvaluator::backward: adjoint sizes do not match forward batch");
  }

  Eigen::MatrixXd bar = Eigen::MatrixXd::Zero(1, cols);
  for (Eigen::Index i = 0; i < nj; ++i) {
    const Jet2& a = adj.jets[static_cast<std::size_t>(i)];
    bar(0, i) = a.v;
    if (channels > 1) {
      bar(0, nv + (kChGx - 1) * nj + i) = a.gx;
      bar(0, nv + (kChGt - 1) * nj + i) = a.gt;
      bar(0, nv + (kChHxx - 1) * nj + i) = a.hxx;
    }
    if (channels > 4) {
      bar(0, nv + (kChHxt - 1) * nj + i) = a.hxt;
      bar(0, nv + (kChHtt - 1) * nj + i) = a.htt;
    }
  }
  for (Eigen::Index i = 0; i < n_value_; ++i) bar(0, nj + i) = adj.values[static_cast<std::size_t>(i)];

  const std::size_t layers = net.layer_count();
  std::vector<Eigen::MatrixXd> grad_w(layers);
  std::vector<Eigen::VectorXd> grad_b(layers);
  for (std::size_t l = layers; l-- > 0;) {
    if (l + 1 < layers && net.activation(l) == Activation::kTanh) activation_backward(l, bar);
    grad_w[l].noalias() = bar * inputs_[l].transpose();
    grad_b[l] = bar.leftCols(nv).rowwise().sum();
    if (l > 0) {
      Eigen::MatrixXd below = net.weight(l).transpose() * bar;
      bar = std::move(below);
    }
  }

  std::vector<double> grad;
  grad.reserve(net.theta_count());
  for (std::size_t l = 0; l < layers; ++l) {
    const auto& g = grad_w[l];
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
      for (Eigen::Index j = 0; j < g.cols(); ++j) grad.push_back(g(i, j));
    }
    for (Eigen::Index i = 0; i < grad_b[l].size(); ++i) grad.push_back(grad_b[l](i));
  }
  return grad;
}

std::vector<double> evaluate_points(const Network& net, std::span<const std::pair<double, double>> points) {
  BatchEvaluator eval;
  return eval.forward(net, {}, points, JetOrder::kValue).values;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

constexpr const char* kMagic = "almpinn-checkpoint";

const char* activation_name(Activation a) { return a == Activation::kTanh ? "tanh" : "identity"; }

[[noreturn]] void corrupt(const std::string& what) {
  throw CheckpointError(CheckpointError::Kind::kCorrupt, "checkpoint corrupt: " + what);
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::string word() {
    std::string w;
    if (!(in_ >> w)) corrupt("unexpected end of file");
    return w;
  }

  void expect(const std::string& keyword) {
    const std::string w = word();
    if (w != keyword) corrupt("expected '" + keyword + "', found '" + w + "'");
  }

  double real() {
    const std::string w = word();
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
    if (ec != std::errc() || ptr != w.data() + w.size()) corrupt("bad number '" + w + "'");
    return v;
  }

  std::int64_t integer() {
    const std::string w = word();
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
    if (ec != std::errc() || ptr != w.data() + w.size()) corrupt("bad integer '" + w + "'");
    return v;
  }

  std::size_t count(std::size_t limit = 1u << 26) {
    const std::int64_t v = integer();
    if (v < 0 || static_cast<std::uint64_t>(v) > limit) corrupt("implausible count");
    return static_cast<std::size_t>(v);
  }

 private:
  std::istream& in_;
};

}  // namespace

void save_checkpoint(const Network& net, const CheckpointMeta& meta, const std::filesystem::path& path) {
  std::ostringstream out;
  out << kMagic << ' ' << kCheckpointVersion << '\n';
  out << "problem " << (meta.problem_id.empty() ? "-" : meta.problem_id) << '\n';
  out << "iteration " << meta.iteration << '\n';
  out << "layers " << net.layer_sizes().size();
  for (int w : net.layer_sizes()) out << ' ' << w;
  out << '\n';
  out << "activations " << net.layer_count();
  for (std::size_t l = 0; l < net.layer_count(); ++l) out << ' ' << activation_name(net.activation(l));
  out << '\n';
  const InputScaling& s = net.scaling();
  out << "scaling " << format_double(s.x_scale) << ' ' << format_double(s.x_shift) << ' '
      << format_double(s.t_scale) << ' ' << format_double(s.t_shift) << '\n';
  out << "dropout " << format_double(net.dropout_rate()) << '\n';
  out << "coeffs " << net.coeffs().size();
  for (double c : net.coeffs()) out << ' ' << format_double(c);
  out << '\n';
  out << "history " << meta.loss_history_tail.size();
  for (double h : meta.loss_history_tail) out << ' ' << format_double(h);
  out << '\n';
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const auto& w = net.weight(l);
    out << "weights " << l << ' ' << w.rows() << ' ' << w.cols() << '\n';
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) out << (j ? " " : "") << format_double(w(i, j));
      out << '\n';
    }
    const auto& b = net.bias(l);
    out << "bias " << l << ' ' << b.size() << '\n';
    for (Eigen::Index i = 0; i < b.size(); ++i) out << (i ? " " : "") << format_double(b(i));
    out << '\n';
  }
  out << "end\n";

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw CheckpointError(CheckpointError::Kind::kIo, "cannot write checkpoint " + path.string());
  file << out.str();
  if (!file) throw CheckpointError(CheckpointError::Kind::kIo, "failed writing checkpoint " + path.string());
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path,
                                 const std::optional<std::vector<int>>& expected_layer_sizes) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw CheckpointError(CheckpointError::Kind::kIo, "cannot read checkpoint " + path.string());
  Reader r(file);

  if (r.word() != kMagic) corrupt("missing header");
  const std::int64_t version = r.integer();
  if (version != kCheckpointVersion) {
    throw CheckpointError(CheckpointError::Kind::kVersionMismatch,
                          "checkpoint version " + std::to_string(version) + " is not supported (expected " +
                              std::to_string(kCheckpointVersion) + ")");
  }

  LoadedCheckpoint out;
  r.expect("problem");
  out.meta.problem_id = r.word();
  if (out.meta.problem_id == "-") out.meta.problem_id.clear();
  r.expect("iteration");
  out.meta.iteration = r.integer();

  r.expect("layers");
  std::vector<int> sizes(r.count(1024));
  for (int& w : sizes) w = static_cast<int>(r.count(1u << 20));
  if (expected_layer_sizes && *expected_layer_sizes != sizes) {
    std::string got;
    for (int w : sizes) got += " " + std::to_string(w);
    throw CheckpointError(CheckpointError::Kind::kDimensionMismatch,
                          "checkpoint layer sizes [" + got + " ] do not match the configured architecture");
  }
  Network net;
  try {
    net = Network(sizes, InputScaling::identity());
  } catch (const InvalidArgument& e) {
    throw CheckpointError(CheckpointError::Kind::kDimensionMismatch, e.what());
  }

  r.expect("activations");
  if (r.count(1024) != net.layer_count()) {
    throw CheckpointError(CheckpointError::Kind::kDimensionMismatch, "activation count mismatch");
  }
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const std::string a = r.word();
    if (a == "tanh") {
      net.set_activation(l, Activation::kTanh);
    } else if (a == "identity") {
      net.set_activation(l, Activation::kIdentity);
    } else {
      corrupt("unknown activation '" + a + "'");
    }
  }

  r.expect("scaling");
  InputScaling s;
  s.x_scale = r.real();
  s.x_shift = r.real();
  s.t_scale = r.real();
  s.t_shift = r.real();
  net.set_scaling(s);

  r.expect("dropout");
  const double rate = r.real();
  if (!(rate >= 0.0 && rate < 1.0)) corrupt("dropout rate out of range");
  net.set_dropout_rate(rate);

  r.expect("coeffs");
  std::vector<double> coeffs(r.count(1024));
  for (double& c : coeffs) c = r.real();
  net.set_coeffs(std::move(coeffs));

  r.expect("history");
  out.meta.loss_history_tail.resize(r.count());
  for (double& h : out.meta.loss_history_tail) h = r.real();

  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    auto& w = net.weight(l);
    r.expect("weights");
    const auto idx = r.count();
    const auto rows = static_cast<Eigen::Index>(r.count());
    const auto cols = static_cast<Eigen::Index>(r.count());
    if (idx != l || rows != w.rows() || cols != w.cols()) {
      throw CheckpointError(CheckpointError::Kind::kDimensionMismatch, "weight block shape mismatch");
    }
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) w(i, j) = r.real();
    }
    auto& b = net.bias(l);
    r.expect("bias");
    const auto bidx = r.count();
    const auto n = static_cast<Eigen::Index>(r.count());
    if (bidx != l || n != b.size()) {
      throw CheckpointError(CheckpointError::Kind::kDimensionMismatch, "bias block shape mismatch");
    }
    for (Eigen::Index i = 0; i < n; ++i) b(i) = r.real();
  }
  r.expect("end");
  out.net = std::move(net);
  return out;
}

}  // namespace almpinn
