#include "almpinn/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "almpinn/error.hpp"

namespace almpinn {
namespace {

constexpr int kV = 0;
constexpr int kGx = 1;
constexpr int kGt = 2;
constexpr int kHxx = 3;
constexpr int kHxt = 4;
constexpr int kHtt = 5;

double& at(JetPartials& p, int out, int in) { return p[out * kJetFields + in]; }

JetPartials identity_partials(double c) {
  JetPartials p{};
  for (int i = 0; i < kJetFields; ++i) at(p, i, i) = c;
  return p;
}

int arity(JetOp op) {
  switch (op) {
    case JetOp::kAdd:
    case JetOp::kSub:
    case JetOp::kMul:
      return 2;
    default:
      return 1;
  }
}

// f(a) through second order, given f', f'', f''' at a.v.
JetOpResult unary(const Jet2& a, double f0, double f1, double f2, double f3) {
  JetOpResult r;
  Jet2& o = r.out;
  o.v = f0;
  o.gx = f1 * a.gx;
  o.gt = f1 * a.gt;
  o.hxx = f2 * a.gx * a.gx + f1 * a.hxx;
  o.hxt = f2 * a.gx * a.gt + f1 * a.hxt;
  o.htt = f2 * a.gt * a.gt + f1 * a.htt;

  JetPartials& p = r.partials[0];
  at(p, kV, kV) = f1;
  at(p, kGx, kV) = f2 * a.gx;
  at(p, kGx, kGx) = f1;
  at(p, kGt, kV) = f2 * a.gt;
  at(p, kGt, kGt) = f1;
  at(p, kHxx, kV) = f3 * a.gx * a.gx + f2 * a.hxx;
  at(p, kHxx, kGx) = 2.0 * f2 * a.gx;
  at(p, kHxx, kHxx) = f1;
  at(p, kHxt, kV) = f3 * a.gx * a.gt + f2 * a.hxt;
  at(p, kHxt, kGx) = f2 * a.gt;
  at(p, kHxt, kGt) = f2 * a.gx;
  at(p, kHxt, kHxt) = f1;
  at(p, kHtt, kV) = f3 * a.gt * a.gt + f2 * a.htt;
  at(p, kHtt, kGt) = 2.0 * f2 * a.gt;
  at(p, kHtt, kHtt) = f1;
  return r;
}

// Partials of a*b with respect to a's fields.
JetPartials product_partials(const Jet2& b) {
  JetPartials p{};
  at(p, kV, kV) = b.v;
  at(p, kGx, kV) = b.gx;
  at(p, kGx, kGx) = b.v;
  at(p, kGt, kV) = b.gt;
  at(p, kGt, kGt) = b.v;
  at(p, kHxx, kV) = b.hxx;
  at(p, kHxx, kGx) = 2.0 * b.gx;
  at(p, kHxx, kHxx) = b.v;
  at(p, kHxt, kV) = b.hxt;
  at(p, kHxt, kGx) = b.gt;
  at(p, kHxt, kGt) = b.gx;
  at(p, kHxt, kHxt) = b.v;
  at(p, kHtt, kV) = b.htt;
  at(p, kHtt, kGt) = 2.0 * b.gt;
  at(p, kHtt, kHtt) = b.v;
  return p;
}

const char* op_name(JetOp op) {
  switch (op) {
    case JetOp::kAdd: return "add";
    case JetOp::kSub: return "sub";
    case JetOp::kMul: return "mul";
    case JetOp::kScale: return "scale";
    case JetOp::kTanh: return "tanh";
    case JetOp::kSquare: return "square";
    case JetOp::kExp: return "exp";
    case JetOp::kLn: return "ln";
    case JetOp::kSin: return "sin";
  }
  return "?";
}

Jet2 apply_values(JetOp op, std::initializer_list<Jet2> operands, double scale = 1.0) {
  return jet_apply(op, std::span<const Jet2>(operands.begin(), operands.size()), scale).out;
}

Var record(JetOp op, std::initializer_list<Var> operands, double scale = 1.0) {
  Tape* tape = operands.begin()->tape();
  return tape->apply(op, std::span<const Var>(operands.begin(), operands.size()), scale);
}

}  // namespace

double Jet2::operator[](Field f) const {
  switch (f) {
    case Field::kValue: return v;
    case Field::kGx: return gx;
    case Field::kGt: return gt;
    case Field::kHxx: return hxx;
    case Field::kHxt: return hxt;
    case Field::kHtt: return htt;
  }
  return v;
}

double& Jet2::operator[](Field f) {
  switch (f) {
    case Field::kValue: return v;
    case Field::kGx: return gx;
    case Field::kGt: return gt;
    case Field::kHxx: return hxx;
    case Field::kHxt: return hxt;
    case Field::kHtt: return htt;
  }
  return v;
}

bool Jet2::is_finite() const {
  return std::isfinite(v) && std::isfinite(gx) && std::isfinite(gt) && std::isfinite(hxx) &&
         std::isfinite(hxt) && std::isfinite(htt);
}

std::pair<Jet2, Jet2> seed_input(double x, double t) {
  if (!std::isfinite(x) || !std::isfinite(t)) {
    throw InvalidArgument("seed_input: non-finite input");
  }
  return {Jet2{x, 1.0, 0.0, 0.0, 0.0, 0.0}, Jet2{t, 0.0, 1.0, 0.0, 0.0, 0.0}};
}

JetOpResult jet_apply(JetOp op, std::span<const Jet2> operands, double scale) {
  if (static_cast<int>(operands.size()) != arity(op)) {
    throw ContractViolation(std::string("jet_apply: wrong operand count for ") + op_name(op));
  }
  const Jet2& a = operands[0];
  JetOpResult r;
  switch (op) {
    case JetOp::kAdd:
    case JetOp::kSub: {
      const Jet2& b = operands[1];
      const double s = op == JetOp::kAdd ? 1.0 : -1.0;
      r.out = Jet2{a.v + s * b.v,     a.gx + s * b.gx,   a.gt + s * b.gt,
                   a.hxx + s * b.hxx, a.hxt + s * b.hxt, a.htt + s * b.htt};
      r.partials[0] = identity_partials(1.0);
      r.partials[1] = identity_partials(s);
      break;
    }
    case JetOp::kMul: {
      const Jet2& b = operands[1];
      r.out.v = a.v * b.v;
      r.out.gx = a.gx * b.v + a.v * b.gx;
      r.out.gt = a.gt * b.v + a.v * b.gt;
      r.out.hxx = a.hxx * b.v + 2.0 * a.gx * b.gx + a.v * b.hxx;
      r.out.hxt = a.hxt * b.v + a.gx * b.gt + a.gt * b.gx + a.v * b.hxt;
      r.out.htt = a.htt * b.v + 2.0 * a.gt * b.gt + a.v * b.htt;
      r.partials[0] = product_partials(b);
      r.partials[1] = product_partials(a);
      break;
    }
    case JetOp::kScale:
      r.out = Jet2{scale * a.v,   scale * a.gx,  scale * a.gt,
                   scale * a.hxx, scale * a.hxt, scale * a.htt};
      r.partials[0] = identity_partials(scale);
      break;
    case JetOp::kTanh: {
      const double s = std::tanh(a.v);
      const double d1 = 1.0 - s * s;
      const double d2 = -2.0 * s * d1;
      const double d3 = -2.0 * d1 * d1 - 2.0 * s * d2;
      r = unary(a, s, d1, d2, d3);
      break;
    }
    case JetOp::kSquare:
      r = unary(a, a.v * a.v, 2.0 * a.v, 2.0, 0.0);
      break;
    case JetOp::kExp: {
      const double e = std::exp(a.v);
      r = unary(a, e, e, e, e);
      break;
    }
    case JetOp::kLn: {
      if (!(a.v > 0.0)) throw DomainError("jet_apply: ln of non-positive value");
      const double inv = 1.0 / a.v;
      r = unary(a, std::log(a.v), inv, -inv * inv, 2.0 * inv * inv * inv);
      break;
    }
    case JetOp::kSin: {
      const double s = std::sin(a.v);
      const double c = std::cos(a.v);
      r = unary(a, s, c, -s, -c);
      break;
    }
  }
  if (!r.out.is_finite()) {
    throw OverflowError(std::string("jet_apply: non-finite result in ") + op_name(op));
  }
  return r;
}

Var jet_apply(JetOp op, std::span<const Var> operands, Tape& tape, double scale) {
  for (const Var& v : operands) {
    if (v.tape() != &tape) throw ContractViolation("jet_apply: operand recorded on another tape");
  }
  return tape.apply(op, operands, scale);
}

Jet2 operator+(const Jet2& a, const Jet2& b) { return apply_values(JetOp::kAdd, {a, b}); }
Jet2 operator-(const Jet2& a, const Jet2& b) { return apply_values(JetOp::kSub, {a, b}); }
Jet2 operator*(const Jet2& a, const Jet2& b) { return apply_values(JetOp::kMul, {a, b}); }
Jet2 operator*(double c, const Jet2& a) { return apply_values(JetOp::kScale, {a}, c); }
Jet2 operator-(const Jet2& a) { return -1.0 * a; }
Jet2 operator+(const Jet2& a, double c) {
  Jet2 r = a;
  r.v += c;
  return r;
}
Jet2 tanh(const Jet2& a) { return apply_values(JetOp::kTanh, {a}); }
Jet2 square(const Jet2& a) { return apply_values(JetOp::kSquare, {a}); }
Jet2 exp(const Jet2& a) { return apply_values(JetOp::kExp, {a}); }
Jet2 log(const Jet2& a) { return apply_values(JetOp::kLn, {a}); }
Jet2 sin(const Jet2& a) { return apply_values(JetOp::kSin, {a}); }

Jet2 cos(const Jet2& a) {
  const double s = std::sin(a.v);
  const double c = std::cos(a.v);
  return unary(a, c, -s, -c, s).out;
}

Jet2 reciprocal(const Jet2& a) {
  if (a.v == 0.0) throw DomainError("reciprocal of zero");
  const double i = 1.0 / a.v;
  return unary(a, i, -i * i, 2.0 * i * i * i, -6.0 * i * i * i * i).out;
}

const Jet2& Var::jet() const {
  if (tape_ == nullptr) throw ContractViolation("Var: detached handle");
  return tape_->node(index_).value;
}

Var operator+(const Var& a, const Var& b) { return record(JetOp::kAdd, {a, b}); }
Var operator-(const Var& a, const Var& b) { return record(JetOp::kSub, {a, b}); }
Var operator*(const Var& a, const Var& b) { return record(JetOp::kMul, {a, b}); }
Var operator*(double c, const Var& a) { return record(JetOp::kScale, {a}, c); }
Var operator*(const Var& a, double c) { return c * a; }
Var operator+(const Var& a, double c) { return a + a.tape()->constant(c); }
Var operator+(double c, const Var& a) { return a + c; }
Var operator-(const Var& a, double c) { return a + (-c); }
Var operator-(const Var& a) { return -1.0 * a; }
Var tanh(const Var& a) { return record(JetOp::kTanh, {a}); }
Var square(const Var& a) { return record(JetOp::kSquare, {a}); }
Var exp(const Var& a) { return record(JetOp::kExp, {a}); }
Var log(const Var& a) { return record(JetOp::kLn, {a}); }
Var sin(const Var& a) { return record(JetOp::kSin, {a}); }

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::parameter(std::size_t parameter_index, double value) {
  if (!std::isfinite(value)) throw OverflowError("Tape::parameter: non-finite value");
  Node n;
  n.kind = Node::Kind::kParameter;
  n.value = Jet2::constant(value);
  n.parameter = static_cast<std::ptrdiff_t>(parameter_index);
  return push(std::move(n));
}

Var Tape::constant(double value) {
  Node n;
  n.kind = Node::Kind::kConstant;
  n.value = Jet2::constant(value);
  return push(std::move(n));
}

Var Tape::input(const Jet2& seed) {
  Node n;
  n.kind = Node::Kind::kInput;
  n.value = seed;
  n.scalar = false;
  return push(std::move(n));
}

Var Tape::apply(JetOp op, std::span<const Var> operands, double scale) {
  std::array<Jet2, 2> values;
  for (std::size_t i = 0; i < operands.size() && i < 2; ++i) {
    if (operands[i].tape() != this) throw ContractViolation("Tape::apply: foreign operand");
    values[i] = nodes_.at(operands[i].index()).value;
  }
  JetOpResult r = jet_apply(op, std::span<const Jet2>(values.data(), operands.size()), scale);
  Node n;
  n.kind = Node::Kind::kOp;
  n.op = op;
  n.value = r.out;
  n.partials = r.partials;
  n.scalar = true;
  for (std::size_t i = 0; i < operands.size(); ++i) {
    n.operands[i] = static_cast<std::ptrdiff_t>(operands[i].index());
    n.scalar = n.scalar && nodes_[operands[i].index()].scalar;
  }
  return push(std::move(n));
}

Var Tape::field(const Var& a, Field f) {
  if (a.tape() != this) throw ContractViolation("Tape::field: foreign operand");
  Node n;
  n.kind = Node::Kind::kField;
  n.value = Jet2::constant(nodes_.at(a.index()).value[f]);
  n.operands[0] = static_cast<std::ptrdiff_t>(a.index());
  at(n.partials[0], kV, static_cast<int>(f)) = 1.0;
  n.scalar = true;
  return push(std::move(n));
}

GradientVector backward(const Tape& tape, const Var& loss, std::size_t parameter_count) {
  if (loss.tape() != &tape) throw ContractViolation("backward: loss not on this tape");
  const std::size_t root = loss.index();
  if (!tape.node(root).scalar) {
    throw ContractViolation("backward: loss node depends on the seeded inputs");
  }
  GradientVector grad(parameter_count, 0.0);
  std::vector<std::array<double, kJetFields>> adjoint(root + 1, std::array<double, kJetFields>{});
  adjoint[root][kV] = 1.0;
  for (std::size_t k = root + 1; k-- > 0;) {
    const Tape::Node& n = tape.node(k);
    const auto& bar = adjoint[k];
    if (std::all_of(bar.begin(), bar.end(), [](double b) { return b == 0.0; })) continue;
    if (n.kind == Tape::Node::Kind::kParameter) {
      const auto p = static_cast<std::size_t>(n.parameter);
      if (p >= parameter_count) throw ContractViolation("backward: parameter index out of range");
      grad[p] += bar[kV];
      continue;
    }
    for (int slot = 0; slot < 2; ++slot) {
      const std::ptrdiff_t operand = n.operands[slot];
      if (operand < 0) continue;
      auto& target = adjoint[static_cast<std::size_t>(operand)];
      const JetPartials& p = n.partials[slot];
      for (int i = 0; i < kJetFields; ++i) {
        if (bar[i] == 0.0) continue;
        for (int j = 0; j < kJetFields; ++j) target[j] += bar[i] * p[i * kJetFields + j];
      }
    }
  }
  return grad;
}

double grad_check(const GradFunction& f, std::span<const double> theta, double step) {
  std::vector<double> point(theta.begin(), theta.end());
  std::vector<double> analytic;
  f(point, &analytic);
  if (analytic.size() != point.size()) {
    throw ContractViolation("grad_check: gradient length does not match parameter count");
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < point.size(); ++i) {
    const double saved = point[i];
    point[i] = saved + step;
    const double up = f(point, nullptr);
    point[i] = saved - step;
    const double down = f(point, nullptr);
    point[i] = saved;
    const double fd = (up - down) / (2.0 * step);
    worst = std::max(worst, std::abs(analytic[i] - fd) / std::max(1.0, std::abs(fd)));
  }
  return worst;
}

}  // namespace almpinn
