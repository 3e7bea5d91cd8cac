#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ceapg {

// Reverse-mode automatic differentiation over scalars. A Tape records every
// arithmetic operation of one computation (e.g. a full policy rollout) as an
// append-only node list in topological order; backward() replays it once in
// reverse to produce the adjoint of every node with respect to one scalar
// output. Local partial derivatives are cached at construction time, so the
// reverse sweep needs no dispatch on the operation kind.
//
// A Tape is confined to a single thread. Tapes in different workers never
// share state.

using VarId = std::int32_t;

enum class OpKind : std::uint8_t {
  kLeaf,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kNeg,
  kSin,
  kCos,
  kTanh,
  kSigmoid,
  kRelu,
  kSquare,
  kSqrt,
  kMin,
  kMax,
  kClamp,
  kAddConst,
  kSubFromConst,
  kMulConst,
  kDivByConst,
  kConstDiv,
  kWrapAngle,
};

const char* op_name(OpKind op);

class TapeError : public std::runtime_error {
 public:
  TapeError(const std::string& what, VarId node)
      : std::runtime_error(what + " (node " + std::to_string(node) + ")"),
        node_(node) {}
  VarId node() const { return node_; }

 private:
  VarId node_;
};

struct TapeNode {
  double value;
  double dl;  // d value / d lhs
  double dr;  // d value / d rhs
  VarId lhs;
  VarId rhs;
  OpKind op;
};
static_assert(sizeof(TapeNode) <= 40);

// Adjoints of every node of one tape with respect to one scalar output.
// The output's own adjoint is exactly 1; nodes the output does not depend
// on keep adjoint 0.
class GradientMap {
 public:
  GradientMap() = default;
  explicit GradientMap(std::vector<double> adjoints)
      : adjoints_(std::move(adjoints)) {}

  double at(VarId id) const { return adjoints_[static_cast<std::size_t>(id)]; }
  std::size_t size() const { return adjoints_.size(); }
  const std::vector<double>& adjoints() const { return adjoints_; }

 private:
  std::vector<double> adjoints_;
};

class Tape;

// Value handle: tape pointer, node id, and the cached primal. Cheap to copy;
// valid only for the tape that issued it.
struct Var {
  Tape* tape = nullptr;
  VarId id = -1;
  double v = 0.0;
};

class Tape {
 public:
  Var leaf(double value);

  // Appends one node. Throws TapeError if the primal is non-finite.
  VarId push(OpKind op, double value, VarId lhs, double dl, VarId rhs, double dr);

  GradientMap backward(VarId output) const;
  // In-place variant for hot loops; resizes and zero-fills `adjoints`.
  void backward_into(VarId output, std::vector<double>& adjoints) const;

  double value(VarId id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  void clear() { nodes_.clear(); }  // keeps capacity
  void reserve(std::size_t n) { nodes_.reserve(n); }

 private:
  std::vector<TapeNode> nodes_;
};

namespace detail {

inline Var unary(Tape& t, OpKind op, const Var& x, double value, double dx) {
  return Var{&t, t.push(op, value, x.id, dx, x.id, 0.0), value};
}

inline Var binary(Tape& t, OpKind op, const Var& a, const Var& b, double value,
                  double da, double db) {
  assert(a.tape == b.tape);
  return Var{&t, t.push(op, value, a.id, da, b.id, db), value};
}

}  // namespace detail

// ---- plain double versions -------------------------------------------------
// These fix the kink and stability conventions in one place; the Var overloads
// below must agree with them exactly so taped and untaped rollouts produce
// bit-identical primal values.

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double relu(double x) { return x > 0.0 ? x : 0.0; }
inline double square(double x) { return x * x; }

// Ties go to the first argument.
inline double min2(double a, double b) { return a <= b ? a : b; }
inline double max2(double a, double b) { return a >= b ? a : b; }

inline double clamp2(double x, double lo, double hi) {
  return x < lo ? lo : (x > hi ? hi : x);
}

// Maps an angle to (-pi, pi].
inline double wrap_angle(double x) {
  const double two_pi = 6.283185307179586476925286766559;
  double r = std::fmod(x + 3.14159265358979323846, two_pi);
  if (r <= 0.0) r += two_pi;
  return r - 3.14159265358979323846;
}

// ---- taped operations ------------------------------------------------------

inline Var operator+(const Var& a, const Var& b) {
  return detail::binary(*a.tape, OpKind::kAdd, a, b, a.v + b.v, 1.0, 1.0);
}
inline Var operator-(const Var& a, const Var& b) {
  return detail::binary(*a.tape, OpKind::kSub, a, b, a.v - b.v, 1.0, -1.0);
}
inline Var operator*(const Var& a, const Var& b) {
  return detail::binary(*a.tape, OpKind::kMul, a, b, a.v * b.v, b.v, a.v);
}
inline Var operator/(const Var& a, const Var& b) {
  if (b.v == 0.0) throw TapeError("division by zero", b.id);
  return detail::binary(*a.tape, OpKind::kDiv, a, b, a.v / b.v, 1.0 / b.v,
                        -a.v / (b.v * b.v));
}
inline Var operator-(const Var& x) {
  return detail::unary(*x.tape, OpKind::kNeg, x, -x.v, -1.0);
}

inline Var operator+(const Var& a, double c) {
  return detail::unary(*a.tape, OpKind::kAddConst, a, a.v + c, 1.0);
}
inline Var operator+(double c, const Var& a) { return a + c; }
inline Var operator-(const Var& a, double c) {
  return detail::unary(*a.tape, OpKind::kAddConst, a, a.v - c, 1.0);
}
inline Var operator-(double c, const Var& a) {
  return detail::unary(*a.tape, OpKind::kSubFromConst, a, c - a.v, -1.0);
}
inline Var operator*(const Var& a, double c) {
  return detail::unary(*a.tape, OpKind::kMulConst, a, a.v * c, c);
}
inline Var operator*(double c, const Var& a) { return a * c; }
inline Var operator/(const Var& a, double c) {
  if (c == 0.0) throw TapeError("division by zero constant", a.id);
  return detail::unary(*a.tape, OpKind::kDivByConst, a, a.v / c, 1.0 / c);
}
inline Var operator/(double c, const Var& a) {
  if (a.v == 0.0) throw TapeError("division by zero", a.id);
  return detail::unary(*a.tape, OpKind::kConstDiv, a, c / a.v, -c / (a.v * a.v));
}

inline Var sin(const Var& x) {
  return detail::unary(*x.tape, OpKind::kSin, x, std::sin(x.v), std::cos(x.v));
}
inline Var cos(const Var& x) {
  return detail::unary(*x.tape, OpKind::kCos, x, std::cos(x.v), -std::sin(x.v));
}
inline Var tanh(const Var& x) {
  const double t = std::tanh(x.v);
  return detail::unary(*x.tape, OpKind::kTanh, x, t, 1.0 - t * t);
}
inline Var sigmoid(const Var& x) {
  const double s = sigmoid(x.v);
  return detail::unary(*x.tape, OpKind::kSigmoid, x, s, s * (1.0 - s));
}
inline Var relu(const Var& x) {
  return detail::unary(*x.tape, OpKind::kRelu, x, relu(x.v), x.v > 0.0 ? 1.0 : 0.0);
}
inline Var square(const Var& x) {
  return detail::unary(*x.tape, OpKind::kSquare, x, x.v * x.v, 2.0 * x.v);
}
inline Var sqrt(const Var& x) {
  if (x.v < 0.0) throw TapeError("sqrt of negative value", x.id);
  const double s = std::sqrt(x.v);
  return detail::unary(*x.tape, OpKind::kSqrt, x, s, 0.5 / s);
}
inline Var min2(const Var& a, const Var& b) {
  const bool first = a.v <= b.v;
  return detail::binary(*a.tape, OpKind::kMin, a, b, first ? a.v : b.v,
                        first ? 1.0 : 0.0, first ? 0.0 : 1.0);
}
inline Var max2(const Var& a, const Var& b) {
  const bool first = a.v >= b.v;
  return detail::binary(*a.tape, OpKind::kMax, a, b, first ? a.v : b.v,
                        first ? 1.0 : 0.0, first ? 0.0 : 1.0);
}
// Bounds are constants. Gradient is 0 outside the open interval (lo, hi),
// including at the boundary.
inline Var clamp2(const Var& x, double lo, double hi) {
  const double v = clamp2(x.v, lo, hi);
  const double dx = (x.v > lo && x.v < hi) ? 1.0 : 0.0;
  return detail::unary(*x.tape, OpKind::kClamp, x, v, dx);
}
// Shift by an exact multiple of 2*pi; the derivative passes through as 1.
inline Var wrap_angle(const Var& x) {
  return detail::unary(*x.tape, OpKind::kWrapAngle, x, wrap_angle(x.v), 1.0);
}

inline double value_of(double x) { return x; }
inline double value_of(const Var& x) { return x.v; }

}  // namespace ceapg
