#ifndef HYPERFIT_TAPE_HPP
#define HYPERFIT_TAPE_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "hyperfit/dual.hpp"

namespace hyperfit {

class Tape;

// Scalar handle on a reverse-mode tape.  A Rev with no tape pointer is a
// plain constant; constants fold without recording nodes, so data values and
// dual-number seeds cost nothing.
struct Rev {
  Tape* tape{nullptr};
  int32_t idx{-1};
  double v{0.0};

  Rev() = default;
  Rev(double value) : v(value) {}

  bool is_const() const { return tape == nullptr; }
};

inline double val(const Rev& x) { return x.v; }

class Tape {
 public:
  explicit Tape(std::size_t reserve = 1 << 16) { nodes_.reserve(reserve); }

  Rev leaf(double value) {
    Rev r = node(value, -1, 0.0, -1, 0.0);
    leaves_.push_back(r.idx);
    return r;
  }

  Rev node(double value, int32_t a, double pa, int32_t b, double pb) {
    nodes_.push_back({value, pa, pb, a, b});
    Rev r;
    r.tape = this;
    r.idx = static_cast<int32_t>(nodes_.size()) - 1;
    r.v = value;
    return r;
  }

  std::size_t size() const { return nodes_.size(); }
  std::size_t num_leaves() const { return leaves_.size(); }

  // Single backward sweep; the tape is consumed.
  std::vector<double> gradient(const Rev& output) {
    if (consumed_) throw std::logic_error("tape already consumed");
    consumed_ = true;
    std::vector<double> adj(nodes_.size(), 0.0);
    if (output.tape == this && output.idx >= 0) adj[output.idx] = 1.0;
    for (std::size_t k = nodes_.size(); k-- > 0;) {
      const double a = adj[k];
      if (a == 0.0) continue;
      const Node& n = nodes_[k];
      if (n.a >= 0) adj[n.a] += a * n.pa;
      if (n.b >= 0) adj[n.b] += a * n.pb;
    }
    std::vector<double> g(leaves_.size());
    for (std::size_t i = 0; i < leaves_.size(); ++i) g[i] = adj[leaves_[i]];
    return g;
  }

  // Clears recorded nodes so the arena can be reused for a fresh recording.
  void reset() {
    nodes_.clear();
    leaves_.clear();
    consumed_ = false;
  }

 private:
  struct Node {
    double val;
    double pa, pb;
    int32_t a, b;
  };
  std::vector<Node> nodes_;
  std::vector<int32_t> leaves_;
  bool consumed_ = false;
};

namespace detail {
inline Tape* tape_of(const Rev& a, const Rev& b) {
  if (a.tape && b.tape && a.tape != b.tape)
    throw std::logic_error("mixing variables from different tapes");
  return a.tape ? a.tape : b.tape;
}
}  // namespace detail

inline Rev binary(const Rev& a, const Rev& b, double value, double pa, double pb) {
  Tape* t = detail::tape_of(a, b);
  if (!t) return Rev(value);
  return t->node(value, a.is_const() ? -1 : a.idx, pa,
                 b.is_const() ? -1 : b.idx, pb);
}

inline Rev unary(const Rev& a, double value, double pa) {
  if (a.is_const()) return Rev(value);
  return a.tape->node(value, a.idx, pa, -1, 0.0);
}

inline Rev operator+(const Rev& a, const Rev& b) {
  if (a.is_const() && a.v == 0.0) return b;
  if (b.is_const() && b.v == 0.0) return a;
  return binary(a, b, a.v + b.v, 1.0, 1.0);
}
inline Rev operator-(const Rev& a, const Rev& b) {
  if (b.is_const() && b.v == 0.0) return a;
  return binary(a, b, a.v - b.v, 1.0, -1.0);
}
inline Rev operator-(const Rev& a) { return unary(a, -a.v, -1.0); }
inline Rev operator*(const Rev& a, const Rev& b) {
  if ((a.is_const() && a.v == 0.0) || (b.is_const() && b.v == 0.0))
    return Rev(0.0);
  if (a.is_const() && a.v == 1.0) return b;
  if (b.is_const() && b.v == 1.0) return a;
  return binary(a, b, a.v * b.v, b.v, a.v);
}
inline Rev operator/(const Rev& a, const Rev& b) {
  if (b.v == 0.0) throw std::domain_error("division by zero");
  const double inv = 1.0 / b.v;
  return binary(a, b, a.v * inv, inv, -a.v * inv * inv);
}

inline Rev operator+(const Rev& a, double b) { return a + Rev(b); }
inline Rev operator+(double a, const Rev& b) { return Rev(a) + b; }
inline Rev operator-(const Rev& a, double b) { return a - Rev(b); }
inline Rev operator-(double a, const Rev& b) { return Rev(a) - b; }
inline Rev operator*(const Rev& a, double b) { return a * Rev(b); }
inline Rev operator*(double a, const Rev& b) { return Rev(a) * b; }
inline Rev operator/(const Rev& a, double b) { return a * Rev(1.0 / b); }
inline Rev operator/(double a, const Rev& b) { return Rev(a) / b; }

inline Rev exp(const Rev& a) {
  const double e = std::exp(a.v);
  return unary(a, e, e);
}
inline Rev log(const Rev& a) {
  if (a.v <= 0.0) throw std::domain_error("log of non-positive value");
  return unary(a, std::log(a.v), 1.0 / a.v);
}
inline Rev log1p(const Rev& a) { return unary(a, std::log1p(a.v), 1.0 / (1.0 + a.v)); }
inline Rev sqrt(const Rev& a) {
  const double s = std::sqrt(a.v);
  return unary(a, s, 0.5 / s);
}
inline Rev pow(const Rev& a, double p) {
  return unary(a, std::pow(a.v, p), p * std::pow(a.v, p - 1.0));
}

// clamp with sub-gradient 0 outside the active range
inline Rev clamp01(const Rev& a) {
  if (a.v <= 0.0) return unary(a, 0.0, 0.0);
  if (a.v >= 1.0) return unary(a, 1.0, 0.0);
  return a;
}

inline Rev relu(const Rev& a) { return a.v > 0.0 ? a : unary(a, 0.0, 0.0); }

inline Rev abs(const Rev& a) { return a.v >= 0.0 ? a : -a; }

}  // namespace hyperfit

#endif
