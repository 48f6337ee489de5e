#ifndef HYPERFIT_DUAL_HPP
#define HYPERFIT_DUAL_HPP

#include <array>
#include <cmath>
#include <stdexcept>

namespace hyperfit {

inline double val(double x) { return x; }

// First-order scalar dual. Nested inside the invariant-direction duals to
// carry parameter sensitivities one parameter at a time.
struct D1 {
  double v{0.0};
  double d{0.0};

  D1() = default;
  D1(double value) : v(value) {}
  D1(double value, double deriv) : v(value), d(deriv) {}
};

inline double val(const D1& x) { return x.v; }

inline D1 operator+(const D1& a, const D1& b) { return {a.v + b.v, a.d + b.d}; }
inline D1 operator-(const D1& a, const D1& b) { return {a.v - b.v, a.d - b.d}; }
inline D1 operator-(const D1& a) { return {-a.v, -a.d}; }
inline D1 operator*(const D1& a, const D1& b) {
  return {a.v * b.v, a.d * b.v + a.v * b.d};
}
inline D1 operator/(const D1& a, const D1& b) {
  const double inv = 1.0 / b.v;
  return {a.v * inv, (a.d - a.v * inv * b.d) * inv};
}
inline D1 operator+(const D1& a, double b) { return {a.v + b, a.d}; }
inline D1 operator+(double a, const D1& b) { return b + a; }
inline D1 operator-(const D1& a, double b) { return {a.v - b, a.d}; }
inline D1 operator-(double a, const D1& b) { return {a - b.v, -b.d}; }
inline D1 operator*(const D1& a, double b) { return {a.v * b, a.d * b}; }
inline D1 operator*(double a, const D1& b) { return b * a; }
inline D1 operator/(const D1& a, double b) { return {a.v / b, a.d / b}; }
inline D1 operator/(double a, const D1& b) {
  const double inv = 1.0 / b.v;
  return {a * inv, -a * inv * inv * b.d};
}

inline D1 exp(const D1& x) {
  const double e = std::exp(x.v);
  return {e, e * x.d};
}
inline D1 log(const D1& x) {
  if (x.v <= 0.0) throw std::domain_error("log of non-positive value");
  return {std::log(x.v), x.d / x.v};
}
inline D1 log1p(const D1& x) { return {std::log1p(x.v), x.d / (1.0 + x.v)}; }
inline D1 sqrt(const D1& x) {
  const double s = std::sqrt(x.v);
  return {s, 0.5 * x.d / s};
}
inline D1 pow(const D1& x, double p) {
  const double y = std::pow(x.v, p);
  return {y, p * std::pow(x.v, p - 1.0) * x.d};
}

// ---------------------------------------------------------------------------
// Second-order forward duals in three fixed directions (I1, I2, J).
// hess stores the symmetric upper triangle: (00,01,02,11,12,22).
// ---------------------------------------------------------------------------

inline constexpr int hess_index(int i, int j) {
  if (i > j) std::swap(i, j);
  constexpr int row_start[3] = {0, 3, 5};
  return row_start[i] + j - i;
}

template <class T>
struct Dual2 {
  T v{};
  std::array<T, 3> g{};
  std::array<T, 6> h{};

  Dual2() = default;
  Dual2(const T& value) : v(value) {}

  static Dual2 input(const T& value, int direction) {
    Dual2 r(value);
    r.g[direction] = T(1.0);
    return r;
  }
};

using Dual2d = Dual2<double>;

template <class T>
Dual2<T> operator+(const Dual2<T>& a, const Dual2<T>& b) {
  Dual2<T> r(a.v + b.v);
  for (int i = 0; i < 3; ++i) r.g[i] = a.g[i] + b.g[i];
  for (int i = 0; i < 6; ++i) r.h[i] = a.h[i] + b.h[i];
  return r;
}

template <class T>
Dual2<T> operator-(const Dual2<T>& a, const Dual2<T>& b) {
  Dual2<T> r(a.v - b.v);
  for (int i = 0; i < 3; ++i) r.g[i] = a.g[i] - b.g[i];
  for (int i = 0; i < 6; ++i) r.h[i] = a.h[i] - b.h[i];
  return r;
}

template <class T>
Dual2<T> operator-(const Dual2<T>& a) {
  Dual2<T> r(-a.v);
  for (int i = 0; i < 3; ++i) r.g[i] = -a.g[i];
  for (int i = 0; i < 6; ++i) r.h[i] = -a.h[i];
  return r;
}

template <class T>
Dual2<T> operator*(const Dual2<T>& a, const Dual2<T>& b) {
  Dual2<T> r(a.v * b.v);
  for (int i = 0; i < 3; ++i) r.g[i] = a.g[i] * b.v + a.v * b.g[i];
  for (int i = 0; i <= 2; ++i)
    for (int j = i; j <= 2; ++j) {
      const int k = hess_index(i, j);
      r.h[k] = a.h[k] * b.v + a.g[i] * b.g[j] + a.g[j] * b.g[i] + a.v * b.h[k];
    }
  return r;
}

// f(u) with known first/second derivatives at u.v
template <class T>
Dual2<T> chain(const Dual2<T>& u, const T& f, const T& fp, const T& fpp) {
  Dual2<T> r(f);
  for (int i = 0; i < 3; ++i) r.g[i] = fp * u.g[i];
  for (int i = 0; i <= 2; ++i)
    for (int j = i; j <= 2; ++j) {
      const int k = hess_index(i, j);
      r.h[k] = fp * u.h[k] + fpp * u.g[i] * u.g[j];
    }
  return r;
}

template <class T>
Dual2<T> inv(const Dual2<T>& u) {
  if (val(u.v) == 0.0) throw std::domain_error("division by zero");
  const T iv = 1.0 / u.v;
  return chain(u, iv, -iv * iv, 2.0 * iv * iv * iv);
}

template <class T>
Dual2<T> operator/(const Dual2<T>& a, const Dual2<T>& b) {
  return a * inv(b);
}

template <class T>
Dual2<T> operator+(const Dual2<T>& a, const T& b) {
  Dual2<T> r = a;
  r.v = a.v + b;
  return r;
}
template <class T>
Dual2<T> operator+(const T& a, const Dual2<T>& b) { return b + a; }
template <class T>
Dual2<T> operator-(const Dual2<T>& a, const T& b) {
  Dual2<T> r = a;
  r.v = a.v - b;
  return r;
}
template <class T>
Dual2<T> operator-(const T& a, const Dual2<T>& b) { return -b + a; }
template <class T>
Dual2<T> operator*(const Dual2<T>& a, const T& b) {
  Dual2<T> r(a.v * b);
  for (int i = 0; i < 3; ++i) r.g[i] = a.g[i] * b;
  for (int i = 0; i < 6; ++i) r.h[i] = a.h[i] * b;
  return r;
}
template <class T>
Dual2<T> operator*(const T& a, const Dual2<T>& b) { return b * a; }
template <class T>
Dual2<T> operator/(const Dual2<T>& a, const T& b) { return a * (T(1.0) / b); }
template <class T>
Dual2<T> operator/(const T& a, const Dual2<T>& b) { return inv(b) * a; }

// mixed double overloads for T != double
template <class T>
  requires(!std::is_same_v<T, double>)
Dual2<T> operator+(const Dual2<T>& a, double b) { return a + T(b); }
template <class T>
  requires(!std::is_same_v<T, double>)
Dual2<T> operator+(double a, const Dual2<T>& b) { return b + T(a); }
template <class T>
  requires(!std::is_same_v<T, double>)
Dual2<T> operator-(const Dual2<T>& a, double b) { return a - T(b); }
template <class T>
  requires(!std::is_same_v<T, double>)
Dual2<T> operator-(double a, const Dual2<T>& b) { return T(a) - b; }
template <class T>
  requires(!std::is_same_v<T, double>)
Dual2<T> operator*(const Dual2<T>& a, double b) { return a * T(b); }
template <class T>
  requires(!std::is_same_v<T, double>)
Dual2<T> operator*(double a, const Dual2<T>& b) { return b * T(a); }
template <class T>
  requires(!std::is_same_v<T, double>)
Dual2<T> operator/(const Dual2<T>& a, double b) { return a * T(1.0 / b); }
template <class T>
  requires(!std::is_same_v<T, double>)
Dual2<T> operator/(double a, const Dual2<T>& b) { return inv(b) * T(a); }

template <class T>
Dual2<T> exp(const Dual2<T>& u) {
  using std::exp;
  const T e = exp(u.v);
  return chain(u, e, e, e);
}

template <class T>
Dual2<T> log(const Dual2<T>& u) {
  using std::log;
  if (val(u.v) <= 0.0) throw std::domain_error("log of non-positive value");
  const T iv = 1.0 / u.v;
  return chain(u, log(u.v), iv, -iv * iv);
}

template <class T>
Dual2<T> sqrt(const Dual2<T>& u) {
  using std::sqrt;
  const T s = sqrt(u.v);
  const T fp = 0.5 / s;
  return chain(u, s, fp, -0.5 * fp / u.v);
}

template <class T>
Dual2<T> pow(const Dual2<T>& u, double p) {
  using std::pow;
  const T y = pow(u.v, p);
  const T fp = p * y / u.v;
  return chain(u, y, fp, (p - 1.0) * fp / u.v);
}

// Overflow-safe softplus: log(1 + e^x) = x + log1p(e^{-x}) for x > 0.
inline double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline double sigmoid(double x) {
  return x > 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

inline D1 softplus(const D1& x) { return {softplus(x.v), sigmoid(x.v) * x.d}; }

template <class T>
T softplus(const T& x) {
  using std::exp;
  if (val(x) > 0.0) return x + log1p(exp(-x));
  return log1p(exp(x));
}

template <class T>
T sigmoid(const T& x) {
  using std::exp;
  if (val(x) > 0.0) return 1.0 / (1.0 + exp(-x));
  const T e = exp(x);
  return e / (1.0 + e);
}

template <class T>
Dual2<T> softplus(const Dual2<T>& u) {
  const T s = sigmoid(u.v);
  return chain(u, softplus(u.v), s, s * (1.0 - s));
}

// ---------------------------------------------------------------------------
// First-order forward duals in the three invariant directions.  Same algebra
// as Dual2 without the Hessian; used in the training hot path where second
// derivatives are not needed.
// ---------------------------------------------------------------------------

template <class T>
struct Dual1 {
  T v{};
  std::array<T, 3> g{};

  Dual1() = default;
  Dual1(const T& value) : v(value) {}

  static Dual1 input(const T& value, int direction) {
    Dual1 r(value);
    r.g[direction] = T(1.0);
    return r;
  }
};

template <class T>
Dual1<T> operator+(const Dual1<T>& a, const Dual1<T>& b) {
  Dual1<T> r(a.v + b.v);
  for (int i = 0; i < 3; ++i) r.g[i] = a.g[i] + b.g[i];
  return r;
}
template <class T>
Dual1<T> operator-(const Dual1<T>& a, const Dual1<T>& b) {
  Dual1<T> r(a.v - b.v);
  for (int i = 0; i < 3; ++i) r.g[i] = a.g[i] - b.g[i];
  return r;
}
template <class T>
Dual1<T> operator-(const Dual1<T>& a) {
  Dual1<T> r(-a.v);
  for (int i = 0; i < 3; ++i) r.g[i] = -a.g[i];
  return r;
}
template <class T>
Dual1<T> operator*(const Dual1<T>& a, const Dual1<T>& b) {
  Dual1<T> r(a.v * b.v);
  for (int i = 0; i < 3; ++i) r.g[i] = a.g[i] * b.v + a.v * b.g[i];
  return r;
}

template <class T>
Dual1<T> chain(const Dual1<T>& u, const T& f, const T& fp) {
  Dual1<T> r(f);
  for (int i = 0; i < 3; ++i) r.g[i] = fp * u.g[i];
  return r;
}

template <class T>
Dual1<T> operator/(const Dual1<T>& a, const Dual1<T>& b) {
  const T iv = 1.0 / b.v;
  return a * chain(b, iv, -iv * iv);
}

template <class T>
Dual1<T> operator*(const Dual1<T>& a, const T& b) {
  Dual1<T> r(a.v * b);
  for (int i = 0; i < 3; ++i) r.g[i] = a.g[i] * b;
  return r;
}
template <class T>
Dual1<T> operator*(const T& a, const Dual1<T>& b) { return b * a; }
template <class T>
Dual1<T> operator+(const Dual1<T>& a, const T& b) {
  Dual1<T> r = a;
  r.v = a.v + b;
  return r;
}
template <class T>
Dual1<T> operator+(const T& a, const Dual1<T>& b) { return b + a; }
template <class T>
Dual1<T> operator-(const Dual1<T>& a, const T& b) {
  Dual1<T> r = a;
  r.v = a.v - b;
  return r;
}
template <class T>
Dual1<T> operator-(const T& a, const Dual1<T>& b) { return -b + a; }

template <class T>
  requires(!std::is_same_v<T, double>)
Dual1<T> operator*(const Dual1<T>& a, double b) { return a * T(b); }
template <class T>
  requires(!std::is_same_v<T, double>)
Dual1<T> operator*(double a, const Dual1<T>& b) { return b * T(a); }
template <class T>
  requires(!std::is_same_v<T, double>)
Dual1<T> operator+(const Dual1<T>& a, double b) { return a + T(b); }
template <class T>
  requires(!std::is_same_v<T, double>)
Dual1<T> operator-(const Dual1<T>& a, double b) { return a - T(b); }
template <class T>
  requires(!std::is_same_v<T, double>)
Dual1<T> operator-(double a, const Dual1<T>& b) { return T(a) - b; }

template <class T>
Dual1<T> exp(const Dual1<T>& u) {
  using std::exp;
  const T e = exp(u.v);
  return chain(u, e, e);
}
template <class T>
Dual1<T> log(const Dual1<T>& u) {
  using std::log;
  if (val(u.v) <= 0.0) throw std::domain_error("log of non-positive value");
  return chain(u, log(u.v), T(1.0) / u.v);
}
template <class T>
Dual1<T> softplus(const Dual1<T>& u) {
  return chain(u, softplus(u.v), sigmoid(u.v));
}

}  // namespace hyperfit

#endif
