#pragma once

// Small dense numerics: a cyclic-Jacobi eigensolver and Cholesky for 4x4
// symmetric matrices, a checked inverse, and univariate polynomials with
// Chebyshev interpolation and Sturm-chain root counting.
//
// The eigensolver and polynomial code are templated on the scalar so the
// root-counting path can run in extended precision.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dqcalib/error.hpp"
#include "dqcalib/types.hpp"

namespace dqcalib {

template <class T>
using Matrix4 = Eigen::Matrix<T, 4, 4>;
template <class T>
using Vector4 = Eigen::Matrix<T, 4, 1>;

/// Eigenpairs of a symmetric 4x4 matrix. Eigenvalues ascend; column i of
/// `vectors` belongs to `values[i]` and has its largest-magnitude entry
/// positive.
template <class T>
struct SymmetricEigen4 {
  Vector4<T> values;
  Matrix4<T> vectors;

  Vector4<T> vector(int i) const { return vectors.col(i); }
};

using EigenDecomposition4 = SymmetricEigen4<double>;

namespace detail {

template <class T>
T max_abs(const Matrix4<T>& a) {
  return a.cwiseAbs().maxCoeff();
}

template <class T>
void canonicalize_sign(Eigen::Ref<Vector4<T>> v) {
  int arg = 0;
  for (int i = 1; i < 4; ++i) {
    if (std::abs(v[i]) > std::abs(v[arg])) arg = i;
  }
  if (v[arg] < T(0)) v = -v;
}

}  // namespace detail

inline constexpr int kJacobiMaxSweeps = 64;

/// Cyclic Jacobi diagonalization of a symmetric 4x4 matrix.
///
/// Throws InputError on asymmetry beyond 1e-9 relative or non-finite input,
/// NumericError if the off-diagonal mass has not dropped below
/// 1e-14 * ||A||_F after 64 sweeps.
template <class T>
SymmetricEigen4<T> sym_eig4(const Matrix4<T>& input) {
  using std::abs;
  using std::sqrt;
  if (!input.allFinite()) throw InputError("sym_eig4: non-finite matrix entry");
  const T scale = detail::max_abs(input);
  if (detail::max_abs<T>(input - input.transpose()) > T(1e-9) * scale) {
    throw InputError("sym_eig4: matrix is not symmetric");
  }

  Matrix4<T> a = T(0.5) * (input + input.transpose());
  Matrix4<T> v = Matrix4<T>::Identity();
  const T fro = a.norm();
  const T threshold = T(1e-14) * fro;

  bool converged = fro == T(0);
  for (int sweep = 0; sweep < kJacobiMaxSweeps && !converged; ++sweep) {
    T off = 0;
    for (int p = 0; p < 3; ++p) {
      for (int q = p + 1; q < 4; ++q) off += a(p, q) * a(p, q);
    }
    if (sqrt(T(2) * off) <= threshold) {
      converged = true;
      break;
    }
    for (int p = 0; p < 3; ++p) {
      for (int q = p + 1; q < 4; ++q) {
        const T apq = a(p, q);
        if (apq == T(0)) continue;
        const T theta = (a(q, q) - a(p, p)) / (T(2) * apq);
        const T t = (theta >= T(0) ? T(1) : T(-1)) / (abs(theta) + sqrt(theta * theta + T(1)));
        const T c = T(1) / sqrt(t * t + T(1));
        const T s = t * c;
        for (int k = 0; k < 4; ++k) {
          const T kp = a(k, p);
          const T kq = a(k, q);
          a(k, p) = c * kp - s * kq;
          a(k, q) = s * kp + c * kq;
        }
        for (int k = 0; k < 4; ++k) {
          const T pk = a(p, k);
          const T qk = a(q, k);
          a(p, k) = c * pk - s * qk;
          a(q, k) = s * pk + c * qk;
        }
        a(p, q) = a(q, p) = T(0);
        for (int k = 0; k < 4; ++k) {
          const T kp = v(k, p);
          const T kq = v(k, q);
          v(k, p) = c * kp - s * kq;
          v(k, q) = s * kp + c * kq;
        }
      }
    }
  }
  if (!converged) {
    T off = 0;
    for (int p = 0; p < 3; ++p) {
      for (int q = p + 1; q < 4; ++q) off += a(p, q) * a(p, q);
    }
    if (sqrt(T(2) * off) > threshold) {
      throw NumericError("sym_eig4: Jacobi did not converge in 64 sweeps");
    }
  }

  std::array<int, 4> order{0, 1, 2, 3};
  std::sort(order.begin(), order.end(), [&](int i, int j) { return a(i, i) < a(j, j); });
  SymmetricEigen4<T> out;
  for (int i = 0; i < 4; ++i) {
    out.values[i] = a(order[i], order[i]);
    out.vectors.col(i) = v.col(order[i]);
    detail::canonicalize_sign<T>(out.vectors.col(i));
  }
  return out;
}

/// Upper-triangular U with A = U^T U. Throws DefinitenessError on a
/// non-positive pivot.
inline Mat4 cholesky4(const Mat4& a) {
  Mat4 u = Mat4::Zero();
  for (int i = 0; i < 4; ++i) {
    double d = a(i, i);
    for (int k = 0; k < i; ++k) d -= u(k, i) * u(k, i);
    if (!(d > 0.0)) {
      throw DefinitenessError("cholesky4: matrix is not positive definite (pivot " +
                                  std::to_string(i) + ")",
                              i);
    }
    u(i, i) = std::sqrt(d);
    for (int j = i + 1; j < 4; ++j) {
      double s = a(i, j);
      for (int k = 0; k < i; ++k) s -= u(k, i) * u(k, j);
      u(i, j) = s / u(i, i);
    }
  }
  return u;
}

inline constexpr double kMaxCondition = 1e12;

struct CheckedInverse {
  Mat4 inverse;
  double condition;
};

/// Inverse with a condition estimate (eigenvalues for symmetric input,
/// singular values otherwise). Throws RankError above 1e12.
inline CheckedInverse invert4(const Mat4& a) {
  if (!a.allFinite()) throw InputError("invert4: non-finite matrix entry");
  const double scale = detail::max_abs<double>(a);
  if (scale == 0.0) throw RankError("invert4: zero matrix", std::numeric_limits<double>::infinity());

  if (detail::max_abs<double>(a - a.transpose()) <= 1e-12 * scale) {
    const auto eig = sym_eig4<double>(a);
    const double big = eig.values.cwiseAbs().maxCoeff();
    const double small = eig.values.cwiseAbs().minCoeff();
    const double cond = small > 0.0 ? big / small : std::numeric_limits<double>::infinity();
    if (!(cond <= kMaxCondition)) {
      throw RankError("invert4: matrix is singular or ill-conditioned (condition " +
                          std::to_string(cond) + ")",
                      cond);
    }
    Mat4 inv = eig.vectors * eig.values.cwiseInverse().asDiagonal() * eig.vectors.transpose();
    return {0.5 * (inv + inv.transpose()), cond};
  }

  Eigen::JacobiSVD<Mat4> svd(a);
  const auto& sv = svd.singularValues();
  const double cond = sv[3] > 0.0 ? sv[0] / sv[3] : std::numeric_limits<double>::infinity();
  if (!(cond <= kMaxCondition)) {
    throw RankError("invert4: matrix is singular or ill-conditioned (condition " +
                        std::to_string(cond) + ")",
                    cond);
  }
  return {a.inverse(), cond};
}

// ---------------------------------------------------------------------------
// Polynomials

/// Real polynomial with ascending coefficients: c[0] + c[1] x + ...
template <class T>
struct Poly {
  std::vector<T> c;

  Poly() = default;
  explicit Poly(std::vector<T> coeffs) : c(std::move(coeffs)) {}

  int degree() const { return static_cast<int>(c.size()) - 1; }
  bool is_zero() const {
    return std::all_of(c.begin(), c.end(), [](T v) { return v == T(0); });
  }
  T leading() const { return c.empty() ? T(0) : c.back(); }

  T operator()(T x) const {
    T acc = 0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
    return acc;
  }

  Poly derivative() const {
    if (c.size() <= 1) return Poly({T(0)});
    std::vector<T> d(c.size() - 1);
    for (std::size_t i = 1; i < c.size(); ++i) d[i - 1] = T(i) * c[i];
    return Poly(std::move(d));
  }

  T max_abs_coeff() const {
    T m = 0;
    for (T v : c) m = std::max(m, static_cast<T>(std::abs(v)));
    return m;
  }

  /// Drops leading coefficients at or below rel * max|c|.
  Poly trimmed(T rel = T(1e-13)) const {
    Poly out = *this;
    const T cut = rel * max_abs_coeff();
    while (out.c.size() > 1 && std::abs(out.c.back()) <= cut) out.c.pop_back();
    if (out.c.empty()) out.c.push_back(T(0));
    return out;
  }
};

template <class T>
Poly<T> operator*(const Poly<T>& a, const Poly<T>& b) {
  std::vector<T> out(a.c.size() + b.c.size() - 1, T(0));
  for (std::size_t i = 0; i < a.c.size(); ++i) {
    for (std::size_t j = 0; j < b.c.size(); ++j) out[i + j] += a.c[i] * b.c[j];
  }
  return Poly<T>(std::move(out));
}

template <class T>
Poly<T> operator+(const Poly<T>& a, const Poly<T>& b) {
  std::vector<T> out(std::max(a.c.size(), b.c.size()), T(0));
  for (std::size_t i = 0; i < a.c.size(); ++i) out[i] += a.c[i];
  for (std::size_t i = 0; i < b.c.size(); ++i) out[i] += b.c[i];
  return Poly<T>(std::move(out));
}

template <class T>
Poly<T> from_roots(const std::vector<T>& roots, T lead = T(1)) {
  Poly<T> p({lead});
  for (T r : roots) p = p * Poly<T>({-r, T(1)});
  return p;
}

/// Remainder of a / b. Coefficients at or below rel_zero * max|a| are
/// flushed to zero and the result is trimmed.
template <class T>
Poly<T> remainder(const Poly<T>& a, const Poly<T>& b, T rel_zero) {
  const int db = b.degree();
  std::vector<T> r = a.c;
  const T lead = b.c.back();
  for (int k = a.degree(); k >= db; --k) {
    const T f = r[k] / lead;
    for (int j = 0; j <= db; ++j) r[k - db + j] -= f * b.c[j];
    r[k] = T(0);
  }
  r.resize(std::max(db, 1));
  const T cut = rel_zero * a.max_abs_coeff();
  for (T& v : r) {
    if (std::abs(v) <= cut) v = T(0);
  }
  while (r.size() > 1 && r.back() == T(0)) r.pop_back();
  return Poly<T>(std::move(r));
}

/// Exact-degree interpolation of `f` through degree+1 Chebyshev nodes on
/// [lo, hi], returned in the monomial basis of x.
///
/// The fit is validated at three held-out points; a relative residual above
/// 1e-6 raises NumericError.
template <class T>
Poly<T> fit_polynomial(const std::function<T(T)>& f, int degree, T lo = T(-1), T hi = T(1)) {
  if (degree < 0 || degree > 8) throw InputError("fit_polynomial: degree must be in [0, 8]");
  if (!(hi > lo)) throw InputError("fit_polynomial: empty interval");
  const int n = degree + 1;
  const T mid = T(0.5) * (lo + hi);
  const T half = T(0.5) * (hi - lo);
  const T pi = std::numbers::pi_v<T>;

  using MatX = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
  using VecX = Eigen::Matrix<T, Eigen::Dynamic, 1>;
  MatX vander(n, n);
  VecX rhs(n);
  T fmax = 0;
  for (int k = 0; k < n; ++k) {
    const T t = std::cos(pi * (T(k) + T(0.5)) / T(n));
    T power = 1;
    for (int j = 0; j < n; ++j) {
      vander(k, j) = power;
      power *= t;
    }
    rhs[k] = f(mid + half * t);
    fmax = std::max(fmax, static_cast<T>(std::abs(rhs[k])));
  }
  const VecX a = vander.colPivHouseholderQr().solve(rhs);
  if (!a.allFinite()) throw NumericError("fit_polynomial: interpolation failed");
  const Poly<T> in_t(std::vector<T>(a.data(), a.data() + n));

  // Held-out checks at the Chebyshev extrema interleaved with the nodes.
  T worst = 0;
  for (int j : {1, (n + 1) / 2, n - 1}) {
    if (j <= 0 || j >= n) continue;
    const T t = std::cos(pi * T(j) / T(n));
    const T y = f(mid + half * t);
    fmax = std::max(fmax, static_cast<T>(std::abs(y)));
    worst = std::max(worst, static_cast<T>(std::abs(in_t(t) - y)));
  }
  if (worst > T(1e-6) * std::max(fmax, std::numeric_limits<T>::min())) {
    throw NumericError("fit_polynomial: held-out residual too large");
  }

  // Re-expand sum a_k ((x - mid)/half)^k in powers of x.
  Poly<T> out({T(0)});
  const Poly<T> t_of_x({-mid / half, T(1) / half});
  Poly<T> power({T(1)});
  for (int k = 0; k < n; ++k) {
    out = out + Poly<T>({in_t.c[k]}) * power;
    power = power * t_of_x;
  }
  out.c.resize(n);
  return out;
}

/// Sturm sequence P0 = p, P1 = p', P(k+1) = -rem(P(k-1), P(k)).
///
/// Each element is rescaled to unit max coefficient (signs unchanged).
/// Remainder coefficients below rel_zero of the dividend are treated as
/// zero; a chain ending on a non-constant element means p has repeated
/// roots, and the chain then counts distinct roots.
template <class T>
class SturmChain {
 public:
  explicit SturmChain(const Poly<T>& p, T rel_zero = T(1e-12)) {
    Poly<T> p0 = p.trimmed(std::numeric_limits<T>::epsilon());
    if (p0.degree() < 1) throw InputError("SturmChain: polynomial must be non-constant");
    chain_.push_back(normalized(p0));
    chain_.push_back(normalized(chain_[0].derivative()));
    while (chain_.back().degree() > 0) {
      Poly<T> r = remainder(chain_[chain_.size() - 2], chain_.back(), rel_zero);
      if (r.is_zero()) {
        repeated_ = true;
        break;
      }
      for (T& v : r.c) v = -v;
      chain_.push_back(normalized(r));
    }
  }

  const std::vector<Poly<T>>& sequence() const { return chain_; }
  bool has_repeated_roots() const { return repeated_; }

  int sign_changes(T x) const {
    int changes = 0;
    int last = 0;
    for (const auto& p : chain_) {
      const T v = p(x);
      const int s = v > T(0) ? 1 : (v < T(0) ? -1 : 0);
      if (s == 0) continue;
      if (last != 0 && s != last) ++changes;
      last = s;
    }
    return changes;
  }

  int sign_changes_at_infinity(bool positive) const {
    int changes = 0;
    int last = 0;
    for (const auto& p : chain_) {
      int s = p.leading() > T(0) ? 1 : -1;
      if (!positive && p.degree() % 2 == 1) s = -s;
      if (last != 0 && s != last) ++changes;
      last = s;
    }
    return changes;
  }

  /// Distinct real roots in (a, b). Endpoints that are roots are nudged
  /// outward by 1e-12 of the span.
  int count(T a, T b) const {
    if (!(a < b)) throw InputError("SturmChain::count: need a < b");
    const T nudge = T(1e-12) * (b - a);
    if (chain_[0](a) == T(0)) a -= nudge;
    if (chain_[0](b) == T(0)) b += nudge;
    return sign_changes(a) - sign_changes(b);
  }

  /// Distinct real roots on the whole line.
  int count_real() const { return sign_changes_at_infinity(false) - sign_changes_at_infinity(true); }

 private:
  static Poly<T> normalized(Poly<T> p) {
    const T m = p.max_abs_coeff();
    if (m > T(0)) {
      for (T& v : p.c) v /= m;
    }
    return p;
  }

  std::vector<Poly<T>> chain_;
  bool repeated_ = false;
};

/// Number of distinct real roots of p in (a, b).
template <class T>
int sturm_count(const Poly<T>& p, T a, T b, T rel_zero = T(1e-12)) {
  return SturmChain<T>(p, rel_zero).count(a, b);
}

}  // namespace dqcalib
