#include "wptrx/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace wptrx {

namespace {

double max_abs(const std::vector<double>& c) {
  double m = 0.0;
  for (double x : c) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

Polynomial::Polynomial(std::initializer_list<double> c) : c_(c) {
  if (c_.empty()) c_ = {0.0};
  trim();
}

Polynomial::Polynomial(std::vector<double> c) : c_(std::move(c)) {
  if (c_.empty()) c_ = {0.0};
  trim();
}

void Polynomial::trim() {
  // Drop leading (highest-order) coefficients that are negligible relative to
  // the largest one. The threshold must stay far below the genuine dynamic
  // range of converter polynomials (~1e-12 relative), hence 1e-14.
  const double tol = 1e-14 * max_abs(c_);
  while (c_.size() > 1 && std::abs(c_.back()) <= tol) c_.pop_back();
}

int Polynomial::degree() const { return static_cast<int>(c_.size()) - 1; }

bool Polynomial::is_zero() const {
  return c_.size() == 1 && c_[0] == 0.0;
}

double Polynomial::operator[](std::size_t k) const {
  return k < c_.size() ? c_[k] : 0.0;
}

std::complex<double> Polynomial::eval(std::complex<double> s) const {
  std::complex<double> acc = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * s + *it;
  return acc;
}

double Polynomial::eval(double s) const {
  double acc = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * s + *it;
  return acc;
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
  if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), 0.0);
  for (std::size_t i = 0; i < o.c_.size(); ++i) c_[i] += o.c_[i];
  trim();
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& o) {
  if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), 0.0);
  for (std::size_t i = 0; i < o.c_.size(); ++i) c_[i] -= o.c_[i];
  trim();
  return *this;
}

Polynomial& Polynomial::operator*=(double k) {
  for (double& x : c_) x *= k;
  trim();
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  std::vector<double> out(a.c_.size() + b.c_.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.c_.size(); ++i)
    for (std::size_t j = 0; j < b.c_.size(); ++j)
      out[i + j] += a.c_[i] * b.c_[j];
  return Polynomial(std::move(out));
}

namespace {

// Backward-error style residual: |p(r)| scaled by the same-magnitude sum.
double root_residual(const Polynomial& p, std::complex<double> r) {
  std::complex<double> val = p.eval(r);
  double scale = 0.0;
  double pw = 1.0;
  const double ar = std::abs(r);
  for (double c : p.coeffs()) {
    scale += std::abs(c) * pw;
    pw *= ar;
  }
  if (scale == 0.0) scale = 1.0;
  return std::abs(val) / scale;
}

std::complex<double> newton_polish(const Polynomial& p, std::complex<double> r) {
  const auto& c = p.coeffs();
  for (int it = 0; it < 3; ++it) {
    std::complex<double> f = 0.0, df = 0.0;
    for (std::size_t k = c.size(); k-- > 0;) {
      df = df * r + f;
      f = f * r + c[k];
    }
    if (std::abs(df) == 0.0) break;
    std::complex<double> step = f / df;
    if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) break;
    r -= step;
  }
  return r;
}

}  // namespace

std::vector<std::complex<double>> poly_roots(const Polynomial& p) {
  if (p.is_zero())
    throw std::invalid_argument("poly_roots: zero polynomial has no root set");
  const int n = p.degree();
  if (n < 1) return {};

  const auto& c = p.coeffs();
  // Radius scaling balances the companion matrix when coefficients span many
  // orders of magnitude (converter denominators reach ~1e12 spread).
  double r0 = 1.0;
  if (c[0] != 0.0)
    r0 = std::pow(std::abs(c[0]) / std::abs(c[n]), 1.0 / n);
  r0 = std::clamp(r0, 1e-12, 1e12);

  std::vector<double> b(n + 1);
  double pw = 1.0;
  for (int k = 0; k <= n; ++k) {
    b[k] = c[k] * pw;
    pw *= r0;
  }
  for (int k = 0; k < n; ++k) b[k] /= b[n];
  b[n] = 1.0;

  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) comp(i, n - 1) = -b[i];

  Eigen::EigenSolver<Eigen::MatrixXd> es(comp);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("poly_roots: eigenvalue iteration failed");

  std::vector<std::complex<double>> roots(n);
  for (int i = 0; i < n; ++i)
    roots[i] = newton_polish(p, es.eigenvalues()(i) * r0);

  // Collapse numerically-real roots and enforce exact conjugate pairs.
  for (auto& r : roots)
    if (std::abs(r.imag()) <= 1e-9 * (1.0 + std::abs(r.real())))
      r = {r.real(), 0.0};
  std::vector<bool> used(roots.size(), false);
  for (std::size_t i = 0; i < roots.size(); ++i) {
    if (used[i] || roots[i].imag() == 0.0) continue;
    std::size_t best = i;
    double best_d = std::numeric_limits<double>::max();
    for (std::size_t j = 0; j < roots.size(); ++j) {
      if (j == i || used[j] || roots[j].imag() == 0.0) continue;
      double dd = std::abs(roots[j] - std::conj(roots[i]));
      if (dd < best_d) {
        best_d = dd;
        best = j;
      }
    }
    if (best != i) {
      double re = 0.5 * (roots[i].real() + roots[best].real());
      double im = 0.5 * (std::abs(roots[i].imag()) + std::abs(roots[best].imag()));
      roots[i] = {re, roots[i].imag() > 0 ? im : -im};
      roots[best] = std::conj(roots[i]);
      used[i] = used[best] = true;
    }
  }

  std::sort(roots.begin(), roots.end(), [](const auto& a, const auto& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });

  for (const auto& r : roots)
    if (root_residual(p, r) > 1e-8)
      throw std::runtime_error("poly_roots: residual above 1e-8");
  return roots;
}

}  // namespace wptrx
