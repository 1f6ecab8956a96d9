#pragma once

#include <complex>
#include <initializer_list>
#include <vector>

namespace wptrx {

/// Real polynomial stored as ascending-power coefficients: c[0] + c[1]*s + ...
class Polynomial {
 public:
  Polynomial() : c_{0.0} {}
  Polynomial(std::initializer_list<double> c);
  explicit Polynomial(std::vector<double> c);

  /// Degree after trimming near-zero leading terms; 0 for constants
  /// (including the zero polynomial).
  int degree() const;
  bool is_zero() const;

  const std::vector<double>& coeffs() const { return c_; }
  /// Coefficient of s^k (0 beyond the stored length).
  double operator[](std::size_t k) const;

  std::complex<double> eval(std::complex<double> s) const;
  double eval(double s) const;

  Polynomial& operator+=(const Polynomial& o);
  Polynomial& operator-=(const Polynomial& o);
  Polynomial& operator*=(double k);

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, double k) { return a *= k; }
  friend Polynomial operator*(double k, Polynomial a) { return a *= k; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);

 private:
  void trim();
  std::vector<double> c_;
};

/// All complex roots via the companion-matrix eigenvalue method, Newton
/// polished, with conjugate pairing enforced and sorted by (real, imag).
/// Postcondition: backward error |p(r)| / sum_k |c_k||r|^k <= 1e-8.
/// Throws std::invalid_argument for the zero polynomial; a nonzero constant
/// has no roots and yields an empty vector.
std::vector<std::complex<double>> poly_roots(const Polynomial& p);

}  // namespace wptrx
