#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>

#include "wptrx/polynomial.hpp"

using namespace wptrx;
using cx = std::complex<double>;

namespace {

double backward_error(const Polynomial& p, cx r) {
  const auto& c = p.coeffs();
  double denom = 0.0, rp = 1.0;
  for (double ck : c) {
    denom += std::abs(ck) * rp;
    rp *= std::abs(r);
  }
  return std::abs(p.eval(r)) / std::max(denom, 1e-300);
}

}  // namespace

TEST_CASE("degree, trimming and indexing") {
  CHECK(Polynomial{}.degree() == 0);
  CHECK(Polynomial{}.is_zero());
  CHECK(Polynomial{5.0}.degree() == 0);
  CHECK_FALSE(Polynomial{5.0}.is_zero());
  CHECK(Polynomial{1.0, 2.0, 3.0}.degree() == 2);
  CHECK(Polynomial{1.0, 2.0, 0.0}.degree() == 1);   // trailing zero trimmed
  CHECK(Polynomial{0.0, 0.0, 0.0}.is_zero());

  const Polynomial p{1.5, -2.0, 4.0};
  CHECK(p[0] == 1.5);
  CHECK(p[1] == -2.0);
  CHECK(p[2] == 4.0);
  CHECK(p[7] == 0.0);  // beyond stored length
}

TEST_CASE("arithmetic identities") {
  const Polynomial a{1.0, 2.0, 3.0};
  const Polynomial b{-4.0, 0.5};

  const Polynomial sum = a + b;
  CHECK(sum[0] == -3.0);
  CHECK(sum[1] == 2.5);
  CHECK(sum[2] == 3.0);

  const Polynomial diff = a - a;
  CHECK(diff.is_zero());

  // (1 + 2s + 3s^2)(-4 + 0.5s) = -4 - 7.5s - 11s^2 + 1.5s^3
  const Polynomial prod = a * b;
  CHECK(prod.degree() == 3);
  CHECK(prod[0] == -4.0);
  CHECK(prod[1] == -7.5);
  CHECK(prod[2] == -11.0);
  CHECK(prod[3] == 1.5);

  const Polynomial scaled = 2.0 * a;
  CHECK(scaled[2] == 6.0);

  // evaluation consistency at a random point
  const cx s(0.3, -1.7);
  CHECK(std::abs(prod.eval(s) - a.eval(s) * b.eval(s)) < 1e-12);
  CHECK(a.eval(2.0) == 1.0 + 4.0 + 12.0);
}

TEST_CASE("roots of factored forms") {
  {
    // (s-1)(s-2) = 2 - 3s + s^2
    auto r = poly_roots(Polynomial{2.0, -3.0, 1.0});
    REQUIRE(r.size() == 2);
    CHECK(std::abs(r[0] - cx(1.0, 0.0)) < 1e-10);
    CHECK(std::abs(r[1] - cx(2.0, 0.0)) < 1e-10);
  }
  {
    // s^2 + 2s + 5 -> -1 +/- 2j
    auto r = poly_roots(Polynomial{5.0, 2.0, 1.0});
    REQUIRE(r.size() == 2);
    CHECK(std::abs(r[0] - cx(-1.0, -2.0)) < 1e-10);
    CHECK(std::abs(r[1] - cx(-1.0, 2.0)) < 1e-10);
    CHECK(r[0] == std::conj(r[1]));  // exact pairing
  }
  {
    // triple root: (s-1)^3 = -1 + 3s - 3s^2 + s^3 (ill-conditioned, loose tol)
    auto r = poly_roots(Polynomial{-1.0, 3.0, -3.0, 1.0});
    REQUIRE(r.size() == 3);
    for (const auto& z : r) CHECK(std::abs(z - cx(1.0, 0.0)) < 1e-4);
  }
  {
    auto r = poly_roots(Polynomial{3.0, -1.5});  // 3 - 1.5s -> s = 2
    REQUIRE(r.size() == 1);
    CHECK(std::abs(r[0] - cx(2.0, 0.0)) < 1e-14);
  }
  CHECK(poly_roots(Polynomial{7.0}).empty());
  CHECK_THROWS_AS(poly_roots(Polynomial{0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("reference denominator cubic roots") {
  // shared plant denominator of the reference design
  const Polynomial den{0.25, 2.8e-4, 2.31e-9, 6.468e-13};
  auto r = poly_roots(den);
  REQUIRE(r.size() == 3);
  CHECK(std::abs(r[0].real() + 1336.7964501878) < 1e-6 * 1336.8);
  CHECK(std::abs(r[0].imag() + 20705.3848328247) < 1e-6 * 20705.4);
  CHECK(r[1] == std::conj(r[0]));
  CHECK(std::abs(r[2].real() + 897.8356710529) < 1e-6 * 897.8);
  CHECK(r[2].imag() == 0.0);
}

TEST_CASE("random polynomials: backward error and conjugate symmetry") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> coef(-5.0, 5.0);
  std::uniform_int_distribution<int> deg(1, 8);
  int checked = 0;
  for (int t = 0; t < 200; ++t) {
    std::vector<double> c(static_cast<std::size_t>(deg(rng)) + 1);
    for (auto& x : c) x = coef(rng);
    if (std::abs(c.back()) < 0.1) c.back() = 1.0;  // keep the degree honest
    Polynomial p(c);
    auto roots = poly_roots(p);
    REQUIRE(static_cast<int>(roots.size()) == p.degree());
    for (const auto& r : roots) {
      CHECK(backward_error(p, r) <= 1e-8);
      if (std::abs(r.imag()) > 0.0) {
        // the conjugate must be present exactly
        bool found = false;
        for (const auto& q : roots)
          if (q == std::conj(r)) found = true;
        CHECK(found);
      }
      ++checked;
    }
    // sorted by (real, imag)
    for (std::size_t i = 1; i < roots.size(); ++i) {
      const bool ordered =
          roots[i - 1].real() < roots[i].real() ||
          (roots[i - 1].real() == roots[i].real() &&
           roots[i - 1].imag() <= roots[i].imag());
      CHECK(ordered);
    }
  }
  CHECK(checked > 400);
}

TEST_CASE("roots are invariant under coefficient scaling") {
  const Polynomial p{0.25, 2.8e-4, 2.31e-9, 6.468e-13};
  auto a = poly_roots(p);
  auto b = poly_roots(p * 1.0e6);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    CHECK(std::abs(a[i] - b[i]) <= 1e-9 * std::abs(a[i]));
}
