#include "doctest.h"

#include <cmath>
#include <numbers>

#include "bergman/kernel_ops.hpp"
#include "bergman/sarason.hpp"

using namespace bergman;

namespace {

const LatticeOptions kSmall{3, 4};

AnalyticSymbol poly(std::vector<Complex> c) { return AnalyticSymbol::from_coefficients(std::move(c)); }

double box_area(double len) { return len * (2.0 * len - len * len); }

}  // namespace

TEST_CASE("symbols and lattice") {
  const auto p = poly({1.0, 2.0, Complex(0.0, 1.0)});
  const Complex z(0.3, -0.2);
  CHECK(std::abs(p(z) - (1.0 + 2.0 * z + Complex(0.0, 1.0) * z * z)) <= 1e-15);

  const auto s = one_minus_z_power(-0.25, 10);
  // binomial series of (1 - z)^{-1/4}: a_{n+1} = a_n (n + 1/4) / (n + 1)
  double a = 1.0;
  for (int n = 0; n < 10; ++n) {
    CHECK(std::abs(s.coefficients()[n] - a) <= 1e-15);
    a *= (n + 0.25) / (n + 1.0);
  }
  CHECK(std::abs(s(z) - std::pow(1.0 - z, -0.25)) <= 1e-14);
  const auto fn = AnalyticSymbol::from_function([](Complex w) { return std::exp(w); }, "exp");
  CHECK_THROWS_AS(fn.coefficients(), ArgumentError);

  CHECK(boundary_lattice({}).size() == 505);
  CHECK(boundary_lattice({2, 3}).size() == 1 + 6 + 12);
}

TEST_CASE("sampled norms") {
  CHECK(sample_symbol(poly({1.0, 1.0}), {4, 6}).norm2 == doctest::Approx(1.5).epsilon(1e-10));
  CHECK(sample_symbol(poly({0.0, 1.0}), {4, 6}).norm2 == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("Berezin of |f|^2 through the automorphism") {
  const auto f = poly({1.0, 0.5, Complex(0.0, -0.25)});
  const PointFunction abs2 = [&](Complex w) { return std::norm(f(w)); };
  for (Complex z : {Complex(0.0), Complex(0.5, 0.2), Complex(-0.1, 0.9), Complex(0.97, 0.0)})
    CHECK(std::abs(berezin_abs2(f, z, 1e-10) / berezin(abs2, z, 1e-10) - 1.0) <= 1e-8);
  CHECK(berezin_abs2(poly({1.0, 1.0}), 0.0) == doctest::Approx(1.5).epsilon(1e-9));
}

TEST_CASE("b_fg") {
  const auto one = constant_symbol(1.0);
  CHECK(b_fg(one, one, kSmall).value == doctest::Approx(1.0).epsilon(1e-6));

  const auto g = poly({1.0, 1.0});
  const auto f = poly({0.5, Complex(0.0, 0.5)});
  CHECK(b_fg(one, g, kSmall).value >= 1.5 * (1.0 - 1e-6));  // B|g|^2(0) = ||g||^2
  CHECK(b_fg(f, g, kSmall).value == doctest::Approx(b_fg(g, f, kSmall).value).epsilon(1e-12));
  CHECK(b_fg(constant_symbol(0.0), g, kSmall).value == 0.0);
}

TEST_CASE("b_fg of (1 - z)^{-1/4} grows under lattice refinement") {
  // B|f|^2(r) ~ (1 - r)^{-1/2} toward the singular point, so the product
  // doubles with every ring added.
  const auto f = one_minus_z_power(-0.25);
  const double b3 = b_fg(f, f, {3, 4}).value;
  const double b4 = b_fg(f, f, {4, 4}).value;
  CHECK(b4 / b3 == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("truncated Toeplitz products") {
  const auto one = constant_symbol(1.0);
  const auto id = toeplitz_product_matrix(one, one, 8);
  CHECK((id.matrix - Eigen::MatrixXcd::Identity(8, 8)).norm() <= 1e-12);
  CHECK(id.norm == doctest::Approx(1.0));

  // T_z e_n = sqrt((n + 1) / (n + 2)) e_{n+1}
  const auto shift = toeplitz_product_matrix(poly({0.0, 1.0}), one, 8);
  for (int n = 0; n + 1 < 8; ++n) {
    const double got = std::abs(shift.matrix(n + 1, n)) + std::abs(shift.matrix(n, n + 1));
    CHECK(got == doctest::Approx(std::sqrt((n + 1.0) / (n + 2.0))).epsilon(1e-12));
  }

  double prev = 0.0;
  for (int m : {4, 8, 16, 32}) {
    const double norm = toeplitz_product_matrix(poly({1.0, 1.0}), poly({1.0, 1.0}), m).norm;
    CHECK(norm >= prev - 1e-12);
    CHECK(norm <= 4.0 + 1e-12);  // ||T_{1+z}||^2 <= sup |1 + z|^2
    prev = norm;
  }
}

TEST_CASE("P+_{f,g} against the radial series") {
  const auto m = build_mesh(4);
  std::vector<double> v(m->cell_count());
  for (std::size_t c = 0; c < v.size(); ++c) v[c] = 1.0 + 0.25 * m->band_of(c);
  const CellField u(m, v);
  const auto series = [&](double x) {
    double s = 0.0, xn = 1.0;
    for (int n = 0; n < 2000; ++n, xn *= x) {
      double mom = 0.0;
      for (std::size_t b = 0; b < m->band_count(); ++b) {
        const double lo = std::pow(m->band_inner(b), 2), hi = std::pow(m->band_outer(b), 2);
        mom += (1.0 + 0.25 * b) * (std::pow(hi, n + 1) - std::pow(lo, n + 1)) / (n + 1.0);
      }
      s += xn * mom;
    }
    return s;
  };
  const auto two = constant_symbol(2.0), three = constant_symbol(Complex(0.0, 3.0));
  for (double r : {0.0, 0.5, 0.85}) {
    const Complex z = std::polar(r, 1.1);
    CHECK(std::abs(apply_pplus_fg(two, three, u, z) - 6.0 * series(r * r)) <= 1e-6);
  }
  CHECK(apply_pplus_fg(constant_symbol(0.0), three, u, 0.3) == 0.0);
}

TEST_CASE("box testing conditions for constants") {
  const SampleOptions so{3, 4};
  const auto s1 = sample_symbol(constant_symbol(1.0), so);
  const auto c = test_conditions_4(s1, s1, 2);
  CHECK(c.c0a == doctest::Approx(c.c0b));

  // direct enumeration: P(1_Q) = sum over both grids of |Q cap R| / |R_I|^2 1_R
  const CellMesh& m = *s1.mesh;
  const auto all = [&] {
    std::vector<DyadicInterval> out;
    for (Beta b : kBothGrids)
      for (const auto& i : build_grid(b, m.depth())) out.push_back(i);
    return out;
  }();
  double best = 0.0;
  for (const auto& q : all) {
    if (q.level > 2) continue;
    std::vector<double> pq(m.cell_count(), 0.0);
    for (const auto& r : all) {
      double inter = 0.0;
      for (std::size_t cell = 0; cell < m.cell_count(); ++cell)
        if (m.cell_in_box(cell, r) && m.cell_in_box(cell, q)) inter += m.cell_area(cell);
      for (std::size_t cell = 0; cell < m.cell_count(); ++cell)
        if (m.cell_in_box(cell, r)) pq[cell] += inter / (r.length() * r.length());
    }
    double num = 0.0;
    for (std::size_t cell = 0; cell < m.cell_count(); ++cell) num += pq[cell] * pq[cell] * m.cell_area(cell);
    best = std::max(best, std::sqrt(num / CarlesonBox(q).area()));
  }
  CHECK(c.c0a == doctest::Approx(best).epsilon(1e-9));

  const auto s0 = sample_symbol(constant_symbol(0.0), so);
  CHECK(test_conditions_4(s0, s1, 2).c0a == 0.0);
}

TEST_CASE("gamma") {
  const SampleOptions so{6, 4};
  CHECK(gamma(sample_symbol(constant_symbol(0.0), so), 6) == 0.0);
  double best = 0.0;
  for (int j = 0; j <= 6; ++j) best = std::max(best, j * std::log(2.0) * box_area(std::exp2(-j)));
  CHECK(gamma(sample_symbol(constant_symbol(1.0), so), 6) == doctest::Approx(std::sqrt(best)).epsilon(1e-9));
  CHECK(gamma(sample_symbol(constant_symbol(2.0), so), 6) == doctest::Approx(2.0 * std::sqrt(best)).epsilon(1e-9));
}

TEST_CASE("delta lower bound") {
  DeltaOptions o;
  o.degree = 8;
  const auto d1 = delta_lower(constant_symbol(1.0), o);
  CHECK(d1.value >= 1.0 - 1e-9);
  CHECK(d1.value <= 1.0 + 1e-9);
  CHECK(d1.certified);

  const auto z = poly({0.0, 1.0});
  const auto dz = delta_lower(z, o);
  CHECK(dz.value > 0.5);
  CHECK(dz.value <= 1.0 + 1e-9);
  CHECK(dz.certified);

  const auto f = poly({1.0, 1.0});
  DeltaOptions lo = o;
  lo.degree = 3;
  CHECK(delta_lower(f, lo).value <= delta_lower(f, o).value + 1e-12);
}

TEST_CASE("ourex bound and pair report") {
  const auto zero = constant_symbol(0.0);
  const auto g = poly({1.0, -1.0});
  const auto sf = sample_symbol(zero, {4, 4});
  const auto r = ourex_bound_check(zero, g, sf, kSmall, 4);
  CHECK(r.b == 0.0);
  CHECK(r.ratio == 0.0);

  PairOptions po;
  po.sample = {4, 4};
  po.lattice = kSmall;
  po.depth = 3;
  po.toeplitz_m = 8;
  po.delta.degree = 4;
  const Json j = sarason_pair(constant_symbol(1.0), constant_symbol(1.0), po);
  CHECK(j["b_fg"].get<double>() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(j["toeplitz_norm"].get<double>() == doctest::Approx(1.0));
  CHECK(j["delta_certified"].get<bool>());
  const Json k = sarason_pair(AnalyticSymbol::from_function([](Complex w) { return 1.0 + w; }, "f"),
                              constant_symbol(1.0), po);
  CHECK(k["toeplitz_norm"].is_null());
}
