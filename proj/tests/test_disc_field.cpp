#include "doctest.h"

#include <cmath>
#include <numbers>
#include <sstream>

#include "bergman/disc_field.hpp"

using namespace bergman;

namespace {

Complex cell_center(const CellMesh& m, std::size_t c) {
  const std::size_t b = m.band_of(c), s = m.sector_of(c);
  const double r = 0.5 * (m.band_inner(b) + m.band_outer(b));
  const double t = m.sector_start(s) + 0.5 * m.sector_width(s);
  return std::polar(r, 2.0 * std::numbers::pi * t);
}

// int_D |1 - z|^-1 dA = sum_n c_n^2 / (n + 1), c_n the Taylor coefficients
// of (1 - z)^{-1/2}; the tail after N terms is about 1 / (pi N).
double inverse_distance_integral() {
  double c = 1.0, sum = 0.0;
  const int n_max = 2000000;
  for (int n = 0; n < n_max; ++n) {
    sum += c * c / (n + 1.0);
    c *= (n + 0.5) / (n + 1.0);
  }
  return sum + 1.0 / (std::numbers::pi * n_max);
}

}  // namespace

TEST_CASE("mesh size and total area") {
  const auto m1 = build_mesh(1);
  CHECK(m1->cell_count() == 8);
  CHECK(m1->sector_count() == 4);
  for (int n : {1, 4, 10}) {
    const auto m = build_mesh(n);
    CHECK(m->cell_count() == (2u << n) * (n + 1u));
    double total = 0.0;
    for (double a : m->cell_areas()) total += a;
    CHECK(std::abs(total - 1.0) <= 1e-12);
  }
  CHECK_THROWS_AS(build_mesh(0), ArgumentError);
  CHECK_THROWS_AS(build_mesh(21), ArgumentError);
}

TEST_CASE("boxes are unions of whole cells") {
  const auto m = build_mesh(3);
  for (Beta b : kBothGrids) {
    for (const auto& i : build_grid(b, 3)) {
      double area = 0.0;
      for (std::size_t c = 0; c < m->cell_count(); ++c) {
        const bool in = m->cell_in_box(c, i);
        CHECK(in == CarlesonBox(i).contains(cell_center(*m, c)));
        if (in) area += m->cell_area(c);
      }
      CHECK(area == doctest::Approx(CarlesonBox(i).area()).epsilon(1e-13));
    }
  }
}

TEST_CASE("sample_field") {
  const auto m = build_mesh(4);
  const auto c = sample_field([](Complex) { return 2.5; }, m, 4);
  for (double v : c.values()) CHECK(v == doctest::Approx(2.5));

  const auto d = sample_field([](Complex z) { return 1.0 - std::norm(z); }, m, 4);
  for (std::size_t b = 0; b + 1 < m->band_count(); ++b)
    CHECK(d[m->cell_id(b, 0)] > d[m->cell_id(b + 1, 0)]);

  CHECK_THROWS(sample_field([](Complex) { return NAN; }, m, 2));
}

TEST_CASE("sampled |1-z|^-1 against the series oracle") {
  const auto m = build_mesh(6);
  const auto f = sample_field([](Complex z) { return 1.0 / std::abs(1.0 - z); }, m, 8);
  const double ref = inverse_distance_integral();
  CHECK(std::abs(integrate(f) / ref - 1.0) <= 0.02);
}

TEST_CASE("integrate over boxes") {
  const auto m = build_mesh(5);
  const auto one = CellField::constant(m, 1.0);
  CHECK(integrate(one) == doctest::Approx(1.0));
  CHECK(integrate(one, DyadicInterval{Beta::Zero, 1, 1}) == doctest::Approx(3.0 / 8.0));
  CHECK_THROWS_AS(integrate(one, DyadicInterval{Beta::Zero, 6, 0}), ArgumentError);

  const auto f = sample_field([](Complex z) { return 1.0 + std::real(z) * std::real(z) + std::imag(z); }, m, 3);
  for (Beta b : kBothGrids) {
    const BoxIntegrals boxes(f, b);
    for (const auto& i : build_grid(b, 4)) {
      double top = 0.0;
      for (std::size_t c : m->top_half_cells(i)) top += f[c] * m->cell_area(c);
      const auto ch = i.children();
      CHECK(integrate(f, i) == doctest::Approx(integrate(f, ch[0]) + integrate(f, ch[1]) + top).epsilon(1e-12));
      CHECK(boxes(i) == doctest::Approx(integrate(f, i)).epsilon(1e-12));
    }
  }
}

TEST_CASE("coarsen preserves box masses") {
  const auto m = build_mesh(5);
  const auto c = CellField::constant(m, 3.0, FieldKind::Weight);
  const auto cc = coarsen(c, Beta::Zero, 5);
  for (std::size_t k = 0; k < cc.size(); ++k) CHECK(cc[k] == doctest::Approx(3.0));

  const auto w = sample_field([](Complex z) { return std::exp(std::real(z)) + std::norm(z); }, m, 3,
                              FieldKind::Weight);
  for (Beta b : kBothGrids) {
    const auto dw = coarsen(w, b, 5);
    for (const auto& i : build_grid(b, 5)) CHECK(integrate(dw, i) == doctest::Approx(integrate(w, i)).epsilon(1e-12));
  }
}

TEST_CASE("weights must be positive") {
  const auto m = build_mesh(2);
  std::vector<double> v(m->cell_count(), 1.0);
  v[3] = 0.0;
  CHECK_THROWS(CellField(m, v, FieldKind::Weight));
  CHECK_NOTHROW(CellField(m, v, FieldKind::Density));
}

TEST_CASE("csv export") {
  const auto m = build_mesh(1);
  std::ostringstream os;
  write_csv(CellField::constant(m, 1.0), os);
  std::size_t lines = 0;
  for (char ch : os.str()) lines += ch == '\n';
  CHECK(lines == 1 + m->cell_count());
}
