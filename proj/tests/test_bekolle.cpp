#include "doctest.h"

#include <cmath>
#include <random>

#include "bergman/bekolle.hpp"
#include "bergman/two_weight.hpp"

using namespace bergman;

namespace {

CellField random_weight(const std::shared_ptr<const CellMesh>& m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::vector<double> v(m->cell_count());
  for (auto& x : v) x = std::exp2(u(rng));
  return CellField(m, v, FieldKind::Weight);
}

double box_area(double len) { return len * (2.0 * len - len * len); }

}  // namespace

TEST_CASE("radial power weight cell averages") {
  const auto m = build_mesh(6);
  const auto w = radial_power_weight(m, 0.5);
  const auto ref = sample_field([](Complex z) { return std::sqrt(1.0 - std::norm(z)); }, m, 400);
  for (std::size_t c = 0; c < w.size(); ++c) CHECK(std::abs(w[c] / ref[c] - 1.0) <= 1e-3);
  CHECK_THROWS_AS(radial_power_weight(m, 1.0), ArgumentError);
}

TEST_CASE("B_2 constants") {
  const auto m = build_mesh(8);
  CHECK(bekolle_bp(CellField::constant(m, 3.0, FieldKind::Weight), 2.0, 8) == doctest::Approx(1.0));
  CHECK(bekolle_bp(CellField::constant(m, 3.0, FieldKind::Weight), 3.0, 8) == doctest::Approx(1.0));

  const auto w = radial_power_weight(m, 0.5);
  const double b6 = bekolle_bp(w, 2.0, 6), b8 = bekolle_bp(w, 2.0, 8);
  CHECK(b8 >= b6);
  CHECK(b8 / b6 - 1.0 <= 0.05);

  double prev = 0.0;
  for (double a : {0.0, 0.3, 0.6, 0.9}) {
    const double b = bekolle_bp(radial_power_weight(m, a), 2.0, 8);
    CHECK(b > prev);
    prev = b;
  }
}

TEST_CASE("maximal function over boxes") {
  const auto m = build_mesh(4);
  const auto flat = maximal_over_boxes(CellField::constant(m, 2.0));
  for (double x : flat.values()) CHECK(x == doctest::Approx(2.0));

  const DyadicInterval i{Beta::Zero, 2, 1};
  std::vector<double> ind(m->cell_count(), 0.0);
  for (std::size_t c : m->box_cells(i)) ind[c] = 1.0;
  const auto mi = maximal_over_boxes(CellField(m, ind));
  const auto boxes = both_grids(4);
  for (std::size_t c = 0; c < m->cell_count(); ++c) {
    double best = 0.0;
    for (const auto& q : boxes) {
      if (!m->cell_in_box(c, q)) continue;
      double inter = 0.0;
      for (std::size_t d : m->box_cells(q)) inter += ind[d] * m->cell_area(d);
      best = std::max(best, inter / CarlesonBox(q).area());
    }
    CHECK(mi[c] == doctest::Approx(best).epsilon(1e-12));
    CHECK(mi[c] <= 1.0 + 1e-12);
    if (ind[c] > 0.0) CHECK(mi[c] >= 1.0 - 1e-12);
  }
}

TEST_CASE("B_infinity") {
  const auto m5 = build_mesh(5);
  CHECK(b_infinity(CellField::constant(m5, 1.0, FieldKind::Weight), 5).value == doctest::Approx(1.0));
  std::mt19937_64 rng(31);
  for (int k = 0; k < 50; ++k) {
    const auto w = random_weight(m5, rng);
    CHECK(b_infinity(w, 5).value <= bekolle_bp(w, 2.0, 5) * (1.0 + 1e-12));
  }
  const auto m8 = build_mesh(8);
  const auto w = radial_power_weight(m8, 0.9);
  const double binf = b_infinity(w, 8).value;
  CHECK(std::isfinite(binf));
  CHECK(binf < bekolle_bp(w, 2.0, 8));
}

TEST_CASE("sparse sums") {
  const auto m = build_mesh(6);
  const auto one = CellField::constant(m, 1.0, FieldKind::Weight);
  const DyadicInterval root{Beta::Zero, 0, 0};
  // unit weight: 2^j boxes of area box_area(2^-j) per level
  double closed = 0.0;
  for (int j = 0; j <= 6; ++j) closed += std::exp2(j) * box_area(std::exp2(-j));
  CHECK(sparse_sum(one, root, 6) == doctest::Approx(closed).epsilon(1e-12));

  std::mt19937_64 rng(2);
  const auto s = random_weight(m, rng);
  const DyadicInterval leaf{Beta::Third, 6, 9};
  const double binf = b_infinity(s, 6).value;
  CHECK(sparse_sum_check(s, leaf, 6, binf) == doctest::Approx(1.0 / binf));
  CHECK(sparse_sum_check(s, leaf, 6, binf) <= 1.0);
}

TEST_CASE("diagonal / off-diagonal split") {
  const auto m = build_mesh(5);
  std::mt19937_64 rng(17);
  const auto w = random_weight(m, rng);
  const DyadicInterval leaf{Beta::Zero, 5, 3};
  const auto own = d_od_decomposition(w, leaf, 5);
  CHECK(own.off_diagonal == 0.0);
  CHECK(own.testing == doctest::Approx(own.diagonal).epsilon(1e-12));

  // unit weight: the coefficient of every K is |Q_K| / |K|^2 = 2 - |K|
  const auto one = CellField::constant(m, 1.0, FieldKind::Weight);
  const DyadicInterval i{Beta::Third, 1, 1};
  double d = 0.0, od = 0.0;
  for (int j = i.level; j <= 5; ++j) {
    const double lk = std::exp2(-j), nk = std::exp2(j - i.level);
    d += nk * std::pow(2.0 - lk, 2) * box_area(lk);
    for (int a = i.level; a < j; ++a) od += nk * (2.0 - std::exp2(-a)) * (2.0 - lk) * box_area(lk);
  }
  const auto unit = d_od_decomposition(one, i, 5);
  CHECK(unit.diagonal == doctest::Approx(d).epsilon(1e-12));
  CHECK(unit.off_diagonal == doctest::Approx(od).epsilon(1e-12));

  for (int k = 0; k < 20; ++k) {
    const auto v = random_weight(m, rng);
    const DyadicInterval q{k % 2 ? Beta::Zero : Beta::Third, k % 3, 0};
    const auto r = d_od_decomposition(v, q, 5);
    CHECK(r.residual <= 1e-9);
    const double b2 = bekolle_bp(v, 2.0, 5);
    CHECK(r.diagonal <= b2 * r.diagonal_bound * (1.0 + 1e-12));
  }
}

TEST_CASE("sharp mixed estimate sweep") {
  const auto rows = sharp_sweep({0.0, 0.3, -0.3, 0.6, -0.6, 0.9, -0.9}, 6);
  double lo = INFINITY, hi = 0.0;
  for (const auto& r : rows) {
    CHECK(std::isfinite(r.ratio));
    lo = std::min(lo, r.ratio);
    hi = std::max(hi, r.ratio);
    if (r.binf_w <= r.b2 && r.binf_winv <= r.b2) CHECK(r.mixed <= 2.0 * r.b2 * (1.0 + 1e-12));
  }
  CHECK(rows[0].b2 == doctest::Approx(1.0));
  CHECK(hi / lo <= 50.0);
}
