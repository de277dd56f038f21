#include "doctest.h"

#include <cmath>
#include <random>

#include "bergman/kernel_ops.hpp"
#include "bergman/two_weight.hpp"

using namespace bergman;

namespace {

const DyadicInterval kRoot{Beta::Zero, 0, 0};

DyadicOperatorSpec root_only() { return {Beta::Zero, {kRoot}, {1.0}}; }

CellField random_weight(const std::shared_ptr<const CellMesh>& m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  std::vector<double> v(m->cell_count());
  for (auto& x : v) x = std::exp2(u(rng));
  return CellField(m, v, FieldKind::Weight);
}

double l2(const CellField& f, const CellField& w) {
  double s = 0.0;
  for (std::size_t c = 0; c < f.size(); ++c) s += f[c] * f[c] * w[c] * f.mesh().cell_area(c);
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("dual weights") {
  const auto m = build_mesh(3);
  std::mt19937_64 rng(1);
  const auto v = random_weight(m, rng);
  const auto unit_dual = dual_weight(CellField::constant(m, 1.0, FieldKind::Weight), 3.0);
  for (double x : unit_dual.values()) CHECK(x == 1.0);
  const auto s2 = dual_weight(v, 2.0);
  for (std::size_t c = 0; c < v.size(); ++c) CHECK(s2[c] == doctest::Approx(1.0 / v[c]));
  // (1 - p')(1 - p) = 1 for conjugate exponents: dual of dual at p' returns v
  const double p = 3.0, pd = 1.5;
  const auto back = dual_weight(dual_weight(v, p), pd);
  for (std::size_t c = 0; c < v.size(); ++c) CHECK(std::abs(back[c] / v[c] - 1.0) <= 1e-12);
}

TEST_CASE("apply_T basics and the P^beta instance") {
  const auto m = build_mesh(4);
  const auto one = CellField::constant(m, 1.0);
  const auto averaged = apply_T(root_only(), one);
  for (double x : averaged.values()) CHECK(x == doctest::Approx(1.0));
  for (Beta b : kBothGrids) {
    std::mt19937_64 rng(9);
    const auto f = random_weight(m, rng);
    const auto a = apply_T(DyadicOperatorSpec::pbeta(*m, b), f);
    const auto p = apply_pbeta(f, b);
    for (std::size_t c = 0; c < f.size(); ++c) CHECK(std::abs(a[c] - p[c]) <= 1e-10 * std::max(1.0, p[c]));

    const auto spec = DyadicOperatorSpec::pbeta(*m, b);
    const auto loc_root = apply_T_local(spec, f, DyadicInterval{b, 0, 0});
    for (std::size_t c = 0; c < f.size(); ++c) CHECK(loc_root[c] == doctest::Approx(a[c]));
    const DyadicInterval mid{b, 2, 1};
    const auto loc = apply_T_local(spec, f, mid);
    for (std::size_t c = 0; c < f.size(); ++c) CHECK(loc[c] <= a[c] * (1.0 + 1e-12));
  }
  const DyadicOperatorSpec bad{Beta::Zero, {kRoot}, {-1.0}};
  CHECK_THROWS_AS(bad.validate(*m), ArgumentError);
}

TEST_CASE("testing constants") {
  const auto m = build_mesh(3);
  const auto one = CellField::constant(m, 1.0, FieldKind::Weight);
  const auto t = testing_constants(root_only(), one, one, 2.0);
  CHECK(t.c0 == doctest::Approx(1.0));
  CHECK(t.c0_star == doctest::Approx(1.0));
  CHECK(testing_constants(root_only().scaled(2.0), one, one, 2.0).c0 == doctest::Approx(4.0));

  // P^beta at depth 3 with unit weights, by direct enumeration:
  // T(1_Q) = sum_R tau_R |Q cap R| / |R| 1_R.
  for (Beta b : kBothGrids) {
    const auto spec = DyadicOperatorSpec::pbeta(*m, b);
    double best = 0.0;
    for (const auto& q : spec.cubes) {
      std::vector<double> tq(m->cell_count(), 0.0);
      for (std::size_t k = 0; k < spec.cubes.size(); ++k) {
        const auto& r = spec.cubes[k];
        double inter = 0.0, rarea = 0.0;
        for (std::size_t c = 0; c < m->cell_count(); ++c) {
          if (!m->cell_in_box(c, r)) continue;
          rarea += m->cell_area(c);
          if (m->cell_in_box(c, q)) inter += m->cell_area(c);
        }
        for (std::size_t c = 0; c < m->cell_count(); ++c)
          if (m->cell_in_box(c, r)) tq[c] += spec.tau[k] * inter / rarea;
      }
      double num = 0.0;
      for (std::size_t c = 0; c < m->cell_count(); ++c) num += tq[c] * tq[c] * m->cell_area(c);
      best = std::max(best, num / CarlesonBox(q).area());
    }
    CHECK(testing_constants(spec, one, one, 2.0).c0 == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("weighted maximal function") {
  const auto m = build_mesh(5);
  const auto one = CellField::constant(m, 1.0, FieldKind::Weight);
  const auto flat = weighted_maximal(one, CellField::constant(m, 2.0), Beta::Zero);
  for (double x : flat.values()) CHECK(x == doctest::Approx(2.0));
  const DyadicInterval i{Beta::Third, 2, 3};
  std::vector<double> ind(m->cell_count(), 0.0);
  for (std::size_t c : m->box_cells(i)) ind[c] = 1.0;
  const auto mi = weighted_maximal(one, CellField(m, ind), Beta::Third);
  for (std::size_t c : m->box_cells(i)) CHECK(mi[c] == doctest::Approx(1.0));

  std::mt19937_64 rng(21);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const auto w = random_weight(m, rng);
    const auto f = random_weight(m, rng);
    worst = std::max(worst, l2(weighted_maximal(w, f, Beta::Zero), w) / l2(f, w));
  }
  CHECK(worst <= 4.0);
}

TEST_CASE("corona decomposition") {
  const auto m = build_mesh(5);
  const auto one = CellField::constant(m, 1.0, FieldKind::Weight);
  const auto family = DyadicOperatorSpec::pbeta(*m, Beta::Zero).cubes;
  const auto flat = corona(one, CellField::constant(m, 1.0), family);
  CHECK(flat.stopping.size() == 1);
  const auto flat_check = corona_linearization_check(flat, one, CellField::constant(m, 1.0), 2.0);
  CHECK(flat_check.max_maximal_ratio == doctest::Approx(1.0));

  // spike on one deepest cell
  std::vector<double> v(m->cell_count(), 1.0);
  const std::size_t spike = m->cell_id(m->band_count() - 1, 7);
  v[spike] = 1e6;
  const CellField f(m, v);
  const auto forest = corona(one, f, family);
  CHECK(forest.stopping.size() > 2);
  for (std::size_t s = 0; s < forest.stopping.size(); ++s) {
    if (forest.stop_parent[s] < 0) continue;
    const double parent = forest.average[forest.stopping[static_cast<std::size_t>(forest.stop_parent[s])]];
    CHECK(forest.average[forest.stopping[s]] > 4.0 * parent);
  }
  std::size_t total = 0;
  for (std::size_t n : forest.bucket_sizes()) total += n;
  CHECK(total == family.size());
  const auto rep = corona_linearization_check(forest, one, f, 2.0);
  CHECK(rep.strict_growth);
  CHECK(rep.partition);
  CHECK(rep.max_chain_ratio <= 4.0 / 3.0 + 1e-12);

  std::mt19937_64 rng(4);
  double carleson = 0.0;
  for (int k = 0; k < 50; ++k) {
    const auto w = random_weight(m, rng);
    const auto g = random_weight(m, rng);
    const auto r = corona_linearization_check(corona(w, g, family), w, g, 2.0);
    CHECK(r.strict_growth);
    CHECK(r.partition);
    carleson = std::max(carleson, r.carleson_constant);
  }
  CHECK(carleson <= 32.0);
}

TEST_CASE("split families") {
  const auto m = build_mesh(3);
  std::mt19937_64 rng(8);
  const auto w = random_weight(m, rng);
  const auto f = random_weight(m, rng);
  const auto spec = DyadicOperatorSpec::pbeta(*m, Beta::Zero);
  const auto [q1, q2] = split_families(spec, w, w, f, f, 2.0);
  CHECK(q1.size() == spec.cubes.size());
  CHECK(q2.empty());
  const auto [a, b] = split_families(spec, w, dual_weight(w, 2.0), f, CellField::constant(m, 0.0), 2.0);
  CHECK(b.empty());
  const auto g = random_weight(m, rng);
  const auto [c, d] = split_families(spec, w, dual_weight(w, 2.0), f, g, 2.0);
  CHECK(c.size() + d.size() == spec.cubes.size());
  (void)a;
}

TEST_CASE("exact norm against bilinear ascent") {
  const auto m = build_mesh(3);
  const auto one = CellField::constant(m, 1.0, FieldKind::Weight);
  CHECK(operator_norm_exact(root_only(), one, one) == doctest::Approx(1.0));
  CHECK(operator_norm_exact(root_only().scaled(2.0), one, one) == doctest::Approx(2.0));
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto inst = random_instance(3, 100 + s);
    const double exact = operator_norm_exact(inst.spec, inst.w, inst.sigma);
    const double ascent = operator_norm_ascent(inst.spec, inst.w, inst.sigma, 2.0, 50, s);
    CHECK(std::abs(ascent / exact - 1.0) <= 1e-6);
  }
}

TEST_CASE("two-weight battery") {
  const auto m = build_mesh(2);
  const auto one = CellField::constant(m, 1.0, FieldKind::Weight);
  RandomInstance trivial{0, 2, m, root_only(), one, one};
  const auto t = verify_theorem(trivial);
  CHECK(t.testing.c0 == doctest::Approx(1.0));
  CHECK(t.norm == doctest::Approx(1.0));

  double worst_c = 0.0;
  for (const auto& r : verify_battery(100, 3, 1000)) {
    CHECK(r.necessity);
    CHECK(r.local_below_global);
    worst_c = std::max(worst_c, r.ratio);
  }
  CHECK(worst_c <= 100.0);

  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto inst = random_instance(3, 500 + s);
    CHECK(formulation_gap(inst.spec, inst.w, inst.sigma) <= 1e-10);
    const auto inv = delta_invariance(inst);
    CHECK(inv.norm_gap <= 1e-10);
    CHECK(inv.c0_gap <= 1e-10);
    CHECK(inv.c0_star_gap <= 1e-10);
  }
}
