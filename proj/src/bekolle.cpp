#include "bergman/bekolle.hpp"

#include <algorithm>
#include <cmath>

#include "bergman/two_weight.hpp"

namespace bergman {

namespace {

void check_depth(const CellField& f, int depth, const char* what) {
  if (depth < 0 || depth > f.mesh().depth())
    throw ArgumentError(std::string(what) + ": depth must lie in [0, mesh depth]");
}

struct BothBoxes {
  BoxIntegrals zero;
  BoxIntegrals third;
  explicit BothBoxes(const CellField& f) : zero(f, Beta::Zero), third(f, Beta::Third) {}
  double operator()(const DyadicInterval& i) const {
    return i.beta == Beta::Zero ? zero(i) : third(i);
  }
};

CellField ones(const CellField& f) { return CellField::constant(f.mesh_ptr(), 1.0); }

// Cellwise max of plain box averages of f over both grids, folded into out.
void maximal_into(const CellField& f, std::vector<double>& out) {
  const CellMesh& m = f.mesh();
  const BothBoxes num(f);
  const BothBoxes den(ones(f));
  for (const auto& q : both_grids(m.depth())) {
    const double avg = num(q) / den(q);
    if (avg <= 0.0) continue;
    for (std::size_t c : m.box_cells(q)) out[c] = std::max(out[c], avg);
  }
}

}  // namespace

std::vector<DyadicInterval> both_grids(int depth) {
  auto out = build_grid(Beta::Zero, depth);
  const auto third = build_grid(Beta::Third, depth);
  out.insert(out.end(), third.begin(), third.end());
  return out;
}

double bekolle_bp(const CellField& w, double p, int depth) {
  check_depth(w, depth, "bekolle_bp");
  const CellField sigma = dual_weight(w, p);
  const BothBoxes bw(w), bs(sigma), area(ones(w));
  double sup = 0.0;
  for (const auto& i : both_grids(depth)) {
    const double a = area(i);
    sup = std::max(sup, (bw(i) / a) * std::pow(bs(i) / a, p - 1.0));
  }
  return sup;
}

CellField maximal_over_boxes(const CellField& f) {
  std::vector<double> out(f.size(), 0.0);
  maximal_into(f, out);
  return CellField(f.mesh_ptr(), std::move(out), FieldKind::Density);
}

BInfinity b_infinity(const CellField& w, int depth) {
  check_depth(w, depth, "b_infinity");
  const CellMesh& m = w.mesh();
  const auto intervals = both_grids(depth);
  std::vector<double> ratio(intervals.size());
  parallel_for(intervals.size(), [&](std::size_t k) {
    const auto cells = m.box_cells(intervals[k]);
    std::vector<double> masked(w.size(), 0.0);
    double mass = 0.0;
    for (std::size_t c : cells) {
      masked[c] = w[c];
      mass += w[c] * m.cell_area(c);
    }
    std::vector<double> mx(w.size(), 0.0);
    maximal_into(CellField(w.mesh_ptr(), std::move(masked), FieldKind::Density), mx);
    double acc = 0.0;
    for (std::size_t c : cells) acc += mx[c] * m.cell_area(c);
    ratio[k] = acc / mass;
  });
  const auto best = std::max_element(ratio.begin(), ratio.end());
  return {*best, intervals[static_cast<std::size_t>(best - ratio.begin())]};
}

WeightConstants weight_constants(const CellField& w, double p, int depth) {
  WeightConstants c;
  c.p = p;
  c.depth = depth;
  c.bp = bekolle_bp(w, p, depth);
  c.binf_w = b_infinity(w, depth).value;
  c.binf_winv = b_infinity(dual_weight(w, p), depth).value;
  const CellField sigma = dual_weight(w, p);
  const BothBoxes bw(w), bs(sigma), area(ones(w));
  for (const auto& i : both_grids(depth)) {
    const double a = area(i);
    const double v = (bw(i) / a) * std::pow(bs(i) / a, p - 1.0);
    if (v >= 0.95 * c.bp && c.near_extremal.size() < 8) c.near_extremal.push_back(i);
  }
  return c;
}

double sparse_sum(const CellField& sigma, const DyadicInterval& i, int depth) {
  check_depth(sigma, depth, "sparse_sum");
  if (i.level > depth) throw ArgumentError("sparse_sum: interval deeper than depth");
  const BoxIntegrals box(sigma, i.beta);
  double acc = 0.0;
  for (const auto& k : build_grid(i.beta, depth))
    if (i.contains(k)) acc += box(k);
  return acc / box(i);
}

double sparse_sum_check(const CellField& sigma, const DyadicInterval& i, int depth, double binf) {
  return sparse_sum(sigma, i, depth) / binf;
}

DiagonalSplit d_od_decomposition(const CellField& w, const DyadicInterval& i, int depth) {
  check_depth(w, depth, "d_od_decomposition");
  if (i.level > depth) throw ArgumentError("d_od_decomposition: interval deeper than depth");
  const CellMesh& m = w.mesh();
  const CellField sigma = dual_weight(w, 2.0);
  const BoxIntegrals bw(w, i.beta), bs(sigma, i.beta), area(ones(w), i.beta);

  DiagonalSplit out;
  std::vector<double> h(w.size(), 0.0);
  for (const auto& k : build_grid(i.beta, depth)) {
    if (!i.contains(k)) continue;
    const double len2 = k.length() * k.length();
    const double coef = bs(k) / len2;
    out.diagonal += coef * coef * bw(k);
    out.sum_sigma += bs(k);
    const double shape = area(k) / len2;
    out.diagonal_bound += bs(k) * shape * shape;
    // Strict ancestors of k that still lie inside I.
    for (DyadicInterval a = k; a.level > i.level;) {
      a = a.parent();
      const double la2 = a.length() * a.length();
      out.off_diagonal += (bs(a) / la2) * coef * bw(k);
    }
    for (std::size_t c : m.box_cells(k)) h[c] += coef;
  }
  for (std::size_t c : m.box_cells(i)) out.testing += h[c] * h[c] * w[c] * m.cell_area(c);
  out.residual = std::abs(out.testing - (out.diagonal + 2.0 * out.off_diagonal)) / out.testing;
  return out;
}

CellField radial_power_weight(std::shared_ptr<const CellMesh> mesh, double alpha) {
  if (!(alpha > -1.0 && alpha < 1.0)) throw ArgumentError("radial_power_weight: alpha must lie in (-1, 1)");
  std::vector<double> v(mesh->cell_count());
  for (std::size_t c = 0; c < v.size(); ++c) {
    const std::size_t b = mesh->band_of(c);
    const double ri = mesh->band_inner(b);
    const double ro = mesh->band_outer(b);
    const double s0 = 1.0 - ri * ri;  // 1 - rho at the inner edge
    const double s1 = 1.0 - ro * ro;
    // Average of s^alpha over rho in [ri^2, ro^2], i.e. s in [s1, s0].
    v[c] = (std::pow(s0, alpha + 1.0) - std::pow(s1, alpha + 1.0)) / ((alpha + 1.0) * (s0 - s1));
  }
  return CellField(std::move(mesh), std::move(v), FieldKind::Weight);
}

SharpRow sharp_row(double alpha, int depth) {
  const auto mesh = build_mesh(depth);
  const CellField w = radial_power_weight(mesh, alpha);
  const CellField sigma = dual_weight(w, 2.0);
  std::vector<double> rw(w.size()), rs(w.size());
  for (std::size_t c = 0; c < w.size(); ++c) {
    rw[c] = std::sqrt(w[c]);
    rs[c] = std::sqrt(sigma[c]);
  }
  const CellField sqrt_w = w.with_values(rw);
  const CellField sqrt_s = w.with_values(rs);
  const CellField one = CellField::constant(mesh, 1.0, FieldKind::Weight);

  SharpRow r;
  r.alpha = alpha;
  r.depth = depth;
  for (Beta beta : kBothGrids) {
    const auto spec = DyadicOperatorSpec::pbeta(*mesh, beta);
    r.norm = std::max(r.norm, bilinear_norm(spec, sqrt_w, sqrt_s, one, one));
  }
  r.b2 = bekolle_bp(w, 2.0, depth);
  r.binf_w = b_infinity(w, depth).value;
  r.binf_winv = b_infinity(sigma, depth).value;
  r.mixed = std::sqrt(r.b2) * (std::sqrt(r.binf_w) + std::sqrt(r.binf_winv));
  r.ratio = r.norm / r.mixed;
  return r;
}

std::vector<SharpRow> sharp_sweep(const std::vector<double>& alphas, int depth) {
  for (double a : alphas)
    if (!(a > -1.0 && a < 1.0)) throw ArgumentError("sharp_sweep: alpha must lie in (-1, 1)");
  std::vector<SharpRow> rows;
  for (double a : alphas) rows.push_back(sharp_row(a, depth));
  return rows;
}

CsvTable sharp_csv(const std::vector<SharpRow>& rows) {
  CsvTable t;
  t.header = {"alpha", "depth", "norm", "B2", "Binf_w", "Binf_winv", "ratio"};
  for (const auto& r : rows)
    t.add_row({format_double(r.alpha), std::to_string(r.depth), format_double(r.norm),
               format_double(r.b2), format_double(r.binf_w), format_double(r.binf_winv),
               format_double(r.ratio)});
  return t;
}

Json to_json(const WeightConstants& c) {
  Json near = Json::array();
  for (const auto& i : c.near_extremal)
    near.push_back(Json{{"beta", beta_name(i.beta)}, {"level", i.level}, {"index", i.index}});
  return Json{{"p", c.p},
              {"depth", c.depth},
              {"Bp", c.bp},
              {"Binf_w", c.binf_w},
              {"Binf_dual", c.binf_winv},
              {"near_extremal", near}};
}

}  // namespace bergman
