#include "bergman/kernel_ops.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "bergman/random.hpp"

namespace bergman {

namespace {

void require_open_disc(Complex z, const char* what) {
  if (!(std::abs(z) < 1.0)) throw ArgumentError(std::string(what) + ": point must lie in the open disc");
}

AdaptiveOptions options_for(double tol) {
  AdaptiveOptions opt;
  opt.abs_tol = 0.25 * tol;
  opt.rel_tol = 0.25 * tol;
  return opt;
}

std::vector<Feature> boundary_feature(Complex z) {
  const double r = std::abs(z);
  if (r < 0.5) return {};
  return {Feature{z / r, 0.5 * (1.0 - r)}};
}

double integrate_against(const PointFunction& integrand, std::span<const PolarRect> roots,
                         Complex z, double tol, const char* what) {
  const auto features = boundary_feature(z);
  try {
    return integrate_adaptive(integrand, roots, options_for(tol), features).value;
  } catch (const ConvergenceError& e) {
    throw ConvergenceError(std::string(what) + ": quadrature did not converge", e.best_estimate,
                           e.error_estimate);
  }
}

double berezin_weight(Complex z, Complex zeta) {
  const double s = 1.0 - std::norm(z);
  const double d = std::norm(1.0 - std::conj(zeta) * z);
  return s * s / (d * d);
}

}  // namespace

double kernel(Complex z, Complex zeta) {
  require_open_disc(z, "kernel");
  require_open_disc(zeta, "kernel");
  return 1.0 / std::norm(1.0 - z * std::conj(zeta));
}

double dyadic_kernel(Complex z, Complex zeta, Beta beta, int max_level) {
  const double r = std::min(std::abs(z), std::abs(zeta));
  const double t1 = turns_of(z);
  const double t2 = turns_of(zeta);
  double sum = 0.0;
  for (int j = 0; j <= std::min(max_level, 62); ++j) {
    const double len = std::ldexp(1.0, -j);
    if (1.0 - len > r) break;
    if (interval_at(beta, j, t1) != interval_at(beta, j, t2)) break;
    sum += 1.0 / (len * len);
  }
  return sum;
}

double berezin(const PointFunction& density, Complex z, double tol) {
  require_open_disc(z, "berezin");
  const auto roots = disc_rects();
  return integrate_against([&](Complex zeta) { return density(zeta) * berezin_weight(z, zeta); },
                           roots, z, tol, "berezin");
}

double berezin(const CellField& density, Complex z, double tol) {
  require_open_disc(z, "berezin");
  const CellMesh& mesh = density.mesh();
  const auto roots = mesh_rects(mesh);
  return integrate_against(
      [&](Complex zeta) { return density[mesh.locate(zeta)] * berezin_weight(z, zeta); }, roots, z,
      tol, "berezin");
}

double apply_pplus(const PointFunction& density, Complex z, double tol) {
  require_open_disc(z, "apply_pplus");
  const auto roots = disc_rects();
  return integrate_against(
      [&](Complex zeta) { return density(zeta) / std::norm(1.0 - std::conj(zeta) * z); }, roots, z,
      tol, "apply_pplus");
}

double apply_pplus(const CellField& density, Complex z, double tol) {
  require_open_disc(z, "apply_pplus");
  const CellMesh& mesh = density.mesh();
  const auto roots = mesh_rects(mesh);
  return integrate_against(
      [&](Complex zeta) {
        return density[mesh.locate(zeta)] / std::norm(1.0 - std::conj(zeta) * z);
      },
      roots, z, tol, "apply_pplus");
}

double berezin_on_rule(std::span<const QuadNode> rule, std::span<const double> density, Complex z) {
  if (rule.size() != density.size()) throw ArgumentError("berezin_on_rule: size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i)
    acc += rule[i].weight * density[i] * berezin_weight(z, rule[i].z);
  return acc;
}

CellField apply_pbeta(const CellField& density, Beta beta) {
  const CellMesh& mesh = density.mesh();
  const int depth = mesh.depth();
  const BoxIntegrals boxes(density, beta);
  std::vector<double> out(mesh.cell_count(), 0.0);
  for (std::size_t s = 0; s < mesh.sector_count(); ++s) {
    const std::uint64_t leaf = mesh.leaf_index(beta, s);
    // Running sum over the ancestor chain: cells in band b lie in the boxes
    // of levels 0..b.
    double acc = 0.0;
    for (int j = 0; j <= depth; ++j) {
      const DyadicInterval box{beta, j, leaf >> (depth - j)};
      const double len = box.length();
      acc += boxes(box) / (len * len);
      out[mesh.cell_id(static_cast<std::size_t>(j), s)] = acc;
    }
  }
  return CellField(density.mesh_ptr(), std::move(out), FieldKind::Density);
}

double comparability_lower_consistent() {
  return 3.0 / (16.0 * (1.0 + std::numbers::pi * std::numbers::pi));
}

namespace {

// A pair in boundary-distance / angle coordinates.
struct PolarPair {
  double d1, t1, d2, t2;
  Complex z() const { return std::polar(1.0 - d1, t1); }
  Complex zeta() const { return std::polar(1.0 - d2, t2); }
};

double upper_ratio(const PolarPair& p, int depth) {
  const Complex z = p.z(), zeta = p.zeta();
  return kernel(z, zeta) /
         (dyadic_kernel(z, zeta, Beta::Zero, depth) + dyadic_kernel(z, zeta, Beta::Third, depth));
}

// Coordinate ascent at geometrically shrinking steps. K^beta is piecewise
// constant, so this climbs K inside the current cell pair.
double polish(PolarPair p, int depth, double dmin) {
  double best = upper_ratio(p, depth);
  for (double h = 1.0; h >= 0x1p-12; h *= 0.5) {
    bool moved = true;
    while (moved) {
      moved = false;
      const double ang = h * std::max(p.d1, p.d2);
      for (int c = 0; c < 8; ++c) {
        PolarPair q = p;
        const double sgn = c % 2 ? -1.0 : 1.0;
        switch (c / 2) {
          case 0: q.d1 = std::clamp(p.d1 * std::exp2(sgn * h), dmin, 1.0); break;
          case 1: q.d2 = std::clamp(p.d2 * std::exp2(sgn * h), dmin, 1.0); break;
          case 2: q.t1 = p.t1 + sgn * ang; break;
          default: q.t2 = p.t2 + sgn * ang; break;
        }
        const double r = upper_ratio(q, depth);
        if (r > best) {
          best = r;
          p = q;
          moved = true;
        }
      }
    }
  }
  return best;
}

}  // namespace

ComparabilityReport comparability_report(std::uint64_t samples, int depth, std::uint64_t seed) {
  if (depth < 3 || depth > 20) throw ArgumentError("comparability_report: depth must lie in [3, 20]");
  ComparabilityReport rep;
  rep.samples = samples;
  rep.seed = seed;
  rep.depth = depth;
  rep.min_k_over_kbeta = {INFINITY, INFINITY};
  Rng rng(seed);
  const double rmax = 1.0 - std::ldexp(1.0, -depth + 2);
  const double consistent = comparability_lower_consistent();
  const double dmin = 1.0 - rmax;
  constexpr std::size_t kPolished = 16;
  std::vector<std::pair<double, PolarPair>> top;
  for (std::uint64_t i = 0; i < samples; ++i) {
    Complex z, zeta;
    if (rng.coin()) {
      z = rng.disc_point(rmax);
      zeta = rng.disc_point(rmax);
    } else {
      // Multiscale pair: both boundary distances log-uniform, angular
      // offset log-uniform around the larger of the two.
      const double d = rng.log_uniform(dmin, 1.0);
      const double d2 = rng.log_uniform(dmin, 1.0);
      const double t = rng.uniform(0.0, 2.0 * std::numbers::pi);
      const double dt = (rng.coin() ? 1.0 : -1.0) * std::max(d, d2) * rng.log_uniform(1.0 / 64.0, 8.0);
      z = std::polar(1.0 - d, t);
      zeta = std::polar(1.0 - d2, t + dt);
    }
    const PolarPair pp{std::max(1.0 - std::abs(z), dmin), std::arg(z), std::max(1.0 - std::abs(zeta), dmin),
                       std::arg(zeta)};
    const double k = kernel(z, zeta);
    std::array<double, 2> kb{};
    for (Beta beta : kBothGrids) {
      const int g = static_cast<int>(beta);
      kb[g] = dyadic_kernel(z, zeta, beta, depth);
      rep.sup_ratio_lower[g] = std::max(rep.sup_ratio_lower[g], kb[g] / k);
      rep.min_k_over_kbeta[g] = std::min(rep.min_k_over_kbeta[g], k / kb[g]);
      if (k < kComparabilityLowerClaimed * kb[g]) ++rep.claimed_violations[g];
      if (k < consistent * kb[g]) ++rep.consistent_violations[g];
    }
    const double up = k / (kb[0] + kb[1]);
    rep.sup_ratio_upper = std::max(rep.sup_ratio_upper, up);
    top.emplace_back(up, pp);
    if (top.size() >= 4 * kPolished) {
      std::partial_sort(top.begin(), top.begin() + kPolished, top.end(),
                        [](const auto& x, const auto& y) { return x.first > y.first; });
      top.resize(kPolished);
    }
  }
  // The upper envelope is a sup over a thin set of configurations; refine
  // the best sampled pairs locally so runs with different seeds agree.
  for (const auto& [r, p] : top) rep.sup_ratio_upper = std::max(rep.sup_ratio_upper, polish(p, depth, dmin));
  return rep;
}

Json to_json(const ComparabilityReport& r) {
  Json grids = Json::array();
  for (Beta beta : kBothGrids) {
    const int g = static_cast<int>(beta);
    grids.push_back(Json{{"beta", beta_name(beta)},
                         {"sup_ratio_lower", r.sup_ratio_lower[g]},
                         {"min_k_over_kbeta", r.min_k_over_kbeta[g]},
                         {"violations_3_over_32", r.claimed_violations[g]},
                         {"violations_consistent", r.consistent_violations[g]}});
  }
  return Json{{"grids", grids},
              {"sup_ratio_upper", r.sup_ratio_upper},
              {"lower_constant_claimed", kComparabilityLowerClaimed},
              {"lower_constant_consistent", comparability_lower_consistent()},
              {"samples", r.samples},
              {"seed", r.seed},
              {"depth", r.depth}};
}

double kernel_identity_check(Complex z, Complex zeta) {
  require_open_disc(z, "kernel_identity_check");
  require_open_disc(zeta, "kernel_identity_check");
  const Complex w = std::conj(zeta) * z;
  const Complex one_minus = 1.0 - w;
  const double d2 = std::norm(one_minus);
  const double lhs = 1.0 / d2;
  const double s = 1.0 - std::norm(w);
  const Complex first = -w / (one_minus * one_minus) + s / (one_minus * d2);
  const double second =
      -std::real(w / (one_minus * one_minus)) + s / (2.0 * d2) + s * s / (2.0 * d2 * d2);
  // Residuals relative to max(1, lhs): the kernel itself reaches ~1e6 for
  // sampled pairs near the boundary.
  const double scale = std::max(1.0, lhs);
  return std::max(std::abs(lhs - first), std::abs(lhs - second)) / scale;
}

IdentitySweep kernel_identity_sweep(std::uint64_t samples, std::uint64_t seed) {
  IdentitySweep out{samples, seed, 0.0};
  Rng rng(seed);
  for (std::uint64_t i = 0; i < samples; ++i) {
    const Complex z = rng.disc_point(1.0);
    const Complex zeta = rng.disc_point(1.0);
    out.max_residual = std::max(out.max_residual, kernel_identity_check(z, zeta));
  }
  return out;
}

Json to_json(const IdentitySweep& s) {
  return Json{{"samples", s.samples}, {"seed", s.seed}, {"max_residual", s.max_residual},
              {"tolerance", 1e-10}, {"pass", s.max_residual <= 1e-10}};
}

}  // namespace bergman
