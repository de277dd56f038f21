#include "bergman/quadrature.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <queue>

#include "bergman/disc_field.hpp"

namespace bergman {

namespace {

constexpr double kTau = 2.0 * std::numbers::pi;

template <unsigned N>
std::vector<std::pair<double, double>> expand_gauss() {
  using G = boost::math::quadrature::gauss<double, N>;
  const auto& x = G::abscissa();
  const auto& w = G::weights();
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == 0.0) {
      out.emplace_back(0.5, 0.5 * w[i]);
    } else {
      out.emplace_back(0.5 - 0.5 * x[i], 0.5 * w[i]);
      out.emplace_back(0.5 + 0.5 * x[i], 0.5 * w[i]);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::pair<double, double>> make_rule(int order) {
  switch (order) {
    case 2: return expand_gauss<2>();
    case 4: return expand_gauss<4>();
    case 6: return expand_gauss<6>();
    case 8: return expand_gauss<8>();
    case 10: return expand_gauss<10>();
    case 12: return expand_gauss<12>();
    case 16: return expand_gauss<16>();
    case 20: return expand_gauss<20>();
    default: throw ArgumentError("unsupported Gauss-Legendre order");
  }
}

double circular_gap(double t, double t0, double t1) {
  // Distance in turns from t to the arc [t0, t1).
  const double off = wrap_turns(t - t0);
  const double w = t1 - t0;
  if (off <= w) return 0.0;
  return std::min(off - w, 1.0 - off);
}

bool near_feature(const PolarRect& rect, const Feature& f) {
  const double size = rect.size();
  if (size <= 0.5 * f.scale) return false;
  const double rc = std::abs(f.center);
  const double ri = rect.r_inner();
  const double ro = rect.r_outer();
  const double rgap = rc < ri ? ri - rc : (rc > ro ? rc - ro : 0.0);
  const double agap = kTau * std::min(rc, 1.0) * circular_gap(turns_of(f.center), rect.t0, rect.t1);
  return std::hypot(rgap, agap) < 2.0 * size;
}

bool needs_forced_split(const PolarRect& rect, std::span<const Feature> features) {
  return std::any_of(features.begin(), features.end(),
                     [&](const Feature& f) { return near_feature(rect, f); });
}

std::array<PolarRect, 2> bisect(const PolarRect& r) {
  const double dr = r.r_outer() - r.r_inner();
  const double arc = kTau * (r.t1 - r.t0) * r.r_outer();
  if (dr >= arc) {
    // Split at the radial midpoint so physical halves stay comparable.
    const double rm = 0.5 * (r.r_inner() + r.r_outer());
    const double rhom = rm * rm;
    return {PolarRect{r.t0, r.t1, r.rho0, rhom}, PolarRect{r.t0, r.t1, rhom, r.rho1}};
  }
  const double tm = 0.5 * (r.t0 + r.t1);
  return {PolarRect{r.t0, tm, r.rho0, r.rho1}, PolarRect{tm, r.t1, r.rho0, r.rho1}};
}

double tensor_sum(const std::function<double(Complex)>& fn, const PolarRect& rect,
                  const std::vector<std::pair<double, double>>& gl) {
  const double drho = rect.rho1 - rect.rho0;
  const double dt = rect.t1 - rect.t0;
  double acc = 0.0;
  for (const auto& [xr, wr] : gl) {
    const double r = std::sqrt(rect.rho0 + xr * drho);
    double row = 0.0;
    for (const auto& [xt, wt] : gl) row += wt * fn(std::polar(r, kTau * (rect.t0 + xt * dt)));
    acc += wr * row;
  }
  return acc * drho * dt;
}

struct Item {
  PolarRect rect;
  double fine;
  double err;
  bool operator<(const Item& o) const { return err < o.err; }
};

}  // namespace

double PolarRect::r_inner() const { return std::sqrt(std::max(rho0, 0.0)); }
double PolarRect::r_outer() const { return std::sqrt(std::max(rho1, 0.0)); }

double PolarRect::size() const {
  return std::max(r_outer() - r_inner(), kTau * (t1 - t0) * r_outer());
}

const std::vector<std::pair<double, double>>& gauss_legendre_unit(int order) {
  static std::map<int, std::vector<std::pair<double, double>>> cache;
  static std::mutex mu;
  std::lock_guard lock(mu);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, make_rule(order)).first;
  return it->second;
}

void append_tensor_nodes(const PolarRect& rect, int order, std::vector<QuadNode>& out) {
  const auto& gl = gauss_legendre_unit(order);
  const double drho = rect.rho1 - rect.rho0;
  const double dt = rect.t1 - rect.t0;
  for (const auto& [xr, wr] : gl) {
    const double r = std::sqrt(rect.rho0 + xr * drho);
    for (const auto& [xt, wt] : gl)
      out.push_back({std::polar(r, kTau * (rect.t0 + xt * dt)), wr * wt * drho * dt});
  }
}

std::vector<PolarRect> disc_rects(int angular, int radial_levels) {
  std::vector<double> radii{0.0};
  for (int k = 1; k <= radial_levels; ++k) radii.push_back(1.0 - std::ldexp(1.0, -k));
  radii.push_back(1.0);
  std::vector<PolarRect> out;
  for (std::size_t i = 0; i + 1 < radii.size(); ++i)
    for (int a = 0; a < angular; ++a)
      out.push_back({static_cast<double>(a) / angular, static_cast<double>(a + 1) / angular,
                     radii[i] * radii[i], radii[i + 1] * radii[i + 1]});
  return out;
}

std::vector<PolarRect> mesh_rects(const CellMesh& mesh) {
  std::vector<PolarRect> out(mesh.cell_count());
  for (std::size_t c = 0; c < mesh.cell_count(); ++c) {
    const std::size_t b = mesh.band_of(c);
    const std::size_t s = mesh.sector_of(c);
    const double ri = mesh.band_inner(b);
    const double ro = mesh.band_outer(b);
    out[c] = {mesh.sector_start(s), mesh.sector_start(s) + mesh.sector_width(s), ri * ri, ro * ro};
  }
  return out;
}

QuadResult integrate_adaptive(const std::function<double(Complex)>& fn,
                              std::span<const PolarRect> roots, const AdaptiveOptions& opt,
                              std::span<const Feature> features) {
  const auto& gl = gauss_legendre_unit(opt.order);
  std::priority_queue<Item> heap;
  double total = 0.0;
  double err_total = 0.0;
  std::size_t rects = 0;

  auto push = [&](const PolarRect& rect) {
    const double coarse = tensor_sum(fn, rect, gl);
    const auto halves = bisect(rect);
    const double fine = tensor_sum(fn, halves[0], gl) + tensor_sum(fn, halves[1], gl);
    const double err = std::abs(fine - coarse);
    heap.push({rect, fine, err});
    total += fine;
    err_total += err;
    ++rects;
  };
  std::function<void(const PolarRect&, int)> seed = [&](const PolarRect& rect, int depth) {
    if (depth < 80 && needs_forced_split(rect, features)) {
      for (const auto& h : bisect(rect)) seed(h, depth + 1);
      return;
    }
    push(rect);
  };
  for (const auto& r : roots) seed(r, 0);

  auto target = [&] { return std::max(opt.abs_tol, opt.rel_tol * std::abs(total)); };
  std::size_t since_resum = 0;
  while (err_total > target() && !heap.empty()) {
    if (rects > opt.max_rects)
      throw ConvergenceError("integrate_adaptive: rectangle budget exhausted", total, err_total);
    Item worst = heap.top();
    heap.pop();
    total -= worst.fine;
    err_total -= worst.err;
    for (const auto& h : bisect(worst.rect)) push(h);
    if (++since_resum == 4096) {
      // Refresh the running sums against cancellation drift.
      since_resum = 0;
      auto copy = heap;
      total = 0.0;
      err_total = 0.0;
      while (!copy.empty()) {
        total += copy.top().fine;
        err_total += copy.top().err;
        copy.pop();
      }
    }
  }
  double value = 0.0;
  double err = 0.0;
  while (!heap.empty()) {
    value += heap.top().fine;
    err += heap.top().err;
    heap.pop();
  }
  return {value, err, rects};
}

std::vector<QuadNode> build_rule(std::span<const PolarRect> roots, const RuleOptions& opt,
                                 std::span<const Feature> features,
                                 std::vector<std::size_t>* root_of) {
  std::vector<QuadNode> nodes;
  std::function<void(const PolarRect&, int)> visit = [&](const PolarRect& rect, int depth) {
    const double size = rect.size();
    const bool whitney = size > opt.floor && size > opt.whitney * (1.0 - rect.r_outer());
    if (depth < 80 && (whitney || needs_forced_split(rect, features))) {
      for (const auto& h : bisect(rect)) visit(h, depth + 1);
      return;
    }
    append_tensor_nodes(rect, opt.order, nodes);
  };
  if (root_of) root_of->clear();
  for (std::size_t k = 0; k < roots.size(); ++k) {
    visit(roots[k], 0);
    if (root_of) root_of->resize(nodes.size(), k);
  }
  return nodes;
}

}  // namespace bergman
