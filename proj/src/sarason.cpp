#include "bergman/sarason.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "bergman/bekolle.hpp"
#include "bergman/kernel_ops.hpp"

namespace bergman {

namespace {

constexpr double kTau = 2.0 * std::numbers::pi;

Complex horner(const std::vector<Complex>& c, Complex z) {
  Complex acc{0.0, 0.0};
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * z + *it;
  return acc;
}

void require_open_disc(Complex z, const char* what) {
  if (!(std::abs(z) < 1.0)) throw ArgumentError(std::string(what) + ": point must lie in the open disc");
}

// The rapid-variation point of anything composed with phi_z or weighted by a
// kernel centered at z.
void push_boundary_feature(Complex z, std::vector<Feature>& out) {
  const double r = std::abs(z);
  if (r >= 0.5) out.push_back({z / r, 0.5 * (1.0 - r)});
}

Complex automorphism(Complex z, Complex w) { return (z - w) / (1.0 - std::conj(z) * w); }

AdaptiveOptions adaptive(double tol, int order = 8) {
  AdaptiveOptions o;
  o.abs_tol = 0.1 * tol;
  o.rel_tol = tol;
  o.order = order;
  return o;
}

double rayleigh_top(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& d, Eigen::VectorXcd& best) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ed(d);
  const Eigen::VectorXd& ev = ed.eigenvalues();
  const double top = ev.maxCoeff();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev[i] > 1e-12 * top) keep.push_back(i);
  Eigen::MatrixXcd t(d.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k)
    t.col(static_cast<Eigen::Index>(k)) = ed.eigenvectors().col(keep[k]) / std::sqrt(ev[keep[k]]);
  const Eigen::MatrixXcd c = t.adjoint() * a * t;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ec(c);
  const Eigen::Index last = ec.eigenvalues().size() - 1;
  best = t * ec.eigenvectors().col(last);
  return ec.eigenvalues()[last];
}

}  // namespace

AnalyticSymbol AnalyticSymbol::from_coefficients(std::vector<Complex> coeffs, std::string name) {
  if (coeffs.empty()) throw ArgumentError("from_coefficients: empty coefficient list");
  AnalyticSymbol s;
  s.coeffs_ = std::move(coeffs);
  s.name_ = std::move(name);
  s.fn_ = [c = s.coeffs_](Complex z) { return horner(c, z); };
  return s;
}

AnalyticSymbol AnalyticSymbol::from_function(Evaluator fn, std::string name,
                                             std::vector<Feature> features,
                                             std::vector<Complex> coeffs) {
  if (!fn) throw ArgumentError("from_function: empty evaluator");
  AnalyticSymbol s;
  s.fn_ = std::move(fn);
  s.name_ = std::move(name);
  s.features_ = std::move(features);
  s.coeffs_ = std::move(coeffs);
  return s;
}

Complex AnalyticSymbol::operator()(Complex z) const { return fn_(z); }

const std::vector<Complex>& AnalyticSymbol::coefficients() const {
  if (coeffs_.empty()) throw ArgumentError("symbol '" + name_ + "' has no coefficient form");
  return coeffs_;
}

AnalyticSymbol constant_symbol(Complex c) {
  return AnalyticSymbol::from_coefficients({c}, "const");
}

AnalyticSymbol one_minus_z_power(double s, int terms) {
  if (terms < 1) throw ArgumentError("one_minus_z_power: need at least one term");
  std::vector<Complex> c(static_cast<std::size_t>(terms));
  c[0] = 1.0;
  for (int k = 0; k + 1 < terms; ++k) c[k + 1] = c[k] * ((k - s) / (k + 1.0));
  std::vector<Feature> feats;
  if (!(s >= 0.0 && s == std::floor(s))) feats.push_back({Complex{1.0, 0.0}, 1e-6});
  return AnalyticSymbol::from_function(
      [s](Complex z) { return std::exp(s * std::log(1.0 - z)); },
      "(1-z)^" + format_double(s), std::move(feats), std::move(c));
}

std::vector<Complex> boundary_lattice(const LatticeOptions& opt) {
  if (opt.rings < 0 || opt.angular0 < 1) throw ArgumentError("boundary_lattice: bad options");
  std::vector<Complex> out{Complex{0.0, 0.0}};
  for (int k = 1; k <= opt.rings; ++k) {
    const double r = 1.0 - std::ldexp(1.0, -k);
    const long n = static_cast<long>(opt.angular0) << k;
    for (long j = 0; j < n; ++j) out.push_back(std::polar(r, kTau * j / n));
  }
  return out;
}

CellField SymbolSample::field() const { return CellField(mesh, cell_average, FieldKind::Density); }

SymbolSample sample_symbol(const AnalyticSymbol& f, const SampleOptions& opt,
                           std::span<const Feature> extra_features) {
  SymbolSample s;
  s.mesh = build_mesh(opt.mesh_depth);
  std::vector<Feature> feats(f.features());
  feats.insert(feats.end(), extra_features.begin(), extra_features.end());
  const auto roots = mesh_rects(*s.mesh);
  s.nodes = build_rule(roots, RuleOptions{opt.order, opt.whitney, opt.floor}, feats, &s.cell_of);
  s.abs2.resize(s.nodes.size());
  parallel_for(s.nodes.size(), [&](std::size_t i) { s.abs2[i] = std::norm(f(s.nodes[i].z)); });
  s.cell_average.assign(s.mesh->cell_count(), 0.0);
  for (std::size_t i = 0; i < s.nodes.size(); ++i) {
    const double m = s.nodes[i].weight * s.abs2[i];
    s.cell_average[s.cell_of[i]] += m;
    s.norm2 += m;
  }
  for (std::size_t c = 0; c < s.cell_average.size(); ++c) s.cell_average[c] /= s.mesh->cell_area(c);
  return s;
}

double berezin_abs2(const AnalyticSymbol& f, Complex z, double tol) {
  require_open_disc(z, "berezin_abs2");
  std::vector<Feature> feats;
  push_boundary_feature(z, feats);
  for (const auto& ft : f.features()) {
    // phi_z is an involution, so the singular point c of f becomes phi_z(c).
    const double stretch = (1.0 - std::norm(z)) / std::norm(1.0 - std::conj(z) * ft.center);
    feats.push_back({automorphism(z, ft.center), std::max(ft.scale * stretch, 1e-14)});
  }
  const auto roots = disc_rects();
  return integrate_adaptive([&](Complex w) { return std::norm(f(automorphism(z, w))); }, roots,
                            adaptive(tol, 6), feats)
      .value;
}

BfgResult b_fg(const AnalyticSymbol& f, const AnalyticSymbol& g, const LatticeOptions& lattice,
               double tol) {
  const auto pts = boundary_lattice(lattice);
  std::vector<double> prod(pts.size());
  parallel_for(pts.size(), [&](std::size_t i) {
    const double bf = berezin_abs2(f, pts[i], tol);
    prod[i] = bf * (&f == &g ? bf : berezin_abs2(g, pts[i], tol));
  });
  const auto best = std::max_element(prod.begin(), prod.end());
  return {*best, pts[static_cast<std::size_t>(best - prod.begin())], pts.size()};
}

double sampled_sup_product(const AnalyticSymbol& f, const AnalyticSymbol& g,
                           const LatticeOptions& lattice) {
  double sup = 0.0;
  for (Complex z : boundary_lattice(lattice)) sup = std::max(sup, std::abs(f(z) * g(z)));
  return sup;
}

ToeplitzTruncation toeplitz_product_matrix(const AnalyticSymbol& f, const AnalyticSymbol& g, int M) {
  if (M < 1) throw ArgumentError("toeplitz_product_matrix: M must be positive");
  const auto& a = f.coefficients();
  const auto& b = g.coefficients();
  ToeplitzTruncation out;
  out.matrix = Eigen::MatrixXcd::Zero(M, M);
  for (int n = 0; n < M; ++n) {
    // T_g^* e_n stays inside span{e_0..e_n}.
    std::vector<Complex> v(static_cast<std::size_t>(n) + 1, 0.0);
    for (int k = 0; k <= n && k < static_cast<int>(b.size()); ++k)
      v[n - k] += std::conj(b[k]) * std::sqrt((n - k + 1.0) / (n + 1.0));
    for (int m = 0; m <= n; ++m) {
      if (v[m] == Complex{0.0, 0.0}) continue;
      for (int j = 0; j < static_cast<int>(a.size()) && m + j < M; ++j)
        out.matrix(m + j, n) += a[j] * v[m] * std::sqrt((m + 1.0) / (m + j + 1.0));
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(out.matrix);
  out.norm = svd.singularValues()[0];
  return out;
}

double apply_pplus_fg(const AnalyticSymbol& f, const AnalyticSymbol& g, const CellField& u,
                      Complex z, double tol) {
  require_open_disc(z, "apply_pplus_fg");
  const double fz = std::abs(f(z));
  if (fz == 0.0) return 0.0;
  const CellMesh& mesh = u.mesh();
  std::vector<Feature> feats(g.features());
  push_boundary_feature(z, feats);
  const auto roots = mesh_rects(mesh);
  const double integral =
      integrate_adaptive(
          [&](Complex zeta) {
            return std::abs(g(zeta)) * u[mesh.locate(zeta)] / std::norm(1.0 - std::conj(zeta) * z);
          },
          roots, adaptive(0.25 * tol), feats)
          .value;
  return fz * integral;
}

ConditionFour test_conditions_4(const SymbolSample& f, const SymbolSample& g, int depth) {
  if (f.mesh->depth() != g.mesh->depth()) throw ArgumentError("test_conditions_4: mesh mismatch");
  if (depth < 0 || depth > f.mesh->depth())
    throw ArgumentError("test_conditions_4: depth must lie in [0, mesh depth]");
  const CellMesh& m = *f.mesh;
  const auto intervals = both_grids(depth);

  auto one_side = [&](const SymbolSample& outer, const SymbolSample& inner) {
    std::vector<double> ratio(intervals.size(), 0.0);
    parallel_for(intervals.size(), [&](std::size_t k) {
      const auto cells = m.box_cells(intervals[k]);
      std::vector<double> masked(m.cell_count(), 0.0);
      double den = 0.0;
      for (std::size_t c : cells) {
        masked[c] = inner.cell_average[c];
        den += masked[c] * m.cell_area(c);
      }
      if (den <= 0.0) return;
      const CellField src(f.mesh, std::move(masked), FieldKind::Density);
      const CellField h0 = apply_pbeta(src, Beta::Zero);
      const CellField h1 = apply_pbeta(src, Beta::Third);
      double num = 0.0;
      for (std::size_t c = 0; c < m.cell_count(); ++c) {
        const double h = h0[c] + h1[c];
        num += h * h * outer.cell_average[c] * m.cell_area(c);
      }
      ratio[k] = std::sqrt(num / den);
    });
    return *std::max_element(ratio.begin(), ratio.end());
  };

  ConditionFour out;
  out.depth = depth;
  out.c0a = one_side(f, g);
  out.c0b = one_side(g, f);
  return out;
}

double gamma(const SymbolSample& f, int depth) {
  if (depth < 0 || depth > f.mesh->depth()) throw ArgumentError("gamma: depth must lie in [0, mesh depth]");
  const CellField field = f.field();
  const BoxIntegrals b0(field, Beta::Zero), b1(field, Beta::Third);
  double sup = 0.0;
  for (const auto& i : both_grids(depth)) {
    const double mass = i.beta == Beta::Zero ? b0(i) : b1(i);
    sup = std::max(sup, std::log(kTau / i.radian_length()) * mass);
  }
  return std::sqrt(sup);
}

DeltaResult delta_lower(const AnalyticSymbol& f, const DeltaOptions& opt) {
  if (opt.degree < 0) throw ArgumentError("delta_lower: degree must be nonnegative");
  std::vector<Complex> anchors = opt.anchors;
  if (anchors.empty())
    for (const auto& ft : f.features()) anchors.push_back(ft.center / std::abs(ft.center));
  std::vector<Complex> centers;  // the points a of the log family
  for (Complex zeta : anchors)
    for (double off : opt.offsets) {
      if (!(off > 0.0 && off < 1.0)) throw ArgumentError("delta_lower: offsets must lie in (0, 1)");
      centers.push_back((1.0 - off) * zeta / std::abs(zeta));
    }
  std::vector<Feature> feats;
  for (Complex a : centers) feats.push_back({a / std::abs(a), 1.0 - std::abs(a)});

  const int npoly = opt.degree + 1;
  const int nb = npoly + static_cast<int>(centers.size());
  std::vector<double> norm_l(centers.size());
  for (std::size_t k = 0; k < centers.size(); ++k)
    norm_l[k] = std::sqrt(std::log(1.0 / (1.0 - std::norm(centers[k]))));

  auto basis = [&](Complex z, Eigen::Ref<Eigen::VectorXcd> row) {
    Complex p{1.0, 0.0};
    for (int m = 0; m < npoly; ++m, p *= z) row[m] = p;
    for (std::size_t k = 0; k < centers.size(); ++k)
      row[npoly + static_cast<Eigen::Index>(k)] = -std::log(1.0 - std::conj(centers[k]) * z) / norm_l[k];
  };

  // Dirichlet Gram, D_ij = <u_j, u_i>_D, exact from the Taylor coefficients.
  Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(nb, nb);
  for (int m = 0; m < npoly; ++m) d(m, m) = m == 0 ? 1.0 : static_cast<double>(m);
  for (std::size_t k = 0; k < centers.size(); ++k) {
    const Complex a = centers[k];
    const Eigen::Index ik = npoly + static_cast<Eigen::Index>(k);
    Complex am = a;
    for (int m = 1; m < npoly; ++m, am *= a) {
      d(m, ik) = std::conj(am) / norm_l[k];
      d(ik, m) = am / norm_l[k];
    }
    for (std::size_t l = 0; l < centers.size(); ++l) {
      const Complex b = centers[l];
      d(ik, npoly + static_cast<Eigen::Index>(l)) =
          -std::log(1.0 - a * std::conj(b)) / (norm_l[k] * norm_l[l]);
    }
  }

  const SymbolSample s = sample_symbol(f, opt.rule, feats);
  const Eigen::Index nn = static_cast<Eigen::Index>(s.nodes.size());
  Eigen::MatrixXcd u(nn, nb);
  parallel_for(s.nodes.size(), [&](std::size_t i) {
    Eigen::VectorXcd row(nb);
    basis(s.nodes[i].z, row);
    u.row(static_cast<Eigen::Index>(i)) = row.transpose() * std::sqrt(s.nodes[i].weight * s.abs2[i]);
  });
  const Eigen::MatrixXcd a = u.adjoint() * u;

  Eigen::VectorXcd x;
  const double lambda = rayleigh_top(a, d, x);
  x /= std::sqrt(std::abs((x.adjoint() * d * x)(0, 0)));

  DeltaResult out;
  out.basis = static_cast<std::size_t>(nb);
  out.value = std::sqrt(std::max(lambda, 0.0));

  std::vector<Feature> vfeats(f.features());
  vfeats.insert(vfeats.end(), feats.begin(), feats.end());
  const auto roots = disc_rects();
  const double check = integrate_adaptive(
                           [&](Complex z) {
                             Eigen::VectorXcd row(nb);
                             basis(z, row);
                             return std::norm(f(z) * row.cwiseProduct(x).sum());
                           },
                           roots, adaptive(opt.verify_tol), vfeats)
                           .value;
  out.verified = std::sqrt(check);
  out.certified = std::abs(out.verified - out.value) <= 0.01 * out.value;
  return out;
}

OurexReport ourex_bound_check(const AnalyticSymbol& f, const AnalyticSymbol& g,
                              const SymbolSample& sf, const LatticeOptions& lattice, int depth) {
  OurexReport r;
  r.b = b_fg(f, g, lattice).value;
  r.norm2 = sf.norm2;
  const double sup = sampled_sup_product(f, g, lattice);
  r.fg_sup2 = sup * sup;
  const double gm = gamma(sf, depth);
  r.gamma2 = gm * gm;
  const double den = r.norm2 + r.fg_sup2 + r.gamma2;
  r.ratio = den > 0.0 ? r.b / den : 0.0;
  return r;
}

Json sarason_pair(const AnalyticSymbol& f, const AnalyticSymbol& g, const PairOptions& opt) {
  const SymbolSample sf = sample_symbol(f, opt.sample);
  const SymbolSample sg = sample_symbol(g, opt.sample);
  const ConditionFour c4 = test_conditions_4(sf, sg, opt.depth);
  Json toeplitz = nullptr;
  if (f.has_coefficients() && g.has_coefficients())
    toeplitz = toeplitz_product_matrix(f, g, opt.toeplitz_m).norm;
  const DeltaResult dl = delta_lower(f, opt.delta);
  return Json{{"f", f.name()},
              {"g", g.name()},
              {"b_fg", b_fg(f, g, opt.lattice, opt.tol).value},
              {"toeplitz_norm", toeplitz},
              {"C0a", c4.c0a},
              {"C0b", c4.c0b},
              {"gamma", gamma(sf, opt.depth)},
              {"delta_lower", dl.value},
              {"delta_certified", dl.certified},
              {"depth", opt.depth},
              {"M", opt.toeplitz_m},
              {"surrogate", c4.surrogate}};
}

Json to_json(const OurexReport& r) {
  return Json{{"b_fg", r.b},
              {"norm2", r.norm2},
              {"sampled_sup_fg2", r.fg_sup2},
              {"gamma2", r.gamma2},
              {"ratio", r.ratio}};
}

Json to_json(const ConditionFour& c) {
  return Json{{"C0a", c.c0a}, {"C0b", c.c0b}, {"depth", c.depth}, {"surrogate", c.surrogate}};
}

}  // namespace bergman
