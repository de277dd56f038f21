#include "bergman/two_weight.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "bergman/quadrature.hpp"
#include "bergman/random.hpp"

namespace bergman {

namespace {

double conjugate(double p) {
  if (!(p > 1.0) || !std::isfinite(p)) throw ArgumentError("exponent p must lie in (1, inf)");
  return p / (p - 1.0);
}

// Cell lists and areas of every cube of a spec.
struct Family {
  const CellMesh* mesh;
  std::vector<std::vector<std::size_t>> cells;
  std::vector<double> area;

  Family(const DyadicOperatorSpec& spec, const CellMesh& m) : mesh(&m) {
    spec.validate(m);
    cells.reserve(spec.cubes.size());
    for (const auto& q : spec.cubes) {
      cells.push_back(m.box_cells(q));
      double a = 0.0;
      for (std::size_t c : cells.back()) a += m.cell_area(c);
      area.push_back(a);
    }
  }

  double integral(std::size_t q, std::span<const double> f) const {
    double acc = 0.0;
    for (std::size_t c : cells[q]) acc += f[c] * mesh->cell_area(c);
    return acc;
  }
};

void require_same_mesh(const CellField& a, const CellField& b) {
  if (&a.mesh() != &b.mesh()) throw ArgumentError("fields live on different meshes");
}

std::vector<double> product(const CellField& a, const CellField& b) {
  require_same_mesh(a, b);
  std::vector<double> out(a.size());
  for (std::size_t c = 0; c < a.size(); ++c) out[c] = a[c] * b[c];
  return out;
}

double lp_norm_p(std::span<const double> h, const CellField& weight, double p) {
  const CellMesh& m = weight.mesh();
  double acc = 0.0;
  for (std::size_t c = 0; c < h.size(); ++c)
    acc += std::pow(std::abs(h[c]), p) * weight[c] * m.cell_area(c);
  return acc;
}

std::vector<double> apply_raw(const DyadicOperatorSpec& spec, const Family& fam,
                              std::span<const double> f,
                              const std::function<bool(std::size_t)>& keep = {}) {
  std::vector<double> abs_f(f.size());
  for (std::size_t c = 0; c < f.size(); ++c) abs_f[c] = std::abs(f[c]);
  std::vector<double> out(f.size(), 0.0);
  for (std::size_t q = 0; q < spec.cubes.size(); ++q) {
    if (keep && !keep(q)) continue;
    if (spec.tau[q] == 0.0) continue;
    const double v = spec.tau[q] * fam.integral(q, abs_f) / fam.area[q];
    for (std::size_t c : fam.cells[q]) out[c] += v;
  }
  return out;
}

// One testing constant: sup_Q ||T(u 1_Q)||^e_{L^e(v)} / u(Q), globally and
// with only the cubes inside Q.
std::pair<double, double> testing_pair(const DyadicOperatorSpec& spec, const Family& fam,
                                       const CellField& u, const CellField& v, double e) {
  const std::size_t n = spec.cubes.size();
  std::vector<double> mass(n);
  for (std::size_t q = 0; q < n; ++q) mass[q] = fam.integral(q, u.values());
  double global = 0.0;
  double local = 0.0;
  std::vector<double> h_all(u.size());
  std::vector<double> h_in(u.size());
  for (std::size_t q = 0; q < n; ++q) {
    std::fill(h_all.begin(), h_all.end(), 0.0);
    std::fill(h_in.begin(), h_in.end(), 0.0);
    const DyadicInterval& Q = spec.cubes[q];
    for (std::size_t pi = 0; pi < n; ++pi) {
      const DyadicInterval& P = spec.cubes[pi];
      double overlap;
      bool inside = false;
      if (Q.contains(P)) {
        overlap = mass[pi];
        inside = true;
      } else if (P.contains(Q)) {
        overlap = mass[q];
      } else {
        continue;
      }
      const double coef = spec.tau[pi] * overlap / fam.area[pi];
      for (std::size_t c : fam.cells[pi]) {
        h_all[c] += coef;
        if (inside) h_in[c] += coef;
      }
    }
    global = std::max(global, lp_norm_p(h_all, v, e) / mass[q]);
    local = std::max(local, lp_norm_p(h_in, v, e) / mass[q]);
  }
  return {global, local};
}

CellField ones_like(const CellField& f) {
  return CellField::constant(f.mesh_ptr(), 1.0, FieldKind::Weight);
}

CellField cellwise(const CellField& f, double (*fn)(double)) {
  std::vector<double> out(f.size());
  for (std::size_t c = 0; c < f.size(); ++c) out[c] = fn(f[c]);
  return f.with_values(std::move(out));
}

double relative_gap(double a, double b) {
  return std::abs(a - b) / std::max(std::abs(a), 1e-300);
}

}  // namespace

DyadicOperatorSpec DyadicOperatorSpec::pbeta(const CellMesh& mesh, Beta beta) {
  DyadicOperatorSpec spec;
  spec.beta = beta;
  spec.cubes = build_grid(beta, mesh.depth());
  for (const auto& i : spec.cubes) {
    const double len = i.length();
    spec.tau.push_back(CarlesonBox(i).area() / (len * len));
  }
  return spec;
}

void DyadicOperatorSpec::validate(const CellMesh& mesh) const {
  if (cubes.size() != tau.size()) throw ArgumentError("operator spec: cubes and tau differ in size");
  for (std::size_t q = 0; q < cubes.size(); ++q) {
    if (!(tau[q] >= 0.0) || !std::isfinite(tau[q]))
      throw ArgumentError("operator spec: tau must be finite and nonnegative");
    if (cubes[q].beta != beta) throw ArgumentError("operator spec: cube from the other grid");
    if (!mesh.resolves(cubes[q])) throw ArgumentError("operator spec: cube finer than the mesh");
  }
}

DyadicOperatorSpec DyadicOperatorSpec::scaled(double factor) const {
  DyadicOperatorSpec out = *this;
  for (double& t : out.tau) t *= factor;
  return out;
}

CellField dual_weight(const CellField& v, double p) {
  const double e = 1.0 - conjugate(p);
  std::vector<double> out(v.size());
  for (std::size_t c = 0; c < v.size(); ++c) {
    if (!(v[c] > 0.0)) throw ArgumentError("dual_weight: weight must be positive");
    out[c] = std::pow(v[c], e);
    if (!std::isfinite(out[c]) || out[c] < 1e-300)
      throw std::overflow_error("dual_weight: cell " + std::to_string(c) + " leaves double range");
  }
  return v.with_values(std::move(out)).as(FieldKind::Weight);
}

CellField apply_T(const DyadicOperatorSpec& spec, const CellField& f) {
  const Family fam(spec, f.mesh());
  return CellField(f.mesh_ptr(), apply_raw(spec, fam, f.values()), FieldKind::Density);
}

CellField apply_T_local(const DyadicOperatorSpec& spec, const CellField& f,
                        const DyadicInterval& q) {
  if (q.beta != spec.beta) throw ArgumentError("apply_T_local: interval from the other grid");
  if (!f.mesh().resolves(q)) throw ArgumentError("apply_T_local: interval finer than the mesh");
  const Family fam(spec, f.mesh());
  auto keep = [&](std::size_t k) { return q.contains(spec.cubes[k]); };
  return CellField(f.mesh_ptr(), apply_raw(spec, fam, f.values(), keep), FieldKind::Density);
}

TestingConstants testing_constants(const DyadicOperatorSpec& spec, const CellField& w,
                                   const CellField& sigma, double p) {
  require_same_mesh(w, sigma);
  const double pp = conjugate(p);
  const Family fam(spec, w.mesh());
  TestingConstants out;
  std::tie(out.c0, out.c0_local) = testing_pair(spec, fam, w, sigma, p);
  std::tie(out.c0_star, out.c0_star_local) = testing_pair(spec, fam, sigma, w, pp);
  return out;
}

double weighted_average(const CellField& w, const CellField& f, const DyadicInterval& q) {
  require_same_mesh(w, f);
  const CellMesh& m = w.mesh();
  double num = 0.0;
  double den = 0.0;
  for (std::size_t c : m.box_cells(q)) {
    num += std::abs(f[c]) * w[c] * m.cell_area(c);
    den += w[c] * m.cell_area(c);
  }
  return num / den;
}

CellField weighted_maximal(const CellField& w, const CellField& f, Beta beta) {
  require_same_mesh(w, f);
  const CellMesh& m = w.mesh();
  std::vector<double> fw(f.size());
  for (std::size_t c = 0; c < f.size(); ++c) fw[c] = std::abs(f[c]) * w[c];
  const BoxIntegrals num(CellField(f.mesh_ptr(), std::move(fw), FieldKind::Density), beta);
  const BoxIntegrals den(w, beta);
  std::vector<double> out(f.size(), 0.0);
  for (const auto& q : build_grid(beta, m.depth())) {
    const double avg = num(q) / den(q);
    for (std::size_t c : m.box_cells(q)) out[c] = std::max(out[c], avg);
  }
  return CellField(f.mesh_ptr(), std::move(out), FieldKind::Density);
}

std::vector<std::size_t> CoronaForest::bucket_sizes() const {
  std::vector<std::size_t> out(stopping.size(), 0);
  for (std::size_t l : lambda) ++out[l];
  return out;
}

CoronaForest corona(const CellField& w, const CellField& f,
                    const std::vector<DyadicInterval>& family) {
  CoronaForest forest;
  forest.cubes = family;
  const std::size_t n = family.size();
  for (const auto& q : family) forest.average.push_back(weighted_average(w, f, q));

  auto strictly_inside = [&](std::size_t a, std::size_t b) {
    return family[b].contains(family[a]) && !(family[a] == family[b]);
  };
  // Maximal members of `candidates`: not strictly inside another candidate.
  auto maximal = [&](const std::vector<std::size_t>& candidates) {
    std::vector<std::size_t> out;
    for (std::size_t a : candidates) {
      bool covered = false;
      for (std::size_t b : candidates)
        if (b != a && strictly_inside(a, b)) { covered = true; break; }
      if (!covered && std::none_of(out.begin(), out.end(),
                                   [&](std::size_t o) { return family[o] == family[a]; }))
        out.push_back(a);
    }
    return out;
  };

  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  for (std::size_t r : maximal(all)) {
    forest.stopping.push_back(r);
    forest.generation.push_back(0);
    forest.stop_parent.push_back(-1);
  }
  for (std::size_t k = 0; k < forest.stopping.size(); ++k) {
    const std::size_t L = forest.stopping[k];
    std::vector<std::size_t> candidates;
    for (std::size_t q = 0; q < n; ++q)
      if (strictly_inside(q, L) && forest.average[q] > 4.0 * forest.average[L])
        candidates.push_back(q);
    for (std::size_t c : maximal(candidates)) {
      forest.stopping.push_back(c);
      forest.generation.push_back(forest.generation[k] + 1);
      forest.stop_parent.push_back(static_cast<long>(k));
    }
  }

  forest.lambda.assign(n, 0);
  for (std::size_t q = 0; q < n; ++q) {
    int best_level = -1;
    for (std::size_t k = 0; k < forest.stopping.size(); ++k) {
      const DyadicInterval& L = family[forest.stopping[k]];
      if (L.contains(family[q]) && L.level > best_level) {
        best_level = L.level;
        forest.lambda[q] = k;
      }
    }
  }
  return forest;
}

LinearizationReport corona_linearization_check(const CoronaForest& forest, const CellField& w,
                                               const CellField& f, double p) {
  require_same_mesh(w, f);
  LinearizationReport rep;
  const CellMesh& m = w.mesh();
  const auto& cubes = forest.cubes;

  for (std::size_t k = 0; k < forest.stopping.size(); ++k) {
    if (forest.stop_parent[k] < 0) continue;
    const std::size_t parent = forest.stopping[static_cast<std::size_t>(forest.stop_parent[k])];
    if (!(forest.average[forest.stopping[k]] > 4.0 * forest.average[parent]))
      rep.strict_growth = false;
  }
  std::size_t total = 0;
  for (std::size_t s : forest.bucket_sizes()) total += s;
  rep.partition = total == cubes.size();
  for (std::size_t q = 0; q < cubes.size(); ++q)
    if (!cubes[forest.stopping[forest.lambda[q]]].contains(cubes[q])) rep.partition = false;

  if (cubes.empty()) return rep;
  const CellField maxf = weighted_maximal(w, f, cubes.front().beta);
  std::vector<double> sum(m.cell_count(), 0.0);
  std::vector<double> top(m.cell_count(), 0.0);
  double carleson = 0.0;
  for (std::size_t L : forest.stopping) {
    const double avg = forest.average[L];
    double wl = 0.0;
    for (std::size_t c : m.box_cells(cubes[L])) {
      sum[c] += avg;
      top[c] = std::max(top[c], avg);
      wl += w[c] * m.cell_area(c);
    }
    carleson += std::pow(avg, p) * wl;
  }
  for (std::size_t c = 0; c < m.cell_count(); ++c) {
    if (sum[c] == 0.0) continue;
    rep.max_chain_ratio = std::max(rep.max_chain_ratio, sum[c] / top[c]);
    rep.max_maximal_ratio = std::max(rep.max_maximal_ratio, sum[c] / maxf[c]);
  }
  rep.carleson_constant = carleson / lp_norm_p(f.values(), w, p);
  return rep;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_families(
    const DyadicOperatorSpec& spec, const CellField& w, const CellField& sigma,
    const CellField& f, const CellField& g, double p) {
  require_same_mesh(w, sigma);
  const double pp = conjugate(p);
  const Family fam(spec, w.mesh());
  const auto fw = product(f, w);
  const auto gs = product(g, sigma);
  std::vector<std::size_t> q1, q2;
  for (std::size_t q = 0; q < spec.cubes.size(); ++q) {
    const double wq = fam.integral(q, w.values());
    const double sq = fam.integral(q, sigma.values());
    const double lhs = std::pow(fam.integral(q, fw) / wq, p) * wq;
    const double rhs = std::pow(fam.integral(q, gs) / sq, pp) * sq;
    (lhs >= rhs ? q1 : q2).push_back(q);
  }
  return {q1, q2};
}

double bilinear_norm(const DyadicOperatorSpec& spec, const CellField& a, const CellField& b,
                     const CellField& u, const CellField& o) {
  require_same_mesh(a, b);
  require_same_mesh(a, u);
  require_same_mesh(a, o);
  const CellMesh& m = a.mesh();
  const Family fam(spec, m);

  // Cells in exactly the same cubes are interchangeable: collapse them to
  // one atom whose input/output masses add in quadrature.
  std::vector<std::vector<std::uint32_t>> signature(m.cell_count());
  for (std::size_t q = 0; q < spec.cubes.size(); ++q)
    for (std::size_t c : fam.cells[q]) signature[c].push_back(static_cast<std::uint32_t>(q));
  std::map<std::vector<std::uint32_t>, std::size_t> atom_of;
  std::vector<double> in_mass, out_mass;
  std::vector<std::vector<std::uint32_t>> atom_sig;
  for (std::size_t c = 0; c < m.cell_count(); ++c) {
    if (signature[c].empty()) continue;
    auto [it, fresh] = atom_of.try_emplace(signature[c], in_mass.size());
    if (fresh) {
      in_mass.push_back(0.0);
      out_mass.push_back(0.0);
      atom_sig.push_back(signature[c]);
    }
    const double area = m.cell_area(c);
    in_mass[it->second] += b[c] * b[c] * area / u[c];
    out_mass[it->second] += a[c] * a[c] * o[c] * area;
  }
  const auto n = static_cast<Eigen::Index>(in_mass.size());
  if (n == 0) return 0.0;

  std::vector<std::vector<std::size_t>> atoms_in(spec.cubes.size());
  for (std::size_t k = 0; k < atom_sig.size(); ++k)
    for (std::uint32_t q : atom_sig[k]) atoms_in[q].push_back(k);
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t q = 0; q < spec.cubes.size(); ++q) {
    const double v = spec.tau[q] / fam.area[q];
    for (std::size_t i : atoms_in[q])
      for (std::size_t j : atoms_in[q]) K(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += v;
  }
  Eigen::VectorXd A(n), B(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    A(i) = std::sqrt(in_mass[static_cast<std::size_t>(i)]);
    B(i) = std::sqrt(out_mass[static_cast<std::size_t>(i)]);
  }
  // ||diag(B) K diag(A)||^2 is the top eigenvalue of the symmetric Gram matrix.
  const Eigen::MatrixXd M = B.asDiagonal() * K * A.asDiagonal();
  const Eigen::MatrixXd G = M.transpose() * M;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(G, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw ConvergenceError("bilinear_norm: eigensolver did not converge", M.norm(), M.norm());
  return std::sqrt(std::max(0.0, solver.eigenvalues()(n - 1)));
}

double operator_norm_exact(const DyadicOperatorSpec& spec, const CellField& w,
                           const CellField& sigma) {
  return bilinear_norm(spec, ones_like(w), w, w, sigma);
}

double operator_norm_ascent(const DyadicOperatorSpec& spec, const CellField& w,
                            const CellField& sigma, double p, int starts, std::uint64_t seed) {
  require_same_mesh(w, sigma);
  const double pp = conjugate(p);
  const Family fam(spec, w.mesh());
  const std::size_t n = w.size();
  Rng rng(seed);
  double best = 0.0;
  std::vector<double> f(n), g(n), tmp(n);

  // x <- x^{e-1} / ||x||^{e-1}_{L^e(weight)}; returns ||x||_{L^e(weight)}.
  auto dualize = [](std::vector<double>& x, const CellField& weight, double e) {
    const double norm = std::pow(lp_norm_p(x, weight, e), 1.0 / e);
    if (norm == 0.0) return 0.0;
    for (double& v : x) v = std::pow(v / norm, e - 1.0);
    return norm;
  };

  for (int s = 0; s < starts; ++s) {
    for (double& v : f) v = rng.uniform(0.05, 1.0);
    const double fn = std::pow(lp_norm_p(f, w, p), 1.0 / p);
    for (double& v : f) v /= fn;
    double prev = 0.0;
    int stalls = 0;
    for (int it = 0; it < 20000 && stalls < 3; ++it) {
      for (std::size_t c = 0; c < n; ++c) tmp[c] = f[c] * w[c];
      g = apply_raw(spec, fam, tmp);
      if (dualize(g, sigma, p) == 0.0) break;
      for (std::size_t c = 0; c < n; ++c) tmp[c] = g[c] * sigma[c];
      f = apply_raw(spec, fam, tmp);
      const double value = dualize(f, w, pp);
      if (value == 0.0) break;
      stalls = std::abs(value - prev) <= 1e-15 * value ? stalls + 1 : 0;
      prev = value;
    }
    best = std::max(best, prev);
  }
  return best;
}

RandomInstance random_instance(int depth, std::uint64_t seed) {
  if (depth < 0 || depth > 12) throw ArgumentError("random_instance: depth must lie in [0, 12]");
  const auto mesh = build_mesh(std::max(depth, 1));
  Rng rng(seed);
  DyadicOperatorSpec spec;
  spec.beta = rng.coin() ? Beta::Third : Beta::Zero;
  for (const auto& i : build_grid(spec.beta, depth)) {
    if (rng.uniform() < 0.75) {
      spec.cubes.push_back(i);
      spec.tau.push_back(rng.log_uniform(0x1p-4, 0x1p4));
    }
  }
  if (spec.cubes.empty()) {
    spec.cubes.push_back({spec.beta, 0, 0});
    spec.tau.push_back(rng.log_uniform(0x1p-4, 0x1p4));
  }
  std::vector<double> w(mesh->cell_count()), s(mesh->cell_count());
  for (double& v : w) v = rng.log_uniform(0x1p-6, 0x1p6);
  for (double& v : s) v = rng.log_uniform(0x1p-6, 0x1p6);
  return RandomInstance{seed, depth, mesh, std::move(spec),
                        CellField(mesh, std::move(w), FieldKind::Weight),
                        CellField(mesh, std::move(s), FieldKind::Weight)};
}

TrialResult verify_theorem(const RandomInstance& inst, double p) {
  if (p != 2.0) throw ArgumentError("verify_theorem: exact norms need p = 2");
  TrialResult r;
  r.seed = inst.seed;
  r.depth = inst.depth;
  r.p = p;
  r.testing = testing_constants(inst.spec, inst.w, inst.sigma, p);
  r.norm = operator_norm_exact(inst.spec, inst.w, inst.sigma);
  const double sum = r.testing.c0 + r.testing.c0_star;
  const double n2 = r.norm * r.norm;
  r.ratio = n2 / sum;
  r.c_measured = r.norm / std::sqrt(sum);
  r.necessity = std::max(r.testing.c0, r.testing.c0_star) <= n2 * (1.0 + 1e-9);
  r.local_below_global = r.testing.c0_local <= r.testing.c0 * (1.0 + 1e-12) &&
                         r.testing.c0_star_local <= r.testing.c0_star * (1.0 + 1e-12);
  return r;
}

std::vector<TrialResult> verify_battery(int trials, int max_depth, std::uint64_t base_seed) {
  if (trials < 0 || max_depth < 1) throw ArgumentError("verify_battery: bad trial count or depth");
  std::vector<TrialResult> out(static_cast<std::size_t>(trials));
  parallel_for(out.size(), [&](std::size_t k) {
    const int depth = 1 + static_cast<int>(k % static_cast<std::size_t>(max_depth));
    out[k] = verify_theorem(random_instance(depth, base_seed + k));
  });
  return out;
}

Json to_json(const TrialResult& r) {
  return Json{{"seed", r.seed},
              {"depth", r.depth},
              {"p", r.p},
              {"C0", r.testing.c0},
              {"C0star", r.testing.c0_star},
              {"C0_local", r.testing.c0_local},
              {"C0star_local", r.testing.c0_star_local},
              {"norm", r.norm},
              {"ratio", r.ratio},
              {"c_measured", r.c_measured},
              {"necessity", r.necessity}};
}

CsvTable trials_csv(const std::vector<TrialResult>& trials) {
  CsvTable t;
  t.header = {"seed", "depth", "C0", "C0star", "C0_local", "C0star_local", "norm", "ratio",
              "c_measured", "necessity"};
  for (const auto& r : trials)
    t.add_row({std::to_string(r.seed), std::to_string(r.depth), format_double(r.testing.c0),
               format_double(r.testing.c0_star), format_double(r.testing.c0_local),
               format_double(r.testing.c0_star_local), format_double(r.norm),
               format_double(r.ratio), format_double(r.c_measured), r.necessity ? "1" : "0"});
  return t;
}

double formulation_gap(const DyadicOperatorSpec& spec, const CellField& v, const CellField& w_out) {
  const CellField one = ones_like(v);
  const CellField s = dual_weight(v, 2.0);
  const double n1 = bilinear_norm(spec, one, one, v, w_out);
  const double n2 = bilinear_norm(spec, one, s, s, w_out);
  const double n3 = bilinear_norm(spec, cellwise(w_out, [](double x) { return std::sqrt(x); }),
                                  cellwise(s, [](double x) { return std::sqrt(x); }), one, one);
  return std::max(relative_gap(n1, n2), relative_gap(n1, n3));
}

InvarianceReport delta_invariance(const RandomInstance& inst) {
  const int level = inst.mesh->depth();
  const CellField dw = coarsen(inst.w, inst.spec.beta, level);
  const CellField ds = coarsen(inst.sigma, inst.spec.beta, level);
  const auto t0 = testing_constants(inst.spec, inst.w, inst.sigma, 2.0);
  const auto t1 = testing_constants(inst.spec, dw, ds, 2.0);
  InvarianceReport r;
  r.norm_gap = relative_gap(operator_norm_exact(inst.spec, inst.w, inst.sigma),
                            operator_norm_exact(inst.spec, dw, ds));
  r.c0_gap = relative_gap(t0.c0, t1.c0);
  r.c0_star_gap = relative_gap(t0.c0_star, t1.c0_star);
  return r;
}

}  // namespace bergman
