#pragma once

// Positive dyadic operators T f = sum_Q tau_Q (E_Q |f|) 1_Q on Carleson boxes
// of one grid, their two-weight testing constants, the corona decomposition,
// and exact small-instance operator norms.

#include <cstdint>
#include <utility>
#include <vector>

#include "bergman/disc_field.hpp"
#include "bergman/report.hpp"

namespace bergman {

struct DyadicOperatorSpec {
  Beta beta = Beta::Zero;
  std::vector<DyadicInterval> cubes;  // the boxes Q_I of these intervals
  std::vector<double> tau;            // one nonnegative coefficient per cube

  /// The model operator P^beta on a mesh: every interval up to the mesh depth,
  /// tau_Q = |Q_I| / |I|^2.
  static DyadicOperatorSpec pbeta(const CellMesh& mesh, Beta beta);
  /// Throws ArgumentError on a size mismatch, a negative tau, a cube from the
  /// other grid or a cube finer than the mesh.
  void validate(const CellMesh& mesh) const;
  DyadicOperatorSpec scaled(double factor) const;
};

/// sigma = v^{1 - p'} cellwise.
CellField dual_weight(const CellField& v, double p);

CellField apply_T(const DyadicOperatorSpec& spec, const CellField& f);
/// Only the cubes contained in Q.
CellField apply_T_local(const DyadicOperatorSpec& spec, const CellField& f,
                        const DyadicInterval& q);

struct TestingConstants {
  double c0 = 0.0;             // sup_Q ||T(w 1_Q)||^p_{L^p(sigma)} / w(Q)
  double c0_star = 0.0;        // sup_Q ||T(sigma 1_Q)||^{p'}_{L^{p'}(w)} / sigma(Q)
  double c0_local = 0.0;       // same with T_{in,Q}
  double c0_star_local = 0.0;
};
TestingConstants testing_constants(const DyadicOperatorSpec& spec, const CellField& w,
                                   const CellField& sigma, double p);

/// E^w_Q |f| = (1 / w(Q)) int_Q |f| w.
double weighted_average(const CellField& w, const CellField& f, const DyadicInterval& q);

/// Cellwise sup of E^w_Q |f| over all boxes of grid beta containing the cell.
CellField weighted_maximal(const CellField& w, const CellField& f, Beta beta);

struct CoronaForest {
  std::vector<DyadicInterval> cubes;   // the input family
  std::vector<double> average;         // E^w_Q |f| per cube
  std::vector<std::size_t> stopping;   // indices into cubes
  std::vector<int> generation;         // per stopping cube
  std::vector<long> stop_parent;       // per stopping cube, -1 for generation 0
  std::vector<std::size_t> lambda;     // per cube: position in `stopping` of its stopping cube

  /// Number of cubes in each bucket D(L), aligned with `stopping`.
  std::vector<std::size_t> bucket_sizes() const;
};

/// Stopping cubes: the maximal cubes of the family, then recursively the
/// maximal cubes strictly inside L with E^w_Q |f| > 4 E^w_L |f|.
CoronaForest corona(const CellField& w, const CellField& f,
                    const std::vector<DyadicInterval>& family);

struct LinearizationReport {
  bool strict_growth = true;        // every stopping child exceeds 4x its parent
  bool partition = true;            // buckets partition the family
  double max_chain_ratio = 0.0;     // max_x sum_{L ni x} E_L / max_{L ni x} E_L
  double max_maximal_ratio = 0.0;   // max_x sum_{L ni x} E_L / M_w f(x)
  double carleson_constant = 0.0;   // sum_L (E_L)^p w(L) / ||f||^p_{L^p(w)}
};
LinearizationReport corona_linearization_check(const CoronaForest& forest, const CellField& w,
                                               const CellField& f, double p);

/// Indices of (Q1, Q2) per the dichotomy (E^w_Q f)^p w(Q) >= (E^s_Q g)^{p'} s(Q).
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_families(
    const DyadicOperatorSpec& spec, const CellField& w, const CellField& sigma,
    const CellField& f, const CellField& g, double p);

/// Exact norm of f -> a T(b f) from L^2(u) to L^2(o), all factors cell-constant.
double bilinear_norm(const DyadicOperatorSpec& spec, const CellField& a, const CellField& b,
                     const CellField& u, const CellField& o);
/// Exact norm of T(w .) : L^2(w) -> L^2(sigma).
double operator_norm_exact(const DyadicOperatorSpec& spec, const CellField& w,
                           const CellField& sigma);
/// Lower bound on the L^p(w) -> L^p(sigma) norm of T(w .) by alternating
/// maximization of the bilinear form from random positive starts.
double operator_norm_ascent(const DyadicOperatorSpec& spec, const CellField& w,
                            const CellField& sigma, double p, int starts, std::uint64_t seed);

struct RandomInstance {
  std::uint64_t seed = 0;
  int depth = 0;
  std::shared_ptr<const CellMesh> mesh;
  DyadicOperatorSpec spec;
  CellField w;
  CellField sigma;
};
/// tau log-uniform in [2^-4, 2^4], weights log-uniform in [2^-6, 2^6] per
/// cell, each interval up to `depth` kept with probability 3/4.
RandomInstance random_instance(int depth, std::uint64_t seed);

struct TrialResult {
  std::uint64_t seed = 0;
  int depth = 0;
  double p = 2.0;
  TestingConstants testing;
  double norm = 0.0;
  double ratio = 0.0;       // norm^2 / (C0 + C0*)
  double c_measured = 0.0;  // norm / (C0 + C0*)^{1/2}
  bool necessity = false;   // max(C0, C0*) <= norm^2 (1 + 1e-9)
  bool local_below_global = false;
};
TrialResult verify_theorem(const RandomInstance& inst, double p = 2.0);
/// Trial k uses depth 1 + k % max_depth and seed base_seed + k.
std::vector<TrialResult> verify_battery(int trials, int max_depth, std::uint64_t base_seed);
Json to_json(const TrialResult& r);
CsvTable trials_csv(const std::vector<TrialResult>& trials);

/// Largest relative disagreement between the three equivalent p = 2
/// formulations: T on L^2(v) -> L^2(w_out), T(s .) on L^2(s) -> L^2(w_out),
/// and w_out^{1/2} T(s^{1/2} .) on unweighted L^2, with s = v^{-1}.
double formulation_gap(const DyadicOperatorSpec& spec, const CellField& v, const CellField& w_out);

struct InvarianceReport {
  double norm_gap = 0.0;
  double c0_gap = 0.0;
  double c0_star_gap = 0.0;
};
/// Relative changes in norm, C0, C0* when w and sigma are replaced by their
/// top-half averages on the operator's grid.
InvarianceReport delta_invariance(const RandomInstance& inst);

}  // namespace bergman
