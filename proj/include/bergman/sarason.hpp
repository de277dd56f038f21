#pragma once

// Analytic symbols on the disc, the Sarason quantity b_{f,g}, truncated
// Toeplitz products, the operator P+_{f,g}, the box testing conditions for
// Toeplitz products, and the gamma / delta functionals.

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "bergman/disc_field.hpp"
#include "bergman/quadrature.hpp"
#include "bergman/report.hpp"

namespace bergman {

class AnalyticSymbol {
 public:
  using Evaluator = std::function<Complex(Complex)>;

  /// Polynomial a_0 + a_1 z + ... evaluated by Horner.
  static AnalyticSymbol from_coefficients(std::vector<Complex> coeffs, std::string name = "poly");
  /// Closed-form evaluator; `features` mark boundary singularities for
  /// quadrature, `coeffs` optionally give a Taylor truncation.
  static AnalyticSymbol from_function(Evaluator fn, std::string name,
                                      std::vector<Feature> features = {},
                                      std::vector<Complex> coeffs = {});

  Complex operator()(Complex z) const;
  bool has_coefficients() const { return !coeffs_.empty(); }
  /// Throws ArgumentError when the symbol has no coefficient form.
  const std::vector<Complex>& coefficients() const;
  const std::vector<Feature>& features() const { return features_; }
  const std::string& name() const { return name_; }

 private:
  Evaluator fn_;
  std::vector<Complex> coeffs_;
  std::vector<Feature> features_;
  std::string name_;
};

AnalyticSymbol constant_symbol(Complex c);
/// (1 - z)^s on the principal branch, with `terms` Taylor coefficients.
AnalyticSymbol one_minus_z_power(double s, int terms = 64);

/// Sample points: the origin plus rings 1 - 2^-k (k = 1..rings) carrying
/// angular0 * 2^k equally spaced points.
struct LatticeOptions {
  int rings = 6;
  int angular0 = 4;
};
std::vector<Complex> boundary_lattice(const LatticeOptions& opt);

/// |f|^2 on a quadrature rule aligned with the cells of a mesh, Whitney-refined
/// toward the circle down to `floor` and refined near the symbol's features.
struct SampleOptions {
  int mesh_depth = 6;
  int order = 6;
  double whitney = 0.5;
  double floor = 0x1p-9;
};

struct SymbolSample {
  std::shared_ptr<const CellMesh> mesh;
  std::vector<QuadNode> nodes;
  std::vector<std::size_t> cell_of;  // mesh cell per node
  std::vector<double> abs2;          // |f|^2 at the nodes
  std::vector<double> cell_average;  // of |f|^2, per mesh cell
  double norm2 = 0.0;                // ||f||_2^2

  CellField field() const;           // cell averages as a density
};
SymbolSample sample_symbol(const AnalyticSymbol& f, const SampleOptions& opt,
                           std::span<const Feature> extra_features = {});

/// B(|f|^2)(z), computed as ||f o phi_z||_2^2 with phi_z the involutive disc
/// automorphism exchanging 0 and z.
double berezin_abs2(const AnalyticSymbol& f, Complex z, double tol = 1e-7);

struct BfgResult {
  double value = 0.0;
  Complex argmax{0.0, 0.0};
  std::size_t points = 0;
};
/// max over the lattice of B(|f|^2)(z) B(|g|^2)(z).
BfgResult b_fg(const AnalyticSymbol& f, const AnalyticSymbol& g, const LatticeOptions& lattice,
               double tol = 1e-6);

/// max over the lattice of |f(z) g(z)|.
double sampled_sup_product(const AnalyticSymbol& f, const AnalyticSymbol& g,
                           const LatticeOptions& lattice);

struct ToeplitzTruncation {
  Eigen::MatrixXcd matrix;  // <T_f T_g^* e_n, e_m>, 0 <= n, m < M
  double norm = 0.0;        // largest singular value
};
/// In the orthonormal basis e_n = sqrt(n + 1) z^n.
ToeplitzTruncation toeplitz_product_matrix(const AnalyticSymbol& f, const AnalyticSymbol& g, int M);

/// |f(z)| int |g(zeta)| u(zeta) / |1 - conj(zeta) z|^2 dA(zeta).
double apply_pplus_fg(const AnalyticSymbol& f, const AnalyticSymbol& g, const CellField& u,
                      Complex z, double tol = 1e-9);

struct ConditionFour {
  double c0a = 0.0;
  double c0b = 0.0;
  int depth = 0;
  std::string surrogate = "P^0 + P^{1/3} on the cell mesh";
};
/// C0a = max_I || |f| P(|g|^2 1_{Q_I}) ||_2 / || |g| 1_{Q_I} ||_2 over both
/// grids, levels <= depth, with P the sum of the two dyadic model
/// projections; C0b swaps f and g.
ConditionFour test_conditions_4(const SymbolSample& f, const SymbolSample& g, int depth);

/// sqrt of max over I (both grids, level <= depth) of
/// log(2 pi / radian length) * int_{Q_I} |f|^2.
double gamma(const SymbolSample& f, int depth);

struct DeltaOptions {
  int degree = 16;                      // polynomials z^0..z^degree
  std::vector<Complex> anchors;         // boundary points for u_a; empty: the symbol's features
  std::vector<double> offsets{0x1p-2, 0x1p-4, 0x1p-6, 0x1p-8};  // 1 - |a| at every anchor
  SampleOptions rule{4, 8, 0.5, 0x1p-7};
  double verify_tol = 1e-6;
};
struct DeltaResult {
  double value = 0.0;        // sqrt of the generalized Rayleigh maximum
  double verified = 0.0;     // same quotient recomputed by adaptive quadrature
  bool certified = false;    // |verified - value| <= 1% of value
  std::size_t basis = 0;
};
/// Lower bound for sup_{||u||_D <= 1} ||f u||_2.
DeltaResult delta_lower(const AnalyticSymbol& f, const DeltaOptions& opt);

struct OurexReport {
  double b = 0.0;
  double norm2 = 0.0;
  double fg_sup2 = 0.0;      // sampled sup |f g|^2 over the lattice
  double gamma2 = 0.0;
  double ratio = 0.0;        // b / (norm2 + fg_sup2 + gamma2)
};
OurexReport ourex_bound_check(const AnalyticSymbol& f, const AnalyticSymbol& g,
                              const SymbolSample& sf, const LatticeOptions& lattice, int depth);

struct PairOptions {
  SampleOptions sample;
  LatticeOptions lattice;
  int depth = 5;      // interval levels for C0 and gamma, <= sample.mesh_depth
  int toeplitz_m = 32;
  double tol = 1e-6;  // relative tolerance of the Berezin quadratures
  DeltaOptions delta;
};
/// {b_fg, toeplitz_norm, C0a, C0b, gamma, delta_lower, depth, M}; the
/// Toeplitz entry is null unless both symbols carry coefficients.
Json sarason_pair(const AnalyticSymbol& f, const AnalyticSymbol& g, const PairOptions& opt);

Json to_json(const OurexReport& r);
Json to_json(const ConditionFour& c);

}  // namespace bergman
