#pragma once

// The Cantor set E1, its exact metric properties, the conformal transfer to
// the disc, the Stegenga functions f_n, the outer symbol g vanishing on
// E u {1}, and the counterexample pipeline.

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "bergman/report.hpp"
#include "bergman/sarason.hpp"

namespace bergman {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// num / 2^exp, kept with the smallest exponent (odd numerator or exp = 0).
class DyadicRational {
 public:
  DyadicRational() = default;
  DyadicRational(BigInt num, unsigned exp);
  static DyadicRational integer(long v) { return DyadicRational(BigInt(v), 0); }
  static DyadicRational pow2(int k);  // 2^k for any sign of k

  const BigInt& numerator() const { return num_; }
  unsigned exponent() const { return exp_; }
  DyadicRational half() const { return DyadicRational(num_, exp_ + 1); }
  DyadicRational abs() const { return DyadicRational(num_ < 0 ? BigInt(-num_) : num_, exp_); }
  Rational rational() const;
  double to_double() const;
  std::string str() const;

  friend DyadicRational operator+(const DyadicRational& a, const DyadicRational& b);
  friend DyadicRational operator-(const DyadicRational& a, const DyadicRational& b);
  friend DyadicRational operator*(const DyadicRational& a, const DyadicRational& b);
  friend bool operator==(const DyadicRational& a, const DyadicRational& b) = default;
  friend std::strong_ordering operator<=>(const DyadicRational& a, const DyadicRational& b);

 private:
  BigInt num_ = 0;
  unsigned exp_ = 0;
};

/// lambda_0 .. lambda_n with lambda_0 = 1, lambda_j = 2^{-2^j}.
std::vector<DyadicRational> lambda_seq(int n);
/// p_n = lambda_0 ... lambda_n = 2^{-(2^{n+1} - 2)}.
DyadicRational scale_product(int n);
/// log2 p_n.
long log2_scale_product(int n);

/// All x_alpha with alpha supported in {1..n}, sorted. n <= 12.
std::vector<DyadicRational> generation_points(int n);

struct CantorSet {
  int n = 0;
  std::vector<DyadicRational> lambda;
  std::vector<DyadicRational> p;       // p_0 .. p_n
  std::vector<DyadicRational> points;  // generation n, sorted
};
CantorSet cantor_set(int n);

/// max over 1 <= j < n of sum_{j < m <= n} (1 - l_m) p_{m-1} / ((1 - l_j) p_{j-1}).
Rational tau_value(int n);
Rational tau_bound();  // 5/12

struct KstepResult {
  Rational min_ratio;  // min |(x_a + x_b)/2 - x_c| / (x_b - x_a)
  Rational bound;      // (1/2 - tau) / (1 + tau), tau = tau_value(n)
  bool holds = false;
};
KstepResult kstep_check(int n);

struct ConditionK {
  double min_ratio = 0.0;  // min over intervals of sup_{x in I} dist(x, points) / |I|
  std::size_t trials = 0;
  bool holds = false;      // min_ratio >= 1/4
};
/// Random intervals inside [-1/4, 5/4]; the sup of the distance function is
/// taken over the endpoints and the gap midpoints inside I, which is exact.
ConditionK condition_K_check(int n, std::size_t trials, std::uint64_t seed);

/// i (1 + z) / (1 - z), disc onto the upper half-plane.
Complex phi(Complex z);
/// (zeta - i) / (zeta + i).
Complex phi_inv(Complex zeta);

struct StegengaFamily {
  int n = 0;
  long log2_p = 0;                  // log2 p_n
  double log2_prefactor = 0.0;      // log2(2^{-n/2} p_n)
  std::vector<double> x;            // generation points, rounded
  std::vector<Complex> poles;       // x_k - i p_n
  std::vector<Complex> preimages;   // phi_inv(poles), outside the closed disc
  std::vector<double> offsets;      // |preimage| - 1
  bool admissible = false;          // p_n < minimal gap / 2, exactly
};
StegengaFamily build_poles(int n);

/// f_n(z) = 2^{-n/2} p_n sum_k phi'(z) / (phi(z) - z_nk)^2.
Complex eval_fn(const StegengaFamily& fam, Complex z);
AnalyticSymbol stegenga_symbol(const StegengaFamily& fam);
/// Sampled sup of 2^{-n/2} p_n sum_k 1 / |phi(z) - z_nk| over the lattice and
/// radial probes below each pole.
double pole_sum_sup(const StegengaFamily& fam, const LatticeOptions& lattice);

/// Outer function with boundary modulus h, from the periodic trapezoid rule
/// with 2^M nodes for the Herglotz integral. Values are tabulated on rings
/// down to 1 - |z| = 2^-S with S = floor(log2(2^M / 55)), where the truncated
/// series is still accurate, and interpolated in between; points closer to the
/// circle take the outermost ring's value.
struct OuterOptions {
  int resolution = 16;  // M
  int rings_per_octave = 12;
};
AnalyticSymbol outer_function(const std::function<double(double)>& modulus, const OuterOptions& opt,
                              std::string name = "outer");

/// The generation-G approximation of E = phi_inv(E1), on the circle.
std::vector<Complex> cantor_on_circle(int generation);
/// g = (1 - z) w^2 with w outer, |w| = dist(., E u {1})^{1/2} on the circle.
AnalyticSymbol dynkin_symbol(int generation, const OuterOptions& opt);

struct LowerBoundCheck {
  double min_ratio = 0.0;   // min |g(z)| / (1 - |z|) over the lattice
  double lipschitz = 0.0;   // max |g(z) - g(w)| / |z - w| over lattice neighbours
};
LowerBoundCheck lowbg_check(const AnalyticSymbol& g, const LatticeOptions& lattice);

struct PipelineOptions {
  int n_max = 4;
  int depth = 6;
  SampleOptions sample;
  LatticeOptions lattice;
  DeltaOptions delta;
  int g_generation = 5;
  OuterOptions outer;
  double tol = 1e-6;  // relative tolerance of the Berezin quadratures
};

struct PipelineRow {
  int n = 0;
  double gamma = 0.0;
  double delta_lower = 0.0;
  bool delta_certified = false;
  double b_fg = 0.0;
  double c0a = 0.0;
  double c0b = 0.0;
  double norm2 = 0.0;
  double sup_fg = 0.0;
  double ourex_ratio = 0.0;
};

struct PipelineResult {
  std::vector<PipelineRow> rows;
  LowerBoundCheck g_check;
  double seconds = 0.0;
};
PipelineResult counterexample_pipeline(const PipelineOptions& opt);
CsvTable pipeline_csv(const PipelineResult& r);
Json pipeline_json(const PipelineResult& r, const PipelineOptions& opt);

}  // namespace bergman
