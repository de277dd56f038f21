#pragma once

// Bergman-type kernels, the Berezin transform, the maximal projection P+,
// and the dyadic model operators P^beta built on Carleson boxes.

#include <cstdint>
#include <functional>

#include "bergman/disc_field.hpp"
#include "bergman/quadrature.hpp"
#include "bergman/report.hpp"

namespace bergman {

/// 1 / |1 - z conj(zeta)|^2, the kernel of P+.
double kernel(Complex z, Complex zeta);

/// Sum of |I|^-2 over I in grid beta (levels <= max_level) with z, zeta in Q_I.
/// Exact: walks the common ancestors of the two boundary projections.
double dyadic_kernel(Complex z, Complex zeta, Beta beta, int max_level = 62);

using PointFunction = std::function<double(Complex)>;

/// B u(z) = int u(zeta) (1-|z|^2)^2 / |1 - conj(zeta) z|^4 dA(zeta).
double berezin(const PointFunction& density, Complex z, double tol = 1e-9);
double berezin(const CellField& density, Complex z, double tol = 1e-9);

/// P+ u(z) = int u(zeta) / |1 - conj(zeta) z|^2 dA(zeta).
double apply_pplus(const PointFunction& density, Complex z, double tol = 1e-9);
double apply_pplus(const CellField& density, Complex z, double tol = 1e-9);

/// Berezin / P+ evaluated against a precomputed rule whose nodes carry the
/// density values; for sweeps over many z with one expensive density.
double berezin_on_rule(std::span<const QuadNode> rule, std::span<const double> density, Complex z);

/// P^beta u = sum_I <u, 1_{Q_I}/|I|^2> 1_{Q_I} over levels <= mesh depth.
CellField apply_pbeta(const CellField& density, Beta beta);

/// Lower constant from combining the Case-1 bound 8|I0|^2 with the 4/3
/// ancestor sum.
inline constexpr double kComparabilityLowerClaimed = 3.0 / 32.0;
/// Lower constant when the angular term is bounded in normalized length:
/// |1 - z conj(xi)|^2 <= 4 (1 + pi^2) |I0|^2.
double comparability_lower_consistent();

struct ComparabilityReport {
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  int depth = 0;
  std::array<double, 2> sup_ratio_lower{};     // sup K^beta / K per grid
  std::array<double, 2> min_k_over_kbeta{};    // inf K / K^beta per grid
  std::array<std::uint64_t, 2> claimed_violations{};
  std::array<std::uint64_t, 2> consistent_violations{};
  double sup_ratio_upper = 0.0;                // sup K / (K^0 + K^{1/3})
};

/// Random pairs with 1 - |z| >= 2^{-depth+2}: half uniform in area, half
/// multiscale (log-uniform boundary distances and angular offset). The upper
/// envelope is refined by local ascent from the best sampled pairs.
ComparabilityReport comparability_report(std::uint64_t samples, int depth, std::uint64_t seed);
Json to_json(const ComparabilityReport& r);

/// Largest residual of the two kernel identities relating 1/|1-w|^2,
/// w = conj(zeta) z, to the analytic kernel and its real part.
double kernel_identity_check(Complex z, Complex zeta);

struct IdentitySweep {
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  double max_residual = 0.0;
};
IdentitySweep kernel_identity_sweep(std::uint64_t samples, std::uint64_t seed);
Json to_json(const IdentitySweep& s);

}  // namespace bergman
