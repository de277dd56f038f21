#pragma once

// Bekolle-Bonami constants B_p, the Carleson-box B-infinity constant, and the
// sharp mixed estimate for the dyadic model projections.

#include <vector>

#include "bergman/disc_field.hpp"
#include "bergman/report.hpp"

namespace bergman {

/// Every interval of both grids with level <= depth.
std::vector<DyadicInterval> both_grids(int depth);

/// sup over I (both grids, level <= depth) of avg_Q w * (avg_Q w^{1-p'})^{p-1}.
double bekolle_bp(const CellField& w, double p, int depth);

/// Cellwise sup of plain box averages over every box of both grids.
CellField maximal_over_boxes(const CellField& f);

struct BInfinity {
  double value = 0.0;
  DyadicInterval argmax;
};
/// sup over I (both grids, level <= depth) of (1/w(Q_I)) int_{Q_I} M(w 1_{Q_I}).
BInfinity b_infinity(const CellField& w, int depth);

struct WeightConstants {
  double p = 2.0;
  int depth = 0;
  double bp = 0.0;
  double binf_w = 0.0;
  double binf_winv = 0.0;        // of the dual weight w^{1-p'}
  std::vector<DyadicInterval> near_extremal;  // B_p within 5% of its sup
};
WeightConstants weight_constants(const CellField& w, double p, int depth);

/// sum_{K in I, level(K) <= depth} sigma(Q_K) / sigma(Q_I).
double sparse_sum(const CellField& sigma, const DyadicInterval& i, int depth);
/// sparse_sum / binf, expected to stay below 2.
double sparse_sum_check(const CellField& sigma, const DyadicInterval& i, int depth, double binf);

struct DiagonalSplit {
  double diagonal = 0.0;
  double off_diagonal = 0.0;
  double testing = 0.0;           // ||P_{I,in}(w^{-1} 1_{Q_I})||^2_{L^2(w)}, cellwise
  double residual = 0.0;          // |testing - (D + 2 OD)| / testing
  double sum_sigma = 0.0;         // sum_{K in I} w^{-1}(Q_K)
  double diagonal_bound = 0.0;    // sum_K w^{-1}(Q_K) (|Q_K| / |K|^2)^2, times B_2 bounds D
};
DiagonalSplit d_od_decomposition(const CellField& w, const DyadicInterval& i, int depth);

/// Cell averages of (1 - |z|^2)^alpha, exact in closed form.
CellField radial_power_weight(std::shared_ptr<const CellMesh> mesh, double alpha);

struct SharpRow {
  double alpha = 0.0;
  int depth = 0;
  double norm = 0.0;       // max over both grids of ||P^beta||_{L^2(w) -> L^2(w)}
  double b2 = 0.0;
  double binf_w = 0.0;
  double binf_winv = 0.0;
  double ratio = 0.0;      // norm / [B2^{1/2} (Binf(w)^{1/2} + Binf(w^-1)^{1/2})]
  double mixed = 0.0;      // B2^{1/2} (Binf(w)^{1/2} + Binf(w^-1)^{1/2})
};
SharpRow sharp_row(double alpha, int depth);
std::vector<SharpRow> sharp_sweep(const std::vector<double>& alphas, int depth);
CsvTable sharp_csv(const std::vector<SharpRow>& rows);
Json to_json(const WeightConstants& c);

}  // namespace bergman
