#pragma once

// Polar cell mesh of the disc refined to both shifted dyadic grids, and
// piecewise-constant fields on it.
//
// Sectors: the merged level-N breakpoints of both grids (2 * 2^N sectors).
// Bands: [0, 1/2), [1/2, 3/4), ..., [1 - 2^-N, 1)  (N + 1 bands).
// Every Carleson box of either grid with level <= N is a union of cells, and
// every level-N interval of either grid holds exactly two sectors.

#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "bergman/dyadic_geometry.hpp"

namespace bergman {

class CellMesh {
 public:
  explicit CellMesh(int depth);

  int depth() const { return depth_; }
  std::size_t sector_count() const { return sector_start_.size(); }
  std::size_t band_count() const { return static_cast<std::size_t>(depth_) + 1; }
  std::size_t cell_count() const { return sector_count() * band_count(); }

  std::size_t cell_id(std::size_t band, std::size_t sector) const {
    return band * sector_count() + sector;
  }
  std::size_t band_of(std::size_t cell) const { return cell / sector_count(); }
  std::size_t sector_of(std::size_t cell) const { return cell % sector_count(); }

  double sector_start(std::size_t s) const { return sector_start_[s]; }
  double sector_width(std::size_t s) const { return sector_width_[s]; }
  double band_inner(std::size_t b) const;
  double band_outer(std::size_t b) const;
  double cell_area(std::size_t cell) const { return area_[cell]; }
  std::span<const double> cell_areas() const { return area_; }

  /// Level-N index, in grid `beta`, of the interval holding sector s.
  std::uint64_t leaf_index(Beta beta, std::size_t s) const {
    return leaf_index_[static_cast<int>(beta)][s];
  }
  /// Sectors of grid `beta` sorted by their position inside the grid.
  std::span<const std::size_t> sector_order(Beta beta) const {
    return order_[static_cast<int>(beta)];
  }
  /// Contiguous range [first, last) of positions in sector_order(beta)
  /// covered by the interval.
  std::pair<std::size_t, std::size_t> sector_range(const DyadicInterval& interval) const;

  bool resolves(const DyadicInterval& interval) const { return interval.level <= depth_; }
  bool cell_in_box(std::size_t cell, const DyadicInterval& interval) const;
  /// Cells of Q_I (throws ArgumentError when I is finer than the mesh).
  std::vector<std::size_t> box_cells(const DyadicInterval& interval) const;
  /// Cells of the mesh top half of I: band `level`, which for I at the mesh
  /// depth is all of Q_I.
  std::vector<std::size_t> top_half_cells(const DyadicInterval& interval) const;

  std::size_t locate(Complex z) const;

 private:
  int depth_;
  std::vector<double> sector_start_;
  std::vector<double> sector_width_;
  std::vector<double> area_;
  std::array<std::vector<std::uint64_t>, 2> leaf_index_;
  std::array<std::vector<std::size_t>, 2> order_;
};

enum class FieldKind { Density, Weight };

/// Piecewise-constant function on a mesh: one value per cell.
class CellField {
 public:
  CellField(std::shared_ptr<const CellMesh> mesh, std::vector<double> values,
            FieldKind kind = FieldKind::Density);
  static CellField constant(std::shared_ptr<const CellMesh> mesh, double c,
                            FieldKind kind = FieldKind::Density);

  const CellMesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const CellMesh>& mesh_ptr() const { return mesh_; }
  FieldKind kind() const { return kind_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t cell) const { return values_[cell]; }
  std::size_t size() const { return values_.size(); }

  CellField with_values(std::vector<double> values) const {
    return CellField(mesh_, std::move(values), kind_);
  }
  CellField as(FieldKind kind) const { return CellField(mesh_, values_, kind); }

 private:
  std::shared_ptr<const CellMesh> mesh_;
  std::vector<double> values_;
  FieldKind kind_;
};

std::shared_ptr<const CellMesh> build_mesh(int depth);

/// Cell averages of fn from a q x q midpoint rule in (r^2, theta).
CellField sample_field(const std::function<double(Complex)>& fn,
                       std::shared_ptr<const CellMesh> mesh, int q,
                       FieldKind kind = FieldKind::Density);

double integrate(const CellField& field);
double integrate(const CellField& field, const DyadicInterval& box);

/// Integrals of a field over every box of one grid, built from per-band
/// prefix sums so each query costs O(depth).
class BoxIntegrals {
 public:
  BoxIntegrals(const CellField& field, Beta beta);
  double operator()(const DyadicInterval& box) const;

 private:
  const CellMesh* mesh_;
  Beta beta_;
  std::vector<std::vector<double>> prefix_;  // [band][position + 1]
};

/// Replace w on each top half of grid `beta` (levels <= level) by its
/// w-average there.
CellField coarsen(const CellField& w, Beta beta, int level);

/// CSV: cell,theta_start,theta_end,r_inner,r_outer,value (angles in radians).
void write_csv(const CellField& field, std::ostream& os);

}  // namespace bergman
