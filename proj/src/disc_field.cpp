#include "bergman/disc_field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <string>

#include "bergman/report.hpp"

namespace bergman {

CellMesh::CellMesh(int depth) : depth_(depth) {
  if (depth < 1 || depth > 20) throw ArgumentError("build_mesh: depth must lie in [1, 20]");
  const std::uint64_t leaves = std::uint64_t{1} << depth;
  const double step = std::ldexp(1.0, -depth);

  std::vector<double> breaks;
  breaks.reserve(2 * leaves);
  for (std::uint64_t m = 0; m < leaves; ++m) {
    breaks.push_back(static_cast<double>(m) * step);
    breaks.push_back(wrap_turns(shift_turns(Beta::Third) + static_cast<double>(m) * step));
  }
  std::sort(breaks.begin(), breaks.end());
  const std::size_t sectors = breaks.size();
  sector_start_ = breaks;
  sector_width_.resize(sectors);
  for (std::size_t s = 0; s < sectors; ++s) {
    const double next = s + 1 < sectors ? breaks[s + 1] : 1.0 + breaks[0];
    sector_width_[s] = next - breaks[s];
  }

  for (Beta beta : kBothGrids) {
    const int g = static_cast<int>(beta);
    leaf_index_[g].resize(sectors);
    order_[g].assign(sectors, 0);
    for (std::size_t s = 0; s < sectors; ++s) {
      const double mid = wrap_turns(sector_start_[s] + 0.5 * sector_width_[s]);
      const DyadicInterval leaf = interval_at(beta, depth, mid);
      leaf_index_[g][s] = leaf.index;
      const double off = wrap_turns(sector_start_[s] - leaf.start());
      const bool first = off < step / 6.0 || off > 1.0 - step / 6.0;
      order_[g][2 * leaf.index + (first ? 0 : 1)] = s;
    }
  }

  area_.resize(cell_count());
  for (std::size_t b = 0; b < band_count(); ++b) {
    const double ri = band_inner(b);
    const double ro = band_outer(b);
    for (std::size_t s = 0; s < sectors; ++s)
      area_[cell_id(b, s)] = sector_width_[s] * (ro * ro - ri * ri);
  }
}

double CellMesh::band_inner(std::size_t b) const {
  return b == 0 ? 0.0 : 1.0 - std::ldexp(1.0, -static_cast<int>(b));
}

double CellMesh::band_outer(std::size_t b) const {
  return b == static_cast<std::size_t>(depth_) ? 1.0
                                               : 1.0 - std::ldexp(1.0, -static_cast<int>(b) - 1);
}

std::pair<std::size_t, std::size_t> CellMesh::sector_range(const DyadicInterval& interval) const {
  if (!resolves(interval)) throw ArgumentError("interval is finer than the mesh; increase depth");
  const std::size_t width = std::size_t{2} << (depth_ - interval.level);
  return {interval.index * width, (interval.index + 1) * width};
}

bool CellMesh::cell_in_box(std::size_t cell, const DyadicInterval& interval) const {
  if (static_cast<int>(band_of(cell)) < interval.level) return false;
  return (leaf_index(interval.beta, sector_of(cell)) >> (depth_ - interval.level)) ==
         interval.index;
}

std::vector<std::size_t> CellMesh::box_cells(const DyadicInterval& interval) const {
  const auto [first, last] = sector_range(interval);
  const auto order = sector_order(interval.beta);
  std::vector<std::size_t> cells;
  cells.reserve((last - first) * (band_count() - interval.level));
  for (std::size_t b = interval.level; b < band_count(); ++b)
    for (std::size_t p = first; p < last; ++p) cells.push_back(cell_id(b, order[p]));
  return cells;
}

std::vector<std::size_t> CellMesh::top_half_cells(const DyadicInterval& interval) const {
  const auto [first, last] = sector_range(interval);
  const auto order = sector_order(interval.beta);
  std::vector<std::size_t> cells;
  cells.reserve(last - first);
  for (std::size_t p = first; p < last; ++p)
    cells.push_back(cell_id(static_cast<std::size_t>(interval.level), order[p]));
  return cells;
}

std::size_t CellMesh::locate(Complex z) const {
  const double r = std::abs(z);
  if (r >= 1.0) throw ArgumentError("locate: point outside the open disc");
  std::size_t band = 0;
  while (band < static_cast<std::size_t>(depth_) && r >= band_outer(band)) ++band;
  const double t = turns_of(z);
  auto it = std::upper_bound(sector_start_.begin(), sector_start_.end(), t);
  std::size_t sector = it == sector_start_.begin()
                           ? sector_count() - 1
                           : static_cast<std::size_t>(it - sector_start_.begin()) - 1;
  return cell_id(band, sector);
}

CellField::CellField(std::shared_ptr<const CellMesh> mesh, std::vector<double> values,
                     FieldKind kind)
    : mesh_(std::move(mesh)), values_(std::move(values)), kind_(kind) {
  if (!mesh_) throw ArgumentError("CellField: null mesh");
  if (values_.size() != mesh_->cell_count())
    throw ArgumentError("CellField: value count does not match the mesh");
  if (kind_ == FieldKind::Weight) {
    for (std::size_t c = 0; c < values_.size(); ++c)
      if (!(values_[c] >= 1e-300) || !std::isfinite(values_[c]))
        throw ArgumentError("CellField: weight must be positive and finite (cell " +
                            std::to_string(c) + ")");
  }
}

CellField CellField::constant(std::shared_ptr<const CellMesh> mesh, double c, FieldKind kind) {
  const std::size_t n = mesh->cell_count();
  return CellField(std::move(mesh), std::vector<double>(n, c), kind);
}

std::shared_ptr<const CellMesh> build_mesh(int depth) {
  return std::make_shared<const CellMesh>(depth);
}

CellField sample_field(const std::function<double(Complex)>& fn,
                       std::shared_ptr<const CellMesh> mesh, int q, FieldKind kind) {
  if (q < 1) throw ArgumentError("sample_field: quadrature order must be positive");
  const CellMesh& m = *mesh;
  std::vector<double> values(m.cell_count());
  for (std::size_t b = 0; b < m.band_count(); ++b) {
    const double rho0 = m.band_inner(b) * m.band_inner(b);
    const double rho1 = m.band_outer(b) * m.band_outer(b);
    for (std::size_t s = 0; s < m.sector_count(); ++s) {
      const std::size_t cell = m.cell_id(b, s);
      double acc = 0.0;
      for (int i = 0; i < q; ++i) {
        const double r = std::sqrt(rho0 + (i + 0.5) / q * (rho1 - rho0));
        for (int k = 0; k < q; ++k) {
          const double t = m.sector_start(s) + (k + 0.5) / q * m.sector_width(s);
          const double v = fn(std::polar(r, 2.0 * std::numbers::pi * t));
          if (!std::isfinite(v))
            throw ArgumentError("sample_field: non-finite sample in cell " + std::to_string(cell));
          acc += v;
        }
      }
      values[cell] = acc / (static_cast<double>(q) * q);
    }
  }
  return CellField(std::move(mesh), std::move(values), kind);
}

double integrate(const CellField& field) {
  const auto areas = field.mesh().cell_areas();
  double acc = 0.0;
  for (std::size_t c = 0; c < field.size(); ++c) acc += field[c] * areas[c];
  return acc;
}

double integrate(const CellField& field, const DyadicInterval& box) {
  const CellMesh& m = field.mesh();
  if (!m.resolves(box))
    throw ArgumentError("integrate: box of level " + std::to_string(box.level) +
                        " is finer than mesh depth " + std::to_string(m.depth()) +
                        "; use a deeper mesh");
  double acc = 0.0;
  for (std::size_t c : m.box_cells(box)) acc += field[c] * m.cell_area(c);
  return acc;
}

BoxIntegrals::BoxIntegrals(const CellField& field, Beta beta)
    : mesh_(&field.mesh()), beta_(beta) {
  const auto order = mesh_->sector_order(beta);
  prefix_.resize(mesh_->band_count());
  for (std::size_t b = 0; b < mesh_->band_count(); ++b) {
    auto& row = prefix_[b];
    row.assign(order.size() + 1, 0.0);
    for (std::size_t p = 0; p < order.size(); ++p) {
      const std::size_t c = mesh_->cell_id(b, order[p]);
      row[p + 1] = row[p] + field[c] * mesh_->cell_area(c);
    }
  }
}

double BoxIntegrals::operator()(const DyadicInterval& box) const {
  if (box.beta != beta_) throw ArgumentError("BoxIntegrals: interval from the other grid");
  const auto [first, last] = mesh_->sector_range(box);
  double acc = 0.0;
  for (std::size_t b = box.level; b < prefix_.size(); ++b) acc += prefix_[b][last] - prefix_[b][first];
  return acc;
}

CellField coarsen(const CellField& w, Beta beta, int level) {
  const CellMesh& m = w.mesh();
  if (level < 0 || level > m.depth()) throw ArgumentError("coarsen: level outside mesh depth");
  std::vector<double> out(w.values().begin(), w.values().end());
  for (const DyadicInterval& interval : build_grid(beta, level)) {
    const auto cells = m.top_half_cells(interval);
    double mass = 0.0;
    double area = 0.0;
    for (std::size_t c : cells) {
      mass += w[c] * m.cell_area(c);
      area += m.cell_area(c);
    }
    const double avg = mass / area;
    for (std::size_t c : cells) out[c] = avg;
  }
  return w.with_values(std::move(out));
}

void write_csv(const CellField& field, std::ostream& os) {
  const CellMesh& m = field.mesh();
  os << "cell,theta_start,theta_end,r_inner,r_outer,value\n";
  const double tau = 2.0 * std::numbers::pi;
  for (std::size_t c = 0; c < field.size(); ++c) {
    const std::size_t b = m.band_of(c);
    const std::size_t s = m.sector_of(c);
    os << c << ',' << format_double(tau * m.sector_start(s)) << ','
       << format_double(tau * (m.sector_start(s) + m.sector_width(s))) << ','
       << format_double(m.band_inner(b)) << ',' << format_double(m.band_outer(b)) << ','
       << format_double(field[c]) << '\n';
  }
}

}  // namespace bergman
