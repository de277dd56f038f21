#pragma once

// Shifted dyadic grids on the circle and the Carleson boxes they generate.
//
// Angles are measured in turns (fraction of the full circle, [0, 1)) so that
// the normalized length |I| of an arc and its angular extent coincide. Radian
// quantities are derived on demand.

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace bergman {

using Complex = std::complex<double>;

/// Raised for inputs outside an operation's domain.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Beta : std::uint8_t { Zero = 0, Third = 1 };

inline constexpr std::array<Beta, 2> kBothGrids{Beta::Zero, Beta::Third};

double shift_turns(Beta beta);
const char* beta_name(Beta beta);

/// Reduce an angle in turns to [0, 1).
double wrap_turns(double t);

/// Boundary projection of a disc point in turns; the origin maps to 0.
double turns_of(Complex z);

/// Half-open arc [start, start + length) on the circle, in turns.
struct Arc {
  double start = 0.0;
  double length = 1.0;

  bool contains_turn(double t) const;
  bool contains(const Arc& other) const;
};

struct DyadicInterval {
  Beta beta = Beta::Zero;
  int level = 0;
  std::uint64_t index = 0;

  double length() const;         // normalized, 2^-level
  double radian_length() const;  // 2*pi*2^-level
  double start() const;          // turns in [0, 1)
  Arc arc() const { return {start(), length()}; }

  bool contains_turn(double t) const;
  /// Same-grid nesting: other is this interval or one of its descendants.
  bool contains(const DyadicInterval& other) const;

  DyadicInterval parent() const;
  std::array<DyadicInterval, 2> children() const;

  friend bool operator==(const DyadicInterval&, const DyadicInterval&) = default;
};

/// The level-`level` interval of grid `beta` containing the angle t (turns).
DyadicInterval interval_at(Beta beta, int level, double t);

/// All intervals of levels 0..depth, ordered by level then index.
std::vector<DyadicInterval> build_grid(Beta beta, int depth);

/// Smallest interval of either grid containing `arc` with |K| <= 6|arc|.
/// Ties prefer grid 0.
DyadicInterval cover_interval(const Arc& arc);

/// Smallest interval of grid `beta` containing both boundary projections with
/// |I| >= 1 - min(|z|, |zeta|); both points then lie in Q_I.
std::optional<DyadicInterval> minimal_containing_interval(Complex z, Complex zeta,
                                                          Beta beta);

/// Q_I = { r e^{2 pi i t} : 1 - |I| <= r < 1, t in I }.
class CarlesonBox {
 public:
  explicit CarlesonBox(const DyadicInterval& base) : arc_(base.arc()) {}
  explicit CarlesonBox(const Arc& arc);

  const Arc& arc() const { return arc_; }
  double inner_radius() const { return 1.0 - arc_.length; }
  bool contains(Complex z) const;
  /// Normalized area (the disc has area 1).
  double area() const;

 private:
  Arc arc_;
};

/// Q_I minus the boxes of the two children: radial band [1-|I|, 1-|I|/2).
class TopHalf {
 public:
  explicit TopHalf(const DyadicInterval& interval) : interval_(interval) {}

  const DyadicInterval& interval() const { return interval_; }
  double inner_radius() const { return 1.0 - interval_.length(); }
  double outer_radius() const { return 1.0 - 0.5 * interval_.length(); }
  bool contains(Complex z) const;
  double area() const;

 private:
  DyadicInterval interval_;
};

}  // namespace bergman
