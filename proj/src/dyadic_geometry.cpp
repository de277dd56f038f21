#include "bergman/dyadic_geometry.hpp"

#include <cmath>
#include <numbers>

namespace bergman {

namespace {
// Slack for arc containment when endpoints come from the irrational-looking
// 1/3 shift; breakpoints of both grids are otherwise exact in binary.
constexpr double kArcSlack = 1e-13;
}  // namespace

double shift_turns(Beta beta) { return beta == Beta::Zero ? 0.0 : 1.0 / 3.0; }

const char* beta_name(Beta beta) { return beta == Beta::Zero ? "0" : "1/3"; }

double wrap_turns(double t) {
  double u = t - std::floor(t);
  return u >= 1.0 ? 0.0 : u;
}

double turns_of(Complex z) {
  if (z == Complex{}) return 0.0;
  return wrap_turns(std::arg(z) / (2.0 * std::numbers::pi));
}

bool Arc::contains_turn(double t) const {
  if (length >= 1.0) return true;
  return wrap_turns(t - start) < length;
}

bool Arc::contains(const Arc& other) const {
  if (length >= 1.0) return true;
  if (other.length > length) return false;
  double off = wrap_turns(other.start - start);
  if (off > 1.0 - kArcSlack) off = 0.0;
  return off + other.length <= length + kArcSlack;
}

double DyadicInterval::length() const { return std::ldexp(1.0, -level); }

double DyadicInterval::radian_length() const {
  return 2.0 * std::numbers::pi * length();
}

double DyadicInterval::start() const {
  return wrap_turns(shift_turns(beta) + static_cast<double>(index) * length());
}

bool DyadicInterval::contains_turn(double t) const {
  return interval_at(beta, level, t).index == index;
}

bool DyadicInterval::contains(const DyadicInterval& other) const {
  if (other.beta != beta || other.level < level) return false;
  return (other.index >> (other.level - level)) == index;
}

DyadicInterval DyadicInterval::parent() const {
  if (level == 0) throw ArgumentError("root interval has no parent");
  return {beta, level - 1, index >> 1};
}

std::array<DyadicInterval, 2> DyadicInterval::children() const {
  return {DyadicInterval{beta, level + 1, 2 * index},
          DyadicInterval{beta, level + 1, 2 * index + 1}};
}

DyadicInterval interval_at(Beta beta, int level, double t) {
  if (level < 0 || level > 62) throw ArgumentError("interval level out of range");
  const double u = wrap_turns(t - shift_turns(beta));
  const std::uint64_t count = std::uint64_t{1} << level;
  auto idx = static_cast<std::uint64_t>(std::floor(std::ldexp(u, level)));
  if (idx >= count) idx = count - 1;
  return {beta, level, idx};
}

std::vector<DyadicInterval> build_grid(Beta beta, int depth) {
  if (depth < 0) throw ArgumentError("build_grid: depth must be nonnegative");
  if (depth > 30) throw ArgumentError("build_grid: depth too large to enumerate");
  std::vector<DyadicInterval> out;
  out.reserve((std::size_t{2} << depth) - 1);
  for (int j = 0; j <= depth; ++j)
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << j); ++m) out.push_back({beta, j, m});
  return out;
}

DyadicInterval cover_interval(const Arc& arc) {
  if (!(arc.length > 0.0) || arc.length > 1.0)
    throw ArgumentError("cover_interval: arc length must lie in (0, 1]");
  if (arc.length >= 1.0) return {Beta::Zero, 0, 0};
  // Deepest admissible level first so the first hit is the smallest K.
  const int deepest = static_cast<int>(std::floor(-std::log2(arc.length)));
  for (int j = deepest; j >= 0; --j) {
    const double len = std::ldexp(1.0, -j);
    if (len > 6.0 * arc.length) break;
    for (Beta beta : kBothGrids) {
      DyadicInterval k = interval_at(beta, j, arc.start);
      if (k.arc().contains(arc)) return k;
    }
  }
  throw std::logic_error("cover_interval: no admissible dyadic cover found");
}

std::optional<DyadicInterval> minimal_containing_interval(Complex z, Complex zeta,
                                                          Beta beta) {
  if (std::abs(z) >= 1.0 || std::abs(zeta) >= 1.0)
    throw ArgumentError("minimal_containing_interval: points must lie in the open disc");
  const double floor_len = 1.0 - std::min(std::abs(z), std::abs(zeta));
  const double t1 = turns_of(z);
  const double t2 = turns_of(zeta);
  std::optional<DyadicInterval> best;
  for (int j = 0; j <= 62; ++j) {
    if (std::ldexp(1.0, -j) < floor_len) break;
    DyadicInterval a = interval_at(beta, j, t1);
    if (a != interval_at(beta, j, t2)) break;
    best = a;
  }
  return best;
}

CarlesonBox::CarlesonBox(const Arc& arc) : arc_(arc) {
  if (!(arc.length > 0.0) || arc.length > 1.0)
    throw ArgumentError("CarlesonBox: arc length must lie in (0, 1]");
}

bool CarlesonBox::contains(Complex z) const {
  const double r = std::abs(z);
  return r < 1.0 && r >= inner_radius() && arc_.contains_turn(turns_of(z));
}

double CarlesonBox::area() const {
  const double l = arc_.length;
  return l * (2.0 * l - l * l);
}

bool TopHalf::contains(Complex z) const {
  const double r = std::abs(z);
  return r >= inner_radius() && r < outer_radius() && interval_.contains_turn(turns_of(z));
}

double TopHalf::area() const {
  const double l = interval_.length();
  const double ro = outer_radius();
  const double ri = inner_radius();
  return l * (ro * ro - ri * ri);
}

}  // namespace bergman
