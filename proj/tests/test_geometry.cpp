#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "bergman/dyadic_geometry.hpp"

using namespace bergman;

namespace {

// Independent cover oracle: scan every interval of both grids up to depth 12.
std::optional<DyadicInterval> brute_cover(const Arc& arc) {
  std::optional<DyadicInterval> best;
  for (int level = 12; level >= 0; --level) {
    for (Beta b : kBothGrids) {
      for (std::uint64_t m = 0; m < (1ull << level); ++m) {
        DyadicInterval k{b, level, m};
        if (k.length() > 6.0 * arc.length) continue;
        if (!k.arc().contains(arc)) continue;
        if (!best || k.length() < best->length()) best = k;
      }
    }
    if (best) return best;
  }
  return best;
}

Complex polar(double r, double turns) { return std::polar(r, 2.0 * std::numbers::pi * turns); }

}  // namespace

TEST_CASE("grid counts and shifted starts") {
  CHECK(build_grid(Beta::Zero, 2).size() == 7);
  CHECK(build_grid(Beta::Third, 5).size() == 63);
  const auto g = build_grid(Beta::Third, 1);
  CHECK(g[1].start() == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(g[1].radian_length() == doctest::Approx(std::numbers::pi));
  CHECK_THROWS_AS(build_grid(Beta::Zero, -1), ArgumentError);
}

TEST_CASE("each level partitions the circle") {
  for (Beta b : kBothGrids) {
    for (int level = 0; level <= 6; ++level) {
      double total = 0.0;
      for (std::uint64_t m = 0; m < (1ull << level); ++m) total += DyadicInterval{b, level, m}.length();
      CHECK(total == 1.0);
      // every probe angle lies in exactly one interval of the level
      for (int k = 0; k < 97; ++k) {
        const double t = (k + 0.37) / 97.0;
        int hits = 0;
        for (std::uint64_t m = 0; m < (1ull << level); ++m) hits += DyadicInterval{b, level, m}.contains_turn(t);
        CHECK(hits == 1);
      }
    }
  }
}

TEST_CASE("parent and children nest") {
  for (Beta b : kBothGrids) {
    for (const auto& i : build_grid(b, 5)) {
      if (i.level == 0) continue;
      CHECK(i.parent().contains(i));
      for (const auto& c : i.children()) CHECK(c.parent() == i);
    }
  }
}

TEST_CASE("cover_interval examples") {
  const auto root = cover_interval({0.3, 1.0});
  CHECK(root.level == 0);
  CHECK(root.beta == Beta::Zero);

  const DyadicInterval self{Beta::Zero, 4, 5};
  CHECK(cover_interval(self.arc()) == self);

  // arc (-pi/8, pi/8) straddles the grid-0 breakpoint
  const Arc straddle{wrap_turns(-1.0 / 16.0), 1.0 / 8.0};
  const auto k = cover_interval(straddle);
  CHECK(k.beta == Beta::Third);
  CHECK(k.arc().contains(straddle));
  CHECK(k.length() <= 6.0 * straddle.length);
  const auto oracle = brute_cover(straddle);
  REQUIRE(oracle);
  CHECK(k.length() == oracle->length());
}

TEST_CASE("cover_interval property: arc inside K, |K| <= 6 |arc|") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 10000; ++trial) {
    const double len = std::exp2(-10.0 * u(rng));
    const Arc arc{u(rng), len};
    const auto k = cover_interval(arc);
    CHECK(k.arc().contains(arc));
    CHECK(k.length() <= 6.0 * len);
    if (trial < 200) {
      const auto oracle = brute_cover(arc);
      REQUIRE(oracle);
      CHECK(k.length() == oracle->length());
    }
  }
}

TEST_CASE("minimal_containing_interval") {
  const auto root = minimal_containing_interval(0.0, 0.0, Beta::Zero);
  REQUIRE(root);
  CHECK(root->level == 0);

  // enumerate ancestors of both projections
  const Complex z = 0.9, w = polar(0.9, 1.0 / 128.0);
  const auto got = minimal_containing_interval(z, w, Beta::Zero);
  REQUIRE(got);
  std::optional<DyadicInterval> best;
  for (int level = 0; level <= 20; ++level) {
    const auto a = interval_at(Beta::Zero, level, turns_of(z));
    if (a.length() < 0.1 - 1e-15) break;
    if (a.contains_turn(turns_of(w))) best = a;
  }
  REQUIRE(best);
  CHECK(*got == *best);
  CHECK(CarlesonBox(*got).contains(z));
  CHECK(CarlesonBox(*got).contains(w));

  CHECK_THROWS_AS(minimal_containing_interval(1.0, 0.5, Beta::Zero), ArgumentError);
}

TEST_CASE("Carleson boxes and top halves") {
  const DyadicInterval root{Beta::Zero, 0, 0}, half{Beta::Zero, 1, 0};
  CHECK(CarlesonBox(root).area() == doctest::Approx(1.0));
  CHECK(CarlesonBox(half).area() == doctest::Approx(3.0 / 8.0));
  CHECK(CarlesonBox(root).contains(0.0));
  CHECK_FALSE(CarlesonBox(half).contains(0.0));
  CHECK(TopHalf(root).area() == doctest::Approx(0.25));

  // top halves of I and its children are disjoint
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 2000; ++k) {
    const Complex p = polar(std::sqrt(u(rng)), u(rng));
    for (const auto& c : half.children()) CHECK_FALSE((TopHalf(half).contains(p) && TopHalf(c).contains(p)));
    for (const auto& c : half.children()) {
      if (CarlesonBox(c).contains(p)) CHECK(CarlesonBox(half).contains(p));
    }
  }
}

TEST_CASE("top halves telescope to the box area") {
  for (Beta b : kBothGrids) {
    const DyadicInterval base{b, 2, 1};
    double sum = 0.0;
    for (int level = base.level; level <= 14; ++level) {
      const int extra = level - base.level;
      for (std::uint64_t m = 0; m < (1ull << extra); ++m)
        sum += TopHalf(DyadicInterval{b, level, (base.index << extra) + m}).area();
    }
    const double tail = std::exp2(-14.0);  // area of the boxes below depth 14 is O(|I| 2^-14)
    CHECK(std::abs(sum - CarlesonBox(base).area()) <= 2.0 * base.length() * tail);
  }
}
