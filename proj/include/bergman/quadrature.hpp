#pragma once

// Adaptive cubature on the disc in (rho, t) = (r^2, turns) coordinates, where
// normalized area measure is exactly d rho dt.

#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "bergman/dyadic_geometry.hpp"

namespace bergman {

class CellMesh;

/// Quadrature did not reach its tolerance; carries the best estimate.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double best, double error)
      : std::runtime_error(what), best_estimate(best), error_estimate(error) {}
  double best_estimate;
  double error_estimate;
};

/// [t0, t1) x [rho0, rho1) in turns and squared radius.
struct PolarRect {
  double t0 = 0.0, t1 = 1.0;
  double rho0 = 0.0, rho1 = 1.0;

  double r_inner() const;
  double r_outer() const;
  /// Largest physical side length.
  double size() const;
};

/// A point near which integrands vary on the given length scale. The point
/// may lie outside the disc (e.g. a pole just beyond the boundary).
struct Feature {
  Complex center;
  double scale;
};

struct QuadNode {
  Complex z;
  double weight;  // includes the normalized area element
};

struct AdaptiveOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  int order = 8;                 // Gauss-Legendre points per direction
  std::size_t max_rects = 400000;
};

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t rects = 0;
};

/// Nodes and weights of Gauss-Legendre on [0, 1] for order in {2,4,6,8,10,12,16,20}.
const std::vector<std::pair<double, double>>& gauss_legendre_unit(int order);

/// Tensor rule on one rectangle.
void append_tensor_nodes(const PolarRect& rect, int order, std::vector<QuadNode>& out);

/// Rectangles covering the whole disc along the dyadic radial ladder.
std::vector<PolarRect> disc_rects(int angular = 8, int radial_levels = 6);
/// The cells of a mesh as rectangles.
std::vector<PolarRect> mesh_rects(const CellMesh& mesh);

/// Global adaptive cubature: repeatedly bisects the rectangle with the largest
/// parent/children discrepancy. Rectangles near a feature are first split
/// down to the feature's scale.
QuadResult integrate_adaptive(const std::function<double(Complex)>& fn,
                              std::span<const PolarRect> roots, const AdaptiveOptions& opt,
                              std::span<const Feature> features = {});

/// Fixed rule: feature refinement plus a Whitney condition (rectangles whose
/// size exceeds `whitney` times their distance to the circle are split until
/// their size drops below `floor`).
struct RuleOptions {
  int order = 8;
  double whitney = 0.5;
  double floor = 1e-3;
};
/// When root_of is given it receives, per node, the index of its root.
std::vector<QuadNode> build_rule(std::span<const PolarRect> roots, const RuleOptions& opt,
                                 std::span<const Feature> features = {},
                                 std::vector<std::size_t>* root_of = nullptr);

}  // namespace bergman
