#pragma once

#include <Eigen/Dense>
#include <stdexcept>

namespace steklov {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

enum class SurfaceKind { FlatTorus, RoundSphere };

// Analytic model surface: a flat torus R^2 / (lattice Z^2) represented in a
// single periodic chart, or a round sphere of given radius embedded in R^3.
// Torus points live in the chart plane (z = 0), canonically wrapped into the
// fundamental parallelogram lattice * [0,1)^2.
struct SurfaceModel {
  SurfaceKind kind = SurfaceKind::RoundSphere;
  Mat2 lattice = Mat2::Identity();  // columns = lattice generators
  double radius = 1.0;

  static SurfaceModel flat_torus(const Mat2& lattice);
  static SurfaceModel unit_square_torus();
  static SurfaceModel equilateral_torus();
  static SurfaceModel sphere(double radius = 1.0);

  double area() const;

  // Largest epsilon the sampling/perforation constructions accept:
  // half the shortest lattice vector on the torus, the radius on the sphere.
  double separation_guard() const;

  // Canonical representative of a point (torus: wrap into the fundamental
  // domain; sphere: project onto the sphere).
  Vec3 canonical(const Vec3& p) const;

  bool is_torus() const { return kind == SurfaceKind::FlatTorus; }
  bool is_sphere() const { return kind == SurfaceKind::RoundSphere; }
};

// Exact geodesic distance between two surface points.
// Torus: minimum over the 3x3 nearest lattice translates of the chart
// difference. Sphere: radius * arccos of the clamped inner product.
double geodesic_distance(const SurfaceModel& model, const Vec3& p, const Vec3& q);

// Point at geodesic distance `dist` from `center` in the direction of
// `toward` (used to snap carved hole boundaries onto exact circles).
Vec3 geodesic_point_toward(const SurfaceModel& model, const Vec3& center,
                           const Vec3& toward, double dist);

}  // namespace steklov
