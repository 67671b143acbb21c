#include "steklov/geometry.hpp"

#include <cmath>

namespace steklov {

SurfaceModel SurfaceModel::flat_torus(const Mat2& lattice) {
  if (std::abs(lattice.determinant()) < 1e-14)
    throw std::invalid_argument("flat_torus: lattice generators are collinear (determinant ~ 0)");
  SurfaceModel m;
  m.kind = SurfaceKind::FlatTorus;
  m.lattice = lattice;
  return m;
}

SurfaceModel SurfaceModel::unit_square_torus() {
  return flat_torus(Mat2::Identity());
}

SurfaceModel SurfaceModel::equilateral_torus() {
  Mat2 a;
  a << 1.0, 0.5,
       0.0, std::sqrt(3.0) / 2.0;
  return flat_torus(a);
}

SurfaceModel SurfaceModel::sphere(double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("sphere: radius must be positive");
  SurfaceModel m;
  m.kind = SurfaceKind::RoundSphere;
  m.radius = radius;
  return m;
}

double SurfaceModel::area() const {
  if (is_torus()) return std::abs(lattice.determinant());
  return 4.0 * M_PI * radius * radius;
}

double SurfaceModel::separation_guard() const {
  if (is_sphere()) return radius;
  double s = std::min(lattice.col(0).norm(), lattice.col(1).norm());
  // Shortest lattice vector can also be a diagonal of the fundamental cell.
  s = std::min(s, (lattice.col(0) + lattice.col(1)).norm());
  s = std::min(s, (lattice.col(0) - lattice.col(1)).norm());
  return 0.5 * s;
}

Vec3 SurfaceModel::canonical(const Vec3& p) const {
  if (is_sphere()) {
    double n = p.norm();
    if (n < 1e-300) throw std::invalid_argument("canonical: zero vector has no spherical projection");
    return p * (radius / n);
  }
  Vec2 t = lattice.inverse() * p.head<2>();
  t.x() -= std::floor(t.x());
  t.y() -= std::floor(t.y());
  // floor can leave exactly 1.0 behind for tiny negative inputs
  if (t.x() >= 1.0) t.x() -= 1.0;
  if (t.y() >= 1.0) t.y() -= 1.0;
  Vec2 xy = lattice * t;
  return Vec3(xy.x(), xy.y(), 0.0);
}

double geodesic_distance(const SurfaceModel& model, const Vec3& p, const Vec3& q) {
  if (model.is_sphere()) {
    double r = model.radius;
    double c = p.dot(q) / (r * r);
    c = std::clamp(c, -1.0, 1.0);
    return r * std::acos(c);
  }
  Vec2 d = p.head<2>() - q.head<2>();
  double best = std::numeric_limits<double>::infinity();
  for (int i = -1; i <= 1; ++i)
    for (int j = -1; j <= 1; ++j) {
      Vec2 shifted = d + model.lattice * Vec2(i, j);
      best = std::min(best, shifted.squaredNorm());
    }
  return std::sqrt(best);
}

Vec3 geodesic_point_toward(const SurfaceModel& model, const Vec3& center,
                           const Vec3& toward, double dist) {
  if (model.is_sphere()) {
    double r = model.radius;
    Vec3 c = center / r;
    Vec3 t = toward / r - (toward.dot(c) / r) * c;
    double tn = t.norm();
    if (tn < 1e-14)
      throw std::invalid_argument("geodesic_point_toward: direction is radial or antipodal");
    t /= tn;
    double a = dist / r;
    return r * (std::cos(a) * c + std::sin(a) * t);
  }
  // Torus: walk along the straight chart segment toward the nearest translate.
  Vec2 d = toward.head<2>() - center.head<2>();
  Vec2 best = d;
  double bn = d.squaredNorm();
  for (int i = -1; i <= 1; ++i)
    for (int j = -1; j <= 1; ++j) {
      Vec2 s = d + model.lattice * Vec2(i, j);
      if (s.squaredNorm() < bn) {
        bn = s.squaredNorm();
        best = s;
      }
    }
  double n = std::sqrt(bn);
  if (n < 1e-14)
    throw std::invalid_argument("geodesic_point_toward: coincident points give no direction");
  Vec2 xy = center.head<2>() + best * (dist / n);
  return Vec3(xy.x(), xy.y(), 0.0);
}

}  // namespace steklov
