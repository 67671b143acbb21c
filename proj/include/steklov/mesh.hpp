#pragma once

#include <functional>
#include <string>
#include <vector>

#include "steklov/geometry.hpp"

namespace steklov {

// Indexed triangle mesh. Sphere and evolver meshes are embedded in R^3.
// Flat-torus meshes live in the periodic chart: vertex positions are
// canonical chart points (z = 0) and each triangle corner carries an integer
// lattice shift so that corner positions are consistent across the seam.
struct TriMesh {
  Eigen::Matrix<double, Eigen::Dynamic, 3> V;
  Eigen::Matrix<int, Eigen::Dynamic, 3> F;

  bool periodic = false;
  Mat2 lattice = Mat2::Identity();
  // F.rows() x 6 when periodic: (s0x,s0y, s1x,s1y, s2x,s2y) per triangle.
  Eigen::Matrix<int, Eigen::Dynamic, 6> corner_shift;

  // Optional per-vertex label: -1 interior, >= 0 hole/center id.
  std::vector<int> vertex_label;

  int n_vertices() const { return static_cast<int>(V.rows()); }
  int n_triangles() const { return static_cast<int>(F.rows()); }

  // Resolved (unwrapped) position of corner k of triangle t.
  Vec3 corner(int t, int k) const {
    Vec3 x = V.row(F(t, k));
    if (periodic) x.head<2>() += lattice * Vec2(corner_shift(t, 2 * k), corner_shift(t, 2 * k + 1));
    return x;
  }
};

double triangle_area(const TriMesh& mesh, int t);
Vec3 triangle_barycenter(const TriMesh& mesh, int t);
Vec3 triangle_normal(const TriMesh& mesh, int t);  // not normalised
double total_area(const TriMesh& mesh);
double max_edge_length(const TriMesh& mesh);

// Boundary edges are those incident to exactly one triangle. Loops are
// returned as closed vertex cycles following the boundary orientation.
std::vector<std::vector<int>> boundary_loops(const TriMesh& mesh);
double boundary_length(const TriMesh& mesh);
std::vector<double> boundary_loop_lengths(const TriMesh& mesh);
std::vector<std::pair<int, int>> boundary_edges(const TriMesh& mesh);

// Checks the structural invariants: distinct corners, positive areas,
// every edge shared by one or two triangles with consistent orientation,
// boundary loops covering exactly the degree-1 edges. Throws on violation.
void validate_mesh(const TriMesh& mesh);

// Builders -------------------------------------------------------------

// Uniform structured triangulation of the fundamental parallelogram with
// periodic identification. Total area is exactly |det lattice|.
TriMesh build_flat_torus_mesh(const SurfaceModel& model, double target_edge_length);

// Icosahedron subdivided `subdivision_level` times, vertices projected to
// the sphere.
TriMesh build_sphere_mesh(const SurfaceModel& model, int subdivision_level);

// Planar disk in the z = 0 plane (validation meshes): a central vertex and
// n_rings concentric rings, ring k holding 6k vertices.
TriMesh build_disk_mesh(double radius, int n_rings);

// Refinement ------------------------------------------------------------

// Longest-edge (Rivara) bisection of every triangle selected by `mark`
// until all of its edges are <= max_edge. Conformity splits may touch
// triangles outside the marked set. `placement` post-processes newly
// created vertices (e.g. projection onto the sphere); identity if empty.
void refine_longest_edge(TriMesh& mesh,
                         const std::function<bool(const TriMesh&, int)>& mark,
                         double max_edge,
                         const std::function<Vec3(const Vec3&)>& placement = nullptr);

// One sweep of uniform 1->4 refinement.
TriMesh refine_uniform(const TriMesh& mesh,
                       const std::function<Vec3(const Vec3&)>& placement = nullptr);

}  // namespace steklov
