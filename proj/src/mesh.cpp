#include "steklov/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <unordered_map>

namespace steklov {

namespace {

inline std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

}  // namespace

double triangle_area(const TriMesh& mesh, int t) {
  Vec3 a = mesh.corner(t, 0), b = mesh.corner(t, 1), c = mesh.corner(t, 2);
  return 0.5 * ((b - a).cross(c - a)).norm();
}

Vec3 triangle_barycenter(const TriMesh& mesh, int t) {
  return (mesh.corner(t, 0) + mesh.corner(t, 1) + mesh.corner(t, 2)) / 3.0;
}

Vec3 triangle_normal(const TriMesh& mesh, int t) {
  Vec3 a = mesh.corner(t, 0), b = mesh.corner(t, 1), c = mesh.corner(t, 2);
  return (b - a).cross(c - a);
}

double total_area(const TriMesh& mesh) {
  double s = 0.0;
  for (int t = 0; t < mesh.n_triangles(); ++t) s += triangle_area(mesh, t);
  return s;
}

double max_edge_length(const TriMesh& mesh) {
  double m = 0.0;
  for (int t = 0; t < mesh.n_triangles(); ++t)
    for (int k = 0; k < 3; ++k)
      m = std::max(m, (mesh.corner(t, k) - mesh.corner(t, (k + 1) % 3)).norm());
  return m;
}

std::vector<std::pair<int, int>> boundary_edges(const TriMesh& mesh) {
  std::unordered_map<std::uint64_t, int> count;
  count.reserve(mesh.n_triangles() * 2);
  for (int t = 0; t < mesh.n_triangles(); ++t)
    for (int k = 0; k < 3; ++k)
      count[edge_key(mesh.F(t, k), mesh.F(t, (k + 1) % 3))]++;
  std::vector<std::pair<int, int>> out;
  for (int t = 0; t < mesh.n_triangles(); ++t)
    for (int k = 0; k < 3; ++k) {
      int a = mesh.F(t, k), b = mesh.F(t, (k + 1) % 3);
      if (count[edge_key(a, b)] == 1) out.emplace_back(a, b);  // keeps triangle orientation
    }
  return out;
}

std::vector<std::vector<int>> boundary_loops(const TriMesh& mesh) {
  auto edges = boundary_edges(mesh);
  std::unordered_map<int, int> next;
  next.reserve(edges.size());
  for (auto [a, b] : edges) {
    if (next.count(a))
      throw std::runtime_error("boundary_loops: vertex " + std::to_string(a) +
                               " has two outgoing boundary edges (non-manifold boundary)");
    next[a] = b;
  }
  std::vector<std::vector<int>> loops;
  std::unordered_map<int, bool> seen;
  for (auto [a, b] : edges) {
    if (seen[a]) continue;
    std::vector<int> loop;
    int v = a;
    do {
      loop.push_back(v);
      seen[v] = true;
      auto it = next.find(v);
      if (it == next.end())
        throw std::runtime_error("boundary_loops: open boundary chain at vertex " + std::to_string(v));
      v = it->second;
    } while (v != a);
    loops.push_back(std::move(loop));
  }
  return loops;
}

static double loop_length(const TriMesh& mesh, const std::pair<int, int>& e,
                          const std::unordered_map<std::uint64_t, double>& lengths) {
  return lengths.at(edge_key(e.first, e.second));
}

static std::unordered_map<std::uint64_t, double> boundary_edge_lengths(const TriMesh& mesh) {
  // Boundary edge geometry must come from a triangle frame so periodic
  // meshes measure the resolved segment, not the wrapped chart gap.
  std::unordered_map<std::uint64_t, double> lengths;
  std::unordered_map<std::uint64_t, int> count;
  for (int t = 0; t < mesh.n_triangles(); ++t)
    for (int k = 0; k < 3; ++k) {
      auto key = edge_key(mesh.F(t, k), mesh.F(t, (k + 1) % 3));
      count[key]++;
      lengths[key] = (mesh.corner(t, k) - mesh.corner(t, (k + 1) % 3)).norm();
    }
  std::unordered_map<std::uint64_t, double> out;
  for (auto& [key, c] : count)
    if (c == 1) out[key] = lengths[key];
  return out;
}

double boundary_length(const TriMesh& mesh) {
  double s = 0.0;
  for (auto& [key, len] : boundary_edge_lengths(mesh)) s += len;
  return s;
}

std::vector<double> boundary_loop_lengths(const TriMesh& mesh) {
  auto lengths = boundary_edge_lengths(mesh);
  std::vector<double> out;
  for (auto& loop : boundary_loops(mesh)) {
    double s = 0.0;
    for (size_t i = 0; i < loop.size(); ++i)
      s += loop_length(mesh, {loop[i], loop[(i + 1) % loop.size()]}, lengths);
    out.push_back(s);
  }
  return out;
}

void validate_mesh(const TriMesh& mesh) {
  const int nv = mesh.n_vertices();
  if (mesh.periodic && mesh.corner_shift.rows() != mesh.F.rows())
    throw std::runtime_error("validate_mesh: periodic mesh lacks per-corner lattice shifts");
  if (!mesh.vertex_label.empty() && static_cast<int>(mesh.vertex_label.size()) != nv)
    throw std::runtime_error("validate_mesh: vertex_label size mismatch");

  double mean_area = mesh.n_triangles() > 0 ? total_area(mesh) / mesh.n_triangles() : 0.0;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    int a = mesh.F(t, 0), b = mesh.F(t, 1), c = mesh.F(t, 2);
    if (a < 0 || b < 0 || c < 0 || a >= nv || b >= nv || c >= nv)
      throw std::runtime_error("validate_mesh: vertex index out of range in triangle " + std::to_string(t));
    if (a == b || b == c || a == c)
      throw std::runtime_error("validate_mesh: repeated vertex in triangle " + std::to_string(t));
    if (!(triangle_area(mesh, t) > 1e-16 * std::max(1.0, mean_area)))
      throw std::runtime_error("validate_mesh: degenerate triangle " + std::to_string(t));
  }

  // Each undirected edge must appear once or twice, and twice only with
  // opposite directions (consistent orientation).
  std::unordered_map<std::uint64_t, int> dir;  // +1 per (a<b) direction, -1 otherwise
  std::unordered_map<std::uint64_t, int> count;
  for (int t = 0; t < mesh.n_triangles(); ++t)
    for (int k = 0; k < 3; ++k) {
      int a = mesh.F(t, k), b = mesh.F(t, (k + 1) % 3);
      auto key = edge_key(a, b);
      count[key]++;
      dir[key] += (a < b) ? 1 : -1;
    }
  for (auto& [key, c] : count) {
    if (c > 2)
      throw std::runtime_error("validate_mesh: edge shared by more than two triangles");
    if (c == 2 && dir[key] != 0)
      throw std::runtime_error("validate_mesh: inconsistent orientation across an interior edge");
  }

  boundary_loops(mesh);  // throws on broken boundary structure
}

// Builders ---------------------------------------------------------------

TriMesh build_flat_torus_mesh(const SurfaceModel& model, double target_edge_length) {
  if (!model.is_torus()) throw std::invalid_argument("build_flat_torus_mesh: model is not a flat torus");
  const Vec2 a1 = model.lattice.col(0), a2 = model.lattice.col(1);
  double min_gen = std::min(a1.norm(), a2.norm());
  if (!(target_edge_length > 0.0) || target_edge_length >= min_gen / 4.0)
    throw std::invalid_argument(
        "build_flat_torus_mesh: target edge length " + std::to_string(target_edge_length) +
        " must be positive and below a quarter of the shortest lattice generator (" +
        std::to_string(min_gen / 4.0) + ")");

  const int n1 = static_cast<int>(std::ceil(a1.norm() / target_edge_length));
  const int n2 = static_cast<int>(std::ceil(a2.norm() / target_edge_length));

  TriMesh mesh;
  mesh.periodic = true;
  mesh.lattice = model.lattice;
  mesh.V.resize(n1 * n2, 3);
  for (int j = 0; j < n2; ++j)
    for (int i = 0; i < n1; ++i) {
      Vec2 p = model.lattice * Vec2(double(i) / n1, double(j) / n2);
      mesh.V.row(j * n1 + i) << p.x(), p.y(), 0.0;
    }

  // Split each cell along its shorter diagonal so skewed lattices keep the
  // 1.5x edge-length bound.
  Vec2 h1 = a1 / n1, h2 = a2 / n2;
  bool use_minus_diag = (h1 - h2).norm() <= (h1 + h2).norm();

  mesh.F.resize(2 * n1 * n2, 3);
  mesh.corner_shift.resize(2 * n1 * n2, 6);
  auto vid = [&](int ii, int jj) { return (jj % n2) * n1 + (ii % n1); };
  auto shift_of = [&](int ii, int jj) { return Eigen::Vector2i(ii / n1, jj / n2); };
  int t = 0;
  auto emit = [&](std::array<std::pair<int, int>, 3> corners) {
    for (int k = 0; k < 3; ++k) {
      auto [ii, jj] = corners[k];
      mesh.F(t, k) = vid(ii, jj);
      Eigen::Vector2i s = shift_of(ii, jj);
      mesh.corner_shift(t, 2 * k) = s.x();
      mesh.corner_shift(t, 2 * k + 1) = s.y();
    }
    ++t;
  };
  for (int j = 0; j < n2; ++j)
    for (int i = 0; i < n1; ++i) {
      if (use_minus_diag) {
        emit({{{i, j}, {i + 1, j}, {i, j + 1}}});
        emit({{{i + 1, j}, {i + 1, j + 1}, {i, j + 1}}});
      } else {
        emit({{{i, j}, {i + 1, j}, {i + 1, j + 1}}});
        emit({{{i, j}, {i + 1, j + 1}, {i, j + 1}}});
      }
    }
  if (model.lattice.determinant() < 0) {
    // Keep triangle orientation consistent with positive area convention.
    for (int tt = 0; tt < mesh.n_triangles(); ++tt) {
      std::swap(mesh.F(tt, 1), mesh.F(tt, 2));
      for (int d = 0; d < 2; ++d)
        std::swap(mesh.corner_shift(tt, 2 + d), mesh.corner_shift(tt, 4 + d));
    }
  }
  return mesh;
}

TriMesh build_sphere_mesh(const SurfaceModel& model, int subdivision_level) {
  if (!model.is_sphere()) throw std::invalid_argument("build_sphere_mesh: model is not a sphere");
  if (subdivision_level < 0) throw std::invalid_argument("build_sphere_mesh: negative subdivision level");

  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> verts = {
      {-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
      {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
      {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1}};
  std::vector<std::array<int, 3>> faces = {
      {0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11},
      {1, 5, 9}, {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8}, {3, 8, 9},
      {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1}};

  for (int level = 0; level < subdivision_level; ++level) {
    std::unordered_map<std::uint64_t, int> midpoint;
    std::vector<std::array<int, 3>> next_faces;
    next_faces.reserve(faces.size() * 4);
    auto mid = [&](int a, int b) {
      auto key = edge_key(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      int id = static_cast<int>(verts.size());
      verts.push_back((verts[a] + verts[b]) * 0.5);
      midpoint[key] = id;
      return id;
    };
    for (auto& f : faces) {
      int ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
      next_faces.push_back({f[0], ab, ca});
      next_faces.push_back({f[1], bc, ab});
      next_faces.push_back({f[2], ca, bc});
      next_faces.push_back({ab, bc, ca});
    }
    faces = std::move(next_faces);
  }

  TriMesh mesh;
  mesh.V.resize(verts.size(), 3);
  for (size_t i = 0; i < verts.size(); ++i)
    mesh.V.row(i) = (verts[i].normalized() * model.radius).transpose();
  mesh.F.resize(faces.size(), 3);
  for (size_t i = 0; i < faces.size(); ++i)
    mesh.F.row(i) << faces[i][0], faces[i][1], faces[i][2];
  return mesh;
}

TriMesh build_disk_mesh(double radius, int n_rings) {
  if (!(radius > 0.0) || n_rings < 1) throw std::invalid_argument("build_disk_mesh: bad parameters");
  TriMesh mesh;
  std::vector<Vec3> verts = {Vec3::Zero()};
  std::vector<int> ring_start = {0};
  for (int k = 1; k <= n_rings; ++k) {
    ring_start.push_back(static_cast<int>(verts.size()));
    int m = 6 * k;
    double r = radius * k / n_rings;
    for (int i = 0; i < m; ++i) {
      double th = 2.0 * M_PI * i / m;
      verts.emplace_back(r * std::cos(th), r * std::sin(th), 0.0);
    }
  }
  std::vector<std::array<int, 3>> faces;
  for (int i = 0; i < 6; ++i)
    faces.push_back({0, 1 + i, 1 + (i + 1) % 6});
  for (int k = 2; k <= n_rings; ++k) {
    int inner = ring_start[k - 1], outer = ring_start[k];
    int ni = 6 * (k - 1), no = 6 * k;
    for (int s = 0; s < 6; ++s) {
      auto ov = [&](int m) { return outer + (s * k + m) % no; };
      auto iv = [&](int m) { return inner + (s * (k - 1) + m) % ni; };
      for (int m = 0; m < k; ++m) faces.push_back({ov(m), ov(m + 1), iv(std::min(m, k - 2))});
      for (int m = 0; m + 1 < k; ++m) faces.push_back({iv(m), ov(m + 1), iv(m + 1)});
    }
  }
  mesh.V.resize(verts.size(), 3);
  for (size_t i = 0; i < verts.size(); ++i) mesh.V.row(i) = verts[i].transpose();
  mesh.F.resize(faces.size(), 3);
  for (size_t i = 0; i < faces.size(); ++i)
    mesh.F.row(i) << faces[i][0], faces[i][1], faces[i][2];
  return mesh;
}

// Refinement --------------------------------------------------------------

namespace {

// Incremental edge -> incident triangles table used by the Rivara splitter.
class EdgeTable {
 public:
  explicit EdgeTable(const TriMesh& mesh) {
    map_.reserve(mesh.n_triangles() * 2);
    for (int t = 0; t < mesh.n_triangles(); ++t) add(mesh, t);
  }
  void add(const TriMesh& mesh, int t) {
    for (int k = 0; k < 3; ++k) {
      auto key = edge_key(mesh.F(t, k), mesh.F(t, (k + 1) % 3));
      auto [it, inserted] = map_.try_emplace(key, std::array<int, 2>{-1, -1});
      auto& slot = it->second;
      if (slot[0] == -1) slot[0] = t;
      else if (slot[1] == -1) slot[1] = t;
      else throw std::runtime_error("refine: edge incident to more than two triangles");
    }
  }
  void remove(const TriMesh& mesh, int t) {
    for (int k = 0; k < 3; ++k) {
      auto key = edge_key(mesh.F(t, k), mesh.F(t, (k + 1) % 3));
      auto it = map_.find(key);
      if (it == map_.end()) continue;
      if (it->second[1] == t) it->second[1] = -1;
      else if (it->second[0] == t) {
        it->second[0] = it->second[1];
        it->second[1] = -1;
      }
      if (it->second[0] == -1) map_.erase(it);
    }
  }
  int neighbor(int a, int b, int self) const {
    auto it = map_.find(edge_key(a, b));
    if (it == map_.end()) return -1;
    if (it->second[0] == self) return it->second[1];
    return it->second[0];
  }

 private:
  std::unordered_map<std::uint64_t, std::array<int, 2>> map_{};
};

struct Splitter {
  TriMesh& mesh;
  EdgeTable& table;
  const std::function<Vec3(const Vec3&)>& placement;
  std::vector<int> created;  // triangles created or rewritten this pass

  // local corner index of the edge (a,b) within triangle t
  int edge_slot(int t, int a, int b) const {
    for (int k = 0; k < 3; ++k) {
      int u = mesh.F(t, k), v = mesh.F(t, (k + 1) % 3);
      if ((u == a && v == b) || (u == b && v == a)) return k;
    }
    throw std::runtime_error("refine: edge not found in triangle");
  }

  int longest_edge_slot(int t) const {
    double best = -1.0;
    std::uint64_t best_key = 0;
    int slot = 0;
    for (int k = 0; k < 3; ++k) {
      double len = (mesh.corner(t, k) - mesh.corner(t, (k + 1) % 3)).norm();
      // deterministic tie-break on the undirected vertex pair
      auto key = edge_key(mesh.F(t, k), mesh.F(t, (k + 1) % 3));
      double tol = 1e-12 * (1.0 + std::abs(best));
      if (len > best + tol || (std::abs(len - best) <= tol && key < best_key)) {
        best = len;
        slot = k;
        best_key = key;
      }
    }
    return slot;
  }

  int make_vertex(const Vec3& resolved) {
    Vec3 canon = resolved;
    if (mesh.periodic) {
      Vec2 tcoord = mesh.lattice.inverse() * resolved.head<2>();
      tcoord.x() -= std::floor(tcoord.x());
      tcoord.y() -= std::floor(tcoord.y());
      if (tcoord.x() >= 1.0) tcoord.x() -= 1.0;
      if (tcoord.y() >= 1.0) tcoord.y() -= 1.0;
      Vec2 xy = mesh.lattice * tcoord;
      canon = Vec3(xy.x(), xy.y(), 0.0);
    }
    if (placement) canon = placement(canon);
    int id = mesh.n_vertices();
    mesh.V.conservativeResize(id + 1, 3);
    mesh.V.row(id) = canon.transpose();
    if (!mesh.vertex_label.empty()) mesh.vertex_label.push_back(-1);
    return id;
  }

  void set_triangle(int t, int a, int b, int c, const Vec3& pa, const Vec3& pb, const Vec3& pc) {
    mesh.F(t, 0) = a;
    mesh.F(t, 1) = b;
    mesh.F(t, 2) = c;
    if (mesh.periodic) {
      const Vec3* pos[3] = {&pa, &pb, &pc};
      Mat2 inv = mesh.lattice.inverse();
      for (int k = 0; k < 3; ++k) {
        Vec2 d = inv * (pos[k]->head<2>() - mesh.V.row(mesh.F(t, k)).head<2>().transpose());
        int sx = static_cast<int>(std::lround(d.x()));
        int sy = static_cast<int>(std::lround(d.y()));
        if ((d - Vec2(sx, sy)).norm() > 1e-6)
          throw std::runtime_error("refine: corner does not reduce to a lattice shift");
        mesh.corner_shift(t, 2 * k) = sx;
        mesh.corner_shift(t, 2 * k + 1) = sy;
      }
    }
  }

  int append_triangle() {
    int t = mesh.n_triangles();
    mesh.F.conservativeResize(t + 1, 3);
    if (mesh.periodic) mesh.corner_shift.conservativeResize(t + 1, 6);
    return t;
  }

  // Bisect triangle t across its longest edge, recursively forcing the
  // neighbour to share that edge as its own longest edge first (Rivara).
  void bisect(int t, int depth = 0) {
    if (depth > 128) throw std::runtime_error("refine: longest-edge propagation did not terminate");
    int slot = longest_edge_slot(t);
    int a = mesh.F(t, slot), b = mesh.F(t, (slot + 1) % 3);
    int nb = table.neighbor(a, b, t);
    while (nb != -1) {
      int nslot = longest_edge_slot(nb);
      int na = mesh.F(nb, nslot), nbv = mesh.F(nb, (nslot + 1) % 3);
      if (edge_key(na, nbv) == edge_key(a, b)) break;
      bisect(nb, depth + 1);
      nb = table.neighbor(a, b, t);
    }

    // split t (and nb if present) across edge (a,b)
    Vec3 pa = mesh.corner(t, slot), pb = mesh.corner(t, (slot + 1) % 3);
    Vec3 pc = mesh.corner(t, (slot + 2) % 3);
    int c = mesh.F(t, (slot + 2) % 3);
    int m = make_vertex(0.5 * (pa + pb));
    Vec3 pm_t = 0.5 * (pa + pb);
    if (placement && !mesh.periodic) pm_t = mesh.V.row(m);  // placement may move the midpoint

    table.remove(mesh, t);
    int t2 = append_triangle();
    set_triangle(t, a, m, c, pa, pm_t, pc);
    set_triangle(t2, m, b, c, pm_t, pb, pc);
    table.add(mesh, t);
    table.add(mesh, t2);
    created.push_back(t);
    created.push_back(t2);

    if (nb != -1) {
      int nslot = edge_slot(nb, a, b);
      // neighbour sees the edge with opposite direction: F(nb,nslot) == b
      int nb_a = mesh.F(nb, nslot), nb_b = mesh.F(nb, (nslot + 1) % 3);
      Vec3 qa = mesh.corner(nb, nslot), qb = mesh.corner(nb, (nslot + 1) % 3);
      Vec3 qd = mesh.corner(nb, (nslot + 2) % 3);
      int d = mesh.F(nb, (nslot + 2) % 3);
      Vec3 qm = 0.5 * (qa + qb);
      if (placement && !mesh.periodic) qm = mesh.V.row(m);
      table.remove(mesh, nb);
      int n2 = append_triangle();
      set_triangle(nb, nb_a, m, d, qa, qm, qd);
      set_triangle(n2, m, nb_b, d, qm, qb, qd);
      table.add(mesh, nb);
      table.add(mesh, n2);
      created.push_back(nb);
      created.push_back(n2);
    }
  }
};

}  // namespace

void refine_longest_edge(TriMesh& mesh,
                         const std::function<bool(const TriMesh&, int)>& mark,
                         double max_edge,
                         const std::function<Vec3(const Vec3&)>& placement) {
  if (!(max_edge > 0.0)) throw std::invalid_argument("refine_longest_edge: max_edge must be positive");
  EdgeTable table(mesh);
  Splitter splitter{mesh, table, placement, {}};

  auto too_coarse = [&](int t) {
    for (int k = 0; k < 3; ++k)
      if ((mesh.corner(t, k) - mesh.corner(t, (k + 1) % 3)).norm() > max_edge) return true;
    return false;
  };

  std::deque<int> work;
  for (int t = 0; t < mesh.n_triangles(); ++t)
    if (mark(mesh, t) && too_coarse(t)) work.push_back(t);

  std::size_t guard = 0;
  while (!work.empty()) {
    int t = work.front();
    work.pop_front();
    if (t >= mesh.n_triangles()) continue;
    if (!mark(mesh, t) || !too_coarse(t)) continue;
    splitter.created.clear();
    splitter.bisect(t);
    for (int c : splitter.created)
      if (mark(mesh, c) && too_coarse(c)) work.push_back(c);
    if (++guard > 50'000'000) throw std::runtime_error("refine_longest_edge: runaway refinement");
  }
}

TriMesh refine_uniform(const TriMesh& mesh, const std::function<Vec3(const Vec3&)>& placement) {
  TriMesh out;
  out.periodic = mesh.periodic;
  out.lattice = mesh.lattice;
  out.V = mesh.V;
  out.vertex_label = mesh.vertex_label;

  std::unordered_map<std::uint64_t, int> midpoint;
  std::vector<Vec3> extra;
  auto mid_id = [&](int a, int b) {
    auto key = edge_key(a, b);
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    int id = mesh.n_vertices() + static_cast<int>(extra.size());
    extra.emplace_back(Vec3::Zero());  // resolved position filled by caller frame
    midpoint[key] = id;
    return id;
  };

  int nt = mesh.n_triangles();
  out.F.resize(4 * nt, 3);
  if (out.periodic) out.corner_shift.resize(4 * nt, 6);

  struct Pending {
    int tri;
    std::array<int, 3> ids;
    std::array<Vec3, 3> pos;
  };
  std::vector<Pending> pend;
  pend.reserve(nt);

  for (int t = 0; t < nt; ++t) {
    Vec3 p[3] = {mesh.corner(t, 0), mesh.corner(t, 1), mesh.corner(t, 2)};
    int m[3];
    Vec3 mp[3];
    for (int k = 0; k < 3; ++k) {
      m[k] = mid_id(mesh.F(t, k), mesh.F(t, (k + 1) % 3));
      mp[k] = 0.5 * (p[k] + p[(k + 1) % 3]);
    }
    pend.push_back({t, {m[0], m[1], m[2]}, {mp[0], mp[1], mp[2]}});
  }

  // Canonicalise midpoint coordinates once.
  std::vector<Vec3> canon(extra.size(), Vec3::Zero());
  std::vector<bool> have(extra.size(), false);
  Mat2 inv = mesh.lattice.inverse();
  auto canonicalize = [&](const Vec3& resolved) {
    if (!mesh.periodic) return placement ? placement(resolved) : resolved;
    Vec2 tc = inv * resolved.head<2>();
    tc.x() -= std::floor(tc.x());
    tc.y() -= std::floor(tc.y());
    if (tc.x() >= 1.0) tc.x() -= 1.0;
    if (tc.y() >= 1.0) tc.y() -= 1.0;
    Vec2 xy = mesh.lattice * tc;
    Vec3 c(xy.x(), xy.y(), 0.0);
    return placement ? placement(c) : c;
  };
  for (auto& pd : pend)
    for (int k = 0; k < 3; ++k) {
      int local = pd.ids[k] - mesh.n_vertices();
      if (!have[local]) {
        canon[local] = canonicalize(pd.pos[k]);
        have[local] = true;
      }
    }

  out.V.conservativeResize(mesh.n_vertices() + static_cast<int>(extra.size()), 3);
  for (size_t i = 0; i < canon.size(); ++i)
    out.V.row(mesh.n_vertices() + i) = canon[i].transpose();
  if (!out.vertex_label.empty()) out.vertex_label.resize(out.n_vertices(), -1);

  auto set_tri = [&](int row, std::array<int, 3> idx, std::array<Vec3, 3> pos) {
    for (int k = 0; k < 3; ++k) out.F(row, k) = idx[k];
    if (out.periodic) {
      for (int k = 0; k < 3; ++k) {
        Vec2 d = inv * (pos[k].head<2>() - out.V.row(idx[k]).head<2>().transpose());
        int sx = static_cast<int>(std::lround(d.x()));
        int sy = static_cast<int>(std::lround(d.y()));
        if ((d - Vec2(sx, sy)).norm() > 1e-6)
          throw std::runtime_error("refine_uniform: corner does not reduce to a lattice shift");
        out.corner_shift(row, 2 * k) = sx;
        out.corner_shift(row, 2 * k + 1) = sy;
      }
    }
  };

  for (int t = 0; t < nt; ++t) {
    Vec3 p[3] = {mesh.corner(t, 0), mesh.corner(t, 1), mesh.corner(t, 2)};
    auto& pd = pend[t];
    int v0 = mesh.F(t, 0), v1 = mesh.F(t, 1), v2 = mesh.F(t, 2);
    set_tri(4 * t + 0, {v0, pd.ids[0], pd.ids[2]}, {p[0], pd.pos[0], pd.pos[2]});
    set_tri(4 * t + 1, {v1, pd.ids[1], pd.ids[0]}, {p[1], pd.pos[1], pd.pos[0]});
    set_tri(4 * t + 2, {v2, pd.ids[2], pd.ids[1]}, {p[2], pd.pos[2], pd.pos[1]});
    set_tri(4 * t + 3, {pd.ids[0], pd.ids[1], pd.ids[2]}, {pd.pos[0], pd.pos[1], pd.pos[2]});
  }
  return out;
}

}  // namespace steklov
