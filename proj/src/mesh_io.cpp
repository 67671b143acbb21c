#include "steklov/mesh_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace steklov {

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_off(const TriMesh& mesh, const std::string& path,
               const std::optional<SurfaceModel>& model) {
  std::ofstream off(path);
  if (!off) throw std::runtime_error("write_off: cannot open " + path);
  off << "OFF\n" << mesh.n_vertices() << " " << mesh.n_triangles() << " 0\n";
  for (int v = 0; v < mesh.n_vertices(); ++v)
    off << format_double(mesh.V(v, 0)) << " " << format_double(mesh.V(v, 1)) << " "
        << format_double(mesh.V(v, 2)) << "\n";
  for (int t = 0; t < mesh.n_triangles(); ++t)
    off << "3 " << mesh.F(t, 0) << " " << mesh.F(t, 1) << " " << mesh.F(t, 2) << "\n";
  off.close();

  nlohmann::ordered_json meta;
  meta["format"] = "steklov-mesh-meta";
  meta["version"] = 1;
  if (model) {
    if (model->is_torus()) {
      meta["model"] = {{"kind", "flat_torus"},
                       {"lattice", {{model->lattice(0, 0), model->lattice(0, 1)},
                                    {model->lattice(1, 0), model->lattice(1, 1)}}}};
    } else {
      meta["model"] = {{"kind", "round_sphere"}, {"radius", model->radius}};
    }
  }
  meta["periodic"] = mesh.periodic;
  if (mesh.periodic) {
    meta["lattice"] = {{mesh.lattice(0, 0), mesh.lattice(0, 1)},
                       {mesh.lattice(1, 0), mesh.lattice(1, 1)}};
    auto shifts = nlohmann::ordered_json::array();
    for (int t = 0; t < mesh.n_triangles(); ++t) {
      auto row = nlohmann::ordered_json::array();
      for (int k = 0; k < 6; ++k) row.push_back(mesh.corner_shift(t, k));
      shifts.push_back(std::move(row));
    }
    meta["corner_shift"] = std::move(shifts);
  }
  if (!mesh.vertex_label.empty()) meta["vertex_label"] = mesh.vertex_label;

  std::ofstream side(path + ".meta.json");
  if (!side) throw std::runtime_error("write_off: cannot open " + path + ".meta.json");
  side << meta.dump(2) << "\n";
}

TriMesh read_off(const std::string& path) {
  std::ifstream off(path);
  if (!off) throw std::runtime_error("read_off: cannot open " + path);
  std::string magic;
  off >> magic;
  if (magic != "OFF") throw std::runtime_error("read_off: not an OFF file: " + path);
  int nv = 0, nf = 0, ne = 0;
  off >> nv >> nf >> ne;
  TriMesh mesh;
  mesh.V.resize(nv, 3);
  for (int v = 0; v < nv; ++v) off >> mesh.V(v, 0) >> mesh.V(v, 1) >> mesh.V(v, 2);
  mesh.F.resize(nf, 3);
  for (int t = 0; t < nf; ++t) {
    int deg;
    off >> deg;
    if (deg != 3) throw std::runtime_error("read_off: non-triangular face");
    off >> mesh.F(t, 0) >> mesh.F(t, 1) >> mesh.F(t, 2);
  }
  if (!off) throw std::runtime_error("read_off: truncated file " + path);

  std::string side_path = path + ".meta.json";
  if (std::filesystem::exists(side_path)) {
    std::ifstream side(side_path);
    nlohmann::json meta = nlohmann::json::parse(side);
    mesh.periodic = meta.value("periodic", false);
    if (mesh.periodic) {
      auto lat = meta.at("lattice");
      mesh.lattice << lat[0][0].get<double>(), lat[0][1].get<double>(),
          lat[1][0].get<double>(), lat[1][1].get<double>();
      auto shifts = meta.at("corner_shift");
      mesh.corner_shift.resize(nf, 6);
      for (int t = 0; t < nf; ++t)
        for (int k = 0; k < 6; ++k) mesh.corner_shift(t, k) = shifts[t][k].get<int>();
    }
    if (meta.contains("vertex_label"))
      mesh.vertex_label = meta["vertex_label"].get<std::vector<int>>();
  }
  return mesh;
}

std::string mesh_checksum(const TriMesh& mesh) {
  // FNV-1a over the raw vertex and index bytes.
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](const void* data, size_t n) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 1099511628211ull;
    }
  };
  mix(mesh.V.data(), sizeof(double) * mesh.V.size());
  mix(mesh.F.data(), sizeof(int) * mesh.F.size());
  if (mesh.periodic) mix(mesh.corner_shift.data(), sizeof(int) * mesh.corner_shift.size());
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

}  // namespace steklov
