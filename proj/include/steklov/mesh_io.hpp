#pragma once

#include <optional>
#include <string>

#include "steklov/mesh.hpp"

namespace steklov {

// ASCII OFF with a JSON sidecar ("<path>.meta.json") holding what OFF cannot
// express: the model, periodic corner shifts and vertex labels. Field names
// are documented in the README.
void write_off(const TriMesh& mesh, const std::string& path,
               const std::optional<SurfaceModel>& model = std::nullopt);
TriMesh read_off(const std::string& path);

std::string mesh_checksum(const TriMesh& mesh);

}  // namespace steklov
