#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pbs/geometry.hpp"

namespace pbs {

struct Vertex {
  Vec3f position;
  Vec3f normal{0, 0, 1};
  Rgba color{0.5f, 0.5f, 0.5f, 1.0f};
};

using Triangle = std::array<std::uint32_t, 3>;

struct TriangleMesh {
  std::vector<Vertex> vertices;
  std::vector<Triangle> triangles;

  std::size_t triangle_count() const { return triangles.size(); }
  Box3 bounds() const;

  /// Throws pbs::Error if a triangle references a missing vertex.
  void validate() const;
  /// Renormalizes stored normals; zero normals fall back to the face normal
  /// of an adjacent triangle, or +z when every adjacent face is degenerate.
  void normalize_normals();
  /// Replaces vertex normals by area-weighted averages of adjacent face normals.
  void compute_normals();
};

enum class MeshFormat { Obj, Ply };

/// Guesses the format from the file extension (.obj / .ply, case-insensitive).
MeshFormat mesh_format_from_path(const std::filesystem::path& path);

/// Loads an OBJ or PLY triangle mesh. Normals are renormalized (or computed
/// when absent) and missing vertex colors default to opaque mid-gray.
/// Throws ParseError on malformed input and Error on a mesh without triangles.
TriangleMesh load_mesh(const std::filesystem::path& path, MeshFormat format);
TriangleMesh load_mesh(const std::filesystem::path& path);

TriangleMesh parse_obj(const std::string& text, const std::string& source_name = "<obj>",
                       const std::filesystem::path& base_dir = {});
TriangleMesh parse_ply(const std::string& bytes, const std::string& source_name = "<ply>");

/// Writes binary little-endian PLY with x,y,z,nx,ny,nz,red,green,blue,alpha.
void write_ply(const TriangleMesh& mesh, const std::filesystem::path& path);
std::string encode_ply(const TriangleMesh& mesh);

}  // namespace pbs
