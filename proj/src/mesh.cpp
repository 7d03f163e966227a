#include "pbs/mesh.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string_view>
#include <unordered_map>

#include "pbs/error.hpp"

namespace pbs {

Box3 TriangleMesh::bounds() const {
  Box3 b;
  for (const auto& v : vertices) b.extend(Vec3d(v.position));
  return b;
}

void TriangleMesh::validate() const {
  const auto n = vertices.size();
  for (std::size_t t = 0; t < triangles.size(); ++t)
    for (auto idx : triangles[t])
      if (idx >= n)
        throw Error("triangle " + std::to_string(t) + " references vertex " + std::to_string(idx) +
                    " but mesh has " + std::to_string(n) + " vertices");
}

namespace {

Vec3d face_normal_weighted(const TriangleMesh& mesh, const Triangle& t) {
  const Vec3d a(mesh.vertices[t[0]].position);
  const Vec3d b(mesh.vertices[t[1]].position);
  const Vec3d c(mesh.vertices[t[2]].position);
  return cross(b - a, c - a);  // length = 2 * area
}

}  // namespace

void TriangleMesh::compute_normals() {
  std::vector<Vec3d> acc(vertices.size());
  for (const auto& t : triangles) {
    const Vec3d n = face_normal_weighted(*this, t);
    for (auto idx : t) acc[idx] += n;
  }
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const Vec3d n = normalize(acc[i]);
    vertices[i].normal = length(n) > 0 ? Vec3f(n) : Vec3f{0, 0, 1};
  }
}

void TriangleMesh::normalize_normals() {
  std::vector<std::size_t> bad;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const Vec3d n(vertices[i].normal);
    const double len = length(n);
    if (len > 1e-12 && std::isfinite(len))
      vertices[i].normal = Vec3f(n / len);
    else
      bad.push_back(i);
  }
  if (bad.empty()) return;
  std::vector<Vec3d> acc(vertices.size());
  for (const auto& t : triangles) {
    const Vec3d n = face_normal_weighted(*this, t);
    for (auto idx : t) acc[idx] += n;
  }
  for (auto i : bad) {
    const Vec3d n = normalize(acc[i]);
    vertices[i].normal = length(n) > 0 ? Vec3f(n) : Vec3f{0, 0, 1};
  }
}

MeshFormat mesh_format_from_path(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (ext == ".obj") return MeshFormat::Obj;
  if (ext == ".ply") return MeshFormat::Ply;
  throw Error("unknown mesh format for '" + path.string() + "' (expected .obj or .ply)");
}

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// OBJ

struct ObjMaterial {
  Rgba ambient{0, 0, 0, 1};
  Rgba diffuse{0.5f, 0.5f, 0.5f, 1};
  bool has_ambient = false;
};

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

bool parse_float(std::string_view s, float& out) {
  // from_chars for float is available in libstdc++ 11.
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

bool parse_int(std::string_view s, long& out) {
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

Rgba combine_material(const ObjMaterial& m) {
  if (!m.has_ambient) return m.diffuse;
  return {0.25f * m.ambient.r + 0.75f * m.diffuse.r, 0.25f * m.ambient.g + 0.75f * m.diffuse.g,
          0.25f * m.ambient.b + 0.75f * m.diffuse.b, m.diffuse.a};
}

std::map<std::string, ObjMaterial> parse_mtl(const std::filesystem::path& path) {
  std::map<std::string, ObjMaterial> out;
  std::ifstream in(path);
  if (!in) return out;  // missing material libraries fall back to gray
  std::string line;
  ObjMaterial* cur = nullptr;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto tok = split_ws(line);
    if (tok.empty() || tok[0][0] == '#') continue;
    auto read_rgb = [&](Rgba& c) {
      float v[3];
      if (tok.size() < 4) throw ParseError(path.string(), lineno, 0, "expected three components");
      for (int i = 0; i < 3; ++i)
        if (!parse_float(tok[i + 1], v[i]))
          throw ParseError(path.string(), lineno, 0, "bad number '" + std::string(tok[i + 1]) + "'");
      c.r = v[0];
      c.g = v[1];
      c.b = v[2];
    };
    if (tok[0] == "newmtl" && tok.size() >= 2) {
      cur = &out[std::string(tok[1])];
    } else if (cur && tok[0] == "Kd") {
      read_rgb(cur->diffuse);
    } else if (cur && tok[0] == "Ka") {
      read_rgb(cur->ambient);
      cur->has_ambient = true;
    } else if (cur && tok[0] == "d" && tok.size() >= 2) {
      float a;
      if (parse_float(tok[1], a)) cur->diffuse.a = a;
    }
  }
  return out;
}

}  // namespace

TriangleMesh parse_obj(const std::string& text, const std::string& source_name,
                       const std::filesystem::path& base_dir) {
  std::vector<Vec3f> positions;
  std::vector<Rgba> vertex_colors;
  std::vector<bool> has_vertex_color;
  std::vector<Vec3f> normals;
  std::map<std::string, ObjMaterial> materials;
  Rgba material_color{0.5f, 0.5f, 0.5f, 1};
  int material_id = -1;
  std::map<std::string, int> material_ids;

  struct Key {
    long v, vn;
    int mat;
    bool operator<(const Key& o) const {
      return std::tie(v, vn, mat) < std::tie(o.v, o.vn, o.mat);
    }
  };
  std::map<Key, std::uint32_t> remap;
  TriangleMesh mesh;
  bool all_normals = true;

  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    const std::string_view line(text.data() + pos, end - pos);
    pos = end + 1;
    ++lineno;

    const auto tok = split_ws(line);
    if (tok.empty() || tok[0][0] == '#') continue;
    auto fail = [&](const std::string& what) -> ParseError {
      return ParseError(source_name, lineno, 0, what);
    };
    auto num = [&](std::size_t i) {
      float f;
      if (i >= tok.size()) throw fail("missing component");
      if (!parse_float(tok[i], f)) throw fail("bad number '" + std::string(tok[i]) + "'");
      return f;
    };

    if (tok[0] == "v") {
      positions.push_back({num(1), num(2), num(3)});
      if (tok.size() >= 7) {
        vertex_colors.push_back({num(4), num(5), num(6), 1});
        has_vertex_color.push_back(true);
      } else {
        vertex_colors.push_back({});
        has_vertex_color.push_back(false);
      }
    } else if (tok[0] == "vn") {
      normals.push_back({num(1), num(2), num(3)});
    } else if (tok[0] == "mtllib" && tok.size() >= 2) {
      auto more = parse_mtl(base_dir / std::string(tok[1]));
      materials.merge(more);
    } else if (tok[0] == "usemtl" && tok.size() >= 2) {
      const std::string name(tok[1]);
      auto it = materials.find(name);
      material_color = it != materials.end() ? combine_material(it->second) : Rgba{0.5f, 0.5f, 0.5f, 1};
      auto [mit, inserted] = material_ids.emplace(name, static_cast<int>(material_ids.size()));
      material_id = mit->second;
    } else if (tok[0] == "f") {
      if (tok.size() < 4) throw fail("face needs at least three vertices");
      std::vector<std::uint32_t> corners;
      for (std::size_t i = 1; i < tok.size(); ++i) {
        const std::string_view c = tok[i];
        const auto s1 = c.find('/');
        long vi = 0, ni = 0;
        if (!parse_int(c.substr(0, s1), vi)) throw fail("bad face index '" + std::string(c) + "'");
        if (s1 != std::string_view::npos) {
          const auto s2 = c.find('/', s1 + 1);
          if (s2 != std::string_view::npos && s2 + 1 < c.size()) {
            if (!parse_int(c.substr(s2 + 1), ni)) throw fail("bad normal index '" + std::string(c) + "'");
          }
        }
        const long nv = static_cast<long>(positions.size());
        const long nn = static_cast<long>(normals.size());
        if (vi < 0) vi = nv + vi + 1;
        if (ni < 0) ni = nn + ni + 1;
        if (vi < 1 || vi > nv)
          throw fail("vertex index " + std::string(c.substr(0, s1)) + " out of range (have " +
                     std::to_string(nv) + " vertices)");
        if (ni > nn) throw fail("normal index out of range (have " + std::to_string(nn) + " normals)");
        if (ni == 0) all_normals = false;

        const Key key{vi, ni, material_id};
        auto [it, inserted] = remap.emplace(key, static_cast<std::uint32_t>(mesh.vertices.size()));
        if (inserted) {
          Vertex vx;
          vx.position = positions[vi - 1];
          if (ni > 0) vx.normal = normals[ni - 1];
          vx.color = has_vertex_color[vi - 1] ? vertex_colors[vi - 1] : material_color;
          mesh.vertices.push_back(vx);
        }
        corners.push_back(it->second);
      }
      for (std::size_t i = 1; i + 1 < corners.size(); ++i)
        mesh.triangles.push_back({corners[0], corners[i], corners[i + 1]});
    }
  }

  if (mesh.triangles.empty()) throw Error(source_name + ": mesh has no triangles");
  mesh.validate();
  if (all_normals)
    mesh.normalize_normals();
  else
    mesh.compute_normals();
  return mesh;
}

// ---------------------------------------------------------------------------
// PLY

namespace {

enum class PlyType { Int8, UInt8, Int16, UInt16, Int32, UInt32, Float32, Float64 };

PlyType ply_type(std::string_view s, const std::string& src, std::size_t line) {
  if (s == "char" || s == "int8") return PlyType::Int8;
  if (s == "uchar" || s == "uint8") return PlyType::UInt8;
  if (s == "short" || s == "int16") return PlyType::Int16;
  if (s == "ushort" || s == "uint16") return PlyType::UInt16;
  if (s == "int" || s == "int32") return PlyType::Int32;
  if (s == "uint" || s == "uint32") return PlyType::UInt32;
  if (s == "float" || s == "float32") return PlyType::Float32;
  if (s == "double" || s == "float64") return PlyType::Float64;
  throw ParseError(src, line, 0, "unknown property type '" + std::string(s) + "'");
}

std::size_t ply_size(PlyType t) {
  switch (t) {
    case PlyType::Int8:
    case PlyType::UInt8: return 1;
    case PlyType::Int16:
    case PlyType::UInt16: return 2;
    case PlyType::Int32:
    case PlyType::UInt32:
    case PlyType::Float32: return 4;
    case PlyType::Float64: return 8;
  }
  return 0;
}

struct PlyProperty {
  std::string name;
  PlyType type = PlyType::Float32;
  bool is_list = false;
  PlyType count_type = PlyType::UInt8;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> props;
};

// Reads values either from a little-endian binary payload or ASCII tokens.
class PlyReader {
 public:
  PlyReader(const std::string& data, std::size_t offset, bool ascii, std::string src)
      : data_(data), pos_(offset), ascii_(ascii), src_(std::move(src)) {
    if (ascii_) {
      // Count lines of the header for error messages.
      line_ = static_cast<std::size_t>(std::count(data.begin(), data.begin() + offset, '\n')) + 1;
    }
  }

  double read(PlyType t) {
    if (ascii_) return read_ascii();
    const std::size_t n = ply_size(t);
    if (pos_ + n > data_.size())
      throw ParseError(src_, 0, pos_,
                       "truncated payload: need " + std::to_string(pos_ + n) + " bytes, file has " +
                           std::to_string(data_.size()));
    const char* p = data_.data() + pos_;
    pos_ += n;
    switch (t) {
      case PlyType::Int8: { std::int8_t v; std::memcpy(&v, p, 1); return v; }
      case PlyType::UInt8: { std::uint8_t v; std::memcpy(&v, p, 1); return v; }
      case PlyType::Int16: { std::int16_t v; std::memcpy(&v, p, 2); return v; }
      case PlyType::UInt16: { std::uint16_t v; std::memcpy(&v, p, 2); return v; }
      case PlyType::Int32: { std::int32_t v; std::memcpy(&v, p, 4); return v; }
      case PlyType::UInt32: { std::uint32_t v; std::memcpy(&v, p, 4); return v; }
      case PlyType::Float32: { float v; std::memcpy(&v, p, 4); return v; }
      case PlyType::Float64: { double v; std::memcpy(&v, p, 8); return v; }
    }
    return 0;
  }

  ParseError error(const std::string& what) const {
    return ascii_ ? ParseError(src_, line_, 0, what) : ParseError(src_, 0, pos_, what);
  }

 private:
  double read_ascii() {
    while (pos_ < data_.size() && std::isspace(static_cast<unsigned char>(data_[pos_]))) {
      if (data_[pos_] == '\n') ++line_;
      ++pos_;
    }
    const std::size_t start = pos_;
    while (pos_ < data_.size() && !std::isspace(static_cast<unsigned char>(data_[pos_]))) ++pos_;
    if (start == pos_) throw ParseError(src_, line_, 0, "unexpected end of data");
    double v;
    const auto res = std::from_chars(data_.data() + start, data_.data() + pos_, v);
    if (res.ec != std::errc() || res.ptr != data_.data() + pos_)
      throw ParseError(src_, line_, 0, "bad number '" + data_.substr(start, pos_ - start) + "'");
    return v;
  }

  const std::string& data_;
  std::size_t pos_;
  bool ascii_;
  std::string src_;
  std::size_t line_ = 0;
};

}  // namespace

TriangleMesh parse_ply(const std::string& bytes, const std::string& source_name) {
  // Header is ASCII, terminated by "end_header\n".
  std::size_t pos = 0, lineno = 0;
  auto next_line = [&]() -> std::string_view {
    if (pos >= bytes.size())
      throw ParseError(source_name, lineno + 1, 0, "unexpected end of header");
    std::size_t end = bytes.find('\n', pos);
    if (end == std::string::npos) end = bytes.size();
    std::string_view line(bytes.data() + pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = end + 1;
    ++lineno;
    return line;
  };

  if (next_line() != "ply") throw ParseError(source_name, 1, 0, "missing 'ply' magic");
  bool ascii = false;
  bool have_format = false;
  std::vector<PlyElement> elements;
  for (;;) {
    const auto line = next_line();
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok[0] == "end_header") break;
    if (tok[0] == "comment" || tok[0] == "obj_info") continue;
    if (tok[0] == "format") {
      if (tok.size() < 2) throw ParseError(source_name, lineno, 0, "bad format line");
      if (tok[1] == "ascii")
        ascii = true;
      else if (tok[1] != "binary_little_endian")
        throw ParseError(source_name, lineno, 0, "unsupported format '" + std::string(tok[1]) + "'");
      have_format = true;
    } else if (tok[0] == "element") {
      if (tok.size() < 3) throw ParseError(source_name, lineno, 0, "bad element line");
      long n;
      if (!parse_int(tok[2], n) || n < 0)
        throw ParseError(source_name, lineno, 0, "bad element count");
      elements.push_back({std::string(tok[1]), static_cast<std::size_t>(n), {}});
    } else if (tok[0] == "property") {
      if (elements.empty()) throw ParseError(source_name, lineno, 0, "property before element");
      PlyProperty p;
      if (tok.size() >= 5 && tok[1] == "list") {
        p.is_list = true;
        p.count_type = ply_type(tok[2], source_name, lineno);
        p.type = ply_type(tok[3], source_name, lineno);
        p.name = tok[4];
      } else if (tok.size() >= 3) {
        p.type = ply_type(tok[1], source_name, lineno);
        p.name = tok[2];
      } else {
        throw ParseError(source_name, lineno, 0, "bad property line");
      }
      elements.back().props.push_back(p);
    } else {
      throw ParseError(source_name, lineno, 0, "unknown header keyword '" + std::string(tok[0]) + "'");
    }
  }
  if (!have_format) throw ParseError(source_name, lineno, 0, "missing format line");

  TriangleMesh mesh;
  bool have_normals = false;
  PlyReader reader(bytes, pos, ascii, source_name);
  for (const auto& el : elements) {
    if (el.name == "vertex") {
      int ix = -1, iy = -1, iz = -1, inx = -1, iny = -1, inz = -1, ir = -1, ig = -1, ib = -1, ia = -1;
      for (std::size_t i = 0; i < el.props.size(); ++i) {
        const auto& n = el.props[i].name;
        const int ii = static_cast<int>(i);
        if (n == "x") ix = ii;
        else if (n == "y") iy = ii;
        else if (n == "z") iz = ii;
        else if (n == "nx") inx = ii;
        else if (n == "ny") iny = ii;
        else if (n == "nz") inz = ii;
        else if (n == "red" || n == "r") ir = ii;
        else if (n == "green" || n == "g") ig = ii;
        else if (n == "blue" || n == "b") ib = ii;
        else if (n == "alpha" || n == "a") ia = ii;
      }
      if (ix < 0 || iy < 0 || iz < 0) throw reader.error("vertex element lacks x/y/z");
      have_normals = inx >= 0 && iny >= 0 && inz >= 0;
      mesh.vertices.resize(el.count);
      std::vector<double> vals(el.props.size());
      auto color = [&](int idx, float fallback) -> float {
        if (idx < 0) return fallback;
        const auto t = el.props[idx].type;
        const double v = vals[idx];
        return (t == PlyType::Float32 || t == PlyType::Float64) ? static_cast<float>(v)
                                                                : static_cast<float>(v / 255.0);
      };
      for (std::size_t v = 0; v < el.count; ++v) {
        for (std::size_t i = 0; i < el.props.size(); ++i) {
          const auto& p = el.props[i];
          if (p.is_list) {
            const auto n = static_cast<std::size_t>(reader.read(p.count_type));
            for (std::size_t k = 0; k < n; ++k) reader.read(p.type);
            vals[i] = 0;
          } else {
            vals[i] = reader.read(p.type);
          }
        }
        auto& vx = mesh.vertices[v];
        vx.position = {static_cast<float>(vals[ix]), static_cast<float>(vals[iy]),
                       static_cast<float>(vals[iz])};
        if (have_normals)
          vx.normal = {static_cast<float>(vals[inx]), static_cast<float>(vals[iny]),
                       static_cast<float>(vals[inz])};
        if (ir >= 0 || ig >= 0 || ib >= 0)
          vx.color = {color(ir, 0.5f), color(ig, 0.5f), color(ib, 0.5f), color(ia, 1.0f)};
      }
    } else if (el.name == "face") {
      int il = -1;
      for (std::size_t i = 0; i < el.props.size(); ++i)
        if (el.props[i].is_list &&
            (el.props[i].name == "vertex_indices" || el.props[i].name == "vertex_index"))
          il = static_cast<int>(i);
      if (il < 0) throw reader.error("face element lacks vertex_indices");
      std::vector<std::uint32_t> idx;
      for (std::size_t f = 0; f < el.count; ++f) {
        for (std::size_t i = 0; i < el.props.size(); ++i) {
          const auto& p = el.props[i];
          if (!p.is_list) {
            reader.read(p.type);
            continue;
          }
          const auto n = static_cast<std::size_t>(reader.read(p.count_type));
          idx.clear();
          for (std::size_t k = 0; k < n; ++k) {
            const double d = reader.read(p.type);
            if (d < 0 || d >= static_cast<double>(mesh.vertices.size()))
              throw reader.error("face " + std::to_string(f) + " index " +
                                 std::to_string(static_cast<long long>(d)) + " out of range (have " +
                                 std::to_string(mesh.vertices.size()) + " vertices)");
            idx.push_back(static_cast<std::uint32_t>(d));
          }
          if (static_cast<int>(i) != il) continue;
          for (std::size_t k = 1; k + 1 < idx.size(); ++k)
            mesh.triangles.push_back({idx[0], idx[k], idx[k + 1]});
        }
      }
    } else {
      for (std::size_t e = 0; e < el.count; ++e)
        for (const auto& p : el.props) {
          if (p.is_list) {
            const auto n = static_cast<std::size_t>(reader.read(p.count_type));
            for (std::size_t k = 0; k < n; ++k) reader.read(p.type);
          } else {
            reader.read(p.type);
          }
        }
    }
  }

  if (mesh.triangles.empty()) throw Error(source_name + ": mesh has no triangles");
  mesh.validate();
  if (have_normals)
    mesh.normalize_normals();
  else
    mesh.compute_normals();
  return mesh;
}

TriangleMesh load_mesh(const std::filesystem::path& path, MeshFormat format) {
  const std::string data = read_file(path);
  if (format == MeshFormat::Obj) return parse_obj(data, path.string(), path.parent_path());
  return parse_ply(data, path.string());
}

TriangleMesh load_mesh(const std::filesystem::path& path) {
  return load_mesh(path, mesh_format_from_path(path));
}

namespace {

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

}  // namespace

std::string encode_ply(const TriangleMesh& mesh) {
  std::string out;
  out += "ply\nformat binary_little_endian 1.0\n";
  out += "element vertex " + std::to_string(mesh.vertices.size()) + "\n";
  out += "property float x\nproperty float y\nproperty float z\n";
  out += "property float nx\nproperty float ny\nproperty float nz\n";
  out += "property uchar red\nproperty uchar green\nproperty uchar blue\nproperty uchar alpha\n";
  out += "element face " + std::to_string(mesh.triangles.size()) + "\n";
  out += "property list uchar uint vertex_indices\nend_header\n";
  out.reserve(out.size() + mesh.vertices.size() * 28 + mesh.triangles.size() * 13);
  for (const auto& v : mesh.vertices) {
    put(out, v.position.x);
    put(out, v.position.y);
    put(out, v.position.z);
    put(out, v.normal.x);
    put(out, v.normal.y);
    put(out, v.normal.z);
    for (auto c : to_rgba8(v.color)) put(out, c);
  }
  for (const auto& t : mesh.triangles) {
    put(out, std::uint8_t{3});
    for (auto i : t) put(out, i);
  }
  return out;
}

void write_ply(const TriangleMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  const std::string data = encode_ply(mesh);
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

}  // namespace pbs
