#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

#include "pbs/error.hpp"
#include "pbs/lodpipe.hpp"

namespace pbs {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr const char* kFormatTag = "pbs-scene";
constexpr int kManifestVersion = 1;

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

json box_to_json(const Box3& b) {
  if (b.empty()) return nullptr;
  return {{"min", {b.min.x, b.min.y, b.min.z}}, {"max", {b.max.x, b.max.y, b.max.z}}};
}

Box3 box_from_json(const json& j) {
  Box3 b;
  if (j.is_null()) return b;
  for (int i = 0; i < 3; ++i) {
    b.min[i] = j.at("min").at(i).get<double>();
    b.max[i] = j.at("max").at(i).get<double>();
  }
  return b;
}

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot open " + path.string() + " for writing");
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw Error("failed writing " + path.string());
}

}  // namespace

void write_manifest(const Scene& scene, const fs::path& dir, const BuildInfo* info) {
  if (scene.empty() || scene.root() == kNoNode) throw Error("cannot write an empty scene");
  fs::create_directories(dir / "meshes");
  fs::create_directories(dir / "lods");

  std::map<const TriangleMesh*, std::string> mesh_refs;
  std::map<std::uint64_t, std::string> written;  // content hash -> relative path

  json nodes = json::array();
  for (const auto& n : scene.nodes()) {
    json jn;
    jn["id"] = n.id;
    jn["name"] = n.name;
    jn["transform"] = n.transform.m;
    jn["bounds"] = box_to_json(n.bounds);
    jn["triangleCount"] = n.triangle_count;
    jn["children"] = n.children;
    if (!n.cell_bounds.empty()) jn["cellBounds"] = box_to_json(n.cell_bounds);
    if (n.mesh) {
      auto it = mesh_refs.find(n.mesh.get());
      if (it == mesh_refs.end()) {
        const std::string bytes = encode_ply(*n.mesh);
        const std::uint64_t h = fnv1a(bytes);
        auto w = written.find(h);
        if (w == written.end()) {
          const std::string rel = "meshes/" + hex64(h) + ".ply";
          write_file(dir / rel, bytes);
          w = written.emplace(h, rel).first;
        }
        it = mesh_refs.emplace(n.mesh.get(), w->second).first;
      }
      jn["mesh"] = it->second;
    }
    if (n.lod) {
      const std::string rel = "lods/node_" + std::to_string(n.id) + ".pbs";
      write_surfel_file(*n.lod, dir / rel);
      jn["lod"] = {{"file", rel}, {"count", n.lod->size()}, {"p_m", n.lod->p_m}, {"r_m", n.lod->r_m}};
    }
    nodes.push_back(std::move(jn));
  }

  json doc;
  doc["format"] = kFormatTag;
  doc["version"] = kManifestVersion;
  doc["root"] = scene.root();
  if (info)
    doc["build"] = {{"resolution", info->resolution},   {"sampleSize", info->sample_size},
                    {"k", info->heuristic_period},      {"maxSurfels", info->max_surfels},
                    {"seed", info->seed},               {"bottomUp", info->bottom_up}};
  doc["nodes"] = std::move(nodes);
  write_file(dir / kManifestName, doc.dump(1) + "\n");
}

Scene read_manifest(const fs::path& dir_or_file, BuildInfo* info) {
  const fs::path file = fs::is_directory(dir_or_file) ? dir_or_file / kManifestName : dir_or_file;
  const fs::path dir = file.parent_path();
  std::ifstream f(file);
  if (!f) throw Error("cannot open manifest " + file.string());
  json doc;
  try {
    doc = json::parse(f);
  } catch (const json::parse_error& e) {
    throw ParseError(file.string(), 0, e.byte, e.what());
  }

  Scene scene;
  try {
    if (doc.value("format", std::string()) != kFormatTag) throw ParseError(file.string(), 0, 0, "not a scene manifest");
    if (doc.at("version").get<int>() != kManifestVersion)
      throw ParseError(file.string(), 0, 0, "unsupported manifest version");
    if (info && doc.contains("build")) {
      const auto& b = doc["build"];
      info->resolution = b.value("resolution", 0u);
      info->sample_size = b.value("sampleSize", 0u);
      info->heuristic_period = b.value("k", 0u);
      info->max_surfels = b.value("maxSurfels", 0u);
      info->seed = b.value("seed", std::uint64_t{0});
      info->bottom_up = b.value("bottomUp", true);
    }

    std::map<std::string, std::shared_ptr<const TriangleMesh>> meshes;
    auto resolve = [&](const std::string& rel) {
      const fs::path p = dir / rel;
      if (!fs::is_regular_file(p))
        throw Error("manifest " + file.string() + " references missing file " + rel);
      return p;
    };

    std::vector<std::uint64_t> stored_counts;
    for (const auto& jn : doc.at("nodes")) {
      SceneNode n;
      n.id = jn.at("id").get<NodeId>();
      n.name = jn.value("name", std::string());
      const auto& t = jn.at("transform");
      if (t.size() != 16) throw ParseError(file.string(), 0, 0, "node " + std::to_string(n.id) + ": transform needs 16 values");
      for (std::size_t i = 0; i < 16; ++i) n.transform.m[i] = t[i].get<double>();
      n.children = jn.value("children", std::vector<NodeId>{});
      if (jn.contains("cellBounds")) n.cell_bounds = box_from_json(jn["cellBounds"]);
      if (jn.contains("mesh")) {
        const std::string rel = jn["mesh"].get<std::string>();
        auto it = meshes.find(rel);
        if (it == meshes.end())
          it = meshes.emplace(rel, std::make_shared<const TriangleMesh>(load_mesh(resolve(rel), MeshFormat::Ply))).first;
        n.mesh = it->second;
      }
      if (jn.contains("lod")) {
        const auto& jl = jn["lod"];
        auto cloud = std::make_shared<SurfelCloud>(read_surfel_file(resolve(jl.at("file").get<std::string>())));
        if (jl.contains("count") && jl["count"].get<std::uint64_t>() != cloud->size())
          throw Error("manifest count for node " + std::to_string(n.id) + " disagrees with its surfel file");
        n.lod = std::move(cloud);
      }
      stored_counts.push_back(jn.value("triangleCount", std::uint64_t{0}));
      scene.add_node(std::move(n));
    }
    scene.set_root(doc.at("root").get<NodeId>());
    scene.finalize();
    for (const auto& n : scene.nodes())
      if (stored_counts[n.id] != n.triangle_count)
        throw Error("manifest triangle count for node " + std::to_string(n.id) + " disagrees with its meshes");
  } catch (const json::exception& e) {
    throw ParseError(file.string(), 0, 0, e.what());
  }
  return scene;
}

}  // namespace pbs
