#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include "CLI11.hpp"
#include "httplib.h"
#include "json.hpp"

#include "pbs/bench.hpp"
#include "pbs/error.hpp"
#include "pbs/image.hpp"
#include "pbs/lodpipe.hpp"
#include "pbs/prefixmath.hpp"
#include "pbs/procedural.hpp"
#include "pbs/raster.hpp"
#include "pbs/renderer.hpp"

namespace fs = std::filesystem;
using namespace pbs;

namespace {

bool is_manifest_path(const fs::path& p) {
  return fs::is_directory(p) || p.extension() == ".json";
}

Scene load_scene_input(const fs::path& p) {
  if (is_manifest_path(p)) return read_manifest(p);
  return make_single_mesh_scene(std::make_shared<const TriangleMesh>(load_mesh(p)));
}

Resolution parse_size(const std::string& s) {
  const auto x = s.find('x');
  if (x == std::string::npos) throw Error("size must look like WIDTHxHEIGHT, got '" + s + "'");
  Resolution r{std::stoi(s.substr(0, x)), std::stoi(s.substr(x + 1))};
  if (r.width < 8 || r.height < 8) throw Error("size must be at least 8x8");
  return r;
}

std::vector<Resolution> parse_sizes(const std::string& list) {
  std::vector<Resolution> out;
  std::stringstream ss(list);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(parse_size(item));
  return out;
}

RadiusRule parse_rule(const std::string& s) {
  if (s == "consistent") return RadiusRule::Consistent;
  if (s == "as-printed") return RadiusRule::AsPrinted;
  throw Error("radius rule must be 'consistent' or 'as-printed'");
}

Vec3d vec_from(const nlohmann::json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

// Pose file: {"position": [x,y,z], "target": [x,y,z] | "forward": [x,y,z],
//  "up": [x,y,z], "fovYDegrees": 60, "projection": "perspective"|"orthographic",
//  "orthoPixelSize": 0.01}
CameraModel read_pose(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open camera pose " + path.string());
  const auto j = nlohmann::json::parse(f);
  CameraModel cam;
  cam.position = vec_from(j.at("position"));
  if (j.contains("target")) cam.forward = normalize(vec_from(j["target"]) - cam.position);
  else cam.forward = normalize(vec_from(j.at("forward")));
  if (j.contains("up")) cam.up = vec_from(j["up"]);
  cam.fov_y = j.value("fovYDegrees", 60.0) * std::numbers::pi / 180.0;
  if (j.value("projection", std::string("perspective")) == "orthographic") {
    cam.projection = CameraModel::Projection::Orthographic;
    cam.ortho_pixel_size = j.value("orthoPixelSize", 0.01);
  }
  cam.near_plane = j.value("near", cam.near_plane);
  return cam;
}

void open_out(std::ofstream& f, const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  f.open(p);
  if (!f) throw Error("cannot open " + p.string() + " for writing");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Progressive surfel LOD toolkit"};
  app.require_subcommand(1);

  // gen-scene
  std::string gen_name = "torus";
  std::string gen_out;
  std::uint64_t gen_seed = 1;
  auto* gen = app.add_subcommand("gen-scene", "Write a procedural test scene as a manifest directory");
  gen->add_option("--name", gen_name, "torus, sphere, cube, grid or city")->capture_default_str();
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--seed", gen_seed)->capture_default_str();

  // build
  std::string build_scene, build_out;
  CaptureConfig capture;
  SamplingConfig sampling;
  sampling.seed = 0;
  LodPolicy policy;
  bool top_down = false;
  auto* build = app.add_subcommand("build", "Generate surfel LODs for a scene");
  build->add_option("--scene", build_scene, "Manifest directory/JSON or a mesh file (OBJ/PLY)")->required();
  build->add_option("--out", build_out, "Output directory")->required();
  build->add_option("--resolution", capture.resolution, "Capture resolution per direction")->capture_default_str();
  build->add_option("--sample-size", sampling.sample_size)->capture_default_str();
  build->add_option("--k", sampling.heuristic_period, "Rounds per extra pick per round")->capture_default_str();
  build->add_option("--max-surfels", policy.max_surfels)->capture_default_str();
  build->add_option("--lod-threshold", policy.lod_triangle_threshold)->capture_default_str();
  build->add_option("--min-triangles", policy.min_triangles_for_lod)->capture_default_str();
  build->add_option("--seed", sampling.seed)->capture_default_str();
  build->add_option("--threads", policy.threads)->capture_default_str();
  build->add_flag("--top-down", top_down, "Capture original geometry for every node");

  // render
  std::string render_scene, render_camera, render_size = "640x480", render_out = "frame.png", render_rule = "consistent";
  double render_surfel_size = 1.0;
  bool render_no_lod = false;
  auto* render = app.add_subcommand("render", "Render one frame with the headless renderer");
  render->add_option("--scene", render_scene)->required();
  render->add_option("--camera", render_camera, "Camera pose JSON file")->required();
  render->add_option("--size", render_size)->capture_default_str();
  render->add_option("--surfel-size", render_surfel_size)->capture_default_str();
  render->add_option("--rule", render_rule, "consistent or as-printed")->capture_default_str();
  render->add_option("--out", render_out)->capture_default_str();
  render->add_flag("--no-lod", render_no_lod);

  // bench
  auto* bench = app.add_subcommand("bench", "Benchmarks writing CSV reports");
  bench->require_subcommand(1);
  std::string bench_scene, bench_out = "report.csv", bench_sizes = "320x240,640x480", bench_rule = "consistent";
  std::size_t bench_views = 4, bench_count = 16;
  double bench_surfel_size = 1.0, bench_height = 1.7, bench_t_target = 11.1;
  int bench_reps = 3;
  std::string bench_targets = "10000,50000,100000";
  auto* bviews = bench->add_subcommand("views", "LOD vs no-LOD renders over orbit views and resolutions");
  auto* bgrid = bench->add_subcommand("grid", "Frame times over a grid of positions with the adaptive controller");
  auto* bpre = bench->add_subcommand("preprocess", "Stage timings of capture, candidates and sampling");
  for (auto* sc : {bviews, bgrid, bpre}) {
    sc->add_option("--scene", bench_scene)->required();
    sc->add_option("--out", bench_out)->capture_default_str();
  }
  bviews->add_option("--views", bench_views)->capture_default_str();
  bviews->add_option("--sizes", bench_sizes)->capture_default_str();
  bviews->add_option("--surfel-size", bench_surfel_size)->capture_default_str();
  bviews->add_option("--rule", bench_rule)->capture_default_str();
  bviews->add_option("--repetitions", bench_reps)->capture_default_str();
  bgrid->add_option("--count", bench_count)->capture_default_str();
  bgrid->add_option("--height", bench_height, "Camera height above the scene bottom")->capture_default_str();
  bgrid->add_option("--t-target", bench_t_target, "Target frame time in ms")->capture_default_str();
  std::string grid_size = "320x240";
  bgrid->add_option("--size", grid_size)->capture_default_str();
  CaptureConfig pre_capture;
  std::uint64_t pre_seed = 0;
  bpre->add_option("--targets", bench_targets)->capture_default_str();
  bpre->add_option("--resolution", pre_capture.resolution)->capture_default_str();
  bpre->add_option("--repetitions", bench_reps)->capture_default_str();
  bpre->add_option("--seed", pre_seed)->capture_default_str();

  // serve
  std::string serve_dir = ".", serve_host = "127.0.0.1";
  int serve_port = 8080;
  auto* serve = app.add_subcommand("serve", "Serve a build directory over HTTP");
  serve->add_option("--dir", serve_dir)->capture_default_str();
  serve->add_option("--host", serve_host)->capture_default_str();
  serve->add_option("--port", serve_port)->capture_default_str();

  // dump-gbuffer
  std::string dump_scene, dump_out = "gbuffer.png", dump_channel = "color";
  NodeId dump_node = kNoNode;
  int dump_direction = 0;
  std::uint32_t dump_resolution = 512;
  auto* dump = app.add_subcommand("dump-gbuffer", "Write one capture channel of one node as an image");
  dump->add_option("--scene", dump_scene)->required();
  dump->add_option("--node", dump_node, "Node id (default: root)");
  dump->add_option("--direction", dump_direction, "Corner direction index 0-7")->capture_default_str();
  dump->add_option("--channel", dump_channel, "coverage, position, normal, color or depth")->capture_default_str();
  dump->add_option("--resolution", dump_resolution)->capture_default_str();
  dump->add_option("--out", dump_out)->capture_default_str();

  // vectors
  std::string vectors_out = "test_vectors.json";
  auto* vectors = app.add_subcommand("vectors", "Export formula test vectors as JSON");
  vectors->add_option("--out", vectors_out)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const Scene scene = make_named_scene(gen_name, gen_seed);
      write_manifest(scene, gen_out);
      std::cout << "wrote " << scene.size() << " nodes, " << scene.node(scene.root()).triangle_count
                << " triangles to " << gen_out << "\n";
    } else if (*build) {
      Scene scene = load_scene_input(build_scene);
      policy.bottom_up = !top_down;
      const LodReport report = generate_lods(scene, policy, capture, sampling);
      for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
      BuildInfo info{capture.resolution, sampling.sample_size, sampling.heuristic_period, policy.max_surfels,
                     sampling.seed, policy.bottom_up};
      write_manifest(scene, build_out, &info);
      std::cout << "node,triangles,candidates,surfels,capture_ms,candidate_ms,sampling_ms\n";
      for (const auto& n : report.nodes)
        std::cout << n.node << ',' << n.triangle_count << ',' << n.candidates << ',' << n.surfels << ','
                  << n.capture_ms << ',' << n.candidate_ms << ',' << n.sampling_ms << "\n";
      std::cout << report.nodes.size() << " LODs written to " << build_out << "\n";
    } else if (*render) {
      const Scene scene = load_scene_input(render_scene);
      CameraModel cam = read_pose(render_camera);
      const Resolution res = parse_size(render_size);
      cam.width = res.width;
      cam.height = res.height;
      SelectionParams sel;
      sel.surfel_size = render_surfel_size;
      sel.rule = parse_rule(render_rule);
      sel.use_lods = !render_no_lod;
      const auto actions = select_render_actions(scene, cam, sel);
      FrameBuffer fb(res.width, res.height);
      const RenderStats st = render_frame(scene, actions, cam, fb);
      write_image(fb.to_image(), render_out);
      std::cout << "actions " << st.actions << ", triangles " << st.triangles << ", surfels " << st.surfels << "\n";
    } else if (*bench) {
      std::ofstream out;
      if (*bviews) {
        const Scene scene = load_scene_input(bench_scene);
        ViewBenchParams p;
        p.surfel_size = bench_surfel_size;
        p.rule = parse_rule(bench_rule);
        p.repetitions = bench_reps;
        const auto rows =
            run_views(scene, orbit_views(scene.node(scene.root()).bounds, bench_views), parse_sizes(bench_sizes), p);
        open_out(out, bench_out);
        write_views_csv(out, rows);
      } else if (*bgrid) {
        const Scene scene = load_scene_input(bench_scene);
        GridBenchParams p;
        const Resolution res = parse_size(grid_size);
        p.width = res.width;
        p.height = res.height;
        p.t_target_ms = bench_t_target;
        const auto summary = run_position_grid(scene, scene.node(scene.root()).bounds, bench_count, bench_height, p);
        open_out(out, bench_out);
        write_grid_csv(out, summary);
        std::cout << "frame ms: min " << summary.min << " q1 " << summary.q1 << " median " << summary.median << " q3 "
                  << summary.q3 << " max " << summary.max << "\n";
      } else {
        const fs::path in = bench_scene;
        const TriangleMesh mesh = is_manifest_path(in) ? [&] {
          const Scene s = read_manifest(in);
          return flatten_subtree(s, s.root());
        }()
                                                       : load_mesh(in);
        std::vector<std::uint32_t> targets;
        std::stringstream ss(bench_targets);
        for (std::string t; std::getline(ss, t, ',');) targets.push_back(static_cast<std::uint32_t>(std::stoul(t)));
        SamplingConfig sc;
        sc.seed = pre_seed;
        const auto rows = time_preprocessing(mesh, targets, pre_capture, sc, bench_reps);
        open_out(out, bench_out);
        write_preprocess_csv(out, rows);
      }
      std::cout << "wrote " << bench_out << "\n";
    } else if (*serve) {
      httplib::Server server;
      if (!server.set_mount_point("/", serve_dir)) throw Error("cannot serve directory " + serve_dir);
      server.set_file_extension_and_mimetype_mapping("pbs", "application/octet-stream");
      server.set_file_extension_and_mimetype_mapping("ply", "application/octet-stream");
      server.set_post_routing_handler([](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Origin", "*");
      });
      std::cout << "serving " << serve_dir << " on http://" << serve_host << ":" << serve_port << "/\n" << std::flush;
      if (!server.listen(serve_host, serve_port)) throw Error("cannot listen on " + serve_host + ":" + std::to_string(serve_port));
    } else if (*dump) {
      const Scene scene = load_scene_input(dump_scene);
      const NodeId node = dump_node == kNoNode ? scene.root() : dump_node;
      if (node >= scene.size()) throw Error("node " + std::to_string(node) + " does not exist");
      if (dump_direction < 0 || dump_direction > 7) throw Error("direction index must be 0-7");
      CaptureConfig cc;
      cc.resolution = dump_resolution;
      const Vec3d dir = corner_directions(node_bounds_local(scene, node))[static_cast<std::size_t>(dump_direction)];
      const GBuffer gb = rasterize_direction(scene, node, dir, cc, CaptureSource::ChildSurfelLods);
      GBufferChannel ch;
      if (dump_channel == "coverage") ch = GBufferChannel::Coverage;
      else if (dump_channel == "position") ch = GBufferChannel::Position;
      else if (dump_channel == "normal") ch = GBufferChannel::Normal;
      else if (dump_channel == "color") ch = GBufferChannel::Color;
      else if (dump_channel == "depth") ch = GBufferChannel::Depth;
      else throw Error("unknown channel '" + dump_channel + "'");
      write_gbuffer_channel(gb, ch, dump_out);
      std::cout << gb.covered_count() << " covered pixels written to " << dump_out << "\n";
    } else if (*vectors) {
      std::ofstream out;
      open_out(out, vectors_out);
      out << export_test_vectors();
      std::cout << "wrote " << vectors_out << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
