#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "pbs/error.hpp"
#include "pbs/lodpipe.hpp"

namespace pbs {

namespace {

constexpr char kMagic[4] = {'P', 'B', 'S', '1'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_f32(std::string& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }
void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

struct Reader {
  const std::string& bytes;
  std::size_t pos = 0;

  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(static_cast<unsigned char>(bytes[pos + i])) << (8 * i);
    pos += 4;
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(static_cast<unsigned char>(bytes[pos + i])) << (8 * i);
    pos += 8;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
};

}  // namespace

std::string encode_surfel_file(const SurfelCloud& cloud) {
  std::string out;
  out.reserve(kSurfelFileHeaderBytes + cloud.size() * kSurfelRecordBytes);
  out.append(kMagic, 4);
  put_u32(out, kSurfelFileVersion);
  put_u64(out, cloud.size());
  put_u32(out, cloud.p_m);
  put_u32(out, 0);  // reserved
  put_f64(out, cloud.r_m);
  for (int i = 0; i < 3; ++i) put_f64(out, cloud.bounds.min[i]);
  for (int i = 0; i < 3; ++i) put_f64(out, cloud.bounds.max[i]);
  put_u64(out, cloud.seed);
  for (const auto& s : cloud.surfels) {
    put_f32(out, s.position.x);
    put_f32(out, s.position.y);
    put_f32(out, s.position.z);
    put_f32(out, s.normal.x);
    put_f32(out, s.normal.y);
    put_f32(out, s.normal.z);
    for (auto c : s.color) out.push_back(static_cast<char>(c));
  }
  return out;
}

SurfelCloud decode_surfel_file(const std::string& bytes, const std::string& source_name) {
  if (bytes.size() < kSurfelFileHeaderBytes)
    throw ParseError(source_name, 0, 0,
                     "truncated header: expected " + std::to_string(kSurfelFileHeaderBytes) + " bytes, got " +
                         std::to_string(bytes.size()));
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw ParseError(source_name, 0, 0, "bad magic (expected PBS1)");
  Reader r{bytes, 4};
  const std::uint32_t version = r.u32();
  if (version != kSurfelFileVersion)
    throw ParseError(source_name, 0, 4, "unsupported version " + std::to_string(version));
  const std::uint64_t count = r.u64();
  SurfelCloud cloud;
  cloud.p_m = r.u32();
  r.u32();
  cloud.r_m = r.f64();
  for (int i = 0; i < 3; ++i) cloud.bounds.min[i] = r.f64();
  for (int i = 0; i < 3; ++i) cloud.bounds.max[i] = r.f64();
  cloud.seed = r.u64();

  const std::uint64_t available = bytes.size() - kSurfelFileHeaderBytes;
  if (count > available / kSurfelRecordBytes || available != count * kSurfelRecordBytes) {
    const std::uint64_t expected_total =
        count <= (UINT64_MAX - kSurfelFileHeaderBytes) / kSurfelRecordBytes
            ? kSurfelFileHeaderBytes + count * kSurfelRecordBytes
            : UINT64_MAX;
    throw ParseError(source_name, 0, kSurfelFileHeaderBytes,
                     std::string(available < count * kSurfelRecordBytes ? "truncated payload" : "trailing bytes") +
                         ": expected " + std::to_string(expected_total) + " bytes for " + std::to_string(count) +
                         " surfels, got " + std::to_string(bytes.size()));
  }
  cloud.surfels.resize(count);
  for (auto& s : cloud.surfels) {
    s.position.x = r.f32();
    s.position.y = r.f32();
    s.position.z = r.f32();
    s.normal.x = r.f32();
    s.normal.y = r.f32();
    s.normal.z = r.f32();
    for (auto& c : s.color) c = static_cast<std::uint8_t>(bytes[r.pos++]);
  }
  return cloud;
}

void write_surfel_file(const SurfelCloud& cloud, const std::filesystem::path& path) {
  const std::string bytes = encode_surfel_file(cloud);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot open " + path.string() + " for writing");
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw Error("failed writing " + path.string());
}

SurfelCloud read_surfel_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open surfel file " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return decode_surfel_file(ss.str(), path.string());
}

}  // namespace pbs
