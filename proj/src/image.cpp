#include "pbs/image.hpp"

#include <png.h>

#include <cstdio>
#include <fstream>
#include <memory>

#include "pbs/error.hpp"

namespace pbs {

namespace {

std::vector<std::uint8_t> to_bytes(const RgbImage& image) {
  std::vector<std::uint8_t> out(image.data.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = quantize_unit(image.data[i]);
  return out;
}

}  // namespace

void write_ppm(const RgbImage& image, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << "P6\n" << image.width << " " << image.height << "\n255\n";
  const auto bytes = to_bytes(image);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void write_png(const RgbImage& image, const std::filesystem::path& path) {
  std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.string().c_str(), "wb"), &std::fclose);
  if (!fp) throw Error("cannot write '" + path.string() + "'");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error("libpng initialization failed");
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error("PNG encoding failed for '" + path.string() + "'");
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.width), static_cast<png_uint_32>(image.height), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  auto bytes = to_bytes(image);
  for (int y = 0; y < image.height; ++y)
    png_write_row(png, bytes.data() + static_cast<std::size_t>(y) * image.width * 3);
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void write_image(const RgbImage& image, const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (ext == ".png")
    write_png(image, path);
  else
    write_ppm(image, path);
}

RgbImage grayscale_image(const std::vector<double>& values, int width, int height, double lo, double hi) {
  RgbImage img(width, height);
  const double span = hi > lo ? hi - lo : 1.0;
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const double v = values[static_cast<std::size_t>(y) * width + x];
      const float g = static_cast<float>(std::clamp((v - lo) / span, 0.0, 1.0));
      img.set(x, y, g, g, g);
    }
  return img;
}

}  // namespace pbs
