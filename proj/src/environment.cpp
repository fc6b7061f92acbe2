#include "carsynth/environment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "carsynth/error.hpp"
#include "carsynth/mesh.hpp"

namespace carsynth {

namespace {

Vec3 rgbe_to_rgb(const unsigned char* e) {
  if (e[3] == 0) return {};
  const double f = std::ldexp(1.0, static_cast<int>(e[3]) - (128 + 8));
  return {(e[0] + 0.5) * f, (e[1] + 0.5) * f, (e[2] + 0.5) * f};
}

std::array<unsigned char, 4> rgb_to_rgbe(const Vec3& c) {
  const double v = max_component(c);
  if (v < 1e-32) return {0, 0, 0, 0};
  int exponent = 0;
  const double mantissa = std::frexp(v, &exponent) * 256.0 / v;
  auto byte = [&](double x) { return static_cast<unsigned char>(std::clamp(x * mantissa, 0.0, 255.0)); };
  return {byte(c.x), byte(c.y), byte(c.z), static_cast<unsigned char>(exponent + 128)};
}

}  // namespace

HdrImage decode_hdr(const std::string& bytes) {
  std::size_t pos = 0;
  auto next_line = [&]() {
    const auto end = bytes.find('\n', pos);
    if (end == std::string::npos) throw Error(ErrorKind::ParseError, "truncated .hdr header");
    std::string line = bytes.substr(pos, end - pos);
    pos = end + 1;
    return line;
  };
  const std::string magic = next_line();
  if (magic.rfind("#?", 0) != 0) throw Error(ErrorKind::ParseError, "not a Radiance .hdr file");
  for (std::string line = next_line(); !line.empty(); line = next_line())
    if (line.rfind("FORMAT=", 0) == 0 && line != "FORMAT=32-bit_rle_rgbe")
      throw Error(ErrorKind::ParseError, "unsupported .hdr pixel format " + line);

  const std::string dims = next_line();
  int width = 0, height = 0;
  char ysign = 0, xsign = 0;
  if (std::sscanf(dims.c_str(), "%cY %d %cX %d", &ysign, &height, &xsign, &width) != 4 || ysign != '-' ||
      xsign != '+' || width <= 0 || height <= 0)
    throw Error(ErrorKind::ParseError, "unsupported .hdr orientation '" + dims + "'");

  HdrImage img;
  img.width = width;
  img.height = height;
  img.pixels.resize(static_cast<std::size_t>(width) * height);

  auto byte_at = [&](std::size_t i) -> unsigned char {
    if (i >= bytes.size()) throw Error(ErrorKind::ParseError, "truncated .hdr pixel data");
    return static_cast<unsigned char>(bytes[i]);
  };

  std::vector<unsigned char> scan(static_cast<std::size_t>(width) * 4);
  for (int y = 0; y < height; ++y) {
    const bool rle = width >= 8 && width < 32768 && byte_at(pos) == 2 && byte_at(pos + 1) == 2 &&
                     (byte_at(pos + 2) & 0x80) == 0;
    if (rle) {
      if (((byte_at(pos + 2) << 8) | byte_at(pos + 3)) != width)
        throw Error(ErrorKind::ParseError, "scanline width mismatch");
      pos += 4;
      for (int ch = 0; ch < 4; ++ch) {
        int x = 0;
        while (x < width) {
          int count = byte_at(pos++);
          if (count > 128) {
            count -= 128;
            if (x + count > width) throw Error(ErrorKind::ParseError, "bad .hdr run");
            const unsigned char value = byte_at(pos++);
            for (int k = 0; k < count; ++k) scan[static_cast<std::size_t>((x++) * 4 + ch)] = value;
          } else {
            if (count == 0 || x + count > width) throw Error(ErrorKind::ParseError, "bad .hdr dump");
            for (int k = 0; k < count; ++k) scan[static_cast<std::size_t>((x++) * 4 + ch)] = byte_at(pos++);
          }
        }
      }
    } else {
      for (std::size_t i = 0; i < scan.size(); ++i) scan[i] = byte_at(pos++);
    }
    for (int x = 0; x < width; ++x) img.at(x, y) = rgbe_to_rgb(&scan[static_cast<std::size_t>(x) * 4]);
  }
  return img;
}

HdrImage read_hdr(const std::filesystem::path& path) { return decode_hdr(read_text_file(path)); }

void write_hdr(const std::filesystem::path& path, const HdrImage& image) {
  std::ostringstream out;
  out << "#?RADIANCE\nFORMAT=32-bit_rle_rgbe\n\n-Y " << image.height << " +X " << image.width << "\n";
  std::string data = out.str();
  data.reserve(data.size() + image.pixels.size() * 4);
  for (const auto& p : image.pixels) {
    const auto e = rgb_to_rgbe(p);
    data.append(reinterpret_cast<const char*>(e.data()), 4);
  }
  write_text_file(path, data);
}

Environment Environment::solid(const Vec3& color, double exposure) {
  Environment env;
  env.kind = Kind::Solid;
  env.name = "solid";
  env.color = color;
  env.exposure = exposure;
  return env;
}

Environment Environment::procedural_sky(const SkyParams& sky, double exposure) {
  Environment env;
  env.kind = Kind::ProceduralSky;
  env.sky = sky;
  env.sky.sun_direction = normalize(sky.sun_direction);
  env.exposure = exposure;
  return env;
}

Environment Environment::equirectangular(std::shared_ptr<const HdrImage> image, std::string name,
                                         double exposure) {
  if (!image || image->height <= 0 || image->width != 2 * image->height)
    throw Error(ErrorKind::OutOfRange, "equirectangular maps must have a 2:1 aspect ratio");
  Environment env;
  env.kind = Kind::Equirectangular;
  env.image = std::move(image);
  env.name = std::move(name);
  env.exposure = exposure;
  return env;
}

double sun_solid_angle(const SkyParams& sky) {
  return 2.0 * kPi * (1.0 - std::cos(sky.sun_angular_radius));
}

Vec3 env_lookup(const Vec3& direction, const Environment& env) {
  switch (env.kind) {
    case Environment::Kind::Solid: return env.color * env.exposure;
    case Environment::Kind::ProceduralSky: {
      const SkyParams& s = env.sky;
      Vec3 c = direction.z >= 0 ? lerp(s.horizon, s.zenith, direction.z) : s.ground;
      if (dot(direction, s.sun_direction) > std::cos(s.sun_angular_radius)) c += s.sun_color * s.sun_radiance;
      return c * env.exposure;
    }
    case Environment::Kind::Equirectangular: {
      const HdrImage& img = *env.image;
      const double phi = std::atan2(direction.y, direction.x);                 // [-pi, pi]
      const double theta = std::acos(std::clamp(direction.z, -1.0, 1.0));      // [0, pi]
      const double fx = (phi / (2.0 * kPi) + 0.5) * img.width - 0.5;
      const double fy = theta / kPi * img.height - 0.5;
      const double x0f = std::floor(fx), y0f = std::floor(fy);
      const double tx = fx - x0f, ty = fy - y0f;
      auto wrap_x = [&](long x) { return static_cast<int>(((x % img.width) + img.width) % img.width); };
      auto clamp_y = [&](long y) { return static_cast<int>(std::clamp<long>(y, 0, img.height - 1)); };
      const long x0 = static_cast<long>(x0f), y0 = static_cast<long>(y0f);
      const Vec3 top = lerp(img.at(wrap_x(x0), clamp_y(y0)), img.at(wrap_x(x0 + 1), clamp_y(y0)), tx);
      const Vec3 bottom = lerp(img.at(wrap_x(x0), clamp_y(y0 + 1)), img.at(wrap_x(x0 + 1), clamp_y(y0 + 1)), tx);
      return lerp(top, bottom, ty) * env.exposure;
    }
  }
  return {};
}

std::vector<Environment> scan_environment_dir(const std::filesystem::path& dir, double exposure) {
  std::vector<Environment> out;
  std::error_code ec;
  if (dir.empty() || !std::filesystem::is_directory(dir, ec)) return out;
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    auto ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (entry.is_regular_file() && ext == ".hdr") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files)
    out.push_back(Environment::equirectangular(std::make_shared<HdrImage>(read_hdr(f)),
                                               f.filename().string(), exposure));
  return out;
}

}  // namespace carsynth
