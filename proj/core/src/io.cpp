#include "mvreg/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "json_util.hpp"
#include "mvreg/errors.hpp"

namespace mvreg {

using detail::parse_json_file;
using detail::write_text_file;

namespace {

using nlohmann::json;

static_assert(sizeof(float) == 4, "float32 payloads require 4-byte float");

/// Resolves "<name>" or "<name>.<tag>.json" to the sidecar/raw path pair.
std::pair<std::filesystem::path, std::filesystem::path> sidecar_paths(
    const std::filesystem::path& given, const std::string& tag) {
  std::string s = given.string();
  const std::string suffix = "." + tag + ".json";
  if (s.size() >= suffix.size() &&
      s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0) {
    s = s.substr(0, s.size() - suffix.size());
  }
  return {s + "." + tag + ".json", s + "." + tag + ".raw"};
}

void write_f32le(const std::filesystem::path& path,
                 const std::vector<float>& values) {
  std::vector<float> buf = values;
  if constexpr (std::endian::native == std::endian::big) {
    for (float& f : buf) {
      std::uint32_t u;
      std::memcpy(&u, &f, 4);
      u = __builtin_bswap32(u);
      std::memcpy(&f, &u, 4);
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw DataError("cannot write " + path.string());
  }
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * 4));
  if (!out) {
    throw DataError("short write to " + path.string());
  }
}

std::vector<float> read_f32le(const std::filesystem::path& path,
                              std::size_t expected_count) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("cannot open " + path.string());
  }
  in.seekg(0, std::ios::end);
  const auto bytes = static_cast<std::size_t>(in.tellg());
  in.seekg(0, std::ios::beg);
  if (bytes != expected_count * 4) {
    throw DataError("payload length mismatch in " + path.string() + ": got " +
                    std::to_string(bytes / 4) + " floats, expected " +
                    std::to_string(expected_count));
  }
  std::vector<float> buf(expected_count);
  in.read(reinterpret_cast<char*>(buf.data()),
          static_cast<std::streamsize>(bytes));
  if (!in) {
    throw DataError("short read from " + path.string());
  }
  if constexpr (std::endian::native == std::endian::big) {
    for (float& f : buf) {
      std::uint32_t u;
      std::memcpy(&u, &f, 4);
      u = __builtin_bswap32(u);
      std::memcpy(&f, &u, 4);
    }
  }
  return buf;
}

Vec3 vec3_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) {
    throw DataError(what + " must be a 3-element array");
  }
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

}  // namespace

void save_volume(const std::filesystem::path& prefix_or_sidecar,
                 const Volume& vol) {
  vol.validate();
  const auto [sidecar, raw] = sidecar_paths(prefix_or_sidecar, "vol");
  json j;
  j["dims"] = {vol.dims[0], vol.dims[1], vol.dims[2]};
  j["spacing"] = {vol.spacing.x(), vol.spacing.y(), vol.spacing.z()};
  j["origin"] = {vol.origin.x(), vol.origin.y(), vol.origin.z()};
  j["dtype"] = "f32le";
  write_f32le(raw, vol.data);
  write_text_file(sidecar, j.dump(2) + "\n");
}

Volume load_volume(const std::filesystem::path& prefix_or_sidecar) {
  const auto [sidecar, raw] = sidecar_paths(prefix_or_sidecar, "vol");
  const json j = parse_json_file(sidecar);
  try {
    const auto& jd = j.at("dims");
    if (!jd.is_array() || jd.size() != 3) {
      throw DataError("dims must be a 3-element array");
    }
    std::array<int, 3> dims{jd[0].get<int>(), jd[1].get<int>(), jd[2].get<int>()};
    const Vec3 spacing = vec3_from_json(j.at("spacing"), "spacing");
    const Vec3 origin = vec3_from_json(j.at("origin"), "origin");
    if (j.at("dtype").get<std::string>() != "f32le") {
      throw DataError("unsupported dtype in " + sidecar.string());
    }
    if (dims[0] <= 0 || dims[1] <= 0 || dims[2] <= 0) {
      throw DataError("non-positive dims in " + sidecar.string());
    }
    if ((spacing.array() <= 0.0).any()) {
      throw DataError("non-positive spacing in " + sidecar.string());
    }
    Volume vol(dims, spacing, origin);
    vol.data = read_f32le(raw, vol.voxel_count());
    vol.validate();
    return vol;
  } catch (const json::exception& e) {
    throw DataError("malformed volume sidecar " + sidecar.string() + ": " +
                    e.what());
  } catch (const ArgumentError& e) {
    throw DataError("invalid volume in " + sidecar.string() + ": " + e.what());
  }
}

void save_image(const std::filesystem::path& prefix_or_sidecar,
                const Image& img) {
  img.validate();
  const auto [sidecar, raw] = sidecar_paths(prefix_or_sidecar, "img");
  json j;
  j["width"] = img.width;
  j["height"] = img.height;
  j["pixel_spacing"] = img.pixel_spacing;
  j["dtype"] = "f32le";
  write_f32le(raw, img.data);
  write_text_file(sidecar, j.dump(2) + "\n");
}

Image load_image(const std::filesystem::path& prefix_or_sidecar) {
  const auto [sidecar, raw] = sidecar_paths(prefix_or_sidecar, "img");
  const json j = parse_json_file(sidecar);
  try {
    const int w = j.at("width").get<int>();
    const int h = j.at("height").get<int>();
    const double spacing = j.at("pixel_spacing").get<double>();
    if (j.at("dtype").get<std::string>() != "f32le") {
      throw DataError("unsupported dtype in " + sidecar.string());
    }
    Image img(w, h, spacing);
    img.data = read_f32le(raw, img.size());
    img.validate();
    return img;
  } catch (const json::exception& e) {
    throw DataError("malformed image sidecar " + sidecar.string() + ": " +
                    e.what());
  } catch (const ArgumentError& e) {
    throw DataError("invalid image in " + sidecar.string() + ": " + e.what());
  }
}

void save_landmarks(const std::filesystem::path& path, const LandmarkSet& marks) {
  marks.validate();
  json j;
  j["names"] = marks.names;
  j["points"] = json::array();
  for (const auto& p : marks.points) {
    j["points"].push_back({p.x(), p.y(), p.z()});
  }
  write_text_file(path, j.dump(2) + "\n");
}

LandmarkSet load_landmarks(const std::filesystem::path& path) {
  const json j = parse_json_file(path);
  try {
    LandmarkSet marks;
    marks.names = j.at("names").get<std::vector<std::string>>();
    for (const auto& jp : j.at("points")) {
      marks.points.push_back(vec3_from_json(jp, "landmark point"));
    }
    marks.validate();
    return marks;
  } catch (const json::exception& e) {
    throw DataError("malformed landmarks file " + path.string() + ": " +
                    e.what());
  } catch (const ArgumentError& e) {
    throw DataError("invalid landmarks in " + path.string() + ": " + e.what());
  }
}

void save_pgm(const std::filesystem::path& path, const Image& img) {
  img.validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw DataError("cannot write " + path.string());
  }
  out << "P5\n" << img.width << " " << img.height << "\n65535\n";
  for (const float v : img.data) {
    const double clamped = std::min(1.0, std::max(0.0, static_cast<double>(v)));
    const auto value = static_cast<std::uint16_t>(clamped * 65535.0 + 0.5);
    // PGM stores 16-bit samples most-significant byte first.
    out.put(static_cast<char>(value >> 8));
    out.put(static_cast<char>(value & 0xff));
  }
  if (!out) {
    throw DataError("short write to " + path.string());
  }
}

}  // namespace mvreg
