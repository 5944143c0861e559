#include "mvreg/serialize.hpp"

#include <fstream>

#include "json_util.hpp"
#include "mvreg/errors.hpp"

namespace mvreg {

namespace detail {

using nlohmann::json;

json parse_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open " + path.string());
  }
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) {
    throw DataError("malformed JSON in " + path.string());
  }
  return j;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw DataError("cannot write " + path.string());
  }
  out << text;
  if (!out) {
    throw DataError("short write to " + path.string());
  }
}

ordered_json pose_to_json(const Pose& pose) {
  const Mat4 m = pose.matrix();
  ordered_json j;
  auto& arr = j["matrix"] = ordered_json::array();
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      arr.push_back(m(r, c));
    }
  }
  return j;
}

Pose pose_from_json(const json& j, double tolerance, bool project) {
  if (!j.is_object() || !j.contains("matrix")) {
    throw DataError("pose JSON must be an object with a \"matrix\" key");
  }
  const auto& arr = j["matrix"];
  if (!arr.is_array() || arr.size() != 16) {
    throw DataError("pose matrix must hold 16 numbers (row-major 4x4)");
  }
  Mat4 m;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      m(r, c) = arr[static_cast<std::size_t>(4 * r + c)].get<double>();
    }
  }
  try {
    if (!project) {
      return Pose::from_matrix(m, tolerance);
    }
    // Lenient path: accept near-orthonormal rotations, then snap onto SO(3).
    Pose rough = Pose::from_matrix(m, tolerance);
    if (rough.rotation.determinant() <= 0.0) {
      throw ArgumentError("rotation block is a reflection (det <= 0)");
    }
    const Eigen::JacobiSVD<Mat3> svd(
        rough.rotation, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 r = svd.matrixU() * svd.matrixV().transpose();
    if (r.determinant() <= 0.0) {
      throw ArgumentError("rotation block is a reflection (det <= 0)");
    }
    return Pose(r, rough.translation);
  } catch (const ArgumentError& e) {
    throw DataError(std::string("invalid pose: ") + e.what());
  }
}

ordered_json twist_to_json(const Twist& twist) {
  ordered_json j = ordered_json::array();
  for (int i = 0; i < 6; ++i) j.push_back(twist[i]);
  return j;
}

Twist twist_from_json(const json& j) {
  if (!j.is_array() || j.size() != 6) {
    throw DataError("twist JSON must be an array of 6 numbers");
  }
  Vec6 v;
  for (int i = 0; i < 6; ++i) v[i] = j[static_cast<std::size_t>(i)].get<double>();
  const Twist t(v);
  if (!t.all_finite()) {
    throw DataError("twist components must be finite");
  }
  return t;
}

ordered_json geometry_to_json(const DetectorGeometry& geom) {
  ordered_json j;
  j["source_to_detector"] = geom.source_to_detector;
  j["detector_width"] = geom.detector_width;
  j["detector_height"] = geom.detector_height;
  j["pixel_spacing"] = geom.pixel_spacing;
  j["principal_point"] = {geom.principal_point.x(), geom.principal_point.y()};
  return j;
}

DetectorGeometry geometry_from_json(const json& j) {
  try {
    const double sdd = j.at("source_to_detector").get<double>();
    const int w = j.at("detector_width").get<int>();
    const int h = j.at("detector_height").get<int>();
    const double spacing = j.at("pixel_spacing").get<double>();
    DetectorGeometry geom(sdd, w, h, spacing);
    if (j.contains("principal_point")) {
      const auto& pp = j["principal_point"];
      if (!pp.is_array() || pp.size() != 2) {
        throw DataError("principal_point must be a 2-element array");
      }
      geom.principal_point = Vec2(pp[0].get<double>(), pp[1].get<double>());
    }
    geom.validate();
    return geom;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed geometry JSON: ") + e.what());
  } catch (const ArgumentError& e) {
    throw DataError(std::string("invalid geometry: ") + e.what());
  }
}

ordered_json refine_config_to_json(const RefineConfig& cfg) {
  ordered_json j;
  j["lr_rotation"] = cfg.lr_rotation;
  j["lr_translation"] = cfg.lr_translation;
  j["iterations"] = cfg.iterations;
  j["weight_low_ncc"] = cfg.weight_low_ncc;
  j["weight_high_ncc"] = cfg.weight_high_ncc;
  j["adam_beta1"] = cfg.adam_beta1;
  j["adam_beta2"] = cfg.adam_beta2;
  j["adam_epsilon"] = cfg.adam_epsilon;
  j["fd_step"] = cfg.fd_step;
  j["focus_low_similarity"] = cfg.focus_low_similarity;
  return j;
}

RefineConfig refine_config_from_json(const json& j) {
  if (!j.is_object()) {
    throw DataError("refine config JSON must be an object");
  }
  RefineConfig cfg;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "lr_rotation") cfg.lr_rotation = value.get<double>();
      else if (key == "lr_translation") cfg.lr_translation = value.get<double>();
      else if (key == "iterations") cfg.iterations = value.get<int>();
      else if (key == "weight_low_ncc") cfg.weight_low_ncc = value.get<double>();
      else if (key == "weight_high_ncc") cfg.weight_high_ncc = value.get<double>();
      else if (key == "adam_beta1") cfg.adam_beta1 = value.get<double>();
      else if (key == "adam_beta2") cfg.adam_beta2 = value.get<double>();
      else if (key == "adam_epsilon") cfg.adam_epsilon = value.get<double>();
      else if (key == "fd_step") cfg.fd_step = value.get<double>();
      else if (key == "focus_low_similarity")
        cfg.focus_low_similarity = value.get<bool>();
      else throw DataError("unknown refine config key: " + key);
    }
    cfg.validate();
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed refine config: ") + e.what());
  } catch (const ArgumentError& e) {
    throw DataError(std::string("invalid refine config: ") + e.what());
  }
  return cfg;
}

}  // namespace detail

using detail::ordered_json;
using detail::parse_json_file;
using detail::write_text_file;

void save_pose(const std::filesystem::path& path, const Pose& pose) {
  write_text_file(path, detail::pose_to_json(pose).dump(2) + "\n");
}

Pose load_pose(const std::filesystem::path& path) {
  return detail::pose_from_json(parse_json_file(path), 1e-9, false);
}

void save_poses(const std::filesystem::path& path,
                const std::vector<Pose>& poses) {
  ordered_json j = ordered_json::array();
  for (const auto& p : poses) j.push_back(detail::pose_to_json(p));
  write_text_file(path, j.dump(2) + "\n");
}

std::vector<Pose> load_poses(const std::filesystem::path& path) {
  const auto j = parse_json_file(path);
  if (!j.is_array()) {
    throw DataError("poses file must hold a JSON array: " + path.string());
  }
  std::vector<Pose> poses;
  poses.reserve(j.size());
  for (const auto& jp : j) {
    poses.push_back(detail::pose_from_json(jp, 1e-9, false));
  }
  return poses;
}

void save_twist(const std::filesystem::path& path, const Twist& twist) {
  write_text_file(path, detail::twist_to_json(twist).dump() + "\n");
}

Twist load_twist(const std::filesystem::path& path) {
  return detail::twist_from_json(parse_json_file(path));
}

void save_geometry(const std::filesystem::path& path,
                   const DetectorGeometry& geom) {
  write_text_file(path, detail::geometry_to_json(geom).dump(2) + "\n");
}

DetectorGeometry load_geometry(const std::filesystem::path& path) {
  return detail::geometry_from_json(parse_json_file(path));
}

void save_refine_config(const std::filesystem::path& path,
                        const RefineConfig& cfg) {
  write_text_file(path, detail::refine_config_to_json(cfg).dump(2) + "\n");
}

RefineConfig load_refine_config(const std::filesystem::path& path) {
  return detail::refine_config_from_json(parse_json_file(path));
}

void save_registration_result(const std::filesystem::path& path,
                              const RegistrationResult& result) {
  ordered_json j;
  j["initial"] = {detail::pose_to_json(result.initial_poses[0]),
                  detail::pose_to_json(result.initial_poses[1])};
  j["refined"] = {detail::pose_to_json(result.refined_poses[0]),
                  detail::pose_to_json(result.refined_poses[1])};
  j["loss_trace"] = result.loss_trace;
  j["ncc_trace"] = {result.ncc_traces[0], result.ncc_traces[1]};
  j["iterations_run"] = result.iterations_run;
  j["converged"] = result.converged;
  write_text_file(path, j.dump(2) + "\n");
}

}  // namespace mvreg
