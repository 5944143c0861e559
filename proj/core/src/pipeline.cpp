#include "mvreg/pipeline.hpp"

#include <cmath>

#include "json_util.hpp"
#include "mvreg/errors.hpp"
#include "mvreg/io.hpp"
#include "mvreg/parallel.hpp"
#include "mvreg/rng.hpp"

namespace mvreg {

namespace {

using detail::ordered_json;
using nlohmann::json;

std::string mode_to_string(ExperimentMode mode) {
  return mode == ExperimentMode::temporal ? "temporal" : "spatial";
}

ExperimentMode mode_from_string(const std::string& s) {
  if (s == "temporal") return ExperimentMode::temporal;
  if (s == "spatial") return ExperimentMode::spatial;
  throw DataError("unknown experiment mode: " + s);
}

std::string initializer_to_string(InitializerSpec::Type t) {
  switch (t) {
    case InitializerSpec::Type::exact: return "exact";
    case InitializerSpec::Type::perturbed: return "perturbed";
    case InitializerSpec::Type::multistart: return "multistart";
    case InitializerSpec::Type::external: return "external";
  }
  throw ArgumentError("invalid initializer type");
}

InitializerSpec::Type initializer_from_string(const std::string& s) {
  if (s == "exact") return InitializerSpec::Type::exact;
  if (s == "perturbed") return InitializerSpec::Type::perturbed;
  if (s == "multistart") return InitializerSpec::Type::multistart;
  if (s == "external") return InitializerSpec::Type::external;
  throw DataError("unknown initializer type: " + s);
}

Vec6 vec6_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 6) {
    throw DataError(what + " must be a 6-element array");
  }
  Vec6 v;
  for (int i = 0; i < 6; ++i) v[i] = j[static_cast<std::size_t>(i)].get<double>();
  return v;
}

}  // namespace

void ExperimentSpec::validate() const {
  geometry.validate();
  refine.validate();
  if (n_cases < 1) {
    throw ArgumentError("experiment spec: n_cases must be >= 1");
  }
  if (!(source_to_center > 0.0)) {
    throw ArgumentError("experiment spec: source_to_center must be > 0");
  }
  if (!(theta >= -M_PI && theta <= M_PI)) {
    throw ArgumentError("experiment spec: theta must lie in [-pi, pi]");
  }
  if (initializer.type == InitializerSpec::Type::multistart &&
      initializer.n_starts < 1) {
    throw ArgumentError("experiment spec: multistart needs n_starts >= 1");
  }
  if (initializer.type == InitializerSpec::Type::external &&
      initializer.path.empty()) {
    throw ArgumentError("experiment spec: external initializer needs a path");
  }
  if (lambda && !(*lambda > 0.0)) {
    throw ArgumentError("experiment spec: lambda must be > 0");
  }
}

Pose make_pa_pose(const Vec3& volume_center, double distance) {
  if (!(distance > 0.0)) {
    throw ArgumentError("make_pa_pose: distance must be > 0");
  }
  // Camera z (viewing axis) -> world +y, camera x -> world +x,
  // camera y -> world -z; right-handed.
  Mat3 r;
  r.col(0) = Vec3(1, 0, 0);
  r.col(1) = Vec3(0, 0, -1);
  r.col(2) = Vec3(0, 1, 0);
  return Pose(r, volume_center - distance * Vec3(0, 1, 0));
}

std::vector<ExperimentCase> generate_cases(const ExperimentSpec& spec,
                                           const Volume& vol) {
  spec.validate();
  const Pose base = spec.base_pose
                        ? *spec.base_pose
                        : make_pa_pose(vol.center(), spec.source_to_center);
  const Pose t_trans = rotation_about_center(spec.theta, vol.center());

  std::vector<ExperimentCase> cases(static_cast<std::size_t>(spec.n_cases));
  for (int c = 0; c < spec.n_cases; ++c) {
    const std::uint64_t case_seed =
        spec.rng_seed ^ static_cast<std::uint64_t>(c);
    ExperimentCase& ec = cases[static_cast<std::size_t>(c)];
    const Twist eps1 = sample_twist(spec.case_distribution, case_seed);
    if (spec.mode == ExperimentMode::temporal) {
      const auto [eps2, eps] =
          sample_second_view(eps1, spec.case_distribution, case_seed);
      ec.true_poses = {compose(exp(eps1), base), compose(exp(eps2), base)};
      ec.eps = eps;
    } else {
      const Pose view1 = compose(exp(eps1), base);
      ec.true_poses = {view1, compose(t_trans, view1)};
      ec.eps = std::nullopt;
    }
  }
  // Renders dominate; parallelize across case-views deterministically.
  parallel_for(2 * spec.n_cases, 0, [&](std::int64_t idx) {
    ExperimentCase& ec = cases[static_cast<std::size_t>(idx / 2)];
    const int view = static_cast<int>(idx % 2);
    ec.fixed_images[view] =
        render(vol, spec.geometry, ec.true_poses[view], spec.render_mode, 1);
  });
  return cases;
}

namespace {

std::array<Pose, 2> initialize_case(const ExperimentSpec& spec,
                                    const Volume& vol,
                                    const ExperimentCase& ec, int case_index,
                                    const std::vector<Pose>& external_poses,
                                    int workers) {
  const std::uint64_t case_seed =
      spec.rng_seed ^ static_cast<std::uint64_t>(case_index);
  switch (spec.initializer.type) {
    case InitializerSpec::Type::exact:
      return ec.true_poses;
    case InitializerSpec::Type::perturbed: {
      const TwistDistribution dist(Vec6::Zero(), spec.initializer.stddev);
      // Distinct seeds per view.
      return {init_perturbed(ec.true_poses[0], dist, rng::mix(case_seed)),
              init_perturbed(ec.true_poses[1], dist, rng::mix(~case_seed))};
    }
    case InitializerSpec::Type::multistart: {
      const TwistDistribution dist(Vec6::Zero(), spec.initializer.stddev);
      std::array<Pose, 2> init;
      for (int i = 0; i < 2; ++i) {
        init[i] = init_multistart(vol, spec.geometry, ec.fixed_images[i],
                                  ec.true_poses[i], dist,
                                  spec.initializer.n_starts,
                                  rng::mix(case_seed + i), spec.render_mode,
                                  workers);
      }
      return init;
    }
    case InitializerSpec::Type::external: {
      const std::size_t offset = 2 * static_cast<std::size_t>(case_index);
      if (external_poses.size() < offset + 2) {
        throw DataError("external pose file holds " +
                        std::to_string(external_poses.size()) +
                        " poses, need 2 per case");
      }
      return {external_poses[offset], external_poses[offset + 1]};
    }
  }
  throw ArgumentError("invalid initializer type");
}

}  // namespace

ExperimentReport run_experiment(const ExperimentSpec& spec, int workers) {
  spec.validate();
  auto [vol, landmarks] = make_phantom(spec.phantom.kind, spec.phantom.dims,
                                       spec.phantom.spacing, spec.phantom.seed);
  const auto cases = generate_cases(spec, vol);
  const Pose t_trans = rotation_about_center(spec.theta, vol.center());
  const double lambda = spec.effective_lambda();

  std::vector<Pose> external_poses;
  if (spec.initializer.type == InitializerSpec::Type::external) {
    external_poses = load_external_poses(spec.initializer.path);
  }

  ExperimentReport report;
  report.mode = spec.mode;
  report.n_cases = spec.n_cases;
  report.lambda = lambda;
  report.cases.assign(static_cast<std::size_t>(spec.n_cases), CaseOutcome{});

  // Case-level parallelism; renders inside each case stay single-threaded so
  // the worker count only changes scheduling, never values.
  const int case_workers = resolve_workers(workers);
  const int inner_workers = case_workers > 1 ? 1 : 0;
  parallel_for(spec.n_cases, case_workers, [&](std::int64_t c) {
    CaseOutcome& outcome = report.cases[static_cast<std::size_t>(c)];
    outcome.id = static_cast<int>(c);
    const ExperimentCase& ec = cases[static_cast<std::size_t>(c)];
    try {
      const std::array<Pose, 2> init = initialize_case(
          spec, vol, ec, static_cast<int>(c), external_poses, inner_workers);
      outcome.mtre_before_mm =
          mtre(spec.geometry, ec.true_poses, init, landmarks, lambda);

      RegistrationResult result;
      if (spec.mode == ExperimentMode::temporal) {
        result = fine_register(vol, spec.geometry, ec.fixed_images, init,
                               spec.refine, spec.render_mode, inner_workers);
      } else {
        result = fine_register_coupled(vol, spec.geometry, ec.fixed_images,
                                       init[0], t_trans, spec.refine,
                                       spec.render_mode, inner_workers);
      }
      outcome.mtre_after_mm = mtre(spec.geometry, ec.true_poses,
                                   result.refined_poses, landmarks, lambda);
      outcome.converged = result.converged;
      outcome.iterations_run = result.iterations_run;
      outcome.initial_poses = result.initial_poses;
      outcome.refined_poses = result.refined_poses;
      if (!result.ncc_traces[0].empty()) {
        outcome.initial_ncc = {result.ncc_traces[0].front(),
                               result.ncc_traces[1].front()};
        outcome.final_ncc = {result.ncc_traces[0].back(),
                             result.ncc_traces[1].back()};
      }
    } catch (const Error& e) {
      outcome.failed = true;
      outcome.message = e.what();
    }
  });

  std::vector<double> before;
  std::vector<double> after;
  for (const auto& outcome : report.cases) {
    if (outcome.failed) {
      ++report.failures;
      continue;
    }
    before.push_back(outcome.mtre_before_mm);
    after.push_back(outcome.mtre_after_mm);
  }
  report.before = make_metric_report(before, lambda);
  report.after = make_metric_report(after, lambda);
  return report;
}

ExperimentSpec load_experiment_spec(const std::filesystem::path& path) {
  const json j = detail::parse_json_file(path);
  try {
    ExperimentSpec spec;
    const auto& jp = j.at("phantom");
    spec.phantom.kind = phantom_kind_from_string(jp.at("kind").get<std::string>());
    const auto& jd = jp.at("dims");
    if (!jd.is_array() || jd.size() != 3) {
      throw DataError("phantom dims must be a 3-element array");
    }
    spec.phantom.dims = {jd[0].get<int>(), jd[1].get<int>(), jd[2].get<int>()};
    if (jp.contains("spacing")) {
      const auto& js = jp["spacing"];
      if (!js.is_array() || js.size() != 3) {
        throw DataError("phantom spacing must be a 3-element array");
      }
      spec.phantom.spacing =
          Vec3(js[0].get<double>(), js[1].get<double>(), js[2].get<double>());
    }
    if (jp.contains("seed")) spec.phantom.seed = jp["seed"].get<std::uint64_t>();

    spec.geometry = detail::geometry_from_json(j.at("geometry"));
    if (j.contains("source_to_center")) {
      spec.source_to_center = j["source_to_center"].get<double>();
    }
    if (j.contains("base_pose")) {
      spec.base_pose = detail::pose_from_json(j["base_pose"], 1e-9, false);
    }
    const auto& jdist = j.at("case_distribution");
    spec.case_distribution = TwistDistribution(
        jdist.contains("mean") ? vec6_from_json(jdist["mean"], "mean")
                               : Vec6::Zero(),
        vec6_from_json(jdist.at("stddev"), "stddev"));
    if (j.contains("mode")) {
      spec.mode = mode_from_string(j["mode"].get<std::string>());
    }
    if (j.contains("theta")) spec.theta = j["theta"].get<double>();
    spec.n_cases = j.at("n_cases").get<int>();
    if (j.contains("initializer")) {
      const auto& ji = j["initializer"];
      spec.initializer.type =
          initializer_from_string(ji.at("type").get<std::string>());
      if (ji.contains("stddev")) {
        spec.initializer.stddev = vec6_from_json(ji["stddev"], "initializer stddev");
      }
      if (ji.contains("n_starts")) {
        spec.initializer.n_starts = ji["n_starts"].get<int>();
      }
      if (ji.contains("path")) {
        spec.initializer.path = ji["path"].get<std::string>();
      }
    }
    if (j.contains("refine")) {
      spec.refine = detail::refine_config_from_json(j["refine"]);
    }
    if (j.contains("render_mode")) {
      const auto mode = j["render_mode"].get<std::string>();
      if (mode == "intensity") spec.render_mode = RenderMode::intensity;
      else if (mode == "attenuation") spec.render_mode = RenderMode::attenuation;
      else throw DataError("unknown render mode: " + mode);
    }
    if (j.contains("lambda")) spec.lambda = j["lambda"].get<double>();
    if (j.contains("rng_seed")) spec.rng_seed = j["rng_seed"].get<std::uint64_t>();
    spec.validate();
    return spec;
  } catch (const json::exception& e) {
    throw DataError("malformed experiment spec " + path.string() + ": " +
                    e.what());
  } catch (const ArgumentError& e) {
    throw DataError("invalid experiment spec " + path.string() + ": " +
                    e.what());
  }
}

void save_experiment_spec(const std::filesystem::path& path,
                          const ExperimentSpec& spec) {
  spec.validate();
  ordered_json j;
  j["phantom"] = {{"kind", to_string(spec.phantom.kind)},
                  {"dims", {spec.phantom.dims[0], spec.phantom.dims[1],
                            spec.phantom.dims[2]}},
                  {"spacing", {spec.phantom.spacing.x(), spec.phantom.spacing.y(),
                               spec.phantom.spacing.z()}},
                  {"seed", spec.phantom.seed}};
  j["geometry"] = detail::geometry_to_json(spec.geometry);
  j["source_to_center"] = spec.source_to_center;
  if (spec.base_pose) j["base_pose"] = detail::pose_to_json(*spec.base_pose);
  j["case_distribution"] = {
      {"mean", std::vector<double>(spec.case_distribution.mean.data(),
                                   spec.case_distribution.mean.data() + 6)},
      {"stddev", std::vector<double>(spec.case_distribution.stddev.data(),
                                     spec.case_distribution.stddev.data() + 6)}};
  j["mode"] = mode_to_string(spec.mode);
  j["theta"] = spec.theta;
  j["n_cases"] = spec.n_cases;
  ordered_json ji;
  ji["type"] = initializer_to_string(spec.initializer.type);
  ji["stddev"] = std::vector<double>(spec.initializer.stddev.data(),
                                     spec.initializer.stddev.data() + 6);
  ji["n_starts"] = spec.initializer.n_starts;
  if (!spec.initializer.path.empty()) ji["path"] = spec.initializer.path;
  j["initializer"] = std::move(ji);
  j["refine"] = detail::refine_config_to_json(spec.refine);
  j["render_mode"] =
      spec.render_mode == RenderMode::intensity ? "intensity" : "attenuation";
  if (spec.lambda) j["lambda"] = *spec.lambda;
  j["rng_seed"] = spec.rng_seed;
  detail::write_text_file(path, j.dump(2) + "\n");
}

void save_experiment_report(const std::filesystem::path& path,
                            const ExperimentReport& report) {
  ordered_json j;
  j["mode"] = mode_to_string(report.mode);
  j["n_cases"] = report.n_cases;
  j["failures"] = report.failures;
  j["lambda"] = report.lambda;
  j["before"] = detail::metric_report_to_json(report.before);
  j["after"] = detail::metric_report_to_json(report.after);
  j["cases"] = ordered_json::array();
  for (const auto& outcome : report.cases) {
    ordered_json jc;
    jc["id"] = outcome.id;
    jc["failed"] = outcome.failed;
    if (outcome.failed) {
      jc["message"] = outcome.message;
    } else {
      jc["mtre_before_mm"] = outcome.mtre_before_mm;
      jc["mtre_after_mm"] = outcome.mtre_after_mm;
      jc["converged"] = outcome.converged;
      jc["iterations_run"] = outcome.iterations_run;
      jc["initial_ncc"] = {outcome.initial_ncc[0], outcome.initial_ncc[1]};
      jc["final_ncc"] = {outcome.final_ncc[0], outcome.final_ncc[1]};
      jc["initial_poses"] = {detail::pose_to_json(outcome.initial_poses[0]),
                             detail::pose_to_json(outcome.initial_poses[1])};
      jc["refined_poses"] = {detail::pose_to_json(outcome.refined_poses[0]),
                             detail::pose_to_json(outcome.refined_poses[1])};
    }
    j["cases"].push_back(std::move(jc));
  }
  detail::write_text_file(path, j.dump(2) + "\n");
}

void write_case_overlay(const std::filesystem::path& prefix, const Image& fixed,
                        const Image& estimated_render) {
  if (!fixed.same_shape(estimated_render)) {
    throw ArgumentError("write_case_overlay: image shapes differ");
  }
  const Image a = normalize_image(fixed);
  const Image b = normalize_image(estimated_render);
  Image blend(a.width, a.height, a.pixel_spacing);
  for (std::size_t p = 0; p < blend.data.size(); ++p) {
    blend.data[p] = 0.5f * (a.data[p] + b.data[p]);
  }
  save_pgm(prefix.string() + ".blend.pgm", blend);
  save_pgm(prefix.string() + ".edges.pgm",
           normalize_image(gradient_magnitude(blend)));
}

}  // namespace mvreg
