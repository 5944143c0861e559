// mvreg: multi-view 2D/3D rigid registration toolkit.
//
// Subcommands: phantom, render, sample-poses, register, register-coupled,
// evaluate, experiment. All inputs and outputs are files; formats are
// documented in the README. Exit codes: 0 success, 1 usage error, 2 data
// error, 3 numerical failure.

#include <CLI11.hpp>

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "mvreg/errors.hpp"
#include "mvreg/evaluation.hpp"
#include "mvreg/io.hpp"
#include "mvreg/phantom.hpp"
#include "mvreg/pipeline.hpp"
#include "mvreg/projector.hpp"
#include "mvreg/registration.hpp"
#include "mvreg/se3.hpp"
#include "mvreg/serialize.hpp"

namespace {

using namespace mvreg;

std::array<int, 3> parse_dims(const std::string& text) {
  std::array<int, 3> dims{};
  if (std::sscanf(text.c_str(), "%d,%d,%d", &dims[0], &dims[1], &dims[2]) != 3) {
    throw DataError("expected dims as dx,dy,dz: " + text);
  }
  return dims;
}

Vec3 parse_vec3(const std::string& text) {
  Vec3 v;
  if (std::sscanf(text.c_str(), "%lf,%lf,%lf", &v.x(), &v.y(), &v.z()) != 3) {
    throw DataError("expected a comma-separated triple: " + text);
  }
  return v;
}

Vec6 parse_vec6(const std::string& text) {
  Vec6 v;
  if (std::sscanf(text.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf", &v[0], &v[1], &v[2],
                  &v[3], &v[4], &v[5]) != 6) {
    throw DataError("expected a comma-separated 6-tuple: " + text);
  }
  return v;
}

RenderMode parse_mode(const std::string& text) {
  if (text == "intensity") return RenderMode::intensity;
  if (text == "attenuation") return RenderMode::attenuation;
  throw DataError("render mode must be intensity or attenuation: " + text);
}

std::string format_percent(double percent) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", percent);
  std::string s(buf);
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

void print_metric_line(const std::string& label, const MetricReport& report) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%s mTRE (mm): %.2f \xc2\xb1 %.2f, SMRSR: %s%%",
                label.c_str(), report.mean_mtre, report.stddev_mtre,
                format_percent(report.smrsr_percent).c_str());
  std::cout << buf << "\n";
}

struct PhantomArgs {
  std::string kind = "sphere_pair";
  std::string dims = "64,64,64";
  std::string spacing = "1,1,1";
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_phantom(const PhantomArgs& args) {
  const auto [vol, marks] =
      make_phantom(phantom_kind_from_string(args.kind), parse_dims(args.dims),
                   parse_vec3(args.spacing), args.seed);
  save_volume(args.out, vol);
  save_landmarks(args.out + ".landmarks.json", marks);
  std::cout << "wrote " << args.out << ".vol.json/.raw and " << args.out
            << ".landmarks.json (" << marks.size() << " landmarks)\n";
  return 0;
}

struct RenderArgs {
  std::string volume;
  std::string pose;
  std::string geom;
  std::string mode = "intensity";
  std::string out;
  std::string pgm;
  int workers = 0;
};

int cmd_render(const RenderArgs& args) {
  const Volume vol = load_volume(args.volume);
  const Pose pose = load_pose(args.pose);
  const DetectorGeometry geom = load_geometry(args.geom);
  const Image img = render(vol, geom, pose, parse_mode(args.mode), args.workers);
  save_image(args.out, img);
  if (!args.pgm.empty()) {
    save_pgm(args.pgm, normalize_image(img));
  }
  std::cout << "wrote " << args.out << ".img.json/.raw\n";
  return 0;
}

struct SamplePosesArgs {
  std::string base;
  std::string mean = "0,0,0,0,0,0";
  std::string stddev;
  int count = 1;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_sample_poses(const SamplePosesArgs& args) {
  const Pose base = load_pose(args.base);
  const TwistDistribution dist(parse_vec6(args.mean), parse_vec6(args.stddev));
  std::vector<Pose> poses;
  poses.reserve(static_cast<std::size_t>(args.count));
  for (int i = 0; i < args.count; ++i) {
    poses.push_back(compose(
        exp(sample_twist(dist, args.seed ^ static_cast<std::uint64_t>(i))),
        base));
  }
  save_poses(args.out, poses);
  std::cout << "wrote " << poses.size() << " poses to " << args.out << "\n";
  return 0;
}

struct RegisterArgs {
  std::string volume;
  std::string geom;
  std::string fixed1, fixed2;
  std::string init1, init2;
  std::string init;     // coupled variant
  double theta = M_PI / 2;
  std::string t_trans;  // optional pose file overriding theta
  std::string config;
  std::string mode = "intensity";
  std::string out;
  int workers = 0;
};

int cmd_register(const RegisterArgs& args, bool coupled) {
  const Volume vol = load_volume(args.volume);
  const DetectorGeometry geom = load_geometry(args.geom);
  const std::array<Image, 2> fixed = {load_image(args.fixed1),
                                      load_image(args.fixed2)};
  const RefineConfig cfg =
      args.config.empty() ? RefineConfig{} : load_refine_config(args.config);
  const RenderMode mode = parse_mode(args.mode);

  RegistrationResult result;
  if (coupled) {
    const Pose init = load_pose(args.init);
    const Pose t_trans = args.t_trans.empty()
                             ? rotation_about_center(args.theta, vol.center())
                             : load_pose(args.t_trans);
    result = fine_register_coupled(vol, geom, fixed, init, t_trans, cfg, mode,
                                   args.workers);
  } else {
    const std::array<Pose, 2> init = {load_pose(args.init1),
                                      load_pose(args.init2)};
    result = fine_register(vol, geom, fixed, init, cfg, mode, args.workers);
  }
  save_registration_result(args.out, result);

  char buf[160];
  if (!result.loss_trace.empty()) {
    std::snprintf(buf, sizeof(buf),
                  "iterations: %d, objective %.6g -> best %.6g, converged: %s",
                  result.iterations_run, result.loss_trace.front(),
                  *std::min_element(result.loss_trace.begin(),
                                    result.loss_trace.end()),
                  result.converged ? "yes" : "no");
    std::cout << buf << "\n";
  } else {
    std::cout << "iterations: 0 (initialization returned unchanged)\n";
  }
  std::cout << "wrote " << args.out << "\n";
  return 0;
}

struct EvaluateArgs {
  std::string true_poses;
  std::string est_poses;
  std::string landmarks;
  std::string geom;
  double lambda = 0.194;
  std::string out;
};

int cmd_evaluate(const EvaluateArgs& args) {
  const std::vector<Pose> truth = load_poses(args.true_poses);
  const std::vector<Pose> est = load_poses(args.est_poses);
  if (truth.size() != est.size() || truth.empty() || truth.size() % 2 != 0) {
    throw DataError(
        "pose files must hold the same even number of poses (two per case)");
  }
  const LandmarkSet marks = load_landmarks(args.landmarks);
  const DetectorGeometry geom = load_geometry(args.geom);

  std::vector<double> mtres;
  mtres.reserve(truth.size() / 2);
  for (std::size_t c = 0; c + 1 < truth.size(); c += 2) {
    mtres.push_back(mtre(geom, {truth[c], truth[c + 1]}, {est[c], est[c + 1]},
                         marks, args.lambda));
  }
  const MetricReport report = make_metric_report(mtres, args.lambda);
  std::cout << "lambda (mm/px): " << args.lambda << ", cases: "
            << report.n_cases << "\n";
  print_metric_line("", report);
  if (!args.out.empty()) {
    save_metric_report(args.out, report);
    std::cout << "wrote " << args.out << "\n";
  }
  return 0;
}

struct ExperimentArgs {
  std::string spec;
  std::string out_dir = ".";
  int workers = 0;
  bool overlays = false;
};

int cmd_experiment(const ExperimentArgs& args) {
  const ExperimentSpec spec = load_experiment_spec(args.spec);
  std::filesystem::create_directories(args.out_dir);
  const ExperimentReport report = run_experiment(spec, args.workers);
  const auto report_path = std::filesystem::path(args.out_dir) / "report.json";
  save_experiment_report(report_path, report);

  std::cout << "cases: " << report.n_cases << ", failures: " << report.failures
            << ", lambda: " << report.lambda << "\n";
  print_metric_line("before:", report.before);
  print_metric_line("after: ", report.after);
  std::cout << "wrote " << report_path.string() << "\n";

  if (args.overlays) {
    // Re-render the scene and blend each fixed image with the render at the
    // refined pose estimate.
    const auto [vol, marks] =
        make_phantom(spec.phantom.kind, spec.phantom.dims, spec.phantom.spacing,
                     spec.phantom.seed);
    const auto cases = generate_cases(spec, vol);
    for (std::size_t c = 0; c < cases.size(); ++c) {
      if (report.cases[c].failed) continue;
      for (int view = 0; view < 2; ++view) {
        const Image estimated =
            render(vol, spec.geometry, report.cases[c].refined_poses[view],
                   spec.render_mode, args.workers);
        const auto prefix =
            std::filesystem::path(args.out_dir) /
            ("case" + std::to_string(c) + "_view" + std::to_string(view + 1));
        write_case_overlay(prefix, cases[c].fixed_images[view], estimated);
      }
    }
    std::cout << "wrote per-case overlays to " << args.out_dir << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-view 2D/3D rigid registration toolkit"};
  app.require_subcommand(1);

  PhantomArgs phantom_args;
  auto* phantom = app.add_subcommand("phantom", "generate a synthetic volume");
  phantom->add_option("--kind", phantom_args.kind,
                      "sphere_pair | nested_boxes | pelvis_like");
  phantom->add_option("--dims", phantom_args.dims, "voxels, e.g. 64,64,64");
  phantom->add_option("--spacing", phantom_args.spacing, "mm/voxel, e.g. 1,1,1");
  phantom->add_option("--seed", phantom_args.seed, "placement seed");
  phantom->add_option("--out", phantom_args.out, "output prefix")->required();

  RenderArgs render_args;
  auto* render_cmd = app.add_subcommand("render", "render one DRR");
  render_cmd->add_option("--volume", render_args.volume)->required();
  render_cmd->add_option("--pose", render_args.pose)->required();
  render_cmd->add_option("--geom", render_args.geom)->required();
  render_cmd->add_option("--mode", render_args.mode, "intensity | attenuation");
  render_cmd->add_option("--out", render_args.out, "output prefix")->required();
  render_cmd->add_option("--pgm", render_args.pgm, "optional PGM preview path");
  render_cmd->add_option("--workers", render_args.workers);

  SamplePosesArgs sample_args;
  auto* sample = app.add_subcommand("sample-poses",
                                    "draw pose samples around a base pose");
  sample->add_option("--base", sample_args.base, "base pose file")->required();
  sample->add_option("--mean", sample_args.mean, "twist mean, 6 values");
  sample->add_option("--stddev", sample_args.stddev, "twist stddev, 6 values")
      ->required();
  sample->add_option("--count", sample_args.count);
  sample->add_option("--seed", sample_args.seed);
  sample->add_option("--out", sample_args.out)->required();

  RegisterArgs register_args;
  auto* register_cmd =
      app.add_subcommand("register", "two-view fine registration");
  register_cmd->add_option("--volume", register_args.volume)->required();
  register_cmd->add_option("--geom", register_args.geom)->required();
  register_cmd->add_option("--fixed1", register_args.fixed1)->required();
  register_cmd->add_option("--fixed2", register_args.fixed2)->required();
  register_cmd->add_option("--init1", register_args.init1)->required();
  register_cmd->add_option("--init2", register_args.init2)->required();
  register_cmd->add_option("--config", register_args.config);
  register_cmd->add_option("--mode", register_args.mode);
  register_cmd->add_option("--out", register_args.out)->required();
  register_cmd->add_option("--workers", register_args.workers);

  RegisterArgs coupled_args;
  auto* coupled = app.add_subcommand(
      "register-coupled", "PA/LAT registration with a shared twist");
  coupled->add_option("--volume", coupled_args.volume)->required();
  coupled->add_option("--geom", coupled_args.geom)->required();
  coupled->add_option("--fixed1", coupled_args.fixed1)->required();
  coupled->add_option("--fixed2", coupled_args.fixed2)->required();
  coupled->add_option("--init", coupled_args.init, "PA init pose")->required();
  coupled->add_option("--theta", coupled_args.theta,
                      "inter-view rotation angle (rad)");
  coupled->add_option("--t-trans", coupled_args.t_trans,
                      "explicit inter-view pose file");
  coupled->add_option("--config", coupled_args.config);
  coupled->add_option("--mode", coupled_args.mode);
  coupled->add_option("--out", coupled_args.out)->required();
  coupled->add_option("--workers", coupled_args.workers);

  EvaluateArgs evaluate_args;
  auto* evaluate = app.add_subcommand("evaluate", "score pose estimates");
  evaluate->add_option("--true-poses", evaluate_args.true_poses)->required();
  evaluate->add_option("--est-poses", evaluate_args.est_poses)->required();
  evaluate->add_option("--landmarks", evaluate_args.landmarks)->required();
  evaluate->add_option("--geom", evaluate_args.geom)->required();
  evaluate->add_option("--lambda", evaluate_args.lambda, "mm per pixel");
  evaluate->add_option("--out", evaluate_args.out, "optional report path");

  ExperimentArgs experiment_args;
  auto* experiment =
      app.add_subcommand("experiment", "run a batch registration study");
  experiment->add_option("--spec", experiment_args.spec)->required();
  experiment->add_option("--out-dir", experiment_args.out_dir);
  experiment->add_option("--workers", experiment_args.workers);
  experiment->add_flag("--overlays", experiment_args.overlays,
                       "write per-case blend/edge PGMs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (phantom->parsed()) return cmd_phantom(phantom_args);
    if (render_cmd->parsed()) return cmd_render(render_args);
    if (sample->parsed()) return cmd_sample_poses(sample_args);
    if (register_cmd->parsed()) return cmd_register(register_args, false);
    if (coupled->parsed()) return cmd_register(coupled_args, true);
    if (evaluate->parsed()) return cmd_evaluate(evaluate_args);
    if (experiment->parsed()) return cmd_experiment(experiment_args);
  } catch (const NumericError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
