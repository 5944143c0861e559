#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>

#include "mvreg/errors.hpp"
#include "mvreg/phantom.hpp"
#include "mvreg/pipeline.hpp"
#include "mvreg/registration.hpp"
#include "mvreg/serialize.hpp"
#include "test_util.hpp"

using namespace mvreg;
using testutil::TempDir;

namespace {

struct TwoViewScene {
  Volume vol;
  LandmarkSet marks;
  DetectorGeometry geom;
  Pose pa;
  std::array<Pose, 2> true_poses;
  std::array<Image, 2> fixed;
};

TwoViewScene small_scene(std::uint64_t seed = 33) {
  TwoViewScene s;
  auto [vol, marks] =
      make_phantom(PhantomKind::sphere_pair, {24, 24, 24}, Vec3(2, 2, 2), seed);
  s.vol = std::move(vol);
  s.marks = std::move(marks);
  s.geom = DetectorGeometry(260.0, 48, 48, 2.0);
  s.pa = make_pa_pose(s.vol.center(), 130.0);

  Vec6 d1 = Vec6::Zero();
  d1[0] = 1.0;
  d1[4] = 0.01;
  Vec6 d2 = Vec6::Zero();
  d2[1] = -1.5;
  d2[5] = -0.02;
  s.true_poses = {compose(exp(Twist(d1)), s.pa), compose(exp(Twist(d2)), s.pa)};
  s.fixed = {render(s.vol, s.geom, s.true_poses[0]),
             render(s.vol, s.geom, s.true_poses[1])};
  return s;
}

}  // namespace

TEST_CASE("refine config validation") {
  RefineConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.weight_low_ncc = 0.7;
  CHECK_THROWS_AS(cfg.validate(), ArgumentError);
  cfg.weight_low_ncc = 0.8;
  cfg.fd_step = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ArgumentError);
}

TEST_CASE("init_perturbed: degenerate stddev returns the pose, seeded draws differ") {
  std::mt19937_64 gen(43);
  const Pose truth = testutil::random_pose(gen);
  const TwistDistribution tight(Vec6::Zero(), Vec6::Constant(1e-300));
  const Pose same = init_perturbed(truth, tight, 7);
  CHECK((same.matrix() - truth.matrix()).cwiseAbs().maxCoeff() < 1e-12);

  const TwistDistribution wide(Vec6::Zero(), Vec6::Constant(0.5));
  const Pose a = init_perturbed(truth, wide, 7);
  const Pose b = init_perturbed(truth, wide, 7);
  const Pose c = init_perturbed(truth, wide, 8);
  CHECK((a.matrix() - b.matrix()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.matrix() - c.matrix()).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("init_perturbed distance grows with the dispersion") {
  std::mt19937_64 gen(47);
  const Pose truth = testutil::random_pose(gen);
  double mean_small = 0.0;
  double mean_large = 0.0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const TwistDistribution small_d(Vec6::Zero(), Vec6::Constant(0.01));
    const TwistDistribution large_d(Vec6::Zero(), Vec6::Constant(0.1));
    mean_small += geodesic_distance(truth, init_perturbed(truth, small_d, s), 100.0);
    mean_large += geodesic_distance(truth, init_perturbed(truth, large_d, s), 100.0);
  }
  CHECK(mean_large > mean_small);
}

TEST_CASE("init_multistart picks the self-rendered truth when offered") {
  const TwoViewScene s = small_scene();
  // A degenerate distribution keeps every candidate at the true pose.
  const TwistDistribution tight(Vec6::Zero(), Vec6::Constant(1e-300));
  const Pose chosen = init_multistart(s.vol, s.geom, s.fixed[0],
                                      s.true_poses[0], tight, 1, 3);
  CHECK((chosen.matrix() - s.true_poses[0].matrix()).cwiseAbs().maxCoeff() <
        1e-12);

  // With real dispersion, the selected pose scores at least as well as a
  // single-sample draw.
  const TwistDistribution wide(Vec6::Zero(),
                               (Vec6() << 4, 4, 4, 0.05, 0.05, 0.05).finished());
  const Pose multi = init_multistart(s.vol, s.geom, s.fixed[0],
                                     s.true_poses[0], wide, 16, 3);
  const Pose single = init_multistart(s.vol, s.geom, s.fixed[0],
                                      s.true_poses[0], wide, 1, 3);
  const double ncc_multi =
      1.0 - similarity_loss(s.fixed[0], render(s.vol, s.geom, multi));
  const double ncc_single =
      1.0 - similarity_loss(s.fixed[0], render(s.vol, s.geom, single));
  CHECK(ncc_multi >= ncc_single);

  Image constant(48, 48, 2.0);
  CHECK_THROWS_AS(init_multistart(s.vol, s.geom, constant, s.true_poses[0],
                                  wide, 4, 3),
                  DegenerateImageError);
}

TEST_CASE("load_external_poses: identity, projection, and rejection") {
  TempDir dir("ext_poses");

  std::ofstream good(dir.file("good.json"));
  good << "[{\"matrix\": [1,0,0,0, 0,1,0,0, 0,0,1,0, 0,0,0,1]}]";
  good.close();
  const auto poses = load_external_poses(dir.file("good.json"));
  REQUIRE(poses.size() == 1);
  CHECK((poses[0].matrix() - Mat4::Identity()).cwiseAbs().maxCoeff() == 0.0);

  // 1e-8-level noise is projected back onto SO(3).
  std::ofstream noisy(dir.file("noisy.json"));
  noisy << "[{\"matrix\": [1.00000001,0,0,5, 0,1,0.00000001,-3, 0,0,1,2, "
           "0,0,0,1]}]";
  noisy.close();
  const auto projected = load_external_poses(dir.file("noisy.json"));
  REQUIRE(projected.size() == 1);
  CHECK(projected[0].orthonormality_error() < 1e-12);
  CHECK((projected[0].translation - Vec3(5, -3, 2)).norm() == 0.0);

  // det = -1 reflections are not rigid.
  std::ofstream mirror(dir.file("mirror.json"));
  mirror << "[{\"matrix\": [-1,0,0,0, 0,1,0,0, 0,0,1,0, 0,0,0,1]}]";
  mirror.close();
  CHECK_THROWS_AS(load_external_poses(dir.file("mirror.json")), DataError);

  // Far-from-orthonormal input is rejected rather than silently projected.
  std::ofstream skewed(dir.file("skewed.json"));
  skewed << "[{\"matrix\": [1.1,0,0,0, 0,1,0,0, 0,0,1,0, 0,0,0,1]}]";
  skewed.close();
  CHECK_THROWS_AS(load_external_poses(dir.file("skewed.json")), DataError);
}

TEST_CASE("assign_view_weights follows the similarity ordering") {
  RefineConfig cfg;
  CHECK(assign_view_weights({0.3, 0.9}, cfg) == std::array<double, 2>{0.8, 0.2});
  CHECK(assign_view_weights({0.9, 0.3}, cfg) == std::array<double, 2>{0.2, 0.8});
  CHECK(assign_view_weights({0.5, 0.5}, cfg) == std::array<double, 2>{0.5, 0.5});

  cfg.focus_low_similarity = false;
  CHECK(assign_view_weights({0.3, 0.9}, cfg) == std::array<double, 2>{0.2, 0.8});

  cfg.focus_low_similarity = true;
  CHECK_THROWS_AS(
      assign_view_weights({std::nan(""), 0.5}, cfg), ArgumentError);
}

TEST_CASE("fine_register: zero iterations returns the inits untouched") {
  const TwoViewScene s = small_scene();
  RefineConfig cfg;
  cfg.iterations = 0;
  const auto result =
      fine_register(s.vol, s.geom, s.fixed, s.true_poses, cfg);
  CHECK(result.loss_trace.empty());
  CHECK(result.iterations_run == 0);
  for (int i = 0; i < 2; ++i) {
    CHECK((result.refined_poses[i].matrix() - s.true_poses[i].matrix())
              .cwiseAbs()
              .maxCoeff() == 0.0);
  }
}

TEST_CASE("fine_register: a stationary start stays put via best-iterate") {
  const TwoViewScene s = small_scene();
  RefineConfig cfg;
  cfg.iterations = 8;
  const auto result = fine_register(s.vol, s.geom, s.fixed, s.true_poses, cfg);
  CHECK(result.iterations_run == 8);
  CHECK(result.loss_trace.size() == 8);
  // The first iterate evaluates to zero loss, so it stays the best.
  CHECK(result.loss_trace.front() == doctest::Approx(0.0).epsilon(1e-9));
  for (int i = 0; i < 2; ++i) {
    CHECK(geodesic_distance(s.true_poses[i], result.refined_poses[i],
                            s.geom.source_to_detector) < 1e-3);
  }
}

TEST_CASE("fine_register improves a perturbed initialization") {
  const TwoViewScene s = small_scene();
  Vec6 off1 = Vec6::Zero();
  off1[0] = 2.0;
  off1[2] = -1.0;
  off1[4] = 0.03;
  Vec6 off2 = Vec6::Zero();
  off2[1] = 2.5;
  off2[3] = -0.03;
  const std::array<Pose, 2> init = {compose(exp(Twist(off1)), s.true_poses[0]),
                                    compose(exp(Twist(off2)), s.true_poses[1])};

  RefineConfig cfg;
  cfg.iterations = 40;
  cfg.lr_translation = 1.0;
  cfg.lr_rotation = 5e-3;
  const auto result = fine_register(s.vol, s.geom, s.fixed, init, cfg);

  REQUIRE(result.loss_trace.size() == 40);
  REQUIRE(result.ncc_traces[0].size() == 40);
  const double best =
      *std::min_element(result.loss_trace.begin(), result.loss_trace.end());
  CHECK(best <= result.loss_trace.front());
  for (int i = 0; i < 2; ++i) {
    const double ncc_initial = result.ncc_traces[i].front();
    const double ncc_refined = 1.0 - similarity_loss(
        s.fixed[i], render(s.vol, s.geom, result.refined_poses[i]));
    CHECK(ncc_refined > ncc_initial);
  }
  // Identical inputs give bit-identical results.
  const auto again = fine_register(s.vol, s.geom, s.fixed, init, cfg);
  CHECK(again.loss_trace == result.loss_trace);
  for (int i = 0; i < 2; ++i) {
    CHECK((again.refined_poses[i].matrix() - result.refined_poses[i].matrix())
              .cwiseAbs()
              .maxCoeff() == 0.0);
  }
}

TEST_CASE("fine_register rejects mismatched image sizes") {
  const TwoViewScene s = small_scene();
  std::array<Image, 2> wrong = {Image(32, 32, 2.0), Image(32, 32, 2.0)};
  RefineConfig cfg;
  cfg.iterations = 1;
  CHECK_THROWS_AS(fine_register(s.vol, s.geom, wrong, s.true_poses, cfg),
                  ArgumentError);
}

TEST_CASE("fine_register_coupled keeps the inter-view constraint exact") {
  const TwoViewScene s = small_scene();
  const Pose t_trans = rotation_about_center(M_PI / 2, s.vol.center());

  // Truth: a shared twist applied to the PA pose; fixed images follow it.
  Vec6 shared = Vec6::Zero();
  shared[0] = 1.5;
  shared[5] = 0.02;
  const Pose true1 = compose(exp(Twist(shared)), s.pa);
  const Pose true2 = compose(t_trans, true1);
  const std::array<Image, 2> fixed = {render(s.vol, s.geom, true1),
                                      render(s.vol, s.geom, true2)};

  RefineConfig cfg;
  cfg.iterations = 30;
  cfg.lr_translation = 1.0;
  cfg.lr_rotation = 5e-3;
  const auto result =
      fine_register_coupled(s.vol, s.geom, fixed, s.pa, t_trans, cfg);

  CHECK((result.refined_poses[1].matrix() -
         compose(t_trans, result.refined_poses[0]).matrix())
            .cwiseAbs()
            .maxCoeff() == 0.0);
  const double initial_err =
      geodesic_distance(true1, s.pa, s.geom.source_to_detector);
  const double final_err = geodesic_distance(true1, result.refined_poses[0],
                                             s.geom.source_to_detector);
  CHECK(final_err < initial_err);
}

TEST_CASE("fine_register_coupled: identity t_trans degenerates to equal views") {
  const TwoViewScene s = small_scene();
  const std::array<Image, 2> fixed = {s.fixed[0], s.fixed[0]};
  RefineConfig cfg;
  cfg.iterations = 3;
  const auto result = fine_register_coupled(s.vol, s.geom, fixed,
                                            s.true_poses[0], Pose::identity(),
                                            cfg);
  CHECK((result.refined_poses[0].matrix() - result.refined_poses[1].matrix())
            .cwiseAbs()
            .maxCoeff() == 0.0);
}

TEST_CASE("coupled self-rendered start is a fixed point") {
  const TwoViewScene s = small_scene();
  const Pose t_trans = rotation_about_center(M_PI / 2, s.vol.center());
  const std::array<Image, 2> fixed = {
      render(s.vol, s.geom, s.pa),
      render(s.vol, s.geom, compose(t_trans, s.pa))};
  RefineConfig cfg;
  cfg.iterations = 5;
  const auto result =
      fine_register_coupled(s.vol, s.geom, fixed, s.pa, t_trans, cfg);
  CHECK(result.loss_trace.front() == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(geodesic_distance(s.pa, result.refined_poses[0],
                          s.geom.source_to_detector) < 1e-3);
}

TEST_CASE("registration result JSON roundtrip of traces") {
  TempDir dir("reg_result");
  const TwoViewScene s = small_scene();
  RefineConfig cfg;
  cfg.iterations = 4;
  const auto result = fine_register(s.vol, s.geom, s.fixed, s.true_poses, cfg);
  save_registration_result(dir.file("r.json"), result);
  std::ifstream in(dir.file("r.json"));
  REQUIRE(in.good());
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  CHECK(text.find("\"loss_trace\"") != std::string::npos);
  CHECK(text.find("\"iterations_run\": 4") != std::string::npos);
}
