#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "raylearn/qgrid.hpp"
#include "raylearn/sampler.hpp"
#include "raylearn/scenes.hpp"

using namespace raylearn;

namespace {

// Forces the network to the constant function x -> c.
void set_constant(QNetwork& net, double c) {
  for (auto& layer : net.mlp.weights)
    for (double& w : layer) w = 0;
  for (auto& layer : net.mlp.biases)
    for (double& b : layer) b = 0;
  net.mlp.biases.back()[0] = c;
}

// First surface vertex of a camera path plus one cosine-sampled successor.
struct Transition {
  ShadingPoint x, y;
  Vec3 omega, wi;
  double weight = 0;
};

Transition sample_transition(const Scene& scene, uint64_t index) {
  SampleStream stream(index);
  const double px = stream.next() * 64, py = stream.next() * 64;
  Ray ray = scene.camera.generate_ray(px, py, 64, 64);
  auto x = intersect(ray, scene);
  REQUIRE(x.has_value());
  ScatterSample sc = sample_bsdf(scene, *x, stream.next(), stream.next());
  REQUIRE(sc.pdf > 0);
  Ray next = spawn_ray(*x, sc.wi);
  auto y = intersect(next, scene);
  REQUIRE(y.has_value());
  Transition t;
  t.x = *x;
  t.y = *y;
  t.omega = ray.direction;
  t.wi = sc.wi;
  t.weight = luminance(sc.f) * dot(sc.wi, x->normal) / sc.pdf;
  return t;
}

}  // namespace

TEST_CASE("the analytic furnace value is a fixed point of the residual") {
  Scene scene = scenes_builtin("furnace");
  QNetwork live = make_q_network(scene.bounds_min, scene.bounds_max, {9}, 1);
  set_constant(live, 2.0);
  QNetwork frozen = live;
  ForwardCache cache;

  for (uint64_t i = 0; i < 32; ++i) {
    Transition t = sample_transition(scene, stream_index(5, kPurposeProbe, i));
    CHECK(t.weight == doctest::Approx(0.5).epsilon(1e-12));  // albedo, cosine pdf
    Residual r = residual_target(live, frozen, scene, t.x, t.omega, t.y, t.wi, t.weight, cache);
    CHECK(r.target == doctest::Approx(2.0).epsilon(1e-12));  // Le + 0.5 * 2
    CHECK(r.delta == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("a dark scene leaves the zero network at rest") {
  std::vector<Material> mats(1);
  mats[0].kind = Material::Kind::kDiffuse;
  mats[0].albedo = {0.6, 0.6, 0.6};
  mats[0].name = "shell";
  std::vector<Primitive> prims;
  prims.push_back({Sphere{{0, 0, 0}, 2.0, true}, 0});
  Camera cam;
  cam.position = {0, 0, 0};
  cam.look_at = {0, 0, 1};
  Scene scene = make_scene(std::move(mats), std::move(prims), cam, "dark-shell");

  QNetwork live = make_q_network(scene.bounds_min, scene.bounds_max, {9}, 2);
  set_constant(live, 0.0);
  QNetwork frozen = live;
  ForwardCache cache;
  Transition t = sample_transition(scene, stream_index(6, kPurposeProbe, 3));
  Residual r = residual_target(live, frozen, scene, t.x, t.omega, t.y, t.wi, t.weight, cache);
  CHECK(r.target == 0.0);
  CHECK(r.delta == 0.0);

  SUBCASE("training on darkness keeps the estimate near zero") {
    QNetwork net = make_q_network(scene.bounds_min, scene.bounds_max, {64, 64}, 3);
    QTrainConfig cfg;
    cfg.budget_paths = 20000;
    cfg.max_path_length = 6;
    cfg.seed = 4;
    QTrainResult result = train_q_network_online(net, scene, cfg);
    CHECK(result.steps > 0);
    CHECK(result.loss_trace.back() < 5e-4);

    ForwardCache probe_cache;
    double mean_abs = 0;
    for (uint64_t i = 0; i < 200; ++i) {
      Transition t2 = sample_transition(scene, stream_index(7, kPurposeProbe, i));
      mean_abs += std::abs(net.eval(t2.x.position, t2.x.normal, t2.omega, probe_cache));
    }
    CHECK(mean_abs / 200 < 0.01);
  }
}

TEST_CASE("residual training is deterministic") {
  Scene scene = scenes_builtin("cornell-diffuse");
  QTrainConfig cfg;
  cfg.budget_paths = 2000;
  cfg.seed = 9;

  QNetwork a = make_q_network(scene.bounds_min, scene.bounds_max, {64, 64}, 11);
  QNetwork b = make_q_network(scene.bounds_min, scene.bounds_max, {64, 64}, 11);
  QTrainResult ra = train_q_network_online(a, scene, cfg);
  QTrainResult rb = train_q_network_online(b, scene, cfg);

  REQUIRE(ra.loss_trace.size() == rb.loss_trace.size());
  for (size_t i = 0; i < ra.loss_trace.size(); ++i) CHECK(ra.loss_trace[i] == rb.loss_trace[i]);
  CHECK(ra.steps == rb.steps);
  for (size_t l = 0; l < a.mlp.weights.size(); ++l)
    for (size_t i = 0; i < a.mlp.weights[l].size(); ++i)
      CHECK(a.mlp.weights[l][i] == b.mlp.weights[l][i]);
}

TEST_CASE("furnace training recovers the closed-form value") {
  Scene scene = scenes_builtin("furnace");
  QNetwork net = make_q_network(scene.bounds_min, scene.bounds_max, {64, 64}, 0);
  QTrainConfig cfg;
  cfg.budget_paths = 100000;
  cfg.width = 64;
  cfg.height = 64;
  cfg.max_path_length = 6;
  cfg.seed = 0;
  QTrainResult result = train_q_network_online(net, scene, cfg);

  // Probe states drawn from fresh camera paths never seen in training.
  ForwardCache cache;
  double mean_err = 0;
  for (uint64_t i = 0; i < 1000; ++i) {
    Transition t = sample_transition(scene, stream_index(cfg.seed, kPurposeProbe, i));
    mean_err += std::abs(net.eval(t.x.position, t.x.normal, t.omega, cache) - 2.0);
  }
  mean_err /= 1000;
  CHECK(mean_err < 0.1);

  // Squared-residual trace decreases across 10-entry windows.
  REQUIRE(result.loss_trace.size() == 100);
  double prev = 1e300;
  for (int w = 0; w < 10; ++w) {
    double mean = 0;
    for (int k = 0; k < 10; ++k) mean += result.loss_trace[size_t(w * 10 + k)];
    mean /= 10;
    CHECK(mean <= prev);
    prev = mean;
  }
}
