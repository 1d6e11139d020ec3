#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <optional>
#include <vector>

#include "raylearn/common.hpp"
#include "raylearn/scene.hpp"
#include "raylearn/vec3.hpp"

using namespace raylearn;

namespace {

Scene one_sphere_scene() {
  Material grey;
  grey.albedo = Rgb{0.5, 0.5, 0.5};
  return make_scene({grey}, {Primitive{Sphere{{0, 0, 0}, 1.0}, 0}}, Camera{}, "one-sphere");
}

// Independent oracle: geometric sphere intersection (project center on ray).
std::optional<double> oracle_sphere_t(const Vec3& center, double radius, const Ray& ray) {
  Vec3 l = center - ray.origin;
  double tc = dot(l, ray.direction);
  double d2 = dot(l, l) - tc * tc;
  if (d2 > radius * radius) return std::nullopt;
  double thc = std::sqrt(radius * radius - d2);
  for (double t : {tc - thc, tc + thc})
    if (t >= ray.t_min && t <= ray.t_max) return t;
  return std::nullopt;
}

// Midpoint tensor quadrature of integral(f_s * cos theta) over the hemisphere.
Rgb hemispherical_albedo(const Scene& scene, const ShadingPoint& sp, int res = 1000) {
  Rgb total{0, 0, 0};
  Onb onb(sp.normal);
  for (int i = 0; i < res; ++i) {
    double ct = (i + 0.5) / res;  // cos theta stratified uniformly
    double st = std::sqrt(1 - ct * ct);
    for (int j = 0; j < res; ++j) {
      double phi = kTwoPi * (j + 0.5) / res;
      Vec3 wi = onb.to_world({st * std::cos(phi), st * std::sin(phi), ct});
      total += eval_bsdf(scene, sp, wi) * ct;
    }
  }
  // d(omega) = d(cos theta) d(phi)
  return total * (kTwoPi / double(res) / double(res));
}

ShadingPoint probe_point(const Vec3& n, const Vec3& wo, int material = 0) {
  ShadingPoint sp;
  sp.position = Vec3{0, 0, 0};
  sp.normal = sp.geom_normal = n;
  sp.wo = wo;
  sp.front = true;
  sp.material = material;
  return sp;
}

}  // namespace

TEST_CASE("ray hits unit sphere head on") {
  Scene scene = one_sphere_scene();
  auto sp = intersect(Ray{{0, 0, -2}, {0, 0, 1}, 0.0}, scene);
  REQUIRE(sp.has_value());
  CHECK(sp->t == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(length(sp->position - Vec3{0, 0, -1}) < 1e-12);
  CHECK(length(sp->normal - Vec3{0, 0, -1}) < 1e-12);
  CHECK(sp->front);
}

TEST_CASE("ray misses sphere") {
  Scene scene = one_sphere_scene();
  CHECK(!intersect(Ray{{0, 0, -2}, {0, 1, 0}, 0.0}, scene).has_value());
}

TEST_CASE("nearest hit among overlapping spheres matches exhaustive oracle") {
  Material grey;
  grey.albedo = Rgb{0.5, 0.5, 0.5};
  std::vector<Primitive> prims = {
      Primitive{Sphere{{0, 0, 0}, 1.0}, 0},
      Primitive{Sphere{{0.4, 0.1, -0.3}, 0.9}, 0},
      Primitive{Sphere{{-0.2, -0.5, 0.2}, 1.2}, 0},
  };
  Scene scene = make_scene({grey}, prims, Camera{}, "overlap");

  Rng rng(5);
  int hits = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    Vec3 origin{rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)};
    if (length(origin) < 2.3) continue;  // stay outside all spheres
    Vec3 target{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
    Ray ray{origin, normalize(target - origin), 0.0};

    std::optional<double> best;
    for (const Primitive& p : prims) {
      const Sphere& s = std::get<Sphere>(p.shape);
      if (auto t = oracle_sphere_t(s.center, s.radius, ray))
        if (!best || *t < *best) best = *t;
    }
    auto sp = intersect(ray, scene);
    REQUIRE(sp.has_value() == best.has_value());
    if (sp) {
      CHECK(sp->t == doctest::Approx(*best).epsilon(1e-9));
      ++hits;
    }
  }
  CHECK(hits > 500);
}

TEST_CASE("quad and triangle intersections agree with plane arithmetic") {
  Material grey;
  grey.albedo = Rgb{0.5, 0.5, 0.5};
  // Quad at y=2, x in [0,1], z in [3,5] (axis 1: u axis is z, v axis is x).
  AxisQuad q{1, 2.0, 3.0, 5.0, 0.0, 1.0, -1.0};
  Triangle tri{{-1, 0, 4}, {-3, 0, 4}, {-2, 1, 4}};
  Scene scene = make_scene(
      {grey}, {Primitive{q, 0}, Primitive{tri, 0}}, Camera{}, "planar");

  auto on_quad = intersect(Ray{{0.5, 0, 4}, {0, 1, 0}, 0.0}, scene);
  REQUIRE(on_quad.has_value());
  CHECK(on_quad->t == doctest::Approx(2.0));
  CHECK(dot(on_quad->normal, Vec3{0, -1, 0}) == doctest::Approx(1.0));

  // Outside the extents: same plane, off the rectangle.
  CHECK(!intersect(Ray{{1.5, 0, 4}, {0, 1, 0}, 0.0}, scene).has_value());

  // Triangle centroid shot.
  Vec3 centroid = (tri.a + tri.b + tri.c) / 3.0;
  Vec3 origin{-2, 0.3, 0};
  auto on_tri = intersect(Ray{origin, normalize(centroid - origin), 0.0}, scene);
  REQUIRE(on_tri.has_value());
  CHECK(on_tri->t == doctest::Approx(length(centroid - origin)).epsilon(1e-9));

  // Edge-adjacent miss.
  CHECK(!intersect(Ray{{-2, 2.5, 0}, {0, 0, 1}, 0.0}, scene).has_value());
}

TEST_CASE("retracing up to just before a hit finds nothing") {
  Material grey;
  grey.albedo = Rgb{0.5, 0.5, 0.5};
  std::vector<Primitive> prims = {
      Primitive{Sphere{{0, 0, 0}, 1.0}, 0},
      Primitive{AxisQuad{2, -2.0, -4.0, 4.0, -4.0, 4.0, 1.0}, 0},
  };
  Scene scene = make_scene({grey}, prims, Camera{}, "retrace");
  Rng rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    Vec3 origin{rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(2, 4)};
    Vec3 dir = sample_uniform_sphere(rng.next_double(), rng.next_double());
    auto sp = intersect(Ray{origin, dir, 0.0}, scene);
    if (!sp) continue;
    CHECK(dot(sp->normal, -dir) > 0);  // normal faces the origin side
    auto again = intersect(Ray{origin, dir, 0.0, sp->t - 1e-4}, scene);
    CHECK(!again.has_value());
  }
}

TEST_CASE("diffuse bsdf is the constant lambertian lobe") {
  Scene scene = one_sphere_scene();
  ShadingPoint sp = probe_point({0, 0, 1}, {0, 0, 1});
  Rng rng(9);
  for (int i = 0; i < 100; ++i) {
    Vec3 wi = sample_cosine_hemisphere(sp.normal, rng.next_double(), rng.next_double());
    Rgb f = eval_bsdf(scene, sp, wi);
    CHECK(f.x == doctest::Approx(0.5 / kPi).epsilon(1e-12));
    CHECK(f.y == f.x);
    CHECK(f.z == f.x);
  }
  CHECK(eval_bsdf(scene, sp, Vec3{0, 0, -1}) == Rgb{0, 0, 0});
  CHECK(eval_bsdf(scene, sp, normalize(Vec3{1, 0, -0.01})) == Rgb{0, 0, 0});
}

TEST_CASE("diffuse reciprocity") {
  Scene scene = one_sphere_scene();
  Rng rng(11);
  for (int i = 0; i < 50; ++i) {
    Vec3 n{0, 0, 1};
    Vec3 a = sample_cosine_hemisphere(n, rng.next_double(), rng.next_double());
    Vec3 b = sample_cosine_hemisphere(n, rng.next_double(), rng.next_double());
    CHECK(eval_bsdf(scene, probe_point(n, a), b) == eval_bsdf(scene, probe_point(n, b), a));
  }
}

TEST_CASE("hemispherical albedo never exceeds material albedo") {
  Material diffuse;
  diffuse.albedo = Rgb{0.7, 0.4, 0.2};
  Material glossy;
  glossy.kind = Material::Kind::kGlossy;
  glossy.albedo = Rgb{0.8, 0.8, 0.8};
  glossy.exponent = 32;
  Scene scene = make_scene({diffuse, glossy}, {Primitive{Sphere{{0, 0, 0}, 1.0}, 0}},
                           Camera{}, "materials");

  // Diffuse integrates to exactly the albedo.
  Rgb d = hemispherical_albedo(scene, probe_point({0, 0, 1}, {0, 0, 1}, 0), 400);
  CHECK(d.x == doctest::Approx(0.7).epsilon(1e-4));
  CHECK(d.z == doctest::Approx(0.2).epsilon(1e-4));

  // Glossy at normal incidence peaks at the albedo; tilted views lose the
  // clipped part of the lobe.
  for (Vec3 wo : {Vec3{0, 0, 1}, normalize(Vec3{0.5, 0, 0.9}), normalize(Vec3{1, 0, 0.15})}) {
    Rgb g = hemispherical_albedo(scene, probe_point({0, 0, 1}, wo, 1));
    CHECK(g.x <= 0.8 + 1e-3);
    CHECK(g.x >= 0.0);
  }
  Rgb g0 = hemispherical_albedo(scene, probe_point({0, 0, 1}, {0, 0, 1}, 1));
  CHECK(g0.x == doctest::Approx(0.8).epsilon(2e-3));
}

TEST_CASE("bsdf sampling density matches bsdf_pdf") {
  Material glossy;
  glossy.kind = Material::Kind::kGlossy;
  glossy.albedo = Rgb{0.8, 0.8, 0.8};
  glossy.exponent = 12;
  Material diffuse;
  diffuse.albedo = Rgb{0.6, 0.6, 0.6};
  Scene scene = make_scene({glossy, diffuse}, {Primitive{Sphere{{0, 0, 0}, 1.0}, 0}},
                           Camera{}, "pdfcheck");
  Rng rng(13);
  for (int mat = 0; mat < 2; ++mat) {
    ShadingPoint sp = probe_point({0, 0, 1}, normalize(Vec3{0.3, -0.2, 0.8}), mat);
    for (int i = 0; i < 200; ++i) {
      ScatterSample s = sample_bsdf(scene, sp, rng.next_double(), rng.next_double());
      CHECK(s.pdf > 0);
      CHECK(s.pdf == doctest::Approx(bsdf_pdf(scene, sp, s.wi)).epsilon(1e-9));
      CHECK(std::abs(length(s.wi) - 1) < 1e-9);
    }
  }
}

TEST_CASE("orthonormal bases are orthonormal everywhere") {
  for (Vec3 n : {Vec3{0, 0, 1}, Vec3{0, 0, -1}}) {
    Onb onb(n);
    CHECK(length(onb.n - n) == 0.0);
    CHECK(std::abs(dot(onb.t, onb.b)) < 1e-6);
    CHECK(std::abs(dot(onb.t, onb.n)) < 1e-6);
    CHECK(std::abs(dot(onb.b, onb.n)) < 1e-6);
  }
  Rng rng(15);
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    Vec3 n = sample_uniform_sphere(rng.next_double(), rng.next_double());
    Onb onb(n);
    worst = std::max({worst, std::abs(dot(onb.t, onb.b)), std::abs(dot(onb.t, onb.n)),
                      std::abs(dot(onb.b, onb.n)), std::abs(length(onb.t) - 1),
                      std::abs(length(onb.b) - 1)});
    CHECK(dot(cross(onb.t, onb.b), onb.n) > 0.99);  // right handed
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("light point sampling") {
  Material light;
  light.albedo = Rgb{0, 0, 0};
  light.emission = Rgb{5, 5, 5};
  // Unit quad at y=1 over x,z in [0,1]^2 (axis 1: u=z, v=x).
  AxisQuad unit{1, 1.0, 0.0, 1.0, 0.0, 1.0, -1.0};
  // Area-4 quad at y=0: x,z in [0,2].
  AxisQuad big{1, 0.0, 0.0, 2.0, 0.0, 2.0, 1.0};
  Scene scene = make_scene({light}, {Primitive{unit, 0}, Primitive{big, 0}},
                           Camera{}, "lights");
  REQUIRE(scene.lights.size() == 2);

  LightSample center = sample_light_point(scene, 0, 0.5, 0.5);
  CHECK(length(center.position - Vec3{0.5, 1.0, 0.5}) < 1e-12);
  CHECK(center.pdf_area == 1.0);
  CHECK(length(center.normal - Vec3{0, -1, 0}) == 0.0);

  Rng rng(17);
  Vec3 mean{0, 0, 0};
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    LightSample s = sample_light_point(scene, 1, rng.next_double(), rng.next_double());
    CHECK(s.pdf_area == 0.25);
    mean += s.position;
  }
  mean = mean / double(n);
  // Per-coordinate sigma of uniform [0,2] is 2/sqrt(12).
  double bound = 3.0 * (2.0 / std::sqrt(12.0)) / std::sqrt(double(n));
  CHECK(std::abs(mean.x - 1.0) < bound);
  CHECK(std::abs(mean.z - 1.0) < bound);
  CHECK(mean.y == 0.0);

  CHECK_THROWS_AS(sample_light_point(scene, 2, 0.5, 0.5), ContractViolation);
  CHECK_THROWS_AS(sample_light_point(scene, -1, 0.5, 0.5), ContractViolation);
}

TEST_CASE("light list collects every emissive primitive exactly once") {
  Material plain;
  plain.albedo = Rgb{0.5, 0.5, 0.5};
  Material glow;
  glow.albedo = Rgb{0, 0, 0};
  glow.emission = Rgb{1, 2, 3};
  std::vector<Primitive> prims = {
      Primitive{Sphere{{0, 0, 0}, 1.0}, 0},
      Primitive{Sphere{{3, 0, 0}, 0.5}, 1},
      Primitive{AxisQuad{1, 5.0, 0.0, 1.0, 0.0, 1.0, -1.0}, 1},
  };
  Scene scene = make_scene({plain, glow}, prims, Camera{}, "lightlist");
  REQUIRE(scene.lights.size() == 2);
  std::vector<int> seen;
  for (const Light& l : scene.lights) {
    CHECK(scene.materials[scene.primitives[l.primitive].material].emissive());
    CHECK(l.emission == glow.emission);
    seen.push_back(l.primitive);
  }
  CHECK(seen == std::vector<int>{1, 2});
  CHECK(scene.light_of[0] == -1);
  CHECK(scene.light_of[1] == 0);
  CHECK(scene.light_of[2] == 1);

  // Bounding box covers everything.
  CHECK(scene.bounds_min.x <= -1.0);
  CHECK(scene.bounds_max.x >= 3.5);
  CHECK(scene.bounds_max.y >= 5.0);
}

TEST_CASE("one sided emission") {
  Material glow;
  glow.albedo = Rgb{0, 0, 0};
  glow.emission = Rgb{2, 2, 2};
  AxisQuad q{1, 0.0, -1.0, 1.0, -1.0, 1.0, -1.0};  // emits downward
  Scene scene = make_scene({glow}, {Primitive{q, 0}}, Camera{}, "oneside");

  auto below = intersect(Ray{{0, -1, 0}, {0, 1, 0}, 0.0}, scene);
  REQUIRE(below.has_value());
  CHECK(emitted_radiance(scene, *below) == glow.emission);

  auto above = intersect(Ray{{0, 1, 0}, {0, -1, 0}, 0.0}, scene);
  REQUIRE(above.has_value());
  CHECK(emitted_radiance(scene, *above) == Rgb{0, 0, 0});
}

TEST_CASE("visibility test respects occluders") {
  Material grey;
  grey.albedo = Rgb{0.5, 0.5, 0.5};
  Scene scene = make_scene({grey}, {Primitive{Sphere{{0, 0, 0}, 0.5}, 0}}, Camera{}, "vis");
  Vec3 a{0, 0, -2}, b{0, 0, 2};
  CHECK(!visible(scene, a, Vec3{0, 0, 1}, b, Vec3{0, 0, -1}));
  Vec3 c{2, 0, -2}, d{2, 0, 2};
  CHECK(visible(scene, c, Vec3{0, 0, 1}, d, Vec3{0, 0, -1}));
}

TEST_CASE("scene validation rejects bad inputs") {
  Material ok;
  ok.albedo = Rgb{0.5, 0.5, 0.5};
  Material hot;
  hot.albedo = Rgb{1.0, 0.5, 0.5};  // albedo must stay below 1
  Primitive sphere{Sphere{{0, 0, 0}, 1.0}, 0};
  CHECK_THROWS_AS(make_scene({hot}, {sphere}, Camera{}, "bad"), ContractViolation);
  Primitive bad_mat{Sphere{{0, 0, 0}, 1.0}, 3};
  CHECK_THROWS_AS(make_scene({ok}, {bad_mat}, Camera{}, "bad"), ContractViolation);
  Primitive empty_quad{AxisQuad{1, 0.0, 1.0, 1.0, 0.0, 1.0, 1.0}, 0};
  CHECK_THROWS_AS(make_scene({ok}, {empty_quad}, Camera{}, "bad"), ContractViolation);
}

TEST_CASE("camera rays span the field of view") {
  Camera cam;
  cam.position = Vec3{0, 0, -2};
  cam.look_at = Vec3{0, 0, 1};
  cam.vfov_degrees = 60;
  Ray center = cam.generate_ray(64, 64, 128, 128);
  CHECK(length(center.direction - Vec3{0, 0, 1}) < 1e-12);

  Ray top = cam.generate_ray(64, 0, 128, 128);
  double angle = std::acos(dot(top.direction, Vec3{0, 0, 1})) * 180.0 / kPi;
  CHECK(angle == doctest::Approx(30.0).epsilon(1e-9));

  // Square image: corners are symmetric.
  Ray tl = cam.generate_ray(0, 0, 128, 128);
  Ray br = cam.generate_ray(128, 128, 128, 128);
  CHECK(tl.direction.x == doctest::Approx(-br.direction.x));
  CHECK(tl.direction.y == doctest::Approx(-br.direction.y));
}
