#include "raylearn/scene.hpp"

#include <algorithm>
#include <cmath>

namespace raylearn {

namespace {

constexpr double kRayOffset = 1e-4;

struct HitRecord {
  double t;
  Vec3 normal;  // oriented geometric normal
};

std::optional<HitRecord> hit_sphere(const Sphere& s, const Ray& ray) {
  Vec3 oc = ray.origin - s.center;
  double b = dot(oc, ray.direction);
  double c = dot(oc, oc) - s.radius * s.radius;
  double disc = b * b - c;
  if (disc < 0) return std::nullopt;
  double root = std::sqrt(disc);
  double t = -b - root;
  if (t < ray.t_min || t > ray.t_max) {
    t = -b + root;
    if (t < ray.t_min || t > ray.t_max) return std::nullopt;
  }
  Vec3 n = (ray.origin + t * ray.direction - s.center) / s.radius;
  if (s.inward) n = -n;
  return HitRecord{t, n};
}

std::optional<HitRecord> hit_quad(const AxisQuad& q, const Ray& ray) {
  double dir_a = ray.direction[q.axis];
  if (dir_a == 0) return std::nullopt;
  double t = (q.coord - ray.origin[q.axis]) / dir_a;
  if (t < ray.t_min || t > ray.t_max) return std::nullopt;
  int ua = (q.axis + 1) % 3, va = (q.axis + 2) % 3;
  double u = ray.origin[ua] + t * ray.direction[ua];
  double v = ray.origin[va] + t * ray.direction[va];
  if (u < q.u_min || u > q.u_max || v < q.v_min || v > q.v_max) return std::nullopt;
  Vec3 n{0, 0, 0};
  n[q.axis] = q.normal_sign;
  return HitRecord{t, n};
}

std::optional<HitRecord> hit_triangle(const Triangle& tri, const Ray& ray) {
  Vec3 e1 = tri.b - tri.a, e2 = tri.c - tri.a;
  Vec3 p = cross(ray.direction, e2);
  double det = dot(e1, p);
  if (std::abs(det) < 1e-12) return std::nullopt;
  double inv_det = 1.0 / det;
  Vec3 s = ray.origin - tri.a;
  double u = dot(s, p) * inv_det;
  if (u < 0 || u > 1) return std::nullopt;
  Vec3 q = cross(s, e1);
  double v = dot(ray.direction, q) * inv_det;
  if (v < 0 || u + v > 1) return std::nullopt;
  double t = dot(e2, q) * inv_det;
  if (t < ray.t_min || t > ray.t_max) return std::nullopt;
  return HitRecord{t, normalize(cross(e1, e2))};
}

struct HitVisitor {
  const Ray& ray;
  std::optional<HitRecord> operator()(const Sphere& s) const { return hit_sphere(s, ray); }
  std::optional<HitRecord> operator()(const AxisQuad& q) const { return hit_quad(q, ray); }
  std::optional<HitRecord> operator()(const Triangle& t) const { return hit_triangle(t, ray); }
};

std::optional<HitRecord> hit_primitive(const Primitive& prim, const Ray& ray) {
  return std::visit(HitVisitor{ray}, prim.shape);
}

void grow_bounds(Vec3& lo, Vec3& hi, const Vec3& p) {
  for (int i = 0; i < 3; ++i) {
    lo[i] = std::min(lo[i], p[i]);
    hi[i] = std::max(hi[i], p[i]);
  }
}

void check_ray(const Ray& ray) {
  require(ray.t_min >= 0 && ray.t_min < ray.t_max, "ray: t_min must be in [0, t_max)");
  require(std::abs(length_squared(ray.direction) - 1.0) < 1e-6, "ray: direction not unit");
}

}  // namespace

Ray Camera::generate_ray(double px, double py, int width, int height) const {
  Vec3 forward = normalize(look_at - position);
  Vec3 right = normalize(cross(forward, up));
  Vec3 cam_up = cross(right, forward);
  double tan_half = std::tan(vfov_degrees * kPi / 360.0);
  double aspect = double(width) / double(height);
  double sx = (2.0 * px / width - 1.0) * tan_half * aspect;
  double sy = (1.0 - 2.0 * py / height) * tan_half;
  return Ray{position, normalize(forward + sx * right + sy * cam_up), 0.0};
}

double primitive_area(const Primitive& prim) {
  struct Area {
    double operator()(const Sphere& s) const { return 4.0 * kPi * s.radius * s.radius; }
    double operator()(const AxisQuad& q) const {
      return (q.u_max - q.u_min) * (q.v_max - q.v_min);
    }
    double operator()(const Triangle& t) const {
      return 0.5 * length(cross(t.b - t.a, t.c - t.a));
    }
  };
  return std::visit(Area{}, prim.shape);
}

Scene make_scene(std::vector<Material> materials, std::vector<Primitive> primitives,
                 Camera camera, std::string name) {
  require(!materials.empty(), "scene: needs at least one material");
  require(!primitives.empty(), "scene: needs at least one primitive");
  for (const Material& m : materials) {
    require(m.albedo.x >= 0 && m.albedo.y >= 0 && m.albedo.z >= 0 && m.albedo.x < 1 &&
                m.albedo.y < 1 && m.albedo.z < 1,
            "material: albedo must be in [0,1) per channel");
    require(m.emission.x >= 0 && m.emission.y >= 0 && m.emission.z >= 0 && is_finite(m.emission),
            "material: emission must be finite and nonnegative");
    require(m.exponent >= 0, "material: exponent must be nonnegative");
  }

  Scene scene;
  scene.materials = std::move(materials);
  scene.primitives = std::move(primitives);
  scene.camera = camera;
  scene.name = std::move(name);
  scene.bounds_min = Vec3(1e30);
  scene.bounds_max = Vec3(-1e30);
  scene.light_of.assign(scene.primitives.size(), -1);

  for (size_t i = 0; i < scene.primitives.size(); ++i) {
    const Primitive& prim = scene.primitives[i];
    require(prim.material >= 0 && prim.material < int(scene.materials.size()),
            "primitive: material index out of range");
    struct Bounds {
      Vec3 *lo, *hi;
      void operator()(const Sphere& s) const {
        grow_bounds(*lo, *hi, s.center - Vec3(s.radius));
        grow_bounds(*lo, *hi, s.center + Vec3(s.radius));
      }
      void operator()(const AxisQuad& q) const {
        require(q.axis >= 0 && q.axis < 3, "quad: bad axis");
        require(q.u_max > q.u_min && q.v_max > q.v_min, "quad: empty extents");
        require(q.normal_sign == 1 || q.normal_sign == -1, "quad: normal_sign must be +-1");
        Vec3 a, b;
        a[q.axis] = b[q.axis] = q.coord;
        a[(q.axis + 1) % 3] = q.u_min;
        b[(q.axis + 1) % 3] = q.u_max;
        a[(q.axis + 2) % 3] = q.v_min;
        b[(q.axis + 2) % 3] = q.v_max;
        grow_bounds(*lo, *hi, a);
        grow_bounds(*lo, *hi, b);
      }
      void operator()(const Triangle& t) const {
        require(length(cross(t.b - t.a, t.c - t.a)) > 1e-12, "triangle: degenerate");
        grow_bounds(*lo, *hi, t.a);
        grow_bounds(*lo, *hi, t.b);
        grow_bounds(*lo, *hi, t.c);
      }
    };
    std::visit(Bounds{&scene.bounds_min, &scene.bounds_max}, prim.shape);

    const Material& m = scene.materials[prim.material];
    if (m.emissive()) {
      scene.light_of[i] = int(scene.lights.size());
      scene.lights.push_back(Light{int(i), m.emission, primitive_area(prim)});
    }
  }
  return scene;
}

std::optional<ShadingPoint> intersect(const Ray& ray, const Scene& scene) {
  check_ray(ray);
  double best_t = ray.t_max;
  int best = -1;
  Vec3 best_normal;
  for (size_t i = 0; i < scene.primitives.size(); ++i) {
    Ray clipped = ray;
    clipped.t_max = best_t;
    if (auto h = hit_primitive(scene.primitives[i], clipped)) {
      best_t = h->t;
      best = int(i);
      best_normal = h->normal;
    }
  }
  if (best < 0) return std::nullopt;

  ShadingPoint sp;
  sp.position = ray.origin + best_t * ray.direction;
  sp.geom_normal = best_normal;
  sp.front = dot(best_normal, ray.direction) < 0;
  sp.normal = sp.front ? best_normal : -best_normal;
  sp.wo = -ray.direction;
  sp.t = best_t;
  sp.primitive = best;
  sp.material = scene.primitives[best].material;
  return sp;
}

bool visible(const Scene& scene, const Vec3& from, const Vec3& from_normal, const Vec3& to,
             const Vec3& to_normal) {
  Vec3 delta = to + kRayOffset * to_normal - (from + kRayOffset * from_normal);
  double dist = length(delta);
  if (dist < kRayOffset) return true;
  Ray ray{from + kRayOffset * from_normal, delta / dist, 0.0, dist * (1.0 - 1e-6)};
  for (const Primitive& prim : scene.primitives)
    if (hit_primitive(prim, ray)) return false;
  return true;
}

Rgb emitted_radiance(const Scene& scene, const ShadingPoint& sp) {
  if (!sp.front) return Rgb{0, 0, 0};
  return scene.materials[sp.material].emission;
}

Rgb eval_bsdf(const Scene& scene, const ShadingPoint& sp, const Vec3& wi) {
  if (dot(sp.normal, wi) <= 0) return Rgb{0, 0, 0};
  const Material& m = scene.materials[sp.material];
  if (m.kind == Material::Kind::kDiffuse) return m.albedo * kInvPi;
  double c = dot(reflect_about(sp.wo, sp.normal), wi);
  if (c <= 0) return Rgb{0, 0, 0};
  return m.albedo * ((m.exponent + 2.0) / kTwoPi * std::pow(c, m.exponent));
}

ScatterSample sample_bsdf(const Scene& scene, const ShadingPoint& sp, double u0, double u1) {
  const Material& m = scene.materials[sp.material];
  ScatterSample out;
  if (m.kind == Material::Kind::kDiffuse) {
    out.wi = sample_cosine_hemisphere(sp.normal, u0, u1);
    out.pdf = std::max(0.0, dot(sp.normal, out.wi)) * kInvPi;
    out.f = dot(sp.normal, out.wi) > 0 ? m.albedo * kInvPi : Rgb{0, 0, 0};
    return out;
  }
  Vec3 r = reflect_about(sp.wo, sp.normal);
  double cos_a = std::pow(u0, 1.0 / (m.exponent + 1.0));
  double sin_a = std::sqrt(std::max(0.0, 1.0 - cos_a * cos_a));
  double phi = kTwoPi * u1;
  out.wi = Onb(r).to_world({sin_a * std::cos(phi), sin_a * std::sin(phi), cos_a});
  out.pdf = (m.exponent + 1.0) / kTwoPi * std::pow(cos_a, m.exponent);
  out.f = eval_bsdf(scene, sp, out.wi);
  return out;
}

double bsdf_pdf(const Scene& scene, const ShadingPoint& sp, const Vec3& wi) {
  const Material& m = scene.materials[sp.material];
  if (m.kind == Material::Kind::kDiffuse) return std::max(0.0, dot(sp.normal, wi)) * kInvPi;
  double c = dot(reflect_about(sp.wo, sp.normal), wi);
  if (c <= 0) return 0;
  return (m.exponent + 1.0) / kTwoPi * std::pow(c, m.exponent);
}

SurfacePoint sample_surface_point(const Scene& scene, int primitive_index, double u0, double u1) {
  require(primitive_index >= 0 && primitive_index < int(scene.primitives.size()),
          "sample_surface_point: primitive index out of range");
  const Primitive& prim = scene.primitives[size_t(primitive_index)];

  SurfacePoint out;
  if (const Sphere* s = std::get_if<Sphere>(&prim.shape)) {
    Vec3 dir = sample_uniform_sphere(u0, u1);
    out.position = s->center + s->radius * dir;
    out.normal = s->inward ? -dir : dir;
  } else if (const AxisQuad* q = std::get_if<AxisQuad>(&prim.shape)) {
    Vec3 p;
    p[q->axis] = q->coord;
    p[(q->axis + 1) % 3] = q->u_min + u0 * (q->u_max - q->u_min);
    p[(q->axis + 2) % 3] = q->v_min + u1 * (q->v_max - q->v_min);
    out.position = p;
    out.normal = Vec3{0, 0, 0};
    out.normal[q->axis] = q->normal_sign;
  } else {
    const Triangle& t = std::get<Triangle>(prim.shape);
    double su = std::sqrt(u0);
    double b0 = 1.0 - su, b1 = u1 * su;
    out.position = t.a * b0 + t.b * b1 + t.c * (1.0 - b0 - b1);
    out.normal = normalize(cross(t.b - t.a, t.c - t.a));
  }
  return out;
}

std::vector<double> cumulative_primitive_areas(const Scene& scene) {
  std::vector<double> cum(scene.primitives.size());
  double total = 0;
  for (size_t i = 0; i < scene.primitives.size(); ++i) {
    total += primitive_area(scene.primitives[i]);
    cum[i] = total;
  }
  return cum;
}

LightSample sample_light_point(const Scene& scene, int light_index, double u0, double u1) {
  require(light_index >= 0 && light_index < int(scene.lights.size()),
          "sample_light_point: light index out of range");
  const Light& light = scene.lights[light_index];
  SurfacePoint p = sample_surface_point(scene, light.primitive, u0, u1);
  return LightSample{p.position, p.normal, 1.0 / light.area};
}

Ray spawn_ray(const ShadingPoint& sp, const Vec3& direction) {
  Vec3 side = dot(direction, sp.geom_normal) >= 0 ? sp.geom_normal : -sp.geom_normal;
  return Ray{sp.position + kRayOffset * side, direction, 0.0};
}

}  // namespace raylearn
