#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "raylearn/vec3.hpp"

namespace raylearn {

struct Material {
  enum class Kind { kDiffuse, kGlossy };
  Kind kind = Kind::kDiffuse;
  Rgb albedo{0, 0, 0};
  double exponent = 0;  // glossy lobe sharpness
  Rgb emission{0, 0, 0};
  std::string name;

  bool emissive() const { return emission.x > 0 || emission.y > 0 || emission.z > 0; }
};

struct Ray {
  Vec3 origin;
  Vec3 direction;  // unit
  double t_min = 1e-4;
  double t_max = 1e30;
};

struct Sphere {
  Vec3 center;
  double radius = 1;
  bool inward = false;  // normals point toward the center (enclosing shells)
};

// Rectangle with constant coordinate `coord` along `axis`; extents span the
// other two axes in cyclic order u=(axis+1)%3, v=(axis+2)%3.
struct AxisQuad {
  int axis = 1;
  double coord = 0;
  double u_min = 0, u_max = 1;
  double v_min = 0, v_max = 1;
  double normal_sign = 1;  // normal = normal_sign * unit(axis)
};

struct Triangle {
  Vec3 a, b, c;
};

struct Primitive {
  std::variant<Sphere, AxisQuad, Triangle> shape;
  int material = 0;
};

struct Light {
  int primitive = -1;
  Rgb emission{0, 0, 0};
  double area = 0;
};

struct Camera {
  Vec3 position{0, 0, -1};
  Vec3 look_at{0, 0, 0};
  Vec3 up{0, 1, 0};
  double vfov_degrees = 40;

  // px in [0,w), py in [0,h); py = 0 is the top row.
  Ray generate_ray(double px, double py, int width, int height) const;
};

struct Scene {
  std::vector<Material> materials;
  std::vector<Primitive> primitives;
  std::vector<Light> lights;        // derived: one entry per emissive primitive
  std::vector<int> light_of;        // primitive -> light index or -1
  Vec3 bounds_min, bounds_max;
  Camera camera;
  std::string name;
};

struct ShadingPoint {
  Vec3 position;
  Vec3 normal;       // unit, flipped to face the ray origin
  Vec3 geom_normal;  // unit, primitive orientation (emission side)
  Vec3 wo;           // unit, toward the previous vertex
  double t = 0;
  int primitive = -1;
  int material = -1;
  bool front = false;  // geometric normal faces the ray origin
};

// Validates invariants, derives the light list and bounding box.
Scene make_scene(std::vector<Material> materials, std::vector<Primitive> primitives,
                 Camera camera, std::string name);

double primitive_area(const Primitive& prim);

// Nearest hit in [t_min, t_max], or nothing.
std::optional<ShadingPoint> intersect(const Ray& ray, const Scene& scene);

// Any-hit visibility between two surface points, both offset off their
// surfaces along the given normals.
bool visible(const Scene& scene, const Vec3& from, const Vec3& from_normal, const Vec3& to,
             const Vec3& to_normal);

// Radiance emitted at sp toward sp.wo. One-sided: only the oriented face of
// a primitive emits.
Rgb emitted_radiance(const Scene& scene, const ShadingPoint& sp);

// f_s only; callers apply the cosine. Zero below the shading horizon.
Rgb eval_bsdf(const Scene& scene, const ShadingPoint& sp, const Vec3& wi);

struct ScatterSample {
  Vec3 wi;
  double pdf = 0;
  Rgb f{0, 0, 0};
};

// Importance samples the material lobe (cosine for diffuse, mirror-centered
// power lobe for glossy). pdf is with respect to solid angle.
ScatterSample sample_bsdf(const Scene& scene, const ShadingPoint& sp, double u0, double u1);

// Solid-angle density that sample_bsdf would produce wi with; used by the
// guided mixture.
double bsdf_pdf(const Scene& scene, const ShadingPoint& sp, const Vec3& wi);

struct LightSample {
  Vec3 position;
  Vec3 normal;  // oriented emission side
  double pdf_area = 0;
};

// Uniform point on light i; pdf is 1/area.
LightSample sample_light_point(const Scene& scene, int light_index, double u0, double u1);

struct SurfacePoint {
  Vec3 position;
  Vec3 normal;  // oriented side of the primitive
};

// Uniform point on one primitive's surface.
SurfacePoint sample_surface_point(const Scene& scene, int primitive_index, double u0, double u1);

// Cumulative surface area over primitives [0, i]; drives area-uniform
// sampling across the whole scene.
std::vector<double> cumulative_primitive_areas(const Scene& scene);

// Ray leaving a surface, origin offset 1e-4 along the geometric normal on
// the side of `direction`.
Ray spawn_ray(const ShadingPoint& sp, const Vec3& direction);

}  // namespace raylearn
