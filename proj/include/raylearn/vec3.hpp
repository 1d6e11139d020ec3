#pragma once

#include <cmath>
#include <ostream>

#include "raylearn/common.hpp"

namespace raylearn {

struct Vec3 {
  double x = 0, y = 0, z = 0;

  constexpr Vec3() = default;
  constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}
  explicit constexpr Vec3(double s) : x(s), y(s), z(s) {}

  constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator*(const Vec3& o) const { return {x * o.x, y * o.y, z * o.z}; }
  constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  constexpr Vec3 operator-() const { return {-x, -y, -z}; }

  Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
  Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }

  constexpr bool operator==(const Vec3& o) const { return x == o.x && y == o.y && z == o.z; }

  double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
  double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }

  constexpr double max_component() const { return x > y ? (x > z ? x : z) : (y > z ? y : z); }
};

using Rgb = Vec3;

inline constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }

inline constexpr double dot(const Vec3& a, const Vec3& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}

inline constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double length_squared(const Vec3& v) { return dot(v, v); }
inline double length(const Vec3& v) { return std::sqrt(dot(v, v)); }

inline Vec3 normalize(const Vec3& v) {
  double len = length(v);
  return v / len;
}

inline bool is_finite(const Vec3& v) {
  return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

// Rec.709 luminance of linear RGB.
inline double luminance(const Rgb& c) {
  return 0.2126 * c.x + 0.7152 * c.y + 0.0722 * c.z;
}

// Mirror reflection of w about n; w and the result point away from the surface.
inline Vec3 reflect_about(const Vec3& w, const Vec3& n) {
  return 2.0 * dot(w, n) * n - w;
}

inline std::ostream& operator<<(std::ostream& os, const Vec3& v) {
  return os << "(" << v.x << ", " << v.y << ", " << v.z << ")";
}

// Right-handed orthonormal basis around a unit normal (Duff et al. branchless form).
struct Onb {
  Vec3 t, b, n;

  explicit Onb(const Vec3& normal) : n(normal) {
    double sign = std::copysign(1.0, n.z);
    double a = -1.0 / (sign + n.z);
    double bxy = n.x * n.y * a;
    t = Vec3{1.0 + sign * n.x * n.x * a, sign * bxy, -sign * n.x};
    b = Vec3{bxy, sign + n.y * n.y * a, -n.y};
  }

  Vec3 to_world(const Vec3& local) const { return local.x * t + local.y * b + local.z * n; }
  Vec3 to_local(const Vec3& w) const { return {dot(w, t), dot(w, b), dot(w, n)}; }
};

// Cosine-weighted hemisphere direction around n; pdf = cos(theta) / pi.
inline Vec3 sample_cosine_hemisphere(const Vec3& n, double u0, double u1) {
  double r = std::sqrt(u0);
  double phi = kTwoPi * u1;
  double lz = std::sqrt(std::max(0.0, 1.0 - u0));
  return Onb(n).to_world({r * std::cos(phi), r * std::sin(phi), lz});
}

// Uniform direction on the unit sphere.
inline Vec3 sample_uniform_sphere(double u0, double u1) {
  double z = 1.0 - 2.0 * u0;
  double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  double phi = kTwoPi * u1;
  return {r * std::cos(phi), r * std::sin(phi), z};
}

}  // namespace raylearn
