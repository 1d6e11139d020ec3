#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "raylearn/nn.hpp"
#include "raylearn/scene.hpp"
#include "raylearn/vec3.hpp"

namespace raylearn {

// Equal-area octahedral mapping between the unit square and the sphere.
// Every axis-aligned square cell covers the same solid angle.
Vec3 equal_area_square_to_sphere(double u, double v);
void equal_area_sphere_to_square(const Vec3& dir, double& u, double& v);

// Tabular incident-value field: uniform spatial cells over a bounding box,
// each holding an equal-area directional histogram with running-average
// visit counts.
class QGrid {
 public:
  QGrid(const Vec3& bounds_min, const Vec3& bounds_max, int spatial_res = 16,
        int directional_res = 8);

  int spatial_res() const { return res_; }
  int directional_res() const { return dir_res_; }
  int cell_count() const { return res_ * res_ * res_; }
  int bin_count() const { return dir_res_ * dir_res_; }
  double bin_solid_angle() const { return 4.0 * kPi / bin_count(); }

  int cell_index(const Vec3& position) const;  // floor with clamp to the box
  int bin_index(const Vec3& direction) const;
  Vec3 bin_center_direction(int bin) const;
  // Direction uniform over bin `bin` as (a0, a1) sweep its square cell.
  Vec3 bin_direction(int bin, double a0, double a1) const;

  double value(int cell, int bin) const { return q_[slot(cell, bin)]; }
  uint32_t visits(int cell, int bin) const { return visits_[slot(cell, bin)]; }
  void set_value(int cell, int bin, double q);

  // 1 / (1 + visits): the exact running-average step size.
  double running_average_alpha(int cell, int bin) const {
    return 1.0 / (1.0 + visits_[slot(cell, bin)]);
  }

  uint64_t total_updates() const { return total_updates_; }

  const Vec3& bounds_min() const { return bmin_; }
  const Vec3& bounds_max() const { return bmax_; }

  // CSV-ish dump: cell, bin, q, visits (nonzero entries only).
  void dump(std::ostream& os) const;

 private:
  friend double q_update(QGrid&, const Vec3&, const Vec3&, double,
                         std::span<const struct QScatterSample>, double);
  size_t slot(int cell, int bin) const { return size_t(cell) * bin_count() + bin; }

  Vec3 bmin_, bmax_, inv_extent_;
  int res_, dir_res_;
  std::vector<double> q_;
  std::vector<uint32_t> visits_;
  uint64_t total_updates_ = 0;
};

// One hemisphere sample of the transported term at the hit point y:
// weight = f_s * cos(theta_i) / pdf(w_i), q = current estimate of the
// incident value at y from w_i.
struct QScatterSample {
  Vec3 wi;
  double weight = 0;
  double q = 0;
};

// Blends the stored value toward le_luminance + mean(weight * q):
// new = (1 - alpha) * old + alpha * target. Returns the new value and
// advances the visit count of the touched bin.
double q_update(QGrid& grid, const Vec3& x, const Vec3& omega, double le_luminance,
                std::span<const QScatterSample> samples, double alpha);

struct GuidedSample {
  Vec3 wi;
  double pdf = 0;
  bool cosine_fallback = false;  // cell had no usable mass
};

// Draws a scatter direction from the mixture
//   epsilon * cosine-weighted + (1 - epsilon) * bin-proportional-to-Q,
// where Q bins are masked to those whose center lies above the shading
// horizon. Bins straddling the horizon keep their full solid angle, so a
// draw can land just below the surface; callers see it vanish through the
// zero BSDF. epsilon >= 1 short-circuits to plain cosine sampling with the
// same two variates.
GuidedSample guided_scatter_direction(const QGrid& grid, const ShadingPoint& sp,
                                      double epsilon, double u0, double u1);

// Density of guided_scatter_direction at wi (solid-angle measure).
double guided_pdf(const QGrid& grid, const ShadingPoint& sp, double epsilon, const Vec3& wi);

// Neural stand-in for the tabular field: 9 inputs (box-normalized position,
// normal, direction), one identity output clamped to >= 0 on evaluation.
struct QNetwork {
  TinyMlp mlp;
  Vec3 bounds_min;
  Vec3 inv_extent;

  void encode(const Vec3& x, const Vec3& n, const Vec3& w, double out[9]) const;
  double eval(const Vec3& x, const Vec3& n, const Vec3& w, ForwardCache& cache) const;
};

QNetwork make_q_network(const Vec3& bounds_min, const Vec3& bounds_max,
                        const std::vector<int>& hidden = {64, 64}, uint64_t seed = 0);

struct Residual {
  double target = 0;  // le_luminance + weight * frozen(y, wi)
  double delta = 0;   // live(x, omega) - target
};

// Semi-gradient residual at one transport transition: the target is
// evaluated on a frozen snapshot so gradients flow only through the live
// network's value at (x, omega).
Residual residual_target(const QNetwork& live, const QNetwork& frozen, const Scene& scene,
                         const ShadingPoint& x, const Vec3& omega, const ShadingPoint& y,
                         const Vec3& wi, double weight, ForwardCache& cache);

struct QTrainConfig {
  uint64_t budget_paths = 100000;
  int width = 64, height = 64;     // pixel domain the paths start from
  int max_path_length = 6;
  double base_rate = 1e-2;         // halved per quarter of the budget
  int snapshot_interval = 64;      // gradient steps between target refreshes
  uint64_t seed = 0;
  int trace_interval = 1000;       // paths per emitted loss-trace entry
};

struct QTrainResult {
  std::vector<double> loss_trace;  // mean squared residual per window
  uint64_t steps = 0;
};

// Streams camera paths through the scene once each, taking one squared-
// residual gradient step per interior vertex. Raises TrainingError naming
// the path index if the loss turns nonfinite.
QTrainResult train_q_network_online(QNetwork& net, const Scene& scene,
                                    const QTrainConfig& config);

}  // namespace raylearn
