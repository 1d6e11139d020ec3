#include "raylearn/qgrid.hpp"

#include <algorithm>
#include <cmath>

#include "raylearn/sampler.hpp"

namespace raylearn {

Vec3 equal_area_square_to_sphere(double u, double v) {
  require(u >= 0 && u <= 1 && v >= 0 && v <= 1, "square_to_sphere: input off the unit square");
  double up = 2 * u - 1, vp = 2 * v - 1;
  double au = std::abs(up), av = std::abs(vp);
  double sd = 1 - (au + av);  // signed distance to the diagonal
  double d = std::abs(sd);
  double r = 1 - d;
  double phi = (r == 0 ? 1 : (av - au) / r + 1) * kPi / 4;
  double z = std::copysign(1 - r * r, sd);
  double s = r * std::sqrt(2 - r * r);
  return {std::copysign(std::cos(phi), up) * s, std::copysign(std::sin(phi), vp) * s, z};
}

void equal_area_sphere_to_square(const Vec3& dir, double& u, double& v) {
  double ax = std::abs(dir.x), ay = std::abs(dir.y), az = std::abs(dir.z);
  double r = std::sqrt(std::max(0.0, 1.0 - az));
  double phi = (ax == 0 && ay == 0) ? 0.0 : std::atan2(ay, ax);  // [0, pi/2]
  double t = phi * (2.0 / kPi);
  double au, av;
  if (dir.z >= 0) {
    au = r * (1 - t);
    av = r * t;
  } else {
    au = 1 - r * t;
    av = 1 - r * (1 - t);
  }
  double up = std::copysign(au, dir.x);
  double vp = std::copysign(av, dir.y);
  u = std::clamp((up + 1) * 0.5, 0.0, 1.0);
  v = std::clamp((vp + 1) * 0.5, 0.0, 1.0);
}

QGrid::QGrid(const Vec3& bounds_min, const Vec3& bounds_max, int spatial_res,
             int directional_res)
    : bmin_(bounds_min), bmax_(bounds_max), res_(spatial_res), dir_res_(directional_res) {
  require(spatial_res > 0 && directional_res > 0, "qgrid: resolutions must be positive");
  for (int i = 0; i < 3; ++i) {
    require(bmax_[i] >= bmin_[i], "qgrid: inverted bounds");
    inv_extent_[i] = 1.0 / std::max(bmax_[i] - bmin_[i], 1e-9);
  }
  q_.assign(size_t(cell_count()) * bin_count(), 0.0);
  visits_.assign(q_.size(), 0);
}

int QGrid::cell_index(const Vec3& position) const {
  int ix[3];
  for (int i = 0; i < 3; ++i) {
    double t = (position[i] - bmin_[i]) * inv_extent_[i];
    ix[i] = std::clamp(int(t * res_), 0, res_ - 1);
  }
  return (ix[2] * res_ + ix[1]) * res_ + ix[0];
}

int QGrid::bin_index(const Vec3& direction) const {
  double u, v;
  equal_area_sphere_to_square(direction, u, v);
  int iu = std::clamp(int(u * dir_res_), 0, dir_res_ - 1);
  int iv = std::clamp(int(v * dir_res_), 0, dir_res_ - 1);
  return iv * dir_res_ + iu;
}

Vec3 QGrid::bin_center_direction(int bin) const { return bin_direction(bin, 0.5, 0.5); }

Vec3 QGrid::bin_direction(int bin, double a0, double a1) const {
  require(bin >= 0 && bin < bin_count(), "qgrid: bin out of range");
  int iu = bin % dir_res_, iv = bin / dir_res_;
  return equal_area_square_to_sphere((iu + a0) / dir_res_, (iv + a1) / dir_res_);
}

void QGrid::set_value(int cell, int bin, double q) {
  require(cell >= 0 && cell < cell_count() && bin >= 0 && bin < bin_count(),
          "qgrid: slot out of range");
  require(q >= 0 && std::isfinite(q), "qgrid: value must be finite and nonnegative");
  q_[slot(cell, bin)] = q;
}

void QGrid::dump(std::ostream& os) const {
  os << "cell,bin,q,visits\n";
  for (int cell = 0; cell < cell_count(); ++cell)
    for (int bin = 0; bin < bin_count(); ++bin) {
      size_t s = slot(cell, bin);
      if (q_[s] != 0 || visits_[s] != 0)
        os << cell << "," << bin << "," << q_[s] << "," << visits_[s] << "\n";
    }
}

double q_update(QGrid& grid, const Vec3& x, const Vec3& omega, double le_luminance,
                std::span<const QScatterSample> samples, double alpha) {
  require(alpha >= 0 && alpha <= 1, "q_update: alpha must be in [0,1]");
  require(le_luminance >= 0 && std::isfinite(le_luminance),
          "q_update: emission luminance must be finite and nonnegative");
  double estimate = 0;
  for (const QScatterSample& s : samples) {
    require(s.weight >= 0 && s.q >= 0 && std::isfinite(s.weight * s.q),
            "q_update: bad scatter sample");
    estimate += s.weight * s.q;
  }
  if (!samples.empty()) estimate /= double(samples.size());

  size_t slot = grid.slot(grid.cell_index(x), grid.bin_index(omega));
  double updated = (1 - alpha) * grid.q_[slot] + alpha * (le_luminance + estimate);
  grid.q_[slot] = updated;
  ++grid.visits_[slot];
  ++grid.total_updates_;
  return updated;
}

GuidedSample guided_scatter_direction(const QGrid& grid, const ShadingPoint& sp,
                                      double epsilon, double u0, double u1) {
  require(epsilon >= 0, "guided_scatter_direction: epsilon must be nonnegative");
  GuidedSample out;
  if (epsilon >= 1) {
    out.wi = sample_cosine_hemisphere(sp.normal, u0, u1);
    out.pdf = std::max(0.0, dot(sp.normal, out.wi)) * kInvPi;
    return out;
  }

  const int cell = grid.cell_index(sp.position);
  const int bins = grid.bin_count();
  double total = 0;
  for (int b = 0; b < bins; ++b)
    if (dot(grid.bin_center_direction(b), sp.normal) > 0) total += grid.value(cell, b);

  if (total <= 0) {
    out.wi = sample_cosine_hemisphere(sp.normal, u0, u1);
    out.pdf = std::max(0.0, dot(sp.normal, out.wi)) * kInvPi;
    out.cosine_fallback = true;
    return out;
  }

  if (u0 < epsilon) {
    out.wi = sample_cosine_hemisphere(sp.normal, u0 / epsilon, u1);
  } else {
    // Reuse the bin-selection remainder as the first in-bin coordinate.
    double target = (u0 - epsilon) / (1 - epsilon) * total;
    double cum = 0;
    int chosen = -1;
    double remainder = 0;
    for (int b = 0; b < bins; ++b) {
      if (dot(grid.bin_center_direction(b), sp.normal) <= 0) continue;
      double q = grid.value(cell, b);
      if (q <= 0) continue;
      if (target < cum + q || b == bins - 1) {
        chosen = b;
        remainder = std::clamp((target - cum) / q, 0.0, 1.0 - 1e-12);
        break;
      }
      cum += q;
    }
    if (chosen < 0) {  // ran off the end on roundoff: take the last massive bin
      for (int b = bins - 1; b >= 0; --b)
        if (grid.value(cell, b) > 0 && dot(grid.bin_center_direction(b), sp.normal) > 0) {
          chosen = b;
          remainder = 0.5;
          break;
        }
    }
    out.wi = grid.bin_direction(chosen, remainder, u1);
  }
  out.pdf = guided_pdf(grid, sp, epsilon, out.wi);
  return out;
}

double guided_pdf(const QGrid& grid, const ShadingPoint& sp, double epsilon, const Vec3& wi) {
  double cos_pdf = std::max(0.0, dot(sp.normal, wi)) * kInvPi;
  if (epsilon >= 1) return cos_pdf;

  const int cell = grid.cell_index(sp.position);
  const int bins = grid.bin_count();
  double total = 0;
  for (int b = 0; b < bins; ++b)
    if (dot(grid.bin_center_direction(b), sp.normal) > 0) total += grid.value(cell, b);
  if (total <= 0) return cos_pdf;

  int bin = grid.bin_index(wi);
  double grid_pdf = 0;
  if (dot(grid.bin_center_direction(bin), sp.normal) > 0)
    grid_pdf = grid.value(cell, bin) / total / grid.bin_solid_angle();
  return epsilon * cos_pdf + (1 - epsilon) * grid_pdf;
}

void QNetwork::encode(const Vec3& x, const Vec3& n, const Vec3& w, double out[9]) const {
  for (int i = 0; i < 3; ++i) out[i] = (x[i] - bounds_min[i]) * inv_extent[i];
  out[3] = n.x;
  out[4] = n.y;
  out[5] = n.z;
  out[6] = w.x;
  out[7] = w.y;
  out[8] = w.z;
}

double QNetwork::eval(const Vec3& x, const Vec3& n, const Vec3& w, ForwardCache& cache) const {
  double in[9];
  encode(x, n, w, in);
  return std::max(0.0, forward(mlp, std::span<const double>(in, 9), cache)[0]);
}

QNetwork make_q_network(const Vec3& bounds_min, const Vec3& bounds_max,
                        const std::vector<int>& hidden, uint64_t seed) {
  std::vector<int> sizes{9};
  std::vector<Activation> acts;
  for (int h : hidden) {
    sizes.push_back(h);
    acts.push_back(Activation::kRelu);
  }
  sizes.push_back(1);
  acts.push_back(Activation::kIdentity);

  QNetwork net;
  net.mlp = make_mlp(sizes, acts, seed);
  net.bounds_min = bounds_min;
  for (int i = 0; i < 3; ++i)
    net.inv_extent[i] = 1.0 / std::max(bounds_max[i] - bounds_min[i], 1e-9);
  return net;
}

Residual residual_target(const QNetwork& live, const QNetwork& frozen, const Scene& scene,
                         const ShadingPoint& x, const Vec3& omega, const ShadingPoint& y,
                         const Vec3& wi, double weight, ForwardCache& cache) {
  double le = luminance(emitted_radiance(scene, y));
  double target = le + weight * frozen.eval(y.position, y.normal, wi, cache);
  // The live side keeps its raw (unclamped) value: the squared-residual
  // gradient must not die when the network dips below zero.
  double in[9];
  live.encode(x.position, x.normal, omega, in);
  double raw = forward(live.mlp, std::span<const double>(in, 9), cache)[0];
  return Residual{target, raw - target};
}

QTrainResult train_q_network_online(QNetwork& net, const Scene& scene,
                                    const QTrainConfig& config) {
  require(config.budget_paths > 0, "train_q_network_online: budget must be positive");
  QNetwork frozen = net;
  ForwardCache live_cache, frozen_cache;
  Gradients grads;
  grads.resize_for(net.mlp);
  QTrainResult result;

  double window_sum = 0;
  uint64_t window_count = 0;

  for (uint64_t path = 0; path < config.budget_paths; ++path) {
    const uint64_t index = stream_index(config.seed, kPurposeQTrain, path);
    double px = halton_point(index, 0) * config.width;
    double py = halton_point(index, 1) * config.height;
    Ray ray = scene.camera.generate_ray(px, py, config.width, config.height);

    ShadingPoint prev;
    Vec3 prev_dir;
    bool have_prev = false;
    double rate = scheduled_rate(config.base_rate, path, config.budget_paths);

    for (int vertex = 1; vertex <= config.max_path_length - 1; ++vertex) {
      auto sp = intersect(ray, scene);
      if (!sp) break;

      // One lobe sample at this vertex: both the transported-term estimate
      // for the transition that arrived here and the continuation direction.
      double s0 = halton_point(index, 2 * vertex);
      double s1 = halton_point(index, 2 * vertex + 1);
      ScatterSample scatter = sample_bsdf(scene, *sp, s0, s1);
      double cos_i = dot(sp->normal, scatter.wi);
      double weight =
          scatter.pdf > 0 && cos_i > 0 ? luminance(scatter.f) * cos_i / scatter.pdf : 0.0;

      if (have_prev) {
        Residual res = residual_target(net, frozen, scene, prev, prev_dir, *sp, scatter.wi,
                                       weight, frozen_cache);
        if (!std::isfinite(res.delta))
          throw TrainingError("train_q_network_online: nonfinite residual at path " +
                              std::to_string(path));
        double in[9];
        net.encode(prev.position, prev.normal, prev_dir, in);
        forward(net.mlp, std::span<const double>(in, 9), live_cache);
        grads.clear();
        double out_grad[1] = {2.0 * res.delta};
        backward(net.mlp, live_cache, std::span<const double>(out_grad, 1), grads);
        try {
          sgd_step(net.mlp, grads, rate);
        } catch (const TrainingError& e) {
          throw TrainingError(std::string(e.what()) + " at path " + std::to_string(path));
        }
        window_sum += res.delta * res.delta;
        ++window_count;
        ++result.steps;
        if (config.snapshot_interval > 0 &&
            result.steps % uint64_t(config.snapshot_interval) == 0)
          frozen = net;
      }

      if (weight <= 0) break;
      prev = *sp;
      prev_dir = scatter.wi;
      have_prev = true;
      ray = spawn_ray(*sp, scatter.wi);
    }

    if ((path + 1) % uint64_t(config.trace_interval) == 0) {
      result.loss_trace.push_back(window_count ? window_sum / double(window_count) : 0.0);
      window_sum = 0;
      window_count = 0;
    }
  }
  return result;
}

}  // namespace raylearn
