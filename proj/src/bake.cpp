#include "raylearn/bake.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <span>
#include <vector>

#include "raylearn/nee.hpp"
#include "raylearn/parallel.hpp"
#include "raylearn/sampler.hpp"

namespace raylearn {

namespace {

// Viewer rays start this far off the surface so the first hit lands back on
// the sampled point, clear of the intersector's own t_min.
constexpr double kViewerOffset = 3e-4;

const std::vector<int> kVoxelNetShape = {9, 9, 3};

void encode_bake_input(const VoxelNetGrid& grid, int voxel, const Vec3& position,
                       const Vec3& normal, const Vec3& direction, double out[9]) {
  const Vec3 local = grid.local_position(voxel, position);
  out[0] = local.x;
  out[1] = local.y;
  out[2] = local.z;
  out[3] = normal.x;
  out[4] = normal.y;
  out[5] = normal.z;
  out[6] = direction.x;
  out[7] = direction.y;
  out[8] = direction.z;
}

Vec3 sample_uniform_hemisphere(const Vec3& normal, double u0, double u1) {
  Vec3 dir = sample_uniform_sphere(u0, u1);
  const double c = dot(dir, normal);
  if (c < 0) return -dir;
  if (c == 0) return normal;  // measure-zero grazing draw
  return dir;
}

// Solves A x = b in place for a symmetric positive definite A (row-major,
// n x n) against `rhs` columns. Returns false if a pivot degenerates.
bool cholesky_solve(std::vector<double>& a, int n, std::vector<double>& rhs, int cols) {
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      double sum = a[size_t(i) * n + j];
      for (int k = 0; k < i; ++k) sum -= a[size_t(i) * n + k] * a[size_t(j) * n + k];
      if (i == j) {
        if (sum <= 0) return false;
        a[size_t(i) * n + i] = std::sqrt(sum);
      } else {
        a[size_t(j) * n + i] = sum / a[size_t(i) * n + i];
      }
    }
  }
  for (int c = 0; c < cols; ++c) {
    for (int i = 0; i < n; ++i) {
      double sum = rhs[size_t(i) * cols + c];
      for (int k = 0; k < i; ++k) sum -= a[size_t(i) * n + k] * rhs[size_t(k) * cols + c];
      rhs[size_t(i) * cols + c] = sum / a[size_t(i) * n + i];
    }
    for (int i = n - 1; i >= 0; --i) {
      double sum = rhs[size_t(i) * cols + c];
      for (int k = i + 1; k < n; ++k) sum -= a[size_t(k) * n + i] * rhs[size_t(k) * cols + c];
      rhs[size_t(i) * cols + c] = sum / a[size_t(i) * n + i];
    }
  }
  return true;
}

}  // namespace

VoxelNetGrid::VoxelNetGrid(const Vec3& bounds_min, const Vec3& bounds_max, int resolution,
                           uint64_t seed) {
  require(resolution > 0, "voxel grid: resolution must be positive");
  require(is_finite(bounds_min) && is_finite(bounds_max), "voxel grid: bounds must be finite");
  bmin_ = bounds_min;
  bmax_ = bounds_max;
  for (int a = 0; a < 3; ++a) {
    require(bmax_[a] >= bmin_[a], "voxel grid: bounds must be ordered");
    if (bmax_[a] - bmin_[a] < 1e-9) {  // flat scenes still need a thickness
      bmin_[a] -= 0.5;
      bmax_[a] += 0.5;
    }
  }
  res_ = resolution;
  voxel_size_ = (bmax_ - bmin_) / double(res_);
  const int n = voxel_count();
  nets_.reserve(size_t(n));
  for (int v = 0; v < n; ++v) {
    nets_.push_back(make_mlp(kVoxelNetShape, {Activation::kRelu, Activation::kIdentity},
                             hash_u64(seed) + uint64_t(v)));
  }
  samples_.resize(size_t(n));
  trained_.assign(size_t(n), 0);
}

int VoxelNetGrid::voxel_index(const Vec3& position) const {
  require(res_ > 0, "voxel grid: not initialized");
  int idx[3];
  for (int a = 0; a < 3; ++a) {
    int i = int(std::floor((position[a] - bmin_[a]) / voxel_size_[a]));
    idx[a] = std::clamp(i, 0, res_ - 1);
  }
  return (idx[2] * res_ + idx[1]) * res_ + idx[0];
}

Vec3 VoxelNetGrid::voxel_center(int voxel) const {
  require(voxel >= 0 && voxel < voxel_count(), "voxel grid: voxel out of range");
  const int ix = voxel % res_;
  const int iy = (voxel / res_) % res_;
  const int iz = voxel / (res_ * res_);
  return bmin_ + Vec3{(ix + 0.5) * voxel_size_.x, (iy + 0.5) * voxel_size_.y,
                      (iz + 0.5) * voxel_size_.z};
}

Vec3 VoxelNetGrid::local_position(int voxel, const Vec3& position) const {
  require(voxel >= 0 && voxel < voxel_count(), "voxel grid: voxel out of range");
  const int ix = voxel % res_;
  const int iy = (voxel / res_) % res_;
  const int iz = voxel / (res_ * res_);
  const Vec3 corner = bmin_ + Vec3{ix * voxel_size_.x, iy * voxel_size_.y, iz * voxel_size_.z};
  const Vec3 offset = position - corner;
  return Vec3{std::clamp(offset.x / voxel_size_.x, 0.0, 1.0),
              std::clamp(offset.y / voxel_size_.y, 0.0, 1.0),
              std::clamp(offset.z / voxel_size_.z, 0.0, 1.0)};
}

int VoxelNetGrid::trained_count() const {
  int n = 0;
  for (uint8_t t : trained_) n += t != 0;
  return n;
}

void VoxelNetGrid::mark_trained(int voxel) {
  require(voxel >= 0 && voxel < voxel_count(), "voxel grid: voxel out of range");
  trained_[size_t(voxel)] = 1;
}

int VoxelNetGrid::active_net(int voxel) const {
  require(voxel >= 0 && voxel < voxel_count(), "voxel grid: voxel out of range");
  if (trained_[size_t(voxel)]) return voxel;
  const Vec3 center = voxel_center(voxel);
  int best = -1;
  double best_d2 = 0;
  for (int v = 0; v < voxel_count(); ++v) {
    if (!trained_[size_t(v)]) continue;
    const Vec3 d = voxel_center(v) - center;
    const double d2 = dot(d, d);
    if (best < 0 || d2 < best_d2) {
      best = v;
      best_d2 = d2;
    }
  }
  require(best >= 0, "voxel grid: no trained voxel to answer queries");
  return best;
}

void generate_training_data(const Scene& scene, VoxelNetGrid& grid, const BakeConfig& config) {
  require(config.point_count > 0 && config.rays_per_point > 0,
          "bake: point and ray counts must be positive");
  require(config.max_path_length >= 1, "bake: path length must be positive");

  const std::vector<double> areas = cumulative_primitive_areas(scene);
  const double total_area = areas.back();
  require(total_area > 0, "bake: scene has no surface area");

  // Points first: primitive by area, then uniform on it. Every sample of a
  // point lands in the point's voxel, so per-voxel slices can be carved out
  // up front and filled in parallel without contention.
  struct Point {
    SurfacePoint surface;
    int voxel = 0;
    size_t offset = 0;  // first slot inside the voxel's sample list
  };
  std::vector<Point> points(size_t(config.point_count));
  std::vector<size_t> voxel_counts(size_t(grid.voxel_count()), 0);
  for (int i = 0; i < config.point_count; ++i) {
    SampleStream stream(stream_index(config.seed, kPurposeBakePoints, uint64_t(i)));
    const double pick = stream.next() * total_area;
    const int prim = int(std::upper_bound(areas.begin(), areas.end(), pick) - areas.begin());
    Point& point = points[size_t(i)];
    point.surface =
        sample_surface_point(scene, std::min(prim, int(areas.size()) - 1), stream.next(),
                             stream.next());
    point.voxel = grid.voxel_index(point.surface.position);
    point.offset = voxel_counts[size_t(point.voxel)];
    voxel_counts[size_t(point.voxel)] += size_t(config.rays_per_point);
  }
  for (int v = 0; v < grid.voxel_count(); ++v) {
    std::vector<BakeSample>& list = grid.samples(v);
    const size_t base = list.size();
    list.resize(base + voxel_counts[size_t(v)]);
    for (Point& point : points) {
      if (point.voxel == v) point.offset += base;
    }
  }

  const int threads = resolve_threads(config.threads);
  parallel_for(int64_t(points.size()), threads, [&](int64_t i) {
    const Point& point = points[size_t(i)];
    std::vector<BakeSample>& list = grid.samples(point.voxel);
    for (int j = 0; j < config.rays_per_point; ++j) {
      const uint64_t index = stream_index(
          config.seed, kPurposeBakeRays,
          uint64_t(i) * uint64_t(config.rays_per_point) + uint64_t(j));
      const Vec3 dir = sample_uniform_hemisphere(point.surface.normal, halton_point(index, 0),
                                                 halton_point(index, 1));
      const Ray viewer{point.surface.position + kViewerOffset * dir, -dir};
      BakeSample sample;
      sample.position = point.surface.position;
      sample.normal = point.surface.normal;
      sample.direction = dir;
      sample.radiance = trace_path(scene, viewer, index, config.max_path_length, nullptr,
                                   0.0, nullptr);
      require(is_finite(sample.radiance) && sample.radiance.x >= 0 && sample.radiance.y >= 0 &&
                  sample.radiance.z >= 0,
              "bake: traced radiance must be finite and nonnegative");
      list[point.offset + size_t(j)] = sample;
    }
  });
}

std::vector<std::vector<double>> train_voxel_networks(VoxelNetGrid& grid,
                                                      const BakeConfig& config) {
  require(config.epochs > 0 && config.batch_size > 0 && config.rate > 0,
          "bake: training shape must be positive");
  std::vector<std::vector<double>> traces(size_t(grid.voxel_count()));

  const int threads = resolve_threads(config.threads);
  std::vector<std::string> failures(size_t(grid.voxel_count()));
  parallel_for(int64_t(grid.voxel_count()), threads, [&](int64_t v) {
    const std::vector<BakeSample>& data = grid.samples(int(v));
    if (data.empty()) return;

    std::vector<size_t> order(data.size());
    std::iota(order.begin(), order.end(), size_t(0));
    Rng rng(hash_u64(config.seed ^ (0x5eedba5eull + uint64_t(v))));

    // Targets are normalized to [0,1] per voxel so emitters (radiance ~15)
    // and dim walls train at the same gradient scale; the factor is folded
    // back into the linear output layer afterwards.
    double scale = 0;
    for (const BakeSample& s : data) {
      scale = std::max({scale, s.radiance.x, s.radiance.y, s.radiance.z});
    }
    if (scale <= 0) scale = 1;

    // Inputs are standardized per voxel. A lamp hanging 1e-3 below a ceiling
    // is separable only by that sliver of a coordinate; at raw scale the
    // feature is indistinguishable from a bias and gradient descent collapses
    // to the data mean. Whitening is folded into the first layer afterwards,
    // so the stored net still takes raw local coordinates. The deviation
    // floor caps the fold at 100x for near-constant features.
    std::vector<double> xs(data.size() * 9);
    std::vector<double> ys(data.size() * 3);
    double mean[9] = {0}, sdev[9] = {0};
    {
      double sum[9] = {0}, sumsq[9] = {0};
      for (size_t i = 0; i < data.size(); ++i) {
        const BakeSample& s = data[i];
        double* in = &xs[i * 9];
        encode_bake_input(grid, int(v), s.position, s.normal, s.direction, in);
        for (int j = 0; j < 9; ++j) {
          sum[j] += in[j];
          sumsq[j] += in[j] * in[j];
        }
        ys[i * 3 + 0] = s.radiance.x / scale;
        ys[i * 3 + 1] = s.radiance.y / scale;
        ys[i * 3 + 2] = s.radiance.z / scale;
      }
      const double n = double(data.size());
      for (int j = 0; j < 9; ++j) {
        mean[j] = sum[j] / n;
        sdev[j] = std::sqrt(std::max(0.0, sumsq[j] / n - mean[j] * mean[j]));
        sdev[j] = std::max(sdev[j], 0.01);
      }
      for (size_t i = 0; i < data.size(); ++i) {
        for (int j = 0; j < 9; ++j) xs[i * 9 + j] = (xs[i * 9 + j] - mean[j]) / sdev[j];
      }
    }

    const uint64_t steps_per_epoch =
        (data.size() + size_t(config.batch_size) - 1) / size_t(config.batch_size);
    const uint64_t budget = uint64_t(config.epochs) * steps_per_epoch;
    uint64_t step = 0;

    // Batches index straight into the flat matrices; scratch buffers live
    // across the whole voxel so the inner loop never touches the allocator.
    ForwardCache cache;
    Gradients grads;
    grads.resize_for(net);
    std::vector<double> out_grad(3);
    std::vector<double>& trace = traces[size_t(v)];
    trace.reserve(size_t(config.epochs));
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
      for (size_t i = data.size(); i > 1; --i) {
        std::swap(order[i - 1], order[rng.next_below(i)]);
      }
      double loss_sum = 0;
      size_t loss_count = 0;
      for (size_t start = 0; start < data.size(); start += size_t(config.batch_size)) {
        const size_t stop = std::min(start + size_t(config.batch_size), data.size());
        const double inv_n = 1.0 / double(stop - start);
        grads.clear();
        double batch_loss = 0;
        for (size_t k = start; k < stop; ++k) {
          const size_t row = order[k];
          const std::vector<double>& out =
              forward(net, std::span<const double>(&xs[row * 9], 9), cache);
          for (int c = 0; c < 3; ++c) {
            const double diff = out[size_t(c)] - ys[row * 3 + size_t(c)];
            batch_loss += diff * diff;
            out_grad[size_t(c)] = 2.0 * diff * inv_n;
          }
          backward(net, cache, out_grad, grads);
        }
        if (!std::isfinite(batch_loss)) {
          failures[size_t(v)] = "bake: voxel " + std::to_string(v) + ": nonfinite loss";
          return;
        }
        const double rate = scheduled_rate(config.rate, step++, budget);
        sgd_step(net, grads, rate);
        loss_sum += batch_loss;
        loss_count += stop - start;
      }
      trace.push_back(loss_sum / double(loss_count) * scale * scale);
    }

    // The output layer is linear, so once the hidden features settle it is
    // refit exactly by ridge-regularized least squares over the whole voxel.
    // Plain SGD leaves slow-decaying residuals along weak feature directions
    // (a constant target, for example, needs output weights of exactly zero).
    {
      const int h = net.layer_sizes[1];
      const int d = h + 1;  // features plus a bias column
      std::vector<double> a(size_t(d) * d, 0.0);
      std::vector<double> rhs(size_t(d) * 3, 0.0);
      ForwardCache cache;
      std::vector<double> feat(size_t(d), 1.0);
      double in[9];
      for (const BakeSample& s : data) {
        encode_bake_input(grid, int(v), s.position, s.normal, s.direction, in);
        for (int j = 0; j < 9; ++j) in[j] = (in[j] - mean[j]) / sdev[j];
        forward(net, std::span<const double>(in, 9), cache);
        for (int j = 0; j < h; ++j) feat[size_t(j)] = cache.post[1][size_t(j)];
        const double t[3] = {s.radiance.x / scale, s.radiance.y / scale, s.radiance.z / scale};
        for (int i = 0; i < d; ++i) {
          for (int j = i; j < d; ++j) a[size_t(i) * d + j] += feat[size_t(i)] * feat[size_t(j)];
          for (int c = 0; c < 3; ++c) rhs[size_t(i) * 3 + c] += feat[size_t(i)] * t[c];
        }
      }
      for (int i = 0; i < d; ++i) {
        for (int j = 0; j < i; ++j) a[size_t(i) * d + j] = a[size_t(j) * d + i];
        a[size_t(i) * d + i] += 1e-9 * double(data.size());
      }
      if (cholesky_solve(a, d, rhs, 3)) {
        for (int o = 0; o < 3; ++o) {
          for (int j = 0; j < h; ++j) {
            net.weights.back()[size_t(o) * h + j] = rhs[size_t(j) * 3 + o];
          }
          net.biases.back()[size_t(o)] = rhs[size_t(h) * 3 + o];
        }
      }
    }

    for (double& w : net.weights.back()) w *= scale;
    for (double& b : net.biases.back()) b *= scale;
    const int hidden = net.layer_sizes[1];
    for (int u = 0; u < hidden; ++u) {
      double shift = 0;
      for (int j = 0; j < 9; ++j) {
        double& w = net.weights[0][size_t(u) * 9 + j];
        w /= sdev[j];
        shift += w * mean[j];
      }
      net.biases[0][size_t(u)] -= shift;
    }
    grid.mark_trained(int(v));
  });

  for (const std::string& f : failures) {
    if (!f.empty()) throw TrainingError(f);
  }
  return traces;
}

Rgb eval_baked_radiance(const VoxelNetGrid& grid, const Vec3& position, const Vec3& normal,
                        const Vec3& direction, ForwardCache& cache) {
  const int voxel = grid.voxel_index(position);
  const int source = grid.active_net(voxel);
  double in[9];
  // Local coordinates always come from the queried voxel, even when a
  // fallback net answers; the fallback is a best-effort stand-in, not a
  // different parameterization.
  encode_bake_input(grid, voxel, position, normal, direction, in);
  const std::vector<double>& out = forward(grid.net(source), std::span<const double>(in, 9),
                                           cache);
  return Rgb{std::max(0.0, out[0]), std::max(0.0, out[1]), std::max(0.0, out[2])};
}

ImageBuffer render_baked(const Scene& scene, const VoxelNetGrid& grid,
                         const ExperimentConfig& config) {
  validate(config);
  require(grid.trained_count() > 0, "render_baked: grid has no trained voxel");

  ImageBuffer image(config.width, config.height);
  const std::vector<Tile> tiles = make_tiles(config.width, config.height, config.tile_size);
  const uint64_t npix = uint64_t(config.width) * uint64_t(config.height);
  const int threads = resolve_threads(config.threads);
  std::vector<ForwardCache> caches(size_t(std::max(threads, 1)));

  parallel_for(int64_t(tiles.size()), threads, [&](int64_t t) {
    ForwardCache& cache = caches[size_t(worker_index())];
    const Tile& tile = tiles[size_t(t)];
    for (int y = tile.y0; y < tile.y1; ++y) {
      for (int x = tile.x0; x < tile.x1; ++x) {
        const uint64_t pixel = uint64_t(y) * uint64_t(config.width) + uint64_t(x);
        for (int s = 0; s < config.spp; ++s) {
          const uint64_t index =
              stream_index(config.seed, kPurposeRender, uint64_t(s) * npix + pixel);
          const double px = x + halton_point(index, 0);
          const double py = y + halton_point(index, 1);
          const Ray ray = scene.camera.generate_ray(px, py, config.width, config.height);
          if (auto hit = intersect(ray, scene)) {
            image.add(x, y,
                      eval_baked_radiance(grid, hit->position, hit->normal, hit->wo, cache));
          } else {
            image.add(x, y, Rgb{0, 0, 0});
          }
        }
      }
    }
  });
  return image;
}

void save_baked_grid(const VoxelNetGrid& grid, const std::string& path) {
  require(grid.voxel_count() > 0, "save_baked_grid: grid not initialized");
  std::vector<uint8_t> blob;
  blob.insert(blob.end(), {'R', 'L', 'B', 'G', 1});
  const int32_t res = grid.resolution();
  const uint8_t* p = reinterpret_cast<const uint8_t*>(&res);
  blob.insert(blob.end(), p, p + sizeof res);
  const double bounds[6] = {grid.bounds_min().x, grid.bounds_min().y, grid.bounds_min().z,
                            grid.bounds_max().x, grid.bounds_max().y, grid.bounds_max().z};
  p = reinterpret_cast<const uint8_t*>(bounds);
  blob.insert(blob.end(), p, p + sizeof bounds);
  for (int v = 0; v < grid.voxel_count(); ++v) {
    blob.push_back(grid.trained(v) ? 1 : 0);
  }
  for (int v = 0; v < grid.voxel_count(); ++v) {
    if (grid.trained(v)) append_network_blob(grid.net(v), blob);
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("save_baked_grid: cannot open " + path);
  out.write(reinterpret_cast<const char*>(blob.data()), std::streamsize(blob.size()));
  if (!out) throw IoError("save_baked_grid: write failed for " + path);
}

VoxelNetGrid load_baked_grid(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("load_baked_grid: cannot open " + path);
  std::vector<uint8_t> blob((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
  const uint8_t* cursor = blob.data();
  const uint8_t* end = cursor + blob.size();

  auto need = [&](size_t n) {
    if (size_t(end - cursor) < n) throw IoError("load_baked_grid: truncated file " + path);
  };
  need(5);
  if (std::memcmp(cursor, "RLBG\x01", 5) != 0) {
    throw IoError("load_baked_grid: bad header in " + path);
  }
  cursor += 5;

  int32_t res = 0;
  need(sizeof res);
  std::memcpy(&res, cursor, sizeof res);
  cursor += sizeof res;
  if (res <= 0 || res > 64) throw IoError("load_baked_grid: unreasonable resolution");

  double bounds[6];
  need(sizeof bounds);
  std::memcpy(bounds, cursor, sizeof bounds);
  cursor += sizeof bounds;
  const Vec3 bmin{bounds[0], bounds[1], bounds[2]};
  const Vec3 bmax{bounds[3], bounds[4], bounds[5]};
  if (!is_finite(bmin) || !is_finite(bmax)) throw IoError("load_baked_grid: nonfinite bounds");

  VoxelNetGrid grid(bmin, bmax, res, 0);
  const int n = grid.voxel_count();
  need(size_t(n));
  std::vector<uint8_t> flags(cursor, cursor + n);
  cursor += n;
  try {
    for (int v = 0; v < n; ++v) {
      if (!flags[size_t(v)]) continue;
      grid.net(v) = read_network_blob(cursor, end);
      if (grid.net(v).layer_sizes != kVoxelNetShape) {
        throw IoError("load_baked_grid: voxel net has the wrong shape");
      }
      grid.mark_trained(v);
    }
  } catch (const ContractViolation& e) {
    throw IoError(std::string("load_baked_grid: ") + e.what());
  }
  return grid;
}

TinyMlp train_visibility_net(const Scene& scene, int sample_count, int epochs, double rate,
                             uint64_t seed) {
  require(sample_count > 0 && epochs > 0 && rate > 0,
          "visibility net: sample count, epochs, and rate must be positive");
  const int nlights = int(scene.lights.size());
  require(nlights > 0, "visibility net: scene has no lights");

  const std::vector<double> areas = cumulative_primitive_areas(scene);
  const double total_area = areas.back();
  require(total_area > 0, "visibility net: scene has no surface area");

  // Each surface point becomes one soft-target example: every light's
  // next-event contribution is evaluated outright, and the normalized
  // contributions are the selection distribution the net should match. The
  // cross entropy against soft targets decomposes into per-class NLL terms
  // weighted by the target mass.
  std::vector<TrainingSample> entries;
  entries.reserve(size_t(sample_count));
  std::vector<double> contributions(static_cast<size_t>(nlights), 0.0);
  for (int i = 0; i < sample_count; ++i) {
    SampleStream stream(stream_index(seed, kPurposeNeeEval, uint64_t(i)));
    const double pick = stream.next() * total_area;
    const int prim = std::min(
        int(std::upper_bound(areas.begin(), areas.end(), pick) - areas.begin()),
        int(areas.size()) - 1);
    const SurfacePoint point = sample_surface_point(scene, prim, stream.next(), stream.next());
    const Vec3 view = sample_uniform_hemisphere(point.normal, stream.next(), stream.next());

    ShadingPoint sp;
    sp.position = point.position;
    sp.normal = point.normal;
    sp.geom_normal = point.normal;
    sp.wo = view;
    sp.primitive = prim;
    sp.material = scene.primitives[size_t(prim)].material;
    sp.front = true;

    double total = 0;
    for (int l = 0; l < nlights; ++l) {
      const LightSample ls = sample_light_point(scene, l, stream.next(), stream.next());
      contributions[size_t(l)] = luminance(direct_light_contribution(sp, scene, l, ls));
      total += contributions[size_t(l)];
    }

    double in[9];
    encode_selection_state(scene, sp.position, sp.normal, -view, in);
    for (int l = 0; l < nlights; ++l) {
      const double target =
          total > 0 ? contributions[size_t(l)] / total : 1.0 / double(nlights);
      if (target <= 0) continue;
      TrainingSample ts;
      ts.input.assign(in, in + 9);
      ts.target_class = l;
      ts.weight = target;
      entries.push_back(std::move(ts));
    }
  }
  require(!entries.empty(), "visibility net: no training entries");

  TinyMlp net = make_selection_net(scene, seed);
  std::vector<size_t> order(entries.size());
  std::iota(order.begin(), order.end(), size_t(0));
  Rng rng(hash_u64(seed ^ 0x715b1e17ull));

  constexpr size_t kBatch = 64;
  const uint64_t steps_per_epoch = (entries.size() + kBatch - 1) / kBatch;
  const uint64_t budget = uint64_t(epochs) * steps_per_epoch;
  uint64_t step = 0;
  MiniBatch batch;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    for (size_t i = entries.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng.next_below(i)]);
    }
    for (size_t start = 0; start < entries.size(); start += kBatch) {
      const size_t stop = std::min(start + kBatch, entries.size());
      batch.clear();
      for (size_t k = start; k < stop; ++k) batch.push_back(entries[order[k]]);
      const double loss =
          train_minibatch(net, batch, LossKind::kWeightedNll, scheduled_rate(rate, step++, budget));
      if (!std::isfinite(loss)) throw TrainingError("visibility net: nonfinite loss");
    }
  }
  return net;
}

}  // namespace raylearn
