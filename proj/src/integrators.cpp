#include "raylearn/integrators.hpp"

#include <algorithm>
#include <cmath>

#include "raylearn/parallel.hpp"
#include "raylearn/sampler.hpp"

namespace raylearn {

const char* integrator_name(Integrator i) {
  switch (i) {
    case Integrator::kPtReference: return "pt-reference";
    case Integrator::kNeeUniform: return "nee-uniform";
    case Integrator::kNeeTabular: return "nee-tabular";
    case Integrator::kNeeNet: return "nee-net";
    case Integrator::kBaked: return "baked";
    case Integrator::kGuidedPt: return "guided-pt";
  }
  throw ContractViolation("integrator_name: unknown integrator");
}

Integrator integrator_from_name(const std::string& name) {
  if (name == "pt-reference") return Integrator::kPtReference;
  if (name == "nee-uniform") return Integrator::kNeeUniform;
  if (name == "nee-tabular") return Integrator::kNeeTabular;
  if (name == "nee-net") return Integrator::kNeeNet;
  if (name == "baked") return Integrator::kBaked;
  if (name == "guided-pt") return Integrator::kGuidedPt;
  throw ContractViolation(
      "unknown integrator '" + name +
      "' (expected pt-reference|nee-uniform|nee-tabular|nee-net|baked|guided-pt)");
}

void validate(const ExperimentConfig& config) {
  require(config.width > 0 && config.height > 0, "config: image dimensions must be positive");
  require(config.spp > 0, "config: spp must be positive");
  require(config.max_path_length >= 1, "config: max path length must be at least 1");
  require(config.tile_size > 0, "config: tile size must be positive");
  require(config.epsilon >= 0, "config: epsilon must be nonnegative");
  require(config.temperature > 0, "config: temperature must be positive");
  require(config.rate > 0, "config: rate must be positive");
  require(config.batches > 0, "config: batches must be positive");
}

std::vector<Tile> make_tiles(int width, int height, int tile_size) {
  require(width > 0 && height > 0 && tile_size > 0, "make_tiles: sizes must be positive");
  std::vector<Tile> tiles;
  for (int y = 0; y < height; y += tile_size) {
    for (int x = 0; x < width; x += tile_size) {
      tiles.push_back(Tile{x, y, std::min(x + tile_size, width), std::min(y + tile_size, height)});
    }
  }
  return tiles;
}

void apply_q_update(QGrid& grid, const QUpdateRecord& rec) {
  QScatterSample sample;
  std::span<const QScatterSample> samples;
  if (rec.has_continuation) {
    sample.wi = rec.wi;
    sample.weight = rec.weight;
    sample.q = grid.value(grid.cell_index(rec.y), grid.bin_index(rec.wi));
    samples = std::span<const QScatterSample>(&sample, 1);
  }
  const int cell = grid.cell_index(rec.x);
  const int bin = grid.bin_index(rec.omega);
  q_update(grid, rec.x, rec.omega, rec.le_luminance, samples,
           grid.running_average_alpha(cell, bin));
}

Rgb trace_path(const Scene& scene, const Ray& camera_ray, uint64_t sample_index,
               int max_path_length, const QGrid* grid, double epsilon,
               std::vector<QUpdateRecord>* updates) {
  require(max_path_length >= 1, "trace_path: max path length must be at least 1");
  const int nlights = int(scene.lights.size());

  Rgb radiance{0, 0, 0};
  Rgb throughput{1, 1, 1};
  std::optional<ShadingPoint> hit = intersect(camera_ray, scene);
  if (!hit) return radiance;
  radiance += emitted_radiance(scene, *hit);

  size_t pending = size_t(-1);  // queued record awaiting its continuation sample
  for (int k = 1; k <= max_path_length - 1; ++k) {
    const int base = 2 + 5 * (k - 1);
    if (nlights > 0) {
      const double u_sel = halton_point(sample_index, base);
      const int light = std::min(int(u_sel * nlights), nlights - 1);
      const LightSample ls = sample_light_point(scene, light, halton_point(sample_index, base + 1),
                                                halton_point(sample_index, base + 2));
      radiance += throughput * estimate_direct(*hit, scene, light, ls, 1.0 / nlights);
    }
    if (k > max_path_length - 2) break;

    const double u0 = halton_point(sample_index, base + 3);
    const double u1 = halton_point(sample_index, base + 4);
    const Material& material = scene.materials[size_t(hit->material)];
    Vec3 wi;
    double pdf;
    Rgb f;
    if (grid && material.kind == Material::Kind::kDiffuse) {
      const GuidedSample gs = guided_scatter_direction(*grid, *hit, epsilon, u0, u1);
      wi = gs.wi;
      pdf = gs.pdf;
      f = eval_bsdf(scene, *hit, wi);
    } else {
      const ScatterSample ss = sample_bsdf(scene, *hit, u0, u1);
      wi = ss.wi;
      pdf = ss.pdf;
      f = ss.f;
    }
    if (pdf <= 0) break;
    const double cos_i = dot(hit->normal, wi);
    if (cos_i <= 0 || (f.x == 0 && f.y == 0 && f.z == 0)) break;

    if (updates && pending != size_t(-1)) {
      QUpdateRecord& rec = (*updates)[pending];
      rec.has_continuation = true;
      rec.wi = wi;
      rec.weight = luminance(f) * cos_i / pdf;
    }

    const Ray next = spawn_ray(*hit, wi);
    const std::optional<ShadingPoint> next_hit = intersect(next, scene);
    if (!next_hit) break;
    if (updates) {
      QUpdateRecord rec;
      rec.x = hit->position;
      rec.omega = wi;
      rec.le_luminance = luminance(emitted_radiance(scene, *next_hit));
      rec.y = next_hit->position;
      updates->push_back(rec);
      pending = updates->size() - 1;
    }
    throughput = throughput * (f * (cos_i / pdf));
    hit = next_hit;  // continuation emission stays out: next-event covers it
  }
  return radiance;
}

namespace {

Ray pixel_ray(const Scene& scene, uint64_t sample_index, int px, int py, int width, int height) {
  const double jx = px + halton_point(sample_index, 0);
  const double jy = py + halton_point(sample_index, 1);
  return scene.camera.generate_ray(jx, jy, width, height);
}

}  // namespace

ImageBuffer path_trace_reference(const Scene& scene, const ExperimentConfig& config) {
  validate(config);
  ImageBuffer image(config.width, config.height);
  const std::vector<Tile> tiles = make_tiles(config.width, config.height, config.tile_size);
  const uint64_t npix = uint64_t(config.width) * config.height;
  const int threads = resolve_threads(config.threads);

  parallel_for(int64_t(tiles.size()), threads, [&](int64_t t) {
    const Tile& tile = tiles[size_t(t)];
    for (int y = tile.y0; y < tile.y1; ++y) {
      for (int x = tile.x0; x < tile.x1; ++x) {
        const uint64_t pixel = uint64_t(y) * config.width + x;
        for (int s = 0; s < config.spp; ++s) {
          const uint64_t index =
              stream_index(config.seed, kPurposeRender, uint64_t(s) * npix + pixel);
          const Ray ray = pixel_ray(scene, index, x, y, config.width, config.height);
          image.add(x, y, trace_path(scene, ray, index, config.max_path_length, nullptr,
                                     config.epsilon, nullptr));
        }
      }
    }
  });
  return image;
}

ImageBuffer path_trace_guided(const Scene& scene, const ExperimentConfig& config, QGrid& grid) {
  validate(config);
  ImageBuffer image(config.width, config.height);
  const std::vector<Tile> tiles = make_tiles(config.width, config.height, config.tile_size);
  const uint64_t npix = uint64_t(config.width) * config.height;
  const int threads = resolve_threads(config.threads);
  std::vector<std::vector<QUpdateRecord>> queues(npix);

  // Whole-image waves: one sample per pixel reads the frozen grid, then the
  // queued updates land serially in raster-pixel order. The application
  // order is canonical, so thread count and tiling never change the image
  // or the trained grid.
  for (int s = 0; s < config.spp; ++s) {
    parallel_for(int64_t(tiles.size()), threads, [&](int64_t t) {
      const Tile& tile = tiles[size_t(t)];
      for (int y = tile.y0; y < tile.y1; ++y) {
        for (int x = tile.x0; x < tile.x1; ++x) {
          const uint64_t pixel = uint64_t(y) * config.width + x;
          std::vector<QUpdateRecord>& queue = queues[pixel];
          queue.clear();
          const uint64_t index =
              stream_index(config.seed, kPurposeRender, uint64_t(s) * npix + pixel);
          const Ray ray = pixel_ray(scene, index, x, y, config.width, config.height);
          image.add(x, y, trace_path(scene, ray, index, config.max_path_length, &grid,
                                     config.epsilon, &queue));
        }
      }
    });
    for (std::vector<QUpdateRecord>& queue : queues) {
      for (const QUpdateRecord& rec : queue) apply_q_update(grid, rec);
    }
  }
  return image;
}

}  // namespace raylearn
