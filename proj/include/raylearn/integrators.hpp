#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "raylearn/image.hpp"
#include "raylearn/nee.hpp"
#include "raylearn/qgrid.hpp"
#include "raylearn/scene.hpp"

namespace raylearn {

enum class Integrator { kPtReference, kNeeUniform, kNeeTabular, kNeeNet, kBaked, kGuidedPt };

const char* integrator_name(Integrator i);
Integrator integrator_from_name(const std::string& name);

struct ExperimentConfig {
  std::string scene = "cornell-diffuse";
  Integrator integrator = Integrator::kPtReference;
  int width = 256, height = 256;
  int spp = 16;
  int max_path_length = 6;
  uint64_t seed = 0;
  int tile_size = 16;
  int threads = 1;  // 0 requests the hardware default
  // learner knobs
  double epsilon = 0.1;      // guided-mixture share / eps-greedy mix
  double temperature = 2.0;  // softmax-T base
  double rate = 1e-2;        // network step size
  int batches = 64;          // records-per-retrain cadence, in units of 64
  Selector selector = Selector::kNet;
};

void validate(const ExperimentConfig& config);

struct Tile {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
};

// Row-major tile decomposition; every pixel belongs to exactly one tile.
std::vector<Tile> make_tiles(int width, int height, int tile_size);

// One queued tabular update: the segment that left x in direction omega and
// arrived at y, with the single continuation sample drawn there (if any).
// The continuation's Q factor is read at apply time.
struct QUpdateRecord {
  Vec3 x;
  Vec3 omega;
  double le_luminance = 0;
  Vec3 y;
  bool has_continuation = false;
  Vec3 wi;
  double weight = 0;  // luminance(f_s) * cos / pdf at y
};

void apply_q_update(QGrid& grid, const QUpdateRecord& rec);

// Radiance along one camera ray. Emission is picked up only at the first
// vertex; every vertex after that is reached by next-event estimation with
// uniform light selection, so nothing is counted twice. Sample dimensions:
// 0,1 are the pixel jitter (consumed by the caller), then five per vertex
// {light selection, light point u/v, scatter u/v}. A grid switches diffuse
// vertices to guided scattering; `updates` collects one record per interior
// segment for deferred grid training.
Rgb trace_path(const Scene& scene, const Ray& camera_ray, uint64_t sample_index,
               int max_path_length, const QGrid* grid, double epsilon,
               std::vector<QUpdateRecord>* updates);

// Tile-parallel path tracing; per-pixel sample i of pixel p uses stream
// counter i * pixel_count + p, so results are independent of tiling and
// thread count.
ImageBuffer path_trace_reference(const Scene& scene, const ExperimentConfig& config);

// Same estimator with guided scattering; the grid trains online. Samples
// proceed in whole-image waves: each wave renders one sample per pixel
// against the frozen grid, then applies the queued updates in raster-pixel
// order, so the trained grid is independent of tiling and thread count.
ImageBuffer path_trace_guided(const Scene& scene, const ExperimentConfig& config, QGrid& grid);

}  // namespace raylearn
