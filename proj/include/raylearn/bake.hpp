#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "raylearn/image.hpp"
#include "raylearn/integrators.hpp"
#include "raylearn/nn.hpp"
#include "raylearn/scene.hpp"

namespace raylearn {

// One supervised example for a voxel network: outgoing radiance at a surface
// point toward a viewer direction in the upper hemisphere of the normal.
struct BakeSample {
  Vec3 position;
  Vec3 normal;     // oriented surface side
  Vec3 direction;  // unit, toward the viewer
  Rgb radiance;    // finite, nonnegative
};

struct BakeConfig {
  int grid_resolution = 3;
  int point_count = 10000;
  int rays_per_point = 512;
  int max_path_length = 6;
  int epochs = 500;
  int batch_size = 64;
  double rate = 1e-2;  // halved per quarter of the step budget
  uint64_t seed = 0;
  int threads = 1;
};

// Uniform spatial grid with one tiny radiance network (9 inputs, 9 hidden
// ReLU, 3 linear outputs) per voxel, plus that voxel's training samples.
// Degenerate box axes are padded so every position maps to a voxel.
class VoxelNetGrid {
 public:
  VoxelNetGrid() = default;
  VoxelNetGrid(const Vec3& bounds_min, const Vec3& bounds_max, int resolution = 3,
               uint64_t seed = 0);

  int resolution() const { return res_; }
  int voxel_count() const { return res_ * res_ * res_; }
  const Vec3& bounds_min() const { return bmin_; }
  const Vec3& bounds_max() const { return bmax_; }

  // Floor-with-clamp per axis; positions on the max face belong to the last
  // voxel. Every in-box position maps to exactly one voxel.
  int voxel_index(const Vec3& position) const;
  Vec3 voxel_center(int voxel) const;
  // Position inside the voxel rescaled to [0,1]^3 (clamped).
  Vec3 local_position(int voxel, const Vec3& position) const;

  bool trained(int voxel) const { return trained_[size_t(voxel)] != 0; }
  int trained_count() const;
  void mark_trained(int voxel);
  // Net answering queries in this voxel: its own when trained, otherwise the
  // nearest trained voxel's by center distance.
  int active_net(int voxel) const;

  const TinyMlp& net(int voxel) const { return nets_[size_t(voxel)]; }
  TinyMlp& net(int voxel) { return nets_[size_t(voxel)]; }
  const std::vector<BakeSample>& samples(int voxel) const { return samples_[size_t(voxel)]; }
  std::vector<BakeSample>& samples(int voxel) { return samples_[size_t(voxel)]; }

 private:
  Vec3 bmin_, bmax_, voxel_size_;
  int res_ = 0;
  std::vector<TinyMlp> nets_;
  std::vector<std::vector<BakeSample>> samples_;
  std::vector<uint8_t> trained_;
};

// Scatters `point_count` area-uniform points over the scene surfaces, shoots
// `rays_per_point` hemisphere directions from each, and appends one sample
// per direction to the voxel containing the point. The radiance is the
// path-traced outgoing radiance of the point toward the direction, using the
// same estimator as the reference renderer.
void generate_training_data(const Scene& scene, VoxelNetGrid& grid, const BakeConfig& config);

// Per-voxel minibatch SGD on squared RGB error; inputs are (local position,
// normal, direction). Voxels with data end up trained; empty voxels stay
// flagged untrained. Returns one mean-loss-per-epoch trace per voxel.
// Nonfinite losses abort with a TrainingError naming the voxel.
std::vector<std::vector<double>> train_voxel_networks(VoxelNetGrid& grid,
                                                      const BakeConfig& config);

// Forward pass of the voxel's network (or its fallback) on the encoded
// query; output clamped to be nonnegative.
Rgb eval_baked_radiance(const VoxelNetGrid& grid, const Vec3& position, const Vec3& normal,
                        const Vec3& direction, ForwardCache& cache);

// Primary rays only: each hit is shaded by the baked grid with the direction
// toward the camera; spp jittered samples per pixel box-filter the result.
ImageBuffer render_baked(const Scene& scene, const VoxelNetGrid& grid,
                         const ExperimentConfig& config);

// Binary grid file: header (resolution, bounding box, per-voxel trained
// flags) followed by the trained networks' blobs. Training samples are not
// persisted.
void save_baked_grid(const VoxelNetGrid& grid, const std::string& path);
VoxelNetGrid load_baked_grid(const std::string& path);

// Offline analogue of the online light-selection loop: at area-uniform
// surface points, every light's next-event contribution is evaluated
// directly, and a softmax selection net is trained against the normalized
// per-light contribution distribution. The result plugs into the online
// renderer as a frozen policy.
TinyMlp train_visibility_net(const Scene& scene, int sample_count, int epochs, double rate,
                             uint64_t seed);

}  // namespace raylearn
