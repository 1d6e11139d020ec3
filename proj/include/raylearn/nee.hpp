#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "raylearn/image.hpp"
#include "raylearn/nn.hpp"
#include "raylearn/scene.hpp"

namespace raylearn {

// Direct-lighting contribution of one sampled light point before dividing by
// the light-selection probability: Li * f_r * G * V / pdf_area.
Rgb direct_light_contribution(const ShadingPoint& sp, const Scene& scene, int light_index,
                              const LightSample& ls);

// Full single-sample next-event estimate: Li * f_r * G * V / (pdf_area * p_i).
// Zero whenever either cosine is nonpositive or the segment is occluded.
Rgb estimate_direct(const ShadingPoint& sp, const Scene& scene, int light_index,
                    const LightSample& ls, double p_i);

// Per-light contribution statistics over discretized states: position cell
// (default 16^3) x normal octant x incoming-direction octant.
class TdTable {
 public:
  TdTable() = default;
  TdTable(const Vec3& bounds_min, const Vec3& bounds_max, int light_count,
          int spatial_res = 16);

  int light_count() const { return lights_; }
  int state_count() const { return res_ * res_ * res_ * 64; }
  int state_index(const Vec3& position, const Vec3& normal, const Vec3& incoming) const;

  double value(int state, int light) const { return q_[slot(state, light)]; }
  uint32_t visits(int state, int light) const { return visits_[slot(state, light)]; }
  void values_at(int state, std::vector<double>& qs) const;

  double running_average_alpha(int state, int light) const {
    return 1.0 / (1.0 + visits_[slot(state, light)]);
  }

 private:
  friend double td_update(TdTable&, int, int, double, double);
  size_t slot(int state, int light) const { return size_t(state) * lights_ + light; }

  Vec3 bmin_, inv_extent_;
  int res_ = 0, lights_ = 0;
  std::vector<double> q_;
  std::vector<uint32_t> visits_;
};

// Q' = (1-alpha) Q + alpha * contribution; advances the visit count, so
// alpha = 1/(1+visits-before) keeps an exact running average.
double td_update(TdTable& table, int state, int light, double contribution_luminance,
                 double alpha);

struct Cdf {
  std::vector<double> cumulative;  // nondecreasing, last entry 1
  double total = 0;                // sum of the input masses
};

// Normalizes nonnegative masses into a sampling CDF, mixing in a uniform
// floor (default 1e-3 per entry) so every index stays reachable. All-zero
// input degrades to the uniform distribution.
Cdf build_cdf(std::span<const double> qs, double floor_delta = 1e-3);

// Smallest index whose cumulative value exceeds u, plus that index's mass.
std::pair<int, double> sample_cdf(const Cdf& cdf, double u);

// Prob(i) = T^{q_i} / sum_k T^{q_k}, evaluated as a shifted softmax of
// q * ln T. T = 1 is exactly uniform.
std::pair<int, double> softmax_temperature_select(std::span<const double> q,
                                                  double temperature, double u);

// With probability epsilon choose uniformly, otherwise the argmax (ties to
// the lowest index). Returns the exact mixture mass of the chosen index.
std::pair<int, double> epsilon_greedy_select(std::span<const double> q, double epsilon,
                                             double u);

enum class Selector { kUniform, kTabularTd, kNet, kEpsGreedy, kSoftmaxT };

const char* selector_name(Selector s);
Selector selector_from_name(const std::string& name);

// One observation of the online loop: everything needed to replay training.
// contribution is stored before dividing by the selection probability.
struct SampleRecord {
  Vec3 position;
  Vec3 normal;
  Vec3 incoming;
  int light = 0;
  double p_selected = 0;
  Rgb contribution{0, 0, 0};
};

struct OnlineNeeConfig {
  int width = 256, height = 256;
  int iterations = 16;  // N retrain rounds
  int batches = 64;     // M batches per round
  int batch_size = 64;
  Selector selector = Selector::kNet;
  double epsilon = 0.1;      // eps-greedy mix
  double temperature = 2.0;  // softmax-T base
  double rate = 1e-2;        // retrain step size, halved per quarter of N
  double floor_delta = 1e-3;
  uint64_t seed = 0;
  int threads = 1;
  bool train = true;  // false renders against the provided frozen policy
};

struct OnlineNeeIteration {
  double mean_loss = 0;       // retrain loss (net selector only)
  uint64_t samples = 0;
  uint64_t surface_hits = 0;
};

struct OnlineNeeResult {
  ImageBuffer image;
  TinyMlp net;       // selection network (selector kNet)
  TdTable table;     // tabular statistics (tabular selectors)
  std::vector<OnlineNeeIteration> trace;
  std::vector<uint64_t> selection_counts;  // per light over the whole run
};

// Builds the 9-input softmax selection network sized to the scene's lights.
TinyMlp make_selection_net(const Scene& scene, uint64_t seed);

// Shared input encoding of the selection networks: position normalized into
// the scene box, then the raw unit normal and direction of travel. Any net
// meant to drive light selection must be trained against this layout.
void encode_selection_state(const Scene& scene, const Vec3& x, const Vec3& n, const Vec3& w,
                            double out[9]);

// The online render-and-train loop: each sample picks a pixel from the
// low-discrepancy stream, traces the primary ray, selects a light through
// the active policy, estimates direct lighting, and logs a SampleRecord.
// The network retrains on the records after every M batches of 64 samples;
// tabular selectors absorb contributions at batch boundaries. Passing
// `warm_net`/`warm_table` continues from existing state.
OnlineNeeResult render_with_online_learning(const Scene& scene, const OnlineNeeConfig& config,
                                            const TinyMlp* warm_net = nullptr,
                                            const TdTable* warm_table = nullptr);

// Per-pixel argmax of the policy's selection distribution at the primary
// hit; -1 for pixels that miss all geometry. Used for the false-color view.
std::vector<int> selection_argmax_map(const Scene& scene, const OnlineNeeConfig& config,
                                      const TinyMlp* net, const TdTable* table);

}  // namespace raylearn
