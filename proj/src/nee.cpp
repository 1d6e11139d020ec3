#include "raylearn/nee.hpp"

#include <algorithm>
#include <cmath>

#include "raylearn/parallel.hpp"
#include "raylearn/sampler.hpp"

namespace raylearn {

Rgb direct_light_contribution(const ShadingPoint& sp, const Scene& scene, int light_index,
                              const LightSample& ls) {
  require(light_index >= 0 && light_index < int(scene.lights.size()),
          "direct_light_contribution: light index out of range");
  require(ls.pdf_area > 0, "direct_light_contribution: nonpositive area density");
  const Vec3 d = ls.position - sp.position;
  const double r2 = dot(d, d);
  if (r2 <= 0) return Rgb{0, 0, 0};
  const Vec3 wi = d / std::sqrt(r2);
  const double cos_x = dot(sp.normal, wi);
  const double cos_y = dot(ls.normal, -wi);
  if (cos_x <= 0 || cos_y <= 0) return Rgb{0, 0, 0};
  const Rgb f = eval_bsdf(scene, sp, wi);
  if (f.x == 0 && f.y == 0 && f.z == 0) return Rgb{0, 0, 0};
  if (!visible(scene, sp.position, sp.normal, ls.position, ls.normal)) return Rgb{0, 0, 0};
  const double geometry = cos_x * cos_y / r2;
  return scene.lights[light_index].emission * f * (geometry / ls.pdf_area);
}

Rgb estimate_direct(const ShadingPoint& sp, const Scene& scene, int light_index,
                    const LightSample& ls, double p_i) {
  require(p_i > 0 && p_i <= 1.0 + 1e-12,
          "estimate_direct: selection probability outside (0, 1]");
  return direct_light_contribution(sp, scene, light_index, ls) / p_i;
}

TdTable::TdTable(const Vec3& bounds_min, const Vec3& bounds_max, int light_count,
                 int spatial_res)
    : bmin_(bounds_min), res_(spatial_res), lights_(light_count) {
  require(light_count > 0, "TdTable: light count must be positive");
  require(spatial_res > 0, "TdTable: spatial resolution must be positive");
  const Vec3 extent = bounds_max - bounds_min;
  require(extent.x > 0 && extent.y > 0 && extent.z > 0, "TdTable: degenerate bounds");
  inv_extent_ = Vec3{1.0 / extent.x, 1.0 / extent.y, 1.0 / extent.z};
  q_.assign(size_t(state_count()) * lights_, 0.0);
  visits_.assign(q_.size(), 0);
}

int TdTable::state_index(const Vec3& position, const Vec3& normal, const Vec3& incoming) const {
  require(res_ > 0, "TdTable: table not initialized");
  auto axis_cell = [&](double p, double lo, double inv) {
    const int c = int((p - lo) * inv * res_);
    return std::clamp(c, 0, res_ - 1);
  };
  const int cx = axis_cell(position.x, bmin_.x, inv_extent_.x);
  const int cy = axis_cell(position.y, bmin_.y, inv_extent_.y);
  const int cz = axis_cell(position.z, bmin_.z, inv_extent_.z);
  const int cell = (cz * res_ + cy) * res_ + cx;
  const int n_oct = (normal.x > 0 ? 1 : 0) | (normal.y > 0 ? 2 : 0) | (normal.z > 0 ? 4 : 0);
  const int d_oct =
      (incoming.x > 0 ? 1 : 0) | (incoming.y > 0 ? 2 : 0) | (incoming.z > 0 ? 4 : 0);
  return (cell * 8 + n_oct) * 8 + d_oct;
}

void TdTable::values_at(int state, std::vector<double>& qs) const {
  require(state >= 0 && state < state_count(), "TdTable: state out of range");
  qs.resize(lights_);
  const size_t base = size_t(state) * lights_;
  std::copy(q_.begin() + base, q_.begin() + base + lights_, qs.begin());
}

double td_update(TdTable& table, int state, int light, double contribution_luminance,
                 double alpha) {
  require(state >= 0 && state < table.state_count(), "td_update: state out of range");
  require(light >= 0 && light < table.lights_, "td_update: light out of range");
  require(alpha >= 0 && alpha <= 1, "td_update: alpha outside [0, 1]");
  require(std::isfinite(contribution_luminance) && contribution_luminance >= 0,
          "td_update: contribution must be finite and nonnegative");
  const size_t s = table.slot(state, light);
  const double q = (1.0 - alpha) * table.q_[s] + alpha * contribution_luminance;
  table.q_[s] = q;
  table.visits_[s] += 1;
  return q;
}

Cdf build_cdf(std::span<const double> qs, double floor_delta) {
  require(!qs.empty(), "build_cdf: empty mass vector");
  const int n = int(qs.size());
  require(floor_delta >= 0 && floor_delta * n < 1.0 + 1e-12,
          "build_cdf: floor too large for the entry count");
  double total = 0;
  for (double q : qs) {
    require(std::isfinite(q) && q >= 0, "build_cdf: masses must be finite and nonnegative");
    total += q;
  }
  Cdf cdf;
  cdf.total = total;
  cdf.cumulative.resize(n);
  const double keep = 1.0 - floor_delta * n;
  double cum = 0;
  for (int i = 0; i < n; ++i) {
    const double p = total > 0 ? keep * (qs[i] / total) + floor_delta : 1.0 / n;
    cum += p;
    cdf.cumulative[i] = cum;
  }
  cdf.cumulative[n - 1] = 1.0;  // absorb accumulation roundoff at the top
  return cdf;
}

std::pair<int, double> sample_cdf(const Cdf& cdf, double u) {
  require(!cdf.cumulative.empty(), "sample_cdf: empty cdf");
  require(u >= 0 && u < 1, "sample_cdf: u outside [0, 1)");
  const auto it = std::upper_bound(cdf.cumulative.begin(), cdf.cumulative.end(), u);
  const int index =
      it == cdf.cumulative.end() ? int(cdf.cumulative.size()) - 1 : int(it - cdf.cumulative.begin());
  const double below = index == 0 ? 0.0 : cdf.cumulative[index - 1];
  return {index, cdf.cumulative[index] - below};
}

std::pair<int, double> softmax_temperature_select(std::span<const double> q,
                                                  double temperature, double u) {
  require(!q.empty(), "softmax_temperature_select: empty value vector");
  require(temperature > 0 && std::isfinite(temperature),
          "softmax_temperature_select: temperature must be positive and finite");
  require(u >= 0 && u < 1, "softmax_temperature_select: u outside [0, 1)");
  const double log_t = std::log(temperature);
  std::vector<double> scores(q.size());
  for (size_t i = 0; i < q.size(); ++i) {
    require(std::isfinite(q[i]), "softmax_temperature_select: values must be finite");
    scores[i] = q[i] * log_t;
  }
  const std::vector<double> p = softmax(scores);
  double cum = 0;
  int pick = int(q.size()) - 1;
  for (size_t i = 0; i < p.size(); ++i) {
    cum += p[i];
    if (u < cum) {
      pick = int(i);
      break;
    }
  }
  return {pick, p[pick]};
}

std::pair<int, double> epsilon_greedy_select(std::span<const double> q, double epsilon,
                                             double u) {
  require(!q.empty(), "epsilon_greedy_select: empty value vector");
  require(epsilon >= 0 && epsilon <= 1, "epsilon_greedy_select: epsilon outside [0, 1]");
  require(u >= 0 && u < 1, "epsilon_greedy_select: u outside [0, 1)");
  const int n = int(q.size());
  int best = 0;
  for (int i = 1; i < n; ++i) {
    if (q[i] > q[best]) best = i;  // strict: ties resolve to the lowest index
  }
  int pick;
  if (u < epsilon) {
    pick = std::min(int(u / epsilon * n), n - 1);
  } else {
    pick = best;
  }
  const double mass = epsilon / n + (pick == best ? 1.0 - epsilon : 0.0);
  return {pick, mass};
}

const char* selector_name(Selector s) {
  switch (s) {
    case Selector::kUniform: return "uniform";
    case Selector::kTabularTd: return "tabular-td";
    case Selector::kNet: return "net";
    case Selector::kEpsGreedy: return "eps-greedy";
    case Selector::kSoftmaxT: return "softmax-T";
  }
  throw ContractViolation("selector_name: unknown selector");
}

Selector selector_from_name(const std::string& name) {
  if (name == "uniform") return Selector::kUniform;
  if (name == "tabular-td") return Selector::kTabularTd;
  if (name == "net") return Selector::kNet;
  if (name == "eps-greedy") return Selector::kEpsGreedy;
  if (name == "softmax-T" || name == "softmax-t") return Selector::kSoftmaxT;
  throw ContractViolation("unknown selector '" + name +
                          "' (expected uniform|tabular-td|net|eps-greedy|softmax-T)");
}

void encode_selection_state(const Scene& scene, const Vec3& x, const Vec3& n, const Vec3& w,
                            double out[9]) {
  const Vec3 extent = scene.bounds_max - scene.bounds_min;
  out[0] = (x.x - scene.bounds_min.x) / extent.x;
  out[1] = (x.y - scene.bounds_min.y) / extent.y;
  out[2] = (x.z - scene.bounds_min.z) / extent.z;
  out[3] = n.x;
  out[4] = n.y;
  out[5] = n.z;
  out[6] = w.x;
  out[7] = w.y;
  out[8] = w.z;
}

namespace {

struct PolicyContext {
  const Scene* scene = nullptr;
  const OnlineNeeConfig* config = nullptr;
  const TinyMlp* net = nullptr;
  const TdTable* table = nullptr;
};

// Selection distribution lookup at one surface state; thread-local scratch
// comes in through the caller.
std::pair<int, double> select_light(const PolicyContext& ctx, const Vec3& x, const Vec3& n,
                                    const Vec3& incoming, double u, ForwardCache& cache,
                                    std::vector<double>& qs) {
  const int nlights = int(ctx.scene->lights.size());
  switch (ctx.config->selector) {
    case Selector::kUniform: {
      const int pick = std::min(int(u * nlights), nlights - 1);
      return {pick, 1.0 / nlights};
    }
    case Selector::kNet: {
      double in[9];
      encode_selection_state(*ctx.scene, x, n, incoming, in);
      const std::vector<double>& p = forward(*ctx.net, std::span<const double>(in, 9), cache);
      return sample_cdf(build_cdf(p, ctx.config->floor_delta), u);
    }
    case Selector::kTabularTd: {
      ctx.table->values_at(ctx.table->state_index(x, n, incoming), qs);
      return sample_cdf(build_cdf(qs, ctx.config->floor_delta), u);
    }
    case Selector::kEpsGreedy: {
      ctx.table->values_at(ctx.table->state_index(x, n, incoming), qs);
      return epsilon_greedy_select(qs, ctx.config->epsilon, u);
    }
    case Selector::kSoftmaxT: {
      ctx.table->values_at(ctx.table->state_index(x, n, incoming), qs);
      return softmax_temperature_select(qs, ctx.config->temperature, u);
    }
  }
  throw ContractViolation("select_light: unknown selector");
}

struct SampleOutcome {
  int pixel = -1;
  Rgb value{0, 0, 0};
  bool hit_surface = false;
  SampleRecord record;
};

void run_sample(const PolicyContext& ctx, uint64_t sample_index, SampleOutcome& out,
                ForwardCache& cache, std::vector<double>& qs) {
  const Scene& scene = *ctx.scene;
  const OnlineNeeConfig& cfg = *ctx.config;
  const double px = halton_point(sample_index, 0) * cfg.width;
  const double py = halton_point(sample_index, 1) * cfg.height;
  const int ix = std::min(int(px), cfg.width - 1);
  const int iy = std::min(int(py), cfg.height - 1);
  out.pixel = iy * cfg.width + ix;
  out.value = Rgb{0, 0, 0};
  out.hit_surface = false;

  const Ray ray = scene.camera.generate_ray(px, py, cfg.width, cfg.height);
  const std::optional<ShadingPoint> hit = intersect(ray, scene);
  if (!hit) return;

  out.value = emitted_radiance(scene, *hit);
  if (scene.lights.empty()) return;

  const double u_sel = halton_point(sample_index, 2);
  const auto [light, p] =
      select_light(ctx, hit->position, hit->normal, ray.direction, u_sel, cache, qs);
  const LightSample ls = sample_light_point(scene, light, halton_point(sample_index, 3),
                                            halton_point(sample_index, 4));
  const Rgb contribution = direct_light_contribution(*hit, scene, light, ls);
  out.value += contribution / p;

  out.hit_surface = true;
  out.record = SampleRecord{hit->position, hit->normal, ray.direction, light, p, contribution};
}

}  // namespace

TinyMlp make_selection_net(const Scene& scene, uint64_t seed) {
  require(!scene.lights.empty(), "make_selection_net: scene has no lights");
  return make_mlp({9, 64, 64, int(scene.lights.size())},
                  {Activation::kRelu, Activation::kRelu, Activation::kSoftmax}, seed);
}

OnlineNeeResult render_with_online_learning(const Scene& scene, const OnlineNeeConfig& config,
                                            const TinyMlp* warm_net, const TdTable* warm_table) {
  require(config.width > 0 && config.height > 0, "online nee: image dimensions must be positive");
  require(config.iterations > 0 && config.batches > 0 && config.batch_size > 0,
          "online nee: iteration shape must be positive");
  const int nlights = int(scene.lights.size());
  require(nlights > 0, "online nee: scene has no lights");

  OnlineNeeResult result;
  result.image = ImageBuffer(config.width, config.height);
  result.net = warm_net ? *warm_net : make_selection_net(scene, config.seed);
  require(result.net.output_size() == nlights,
          "online nee: selection network arity must equal the light count");
  require(result.net.input_size() == 9, "online nee: selection network takes 9 inputs");
  result.table =
      warm_table ? *warm_table : TdTable(scene.bounds_min, scene.bounds_max, nlights);
  require(result.table.light_count() == nlights,
          "online nee: table arity must equal the light count");
  result.selection_counts.assign(nlights, 0);

  const bool tabular = config.selector == Selector::kTabularTd ||
                       config.selector == Selector::kEpsGreedy ||
                       config.selector == Selector::kSoftmaxT;
  const bool neural = config.selector == Selector::kNet;

  const int threads = resolve_threads(config.threads);
  std::vector<ForwardCache> caches(std::max(threads, 1));
  std::vector<std::vector<double>> scratch(std::max(threads, 1));
  std::vector<SampleOutcome> outcomes(config.batch_size);

  std::vector<SampleRecord> records;
  records.reserve(size_t(config.batches) * config.batch_size);

  PolicyContext ctx;
  ctx.scene = &scene;
  ctx.config = &config;
  ctx.net = &result.net;
  ctx.table = &result.table;

  for (int iter = 0; iter < config.iterations; ++iter) {
    records.clear();
    for (int batch = 0; batch < config.batches; ++batch) {
      const uint64_t base =
          (uint64_t(iter) * config.batches + batch) * uint64_t(config.batch_size);
      // Policy state is frozen for the batch; every slot is thread-private.
      parallel_for(config.batch_size, threads, [&](int64_t k) {
        const int slot = worker_index();
        const uint64_t index =
            stream_index(config.seed, kPurposeNeeTrain, base + uint64_t(k));
        run_sample(ctx, index, outcomes[size_t(k)], caches[slot], scratch[slot]);
      });
      // Serial absorption in sample order keeps results thread-count
      // independent: image, record log, and tabular statistics.
      for (int k = 0; k < config.batch_size; ++k) {
        SampleOutcome& out = outcomes[size_t(k)];
        result.image.add(out.pixel % config.width, out.pixel / config.width, out.value);
        if (!out.hit_surface) continue;
        result.selection_counts[out.record.light] += 1;
        records.push_back(out.record);
        if (tabular && config.train) {
          const int state = result.table.state_index(out.record.position, out.record.normal,
                                                     out.record.incoming);
          td_update(result.table, state, out.record.light,
                    luminance(out.record.contribution),
                    result.table.running_average_alpha(state, out.record.light));
        }
      }
    }

    OnlineNeeIteration stats;
    stats.samples = uint64_t(config.batches) * config.batch_size;
    stats.surface_hits = records.size();
    if (neural && config.train && !records.empty()) {
      const double rate = scheduled_rate(config.rate, uint64_t(iter), uint64_t(config.iterations));
      // The NLL weights are importance-corrected contribution luminances.
      // Normalizing by their mean keeps the gradient scale scene-independent
      // without moving the minimizer (a constant factor per retrain pass).
      double weight_mean = 0;
      for (const SampleRecord& rec : records)
        weight_mean += luminance(rec.contribution) / rec.p_selected;
      weight_mean /= double(records.size());
      if (weight_mean > 0) {
        double loss_sum = 0;
        uint64_t loss_count = 0;
        MiniBatch mb;
        double in[9];
        for (size_t start = 0; start < records.size(); start += size_t(config.batch_size)) {
          const size_t stop = std::min(records.size(), start + size_t(config.batch_size));
          mb.clear();
          for (size_t r = start; r < stop; ++r) {
            const SampleRecord& rec = records[r];
            TrainingSample ts;
            encode_selection_state(scene, rec.position, rec.normal, rec.incoming, in);
            ts.input.assign(in, in + 9);
            ts.target_class = rec.light;
            ts.weight = luminance(rec.contribution) / rec.p_selected / weight_mean;
            mb.push_back(std::move(ts));
          }
          loss_sum += train_minibatch(result.net, mb, LossKind::kWeightedNll, rate) * mb.size();
          loss_count += mb.size();
        }
        stats.mean_loss = loss_count > 0 ? loss_sum / double(loss_count) : 0.0;
      }
    }
    result.trace.push_back(stats);
  }
  return result;
}

std::vector<int> selection_argmax_map(const Scene& scene, const OnlineNeeConfig& config,
                                      const TinyMlp* net, const TdTable* table) {
  require(config.width > 0 && config.height > 0, "selection map: dimensions must be positive");
  std::vector<int> map(size_t(config.width) * config.height, -1);
  const int nlights = int(scene.lights.size());
  if (nlights == 0) return map;

  const int threads = resolve_threads(config.threads);
  std::vector<ForwardCache> caches(std::max(threads, 1));
  std::vector<std::vector<double>> scratch(std::max(threads, 1));

  parallel_for(int64_t(map.size()), threads, [&](int64_t pix) {
    const int ixp = int(pix) % config.width;
    const int iyp = int(pix) / config.width;
    const Ray ray =
        scene.camera.generate_ray(ixp + 0.5, iyp + 0.5, config.width, config.height);
    const std::optional<ShadingPoint> hit = intersect(ray, scene);
    if (!hit) return;
    const int slot = worker_index();
    std::vector<double>& qs = scratch[slot];
    if (net) {
      double in[9];
      encode_selection_state(scene, hit->position, hit->normal, ray.direction, in);
      const std::vector<double>& p =
          forward(*net, std::span<const double>(in, 9), caches[slot]);
      qs.assign(p.begin(), p.end());
    } else {
      require(table != nullptr, "selection map: need a network or a table");
      table->values_at(table->state_index(hit->position, hit->normal, ray.direction), qs);
    }
    int best = 0;
    for (int i = 1; i < nlights; ++i) {
      if (qs[i] > qs[best]) best = i;
    }
    map[size_t(pix)] = best;
  });
  return map;
}

}  // namespace raylearn
