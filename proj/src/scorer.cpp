#include "hclm/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hclm {

namespace {

int clamp_color(int c, int n_colors) {
  return std::clamp(c, 0, n_colors - 1);
}

// One cell's two-stream trunk: sparse affine + rectifier per stream,
// fused by concatenation into `fused` (color first, then height).
inline void trunk_cell(const TrunkTensors& t, int hidden,
                       const std::vector<std::pair<int, double>>& color_feat,
                       const std::vector<std::pair<int, double>>& height_feat,
                       double* fused, uint8_t* active) {
  double* pre_c = fused;
  double* pre_h = fused + hidden;
  std::memcpy(pre_c, t.b_color.data(), hidden * sizeof(double));
  for (const auto& [idx, v] : color_feat) {
    const double* w = &t.w_color[static_cast<size_t>(idx) * hidden];
    for (int h = 0; h < hidden; ++h) pre_c[h] += w[h] * v;
  }
  std::memcpy(pre_h, t.b_height.data(), hidden * sizeof(double));
  for (const auto& [idx, v] : height_feat) {
    const double* w = &t.w_height[static_cast<size_t>(idx) * hidden];
    for (int h = 0; h < hidden; ++h) pre_h[h] += w[h] * v;
  }
  for (int j = 0; j < 2 * hidden; ++j) {
    const bool on = fused[j] > 0.0;
    active[j] = on;
    if (!on) fused[j] = 0.0;
  }
}

inline double dot(const double* a, const double* b, int n) {
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

template <bool kParallel>
DualOut forward_dual_impl(const DualScorer& s, const FeatureMap& f) {
  const ScorerConfig& cfg = s.cfg;
  const int w = f.width, h = f.height, n = w * h;
  const int fused_n = cfg.fused();
  const int k = cfg.k_push;

  DualOut out;
  out.width = w;
  out.height = h;
  out.k_push = k;
  out.q_push.resize(static_cast<size_t>(n) * k);
  out.fused.resize(static_cast<size_t>(n) * fused_n);
  out.active.resize(static_cast<size_t>(n) * fused_n);
  out.pooled.assign(fused_n, 0.0);

  // Per-row pooling partials combined in row order keep the reduction
  // bit-identical for any thread count.
  std::vector<double> row_pool(static_cast<size_t>(h) * fused_n, 0.0);

#pragma omp parallel for schedule(static) if (kParallel)
  for (int y = 0; y < h; ++y) {
    double* rp = &row_pool[static_cast<size_t>(y) * fused_n];
    for (int x = 0; x < w; ++x) {
      const int cell = y * w + x;
      double* fz = &out.fused[static_cast<size_t>(cell) * fused_n];
      uint8_t* az = &out.active[static_cast<size_t>(cell) * fused_n];
      trunk_cell(s.p.trunk, cfg.hidden, f.color[cell], f.elevation[cell], fz,
                 az);
      for (int j = 0; j < fused_n; ++j) rp[j] += fz[j];
      double* q = &out.q_push[static_cast<size_t>(cell) * k];
      for (int t = 0; t < k; ++t)
        q[t] = s.p.b_push[t] + dot(&s.p.w_push[static_cast<size_t>(t) * fused_n],
                                   fz, fused_n);
    }
  }

  for (int y = 0; y < h; ++y) {
    const double* rp = &row_pool[static_cast<size_t>(y) * fused_n];
    for (int j = 0; j < fused_n; ++j) out.pooled[j] += rp[j];
  }
  for (int j = 0; j < fused_n; ++j) out.pooled[j] /= n;
  for (int a = 0; a < 2; ++a)
    out.q_high[a] =
        s.p.b_high[a] + dot(&s.p.w_high[static_cast<size_t>(a) * fused_n],
                            out.pooled.data(), fused_n);
  return out;
}

template <bool kParallel>
MapOut forward_map_impl(const ScorerConfig& cfg, const MapHeadTensors& t,
                        int k, const FeatureMap& f) {
  const int w = f.width, h = f.height, n = w * h;
  const int fused_n = cfg.fused();

  MapOut out;
  out.width = w;
  out.height = h;
  out.k = k;
  out.q.resize(static_cast<size_t>(n) * k);
  out.fused.resize(static_cast<size_t>(n) * fused_n);
  out.active.resize(static_cast<size_t>(n) * fused_n);

#pragma omp parallel for schedule(static) if (kParallel)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int cell = y * w + x;
      double* fz = &out.fused[static_cast<size_t>(cell) * fused_n];
      uint8_t* az = &out.active[static_cast<size_t>(cell) * fused_n];
      trunk_cell(t.trunk, cfg.hidden, f.color[cell], f.elevation[cell], fz, az);
      double* q = &out.q[static_cast<size_t>(cell) * k];
      for (int ki = 0; ki < k; ++ki)
        q[ki] = t.b_head[ki] +
                dot(&t.w_head[static_cast<size_t>(ki) * fused_n], fz, fused_n);
    }
  }
  return out;
}

// Gradient of one cell's trunk, given the gradient on its fused outputs.
inline void trunk_cell_backward(
    int hidden, const std::vector<std::pair<int, double>>& color_feat,
    const std::vector<std::pair<int, double>>& height_feat,
    const uint8_t* active, const double* g_fused, TrunkTensors& grad) {
  for (int j = 0; j < hidden; ++j) {
    const double g = active[j] ? g_fused[j] : 0.0;
    if (g == 0.0) continue;
    grad.b_color[j] += g;
    for (const auto& [idx, v] : color_feat)
      grad.w_color[static_cast<size_t>(idx) * hidden + j] += g * v;
  }
  for (int j = 0; j < hidden; ++j) {
    const double g = active[hidden + j] ? g_fused[hidden + j] : 0.0;
    if (g == 0.0) continue;
    grad.b_height[j] += g;
    for (const auto& [idx, v] : height_feat)
      grad.w_height[static_cast<size_t>(idx) * hidden + j] += g * v;
  }
}

void put_u16(std::string& b, uint16_t v) {
  for (int i = 0; i < 2; ++i) b.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void put_u32(std::string& b, uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void put_u64(std::string& b, uint64_t v) {
  for (int i = 0; i < 8; ++i) b.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void put_f64(std::string& b, double v) {
  static_assert(sizeof(double) == 8);
  uint64_t bits;
  std::memcpy(&bits, &v, 8);
  put_u64(b, bits);
}

uint64_t fnv1a_bytes(const char* data, size_t n) {
  uint64_t h = 0xCBF29CE484222325ULL;
  for (size_t i = 0; i < n; ++i) {
    h ^= static_cast<uint8_t>(data[i]);
    h *= 0x100000001B3ULL;
  }
  return h;
}

class ByteReader {
 public:
  explicit ByteReader(const std::string& b) : b_(b) {}
  uint16_t u16() { return static_cast<uint16_t>(take(2)); }
  uint32_t u32() { return static_cast<uint32_t>(take(4)); }
  uint64_t u64() { return take(8); }
  double f64() {
    const uint64_t bits = take(8);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
  std::string bytes(size_t n) {
    need(n);
    std::string s = b_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  size_t pos() const { return pos_; }

 private:
  uint64_t take(int n) {
    need(n);
    uint64_t v = 0;
    for (int i = 0; i < n; ++i)
      v |= static_cast<uint64_t>(static_cast<uint8_t>(b_[pos_ + i])) << (8 * i);
    pos_ += n;
    return v;
  }
  void need(size_t n) const {
    if (pos_ + n > b_.size()) throw std::runtime_error("checkpoint truncated");
  }
  const std::string& b_;
  size_t pos_ = 0;
};

constexpr uint32_t kCheckpointVersion = 1;
constexpr char kMagic[4] = {'H', 'C', 'P', 'K'};

void put_config(std::string& b, const ScorerConfig& cfg) {
  put_u32(b, cfg.patch);
  put_u32(b, cfg.hidden);
  put_u32(b, cfg.k_push);
  put_u32(b, cfg.k_pick);
  put_u32(b, cfg.k_place);
  put_u32(b, cfg.n_colors);
  put_u32(b, cfg.max_stack);
}

ScorerConfig read_config(ByteReader& r) {
  ScorerConfig cfg;
  cfg.patch = static_cast<int>(r.u32());
  cfg.hidden = static_cast<int>(r.u32());
  cfg.k_push = static_cast<int>(r.u32());
  cfg.k_pick = static_cast<int>(r.u32());
  cfg.k_place = static_cast<int>(r.u32());
  cfg.n_colors = static_cast<int>(r.u32());
  cfg.max_stack = static_cast<int>(r.u32());
  return cfg;
}

template <typename Tensors, typename Visit>
std::string checkpoint_bytes(uint32_t kind, const ScorerConfig& cfg,
                             Tensors& tensors, Visit visit) {
  std::string b;
  b.append(kMagic, 4);
  put_u32(b, kCheckpointVersion);
  put_u32(b, kind);
  put_config(b, cfg);
  uint32_t count = 0;
  visit(tensors, [&](const char*, const std::vector<double>&) { ++count; });
  put_u32(b, count);
  visit(tensors, [&](const char* name, const std::vector<double>& v) {
    const std::string n(name);
    put_u16(b, static_cast<uint16_t>(n.size()));
    b += n;
    put_u64(b, v.size());
    for (double x : v) put_f64(b, x);
  });
  put_u64(b, fnv1a_bytes(b.data(), b.size()));
  return b;
}

template <typename Tensors, typename Visit>
void parse_checkpoint(const std::string& bytes, uint32_t expect_kind,
                      ScorerConfig& cfg, Tensors& tensors, Visit visit) {
  if (bytes.size() < 12 + 8) throw std::runtime_error("checkpoint truncated");
  const uint64_t sum = fnv1a_bytes(bytes.data(), bytes.size() - 8);
  ByteReader r(bytes);
  if (r.bytes(4) != std::string(kMagic, 4))
    throw std::runtime_error("checkpoint: bad magic");
  if (r.u32() != kCheckpointVersion)
    throw std::runtime_error("checkpoint: unsupported version");
  if (r.u32() != expect_kind) throw std::runtime_error("checkpoint: wrong kind");
  cfg = read_config(r);
  const uint32_t count = r.u32();
  uint32_t seen = 0;
  visit(tensors, [&](const char* name, std::vector<double>& v) {
    if (seen++ >= count) throw std::runtime_error("checkpoint: tensor count");
    const uint16_t len = r.u16();
    if (r.bytes(len) != name)
      throw std::runtime_error("checkpoint: tensor name mismatch");
    const uint64_t n = r.u64();
    v.resize(n);
    for (uint64_t i = 0; i < n; ++i) v[i] = r.f64();
  });
  if (seen != count) throw std::runtime_error("checkpoint: tensor count");
  if (r.u64() != sum) throw std::runtime_error("checkpoint: checksum mismatch");
}

void resize_trunk(TrunkTensors& t, const ScorerConfig& cfg) {
  t.w_color.assign(static_cast<size_t>(cfg.color_in()) * cfg.hidden, 0.0);
  t.b_color.assign(cfg.hidden, 0.0);
  t.w_height.assign(static_cast<size_t>(cfg.height_in()) * cfg.hidden, 0.0);
  t.b_height.assign(cfg.hidden, 0.0);
}

void resize_dual(DualTensors& t, const ScorerConfig& cfg) {
  resize_trunk(t.trunk, cfg);
  t.w_push.assign(static_cast<size_t>(cfg.k_push) * cfg.fused(), 0.0);
  t.b_push.assign(cfg.k_push, 0.0);
  t.w_high.assign(static_cast<size_t>(2) * cfg.fused(), 0.0);
  t.b_high.assign(2, 0.0);
}

void resize_map(MapHeadTensors& t, const ScorerConfig& cfg, int k) {
  resize_trunk(t.trunk, cfg);
  t.w_head.assign(static_cast<size_t>(k) * cfg.fused(), 0.0);
  t.b_head.assign(k, 0.0);
}

// fan_in per tensor name; 0 means keep zero (biases).
int fan_in_for(const std::string& name, const ScorerConfig& cfg) {
  if (name.ends_with("w_color")) return cfg.color_in();
  if (name.ends_with("w_height")) return cfg.height_in();
  if (name.ends_with(".w")) return cfg.fused();
  return 0;
}

template <typename Tensors, typename Visit>
void init_tensors(Tensors& t, const ScorerConfig& cfg, Rng& rng, Visit visit) {
  visit(t, [&](const char* name, std::vector<double>& v) {
    const int fan_in = fan_in_for(name, cfg);
    if (fan_in <= 0) return;
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (double& x : v) x = rng.uniform(-bound, bound);
  });
}

template <typename Tensors, typename Visit>
double grad_sq_norm(const Tensors& t, Visit visit) {
  double sq = 0.0;
  visit(const_cast<Tensors&>(t), [&](const char*, std::vector<double>& v) {
    for (double x : v) {
      if (!std::isfinite(x)) throw std::runtime_error("non-finite gradient");
      sq += x * x;
    }
  });
  return sq;
}

template <typename Tensors, typename Visit>
void apply_sgd(Tensors& params, const Tensors& grad, double lr, double clip,
               Visit visit) {
  if (lr < 0.0) throw std::invalid_argument("sgd_step: lr < 0");
  double scale = 1.0;
  const double norm = std::sqrt(grad_sq_norm(grad, visit));
  if (clip > 0.0 && norm > clip) scale = clip / norm;
  std::vector<std::vector<double>*> pv;
  std::vector<const std::vector<double>*> gv;
  visit(params, [&](const char*, std::vector<double>& v) { pv.push_back(&v); });
  visit(const_cast<Tensors&>(grad),
        [&](const char*, std::vector<double>& v) { gv.push_back(&v); });
  for (size_t i = 0; i < pv.size(); ++i) {
    auto& p = *pv[i];
    const auto& g = *gv[i];
    for (size_t j = 0; j < p.size(); ++j) p[j] -= lr * scale * g[j];
  }
}

struct DualVisit {
  template <typename T, typename F>
  void operator()(T& t, F&& f) const {
    visit_dual_tensors(t, std::forward<F>(f));
  }
};
struct PickPlaceVisit {
  template <typename T, typename F>
  void operator()(T& t, F&& f) const {
    visit_pickplace_tensors(t, std::forward<F>(f));
  }
};

}  // namespace

FeatureMap featurize(const GridObservation& obs, const ScorerConfig& cfg) {
  if (cfg.patch % 2 == 0) throw std::invalid_argument("featurize: even patch");
  const int w = obs.width, h = obs.height, n = w * h;
  const int nc = cfg.n_colors;
  const int p = cfg.patch, r = p / 2;

  FeatureMap f;
  f.width = w;
  f.height = h;
  f.color.resize(n);
  f.elevation.resize(n);

  std::vector<double> hist(nc, 0.0);
  for (int i = 0; i < n; ++i) hist[clamp_color(obs.top_color[i], nc)] += 1.0;
  for (int c = 0; c < nc; ++c) hist[c] /= n;

  const int held_base = p * p * nc;
  const int hist_base = held_base + (nc - 1);

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int cell = y * w + x;
      auto& cf = f.color[cell];
      auto& ef = f.elevation[cell];
      for (int wy = -r; wy <= r; ++wy) {
        for (int wx = -r; wx <= r; ++wx) {
          const int gx = x + wx, gy = y + wy;
          if (!obs.in_bounds(gx, gy)) continue;  // zero padding
          const int pos = (wy + r) * p + (wx + r);
          const int gi = gy * w + gx;
          const int c = clamp_color(obs.top_color[gi], nc);
          if (c >= 1) cf.push_back({pos * nc + (c - 1), 1.0});
          if (obs.heights[gi] == 0 && c != 0)
            cf.push_back({pos * nc + (nc - 1), 1.0});  // goal-fixture mask
          if (obs.heights[gi] > 0)
            ef.push_back({pos, obs.heights[gi] / static_cast<double>(cfg.max_stack)});
        }
      }
      if (obs.held >= 1)
        cf.push_back({held_base + clamp_color(obs.held, nc) - 1, 1.0});
      for (int c = 0; c < nc; ++c)
        if (hist[c] != 0.0) cf.push_back({hist_base + c, hist[c]});
    }
  }
  return f;
}

DualScorer make_dual_scorer(const ScorerConfig& cfg, Rng& init_rng) {
  DualScorer s;
  s.cfg = cfg;
  resize_dual(s.p, cfg);
  init_tensors(s.p, cfg, init_rng, DualVisit{});
  return s;
}

DualScorer make_zero_dual_scorer(const ScorerConfig& cfg) {
  DualScorer s;
  s.cfg = cfg;
  resize_dual(s.p, cfg);
  return s;
}

PickPlaceScorer make_pickplace_scorer(const ScorerConfig& cfg, Rng& init_rng) {
  PickPlaceScorer s;
  s.cfg = cfg;
  resize_map(s.p.pick, cfg, cfg.k_pick);
  resize_map(s.p.place, cfg, cfg.k_place);
  init_tensors(s.p, cfg, init_rng, PickPlaceVisit{});
  return s;
}

DualOut forward_dual(const DualScorer& s, const FeatureMap& f) {
  return forward_dual_impl<true>(s, f);
}

DualOut forward_dual_ref(const DualScorer& s, const FeatureMap& f) {
  return forward_dual_impl<false>(s, f);
}

MapOut forward_map(const ScorerConfig& cfg, const MapHeadTensors& t, int k,
                   const FeatureMap& f) {
  return forward_map_impl<true>(cfg, t, k, f);
}

MapOut forward_map_ref(const ScorerConfig& cfg, const MapHeadTensors& t, int k,
                       const FeatureMap& f) {
  return forward_map_impl<false>(cfg, t, k, f);
}

void backward_dual(const DualScorer& s, const FeatureMap& f,
                   const DualOut& out, const std::vector<double>& g_q_push,
                   const std::array<double, 2>& g_q_high, DualTensors& grad) {
  const ScorerConfig& cfg = s.cfg;
  const int w = f.width, h = f.height, n = w * h;
  const int fused_n = cfg.fused();
  const int k = cfg.k_push;
  if (g_q_push.size() != static_cast<size_t>(n) * k)
    throw std::invalid_argument("backward_dual: upstream shape mismatch");

  const bool any_high = g_q_high[0] != 0.0 || g_q_high[1] != 0.0;
  std::vector<double> pool_g(fused_n, 0.0);
  if (any_high) {
    for (int a = 0; a < 2; ++a) {
      grad.b_high[a] += g_q_high[a];
      const double* wh = &s.p.w_high[static_cast<size_t>(a) * fused_n];
      double* gw = &grad.w_high[static_cast<size_t>(a) * fused_n];
      for (int j = 0; j < fused_n; ++j) {
        gw[j] += g_q_high[a] * out.pooled[j];
        pool_g[j] += g_q_high[a] * wh[j];
      }
    }
    for (int j = 0; j < fused_n; ++j) pool_g[j] /= n;
  }

  std::vector<double> g_fused(fused_n);
  for (int cell = 0; cell < n; ++cell) {
    const double* gq = &g_q_push[static_cast<size_t>(cell) * k];
    bool any = any_high;
    for (int t = 0; t < k; ++t) any = any || gq[t] != 0.0;
    if (!any) continue;

    if (any_high)
      std::copy(pool_g.begin(), pool_g.end(), g_fused.begin());
    else
      std::fill(g_fused.begin(), g_fused.end(), 0.0);

    const double* fz = &out.fused[static_cast<size_t>(cell) * fused_n];
    for (int t = 0; t < k; ++t) {
      if (gq[t] == 0.0) continue;
      grad.b_push[t] += gq[t];
      const double* wp = &s.p.w_push[static_cast<size_t>(t) * fused_n];
      double* gw = &grad.w_push[static_cast<size_t>(t) * fused_n];
      for (int j = 0; j < fused_n; ++j) {
        gw[j] += gq[t] * fz[j];
        g_fused[j] += gq[t] * wp[j];
      }
    }
    trunk_cell_backward(cfg.hidden, f.color[cell], f.elevation[cell],
                        &out.active[static_cast<size_t>(cell) * fused_n],
                        g_fused.data(), grad.trunk);
  }
}

void backward_map(const ScorerConfig& cfg, const MapHeadTensors& t, int k,
                  const FeatureMap& f, const MapOut& out,
                  const std::vector<double>& g_q, MapHeadTensors& grad) {
  const int w = f.width, h = f.height, n = w * h;
  const int fused_n = cfg.fused();
  if (g_q.size() != static_cast<size_t>(n) * k)
    throw std::invalid_argument("backward_map: upstream shape mismatch");

  std::vector<double> g_fused(fused_n);
  for (int cell = 0; cell < n; ++cell) {
    const double* gq = &g_q[static_cast<size_t>(cell) * k];
    bool any = false;
    for (int ki = 0; ki < k; ++ki) any = any || gq[ki] != 0.0;
    if (!any) continue;

    std::fill(g_fused.begin(), g_fused.end(), 0.0);
    const double* fz = &out.fused[static_cast<size_t>(cell) * fused_n];
    for (int ki = 0; ki < k; ++ki) {
      if (gq[ki] == 0.0) continue;
      grad.b_head[ki] += gq[ki];
      const double* wh = &t.w_head[static_cast<size_t>(ki) * fused_n];
      double* gw = &grad.w_head[static_cast<size_t>(ki) * fused_n];
      for (int j = 0; j < fused_n; ++j) {
        gw[j] += gq[ki] * fz[j];
        g_fused[j] += gq[ki] * wh[j];
      }
    }
    trunk_cell_backward(cfg.hidden, f.color[cell], f.elevation[cell],
                        &out.active[static_cast<size_t>(cell) * fused_n],
                        g_fused.data(), grad.trunk);
  }
}

LowAction select_push(const std::vector<double>& q, int width, int height,
                      int k) {
  if (q.empty() || q.size() != static_cast<size_t>(width) * height * k)
    throw std::invalid_argument("select_push: bad map");
  LowAction best{0, 0, 0};
  double best_q = q[0 * k + 0];
  // lexicographic (theta, y, x) tie-break: scan in that order, strict >
  for (int t = 0; t < k; ++t) {
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const double v = q[(static_cast<size_t>(y) * width + x) * k + t];
        if (v > best_q) {
          best_q = v;
          best = {x, y, t};
        }
      }
    }
  }
  return best;
}

HighAction select_high(const std::array<double, 2>& q_high) {
  return q_high[0] > q_high[1] ? HighAction::Push : HighAction::PickPlace;
}

DualTensors zero_grad_dual(const ScorerConfig& cfg) {
  DualTensors t;
  resize_dual(t, cfg);
  return t;
}

MapHeadTensors zero_grad_map(const ScorerConfig& cfg, int k) {
  MapHeadTensors t;
  resize_map(t, cfg, k);
  return t;
}

namespace {
void add_into(std::vector<double>& a, const std::vector<double>& b) {
  for (size_t i = 0; i < a.size(); ++i) a[i] += b[i];
}

void accumulate_trunk(TrunkTensors& into, const TrunkTensors& from) {
  add_into(into.w_color, from.w_color);
  add_into(into.b_color, from.b_color);
  add_into(into.w_height, from.w_height);
  add_into(into.b_height, from.b_height);
}
}  // namespace

void accumulate(DualTensors& into, const DualTensors& from) {
  accumulate_trunk(into.trunk, from.trunk);
  add_into(into.w_push, from.w_push);
  add_into(into.b_push, from.b_push);
  add_into(into.w_high, from.w_high);
  add_into(into.b_high, from.b_high);
}

void accumulate(MapHeadTensors& into, const MapHeadTensors& from) {
  accumulate_trunk(into.trunk, from.trunk);
  add_into(into.w_head, from.w_head);
  add_into(into.b_head, from.b_head);
}

void sgd_step(DualTensors& params, const DualTensors& grad, double lr,
              double clip) {
  apply_sgd(params, grad, lr, clip, DualVisit{});
}

void sgd_step(MapHeadTensors& params, const MapHeadTensors& grad, double lr,
              double clip) {
  auto visit = [](auto& t, auto&& f) {
    f("trunk.w_color", t.trunk.w_color);
    f("trunk.b_color", t.trunk.b_color);
    f("trunk.w_height", t.trunk.w_height);
    f("trunk.b_height", t.trunk.b_height);
    f("head.w", t.w_head);
    f("head.b", t.b_head);
  };
  apply_sgd(params, grad, lr, clip, visit);
}

std::string dual_checkpoint_bytes(const DualScorer& s) {
  return checkpoint_bytes(0, s.cfg, const_cast<DualTensors&>(s.p), DualVisit{});
}

std::string pickplace_checkpoint_bytes(const PickPlaceScorer& s) {
  return checkpoint_bytes(1, s.cfg, const_cast<PickPlaceTensors&>(s.p),
                          PickPlaceVisit{});
}

namespace {
void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}
}  // namespace

void save_dual_checkpoint(const DualScorer& s, const std::string& path) {
  write_file(path, dual_checkpoint_bytes(s));
}

void save_pickplace_checkpoint(const PickPlaceScorer& s,
                               const std::string& path) {
  write_file(path, pickplace_checkpoint_bytes(s));
}

DualScorer load_dual_checkpoint(const std::string& path) {
  DualScorer s;
  parse_checkpoint(read_file(path), 0, s.cfg, s.p, DualVisit{});
  DualTensors expect;
  resize_dual(expect, s.cfg);
  if (expect.trunk.w_color.size() != s.p.trunk.w_color.size() ||
      expect.trunk.w_height.size() != s.p.trunk.w_height.size() ||
      expect.w_push.size() != s.p.w_push.size() ||
      expect.w_high.size() != s.p.w_high.size() ||
      expect.b_push.size() != s.p.b_push.size())
    throw std::runtime_error("checkpoint: tensor shape mismatch");
  return s;
}

PickPlaceScorer load_pickplace_checkpoint(const std::string& path) {
  PickPlaceScorer s;
  parse_checkpoint(read_file(path), 1, s.cfg, s.p, PickPlaceVisit{});
  PickPlaceTensors expect;
  resize_map(expect.pick, s.cfg, s.cfg.k_pick);
  resize_map(expect.place, s.cfg, s.cfg.k_place);
  if (expect.pick.trunk.w_color.size() != s.p.pick.trunk.w_color.size() ||
      expect.place.trunk.w_color.size() != s.p.place.trunk.w_color.size() ||
      expect.pick.w_head.size() != s.p.pick.w_head.size() ||
      expect.place.w_head.size() != s.p.place.w_head.size())
    throw std::runtime_error("checkpoint: tensor shape mismatch");
  return s;
}

uint64_t param_hash(const DualScorer& s) {
  const std::string b = dual_checkpoint_bytes(s);
  return fnv1a_bytes(b.data(), b.size());
}

uint64_t param_hash(const PickPlaceScorer& s) {
  const std::string b = pickplace_checkpoint_bytes(s);
  return fnv1a_bytes(b.data(), b.size());
}

}  // namespace hclm
