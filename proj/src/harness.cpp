#include "hclm/harness.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace hclm {

std::string variant_name(PolicyVariant v) {
  switch (v) {
    case PolicyVariant::HCLM: return "hclm";
    case PolicyVariant::PickPlaceOnly: return "pickplace-only";
    case PolicyVariant::PickPlaceRandomPush: return "pickplace-random-push";
    case PolicyVariant::Alternating: return "alternating";
    case PolicyVariant::NoTSUS: return "no-tsus";
    case PolicyVariant::NoSEQ: return "no-seq";
  }
  throw std::logic_error("variant_name: bad variant");
}

PolicyVariant parse_variant(const std::string& name) {
  for (PolicyVariant v :
       {PolicyVariant::HCLM, PolicyVariant::PickPlaceOnly,
        PolicyVariant::PickPlaceRandomPush, PolicyVariant::Alternating,
        PolicyVariant::NoTSUS, PolicyVariant::NoSEQ}) {
    if (variant_name(v) == name) return v;
  }
  throw std::invalid_argument("unknown variant '" + name + "'");
}

UpdateVariant update_variant_for(PolicyVariant v) {
  if (v == PolicyVariant::NoTSUS) return UpdateVariant::NoTsus;
  if (v == PolicyVariant::NoSEQ) return UpdateVariant::NoSeq;
  return UpdateVariant::Full;
}

PolicyFactory make_policy_factory(PolicyVariant v, const DualScorer* dual,
                                  const PickPlaceScorer* pickplace) {
  switch (v) {
    case PolicyVariant::HCLM:
    case PolicyVariant::NoTSUS:
    case PolicyVariant::NoSEQ:
      if (!dual || !pickplace)
        throw std::invalid_argument("variant needs dual + pickplace scorers");
      return [dual, pickplace] {
        return std::make_unique<HclmPolicy>(dual, pickplace, 0.0, 0.0);
      };
    case PolicyVariant::PickPlaceOnly:
      if (!pickplace)
        throw std::invalid_argument("variant needs a pickplace scorer");
      return
          [pickplace] { return std::make_unique<PickPlaceOnlyPolicy>(pickplace); };
    case PolicyVariant::PickPlaceRandomPush:
      if (!pickplace)
        throw std::invalid_argument("variant needs a pickplace scorer");
      return [pickplace] {
        return std::make_unique<AlternatingPolicy>(nullptr, pickplace);
      };
    case PolicyVariant::Alternating:
      if (!dual || !pickplace)
        throw std::invalid_argument("variant needs dual + pickplace scorers");
      return [dual, pickplace] {
        return std::make_unique<AlternatingPolicy>(dual, pickplace);
      };
  }
  throw std::logic_error("make_policy_factory: bad variant");
}

EvalReport evaluate(const TaskSpec& spec, const SimConfig& sim,
                    const PolicyFactory& factory, int episodes, uint64_t seed,
                    const std::string& variant_label, bool cluttered) {
  EvalReport report;
  report.task = spec.name;
  report.variant = variant_label;
  report.episodes = episodes;
  report.records.resize(episodes);

  const Rng base(seed);
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < episodes; ++i) {
    std::unique_ptr<Policy> policy = factory();
    const EpisodeResult r = run_episode(
        spec, sim, *policy, base.split(static_cast<uint64_t>(i)), cluttered,
        false);
    report.records[i] = {i, r.steps, r.pushes, r.success, r.final_progress};
  }

  long long steps = 0;
  for (const EpisodeRecord& r : report.records) {
    report.successes += r.success ? 1 : 0;
    steps += r.steps;
  }
  if (episodes > 0) {
    report.success_rate = 100.0 * report.successes / episodes;
    report.avg_episode_length = static_cast<double>(steps) / episodes;
  }
  return report;
}

std::vector<EvalReport> clutter_sweep(const std::string& task_name, int width,
                                      int height, const SimConfig& sim,
                                      const PolicyFactory& factory,
                                      const std::vector<int>& counts,
                                      int episodes, uint64_t seed,
                                      const std::string& variant_label) {
  std::vector<EvalReport> reports;
  reports.reserve(counts.size());
  for (int n : counts) {
    const TaskSpec spec = task_by_name(task_name, width, height, n);
    reports.push_back(
        evaluate(spec, sim, factory, episodes, seed, variant_label));
  }
  return reports;
}

TaskSpec task_by_name(const std::string& name, int width, int height,
                      int n_additional, bool demo_palette) {
  if (name == "buried-pyramid")
    return make_buried_pyramid(width, height, n_additional, demo_palette);
  return make_task(name, width, height, n_additional, demo_palette);
}

std::string report_to_text(const EvalReport& r) {
  std::string out;
  out += "report task=" + r.task + " variant=" + r.variant +
         " episodes=" + std::to_string(r.episodes) +
         " successes=" + std::to_string(r.successes) +
         " success_rate=" + format_double(r.success_rate) +
         " avg_episode_length=" + format_double(r.avg_episode_length) + "\n";
  for (const EpisodeRecord& e : r.records) {
    out += "episode index=" + std::to_string(e.index) +
           " steps=" + std::to_string(e.steps) +
           " pushes=" + std::to_string(e.pushes) +
           " success=" + std::to_string(e.success ? 1 : 0) +
           " progress=" + format_double(e.final_progress) + "\n";
  }
  return out;
}

namespace {

std::map<std::string, std::string> parse_kv(const std::string& line) {
  std::map<std::string, std::string> kv;
  std::istringstream in(line);
  std::string tok;
  in >> tok;  // record tag
  while (in >> tok) {
    const size_t eq = tok.find('=');
    if (eq == std::string::npos) continue;
    kv[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  return kv;
}

}  // namespace

EvalReport report_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("report ", 0) != 0)
    throw std::runtime_error("report: bad header");
  auto kv = parse_kv(line);
  EvalReport r;
  r.task = kv.at("task");
  r.variant = kv.at("variant");
  r.episodes = std::stoi(kv.at("episodes"));
  r.successes = std::stoi(kv.at("successes"));
  r.success_rate = std::stod(kv.at("success_rate"));
  r.avg_episode_length = std::stod(kv.at("avg_episode_length"));
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("episode ", 0) != 0)
      throw std::runtime_error("report: bad episode line");
    auto ekv = parse_kv(line);
    EpisodeRecord e;
    e.index = std::stoi(ekv.at("index"));
    e.steps = std::stoi(ekv.at("steps"));
    e.pushes = std::stoi(ekv.at("pushes"));
    e.success = ekv.at("success") == "1";
    e.final_progress = std::stod(ekv.at("progress"));
    r.records.push_back(e);
  }
  return r;
}

namespace {

char color_char(int c) {
  static const char* kChars = ".xRGBYOPSMUVW";
  if (c >= 0 && c < 13) return kChars[c];
  return '?';
}

// Palette for ppm frames, indexed by color id.
struct Rgb {
  int r, g, b;
};
Rgb color_rgb(int c) {
  switch (c) {
    case 0: return {30, 30, 30};
    case 1: return {128, 128, 128};  // grey clutter
    case 2: return {220, 50, 50};    // red
    case 3: return {50, 180, 60};    // green
    case 4: return {60, 90, 220};    // blue
    case 5: return {230, 210, 50};   // yellow
    case 6: return {240, 140, 40};   // orange
    case 7: return {160, 60, 200};   // purple
    case 8: return {90, 200, 200};
    case 9: return {200, 160, 120};
    case 10: return {240, 100, 180};
    case 11: return {120, 240, 140};
    case 12: return {150, 150, 240};
    default: return {255, 255, 255};
  }
}

std::string ascii_frame(const GridObservation& o, int index) {
  std::string out = "frame " + std::to_string(index) +
                    " held=" + std::to_string(o.held) + "\n";
  for (int y = 0; y < o.height; ++y) {
    std::string colors, heights;
    for (int x = 0; x < o.width; ++x) {
      const int i = o.idx(x, y);
      const int c = o.top_color[i];
      const int h = o.heights[i];
      // fixtures (height 0, color set) print lowercase
      char cc = color_char(c);
      if (h == 0 && c != 0) cc = static_cast<char>(std::tolower(cc));
      colors += cc;
      heights += h <= 9 ? static_cast<char>('0' + h) : '+';
    }
    out += colors + "  " + heights + "\n";
  }
  return out;
}

std::string ppm_frame(const GridObservation& o, int cell_pixels) {
  const int w = o.width * cell_pixels, h = o.height * cell_pixels;
  std::string out = "P3\n" + std::to_string(w) + " " + std::to_string(h) +
                    "\n255\n";
  for (int py = 0; py < h; ++py) {
    for (int px = 0; px < w; ++px) {
      const int x = px / cell_pixels, y = py / cell_pixels;
      const int i = y * o.width + x;
      Rgb rgb = color_rgb(o.top_color[i]);
      // shade by height: taller stacks brighter
      const double shade =
          o.heights[i] == 0 ? 1.0 : 0.55 + 0.15 * std::min(o.heights[i], 4);
      rgb.r = std::min(255, static_cast<int>(rgb.r * shade));
      rgb.g = std::min(255, static_cast<int>(rgb.g * shade));
      rgb.b = std::min(255, static_cast<int>(rgb.b * shade));
      out += std::to_string(rgb.r) + " " + std::to_string(rgb.g) + " " +
             std::to_string(rgb.b);
      out += (px + 1 == w) ? "\n" : " ";
    }
  }
  return out;
}

}  // namespace

RenderResult render_episode(std::istream& transitions, int cell_pixels) {
  RenderResult res;
  std::string line;
  int line_no = 0;
  int frame = 0;
  bool have_first = false;
  auto emit = [&](const GridObservation& o) {
    res.ascii_frames.push_back(ascii_frame(o, frame));
    res.ppm_frames.push_back(ppm_frame(o, cell_pixels));
    ++frame;
  };
  while (std::getline(transitions, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      if (line.rfind("obs ", 0) == 0) {
        // bare observation lines carry the initial state
        emit(obs_from_line(line));
        have_first = true;
        continue;
      }
      const Transition t = transition_from_line(line);
      if (!have_first) {
        emit(t.obs);
        have_first = true;
      }
      emit(t.next_obs);
    } catch (const std::exception& e) {
      throw std::runtime_error("render: corrupt log line " +
                               std::to_string(line_no) + ": " + e.what());
    }
  }
  return res;
}

namespace {

struct ConfigField {
  std::string key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

template <typename T>
T parse_num(const std::string& s);

template <>
int parse_num<int>(const std::string& s) {
  return std::stoi(s);
}
template <>
double parse_num<double>(const std::string& s) {
  return std::stod(s);
}
template <>
uint64_t parse_num<uint64_t>(const std::string& s) {
  return std::stoull(s);
}

const std::vector<ConfigField>& config_fields() {
  static const std::vector<ConfigField> fields = [] {
    std::vector<ConfigField> f;
    auto add_str = [&f](const char* key, std::string RunConfig::* m) {
      f.push_back({key, [m](const RunConfig& c) { return c.*m; },
                   [m](RunConfig& c, const std::string& v) { c.*m = v; }});
    };
    auto add = [&f](const char* key, auto member_get, auto member_set) {
      using T = std::decay_t<decltype(member_get(std::declval<RunConfig&>()))>;
      f.push_back({key,
                   [member_get](const RunConfig& c) {
                     if constexpr (std::is_same_v<T, double>)
                       return format_double(member_get(const_cast<RunConfig&>(c)));
                     else
                       return std::to_string(member_get(const_cast<RunConfig&>(c)));
                   },
                   [member_set](RunConfig& c, const std::string& v) {
                     member_set(c, v);
                   }});
    };
#define NUM_FIELD(key, expr, type)                                         \
  add(                                                                     \
      key, [](RunConfig& c) -> type { return c.expr; },                    \
      [](RunConfig& c, const std::string& v) { c.expr = parse_num<type>(v); })

    add_str("task", &RunConfig::task);
    NUM_FIELD("grid_w", grid_w, int);
    NUM_FIELD("grid_h", grid_h, int);
    NUM_FIELD("n_additional", n_additional, int);
    NUM_FIELD("push_length", sim.push_length, int);
    NUM_FIELD("k_push", sim.k_push, int);
    NUM_FIELD("max_stack", sim.max_stack, int);
    NUM_FIELD("patch", scorer.patch, int);
    NUM_FIELD("hidden", scorer.hidden, int);
    NUM_FIELD("scorer_k_push", scorer.k_push, int);
    NUM_FIELD("k_pick", scorer.k_pick, int);
    NUM_FIELD("k_place", scorer.k_place, int);
    NUM_FIELD("n_colors", scorer.n_colors, int);
    NUM_FIELD("scorer_max_stack", scorer.max_stack, int);
    NUM_FIELD("sigma_x", seq.sigma_x, double);
    NUM_FIELD("sigma_y", seq.sigma_y, double);
    NUM_FIELD("seq_k_x", seq.k_x, int);
    NUM_FIELD("seq_k_y", seq.k_y, int);
    NUM_FIELD("gamma", seq.gamma, double);
    NUM_FIELD("kappa", seq.kappa, double);
    NUM_FIELD("bc_epochs", train.bc_epochs, int);
    NUM_FIELD("bc_lr", train.bc_lr, double);
    NUM_FIELD("demo_count", train.demo_count, int);
    NUM_FIELD("bc_val_demos", train.bc_val_demos, int);
    NUM_FIELD("hrl_epochs", train.hrl_epochs, int);
    NUM_FIELD("episodes_per_epoch", train.episodes_per_epoch, int);
    NUM_FIELD("hrl_lr", train.hrl_lr, double);
    NUM_FIELD("high_lr_scale", train.high_lr_scale, double);
    NUM_FIELD("eps_high", train.eps_high, double);
    NUM_FIELD("eps_push_start", train.eps_push_start, double);
    NUM_FIELD("eps_push_end", train.eps_push_end, double);
    NUM_FIELD("tau", train.tau, int);
    NUM_FIELD("batch", train.batch, int);
    NUM_FIELD("updates_per_episode", train.updates_per_episode, int);
    NUM_FIELD("grad_clip", train.grad_clip, double);
    NUM_FIELD("huber_delta", train.huber_delta, double);
    NUM_FIELD("validation_episodes", train.validation_episodes, int);
    NUM_FIELD("train_seed", train.train_seed, uint64_t);
    NUM_FIELD("val_seed", train.val_seed, uint64_t);
    NUM_FIELD("test_seed", train.test_seed, uint64_t);
    NUM_FIELD("eval_episodes", eval_episodes, int);
#undef NUM_FIELD
    return f;
  }();
  return fields;
}

}  // namespace

std::string config_to_text(const RunConfig& c) {
  std::string out;
  for (const ConfigField& f : config_fields())
    out += f.key + " " + f.get(c) + "\n";
  return out;
}

RunConfig config_from_text(const std::string& text) {
  RunConfig c;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key, value;
    if (!(ls >> key >> value))
      throw std::runtime_error("config: bad line " + std::to_string(line_no));
    bool found = false;
    for (const ConfigField& f : config_fields()) {
      if (f.key == key) {
        f.set(c, value);
        found = true;
        break;
      }
    }
    if (!found) throw std::runtime_error("config: unknown key '" + key + "'");
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_text(ss.str());
}

void save_config(const RunConfig& c, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << config_to_text(c);
}

}  // namespace hclm
