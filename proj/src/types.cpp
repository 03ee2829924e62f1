#include "hclm/types.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace hclm {

bool valid_action(const Action& a, int width, int height, int k_push,
                  int k_pick, int k_place) {
  auto low_ok = [&](const LowAction& l, int k) {
    return l.x >= 0 && l.x < width && l.y >= 0 && l.y < height &&
           l.theta >= 0 && l.theta < k;
  };
  if (a.high == HighAction::Push) {
    return !a.place.has_value() && low_ok(a.pick_or_push, k_push);
  }
  return a.place.has_value() && low_ok(a.pick_or_push, k_pick) &&
         low_ok(*a.place, k_place);
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

int read_int(std::istringstream& in, const char* what) {
  int v;
  if (!(in >> v)) throw std::runtime_error(std::string("parse error: ") + what);
  return v;
}

double read_double(std::istringstream& in, const char* what) {
  double v;
  if (!(in >> v)) throw std::runtime_error(std::string("parse error: ") + what);
  return v;
}

void expect_tag(std::istringstream& in, const std::string& tag) {
  std::string s;
  if (!(in >> s) || s != tag)
    throw std::runtime_error("parse error: expected tag '" + tag + "'");
}

void append_obs(std::string& out, const GridObservation& o) {
  out += "obs ";
  out += std::to_string(o.width);
  out += ' ';
  out += std::to_string(o.height);
  out += ' ';
  out += std::to_string(o.held);
  for (int v : o.heights) {
    out += ' ';
    out += std::to_string(v);
  }
  for (int v : o.top_color) {
    out += ' ';
    out += std::to_string(v);
  }
}

GridObservation read_obs(std::istringstream& in) {
  expect_tag(in, "obs");
  GridObservation o;
  o.width = read_int(in, "obs width");
  o.height = read_int(in, "obs height");
  o.held = read_int(in, "obs held");
  if (o.width < 0 || o.height < 0)
    throw std::runtime_error("parse error: negative obs dims");
  const int n = o.width * o.height;
  o.heights.resize(n);
  o.top_color.resize(n);
  for (int i = 0; i < n; ++i) o.heights[i] = read_int(in, "obs heights");
  for (int i = 0; i < n; ++i) o.top_color[i] = read_int(in, "obs colors");
  return o;
}

void append_action(std::string& out, const Action& a) {
  out += "act ";
  out += std::to_string(static_cast<int>(a.high));
  out += ' ';
  out += std::to_string(a.pick_or_push.x);
  out += ' ';
  out += std::to_string(a.pick_or_push.y);
  out += ' ';
  out += std::to_string(a.pick_or_push.theta);
  out += ' ';
  out += std::to_string(a.place.has_value() ? 1 : 0);
  const LowAction pl = a.place.value_or(LowAction{});
  out += ' ';
  out += std::to_string(pl.x);
  out += ' ';
  out += std::to_string(pl.y);
  out += ' ';
  out += std::to_string(pl.theta);
  out += ' ';
  out += std::to_string(a.exploratory ? 1 : 0);
}

Action read_action(std::istringstream& in) {
  expect_tag(in, "act");
  Action a;
  a.high = static_cast<HighAction>(read_int(in, "act high"));
  a.pick_or_push.x = read_int(in, "act x");
  a.pick_or_push.y = read_int(in, "act y");
  a.pick_or_push.theta = read_int(in, "act theta");
  const int has_place = read_int(in, "act has_place");
  LowAction pl;
  pl.x = read_int(in, "act place x");
  pl.y = read_int(in, "act place y");
  pl.theta = read_int(in, "act place theta");
  if (has_place) a.place = pl;
  a.exploratory = read_int(in, "act exploratory") != 0;
  return a;
}

}  // namespace

std::string to_line(const GridObservation& obs) {
  std::string out;
  append_obs(out, obs);
  return out;
}

GridObservation obs_from_line(const std::string& line) {
  std::istringstream in(line);
  return read_obs(in);
}

std::string to_line(const Transition& t) {
  std::string out = "transition ";
  append_action(out, t.action);
  out += ' ';
  out += format_double(t.reward);
  out += ' ';
  out += format_double(t.progress_delta);
  out += ' ';
  out += std::to_string(t.done ? 1 : 0);
  out += ' ';
  out += std::to_string(t.push_success ? 1 : 0);
  out += ' ';
  out += std::to_string(t.pickplace_success ? 1 : 0);
  out += ' ';
  append_obs(out, t.obs);
  out += ' ';
  append_obs(out, t.next_obs);
  return out;
}

Transition transition_from_line(const std::string& line) {
  std::istringstream in(line);
  expect_tag(in, "transition");
  Transition t;
  t.action = read_action(in);
  t.reward = read_double(in, "reward");
  t.progress_delta = read_double(in, "progress_delta");
  t.done = read_int(in, "done") != 0;
  t.push_success = read_int(in, "push_success") != 0;
  t.pickplace_success = read_int(in, "pickplace_success") != 0;
  t.obs = read_obs(in);
  t.next_obs = read_obs(in);
  return t;
}

}  // namespace hclm
