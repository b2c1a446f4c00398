#include "riskplan/patientgen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <queue>
#include <sstream>

#include "riskplan/rng.hpp"

namespace riskplan::patientgen {

namespace {

constexpr double kCheckStep = 0.02;

std::string fmt_point(const Point2& p) {
  std::ostringstream os;
  os << '(' << p.x << ", " << p.y << ')';
  return os.str();
}

bool in_inflated(const Point2& p, const RoomLayout& layout, double margin) {
  for (const auto& o : layout.obstacles()) {
    if (p.x >= o.xmin - margin && p.x <= o.xmax + margin && p.y >= o.ymin - margin && p.y <= o.ymax + margin) {
      return true;
    }
  }
  return false;
}

/// Pushes p out of any inflated obstacle through the nearest edge and clamps to bounds.
Point2 push_free(Point2 p, const RoomLayout& layout, double margin) {
  p = layout.bounds().clamp(p);
  for (int pass = 0; pass < 3; ++pass) {
    bool moved = false;
    for (const auto& o : layout.obstacles()) {
      const double xmin = o.xmin - margin, xmax = o.xmax + margin;
      const double ymin = o.ymin - margin, ymax = o.ymax + margin;
      if (p.x < xmin || p.x > xmax || p.y < ymin || p.y > ymax) continue;
      const double left = p.x - xmin, right = xmax - p.x, down = p.y - ymin, up = ymax - p.y;
      const double m = std::min({left, right, down, up});
      constexpr double kEps = 1e-6;
      if (m == left) p.x = xmin - kEps;
      else if (m == right) p.x = xmax + kEps;
      else if (m == down) p.y = ymin - kEps;
      else p.y = ymax + kEps;
      p = layout.bounds().clamp(p);
      moved = true;
    }
    if (!moved) break;
  }
  return p;
}

double route_length(const std::vector<Point2>& route) {
  double len = 0.0;
  for (std::size_t i = 1; i < route.size(); ++i) len += distance(route[i - 1], route[i]);
  return len;
}

/// Grid A* over cells whose centers clear the inflated obstacles, then
/// greedy string pulling.
std::vector<Point2> grid_route(const Point2& start, const Point2& goal, const RoomLayout& layout,
                               const PatientGenConfig& cfg) {
  const Rect& b = layout.bounds();
  const double res = cfg.grid_resolution;
  const int nx = std::max(1, static_cast<int>(std::floor(b.width() / res)));
  const int ny = std::max(1, static_cast<int>(std::floor(b.height() / res)));
  auto center = [&](int ix, int iy) {
    return Point2{b.xmin + (ix + 0.5) * b.width() / nx, b.ymin + (iy + 0.5) * b.height() / ny};
  };
  auto cell_free = [&](int ix, int iy) {
    const Point2 c = center(ix, iy);
    return is_free(c, layout) && !in_inflated(c, layout, cfg.clearance);
  };
  auto nearest_cell = [&](const Point2& p) {
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (int iy = 0; iy < ny; ++iy) {
      for (int ix = 0; ix < nx; ++ix) {
        const Point2 c = center(ix, iy);
        const double d = distance(c, p);
        if (d < best_d && cell_free(ix, iy) && segment_free(p, c, layout, kCheckStep)) {
          best_d = d;
          best = iy * nx + ix;
        }
      }
    }
    return best;
  };

  const int s = nearest_cell(start);
  const int g = nearest_cell(goal);
  if (s < 0 || g < 0) return {};

  std::vector<double> cost(static_cast<std::size_t>(nx * ny), std::numeric_limits<double>::infinity());
  std::vector<int> parent(static_cast<std::size_t>(nx * ny), -1);
  using Entry = std::pair<double, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  const Point2 gc = center(g % nx, g / nx);
  cost[static_cast<std::size_t>(s)] = 0.0;
  open.push({distance(center(s % nx, s / nx), gc), s});
  while (!open.empty()) {
    const auto [f, cur] = open.top();
    open.pop();
    if (cur == g) break;
    const int cx = cur % nx, cy = cur / nx;
    const Point2 cp = center(cx, cy);
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (!dx && !dy) continue;
        const int x = cx + dx, y = cy + dy;
        if (x < 0 || y < 0 || x >= nx || y >= ny || !cell_free(x, y)) continue;
        if (dx && dy && (!cell_free(cx + dx, cy) || !cell_free(cx, cy + dy))) continue;
        const int id = y * nx + x;
        const double c = cost[static_cast<std::size_t>(cur)] + distance(cp, center(x, y));
        if (c < cost[static_cast<std::size_t>(id)]) {
          cost[static_cast<std::size_t>(id)] = c;
          parent[static_cast<std::size_t>(id)] = cur;
          open.push({c + distance(center(x, y), gc), id});
        }
      }
    }
  }
  if (!std::isfinite(cost[static_cast<std::size_t>(g)])) return {};

  std::vector<Point2> raw{goal};
  for (int c = g; c >= 0; c = parent[static_cast<std::size_t>(c)]) raw.push_back(center(c % nx, c / nx));
  raw.push_back(start);
  std::reverse(raw.begin(), raw.end());

  std::vector<Point2> pulled{raw.front()};
  std::size_t i = 0;
  while (i + 1 < raw.size()) {
    std::size_t j = raw.size() - 1;
    while (j > i + 1 && !segment_free(raw[i], raw[j], layout, kCheckStep)) --j;
    pulled.push_back(raw[j]);
    i = j;
  }
  return pulled;
}

std::vector<Point2> route(const Point2& start, const Point2& goal, const RoomLayout& layout,
                          const PatientGenConfig& cfg) {
  if (segment_free(start, goal, layout, kCheckStep)) return {start, goal};
  return grid_route(start, goal, layout, cfg);
}

/// Points along `route` at arc-length spacing `spacing`, ending exactly at its end.
std::vector<Point2> walk(const std::vector<Point2>& route, double spacing) {
  std::vector<Point2> out{route.front()};
  const double total = route_length(route);
  const auto n = static_cast<std::size_t>(std::ceil(total / spacing - 1e-9));
  std::size_t seg = 1;
  double seg_start = 0.0;
  for (std::size_t k = 1; k < n; ++k) {
    const double s = static_cast<double>(k) * spacing;
    while (seg + 1 < route.size() && seg_start + distance(route[seg - 1], route[seg]) < s) {
      seg_start += distance(route[seg - 1], route[seg]);
      ++seg;
    }
    const double len = distance(route[seg - 1], route[seg]);
    const double u = len > 0.0 ? std::clamp((s - seg_start) / len, 0.0, 1.0) : 0.0;
    out.push_back(route[seg - 1] + (route[seg] - route[seg - 1]) * u);
  }
  if (distance(out.back(), route.back()) > 1e-12) out.push_back(route.back());
  return out;
}

bool feasible(const std::vector<Point2>& z, const RoomLayout& layout, double max_step) {
  for (std::size_t t = 1; t < z.size(); ++t) {
    if (distance(z[t - 1], z[t]) > max_step * (1.0 + 1e-9)) return false;
    if (!segment_free(z[t - 1], z[t], layout, kCheckStep)) return false;
  }
  return true;
}

/// Projects interior points back onto the constraint set: bounds, inflated
/// obstacles, and the per-step velocity limit relative to the predecessor.
void project(std::vector<Point2>& z, const RoomLayout& layout, const PatientGenConfig& cfg) {
  for (std::size_t t = 1; t + 1 < z.size(); ++t) {
    z[t] = push_free(z[t], layout, cfg.clearance);
    const Point2 d = z[t] - z[t - 1];
    const double len = d.norm();
    if (len > cfg.max_step) z[t] = z[t - 1] + d * (cfg.max_step / len);
  }
}

double path_cost(const std::vector<Point2>& z, const Point2& goal, const RoomLayout& layout,
                 const PatientGenConfig& cfg) {
  Trajectory t{z, cfg.dt};
  return trajectory_cost(t, goal, layout, cfg);
}

/// Gradient of path_cost w.r.t. every state (entries 0 and back are ignored by the caller).
std::vector<Point2> path_gradient(const std::vector<Point2>& z, const Point2& goal, const RoomLayout& layout,
                                  const PatientGenConfig& cfg) {
  const std::size_t n = z.size();
  std::vector<Point2> grad(n);
  // The final state is pinned at the goal, so padding never enters the gradient.
  for (std::size_t t = 1; t < n; ++t) {
    Point2 g = (z[t] - goal) * 2.0;
    if (const auto s = nearest_support(z[t], layout)) g = g + (z[t] - *s) * (2.0 * cfg.support_weight);
    grad[t] = g;
  }
  if (cfg.smoothing > 0.0) {
    for (std::size_t t = 1; t + 1 < n; ++t) {
      const Point2 acc = z[t + 1] - z[t] * 2.0 + z[t - 1];
      const Point2 g = acc * (2.0 * cfg.smoothing);
      grad[t - 1] = grad[t - 1] + g;
      grad[t] = grad[t] - g * 2.0;
      grad[t + 1] = grad[t + 1] + g;
    }
  }
  return grad;
}

std::vector<Point2> descend(std::vector<Point2> z, const Point2& goal, const RoomLayout& layout,
                            const PatientGenConfig& cfg) {
  double cost = path_cost(z, goal, layout, cfg);
  double step = 0.05;
  for (std::size_t it = 0; it < cfg.iterations && step > 1e-7; ++it) {
    const auto grad = path_gradient(z, goal, layout, cfg);
    double gmax = 0.0;
    for (std::size_t t = 1; t + 1 < z.size(); ++t) gmax = std::max(gmax, grad[t].norm());
    if (gmax < 1e-9) break;
    bool accepted = false;
    while (step > 1e-7) {
      auto trial = z;
      // Normalized step: the largest waypoint move is `step` meters.
      for (std::size_t t = 1; t + 1 < trial.size(); ++t) trial[t] = trial[t] - grad[t] * (step / gmax);
      project(trial, layout, cfg);
      if (feasible(trial, layout, cfg.max_step)) {
        const double c = path_cost(trial, goal, layout, cfg);
        if (c < cost - 1e-12) {
          z = std::move(trial);
          cost = c;
          accepted = true;
          step *= 1.5;
          break;
        }
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }
  return z;
}

void trim_goal_tail(std::vector<Point2>& z, const Point2& goal) {
  while (z.size() >= 2 && distance(z[z.size() - 2], goal) <= 1e-9) z.pop_back();
}

}  // namespace

void PatientGenConfig::validate() const {
  if (horizon < 1) throw std::invalid_argument("patientgen: horizon must be >= 1");
  if (!(max_step > 0.0)) throw std::invalid_argument("patientgen: max_step must be positive");
  if (!(support_weight >= 0.0) || !(smoothing >= 0.0)) {
    throw std::invalid_argument("patientgen: weights must be nonnegative");
  }
  if (!(path_slack >= 1.0)) throw std::invalid_argument("patientgen: path_slack must be >= 1");
  if (!(grid_resolution > 0.0)) throw std::invalid_argument("patientgen: grid_resolution must be positive");
  if (!(waypoint_noise >= 0.0) || !(start_jitter >= 0.0) || !(observation_noise >= 0.0)) {
    throw std::invalid_argument("patientgen: noise levels must be nonnegative");
  }
}

double trajectory_cost(const Trajectory& traj, const Point2& goal, const RoomLayout& layout,
                       const PatientGenConfig& cfg) {
  const auto& z = traj.states;
  if (z.empty()) return 0.0;
  const std::size_t h = std::max(cfg.horizon, z.size() - 1);
  auto at = [&](std::size_t t) -> const Point2& { return z[std::min(t, z.size() - 1)]; };
  double j = 0.0;
  for (std::size_t t = 1; t <= h; ++t) {
    const Point2& p = at(t);
    const double d = distance_to_nearest_support(p, layout, 0.0);
    j += (p - goal).squared_norm() + cfg.support_weight * d * d;
  }
  if (cfg.smoothing > 0.0) {
    for (std::size_t t = 1; t + 1 < z.size(); ++t) {
      j += cfg.smoothing * (z[t + 1] - z[t] * 2.0 + z[t - 1]).squared_norm();
    }
  }
  return j;
}

Trajectory straight_baseline(const Point2& start, const Point2& goal, const RoomLayout& layout,
                             const PatientGenConfig& cfg) {
  if (distance(start, goal) <= 1e-12) return {{start}, cfg.dt};
  const auto r = route(start, goal, layout, cfg);
  if (r.empty()) {
    throw GenerationError("no collision-free route from " + fmt_point(start) + " to " + fmt_point(goal));
  }
  return {walk(r, cfg.max_step), cfg.dt};
}

Trajectory generate_to(const Point2& start, const Point2& goal, const RoomLayout& layout,
                       const PatientGenConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  if (!is_free(start, layout)) throw GenerationError("start " + fmt_point(start) + " is not free");
  if (!is_free(goal, layout)) throw GenerationError("goal " + fmt_point(goal) + " is not free");
  if (distance(start, goal) <= 1e-12) return {{start}, cfg.dt};

  const Trajectory base = straight_baseline(start, goal, layout, cfg);
  std::vector<Point2> z = base.states;
  const auto budget = static_cast<std::size_t>(std::ceil(cfg.path_slack * static_cast<double>(z.size()))) + 2;
  while (z.size() < budget) z.push_back(goal);

  z = descend(std::move(z), goal, layout, cfg);
  trim_goal_tail(z, goal);
  if (trajectory_cost({z, cfg.dt}, goal, layout, cfg) > trajectory_cost(base, goal, layout, cfg)) z = base.states;

  if (cfg.waypoint_noise > 0.0 && z.size() > 2) {
    Rng rng(derive_seed(seed, {0x6e6f697365ULL}));
    std::normal_distribution<double> normal(0.0, 1.0);
    // Smooth lateral bend plus small white noise, interior points only.
    const double a = normal(rng), b = normal(rng), c = normal(rng), d = normal(rng);
    auto noisy = z;
    const double n = static_cast<double>(z.size() - 1);
    for (std::size_t t = 1; t + 1 < z.size(); ++t) {
      const double s = static_cast<double>(t) / n;
      const double bend_x = a * std::sin(std::numbers::pi * s) + b * std::sin(2.0 * std::numbers::pi * s);
      const double bend_y = c * std::sin(std::numbers::pi * s) + d * std::sin(2.0 * std::numbers::pi * s);
      noisy[t] = noisy[t] + Point2{bend_x + 0.5 * normal(rng), bend_y + 0.5 * normal(rng)} * cfg.waypoint_noise;
    }
    project(noisy, layout, cfg);
    // The last interior point may now be out of reach of the goal; walk in.
    std::vector<Point2> fixed(noisy.begin(), noisy.end() - 1);
    while (distance(fixed.back(), goal) > cfg.max_step) {
      const Point2 dir = goal - fixed.back();
      fixed.push_back(fixed.back() + dir * (cfg.max_step / dir.norm()));
    }
    fixed.push_back(goal);
    if (feasible(fixed, layout, cfg.max_step)) z = std::move(fixed);
  }
  return {std::move(z), cfg.dt};
}

Trajectory generate(const Point2& start, const std::string& goal, const RoomLayout& layout,
                    const PatientGenConfig& cfg, std::uint64_t seed) {
  try {
    return generate_to(start, layout.goal(goal), layout, cfg, seed);
  } catch (const GenerationError& e) {
    throw GenerationError("cannot generate path from " + fmt_point(start) + " to goal '" + goal + "': " + e.what());
  }
}

Dataset generate_dataset(const RoomLayout& layout, std::size_t n_per_pair, const PatientGenConfig& cfg,
                         std::uint64_t seed) {
  if (n_per_pair < 1) throw std::invalid_argument("generate_dataset: n_per_pair must be >= 1");
  Dataset out;
  std::size_t traj_id = 0;
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t pi = 0; pi < layout.initial_poses().size(); ++pi) {
    const auto& pose = layout.initial_poses()[pi];
    for (const auto& goal : layout.goals()) {
      for (std::size_t r = 0; r < n_per_pair; ++r, ++traj_id) {
        const std::uint64_t s = derive_seed(seed, {fnv1a(pose.id), fnv1a(goal.id), r});
        Point2 start = pose.position;
        if (cfg.start_jitter > 0.0) {
          Rng rng(derive_seed(s, {0x6a6974ULL}));
          const Point2 jittered = start + Point2{normal(rng), normal(rng)} * cfg.start_jitter;
          if (is_free(jittered, layout) && segment_free(start, jittered, layout, kCheckStep)) start = jittered;
        }
        std::vector<Point2> z = generate(start, goal.id, layout, cfg, s).states;
        if (cfg.observation_noise > 0.0) {
          Rng rng(derive_seed(s, {0x6f6273ULL}));
          const double cap = 3.0 * cfg.observation_noise;
          for (std::size_t t = 1; t + 1 < z.size(); ++t) {
            Point2 e = Point2{normal(rng), normal(rng)} * cfg.observation_noise;
            if (e.norm() > cap) e = e * (cap / e.norm());
            if (is_free(z[t] + e, layout)) z[t] = z[t] + e;
          }
        }
        for (std::size_t t = 0; t + 1 < z.size(); ++t) out.push_back({z[t], z[t + 1] - z[t], goal.id, traj_id, t});
      }
    }
  }
  return out;
}

}  // namespace riskplan::patientgen

namespace riskplan {

namespace {

std::string num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

void write_dataset_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset file '" + path + "'");
  out << "x,y,dx,dy,goal,trajectory,t\n";
  for (const auto& s : data) {
    out << num(s.state.x) << ',' << num(s.state.y) << ',' << num(s.delta.x) << ',' << num(s.delta.y) << ','
        << s.goal << ',' << s.trajectory << ',' << s.t << '\n';
  }
}

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read dataset file '" + path + "'");
  std::string line;
  std::getline(in, line);
  Dataset out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 7) throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected 7 fields");
    TrainingSample s;
    s.state = {std::stod(f[0]), std::stod(f[1])};
    s.delta = {std::stod(f[2]), std::stod(f[3])};
    s.goal = f[4];
    s.trajectory = std::stoull(f[5]);
    s.t = std::stoull(f[6]);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace riskplan
