#include "riskplan/room.hpp"

#include <algorithm>
#include <set>

namespace riskplan {

Point2 Rect::clamp(const Point2& p) const {
  return {std::clamp(p.x, xmin, xmax), std::clamp(p.y, ymin, ymax)};
}

namespace {

bool finite(const Point2& p) { return std::isfinite(p.x) && std::isfinite(p.y); }

void check_placement(const Rect& bounds, const std::vector<Rect>& obstacles, const Point2& p,
                     const std::string& what) {
  if (!finite(p)) throw LayoutError(what + " has non-finite coordinates");
  if (!bounds.contains(p)) throw LayoutError(what + " lies outside the room bounds");
  for (const auto& o : obstacles) {
    if (o.contains(p)) throw LayoutError(what + " lies inside an obstacle");
  }
}

}  // namespace

RoomLayout::RoomLayout(Rect bounds, std::vector<Rect> obstacles, std::vector<Point2> supports,
                       std::vector<NamedPoint> goals, std::vector<NamedPoint> initial_poses)
    : bounds_(bounds),
      obstacles_(std::move(obstacles)),
      supports_(std::move(supports)),
      goals_(std::move(goals)),
      initial_poses_(std::move(initial_poses)) {
  if (!(bounds_.xmax > bounds_.xmin && bounds_.ymax > bounds_.ymin)) {
    throw LayoutError("room bounds must have positive extent");
  }
  for (const auto& o : obstacles_) {
    if (!(o.xmax > o.xmin && o.ymax > o.ymin)) throw LayoutError("obstacle with non-positive extent");
  }
  if (goals_.empty()) throw LayoutError("layout needs at least one goal");

  for (std::size_t i = 0; i < supports_.size(); ++i) {
    check_placement(bounds_, obstacles_, supports_[i], "support " + std::to_string(i));
  }
  std::set<std::string> ids;
  for (const auto& g : goals_) {
    if (!ids.insert(g.id).second) throw LayoutError("duplicate goal id '" + g.id + "'");
    check_placement(bounds_, obstacles_, g.position, "goal '" + g.id + "'");
  }
  std::set<std::string> names;
  for (const auto& p : initial_poses_) {
    if (!names.insert(p.id).second) throw LayoutError("duplicate initial pose '" + p.id + "'");
    check_placement(bounds_, obstacles_, p.position, "initial pose '" + p.id + "'");
  }
  std::sort(goals_.begin(), goals_.end(),
            [](const NamedPoint& a, const NamedPoint& b) { return a.id < b.id; });
}

std::vector<std::string> RoomLayout::goal_ids() const {
  std::vector<std::string> out;
  out.reserve(goals_.size());
  for (const auto& g : goals_) out.push_back(g.id);
  return out;
}

bool RoomLayout::has_goal(const std::string& id) const {
  return std::any_of(goals_.begin(), goals_.end(), [&](const NamedPoint& g) { return g.id == id; });
}

const Point2& RoomLayout::goal(const std::string& id) const {
  for (const auto& g : goals_) {
    if (g.id == id) return g.position;
  }
  throw LayoutError("unknown goal '" + id + "'");
}

const Point2& RoomLayout::initial_pose(const std::string& name) const {
  for (const auto& p : initial_poses_) {
    if (p.id == name) return p.position;
  }
  throw LayoutError("unknown initial pose '" + name + "'");
}

RoomLayout RoomLayout::without_obstacle(std::size_t index) const {
  auto obstacles = obstacles_;
  if (index < obstacles.size()) obstacles.erase(obstacles.begin() + static_cast<std::ptrdiff_t>(index));
  return RoomLayout(bounds_, std::move(obstacles), supports_, goals_, initial_poses_);
}

double distance_to_nearest_support(const Point2& p, const RoomLayout& layout, double empty_value) {
  if (layout.supports().empty()) return empty_value;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : layout.supports()) best = std::min(best, distance(p, s));
  return best;
}

std::optional<Point2> nearest_support(const Point2& p, const RoomLayout& layout) {
  std::optional<Point2> best;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& s : layout.supports()) {
    const double d = distance(p, s);
    if (d < best_d) {
      best_d = d;
      best = s;
    }
  }
  return best;
}

bool is_free(const Point2& p, const RoomLayout& layout) {
  if (!layout.bounds().contains(p)) return false;
  for (const auto& o : layout.obstacles()) {
    if (o.contains(p)) return false;
  }
  return true;
}

bool segment_free(const Point2& a, const Point2& b, const RoomLayout& layout, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("segment_free: step must be positive");
  const double len = distance(a, b);
  const auto n = static_cast<std::size_t>(std::ceil(len / step));
  if (n == 0) return is_free(a, layout);
  for (std::size_t i = 0; i <= n; ++i) {
    const double s = static_cast<double>(i) / static_cast<double>(n);
    if (!is_free(a + (b - a) * s, layout)) return false;
  }
  return true;
}

}  // namespace riskplan
