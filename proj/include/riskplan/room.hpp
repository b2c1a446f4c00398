#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace riskplan {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  Point2 operator+(const Point2& o) const { return {x + o.x, y + o.y}; }
  Point2 operator-(const Point2& o) const { return {x - o.x, y - o.y}; }
  Point2 operator*(double s) const { return {x * s, y * s}; }
  bool operator==(const Point2&) const = default;

  double norm() const { return std::hypot(x, y); }
  double squared_norm() const { return x * x + y * y; }
};

inline double distance(const Point2& a, const Point2& b) { return (a - b).norm(); }

/// Axis-aligned rectangle, closed on all sides.
struct Rect {
  double xmin = 0.0;
  double ymin = 0.0;
  double xmax = 0.0;
  double ymax = 0.0;

  bool contains(const Point2& p) const {
    return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax;
  }
  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
  Point2 center() const { return {0.5 * (xmin + xmax), 0.5 * (ymin + ymax)}; }
  Point2 clamp(const Point2& p) const;
};

struct NamedPoint {
  std::string id;
  Point2 position;
};

class LayoutError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Immutable room description. Goals are kept sorted by id so every
/// iteration over goals is in lexicographic order.
class RoomLayout {
 public:
  RoomLayout(Rect bounds, std::vector<Rect> obstacles, std::vector<Point2> supports,
             std::vector<NamedPoint> goals, std::vector<NamedPoint> initial_poses);

  const Rect& bounds() const { return bounds_; }
  const std::vector<Rect>& obstacles() const { return obstacles_; }
  const std::vector<Point2>& supports() const { return supports_; }
  const std::vector<NamedPoint>& goals() const { return goals_; }
  const std::vector<NamedPoint>& initial_poses() const { return initial_poses_; }

  std::vector<std::string> goal_ids() const;
  bool has_goal(const std::string& id) const;
  const Point2& goal(const std::string& id) const;
  const Point2& initial_pose(const std::string& name) const;

  /// Same room with one obstacle removed.
  RoomLayout without_obstacle(std::size_t index) const;

 private:
  Rect bounds_;
  std::vector<Rect> obstacles_;
  std::vector<Point2> supports_;
  std::vector<NamedPoint> goals_;
  std::vector<NamedPoint> initial_poses_;
};

struct Trajectory {
  std::vector<Point2> states;
  double dt = 0.4;

  std::size_t size() const { return states.size(); }
  const Point2& back() const { return states.back(); }
};

/// Euclidean distance to the closest support point, or `empty_value` when the
/// room has no supports.
double distance_to_nearest_support(const Point2& p, const RoomLayout& layout,
                                   double empty_value = std::numeric_limits<double>::infinity());

/// Closest support point, if any.
std::optional<Point2> nearest_support(const Point2& p, const RoomLayout& layout);

/// True iff p is within bounds and not inside (or on the edge of) any obstacle.
bool is_free(const Point2& p, const RoomLayout& layout);

/// Samples a->b at spacing <= step and checks every sample with is_free.
bool segment_free(const Point2& a, const Point2& b, const RoomLayout& layout, double step);

}  // namespace riskplan
