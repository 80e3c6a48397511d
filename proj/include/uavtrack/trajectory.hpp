#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "uavtrack/environment.hpp"
#include "uavtrack/reward.hpp"

namespace uavtrack::agent {

/// One evaluation step, written as a JSON object per line.
struct TrajectoryRecord {
  int t = 0;
  geometry::Point3 uav;
  geometry::Point2 target;
  env::Action action = env::Action::north;
  double reward = 0.0;
  reward::Branch branch = reward::Branch::not_visible;
  bool visible = false;
  std::optional<std::size_t> occluded_by;
  bool done = false;

  friend bool operator==(const TrajectoryRecord&, const TrajectoryRecord&) = default;
};

class TrajectoryParseError : public std::runtime_error {
 public:
  TrajectoryParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

std::string to_json_line(const TrajectoryRecord& record);
TrajectoryRecord parse_json_line(const std::string& line, std::size_t line_number = 1);

void write_trajectory(std::ostream& out, const std::vector<TrajectoryRecord>& records);
/// Blank lines are skipped; malformed lines throw TrajectoryParseError.
std::vector<TrajectoryRecord> read_trajectory(std::istream& in);

}  // namespace uavtrack::agent
