#include "uavtrack/trajectory.hpp"

#include <istream>
#include <ostream>

#include <json.hpp>

namespace uavtrack::agent {

namespace {

using nlohmann::json;

env::Action action_from_name(const std::string& name) {
  for (auto a : env::kAllActions) {
    if (env::to_string(a) == name) return a;
  }
  throw std::invalid_argument("unknown action '" + name + "'");
}

reward::Branch branch_from_name(const std::string& name) {
  for (auto b : {reward::Branch::collision, reward::Branch::intersection, reward::Branch::visible,
                 reward::Branch::not_visible}) {
    if (reward::to_string(b) == name) return b;
  }
  throw std::invalid_argument("unknown branch '" + name + "'");
}

}  // namespace

std::string to_json_line(const TrajectoryRecord& r) {
  json j;
  j["t"] = r.t;
  j["uav_x"] = r.uav.x;
  j["uav_y"] = r.uav.y;
  j["uav_z"] = r.uav.z;
  j["target_x"] = r.target.x;
  j["target_y"] = r.target.y;
  j["action"] = std::string(env::to_string(r.action));
  j["reward"] = r.reward;
  j["branch"] = std::string(reward::to_string(r.branch));
  j["visible"] = r.visible;
  j["occluded_by"] = r.occluded_by ? json(*r.occluded_by) : json(nullptr);
  j["done"] = r.done;
  return j.dump();
}

TrajectoryRecord parse_json_line(const std::string& line, std::size_t line_number) {
  try {
    const json j = json::parse(line);
    TrajectoryRecord r;
    r.t = j.at("t").get<int>();
    r.uav = {j.at("uav_x").get<double>(), j.at("uav_y").get<double>(),
             j.at("uav_z").get<double>()};
    r.target = {j.at("target_x").get<double>(), j.at("target_y").get<double>()};
    r.action = action_from_name(j.at("action").get<std::string>());
    r.reward = j.at("reward").get<double>();
    r.branch = branch_from_name(j.at("branch").get<std::string>());
    r.visible = j.at("visible").get<bool>();
    if (!j.at("occluded_by").is_null()) r.occluded_by = j["occluded_by"].get<std::size_t>();
    r.done = j.at("done").get<bool>();
    return r;
  } catch (const json::exception& e) {
    throw TrajectoryParseError(line_number, e.what());
  } catch (const std::invalid_argument& e) {
    throw TrajectoryParseError(line_number, e.what());
  }
}

void write_trajectory(std::ostream& out, const std::vector<TrajectoryRecord>& records) {
  for (const auto& r : records) out << to_json_line(r) << '\n';
}

std::vector<TrajectoryRecord> read_trajectory(std::istream& in) {
  std::vector<TrajectoryRecord> records;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    records.push_back(parse_json_line(line, number));
  }
  return records;
}

}  // namespace uavtrack::agent
