#include "wildgen/trajectory_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include "csv.hpp"
#include "wildgen/error.hpp"
#include "wildgen/ingest.hpp"

namespace wildgen {

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) fail(ErrorCode::kIo, "failed to format number");
  return std::string(buf, ptr);
}

void write_trajectory_csv(std::ostream& out, const TrajectorySet& set) {
  out << "traj_id,day_index,lon,lat\n";
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto& pts = set[i].points;
    for (std::size_t d = 0; d < pts.size(); ++d) {
      out << i << ',' << d << ',' << format_double(pts[d].lon) << ',' << format_double(pts[d].lat) << '\n';
    }
  }
}

TrajectorySet read_trajectory_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::kParse, "trajectory CSV is empty (missing header)");
  const auto header = detail::split_csv(line);
  if (header.size() < 4 || header[0] != "traj_id" || header[1] != "day_index" || header[2] != "lon" ||
      header[3] != "lat") {
    fail(ErrorCode::kParse, "trajectory CSV header must be traj_id,day_index,lon,lat");
  }

  std::vector<std::string> order;
  std::unordered_map<std::string, std::map<long long, GeoPoint>> groups;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_csv(line);
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (fields.size() < 4) fail(ErrorCode::kParse, where + "expected 4 fields");
    const auto day = detail::parse_int<long long>(fields[1]);
    const auto lon = detail::parse_double(fields[2]);
    const auto lat = detail::parse_double(fields[3]);
    if (!day || *day < 0) fail(ErrorCode::kParse, where + "bad day_index");
    if (!lon || !lat || !std::isfinite(*lon) || !std::isfinite(*lat)) fail(ErrorCode::kParse, where + "bad number");

    std::string id(fields[0]);
    auto [it, inserted] = groups.try_emplace(id);
    if (inserted) order.push_back(id);
    if (!it->second.emplace(*day, GeoPoint{*lon, *lat}).second) {
      fail(ErrorCode::kParse, where + "duplicate day_index for trajectory '" + id + "'");
    }
  }

  if (order.empty()) return TrajectorySet{};
  const std::size_t horizon = groups[order.front()].size();
  TrajectorySet set(horizon);
  for (const auto& id : order) {
    const auto& days = groups[id];
    if (days.size() != horizon || days.rbegin()->first != static_cast<long long>(horizon) - 1) {
      fail(ErrorCode::kParse, "trajectory '" + id + "' does not cover days 0.." + std::to_string(horizon - 1));
    }
    Trajectory t;
    t.points.reserve(horizon);
    for (const auto& [d, p] : days) t.points.push_back(p);
    set.push_back(std::move(t));
  }
  return set;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot open '" + path.string() + "' for writing");
  out << contents;
  if (!out) fail(ErrorCode::kIo, "failed writing '" + path.string() + "'");
}

void write_trajectory_csv(const std::filesystem::path& path, const TrajectorySet& set) {
  std::ostringstream ss;
  write_trajectory_csv(ss, set);
  write_file(path, ss.str());
}

TrajectorySet read_trajectory_csv(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  return read_trajectory_csv(in);
}

TrajectorySet load_corpus(const std::filesystem::path& path, const PreprocessOptions& options) {
  std::istringstream in(read_file(path));
  std::string header;
  std::getline(in, header);
  in.clear();
  in.seekg(0);
  if (header.rfind("traj_id", 0) == 0) return read_trajectory_csv(in);
  return preprocess(parse_tracks(in), options);
}

}  // namespace wildgen
