#pragma once

#include <filesystem>
#include <istream>
#include <ostream>
#include <string>

#include "wildgen/geo.hpp"
#include "wildgen/ingest.hpp"

namespace wildgen {

/// TrajectorySet CSV: header `traj_id,day_index,lon,lat`, day_index 0-based.
/// Trajectories are written with ids 0..n-1; numbers use the shortest
/// round-trip decimal form so files are byte-stable.
void write_trajectory_csv(std::ostream& out, const TrajectorySet& set);
TrajectorySet read_trajectory_csv(std::istream& in);

void write_trajectory_csv(const std::filesystem::path& path, const TrajectorySet& set);
TrajectorySet read_trajectory_csv(const std::filesystem::path& path);

/// Loads a corpus from either the TrajectorySet CSV or the raw track CSV
/// (detected from the header); raw tracks go through preprocess().
TrajectorySet load_corpus(const std::filesystem::path& path, const PreprocessOptions& options);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace wildgen
