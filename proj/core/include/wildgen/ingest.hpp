#pragma once

#include <cstdint>
#include <istream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "wildgen/geo.hpp"

namespace wildgen {

struct Fix {
  std::int64_t timestamp = 0;  // UTC seconds since the Unix epoch
  GeoPoint point;
};

struct RawTrack {
  std::string subject_id;
  std::vector<Fix> fixes;  // strictly increasing timestamps
};

/// Parses an ISO-8601 date-time ("2019-03-01T06:30:00Z", optional fraction
/// and +hh:mm offset, or a bare date) into UTC seconds. Throws on bad input.
std::int64_t parse_iso8601(const std::string& text);

/// Reads the track CSV (`subject_id,timestamp,lon,lat`). Rows are grouped by
/// subject and time-sorted; subjects are returned in lexicographic order.
std::vector<RawTrack> parse_tracks(std::istream& in);

struct MonthDay {
  unsigned month = 3;
  unsigned day = 1;
};

/// Parses "MM-DD".
MonthDay parse_month_day(const std::string& text);

struct PreprocessOptions {
  MonthDay window_start{3, 1};
  int window_len_days = 185;
  int max_gap_days = 7;
};

/// Daily resampling, seasonal clipping, per-year splitting and gap filling.
TrajectorySet preprocess(const std::vector<RawTrack>& tracks, const PreprocessOptions& options);

struct NormalizationParams {
  double scale = 1.0;  // divisor applied to every coordinate
};

/// n x 2m matrix, one trajectory per row, interleaved [lon_0, lat_0, lon_1, ...].
struct NormalizedMatrix {
  Eigen::MatrixXd values;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
};

struct Normalized {
  NormalizedMatrix matrix;
  NormalizationParams params;
};

inline constexpr double kDefaultNormalizationFactor = 0.3;

/// Flattens the set and divides by factor * max|coordinate|.
Normalized normalize(const TrajectorySet& set, double factor = kDefaultNormalizationFactor);

/// Flattening with an existing scale (used for held-out data).
NormalizedMatrix normalize_with(const TrajectorySet& set, const NormalizationParams& params);

TrajectorySet denormalize(const NormalizedMatrix& matrix, const NormalizationParams& params);

/// Interleaved flattening of one trajectory (no scaling).
Eigen::VectorXd flatten(const Trajectory& t);
Trajectory unflatten(const Eigen::Ref<const Eigen::VectorXd>& row, double scale = 1.0);

}  // namespace wildgen
