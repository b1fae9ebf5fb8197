#include "wildgen/ingest.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <string>

#include "csv.hpp"
#include "wildgen/error.hpp"

namespace wildgen {
namespace {

using detail::parse_double;
using detail::parse_int;

constexpr std::int64_t kSecondsPerDay = 86400;

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{m}, day{d}};
  return sys_days{ymd}.time_since_epoch().count();
}

int year_of_day(std::int64_t day_number) {
  using namespace std::chrono;
  const year_month_day ymd{sys_days{days{day_number}}};
  return static_cast<int>(ymd.year());
}

[[noreturn]] void bad_timestamp(const std::string& text) {
  fail(ErrorCode::kParse, "bad timestamp '" + text + "'");
}

template <typename Int>
Int digits(const std::string& text, std::size_t pos, std::size_t count) {
  if (pos + count > text.size()) bad_timestamp(text);
  const auto v = parse_int<Int>(std::string_view(text).substr(pos, count));
  if (!v) bad_timestamp(text);
  return *v;
}

}  // namespace

std::int64_t parse_iso8601(const std::string& text) {
  // YYYY-MM-DD[(T| )hh:mm[:ss[.fff]]][Z|(+|-)hh[:]mm]
  if (text.size() < 10 || text[4] != '-' || text[7] != '-') bad_timestamp(text);
  const int y = digits<int>(text, 0, 4);
  const unsigned mo = digits<unsigned>(text, 5, 2);
  const unsigned d = digits<unsigned>(text, 8, 2);
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{mo}, std::chrono::day{d}};
  if (!ymd.ok()) bad_timestamp(text);
  std::int64_t seconds = days_from_civil(y, mo, d) * kSecondsPerDay;

  std::size_t pos = 10;
  if (pos == text.size()) return seconds;
  if (text[pos] != 'T' && text[pos] != ' ') bad_timestamp(text);
  ++pos;
  const int hh = digits<int>(text, pos, 2);
  if (pos + 2 >= text.size() || text[pos + 2] != ':') bad_timestamp(text);
  const int mm = digits<int>(text, pos + 3, 2);
  pos += 5;
  int ss = 0;
  if (pos < text.size() && text[pos] == ':') {
    ss = digits<int>(text, pos + 1, 2);
    pos += 3;
    if (pos < text.size() && (text[pos] == '.' || text[pos] == ',')) {
      ++pos;
      const std::size_t frac_start = pos;
      while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
      if (pos == frac_start) bad_timestamp(text);
    }
  }
  if (hh > 23 || mm > 59 || ss > 60) bad_timestamp(text);
  seconds += hh * 3600 + mm * 60 + ss;

  if (pos == text.size()) return seconds;
  if (text[pos] == 'Z' && pos + 1 == text.size()) return seconds;
  if (text[pos] == '+' || text[pos] == '-') {
    const int sign = text[pos] == '+' ? 1 : -1;
    const int oh = digits<int>(text, pos + 1, 2);
    std::size_t mpos = pos + 3;
    if (mpos < text.size() && text[mpos] == ':') ++mpos;
    const int om = digits<int>(text, mpos, 2);
    if (mpos + 2 != text.size() || oh > 23 || om > 59) bad_timestamp(text);
    return seconds - sign * (oh * 3600 + om * 60);
  }
  bad_timestamp(text);
}

std::vector<RawTrack> parse_tracks(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) fail(ErrorCode::kParse, "track CSV is empty (missing header)");
  ++line_no;

  const auto header = detail::split_csv(line);
  int col_subject = -1, col_time = -1, col_lon = -1, col_lat = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    std::string_view h = header[i];
    if (i == 0 && h.size() >= 3 && h.substr(0, 3) == "\xEF\xBB\xBF") h.remove_prefix(3);
    if (h == "subject_id") col_subject = static_cast<int>(i);
    else if (h == "timestamp") col_time = static_cast<int>(i);
    else if (h == "lon") col_lon = static_cast<int>(i);
    else if (h == "lat") col_lat = static_cast<int>(i);
  }
  if (col_subject < 0 || col_time < 0 || col_lon < 0 || col_lat < 0) {
    fail(ErrorCode::kParse, "track CSV header must contain subject_id,timestamp,lon,lat");
  }
  const std::size_t needed =
      static_cast<std::size_t>(std::max({col_subject, col_time, col_lon, col_lat})) + 1;

  std::map<std::string, std::vector<Fix>> groups;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_csv(line);
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (fields.size() < needed) fail(ErrorCode::kParse, where + "expected at least " + std::to_string(needed) + " fields");

    Fix fix;
    try {
      fix.timestamp = parse_iso8601(std::string(fields[static_cast<std::size_t>(col_time)]));
    } catch (const Error& e) {
      fail(ErrorCode::kParse, where + e.what());
    }
    const auto lon = parse_double(fields[static_cast<std::size_t>(col_lon)]);
    const auto lat = parse_double(fields[static_cast<std::size_t>(col_lat)]);
    if (!lon || !lat) fail(ErrorCode::kParse, where + "bad number");
    if (!std::isfinite(*lon) || *lon < -180.0 || *lon > 180.0) fail(ErrorCode::kParse, where + "longitude out of range");
    if (!std::isfinite(*lat) || *lat < -90.0 || *lat > 90.0) fail(ErrorCode::kParse, where + "latitude out of range");
    fix.point = {*lon, *lat};

    const std::string_view subject = fields[static_cast<std::size_t>(col_subject)];
    if (subject.empty()) fail(ErrorCode::kParse, where + "empty subject_id");
    groups[std::string(subject)].push_back(fix);
  }

  std::vector<RawTrack> tracks;
  tracks.reserve(groups.size());
  for (auto& [subject, fixes] : groups) {
    std::stable_sort(fixes.begin(), fixes.end(),
                     [](const Fix& a, const Fix& b) { return a.timestamp < b.timestamp; });
    for (std::size_t i = 1; i < fixes.size(); ++i) {
      if (fixes[i].timestamp == fixes[i - 1].timestamp) {
        fail(ErrorCode::kParse, "duplicate fix for subject '" + subject + "' at timestamp " +
                                    std::to_string(fixes[i].timestamp));
      }
    }
    tracks.push_back({subject, std::move(fixes)});
  }
  return tracks;
}

MonthDay parse_month_day(const std::string& text) {
  const auto dash = text.find('-');
  if (dash == std::string::npos) fail(ErrorCode::kParse, "window start must be MM-DD, got '" + text + "'");
  const auto m = parse_int<unsigned>(std::string_view(text).substr(0, dash));
  const auto d = parse_int<unsigned>(std::string_view(text).substr(dash + 1));
  if (!m || !d) fail(ErrorCode::kParse, "window start must be MM-DD, got '" + text + "'");
  // 2000 is a leap year, so 02-29 is accepted.
  const std::chrono::year_month_day ymd{std::chrono::year{2000}, std::chrono::month{*m}, std::chrono::day{*d}};
  if (!ymd.ok()) fail(ErrorCode::kParse, "invalid month-day '" + text + "'");
  return {*m, *d};
}

TrajectorySet preprocess(const std::vector<RawTrack>& tracks, const PreprocessOptions& options) {
  require(options.window_len_days >= 2, "window_len_days must be >= 2");
  require(options.max_gap_days >= 0, "max_gap_days must be >= 0");
  const auto len = static_cast<std::size_t>(options.window_len_days);

  TrajectorySet out(len);
  for (const auto& track : tracks) {
    if (track.fixes.empty()) continue;

    // First fix of each UTC calendar day.
    std::map<std::int64_t, GeoPoint> daily;
    for (const auto& fix : track.fixes) {
      daily.try_emplace(floor_div(fix.timestamp, kSecondsPerDay), fix.point);
    }

    const int first_year = year_of_day(daily.begin()->first) - 1;
    const int last_year = year_of_day(daily.rbegin()->first);
    for (int y = first_year; y <= last_year; ++y) {
      const std::int64_t start = days_from_civil(y, options.window_start.month, options.window_start.day);
      const std::int64_t stop = start + options.window_len_days;
      auto lo = daily.lower_bound(start);
      auto hi = daily.lower_bound(stop);
      if (lo == hi) continue;

      std::vector<std::optional<GeoPoint>> days(len);
      for (auto it = lo; it != hi; ++it) days[static_cast<std::size_t>(it->first - start)] = it->second;
      if (!days.front() || !days.back()) continue;

      bool keep = true;
      std::size_t prev = 0;
      for (std::size_t d = 1; d < len && keep; ++d) {
        if (!days[d]) continue;
        const std::size_t gap = d - prev - 1;
        if (gap > static_cast<std::size_t>(options.max_gap_days)) {
          keep = false;
          break;
        }
        const GeoPoint a = *days[prev];
        const GeoPoint b = *days[d];
        for (std::size_t k = prev + 1; k < d; ++k) {
          const double t = static_cast<double>(k - prev) / static_cast<double>(d - prev);
          days[k] = GeoPoint{a.lon + t * (b.lon - a.lon), a.lat + t * (b.lat - a.lat)};
        }
        prev = d;
      }
      if (!keep) continue;

      Trajectory t;
      t.points.reserve(len);
      for (const auto& p : days) t.points.push_back(*p);
      out.push_back(std::move(t));
    }
  }
  if (out.empty()) fail(ErrorCode::kDomain, "no eligible trajectories");
  return out;
}

Eigen::VectorXd flatten(const Trajectory& t) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(2 * t.size()));
  for (std::size_t d = 0; d < t.size(); ++d) {
    v(static_cast<Eigen::Index>(2 * d)) = t.points[d].lon;
    v(static_cast<Eigen::Index>(2 * d + 1)) = t.points[d].lat;
  }
  return v;
}

Trajectory unflatten(const Eigen::Ref<const Eigen::VectorXd>& row, double scale) {
  require(row.size() % 2 == 0, "flattened trajectory must have an even number of values");
  Trajectory t;
  t.points.resize(static_cast<std::size_t>(row.size() / 2));
  for (std::size_t d = 0; d < t.points.size(); ++d) {
    const double lon = row(static_cast<Eigen::Index>(2 * d));
    const double lat = row(static_cast<Eigen::Index>(2 * d + 1));
    if (!std::isfinite(lon) || !std::isfinite(lat)) fail(ErrorCode::kNumerical, "non-finite value in normalized matrix");
    t.points[d] = {lon * scale, lat * scale};
  }
  return t;
}

NormalizedMatrix normalize_with(const TrajectorySet& set, const NormalizationParams& params) {
  require(params.scale > 0.0 && std::isfinite(params.scale), "normalization scale must be positive");
  NormalizedMatrix m;
  m.values.resize(static_cast<Eigen::Index>(set.size()), static_cast<Eigen::Index>(2 * set.horizon()));
  for (std::size_t i = 0; i < set.size(); ++i) {
    m.values.row(static_cast<Eigen::Index>(i)) = flatten(set[i]).transpose() / params.scale;
  }
  return m;
}

Normalized normalize(const TrajectorySet& set, double factor) {
  require(!set.empty(), "cannot normalize an empty trajectory set");
  require(factor > 0.0 && std::isfinite(factor), "normalization factor must be positive");
  double max_abs = 0.0;
  for (const auto& t : set) {
    for (const auto& p : t.points) max_abs = std::max({max_abs, std::abs(p.lon), std::abs(p.lat)});
  }
  if (!(max_abs > 0.0) || !std::isfinite(max_abs)) fail(ErrorCode::kDomain, "degenerate scale");
  Normalized out;
  out.params.scale = factor * max_abs;
  out.matrix = normalize_with(set, out.params);
  return out;
}

TrajectorySet denormalize(const NormalizedMatrix& matrix, const NormalizationParams& params) {
  require(matrix.cols() % 2 == 0, "normalized matrix must have an even number of columns");
  require(params.scale > 0.0, "normalization scale must be positive");
  TrajectorySet out(static_cast<std::size_t>(matrix.cols() / 2));
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    out.push_back(unflatten(matrix.values.row(i).transpose(), params.scale));
  }
  return out;
}

}  // namespace wildgen
