#include "occuhmm/movement/track.hpp"

#include "occuhmm/error.hpp"
#include "occuhmm/estimation/working_params.hpp"
#include "occuhmm/occupancy/curve.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <istream>
#include <map>
#include <numbers>
#include <numeric>
#include <ostream>

namespace occuhmm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kEarthRadius = 6371008.8;  // metres

std::string at_line(std::size_t line, const std::string& what) { return "line " + std::to_string(line) + ": " + what; }

// Comma-separated fields; double quotes may wrap a field and "" escapes a quote.
std::vector<std::string> split_fields(const std::string& raw, std::size_t line) {
  std::string s = raw;
  if (!s.empty() && s.back() == '\r') s.pop_back();
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (quoted) {
      if (c == '"' && i + 1 < s.size() && s[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        out.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else {
      out.back() += c;
    }
  }
  if (quoted) throw InputError(at_line(line, "unterminated quoted field"));
  for (auto& f : out) {
    const auto b = f.find_first_not_of(" \t");
    const auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
  }
  return out;
}

bool blank(const std::string& line) { return line.find_first_not_of(" \t\r") == std::string::npos; }

double parse_number(const std::string& s, std::size_t line, const std::string& column) {
  double v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw InputError(at_line(line, "column '" + column + "': cannot parse '" + s + "' as a number"));
  return v;
}

double optional_number(const std::string& s, std::size_t line, const std::string& column) {
  if (s.empty() || s == "NA" || s == "NaN" || s == "nan") return kNaN;
  return parse_number(s, line, column);
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw InputError("missing required column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

int read_digits(const std::string& s, std::size_t& pos, int count) {
  if (pos + static_cast<std::size_t>(count) > s.size()) throw InputError("truncated timestamp '" + s + "'");
  int v = 0;
  for (int i = 0; i < count; ++i, ++pos) {
    const char c = s[pos];
    if (c < '0' || c > '9') throw InputError("malformed timestamp '" + s + "'");
    v = v * 10 + (c - '0');
  }
  return v;
}

void expect(const std::string& s, std::size_t& pos, char c) {
  if (pos >= s.size() || s[pos] != c) throw InputError("malformed timestamp '" + s + "'");
  ++pos;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) { return a / b - ((a % b != 0) && ((a < 0) != (b < 0))); }

}  // namespace

const char* coordinate_mode_name(CoordinateMode mode) {
  return mode == CoordinateMode::planar ? "planar" : "geographic";
}

CoordinateMode parse_coordinate_mode(const std::string& name) {
  if (name == "planar") return CoordinateMode::planar;
  if (name == "geographic") return CoordinateMode::geographic;
  throw InputError("unknown coordinate mode '" + name + "' (expected planar or geographic)");
}

std::int64_t parse_timestamp(const std::string& s) {
  using namespace std::chrono;
  std::size_t pos = 0;
  const int y = read_digits(s, pos, 4);
  expect(s, pos, '-');
  const int mo = read_digits(s, pos, 2);
  expect(s, pos, '-');
  const int d = read_digits(s, pos, 2);
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) throw InputError("invalid calendar date in timestamp '" + s + "'");
  int hh = 0, mm = 0, ss = 0;
  if (pos < s.size()) {
    if (s[pos] != 'T' && s[pos] != ' ') throw InputError("malformed timestamp '" + s + "'");
    ++pos;
    hh = read_digits(s, pos, 2);
    expect(s, pos, ':');
    mm = read_digits(s, pos, 2);
    if (pos < s.size() && s[pos] == ':') {
      ++pos;
      ss = read_digits(s, pos, 2);
      if (pos < s.size() && s[pos] == '.') {
        ++pos;
        // fractional seconds are truncated
        while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
      }
    }
  }
  if (hh > 23 || mm > 59 || ss > 60) throw InputError("invalid time of day in timestamp '" + s + "'");
  std::int64_t offset = 0;
  if (pos < s.size()) {
    if (s[pos] == 'Z') {
      ++pos;
    } else if (s[pos] == '+' || s[pos] == '-') {
      const int sign = s[pos] == '+' ? 1 : -1;
      ++pos;
      const int oh = read_digits(s, pos, 2);
      if (pos < s.size() && s[pos] == ':') ++pos;
      const int om = read_digits(s, pos, 2);
      offset = sign * (oh * 3600 + om * 60);
    }
  }
  if (pos != s.size()) throw InputError("trailing characters in timestamp '" + s + "'");
  const std::int64_t days = sys_days(ymd).time_since_epoch().count();
  return days * 86400 + hh * 3600 + mm * 60 + ss - offset;
}

std::string format_timestamp(std::int64_t seconds) {
  using namespace std::chrono;
  const std::int64_t days = floor_div(seconds, 86400);
  const std::int64_t rem = seconds - days * 86400;
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), static_cast<int>(rem / 3600),
                static_cast<int>(rem / 60 % 60), static_cast<int>(rem % 60));
  return buf;
}

void RawTrack::validate() const {
  const std::size_t n = times.size();
  if (x.size() != n || y.size() != n) throw InputError("track columns differ in length");
  if (covariates.size() != covariate_names.size()) throw InputError("covariate names do not match the columns");
  for (const auto& c : covariates)
    if (c.size() != n) throw InputError("covariate column length differs from the track");
  for (std::size_t i = 1; i < n; ++i)
    if (times[i] <= times[i - 1]) throw InputError("track timestamps must be strictly increasing");
}

void PreprocessConfig::validate() const {
  if (interval <= 0) throw InputError("preprocessing interval must be positive");
  if (snap_tolerance <= 0 || 2 * snap_tolerance > interval)
    throw InputError("snap tolerance must be positive and at most half the interval");
  if (max_covariate_gap <= 0) throw InputError("maximum covariate gap must be positive");
  if (min_segment_length <= 0) throw InputError("minimum segment length must be positive");
  if (!(outlier_distance > 0)) throw InputError("outlier distance must be positive");
}

RawTrack read_track_csv(std::istream& in, const ColumnMapping& columns, CoordinateMode mode, PreprocessLog* log) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    header = split_fields(line, line_no);
    break;
  }
  if (header.empty()) throw InputError("track file is empty");
  if (!header.empty() && header[0].rfind("\xEF\xBB\xBF", 0) == 0) header[0].erase(0, 3);
  const std::size_t it = column_index(header, columns.timestamp);
  const std::size_t ix = column_index(header, columns.x);
  const std::size_t iy = column_index(header, columns.y);
  std::vector<std::size_t> ic;
  for (const auto& c : columns.covariates) ic.push_back(column_index(header, c));

  struct Record {
    std::int64_t t;
    double x, y;
    std::vector<double> cov;
  };
  std::vector<Record> records;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto f = split_fields(line, line_no);
    if (f.size() != header.size())
      throw InputError(at_line(line_no, "expected " + std::to_string(header.size()) + " fields, found " +
                                            std::to_string(f.size())));
    Record r;
    try {
      r.t = parse_timestamp(f[it]);
    } catch (const InputError& e) {
      throw InputError(at_line(line_no, e.what()));
    }
    r.x = optional_number(f[ix], line_no, columns.x);
    r.y = optional_number(f[iy], line_no, columns.y);
    if (std::isnan(r.x) != std::isnan(r.y)) throw InputError(at_line(line_no, "coordinate pair is half missing"));
    if (!std::isnan(r.x) && (!std::isfinite(r.x) || !std::isfinite(r.y)))
      throw InputError(at_line(line_no, "non-finite coordinate"));
    if (mode == CoordinateMode::geographic && !std::isnan(r.x) && (std::abs(r.x) > 180 || std::abs(r.y) > 90))
      throw InputError(at_line(line_no, "longitude/latitude out of range"));
    for (std::size_t k = 0; k < ic.size(); ++k) r.cov.push_back(optional_number(f[ic[k]], line_no, columns.covariates[k]));
    records.push_back(std::move(r));
  }
  if (records.empty()) throw InputError("track file has a header but no records");

  std::stable_sort(records.begin(), records.end(), [](const Record& a, const Record& b) { return a.t < b.t; });
  RawTrack track;
  track.mode = mode;
  track.covariate_names = columns.covariates;
  track.covariates.resize(ic.size());
  std::size_t duplicates = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (i > 0 && records[i].t == records[i - 1].t) {
      ++duplicates;
      continue;
    }
    track.times.push_back(records[i].t);
    track.x.push_back(records[i].x);
    track.y.push_back(records[i].y);
    for (std::size_t k = 0; k < ic.size(); ++k) track.covariates[k].push_back(records[i].cov[k]);
  }
  if (log) {
    log->records_read = records.size();
    log->duplicate_timestamps = duplicates;
  }
  return track;
}

bool GriddedTrack::has_position(std::size_t k) const { return !std::isnan(x[k]) && !std::isnan(y[k]); }

GriddedTrack regularize(const RawTrack& track, const PreprocessConfig& config, PreprocessLog* log) {
  config.validate();
  track.validate();
  if (track.size() < 2) throw InputError("regularization needs at least 2 records");
  const std::int64_t dt = config.interval;

  // slot -> (distance, record)
  std::map<std::int64_t, std::pair<std::int64_t, std::size_t>> best;
  std::size_t outside = 0, collisions = 0;
  for (std::size_t i = 0; i < track.size(); ++i) {
    const std::int64_t t = track.times[i];
    const std::int64_t below = floor_div(t, dt);
    const std::int64_t slot = (t - below * dt) * 2 <= dt ? below : below + 1;
    const std::int64_t dist = std::abs(t - slot * dt);
    if (dist > config.snap_tolerance) {
      ++outside;
      continue;
    }
    auto [pos, inserted] = best.try_emplace(slot, dist, i);
    if (!inserted) {
      ++collisions;
      if (dist < pos->second.first) pos->second = {dist, i};
    }
  }
  if (best.empty()) throw InputError("no record lies within the snap tolerance of a grid time");

  GriddedTrack g;
  g.mode = track.mode;
  g.interval = dt;
  const std::int64_t first = best.begin()->first, last = best.rbegin()->first;
  g.start = first * dt;
  const auto n = static_cast<std::size_t>(last - first + 1);
  g.x.assign(n, kNaN);
  g.y.assign(n, kNaN);
  g.covariate_names = track.covariate_names;
  g.covariates.assign(track.covariates.size(), std::vector<double>(n, kNaN));
  for (const auto& [slot, hit] : best) {
    const auto k = static_cast<std::size_t>(slot - first);
    const std::size_t i = hit.second;
    g.x[k] = track.x[i];
    g.y[k] = track.y[i];
    for (std::size_t c = 0; c < g.covariates.size(); ++c) g.covariates[c][k] = track.covariates[c][i];
  }
  if (log) {
    log->outside_tolerance = outside;
    log->snap_collisions = collisions;
    log->grid_slots = n;
    log->missing_positions = 0;
    for (std::size_t k = 0; k < n; ++k) log->missing_positions += !g.has_position(k);
  }
  return g;
}

double step_length(CoordinateMode mode, double x0, double y0, double x1, double y1) {
  if (mode == CoordinateMode::planar) return std::hypot(x1 - x0, y1 - y0);
  const double deg = std::numbers::pi / 180.0;
  const double p0 = y0 * deg, p1 = y1 * deg;
  const double dp = p1 - p0, dl = (x1 - x0) * deg;
  const double a = std::sin(dp / 2) * std::sin(dp / 2) + std::cos(p0) * std::cos(p1) * std::sin(dl / 2) * std::sin(dl / 2);
  return 2.0 * kEarthRadius * std::asin(std::min(1.0, std::sqrt(a)));
}

double heading(CoordinateMode mode, double x0, double y0, double x1, double y1) {
  if (mode == CoordinateMode::planar) return std::atan2(y1 - y0, x1 - x0);
  const double deg = std::numbers::pi / 180.0;
  const double p0 = y0 * deg, p1 = y1 * deg, dl = (x1 - x0) * deg;
  const double bearing = std::atan2(std::sin(dl) * std::cos(p1), std::cos(p0) * std::sin(p1) - std::sin(p0) * std::cos(p1) * std::cos(dl));
  return -bearing;
}

std::size_t remove_outliers(GriddedTrack& track, const PreprocessConfig& config, PreprocessLog* log) {
  config.validate();
  std::size_t removed = 0;
  if (std::isinf(config.outlier_distance)) {
    if (log) log->outliers_removed = 0;
    return 0;
  }
  const std::size_t n = track.size();
  std::vector<std::size_t> observed;
  for (std::size_t k = 0; k < n; ++k)
    if (track.has_position(k)) observed.push_back(k);
  std::vector<std::size_t> flagged;
  auto too_fast = [&](std::size_t a, std::size_t b) {
    const double d = step_length(track.mode, track.x[a], track.y[a], track.x[b], track.y[b]);
    return d > config.outlier_distance * static_cast<double>(b > a ? b - a : a - b);
  };
  for (std::size_t j = 1; j + 1 < observed.size(); ++j) {
    const std::size_t k = observed[j];
    if (too_fast(observed[j - 1], k) && too_fast(k, observed[j + 1])) flagged.push_back(k);
  }
  for (std::size_t k : flagged) {
    track.x[k] = kNaN;
    track.y[k] = kNaN;
    ++removed;
  }
  if (log) log->outliers_removed = removed;
  return removed;
}

ObservationSeries steps_and_turns(const GriddedTrack& track) {
  const std::size_t n = track.size();
  ObservationSeries obs;
  obs.values = RowMatrix::Constant(static_cast<Eigen::Index>(n), 2, kNaN);
  for (std::size_t t = 1; t < n; ++t) {
    const auto ti = static_cast<Eigen::Index>(t);
    if (!track.has_position(t) || !track.has_position(t - 1)) continue;
    obs.values(ti, 0) = step_length(track.mode, track.x[t - 1], track.y[t - 1], track.x[t], track.y[t]);
    if (t < 2 || !track.has_position(t - 2)) continue;
    const double before = obs.values(ti - 1, 0), after = obs.values(ti, 0);
    if (!(before > 0) || !(after > 0)) continue;
    const double h0 = heading(track.mode, track.x[t - 2], track.y[t - 2], track.x[t - 1], track.y[t - 1]);
    const double h1 = heading(track.mode, track.x[t - 1], track.y[t - 1], track.x[t], track.y[t]);
    obs.values(ti, 1) = wrap_angle(h1 - h0);
  }
  obs.segment_ids.assign(n, 0);
  return obs;
}

void AlignedSeries::validate() const {
  const std::size_t n = obs.length();
  if (times.size() != n || cov.length() != n) throw InputError("aligned series columns differ in length");
  if (channel_names.size() != obs.n_channels() || covariate_names.size() != cov.n_covariates())
    throw InputError("aligned series names do not match the columns");
  if (obs.segment_ids != cov.segment_ids) throw InputError("observation and covariate segments differ");
  if ((!x.empty() || !y.empty()) && (x.size() != n || y.size() != n))
    throw InputError("aligned series positions differ in length");
}

AlignedSeries impute_and_segment(const ObservationSeries& obs, const GriddedTrack& track, const PreprocessConfig& config,
                                 PreprocessLog* log) {
  config.validate();
  const std::size_t n = track.size();
  if (obs.length() != n) throw InputError("observations and gridded track differ in length");
  std::vector<std::vector<double>> cov = track.covariates;
  std::size_t imputed = 0;
  for (auto& col : cov) {
    std::size_t k = 0;
    while (k < n) {
      if (!std::isnan(col[k])) {
        ++k;
        continue;
      }
      std::size_t end = k;
      while (end < n && std::isnan(col[end])) ++end;
      const std::size_t gap = end - k;
      if (k > 0 && end < n && gap <= static_cast<std::size_t>(config.max_covariate_gap)) {
        const double a = col[k - 1], b = col[end];
        for (std::size_t j = k; j < end; ++j)
          col[j] = a + (b - a) * static_cast<double>(j - k + 1) / static_cast<double>(gap + 1);
        imputed += gap;
      }
      k = end;
    }
  }

  std::vector<bool> usable(n, true);
  for (const auto& col : cov)
    for (std::size_t k = 0; k < n; ++k) usable[k] = usable[k] && !std::isnan(col[k]);

  std::vector<std::pair<std::size_t, std::size_t>> kept;
  std::size_t formed = 0, dropped = 0;
  for (std::size_t k = 0; k < n;) {
    if (!usable[k]) {
      ++k;
      continue;
    }
    std::size_t end = k;
    while (end < n && usable[end]) ++end;
    ++formed;
    if (end - k >= static_cast<std::size_t>(config.min_segment_length)) kept.emplace_back(k, end);
    else ++dropped;
    k = end;
  }
  if (kept.empty()) throw InputError("no segment of at least " + std::to_string(config.min_segment_length) +
                                     " rows with complete covariates survives preprocessing");

  std::size_t rows = 0;
  for (const auto& [b, e] : kept) rows += e - b;
  AlignedSeries out;
  out.channel_names = {"step", "angle"};
  if (obs.n_channels() != 2) {
    out.channel_names.clear();
    for (std::size_t c = 0; c < obs.n_channels(); ++c) out.channel_names.push_back("x" + std::to_string(c + 1));
  }
  out.covariate_names = track.covariate_names;
  out.obs.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(obs.n_channels()));
  out.cov.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cov.size()));
  std::size_t r = 0;
  bool any_observation = false;
  for (std::size_t s = 0; s < kept.size(); ++s) {
    for (std::size_t k = kept[s].first; k < kept[s].second; ++k, ++r) {
      const auto ri = static_cast<Eigen::Index>(r);
      out.times.push_back(format_timestamp(track.time(k)));
      out.obs.values.row(ri) = obs.values.row(static_cast<Eigen::Index>(k));
      any_observation = any_observation || !out.obs.values.row(ri).array().isNaN().all();
      for (std::size_t c = 0; c < cov.size(); ++c) out.cov.values(ri, static_cast<Eigen::Index>(c)) = cov[c][k];
      out.x.push_back(track.x[k]);
      out.y.push_back(track.y[k]);
      out.obs.segment_ids.push_back(static_cast<int>(s));
    }
  }
  if (!any_observation) throw InputError("every observation in the retained segments is missing");
  out.cov.segment_ids = out.obs.segment_ids;
  if (log) {
    log->covariate_values_imputed = imputed;
    log->segments_formed = formed;
    log->segments_dropped = dropped;
    log->rows_dropped = n - rows;
  }
  return out;
}

AlignedSeries preprocess_track(const RawTrack& track, const PreprocessConfig& config, PreprocessLog* log) {
  GriddedTrack g = regularize(track, config, log);
  remove_outliers(g, config, log);
  return impute_and_segment(steps_and_turns(g), g, config, log);
}

void write_aligned_csv(std::ostream& out, const AlignedSeries& s) {
  s.validate();
  out << "t,segment";
  for (const auto& c : s.channel_names) out << ',' << c;
  for (const auto& c : s.covariate_names) out << ',' << c;
  const bool positions = !s.x.empty();
  if (positions) out << ",x,y";
  out << '\n';
  auto cell = [&](double v) {
    out << ',';
    if (!std::isnan(v)) out << format_double(v);
  };
  for (std::size_t t = 0; t < s.length(); ++t) {
    const auto ti = static_cast<Eigen::Index>(t);
    out << s.times[t] << ',' << s.obs.segment_ids[t];
    for (Eigen::Index c = 0; c < s.obs.values.cols(); ++c) cell(s.obs.values(ti, c));
    for (Eigen::Index c = 0; c < s.cov.values.cols(); ++c) cell(s.cov.values(ti, c));
    if (positions) {
      cell(s.x[t]);
      cell(s.y[t]);
    }
    out << '\n';
  }
}

AlignedSeries read_aligned_csv(std::istream& in, const std::vector<std::string>& channels,
                               const std::vector<std::string>& covariates) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    header = split_fields(line, line_no);
    break;
  }
  if (header.empty()) throw InputError("series file is empty");
  if (channels.empty()) throw InputError("at least one observation column is required");
  const std::size_t it = column_index(header, "t");
  const std::size_t is = column_index(header, "segment");
  std::vector<std::size_t> ic, iz;
  for (const auto& c : channels) ic.push_back(column_index(header, c));
  for (const auto& c : covariates) iz.push_back(column_index(header, c));
  auto claimed = [&](const std::string& name) {
    return std::find(channels.begin(), channels.end(), name) != channels.end() ||
           std::find(covariates.begin(), covariates.end(), name) != covariates.end();
  };
  const auto hx = std::find(header.begin(), header.end(), "x");
  const auto hy = std::find(header.begin(), header.end(), "y");
  const bool positions = hx != header.end() && hy != header.end() && !claimed("x") && !claimed("y");

  AlignedSeries s;
  s.channel_names = channels;
  s.covariate_names = covariates;
  std::vector<double> ov, cv;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto f = split_fields(line, line_no);
    if (f.size() != header.size())
      throw InputError(at_line(line_no, "expected " + std::to_string(header.size()) + " fields, found " +
                                            std::to_string(f.size())));
    s.times.push_back(f[it]);
    const double seg = parse_number(f[is], line_no, "segment");
    if (seg != std::floor(seg) || seg < 0) throw InputError(at_line(line_no, "segment must be a non-negative integer"));
    s.obs.segment_ids.push_back(static_cast<int>(seg));
    for (std::size_t k = 0; k < ic.size(); ++k) ov.push_back(optional_number(f[ic[k]], line_no, channels[k]));
    for (std::size_t k = 0; k < iz.size(); ++k) {
      const double v = optional_number(f[iz[k]], line_no, covariates[k]);
      if (!std::isfinite(v)) throw InputError(at_line(line_no, "covariate '" + covariates[k] + "' is missing"));
      cv.push_back(v);
    }
    if (positions) {
      s.x.push_back(optional_number(f[static_cast<std::size_t>(hx - header.begin())], line_no, "x"));
      s.y.push_back(optional_number(f[static_cast<std::size_t>(hy - header.begin())], line_no, "y"));
    }
  }
  const auto n = static_cast<Eigen::Index>(s.times.size());
  if (n == 0) throw InputError("series file has a header but no rows");
  s.obs.values = Eigen::Map<const RowMatrix>(ov.data(), n, static_cast<Eigen::Index>(ic.size()));
  s.cov.values = Eigen::Map<const RowMatrix>(cv.data(), n, static_cast<Eigen::Index>(iz.size()));
  s.cov.segment_ids = s.obs.segment_ids;
  return s;
}

}  // namespace occuhmm
