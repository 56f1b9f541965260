#pragma once

#include "occuhmm/hmm/model.hpp"

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace occuhmm {

enum class CoordinateMode {
  planar,      // x/y in metres
  geographic,  // lon/lat in degrees
};

const char* coordinate_mode_name(CoordinateMode mode);
CoordinateMode parse_coordinate_mode(const std::string& name);

// Seconds since 1970-01-01T00:00:00Z. Accepts YYYY-MM-DD[T| ]HH:MM[:SS[.fff]]
// with an optional Z or +HH:MM / -HH:MM offset; no offset means UTC.
std::int64_t parse_timestamp(const std::string& text);
// YYYY-MM-DDTHH:MM:SSZ
std::string format_timestamp(std::int64_t seconds);

struct RawTrack {
  CoordinateMode mode = CoordinateMode::planar;
  std::vector<std::int64_t> times;  // strictly increasing
  std::vector<double> x;
  std::vector<double> y;
  std::vector<std::string> covariate_names;
  std::vector<std::vector<double>> covariates;  // per column; NaN missing

  std::size_t size() const { return times.size(); }
  void validate() const;
};

struct ColumnMapping {
  std::string timestamp = "timestamp";
  std::string x = "x";
  std::string y = "y";
  std::vector<std::string> covariates;
};

struct PreprocessConfig {
  CoordinateMode mode = CoordinateMode::planar;
  std::int64_t interval = 3600;       // seconds
  std::int64_t snap_tolerance = 600;  // seconds
  int max_covariate_gap = 3;          // longest imputed run, in grid steps
  int min_segment_length = 24;        // rows
  // Largest plausible displacement per grid interval, in metres.
  double outlier_distance = std::numeric_limits<double>::infinity();

  void validate() const;
};

// Counters reported by the pipeline.
struct PreprocessLog {
  std::size_t records_read = 0;
  std::size_t duplicate_timestamps = 0;  // exact repeats, first kept
  std::size_t outside_tolerance = 0;     // too far from any grid time
  std::size_t snap_collisions = 0;       // lost a slot to a closer record
  std::size_t grid_slots = 0;
  std::size_t missing_positions = 0;
  std::size_t outliers_removed = 0;
  std::size_t covariate_values_imputed = 0;
  std::size_t segments_formed = 0;
  std::size_t segments_dropped = 0;  // shorter than the minimum length
  std::size_t rows_dropped = 0;      // outside every kept segment
};

// CSV with a header row. Rows are sorted by time; exact duplicate timestamps
// keep their first record. Empty covariate fields are missing. Errors carry
// the offending line number.
RawTrack read_track_csv(std::istream& in, const ColumnMapping& columns, CoordinateMode mode,
                        PreprocessLog* log = nullptr);

// Regular grid with NaN positions and covariates where no record snapped.
struct GriddedTrack {
  CoordinateMode mode = CoordinateMode::planar;
  std::int64_t start = 0;
  std::int64_t interval = 3600;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<std::string> covariate_names;
  std::vector<std::vector<double>> covariates;

  std::size_t size() const { return x.size(); }
  std::int64_t time(std::size_t k) const { return start + static_cast<std::int64_t>(k) * interval; }
  bool has_position(std::size_t k) const;
};

// Grid times are multiples of the interval since the epoch, from the first to
// the last snapped slot. A slot keeps the closest record; ties keep the
// earlier one.
GriddedTrack regularize(const RawTrack& track, const PreprocessConfig& config, PreprocessLog* log = nullptr);

// Metres. Planar: Euclidean. Geographic: haversine on the mean Earth radius.
double step_length(CoordinateMode mode, double x0, double y0, double x1, double y1);
// Heading of the displacement, counter-clockwise from east (planar) or the
// negated initial bearing (geographic), so left turns are positive in both.
double heading(CoordinateMode mode, double x0, double y0, double x1, double y1);

// Marks positions that lie farther than outlier_distance per elapsed interval
// from both their nearest observed neighbours. One pass over the original
// positions; returns the number removed.
std::size_t remove_outliers(GriddedTrack& track, const PreprocessConfig& config, PreprocessLog* log = nullptr);

// Two channels per grid slot t: the step from fix t-1 to fix t and the turn
// at fix t-1 between the steps into and out of it, in (-pi, pi]. Rows whose
// fixes are missing stay NaN, as does the turn after a zero-length step.
ObservationSeries steps_and_turns(const GriddedTrack& track);

// Observations and covariates on a common grid, split into segments.
struct AlignedSeries {
  std::vector<std::string> times;  // row labels
  std::vector<std::string> channel_names;
  std::vector<std::string> covariate_names;
  ObservationSeries obs;
  CovariateSeries cov;
  // Fix positions per row, written as trailing x,y columns when present.
  std::vector<double> x;
  std::vector<double> y;

  std::size_t length() const { return obs.length(); }
  void validate() const;
};

// Linearly fills interior covariate gaps of at most max_covariate_gap rows.
// Rows still missing a covariate split the series; segments shorter than
// min_segment_length are dropped. Observations are never imputed.
AlignedSeries impute_and_segment(const ObservationSeries& obs, const GriddedTrack& track,
                                 const PreprocessConfig& config, PreprocessLog* log = nullptr);

// regularize, remove_outliers, steps_and_turns, impute_and_segment.
AlignedSeries preprocess_track(const RawTrack& track, const PreprocessConfig& config, PreprocessLog* log = nullptr);

// Header `t,segment,<channels>,<covariates>[,x,y]`; missing values are empty
// fields.
void write_aligned_csv(std::ostream& out, const AlignedSeries& series);
// Columns other than t and segment are split by name into channels and
// covariates; x and y fill the positions when both exist and are not claimed
// as channels or covariates. Other columns are ignored.
AlignedSeries read_aligned_csv(std::istream& in, const std::vector<std::string>& channels,
                               const std::vector<std::string>& covariates);

}  // namespace occuhmm
