#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace occuhmm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline std::span<const double> row_span(const RowMatrix& m, Eigen::Index row) {
  return {m.data() + row * m.cols(), static_cast<std::size_t>(m.cols())};
}

// Coefficients of the multinomial-logit transition link. Row k of `beta` holds
// (intercept, slope_1, ..., slope_P) for the k-th ordered off-diagonal pair,
// enumerated row-major: (0,1), (0,2), ..., (1,0), (1,2), ...
struct TransitionCoefficients {
  int n_states = 2;
  int n_covariates = 0;
  Matrix beta;

  static TransitionCoefficients zeros(int n_states, int n_covariates);

  int pair_index(int from, int to) const;
  double& at(int from, int to, int term) { return beta(pair_index(from, to), term); }
  double at(int from, int to, int term) const { return beta(pair_index(from, to), term); }

  void validate() const;
};

enum class Family { gaussian, gamma, von_mises };

// Emission parameters for one observed channel, one entry per state.
//   gaussian:  location = mean, dispersion = sd
//   gamma:     location = mean, dispersion = sd (shape = mean^2/sd^2, scale = sd^2/mean)
//   von_mises: location = mean direction in (-pi, pi], dispersion = concentration
struct ChannelEmission {
  Family family = Family::gaussian;
  std::vector<double> location;
  std::vector<double> dispersion;
};

struct EmissionSpec {
  std::vector<ChannelEmission> channels;

  std::size_t n_channels() const { return channels.size(); }
  void validate(int n_states) const;
};

// How the state distribution is chosen at the first index of every segment.
enum class InitialPolicy {
  stationary,  // stationary distribution of the TPM at the segment's first covariate row
  uniform,
  fixed,  // the model's initial_distribution
};

struct HmmModel {
  int n_states = 2;
  TransitionCoefficients transition;
  EmissionSpec emissions;
  Vector initial_distribution;
  InitialPolicy initial_policy = InitialPolicy::stationary;

  int n_covariates() const { return transition.n_covariates; }
  void validate() const;
};

// Observations; NaN marks a missing cell.
struct ObservationSeries {
  RowMatrix values;  // T x channels
  std::vector<int> segment_ids;

  std::size_t length() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t n_channels() const { return static_cast<std::size_t>(values.cols()); }
};

struct CovariateSeries {
  RowMatrix values;  // T x P
  std::vector<int> segment_ids;
  std::vector<double> time_index;  // optional, e.g. day of year

  std::size_t length() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t n_covariates() const { return static_cast<std::size_t>(values.cols()); }

  // Single-segment series from one covariate column.
  static CovariateSeries from_column(std::span<const double> column);
  std::vector<double> column(std::size_t p) const;
};

struct StateProbSeries {
  RowMatrix probs;  // T x N

  std::size_t length() const { return static_cast<std::size_t>(probs.rows()); }
};

// Half-open [begin, end) index ranges of each segment. Throws InputError when
// labels are not non-decreasing.
std::vector<std::pair<std::size_t, std::size_t>> segment_ranges(const std::vector<int>& segment_ids,
                                                                std::size_t length);

void check_aligned(const ObservationSeries& obs, const CovariateSeries& cov);

const char* family_name(Family family);
Family parse_family(const std::string& name);

}  // namespace occuhmm
