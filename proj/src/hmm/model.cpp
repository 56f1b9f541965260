#include "occuhmm/hmm/model.hpp"

#include "occuhmm/error.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace occuhmm {

TransitionCoefficients TransitionCoefficients::zeros(int n_states, int n_covariates) {
  if (n_states < 2) throw InputError("transition link needs at least 2 states");
  if (n_covariates < 0) throw InputError("negative covariate count");
  TransitionCoefficients c;
  c.n_states = n_states;
  c.n_covariates = n_covariates;
  c.beta = Matrix::Zero(n_states * (n_states - 1), n_covariates + 1);
  return c;
}

int TransitionCoefficients::pair_index(int from, int to) const {
  return from * (n_states - 1) + (to < from ? to : to - 1);
}

void TransitionCoefficients::validate() const {
  if (n_states < 2) throw InputError("transition link needs at least 2 states");
  if (beta.rows() != n_states * (n_states - 1) || beta.cols() != n_covariates + 1)
    throw InputError("transition coefficient matrix must be N(N-1) x (P+1)");
  if (!beta.allFinite()) throw InputError("transition coefficients must be finite");
}

void EmissionSpec::validate(int n_states) const {
  const auto n = static_cast<std::size_t>(n_states);
  for (std::size_t c = 0; c < channels.size(); ++c) {
    const auto& ch = channels[c];
    const std::string where = "emission channel " + std::to_string(c);
    if (ch.location.size() != n || ch.dispersion.size() != n)
      throw InputError(where + ": expected one parameter pair per state");
    for (std::size_t i = 0; i < n; ++i) {
      const double loc = ch.location[i];
      const double disp = ch.dispersion[i];
      if (!std::isfinite(loc) || !std::isfinite(disp))
        throw InputError(where + ": non-finite parameter");
      switch (ch.family) {
        case Family::gaussian:
          if (disp <= 0) throw InputError(where + ": gaussian sd must be > 0");
          break;
        case Family::gamma:
          if (loc <= 0) throw InputError(where + ": gamma mean must be > 0");
          if (disp <= 0) throw InputError(where + ": gamma sd must be > 0");
          break;
        case Family::von_mises:
          if (loc <= -std::numbers::pi || loc > std::numbers::pi)
            throw InputError(where + ": von Mises mean must lie in (-pi, pi]");
          if (disp < 0) throw InputError(where + ": von Mises concentration must be >= 0");
          break;
      }
    }
  }
}

void HmmModel::validate() const {
  if (n_states < 2) throw InputError("model needs at least 2 states");
  if (transition.n_states != n_states) throw InputError("transition state count mismatch");
  transition.validate();
  emissions.validate(n_states);
  if (initial_distribution.size() != n_states)
    throw InputError("initial distribution must have one entry per state");
  double sum = 0;
  for (double p : initial_distribution) {
    if (!(p >= 0 && p <= 1)) throw InputError("initial distribution entries must lie in [0,1]");
    sum += p;
  }
  if (std::abs(sum - 1) > 1e-12) throw InputError("initial distribution must sum to 1");
}

CovariateSeries CovariateSeries::from_column(std::span<const double> column) {
  CovariateSeries cov;
  cov.values.resize(static_cast<Eigen::Index>(column.size()), 1);
  for (std::size_t t = 0; t < column.size(); ++t) cov.values(static_cast<Eigen::Index>(t), 0) = column[t];
  cov.segment_ids.assign(column.size(), 0);
  return cov;
}

std::vector<double> CovariateSeries::column(std::size_t p) const {
  if (p >= n_covariates()) throw InputError("covariate column out of range");
  std::vector<double> out(length());
  for (std::size_t t = 0; t < out.size(); ++t)
    out[t] = values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(p));
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> segment_ranges(const std::vector<int>& segment_ids,
                                                                std::size_t length) {
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  if (length == 0) return ranges;
  if (segment_ids.empty()) {
    ranges.emplace_back(0, length);
    return ranges;
  }
  if (segment_ids.size() != length) throw InputError("segment labels do not match series length");
  std::size_t begin = 0;
  for (std::size_t t = 1; t < length; ++t) {
    if (segment_ids[t] < segment_ids[t - 1])
      throw InputError("segment labels must be non-decreasing (index " + std::to_string(t) + ")");
    if (segment_ids[t] != segment_ids[t - 1]) {
      ranges.emplace_back(begin, t);
      begin = t;
    }
  }
  ranges.emplace_back(begin, length);
  return ranges;
}

void check_aligned(const ObservationSeries& obs, const CovariateSeries& cov) {
  if (obs.length() == 0) throw InputError("empty observation series");
  if (obs.length() != cov.length())
    throw InputError("observation and covariate series differ in length");
  const bool obs_seg = !obs.segment_ids.empty();
  const bool cov_seg = !cov.segment_ids.empty();
  if (obs_seg && cov_seg && obs.segment_ids != cov.segment_ids)
    throw InputError("observation and covariate segmentation differ");
}

const char* family_name(Family family) {
  switch (family) {
    case Family::gaussian: return "gaussian";
    case Family::gamma: return "gamma";
    case Family::von_mises: return "vonmises";
  }
  return "unknown";
}

Family parse_family(const std::string& name) {
  if (name == "gaussian" || name == "normal") return Family::gaussian;
  if (name == "gamma") return Family::gamma;
  if (name == "vonmises" || name == "von_mises") return Family::von_mises;
  throw InputError("unknown emission family '" + name + "'");
}

}  // namespace occuhmm
