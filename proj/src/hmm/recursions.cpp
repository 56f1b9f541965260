#include "occuhmm/hmm/recursions.hpp"

#include "occuhmm/error.hpp"
#include "occuhmm/hmm/emission.hpp"
#include "occuhmm/hmm/tpm.hpp"
#include "occuhmm/occupancy/stationary.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace occuhmm {

namespace {

void check_covariates(const HmmModel& model, const CovariateSeries& cov) {
  if (cov.n_covariates() != static_cast<std::size_t>(model.n_covariates()))
    throw InputError("covariate series has " + std::to_string(cov.n_covariates()) +
                     " columns, model expects " + std::to_string(model.n_covariates()));
  if (!cov.values.allFinite()) throw InputError("covariate series contains missing or non-finite values");
}

}  // namespace

Vector segment_start_distribution(const HmmModel& model, std::span<const double> z_first) {
  switch (model.initial_policy) {
    case InitialPolicy::stationary:
      return stationary_distribution(tpm_from_covariates(model.transition, z_first));
    case InitialPolicy::uniform:
      return Vector::Constant(model.n_states, 1.0 / model.n_states);
    case InitialPolicy::fixed:
      return model.initial_distribution;
  }
  return model.initial_distribution;
}

double forward_loglik(const HmmModel& model, const RowMatrix& log_emissions, const CovariateSeries& cov) {
  const int n = model.n_states;
  const auto T = cov.length();
  if (static_cast<std::size_t>(log_emissions.rows()) != T || log_emissions.cols() != n)
    throw InputError("emission matrix does not match the covariate series");
  check_covariates(model, cov);

  Matrix gamma(n, n);
  Vector alpha(n), next(n);
  double loglik = 0.0;
  for (const auto& [begin, end] : segment_ranges(cov.segment_ids, T)) {
    // Compensated sum keeps the total accurate enough for finite differences.
    double segment_loglik = 0.0, carry = 0.0;
    for (std::size_t t = begin; t < end; ++t) {
      const auto ti = static_cast<Eigen::Index>(t);
      if (t == begin) {
        next = segment_start_distribution(model, row_span(cov.values, ti));
      } else {
        fill_tpm(model.transition, row_span(cov.values, ti), gamma);
        next.noalias() = gamma.transpose() * alpha;
      }
      const double shift = log_emissions.row(ti).maxCoeff();
      if (!std::isfinite(shift))
        throw SupportError("all state densities vanish at time index " + std::to_string(t), static_cast<long>(t));
      double scale = 0.0;
      for (int i = 0; i < n; ++i) {
        next(i) *= std::exp(log_emissions(ti, i) - shift);
        scale += next(i);
      }
      if (!(scale > 0))
        throw SupportError("likelihood vanishes at time index " + std::to_string(t), static_cast<long>(t));
      alpha = next / scale;
      const double term = std::log(scale) + shift;
      const double sum = segment_loglik + term;
      carry += std::abs(segment_loglik) >= std::abs(term) ? (segment_loglik - sum) + term : (term - sum) + segment_loglik;
      segment_loglik = sum;
    }
    loglik += segment_loglik + carry;
  }
  return loglik;
}

double forward_loglik(const HmmModel& model, const ObservationSeries& obs, const CovariateSeries& cov) {
  model.validate();
  check_aligned(obs, cov);
  return forward_loglik(model, log_emission_matrix(model.emissions, model.n_states, obs), cov);
}

std::vector<int> viterbi(const HmmModel& model, const ObservationSeries& obs, const CovariateSeries& cov) {
  model.validate();
  check_aligned(obs, cov);
  check_covariates(model, cov);
  const int n = model.n_states;
  const auto T = obs.length();
  const RowMatrix log_emis = log_emission_matrix(model.emissions, n, obs);

  std::vector<int> path(T, 0);
  Matrix gamma(n, n);
  Vector score(n), next(n);
  std::vector<int> back;
  for (const auto& [begin, end] : segment_ranges(cov.segment_ids, T)) {
    const std::size_t len = end - begin;
    back.assign(len * static_cast<std::size_t>(n), 0);
    for (std::size_t t = begin; t < end; ++t) {
      const auto ti = static_cast<Eigen::Index>(t);
      if (t == begin) {
        const Vector start = segment_start_distribution(model, row_span(cov.values, ti));
        for (int i = 0; i < n; ++i) score(i) = std::log(start(i)) + log_emis(ti, i);
      } else {
        fill_tpm(model.transition, row_span(cov.values, ti), gamma);
        for (int j = 0; j < n; ++j) {
          int arg = 0;
          double best = score(0) + std::log(gamma(0, j));
          for (int i = 1; i < n; ++i) {
            const double cand = score(i) + std::log(gamma(i, j));
            if (cand > best) {
              best = cand;
              arg = i;
            }
          }
          next(j) = best + log_emis(ti, j);
          back[(t - begin) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)] = arg;
        }
        score = next;
      }
      if (score.maxCoeff() == -std::numeric_limits<double>::infinity())
        throw SupportError("all state densities vanish at time index " + std::to_string(t), static_cast<long>(t));
    }
    int state = 0;
    for (int i = 1; i < n; ++i)
      if (score(i) > score(state)) state = i;
    for (std::size_t k = len; k-- > 0;) {
      path[begin + k] = state;
      if (k > 0) state = back[k * static_cast<std::size_t>(n) + static_cast<std::size_t>(state)];
    }
  }
  return path;
}

StateProbSeries propagate_state_probs(const HmmModel& model, const CovariateSeries& cov) {
  model.validate();
  check_covariates(model, cov);
  const int n = model.n_states;
  const auto T = cov.length();
  StateProbSeries out;
  out.probs.resize(static_cast<Eigen::Index>(T), n);
  Matrix gamma(n, n);
  Vector delta(n), next(n);
  for (const auto& [begin, end] : segment_ranges(cov.segment_ids, T)) {
    for (std::size_t t = begin; t < end; ++t) {
      const auto ti = static_cast<Eigen::Index>(t);
      if (t == begin) {
        delta = segment_start_distribution(model, row_span(cov.values, ti));
      } else {
        fill_tpm(model.transition, row_span(cov.values, ti), gamma);
        next.noalias() = gamma.transpose() * delta;
        delta = next;
      }
      out.probs.row(ti) = delta.transpose();
    }
  }
  return out;
}

StateProbSeries propagate_column(const HmmModel& model, std::span<const double> column,
                                 std::size_t restart_every) {
  if (model.n_covariates() != 1) throw InputError("column propagation needs a single-covariate model");
  model.validate();
  const int n = model.n_states;
  StateProbSeries out;
  out.probs.resize(static_cast<Eigen::Index>(column.size()), n);
  Matrix gamma(n, n);
  Vector delta(n), next(n);
  for (std::size_t t = 0; t < column.size(); ++t) {
    if (!std::isfinite(column[t])) throw InputError("covariate path contains a non-finite value");
    const auto z = column.subspan(t, 1);
    if (t == 0 || (restart_every > 0 && t % restart_every == 0)) {
      delta = segment_start_distribution(model, z);
    } else {
      fill_tpm(model.transition, z, gamma);
      next.noalias() = gamma.transpose() * delta;
      delta = next;
    }
    out.probs.row(static_cast<Eigen::Index>(t)) = delta.transpose();
  }
  return out;
}

}  // namespace occuhmm
