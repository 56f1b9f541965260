#include "occuhmm/estimation/working_params.hpp"

#include "occuhmm/error.hpp"

#include <cmath>
#include <numbers>

namespace occuhmm {

double wrap_angle(double angle) {
  constexpr double pi = std::numbers::pi;
  if (angle > -pi && angle <= pi) return angle;
  double w = std::remainder(angle, 2.0 * pi);
  if (w <= -pi) w += 2.0 * pi;
  return w;
}

ParameterMap::ParameterMap(const HmmModel& shape, bool estimate_initial)
    : shape_(shape), estimate_initial_(estimate_initial) {
  shape_.validate();
  const int n = shape_.n_states;
  n_beta_ = static_cast<std::size_t>(shape_.transition.beta.size());
  size_ = n_beta_ + 2 * shape_.emissions.n_channels() * static_cast<std::size_t>(n);
  if (estimate_initial_) size_ += static_cast<std::size_t>(n - 1);
}

std::size_t ParameterMap::location_index(std::size_t channel, int state) const {
  return n_beta_ + 2 * (channel * static_cast<std::size_t>(shape_.n_states) + static_cast<std::size_t>(state));
}

Vector ParameterMap::to_working(const HmmModel& model) const {
  model.validate();
  if (model.n_states != shape_.n_states || model.n_covariates() != shape_.n_covariates() ||
      model.emissions.n_channels() != shape_.emissions.n_channels())
    throw InputError("model does not match the parameter layout");
  Vector theta(static_cast<Eigen::Index>(size_));
  const Matrix& beta = model.transition.beta;
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < beta.rows(); ++r)
    for (Eigen::Index c = 0; c < beta.cols(); ++c) theta(k++) = beta(r, c);
  for (std::size_t ch = 0; ch < model.emissions.n_channels(); ++ch) {
    const auto& e = model.emissions.channels[ch];
    if (e.family != shape_.emissions.channels[ch].family) throw InputError("emission family does not match the layout");
    for (int s = 0; s < model.n_states; ++s) {
      const double loc = e.location[static_cast<std::size_t>(s)];
      const double disp = e.dispersion[static_cast<std::size_t>(s)];
      if (e.family == Family::von_mises && disp == 0.0)
        throw DomainError("von Mises concentration 0 has no log-scale working value");
      theta(k++) = e.family == Family::gamma ? std::log(loc) : loc;
      theta(k++) = std::log(disp);
    }
  }
  if (estimate_initial_) {
    const Vector& d = model.initial_distribution;
    if ((d.array() <= 0.0).any()) throw DomainError("estimated initial distribution needs positive entries");
    for (int i = 1; i < model.n_states; ++i) theta(k++) = std::log(d(i) / d(0));
  }
  return theta;
}

HmmModel ParameterMap::to_model(std::span<const double> theta) const {
  if (theta.size() != size_) throw InputError("working vector has the wrong length");
  HmmModel m = shape_;
  Matrix& beta = m.transition.beta;
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < beta.rows(); ++r)
    for (Eigen::Index c = 0; c < beta.cols(); ++c) beta(r, c) = theta[k++];
  for (auto& e : m.emissions.channels) {
    for (int s = 0; s < m.n_states; ++s) {
      const double loc = theta[k++];
      const double disp = theta[k++];
      const auto i = static_cast<std::size_t>(s);
      switch (e.family) {
        case Family::gaussian: e.location[i] = loc; break;
        case Family::gamma: e.location[i] = std::exp(loc); break;
        case Family::von_mises: e.location[i] = wrap_angle(loc); break;
      }
      e.dispersion[i] = std::exp(disp);
    }
  }
  if (estimate_initial_) {
    Vector w(m.n_states);
    w(0) = 0.0;
    for (int i = 1; i < m.n_states; ++i) w(i) = theta[k++];
    w.array() -= w.maxCoeff();
    w = w.array().exp();
    m.initial_distribution = w / w.sum();
  }
  return m;
}

std::vector<std::string> ParameterMap::names() const {
  std::vector<std::string> out;
  out.reserve(size_);
  const int n = shape_.n_states;
  for (int from = 0; from < n; ++from)
    for (int to = 0; to < n; ++to) {
      if (from == to) continue;
      for (int term = 0; term <= shape_.n_covariates(); ++term)
        out.push_back("beta[" + std::to_string(from + 1) + "->" + std::to_string(to + 1) + "][" +
                      std::to_string(term) + "]");
    }
  for (std::size_t ch = 0; ch < shape_.emissions.n_channels(); ++ch) {
    const Family f = shape_.emissions.channels[ch].family;
    const std::string loc = f == Family::gamma ? "log_mean" : "mean";
    const std::string disp = f == Family::von_mises ? "log_kappa" : "log_sd";
    for (int s = 0; s < n; ++s) {
      const std::string idx = "[" + std::to_string(ch) + "][" + std::to_string(s + 1) + "]";
      out.push_back(loc + idx);
      out.push_back(disp + idx);
    }
  }
  if (estimate_initial_)
    for (int i = 1; i < n; ++i) out.push_back("init_logit[" + std::to_string(i + 1) + "]");
  return out;
}

WorkingParams transform(const HmmModel& model, bool estimate_initial) {
  return {ParameterMap(model, estimate_initial).to_working(model), estimate_initial};
}

HmmModel untransform(const WorkingParams& params, const HmmModel& shape) {
  return ParameterMap(shape, params.estimate_initial).to_model(params.theta);
}

}  // namespace occuhmm
