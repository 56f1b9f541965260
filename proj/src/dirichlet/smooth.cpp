#include "occuhmm/dirichlet/smooth.hpp"

#include "occuhmm/error.hpp"
#include "occuhmm/stats.hpp"

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

namespace occuhmm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_likelihood_rows(const Matrix& eta, const Matrix& log_x) {
  double ll = 0.0;
  for (Eigen::Index t = 0; t < eta.rows(); ++t) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < eta.cols(); ++i) {
      const double a = std::exp(eta(t, i));
      total += a;
      ll += (a - 1.0) * log_x(t, i) - std::lgamma(a);
    }
    ll += std::lgamma(total);
  }
  return ll;
}

double penalty_term(const Matrix& penalty, std::span<const double> lambda, const Matrix& c) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < c.cols(); ++i) s += lambda[static_cast<std::size_t>(i)] * c.col(i).dot(penalty * c.col(i));
  return 0.5 * s;
}

Matrix select_rows(const Matrix& m, const std::vector<Eigen::Index>& rows) { return m(rows, Eigen::all); }

// Method-of-moments Dirichlet fit, expressed as constant spline coefficients
// (B-splines sum to one).
Matrix moment_start(const Matrix& log_x, int k) {
  const Matrix x = log_x.array().exp().matrix();
  const Vector m = x.colwise().mean();
  const double v = (x.col(0).array() - m(0)).square().mean();
  double s = v > 0 ? m(0) * (1 - m(0)) / v - 1.0 : 1e3;
  s = std::clamp(s, 1.0, 1e6);
  Matrix c(k, x.cols());
  for (Eigen::Index i = 0; i < x.cols(); ++i) c.col(i).setConstant(std::log(m(i) * s));
  return c;
}

}  // namespace

double dirichlet_logpdf(std::span<const double> alpha, std::span<const double> x) {
  if (alpha.size() != x.size() || alpha.size() < 2) throw InputError("alpha and x need the same length >= 2");
  double sum_x = 0.0, sum_a = 0.0, out = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (!(alpha[i] > 0) || !std::isfinite(alpha[i])) throw InputError("Dirichlet concentrations must be positive");
    if (!(x[i] > 0.0 && x[i] < 1.0)) throw DomainError("Dirichlet argument on or outside the simplex boundary");
    sum_x += x[i];
    sum_a += alpha[i];
    out += (alpha[i] - 1.0) * std::log(x[i]) - std::lgamma(alpha[i]);
  }
  if (std::abs(sum_x - 1.0) > 1e-8) throw DomainError("Dirichlet argument does not sum to 1");
  return out + std::lgamma(sum_a);
}

std::vector<double> clip_simplex(std::span<const double> x, double epsilon) {
  if (!(epsilon > 0 && epsilon < 0.5)) throw InputError("clip epsilon must lie in (0, 0.5)");
  std::vector<double> out(x.begin(), x.end());
  bool clipped = false;
  for (double& v : out) {
    const double c = std::clamp(v, epsilon, 1.0 - epsilon);
    clipped = clipped || c != v;
    v = c;
  }
  if (!clipped) return out;
  double s = 0.0;
  for (double v : out) s += v;
  for (double& v : out) v /= s;
  return out;
}

double DirichletSmoothFit::roughness() const {
  const Matrix p = basis.penalty();
  double s = 0.0;
  for (Eigen::Index i = 0; i < coefficients.cols(); ++i) s += coefficients.col(i).dot(p * coefficients.col(i));
  return s;
}

double dirichlet_penalized_objective(const Matrix& design, const Matrix& log_x, const Matrix& penalty,
                                     std::span<const double> lambda, const Matrix& coefficients, Matrix* gradient) {
  const Matrix eta = design * coefficients;
  const double value = log_likelihood_rows(eta, log_x) - penalty_term(penalty, lambda, coefficients);
  // Callers reject non-finite values; digamma would throw at the poles.
  if (gradient && std::isfinite(value)) {
    Matrix g(eta.rows(), eta.cols());
    for (Eigen::Index t = 0; t < eta.rows(); ++t) {
      double total = 0.0;
      for (Eigen::Index i = 0; i < eta.cols(); ++i) total += std::exp(eta(t, i));
      const double psi_total = boost::math::digamma(total);
      for (Eigen::Index i = 0; i < eta.cols(); ++i) {
        const double a = std::exp(eta(t, i));
        g(t, i) = a * (psi_total - boost::math::digamma(a) + log_x(t, i));
      }
    }
    *gradient = design.transpose() * g;
    for (Eigen::Index i = 0; i < coefficients.cols(); ++i)
      gradient->col(i) -= lambda[static_cast<std::size_t>(i)] * (penalty * coefficients.col(i));
  }
  return value;
}

PenalizedFit fit_dirichlet_penalized(const Matrix& design, const Matrix& log_x, const Matrix& penalty,
                                     std::span<const double> lambda, const Matrix* start, int max_iterations,
                                     double rel_tol) {
  const Eigen::Index k = design.cols();
  const Eigen::Index n = log_x.cols();
  const Eigen::Index T = design.rows();
  if (log_x.rows() != T) throw InputError("design and response differ in length");
  if (static_cast<Eigen::Index>(lambda.size()) != n) throw InputError("one smoothing parameter per state is required");
  for (double l : lambda)
    if (!(l >= 0) || !std::isfinite(l)) throw InputError("smoothing parameters must be non-negative");

  PenalizedFit fit;
  fit.coefficients = start ? *start : moment_start(log_x, static_cast<int>(k));
  Matrix grad;
  double value = dirichlet_penalized_objective(design, log_x, penalty, lambda, fit.coefficients, &grad);
  if (!std::isfinite(value)) throw NumericalError("Dirichlet objective is not finite at the start");

  Matrix info(n * k, n * k);
  Vector w(T);
  for (fit.iterations = 0; fit.iterations < max_iterations; ++fit.iterations) {
    // Expected information: alpha_i alpha_j (trigamma(alpha_i) [i == j] - trigamma(A)).
    const Matrix eta = design * fit.coefficients;
    const Matrix alpha = eta.array().exp().matrix();
    const Vector total = alpha.rowwise().sum();
    Vector tri_total(T);
    for (Eigen::Index t = 0; t < T; ++t) tri_total(t) = boost::math::trigamma(total(t));
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j <= i; ++j) {
        for (Eigen::Index t = 0; t < T; ++t) {
          double v = -alpha(t, i) * alpha(t, j) * tri_total(t);
          if (i == j) v += alpha(t, i) * alpha(t, i) * boost::math::trigamma(alpha(t, i));
          w(t) = v;
        }
        Matrix block = design.transpose() * (w.asDiagonal() * design);
        if (i == j) block += lambda[static_cast<std::size_t>(i)] * penalty;
        info.block(i * k, j * k, k, k) = block;
        if (i != j) info.block(j * k, i * k, k, k) = block.transpose();
      }
    const Vector g = Eigen::Map<const Vector>(grad.data(), grad.size());
    Eigen::LDLT<Matrix> ldlt(info);
    Vector step = ldlt.solve(g);
    if (ldlt.info() != Eigen::Success || !step.allFinite() || g.dot(step) <= 0) {
      info.diagonal().array() += 1e-8 * info.diagonal().cwiseAbs().maxCoeff() + 1e-10;
      step = info.ldlt().solve(g);
    }
    const double predicted = g.dot(step);

    double scale = 1.0;
    bool improved = false;
    Matrix trial, trial_grad;
    double trial_value = -kInf;
    for (int h = 0; h < 40; ++h) {
      trial = fit.coefficients + scale * Eigen::Map<const Matrix>(step.data(), k, n);
      trial_value = dirichlet_penalized_objective(design, log_x, penalty, lambda, trial, &trial_grad);
      if (std::isfinite(trial_value) && trial_value >= value) {
        improved = true;
        break;
      }
      scale *= 0.5;
    }
    if (!improved) {
      fit.converged = predicted < rel_tol * std::max(1.0, std::abs(value));
      break;
    }
    const double change = std::abs(trial_value - value) / std::max(1.0, std::abs(value));
    fit.coefficients = std::move(trial);
    grad = std::move(trial_grad);
    value = trial_value;
    if (change < rel_tol) {
      fit.converged = true;
      ++fit.iterations;
      break;
    }
  }
  fit.penalized_loglik = value;
  return fit;
}

DirichletSmoothFit fit_dirichlet_smooth(const StateProbSeries& probs, std::span<const double> covariate,
                                        const DirichletSmoothConfig& config) {
  const std::size_t T = probs.length();
  const int n = static_cast<int>(probs.probs.cols());
  if (covariate.size() != T) throw InputError("state probabilities and covariate differ in length");
  if (n < 2) throw InputError("Dirichlet smoothing needs at least two states");
  if (config.burn_in >= T) throw InputError("burn-in removes every index");
  if (config.cv_folds < 2 && !config.fixed_lambda) throw InputError("cross-validation needs at least two folds");
  for (double z : covariate)
    if (!std::isfinite(z)) throw InputError("covariate contains non-finite values");

  const std::span<const double> kept = covariate.subspan(config.burn_in);
  const double lo = stats::quantile(kept, config.lower_quantile);
  const double hi = stats::quantile(kept, config.upper_quantile);
  DirichletSmoothFit out;
  out.basis = SplineBasis(lo, hi, config.basis_dimension, config.degree);
  out.clip_epsilon = config.clip_epsilon;

  std::vector<double> z;
  std::vector<std::vector<double>> rows;
  for (std::size_t t = config.burn_in; t < T; ++t) {
    if (!out.basis.contains(covariate[t])) {
      ++out.n_dropped;
      continue;
    }
    z.push_back(covariate[t]);
    rows.push_back(clip_simplex(row_span(probs.probs, static_cast<Eigen::Index>(t)), config.clip_epsilon));
  }
  out.n_used = z.size();
  if (out.n_used < 10 * static_cast<std::size_t>(config.basis_dimension))
    throw InputError("basis dimension " + std::to_string(config.basis_dimension) + " exceeds the data support (" +
                     std::to_string(out.n_used) + " usable points)");

  const Matrix design = out.basis.design(z);
  Matrix log_x(static_cast<Eigen::Index>(z.size()), n);
  for (std::size_t t = 0; t < rows.size(); ++t)
    for (int i = 0; i < n; ++i) log_x(static_cast<Eigen::Index>(t), i) = std::log(rows[t][static_cast<std::size_t>(i)]);
  const Matrix penalty = out.basis.penalty();

  std::vector<double> lambda;
  if (config.fixed_lambda) {
    lambda = *config.fixed_lambda;
    if (static_cast<int>(lambda.size()) != n) throw InputError("one fixed smoothing parameter per state is required");
  } else {
    const auto& grid = config.log10_lambda_grid;
    if (grid.empty()) throw InputError("empty smoothing-parameter grid");
    // Contiguous folds over the retained time order.
    const auto m = static_cast<Eigen::Index>(z.size());
    std::vector<std::vector<Eigen::Index>> train(static_cast<std::size_t>(config.cv_folds)), test(train.size());
    for (Eigen::Index t = 0; t < m; ++t) {
      const auto fold = static_cast<std::size_t>(t * config.cv_folds / m);
      for (std::size_t f = 0; f < train.size(); ++f) (f == fold ? test : train)[f].push_back(t);
    }
    std::vector<Matrix> train_design, train_x, test_design, test_x;
    for (std::size_t f = 0; f < train.size(); ++f) {
      train_design.push_back(select_rows(design, train[f]));
      train_x.push_back(select_rows(log_x, train[f]));
      test_design.push_back(select_rows(design, test[f]));
      test_x.push_back(select_rows(log_x, test[f]));
    }
    std::vector<Matrix> warm(train.size());
    std::map<std::vector<std::size_t>, double> cache;
    auto score = [&](const std::vector<std::size_t>& idx) {
      if (auto it = cache.find(idx); it != cache.end()) return it->second;
      std::vector<double> lam(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) lam[i] = std::pow(10.0, grid[idx[i]]);
      double s = 0.0;
      for (std::size_t f = 0; f < train.size(); ++f) {
        const PenalizedFit pf = fit_dirichlet_penalized(train_design[f], train_x[f], penalty, lam,
                                                        warm[f].size() ? &warm[f] : nullptr, config.max_iterations,
                                                        config.rel_tol);
        warm[f] = pf.coefficients;
        s -= log_likelihood_rows(test_design[f] * pf.coefficients, test_x[f]);
      }
      if (!std::isfinite(s)) s = kInf;
      cache.emplace(idx, s);
      return s;
    };
    // Coordinate-wise search, starting from the grid's middle value.
    std::vector<std::size_t> idx(static_cast<std::size_t>(n), grid.size() / 2);
    double best = score(idx);
    for (int cycle = 0; cycle < config.max_cycles; ++cycle) {
      bool changed = false;
      for (std::size_t i = 0; i < idx.size(); ++i) {
        std::size_t best_g = idx[i];
        for (std::size_t g = 0; g < grid.size(); ++g) {
          auto trial = idx;
          trial[i] = g;
          const double s = score(trial);
          if (s < best) {
            best = s;
            best_g = g;
          }
        }
        if (best_g != idx[i]) {
          idx[i] = best_g;
          changed = true;
        }
      }
      if (!changed) break;
    }
    out.cv_score = best;
    for (std::size_t i : idx) lambda.push_back(std::pow(10.0, grid[i]));
  }

  const PenalizedFit pf = fit_dirichlet_penalized(design, log_x, penalty, lambda, nullptr, config.max_iterations,
                                                  config.rel_tol);
  out.coefficients = pf.coefficients;
  out.penalized_loglik = pf.penalized_loglik;
  out.converged = pf.converged;
  out.lambda = std::move(lambda);
  return out;
}

OccupancyCurve predict_occupancy(const DirichletSmoothFit& fit, std::span<const double> grid) {
  OccupancyCurve curve;
  curve.method = OccupancyMethod::dirichlet;
  curve.grid.assign(grid.begin(), grid.end());
  curve.counts.assign(grid.size(), 0);
  curve.probs.resize(static_cast<Eigen::Index>(grid.size()), fit.n_states());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    if (!fit.basis.contains(grid[g])) {
      std::ostringstream os;
      os.precision(17);
      os << "grid point " << grid[g] << " lies outside the fitted range [" << fit.basis.lower() << ", "
         << fit.basis.upper() << "]";
      throw ExtrapolationError(os.str());
    }
    const Vector eta = fit.coefficients.transpose() * fit.basis.evaluate(grid[g]);
    const Vector alpha = (eta.array() - eta.maxCoeff()).exp().matrix();
    curve.probs.row(static_cast<Eigen::Index>(g)) = (alpha / alpha.sum()).transpose();
  }
  return curve;
}

void write_dirichlet_fit(std::ostream& out, const DirichletSmoothFit& fit) {
  nlohmann::ordered_json j;
  j["basis"] = {{"lower", fit.basis.lower()},
                {"upper", fit.basis.upper()},
                {"dimension", fit.basis.dimension()},
                {"degree", fit.basis.degree()},
                {"knots", fit.basis.knots()}};
  std::vector<std::vector<double>> coef;
  for (Eigen::Index i = 0; i < fit.coefficients.cols(); ++i) {
    const Vector c = fit.coefficients.col(i);
    coef.emplace_back(c.data(), c.data() + c.size());
  }
  j["coefficients"] = coef;
  j["lambda"] = fit.lambda;
  j["penalized_loglik"] = fit.penalized_loglik;
  j["clip_epsilon"] = fit.clip_epsilon;
  j["converged"] = fit.converged;
  j["n_used"] = fit.n_used;
  j["n_dropped"] = fit.n_dropped;
  j["cv_score"] = fit.cv_score;
  out << j.dump(2) << '\n';
}

DirichletSmoothFit read_dirichlet_fit(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
    DirichletSmoothFit fit;
    const auto& b = j.at("basis");
    fit.basis = SplineBasis(b.at("lower").get<double>(), b.at("upper").get<double>(), b.at("dimension").get<int>(),
                            b.at("degree").get<int>());
    const auto coef = j.at("coefficients").get<std::vector<std::vector<double>>>();
    fit.coefficients.resize(fit.basis.dimension(), static_cast<Eigen::Index>(coef.size()));
    for (std::size_t i = 0; i < coef.size(); ++i) {
      if (static_cast<int>(coef[i].size()) != fit.basis.dimension()) throw InputError("coefficient length mismatch");
      for (int r = 0; r < fit.basis.dimension(); ++r) fit.coefficients(r, static_cast<Eigen::Index>(i)) = coef[i][static_cast<std::size_t>(r)];
    }
    fit.lambda = j.at("lambda").get<std::vector<double>>();
    fit.penalized_loglik = j.at("penalized_loglik").get<double>();
    fit.clip_epsilon = j.at("clip_epsilon").get<double>();
    fit.converged = j.at("converged").get<bool>();
    fit.n_used = j.at("n_used").get<std::size_t>();
    fit.n_dropped = j.at("n_dropped").get<std::size_t>();
    fit.cv_score = j.at("cv_score").get<double>();
    return fit;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed Dirichlet fit: ") + e.what());
  }
}

}  // namespace occuhmm
