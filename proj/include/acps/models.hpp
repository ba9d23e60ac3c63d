#pragma once

#include "acps/random.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace acps {

struct McmcConfig {
  int burn = 1000;
  int keep = 2000;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Autoregression on an explicit lag set. An empty lag set with an intercept
/// is the white-noise (constant mean) model.
struct ArSpec {
  std::vector<int> lags{1};
  bool intercept = true;

  static ArSpec order(int p, bool intercept = true);
  int max_lag() const { return lags.empty() ? 0 : lags.back(); }
  int n_coeffs() const { return static_cast<int>(lags.size()) + (intercept ? 1 : 0); }
  /// Lags positive, distinct and sorted; at least one coefficient.
  void validate() const;
};

/// Gaussian prior on the coefficients and inverse-gamma IG(shape, rate) prior on
/// the innovation variance.
struct NigPrior {
  Eigen::VectorXd coeff_mean;
  Eigen::MatrixXd coeff_cov;
  double sigma_shape = 2.0;
  double sigma_rate = 1.0;

  /// Zero mean, 100 * I covariance, IG(2, 1).
  static NigPrior weak(int n_coeffs);
  void validate(int n_coeffs) const;
};

struct GaussianConditional {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

struct InverseGammaConditional {
  double shape = 0.0;
  double rate = 0.0;
};

/// Regression design for y_t on (1, y_{t-l} for l in lags), t = max_lag..T-1.
struct Design {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
};

Design build_design(std::span<const double> y, const ArSpec &spec);

/// Coefficient conditional N(mean, cov) with cov = (V^-1 + X'X/sigma2)^-1 and
/// mean = cov (V^-1 mu + X'y/sigma2). Sufficient statistics are passed directly.
GaussianConditional coefficient_conditional(const Eigen::MatrixXd &xtx, const Eigen::VectorXd &xty, double sigma2,
                                            const NigPrior &prior);

/// IG(shape + n/2, rate + ssr/2).
InverseGammaConditional variance_conditional(double ssr, std::size_t n, const NigPrior &prior);

struct ArPosterior {
  ArSpec spec;
  /// n_kept x n_coeffs, ordered (intercept, lag coefficients).
  Eigen::MatrixXd coeffs;
  Eigen::VectorXd sigma2;
  std::uint64_t seed = 0;

  int n_kept() const { return static_cast<int>(sigma2.size()); }
};

ArPosterior fit_ar(std::span<const double> y, const ArSpec &spec, const NigPrior &prior, const McmcConfig &mcmc);

/// Markov-switching AR: every regime has its own intercept, lag coefficients and
/// variance. Regime 0 is the low-variance regime after relabeling.
struct MsArSpec {
  int regimes = 2;
  ArSpec ar = ArSpec::order(1);
  /// One Dirichlet concentration row per regime. Empty means the default
  /// persistence-favoring prior: 9 on the diagonal, 1 elsewhere.
  std::vector<std::vector<double>> transition_prior;

  Eigen::MatrixXd concentration() const;
  void validate() const;
};

struct MsArDraw {
  /// regimes x n_coeffs.
  Eigen::MatrixXd coeffs;
  Eigen::VectorXd sigma2;
  /// Row-stochastic transition matrix, xi(m, l) = P(S_t = l | S_{t-1} = m).
  Eigen::MatrixXd transition;
  int last_state = 0;
};

struct MsArPosterior {
  MsArSpec spec;
  std::vector<MsArDraw> draws;
  /// Posterior frequency of each regime at each modeled time point
  /// (rows t = max_lag..T-1).
  Eigen::MatrixXd regime_probability;
  /// Iterations (burn-in included) in which some regime had no observations and
  /// its parameters were drawn from the prior.
  int empty_regime_iterations = 0;
  std::uint64_t seed = 0;

  int n_kept() const { return static_cast<int>(draws.size()); }
  /// argmax of regime_probability per time point.
  std::vector<int> modal_path() const;
};

/// Forward-filter backward-sample draw of a discrete state path.
/// log_lik is T x M; the initial distribution is the stationary law of xi.
std::vector<int> ffbs_states(const Eigen::MatrixXd &log_lik, const Eigen::MatrixXd &transition, Rng &rng);

/// Stationary distribution of a row-stochastic matrix.
Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd &transition);

/// Posterior Dirichlet concentrations c + N for each row given a state path.
Eigen::MatrixXd transition_posterior(const std::vector<int> &states, const Eigen::MatrixXd &concentration);

MsArPosterior fit_msar(std::span<const double> y, const MsArSpec &spec, const NigPrior &prior,
                       const McmcConfig &mcmc);

/// Time-varying-parameter AR:
///   y_t = x_t' beta_t + eps_t,      eps_t ~ N(0, sigma2)
///   beta_t = A beta_{t-1} + eta_t,  eta_t ~ N(0, Omega)
/// with x_t = (1, y_{t-1}, ..., y_{t-p}).
struct TvpArSpec {
  int lags = 1;
  /// Initial state beta_0 ~ N(state_mean, state_cov); defaults 0 and 10 * I.
  std::optional<Eigen::VectorXd> state_mean;
  std::optional<Eigen::MatrixXd> state_cov;
  /// Gaussian prior for each column of A: column j centered on e_j with
  /// covariance a_prior_var * I. Over long samples small departures of A from
  /// the identity compound into deterministic drift of the path, so the
  /// default keeps A at the random-walk law.
  double a_prior_var = 1e-10;
  /// Inverse-Wishart prior for Omega; dof defaults to k + 41 and the scale to
  /// omega_scale * I, a prior mean of 1e-6 * I.
  std::optional<double> omega_dof;
  double omega_scale = 4e-5;
  double sigma_shape = 2.0;
  double sigma_rate = 1.0;

  int dim() const { return lags + 1; }
  void validate() const;
};

struct TvpArDraw {
  Eigen::VectorXd last_state;
  Eigen::MatrixXd a;
  Eigen::MatrixXd omega;
  double sigma2 = 1.0;
};

struct TvpArPosterior {
  TvpArSpec spec;
  std::vector<TvpArDraw> draws;
  /// Posterior mean and standard deviation of the coefficient path, rows
  /// t = lags..T-1.
  Eigen::MatrixXd path_mean;
  Eigen::MatrixXd path_sd;
  /// Filter steps where the covariance needed symmetrization and jitter.
  int jitter_events = 0;
  std::uint64_t seed = 0;

  int n_kept() const { return static_cast<int>(draws.size()); }
};

/// Carter-Kohn draw of the state path for given (A, Omega, sigma2).
/// Returns a T x k matrix; jitter_events counts covariance repairs.
Eigen::MatrixXd carter_kohn(const Eigen::MatrixXd &x, const Eigen::VectorXd &y, const Eigen::MatrixXd &a,
                            const Eigen::MatrixXd &omega, double sigma2, const Eigen::VectorXd &b0,
                            const Eigen::MatrixXd &p0, Rng &rng, int &jitter_events);

/// Conditional of column j of A given the state path and the other columns.
GaussianConditional a_column_conditional(const Eigen::MatrixXd &path, const Eigen::MatrixXd &a, int column,
                                         const Eigen::MatrixXd &omega, const TvpArSpec &spec);

TvpArPosterior fit_tvpar(std::span<const double> y, const TvpArSpec &spec, const McmcConfig &mcmc);

using Posterior = std::variant<ArPosterior, MsArPosterior, TvpArPosterior>;

/// M simulated values of y_{T+h} given the history y_hist (whose last element is
/// y_T). Posterior draws are taken at an even stride when M <= n_kept and
/// resampled with replacement otherwise.
std::vector<double> predictive_draws(const Posterior &posterior, std::span<const double> y_hist, int h, int m,
                                     std::uint64_t seed);

enum class ModelKind { Ar, MsAr, TvpAr };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string &text);

/// A named model with its hyperparameters and MCMC budget. A prior left unset
/// takes NigPrior::weak for the model's coefficient count.
struct ModelSpec {
  std::string id;
  ModelKind kind = ModelKind::Ar;
  ArSpec ar;
  MsArSpec msar;
  TvpArSpec tvp;
  std::optional<NigPrior> prior;
  McmcConfig mcmc;

  int max_lag() const;
  void validate() const;
};

Posterior fit_model(const ModelSpec &spec, std::span<const double> y, std::uint64_t seed);

} // namespace acps
