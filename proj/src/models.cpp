#include "acps/models.hpp"

#include "acps/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace acps {

namespace {

void require_finite(std::span<const double> y, const char *who) {
  for (std::size_t t = 0; t < y.size(); ++t)
    if (!std::isfinite(y[t]))
      throw DomainError(std::string(who) + ": non-finite value at index " + std::to_string(t));
}

void require_length(std::span<const double> y, int max_lag, const char *who) {
  if (static_cast<long>(y.size()) <= max_lag + 10)
    throw DomainError(std::string(who) + ": series length " + std::to_string(y.size()) +
                      " must exceed max lag + 10 = " + std::to_string(max_lag + 10));
}

Eigen::VectorXd standard_normal_vector(Rng &rng, Eigen::Index n) {
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i)
    z[i] = draw_normal(rng);
  return z;
}

Eigen::VectorXd draw_gaussian(const GaussianConditional &g, Rng &rng, const char *who) {
  Eigen::LLT<Eigen::MatrixXd> llt(g.cov);
  if (llt.info() != Eigen::Success)
    throw NumericalError(std::string(who) + ": conditional covariance is not positive definite");
  return g.mean + llt.matrixL() * standard_normal_vector(rng, g.mean.size());
}

double draw_inverse_gamma(const InverseGammaConditional &ig, Rng &rng) {
  return ig.rate / draw_gamma(rng, ig.shape);
}

Eigen::VectorXd draw_dirichlet(const Eigen::VectorXd &alpha, Rng &rng) {
  Eigen::VectorXd g(alpha.size());
  for (Eigen::Index i = 0; i < alpha.size(); ++i)
    g[i] = draw_gamma(rng, alpha[i]);
  const double s = g.sum();
  if (!(s > 0.0))
    throw NumericalError("Dirichlet draw underflowed");
  return g / s;
}

/// Omega ~ IW(dof, scale) via the Bartlett decomposition of W(dof, scale^-1).
Eigen::MatrixXd draw_inverse_wishart(double dof, const Eigen::MatrixXd &scale, Rng &rng) {
  const Eigen::Index k = scale.rows();
  const Eigen::MatrixXd scale_inv = scale.llt().solve(Eigen::MatrixXd::Identity(k, k));
  Eigen::LLT<Eigen::MatrixXd> llt(scale_inv);
  if (llt.info() != Eigen::Success)
    throw NumericalError("inverse-Wishart scale is not positive definite");
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    b(i, i) = std::sqrt(2.0 * draw_gamma(rng, 0.5 * (dof - static_cast<double>(i))));
    for (Eigen::Index j = 0; j < i; ++j)
      b(i, j) = draw_normal(rng);
  }
  const Eigen::MatrixXd lb = llt.matrixL() * b;
  const Eigen::MatrixXd w = lb * lb.transpose();
  Eigen::MatrixXd omega = w.llt().solve(Eigen::MatrixXd::Identity(k, k));
  return 0.5 * (omega + omega.transpose());
}

void check_rank(const Eigen::MatrixXd &x, const char *who) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < x.cols()) {
    std::ostringstream msg;
    msg << who << ": regressor matrix is rank deficient (rank " << qr.rank() << " of " << x.cols()
        << " columns); the series may be constant or the lag set redundant";
    throw NumericalError(msg.str());
  }
}

double gaussian_log_density(double y, double mean, double var) {
  const double r = y - mean;
  return -0.5 * (std::log(2.0 * std::numbers::pi * var) + r * r / var);
}

int draw_index(const Eigen::VectorXd &probs, Rng &rng) {
  const double u = draw_uniform(rng) * probs.sum();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc)
      return static_cast<int>(i);
  }
  return static_cast<int>(probs.size()) - 1;
}

/// Conditional mean of the next value given a history buffer whose back is the
/// most recent value.
template <typename Buf>
double ar_mean(const Eigen::Ref<const Eigen::VectorXd> &coeffs, const ArSpec &spec, const Buf &hist) {
  double m = 0.0;
  int c = 0;
  if (spec.intercept)
    m += coeffs[c++];
  for (const int lag : spec.lags)
    m += coeffs[c++] * hist[hist.size() - static_cast<std::size_t>(lag)];
  return m;
}

} // namespace

void McmcConfig::validate() const {
  if (burn < 0)
    throw DomainError("mcmc burn-in must be non-negative");
  if (keep < 1)
    throw DomainError("mcmc keep must be at least 1");
}

ArSpec ArSpec::order(int p, bool intercept) {
  if (p < 0)
    throw DomainError("AR order must be non-negative");
  ArSpec s;
  s.lags.clear();
  for (int l = 1; l <= p; ++l)
    s.lags.push_back(l);
  s.intercept = intercept;
  return s;
}

void ArSpec::validate() const {
  for (std::size_t i = 0; i < lags.size(); ++i) {
    if (lags[i] < 1)
      throw DomainError("lag indices must be positive");
    if (i > 0 && lags[i] <= lags[i - 1])
      throw DomainError("lag indices must be distinct and sorted");
  }
  if (n_coeffs() == 0)
    throw DomainError("AR spec needs at least one coefficient");
}

NigPrior NigPrior::weak(int n_coeffs) {
  NigPrior p;
  p.coeff_mean = Eigen::VectorXd::Zero(n_coeffs);
  p.coeff_cov = 100.0 * Eigen::MatrixXd::Identity(n_coeffs, n_coeffs);
  return p;
}

void NigPrior::validate(int n_coeffs) const {
  if (coeff_mean.size() != n_coeffs || coeff_cov.rows() != n_coeffs || coeff_cov.cols() != n_coeffs)
    throw DomainError("prior dimension " + std::to_string(coeff_mean.size()) + " does not match " +
                      std::to_string(n_coeffs) + " coefficients");
  if (!coeff_cov.isApprox(coeff_cov.transpose()))
    throw DomainError("prior coefficient covariance must be symmetric");
  if (Eigen::LLT<Eigen::MatrixXd>(coeff_cov).info() != Eigen::Success)
    throw DomainError("prior coefficient covariance must be positive definite");
  if (!(sigma_shape > 0.0) || !(sigma_rate > 0.0))
    throw DomainError("inverse-gamma prior parameters must be positive");
}

Design build_design(std::span<const double> y, const ArSpec &spec) {
  const int p = spec.max_lag();
  const Eigen::Index n = static_cast<Eigen::Index>(y.size()) - p;
  if (n <= 0)
    throw DomainError("series too short for the lag set");
  Design d;
  d.x.resize(n, spec.n_coeffs());
  d.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::size_t t = static_cast<std::size_t>(i + p);
    int c = 0;
    if (spec.intercept)
      d.x(i, c++) = 1.0;
    for (const int lag : spec.lags)
      d.x(i, c++) = y[t - static_cast<std::size_t>(lag)];
    d.y[i] = y[t];
  }
  return d;
}

GaussianConditional coefficient_conditional(const Eigen::MatrixXd &xtx, const Eigen::VectorXd &xty, double sigma2,
                                            const NigPrior &prior) {
  const Eigen::Index k = xtx.rows();
  const Eigen::MatrixXd prior_prec = prior.coeff_cov.llt().solve(Eigen::MatrixXd::Identity(k, k));
  const Eigen::MatrixXd prec = prior_prec + xtx / sigma2;
  Eigen::LLT<Eigen::MatrixXd> llt(prec);
  if (llt.info() != Eigen::Success)
    throw NumericalError("coefficient conditional precision is not positive definite");
  GaussianConditional g;
  g.cov = llt.solve(Eigen::MatrixXd::Identity(k, k));
  g.cov = 0.5 * (g.cov + g.cov.transpose());
  g.mean = llt.solve(prior_prec * prior.coeff_mean + xty / sigma2);
  return g;
}

InverseGammaConditional variance_conditional(double ssr, std::size_t n, const NigPrior &prior) {
  return {prior.sigma_shape + 0.5 * static_cast<double>(n), prior.sigma_rate + 0.5 * ssr};
}

ArPosterior fit_ar(std::span<const double> y, const ArSpec &spec, const NigPrior &prior, const McmcConfig &mcmc) {
  spec.validate();
  prior.validate(spec.n_coeffs());
  mcmc.validate();
  require_finite(y, "fit_ar");
  require_length(y, spec.max_lag(), "fit_ar");

  const Design d = build_design(y, spec);
  check_rank(d.x, "fit_ar");
  const Eigen::MatrixXd xtx = d.x.transpose() * d.x;
  const Eigen::VectorXd xty = d.x.transpose() * d.y;
  const std::size_t n = static_cast<std::size_t>(d.y.size());

  Rng rng = make_rng(mcmc.seed);
  const Eigen::VectorXd ols = xtx.ldlt().solve(xty);
  double sigma2 = std::max((d.y - d.x * ols).squaredNorm() / static_cast<double>(n), 1e-8);

  ArPosterior post;
  post.spec = spec;
  post.seed = mcmc.seed;
  post.coeffs.resize(mcmc.keep, spec.n_coeffs());
  post.sigma2.resize(mcmc.keep);
  for (int it = 0; it < mcmc.burn + mcmc.keep; ++it) {
    const Eigen::VectorXd b = draw_gaussian(coefficient_conditional(xtx, xty, sigma2, prior), rng, "fit_ar");
    const double ssr = (d.y - d.x * b).squaredNorm();
    sigma2 = draw_inverse_gamma(variance_conditional(ssr, n, prior), rng);
    if (it >= mcmc.burn) {
      post.coeffs.row(it - mcmc.burn) = b.transpose();
      post.sigma2[it - mcmc.burn] = sigma2;
    }
  }
  return post;
}

Eigen::MatrixXd MsArSpec::concentration() const {
  if (transition_prior.empty()) {
    Eigen::MatrixXd c = Eigen::MatrixXd::Ones(regimes, regimes);
    c.diagonal().setConstant(9.0);
    return c;
  }
  Eigen::MatrixXd c(regimes, regimes);
  for (int m = 0; m < regimes; ++m)
    for (int l = 0; l < regimes; ++l)
      c(m, l) = transition_prior[m][l];
  return c;
}

void MsArSpec::validate() const {
  if (regimes < 2)
    throw DomainError("Markov-switching model needs at least 2 regimes");
  ar.validate();
  if (!transition_prior.empty()) {
    if (static_cast<int>(transition_prior.size()) != regimes)
      throw DomainError("transition prior needs one row per regime");
    for (const auto &row : transition_prior) {
      if (static_cast<int>(row.size()) != regimes)
        throw DomainError("transition prior rows need one concentration per regime");
      for (const double c : row)
        if (!(c > 0.0))
          throw DomainError("Dirichlet concentrations must be positive");
    }
  }
}

std::vector<int> MsArPosterior::modal_path() const {
  std::vector<int> path(static_cast<std::size_t>(regime_probability.rows()));
  for (Eigen::Index t = 0; t < regime_probability.rows(); ++t)
    regime_probability.row(t).maxCoeff(&path[static_cast<std::size_t>(t)]);
  return path;
}

Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd &transition) {
  const Eigen::Index m = transition.rows();
  // Solve pi' (I - xi) = 0 with sum(pi) = 1 by replacing one equation.
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(m, m) - transition.transpose();
  a.row(m - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  rhs[m - 1] = 1.0;
  Eigen::VectorXd pi = a.fullPivLu().solve(rhs);
  for (Eigen::Index i = 0; i < m; ++i)
    pi[i] = std::max(pi[i], 0.0);
  if (!(pi.sum() > 0.0) || !pi.allFinite())
    return Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));
  return pi / pi.sum();
}

std::vector<int> ffbs_states(const Eigen::MatrixXd &log_lik, const Eigen::MatrixXd &transition, Rng &rng) {
  const Eigen::Index n = log_lik.rows();
  const Eigen::Index m = log_lik.cols();
  Eigen::MatrixXd filtered(n, m);
  Eigen::VectorXd pred = stationary_distribution(transition);
  for (Eigen::Index t = 0; t < n; ++t) {
    if (t > 0)
      pred = transition.transpose() * filtered.row(t - 1).transpose();
    const double mx = log_lik.row(t).maxCoeff();
    Eigen::VectorXd f(m);
    for (Eigen::Index j = 0; j < m; ++j)
      f[j] = pred[j] * std::exp(log_lik(t, j) - mx);
    const double s = f.sum();
    if (!(s > 0.0) || !std::isfinite(s))
      throw NumericalError("regime filter degenerated at time " + std::to_string(t));
    filtered.row(t) = (f / s).transpose();
  }
  std::vector<int> states(static_cast<std::size_t>(n));
  states[n - 1] = draw_index(filtered.row(n - 1).transpose(), rng);
  for (Eigen::Index t = n - 2; t >= 0; --t) {
    const int next = states[static_cast<std::size_t>(t + 1)];
    Eigen::VectorXd p(m);
    for (Eigen::Index j = 0; j < m; ++j)
      p[j] = filtered(t, j) * transition(j, next);
    states[static_cast<std::size_t>(t)] = draw_index(p, rng);
  }
  return states;
}

Eigen::MatrixXd transition_posterior(const std::vector<int> &states, const Eigen::MatrixXd &concentration) {
  Eigen::MatrixXd post = concentration;
  for (std::size_t t = 1; t < states.size(); ++t)
    post(states[t - 1], states[t]) += 1.0;
  return post;
}

MsArPosterior fit_msar(std::span<const double> y, const MsArSpec &spec, const NigPrior &prior,
                       const McmcConfig &mcmc) {
  spec.validate();
  const int k = spec.ar.n_coeffs();
  prior.validate(k);
  mcmc.validate();
  require_finite(y, "fit_msar");
  require_length(y, spec.ar.max_lag(), "fit_msar");

  const Design d = build_design(y, spec.ar);
  check_rank(d.x, "fit_msar");
  const Eigen::Index n = d.y.size();
  const int nr = spec.regimes;
  const Eigen::MatrixXd conc = spec.concentration();

  Rng rng = make_rng(mcmc.seed);
  const Eigen::VectorXd ols = (d.x.transpose() * d.x).ldlt().solve(d.x.transpose() * d.y);
  const double s2 = std::max((d.y - d.x * ols).squaredNorm() / static_cast<double>(n), 1e-8);

  Eigen::MatrixXd coeffs(nr, k);
  Eigen::VectorXd sigma2(nr);
  for (int r = 0; r < nr; ++r) {
    coeffs.row(r) = ols.transpose();
    // Spread the starting variances so the regimes start apart.
    sigma2[r] = s2 * std::pow(4.0, static_cast<double>(r) - 0.5 * (nr - 1));
  }
  Eigen::MatrixXd xi = Eigen::MatrixXd::Constant(nr, nr, 0.1 / (nr - 1));
  xi.diagonal().setConstant(0.9);

  MsArPosterior post;
  post.spec = spec;
  post.seed = mcmc.seed;
  post.regime_probability = Eigen::MatrixXd::Zero(n, nr);
  post.draws.reserve(static_cast<std::size_t>(mcmc.keep));

  Eigen::MatrixXd log_lik(n, nr);
  for (int it = 0; it < mcmc.burn + mcmc.keep; ++it) {
    for (int r = 0; r < nr; ++r) {
      const Eigen::VectorXd mu = d.x * coeffs.row(r).transpose();
      for (Eigen::Index t = 0; t < n; ++t)
        log_lik(t, r) = gaussian_log_density(d.y[t], mu[t], sigma2[r]);
    }
    std::vector<int> states = ffbs_states(log_lik, xi, rng);

    bool empty = false;
    for (int r = 0; r < nr; ++r) {
      Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(k, k);
      Eigen::VectorXd xty = Eigen::VectorXd::Zero(k);
      std::size_t count = 0;
      for (Eigen::Index t = 0; t < n; ++t) {
        if (states[static_cast<std::size_t>(t)] != r)
          continue;
        xtx.noalias() += d.x.row(t).transpose() * d.x.row(t);
        xty.noalias() += d.x.row(t).transpose() * d.y[t];
        ++count;
      }
      if (count == 0) {
        empty = true;
        coeffs.row(r) = draw_gaussian({prior.coeff_mean, prior.coeff_cov}, rng, "fit_msar").transpose();
        sigma2[r] = draw_inverse_gamma({prior.sigma_shape, prior.sigma_rate}, rng);
        continue;
      }
      const Eigen::VectorXd b =
          draw_gaussian(coefficient_conditional(xtx, xty, sigma2[r], prior), rng, "fit_msar");
      coeffs.row(r) = b.transpose();
      double ssr = 0.0;
      for (Eigen::Index t = 0; t < n; ++t)
        if (states[static_cast<std::size_t>(t)] == r) {
          const double e = d.y[t] - d.x.row(t).dot(b);
          ssr += e * e;
        }
      sigma2[r] = draw_inverse_gamma(variance_conditional(ssr, count, prior), rng);
    }
    if (empty)
      ++post.empty_regime_iterations;

    const Eigen::MatrixXd tp = transition_posterior(states, conc);
    for (int r = 0; r < nr; ++r)
      xi.row(r) = draw_dirichlet(tp.row(r).transpose(), rng).transpose();

    // Identification: order regimes by variance and permute everything with it.
    std::vector<int> order(static_cast<std::size_t>(nr));
    for (int r = 0; r < nr; ++r)
      order[static_cast<std::size_t>(r)] = r;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return sigma2[a] < sigma2[b]; });
    bool permuted = false;
    for (int r = 0; r < nr; ++r)
      permuted |= order[static_cast<std::size_t>(r)] != r;
    if (permuted) {
      std::vector<int> inverse(static_cast<std::size_t>(nr));
      Eigen::MatrixXd c2(nr, k), xi2(nr, nr);
      Eigen::VectorXd s2n(nr);
      for (int r = 0; r < nr; ++r) {
        const int from = order[static_cast<std::size_t>(r)];
        inverse[static_cast<std::size_t>(from)] = r;
        c2.row(r) = coeffs.row(from);
        s2n[r] = sigma2[from];
        for (int l = 0; l < nr; ++l)
          xi2(r, l) = xi(from, order[static_cast<std::size_t>(l)]);
      }
      coeffs = c2;
      sigma2 = s2n;
      xi = xi2;
      for (auto &s : states)
        s = inverse[static_cast<std::size_t>(s)];
    }

    if (it >= mcmc.burn) {
      post.draws.push_back({coeffs, sigma2, xi, states.back()});
      for (Eigen::Index t = 0; t < n; ++t)
        post.regime_probability(t, states[static_cast<std::size_t>(t)]) += 1.0;
    }
  }
  post.regime_probability /= static_cast<double>(mcmc.keep);
  return post;
}

void TvpArSpec::validate() const {
  if (lags < 1 || lags > 2)
    throw DomainError("TVP-AR supports 1 or 2 lags");
  const int k = dim();
  if (state_mean && state_mean->size() != k)
    throw DomainError("TVP-AR state mean has the wrong dimension");
  if (state_cov) {
    if (state_cov->rows() != k || state_cov->cols() != k)
      throw DomainError("TVP-AR state covariance has the wrong dimension");
    if (Eigen::LLT<Eigen::MatrixXd>(*state_cov).info() != Eigen::Success)
      throw DomainError("TVP-AR state covariance must be positive definite");
  }
  if (!(a_prior_var > 0.0))
    throw DomainError("TVP-AR A prior variance must be positive");
  if (omega_dof && !(*omega_dof > k + 1))
    throw DomainError("inverse-Wishart dof must exceed dimension + 1");
  if (!(omega_scale > 0.0))
    throw DomainError("inverse-Wishart scale must be positive");
  if (!(sigma_shape > 0.0) || !(sigma_rate > 0.0))
    throw DomainError("inverse-gamma prior parameters must be positive");
}

namespace {

/// Repairs a covariance that lost symmetry or positive definiteness.
template <typename Mat> Mat repair_covariance(const Mat &p, int &jitter_events) {
  Mat s = 0.5 * (p + p.transpose());
  if (Eigen::LLT<Mat>(s).info() == Eigen::Success)
    return s;
  ++jitter_events;
  double jitter = 1e-10 * std::max(1.0, s.diagonal().cwiseAbs().maxCoeff());
  for (int i = 0; i < 40; ++i, jitter *= 10.0) {
    const Mat j = s + jitter * Mat::Identity(s.rows(), s.cols());
    if (Eigen::LLT<Mat>(j).info() == Eigen::Success)
      return j;
  }
  throw NumericalError("Kalman covariance could not be repaired");
}

template <typename Vec> Vec normal_vector(Rng &rng, Eigen::Index k) {
  Vec z = Vec::Zero(k);
  for (Eigen::Index i = 0; i < k; ++i)
    z[i] = draw_normal(rng);
  return z;
}

// Fixed-size instantiations keep the per-step algebra off the heap.
template <int K>
Eigen::MatrixXd carter_kohn_impl(const Eigen::MatrixXd &x, const Eigen::VectorXd &y, const Eigen::MatrixXd &a_in,
                                 const Eigen::MatrixXd &omega_in, double sigma2, const Eigen::VectorXd &b0,
                                 const Eigen::MatrixXd &p0, Rng &rng, int &jitter_events) {
  using Vec = Eigen::Matrix<double, K, 1>;
  using Mat = Eigen::Matrix<double, K, K>;
  const Eigen::Index n = y.size();
  const Eigen::Index k = a_in.rows();
  const Mat a = a_in;
  const Mat omega = omega_in;
  std::vector<Vec> bf(static_cast<std::size_t>(n));
  std::vector<Mat> pf(static_cast<std::size_t>(n));
  std::vector<Mat> pp(static_cast<std::size_t>(n));
  Vec b = b0;
  Mat p = p0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const std::size_t ti = static_cast<std::size_t>(t);
    const Vec bpred = a * b;
    pp[ti] = repair_covariance<Mat>(a * p * a.transpose() + omega, jitter_events);
    const Vec xt = x.row(t).transpose();
    const Vec px = pp[ti] * xt;
    const double f = xt.dot(px) + sigma2;
    b = bpred + (px / f) * (y[t] - xt.dot(bpred));
    p = repair_covariance<Mat>(pp[ti] - px * px.transpose() / f, jitter_events);
    bf[ti] = b;
    pf[ti] = p;
  }

  Eigen::MatrixXd path(n, k);
  {
    const std::size_t last = static_cast<std::size_t>(n - 1);
    Eigen::LLT<Mat> llt(pf[last]);
    path.row(n - 1) = (bf[last] + llt.matrixL() * normal_vector<Vec>(rng, k)).transpose();
  }
  for (Eigen::Index t = n - 2; t >= 0; --t) {
    const std::size_t ti = static_cast<std::size_t>(t);
    Eigen::LLT<Mat> pred_llt(pp[ti + 1]);
    // G = P_t A' P_{t+1|t}^{-1}
    const Mat ap = a * pf[ti];
    const Mat g = pred_llt.solve(ap).transpose();
    const Vec next = path.row(t + 1).transpose();
    const Vec mean = bf[ti] + g * (next - a * bf[ti]);
    const Mat cov = repair_covariance<Mat>(pf[ti] - g * ap, jitter_events);
    Eigen::LLT<Mat> llt(cov);
    path.row(t) = (mean + llt.matrixL() * normal_vector<Vec>(rng, k)).transpose();
  }
  return path;
}

/// Cross moments of consecutive states: sxx = sum beta_{t-1} beta_{t-1}',
/// syx = sum beta_t beta_{t-1}', syy = sum beta_t beta_t' over t = 2..T.
struct PathMoments {
  Eigen::MatrixXd sxx;
  Eigen::MatrixXd syx;
  Eigen::MatrixXd syy;
};

PathMoments path_moments(const Eigen::MatrixXd &path) {
  const Eigen::Index n = path.rows();
  const auto prev = path.topRows(n - 1);
  const auto next = path.bottomRows(n - 1);
  return {prev.transpose() * prev, next.transpose() * prev, next.transpose() * next};
}

GaussianConditional a_column_from_moments(const PathMoments &m, const Eigen::MatrixXd &a, int column,
                                          const Eigen::MatrixXd &omega_inv, double prior_var) {
  const Eigen::Index k = a.rows();
  Eigen::MatrixXd a_other = a;
  a_other.col(column).setZero();
  const double sxx = m.sxx(column, column);
  const Eigen::VectorXd sxr = m.syx.col(column) - a_other * m.sxx.col(column);
  const Eigen::MatrixXd prior_prec = Eigen::MatrixXd::Identity(k, k) / prior_var;
  Eigen::VectorXd prior_mean = Eigen::VectorXd::Zero(k);
  prior_mean[column] = 1.0;
  Eigen::LLT<Eigen::MatrixXd> llt(prior_prec + sxx * omega_inv);
  if (llt.info() != Eigen::Success)
    throw NumericalError("A column conditional precision is not positive definite");
  GaussianConditional g;
  g.cov = llt.solve(Eigen::MatrixXd::Identity(k, k));
  g.cov = 0.5 * (g.cov + g.cov.transpose());
  g.mean = llt.solve(prior_prec * prior_mean + omega_inv * sxr);
  return g;
}

Eigen::MatrixXd inverse_spd(const Eigen::MatrixXd &m) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success)
    throw NumericalError("matrix is not positive definite");
  return llt.solve(Eigen::MatrixXd::Identity(m.rows(), m.cols()));
}

} // namespace

Eigen::MatrixXd carter_kohn(const Eigen::MatrixXd &x, const Eigen::VectorXd &y, const Eigen::MatrixXd &a,
                            const Eigen::MatrixXd &omega, double sigma2, const Eigen::VectorXd &b0,
                            const Eigen::MatrixXd &p0, Rng &rng, int &jitter_events) {
  const Eigen::Index k = a.rows();
  if (y.size() < 1 || x.rows() != y.size() || x.cols() != k || a.cols() != k || omega.rows() != k ||
      omega.cols() != k || b0.size() != k || p0.rows() != k || p0.cols() != k)
    throw DomainError("carter_kohn: inconsistent dimensions");
  switch (k) {
  case 2:
    return carter_kohn_impl<2>(x, y, a, omega, sigma2, b0, p0, rng, jitter_events);
  case 3:
    return carter_kohn_impl<3>(x, y, a, omega, sigma2, b0, p0, rng, jitter_events);
  default:
    return carter_kohn_impl<Eigen::Dynamic>(x, y, a, omega, sigma2, b0, p0, rng, jitter_events);
  }
}

GaussianConditional a_column_conditional(const Eigen::MatrixXd &path, const Eigen::MatrixXd &a, int column,
                                         const Eigen::MatrixXd &omega, const TvpArSpec &spec) {
  if (path.rows() < 2 || path.cols() != a.rows() || column < 0 || column >= a.cols())
    throw DomainError("a_column_conditional: inconsistent dimensions");
  return a_column_from_moments(path_moments(path), a, column, inverse_spd(omega), spec.a_prior_var);
}

TvpArPosterior fit_tvpar(std::span<const double> y, const TvpArSpec &spec, const McmcConfig &mcmc) {
  spec.validate();
  mcmc.validate();
  require_finite(y, "fit_tvpar");
  require_length(y, spec.lags, "fit_tvpar");

  const ArSpec ar = ArSpec::order(spec.lags);
  const Design d = build_design(y, ar);
  check_rank(d.x, "fit_tvpar");
  const Eigen::Index n = d.y.size();
  const int k = spec.dim();
  const Eigen::VectorXd b0 = spec.state_mean.value_or(Eigen::VectorXd::Zero(k));
  const Eigen::MatrixXd p0 = spec.state_cov.value_or(10.0 * Eigen::MatrixXd::Identity(k, k));
  const double nu0 = spec.omega_dof.value_or(k + 41.0);
  const Eigen::MatrixXd s0 = spec.omega_scale * Eigen::MatrixXd::Identity(k, k);

  Rng rng = make_rng(mcmc.seed);
  const Eigen::VectorXd ols = (d.x.transpose() * d.x).ldlt().solve(d.x.transpose() * d.y);
  double sigma2 = std::max((d.y - d.x * ols).squaredNorm() / static_cast<double>(n), 1e-8);
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(k, k);
  Eigen::MatrixXd omega = s0 / (nu0 - k - 1.0);

  TvpArPosterior post;
  post.spec = spec;
  post.seed = mcmc.seed;
  post.draws.reserve(static_cast<std::size_t>(mcmc.keep));
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n, k);
  Eigen::MatrixXd sumsq = Eigen::MatrixXd::Zero(n, k);

  for (int it = 0; it < mcmc.burn + mcmc.keep; ++it) {
    const Eigen::MatrixXd path = carter_kohn(d.x, d.y, a, omega, sigma2, b0, p0, rng, post.jitter_events);
    const PathMoments m = path_moments(path);

    const Eigen::MatrixXd omega_inv = inverse_spd(omega);
    for (int j = 0; j < k; ++j)
      a.col(j) = draw_gaussian(a_column_from_moments(m, a, j, omega_inv, spec.a_prior_var), rng, "fit_tvpar");

    const Eigen::MatrixXd scatter =
        m.syy - a * m.syx.transpose() - m.syx * a.transpose() + a * m.sxx * a.transpose();
    omega = draw_inverse_wishart(nu0 + static_cast<double>(n - 1), s0 + 0.5 * (scatter + scatter.transpose()), rng);

    const double ssr = (d.y - (d.x.array() * path.array()).rowwise().sum().matrix()).squaredNorm();
    sigma2 = draw_inverse_gamma({spec.sigma_shape + 0.5 * static_cast<double>(n), spec.sigma_rate + 0.5 * ssr}, rng);

    if (it >= mcmc.burn) {
      post.draws.push_back({path.row(n - 1).transpose(), a, omega, sigma2});
      sum += path;
      sumsq += path.cwiseProduct(path);
    }
  }
  const double keep = static_cast<double>(mcmc.keep);
  post.path_mean = sum / keep;
  post.path_sd = (sumsq / keep - post.path_mean.cwiseProduct(post.path_mean)).cwiseMax(0.0).cwiseSqrt();
  return post;
}

namespace {

std::vector<int> select_draws(int n_kept, int m, Rng &rng) {
  std::vector<int> idx(static_cast<std::size_t>(m));
  if (m <= n_kept) {
    for (int i = 0; i < m; ++i)
      idx[static_cast<std::size_t>(i)] =
          static_cast<int>(static_cast<long long>(i) * n_kept / m);
  } else {
    for (auto &v : idx)
      v = std::min(n_kept - 1, static_cast<int>(draw_uniform(rng) * n_kept));
  }
  return idx;
}

std::vector<double> history_tail(std::span<const double> y_hist, int max_lag) {
  if (static_cast<int>(y_hist.size()) < max_lag)
    throw DomainError("history shorter than the model's maximum lag");
  require_finite(y_hist, "predictive_draws");
  return std::vector<double>(y_hist.end() - max_lag, y_hist.end());
}

std::vector<double> predict(const ArPosterior &post, std::span<const double> y_hist, int h, int m, Rng &rng) {
  const ArSpec &spec = post.spec;
  const std::vector<double> tail = history_tail(y_hist, spec.max_lag());
  const auto idx = select_draws(post.n_kept(), m, rng);
  std::vector<double> out(static_cast<std::size_t>(m));
  std::vector<double> buf;
  for (int i = 0; i < m; ++i) {
    const int j = idx[static_cast<std::size_t>(i)];
    const Eigen::VectorXd b = post.coeffs.row(j).transpose();
    const double sd = std::sqrt(post.sigma2[j]);
    buf = tail;
    for (int s = 0; s < h; ++s)
      buf.push_back(ar_mean(b, spec, buf) + sd * draw_normal(rng));
    out[static_cast<std::size_t>(i)] = buf.back();
  }
  return out;
}

std::vector<double> predict(const MsArPosterior &post, std::span<const double> y_hist, int h, int m, Rng &rng) {
  const ArSpec &spec = post.spec.ar;
  const std::vector<double> tail = history_tail(y_hist, spec.max_lag());
  const auto idx = select_draws(post.n_kept(), m, rng);
  std::vector<double> out(static_cast<std::size_t>(m));
  std::vector<double> buf;
  for (int i = 0; i < m; ++i) {
    const MsArDraw &dr = post.draws[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
    int state = dr.last_state;
    buf = tail;
    for (int s = 0; s < h; ++s) {
      state = draw_index(dr.transition.row(state).transpose(), rng);
      const Eigen::VectorXd b = dr.coeffs.row(state).transpose();
      buf.push_back(ar_mean(b, spec, buf) + std::sqrt(dr.sigma2[state]) * draw_normal(rng));
    }
    out[static_cast<std::size_t>(i)] = buf.back();
  }
  return out;
}

std::vector<double> predict(const TvpArPosterior &post, std::span<const double> y_hist, int h, int m, Rng &rng) {
  const int p = post.spec.lags;
  const int k = post.spec.dim();
  const std::vector<double> tail = history_tail(y_hist, p);
  const auto idx = select_draws(post.n_kept(), m, rng);
  std::vector<double> out(static_cast<std::size_t>(m));
  std::vector<double> buf;
  Eigen::VectorXd x(k);
  for (int i = 0; i < m; ++i) {
    const TvpArDraw &dr = post.draws[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
    Eigen::LLT<Eigen::MatrixXd> llt(dr.omega);
    Eigen::VectorXd beta = dr.last_state;
    const double sd = std::sqrt(dr.sigma2);
    buf = tail;
    for (int s = 0; s < h; ++s) {
      beta = dr.a * beta + llt.matrixL() * standard_normal_vector(rng, k);
      x[0] = 1.0;
      for (int l = 1; l <= p; ++l)
        x[l] = buf[buf.size() - static_cast<std::size_t>(l)];
      buf.push_back(x.dot(beta) + sd * draw_normal(rng));
    }
    out[static_cast<std::size_t>(i)] = buf.back();
  }
  return out;
}

} // namespace

std::vector<double> predictive_draws(const Posterior &posterior, std::span<const double> y_hist, int h, int m,
                                     std::uint64_t seed) {
  if (h < 1)
    throw DomainError("forecast horizon must be at least 1");
  if (m < 1)
    throw DomainError("number of predictive draws must be at least 1");
  Rng rng = make_rng(seed);
  return std::visit(
      [&](const auto &post) {
        if (post.n_kept() < 1)
          throw DomainError("posterior has no kept draws");
        return predict(post, y_hist, h, m, rng);
      },
      posterior);
}

std::string to_string(ModelKind kind) {
  switch (kind) {
  case ModelKind::Ar:
    return "ar";
  case ModelKind::MsAr:
    return "msar";
  case ModelKind::TvpAr:
    return "tvpar";
  }
  return "ar";
}

ModelKind parse_model_kind(const std::string &text) {
  if (text == "ar")
    return ModelKind::Ar;
  if (text == "msar")
    return ModelKind::MsAr;
  if (text == "tvpar")
    return ModelKind::TvpAr;
  throw DomainError("unknown model kind '" + text + "' (expected ar, msar or tvpar)");
}

int ModelSpec::max_lag() const {
  switch (kind) {
  case ModelKind::Ar:
    return ar.max_lag();
  case ModelKind::MsAr:
    return msar.ar.max_lag();
  case ModelKind::TvpAr:
    return tvp.lags;
  }
  return 0;
}

void ModelSpec::validate() const {
  if (id.empty())
    throw DomainError("model id must not be empty");
  mcmc.validate();
  switch (kind) {
  case ModelKind::Ar:
    ar.validate();
    if (prior)
      prior->validate(ar.n_coeffs());
    break;
  case ModelKind::MsAr:
    msar.validate();
    if (prior)
      prior->validate(msar.ar.n_coeffs());
    break;
  case ModelKind::TvpAr:
    tvp.validate();
    break;
  }
}

Posterior fit_model(const ModelSpec &spec, std::span<const double> y, std::uint64_t seed) {
  spec.validate();
  McmcConfig mcmc = spec.mcmc;
  mcmc.seed = seed;
  switch (spec.kind) {
  case ModelKind::Ar:
    return fit_ar(y, spec.ar, spec.prior.value_or(NigPrior::weak(spec.ar.n_coeffs())), mcmc);
  case ModelKind::MsAr:
    return fit_msar(y, spec.msar, spec.prior.value_or(NigPrior::weak(spec.msar.ar.n_coeffs())), mcmc);
  case ModelKind::TvpAr:
    return fit_tvpar(y, spec.tvp, mcmc);
  }
  throw DomainError("unknown model kind");
}

} // namespace acps
