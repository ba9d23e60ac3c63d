#include "acps/distributions.hpp"

#include "acps/errors.hpp"
#include "acps/random.hpp"

#include <algorithm>
#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace acps {
namespace {

// Double precision throughout; the default policy promotes to long double,
// which is several times slower for no accuracy the scores can use.
using FastPolicy = boost::math::policies::policy<boost::math::policies::promote_double<false>>;

// Student-t CDF for integer dof from the finite trigonometric series of
// P(|T| <= |z|) with theta = atan(|z| / sqrt(dof)). Several times faster than
// the incomplete beta function and exact to rounding.
bool has_series_cdf(double dof) { return dof == std::floor(dof) && dof <= 1000.0; }

double student_t_series_cdf(double z, double dof) {
  const double theta = std::atan(std::abs(z) / std::sqrt(dof));
  const double s = std::sin(theta);
  const double c2 = std::cos(theta) * std::cos(theta);
  const int nu = static_cast<int>(dof);
  double a = 0.0;
  if (nu % 2 == 0) {
    double term = 1.0, sum = 1.0;
    for (int k = 1; k <= nu / 2 - 1; ++k) {
      term *= c2 * (2.0 * k - 1.0) / (2.0 * k);
      sum += term;
    }
    a = s * sum;
  } else {
    double term = 1.0, sum = nu >= 3 ? 1.0 : 0.0;
    for (int k = 1; k <= (nu - 3) / 2; ++k) {
      term *= c2 * (2.0 * k) / (2.0 * k + 1.0);
      sum += term;
    }
    a = 2.0 / std::numbers::pi * (theta + s * std::cos(theta) * sum);
  }
  return z >= 0.0 ? 0.5 + 0.5 * a : 0.5 - 0.5 * a;
}

template <class... Ts> struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts> Overloaded(Ts...) -> Overloaded<Ts...>;

void require(bool ok, const char *what) {
  if (!ok)
    throw DomainError(what);
}

void require_finite(double u) {
  if (!std::isfinite(u))
    throw DomainError("distribution evaluated at a non-finite point");
}

void require_open_unit(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw DomainError("quantile level must lie in (0,1)");
}

std::string fmt(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

} // namespace

// ---------------------------------------------------------------------------
// AnalyticDistribution

AnalyticDistribution::AnalyticDistribution(Family family) : family_(family) {
  std::visit(Overloaded{
                 [](const Normal &d) {
                   require(std::isfinite(d.mean), "normal mean must be finite");
                   require(d.variance > 0.0 && std::isfinite(d.variance), "normal variance must be positive");
                 },
                 [](const StudentT &d) {
                   require(std::isfinite(d.location), "t location must be finite");
                   require(d.scale > 0.0 && std::isfinite(d.scale), "t scale must be positive");
                   require(d.dof > 0.0, "t degrees of freedom must be positive");
                 },
                 [](const Gamma &d) {
                   require(d.shape > 0.0 && std::isfinite(d.shape), "gamma shape must be positive");
                   require(d.rate > 0.0 && std::isfinite(d.rate), "gamma rate must be positive");
                 },
                 [](const Beta &d) {
                   require(d.a > 0.0 && std::isfinite(d.a), "beta a must be positive");
                   require(d.b > 0.0 && std::isfinite(d.b), "beta b must be positive");
                 },
             },
             family_);
}

double AnalyticDistribution::cdf(double u) const {
  require_finite(u);
  return std::visit(Overloaded{
                        [u](const Normal &d) {
                          const double z = (u - d.mean) / std::sqrt(d.variance);
                          return 0.5 * std::erfc(-z / std::numbers::sqrt2);
                        },
                        [u](const StudentT &d) {
                          const double z = (u - d.location) / d.scale;
                          if (has_series_cdf(d.dof))
                            return student_t_series_cdf(z, d.dof);
                          const boost::math::students_t_distribution<double, FastPolicy> t(d.dof);
                          return boost::math::cdf(t, z);
                        },
                        [u](const Gamma &d) {
                          if (u <= 0.0)
                            return 0.0;
                          return boost::math::gamma_p(d.shape, u * d.rate, FastPolicy());
                        },
                        [u](const Beta &d) {
                          if (u <= 0.0)
                            return 0.0;
                          if (u >= 1.0)
                            return 1.0;
                          return boost::math::ibeta(d.a, d.b, u, FastPolicy());
                        },
                    },
                    family_);
}

double AnalyticDistribution::quantile(double alpha) const {
  require_open_unit(alpha);
  return std::visit(Overloaded{
                        [alpha](const Normal &d) {
                          const boost::math::normal_distribution<double, FastPolicy> n(d.mean, std::sqrt(d.variance));
                          return boost::math::quantile(n, alpha);
                        },
                        [alpha](const StudentT &d) {
                          const boost::math::students_t_distribution<double, FastPolicy> t(d.dof);
                          return d.location + d.scale * boost::math::quantile(t, alpha);
                        },
                        [alpha](const Gamma &d) {
                          return boost::math::gamma_p_inv(d.shape, alpha, FastPolicy()) / d.rate;
                        },
                        [alpha](const Beta &d) { return boost::math::ibeta_inv(d.a, d.b, alpha, FastPolicy()); },
                    },
                    family_);
}

double AnalyticDistribution::pdf(double u) const {
  require_finite(u);
  return std::visit(Overloaded{
                        [u](const Normal &d) {
                          const double sd = std::sqrt(d.variance);
                          const double z = (u - d.mean) / sd;
                          return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
                        },
                        [u](const StudentT &d) {
                          const boost::math::students_t_distribution<double, FastPolicy> t(d.dof);
                          return boost::math::pdf(t, (u - d.location) / d.scale) / d.scale;
                        },
                        [u](const Gamma &d) {
                          if (u < 0.0)
                            return 0.0;
                          const boost::math::gamma_distribution<double, FastPolicy> g(d.shape, 1.0 / d.rate);
                          return boost::math::pdf(g, u);
                        },
                        [u](const Beta &d) {
                          if (u < 0.0 || u > 1.0)
                            return 0.0;
                          const boost::math::beta_distribution<double, FastPolicy> b(d.a, d.b);
                          return boost::math::pdf(b, u);
                        },
                    },
                    family_);
}

Support AnalyticDistribution::support() const {
  constexpr double inf = std::numeric_limits<double>::infinity();
  return std::visit(Overloaded{
                        [](const Normal &) { return Support{-inf, inf}; },
                        [](const StudentT &) { return Support{-inf, inf}; },
                        [](const Gamma &) { return Support{0.0, inf}; },
                        [](const Beta &) { return Support{0.0, 1.0}; },
                    },
                    family_);
}

std::vector<double> AnalyticDistribution::sample(std::size_t n, std::uint64_t seed) const {
  if (n == 0)
    throw DomainError("sample size must be positive");
  Rng rng = make_rng(seed);
  std::vector<double> out(n);
  std::visit(Overloaded{
                 [&](const Normal &d) {
                   const double sd = std::sqrt(d.variance);
                   for (auto &x : out)
                     x = d.mean + sd * draw_normal(rng);
                 },
                 [&](const StudentT &d) {
                   for (auto &x : out) {
                     const double z = draw_normal(rng);
                     const double chi2 = 2.0 * draw_gamma(rng, 0.5 * d.dof);
                     x = d.location + d.scale * z / std::sqrt(chi2 / d.dof);
                   }
                 },
                 [&](const Gamma &d) {
                   for (auto &x : out)
                     x = draw_gamma(rng, d.shape) / d.rate;
                 },
                 [&](const Beta &d) {
                   for (auto &x : out) {
                     const double ga = draw_gamma(rng, d.a);
                     const double gb = draw_gamma(rng, d.b);
                     x = ga / (ga + gb);
                   }
                 },
             },
             family_);
  return out;
}

std::string AnalyticDistribution::label() const {
  return std::visit(Overloaded{
                        [](const Normal &d) { return "N(" + fmt(d.mean) + "," + fmt(d.variance) + ")"; },
                        [](const StudentT &d) {
                          return "t(" + fmt(d.location) + "," + fmt(d.scale) + "," + fmt(d.dof) + ")";
                        },
                        [](const Gamma &d) { return "Ga(" + fmt(d.shape) + "," + fmt(d.rate) + ")"; },
                        [](const Beta &d) { return "Be(" + fmt(d.a) + "," + fmt(d.b) + ")"; },
                    },
                    family_);
}

// ---------------------------------------------------------------------------
// EmpiricalCdf

EmpiricalCdf::EmpiricalCdf(std::vector<double> draws) {
  if (draws.empty())
    throw DomainError("empirical CDF needs at least one draw");
  for (const double x : draws)
    if (!std::isfinite(x))
      throw DomainError("empirical CDF draws must be finite");
  std::sort(draws.begin(), draws.end());
  draws_ = std::make_shared<const std::vector<double>>(std::move(draws));
}

double EmpiricalCdf::cdf(double u) const {
  require_finite(u);
  const auto &d = *draws_;
  const auto pos = std::upper_bound(d.begin(), d.end(), u);
  return static_cast<double>(pos - d.begin()) / static_cast<double>(d.size());
}

double EmpiricalCdf::quantile(double alpha) const {
  require_open_unit(alpha);
  const auto n = draws_->size();
  auto k = static_cast<std::size_t>(std::ceil(alpha * static_cast<double>(n)));
  k = std::clamp<std::size_t>(k, 1, n);
  return (*draws_)[k - 1];
}

std::vector<double> EmpiricalCdf::resample(std::size_t n, std::uint64_t seed) const {
  if (n == 0)
    throw DomainError("sample size must be positive");
  Rng rng = make_rng(seed);
  boost::random::uniform_int_distribution<std::size_t> pick(0, draws_->size() - 1);
  std::vector<double> out(n);
  for (auto &x : out)
    x = (*draws_)[pick(rng)];
  return out;
}

// ---------------------------------------------------------------------------
// PredictiveDistribution

const AnalyticDistribution &PredictiveDistribution::analytic() const {
  if (const auto *a = std::get_if<AnalyticDistribution>(&dist_))
    return *a;
  throw UnsupportedOperation("forecast is not analytic");
}

const EmpiricalCdf &PredictiveDistribution::empirical() const {
  if (const auto *e = std::get_if<EmpiricalCdf>(&dist_))
    return *e;
  throw UnsupportedOperation("forecast is not an empirical CDF");
}

double PredictiveDistribution::cdf(double u) const {
  return std::visit([u](const auto &d) { return d.cdf(u); }, dist_);
}

double PredictiveDistribution::quantile(double alpha) const {
  return std::visit([alpha](const auto &d) { return d.quantile(alpha); }, dist_);
}

double PredictiveDistribution::pdf(double u) const {
  if (!is_analytic())
    throw UnsupportedOperation("density is not available for an empirical CDF");
  return std::get<AnalyticDistribution>(dist_).pdf(u);
}

std::vector<double> PredictiveDistribution::sample(std::size_t n, std::uint64_t seed) const {
  if (is_analytic())
    return std::get<AnalyticDistribution>(dist_).sample(n, seed);
  return std::get<EmpiricalCdf>(dist_).resample(n, seed);
}

Support PredictiveDistribution::support() const {
  if (is_analytic())
    return std::get<AnalyticDistribution>(dist_).support();
  const auto &e = std::get<EmpiricalCdf>(dist_);
  return {e.min(), e.max()};
}

std::string PredictiveDistribution::label() const {
  if (is_analytic())
    return std::get<AnalyticDistribution>(dist_).label();
  return "ECDF[" + std::to_string(std::get<EmpiricalCdf>(dist_).count()) + "]";
}

double cdf_eval(const PredictiveDistribution &dist, double u) { return dist.cdf(u); }
double quantile(const PredictiveDistribution &dist, double alpha) { return dist.quantile(alpha); }
double pdf_eval(const PredictiveDistribution &dist, double u) { return dist.pdf(u); }
std::vector<double> sample(const AnalyticDistribution &dist, std::size_t n, std::uint64_t seed) {
  return dist.sample(n, seed);
}

AnalyticDistribution parse_analytic(const std::string &text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos)
    throw DomainError("analytic forecast must look like family:p1,p2[,p3], got '" + text + "'");
  const std::string family = text.substr(0, colon);
  std::vector<double> params;
  std::stringstream ss(text.substr(colon + 1));
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      params.push_back(std::stod(item, &used));
      if (used != item.size())
        throw std::invalid_argument(item);
    } catch (const std::exception &) {
      throw DomainError("bad numeric parameter '" + item + "' in '" + text + "'");
    }
  }
  const auto expect = [&](std::size_t n) {
    if (params.size() != n)
      throw DomainError("family '" + family + "' takes " + std::to_string(n) + " parameters");
  };
  if (family == "normal" || family == "N") {
    expect(2);
    return AnalyticDistribution::normal(params[0], params[1]);
  }
  if (family == "t" || family == "student-t") {
    expect(3);
    return AnalyticDistribution::student_t(params[0], params[1], params[2]);
  }
  if (family == "gamma") {
    expect(2);
    return AnalyticDistribution::gamma(params[0], params[1]);
  }
  if (family == "beta") {
    expect(2);
    return AnalyticDistribution::beta(params[0], params[1]);
  }
  throw DomainError("unknown distribution family '" + family + "'");
}

} // namespace acps
