#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace acps {

// Parameterizations: Normal takes (mean, variance), so N(0,16) has standard
// deviation 4. Student-t is location-scale with dof, Gamma is shape-rate.
struct Normal {
  double mean = 0.0;
  double variance = 1.0;
};

struct StudentT {
  double location = 0.0;
  double scale = 1.0;
  double dof = 1.0;
};

struct Gamma {
  double shape = 1.0;
  double rate = 1.0;
};

struct Beta {
  double a = 1.0;
  double b = 1.0;
};

/// Closed-interval support [lower, upper]; infinite bounds for the real line.
struct Support {
  double lower;
  double upper;
};

/// Parametric predictive distribution. Immutable once constructed; the
/// constructor validates parameters and throws DomainError on bad input.
class AnalyticDistribution {
public:
  using Family = std::variant<Normal, StudentT, Gamma, Beta>;

  explicit AnalyticDistribution(Family family);

  static AnalyticDistribution normal(double mean, double variance) { return AnalyticDistribution(Normal{mean, variance}); }
  static AnalyticDistribution student_t(double location, double scale, double dof) {
    return AnalyticDistribution(StudentT{location, scale, dof});
  }
  static AnalyticDistribution gamma(double shape, double rate) { return AnalyticDistribution(Gamma{shape, rate}); }
  static AnalyticDistribution beta(double a, double b) { return AnalyticDistribution(Beta{a, b}); }

  const Family &family() const { return family_; }

  double cdf(double u) const;
  double quantile(double alpha) const;
  double pdf(double u) const;
  Support support() const;
  std::vector<double> sample(std::size_t n, std::uint64_t seed) const;

  /// Compact label such as "N(0,1)" or "t(-3,1,3)".
  std::string label() const;

private:
  Family family_;
};

/// Right-continuous empirical CDF of a set of draws. The sorted draws are
/// shared between copies.
class EmpiricalCdf {
public:
  explicit EmpiricalCdf(std::vector<double> draws);

  /// Fraction of draws <= u.
  double cdf(double u) const;
  /// ceil(alpha * count)-th order statistic.
  double quantile(double alpha) const;
  std::span<const double> draws() const { return *draws_; }
  std::size_t count() const { return draws_->size(); }
  double min() const { return draws_->front(); }
  double max() const { return draws_->back(); }
  /// Bootstrap resample with replacement.
  std::vector<double> resample(std::size_t n, std::uint64_t seed) const;

private:
  std::shared_ptr<const std::vector<double>> draws_;
};

/// A probabilistic forecast P: either an analytic family or an empirical CDF.
class PredictiveDistribution {
public:
  PredictiveDistribution(AnalyticDistribution dist) : dist_(std::move(dist)) {}
  PredictiveDistribution(EmpiricalCdf dist) : dist_(std::move(dist)) {}

  bool is_analytic() const { return std::holds_alternative<AnalyticDistribution>(dist_); }
  const AnalyticDistribution &analytic() const;
  const EmpiricalCdf &empirical() const;

  /// P(u). Throws DomainError for non-finite u.
  double cdf(double u) const;
  /// Generalized inverse inf{u : P(u) >= alpha}, alpha in (0,1).
  double quantile(double alpha) const;
  /// Density; throws UnsupportedOperation for empirical forecasts.
  double pdf(double u) const;
  /// Analytic: i.i.d. draws. Empirical: resampling of the stored draws.
  std::vector<double> sample(std::size_t n, std::uint64_t seed) const;
  /// Support of an analytic forecast, or [min draw, max draw].
  Support support() const;
  std::string label() const;

private:
  std::variant<AnalyticDistribution, EmpiricalCdf> dist_;
};

// Free-function forms of the distribution operations.
double cdf_eval(const PredictiveDistribution &dist, double u);
double quantile(const PredictiveDistribution &dist, double alpha);
double pdf_eval(const PredictiveDistribution &dist, double u);
std::vector<double> sample(const AnalyticDistribution &dist, std::size_t n, std::uint64_t seed);

/// Parses "normal:mean,variance", "t:location,scale,dof", "gamma:shape,rate"
/// or "beta:a,b". Throws DomainError on malformed text.
AnalyticDistribution parse_analytic(const std::string &text);

} // namespace acps
