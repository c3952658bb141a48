#pragma once


#include <vector>

namespace fks {

double sample_mean(const std::vector<double>& x);
/// Unbiased sample variance (n - 1 denominator); 0 for fewer than two values.
double sample_variance(const std::vector<double>& x);
double median(std::vector<double> x);

/// Leave-one-out jackknife standard error of the mean of x.
double jackknife_mean_se(const std::vector<double>& x);

/// (1/N sum x_i^q)^(1/q) for nonnegative x.
double power_mean(const std::vector<double>& x, double q);
/// Delta-method standard error of power_mean.
double power_mean_se(const std::vector<double>& x, double q);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// P(K > lambda) for the Kolmogorov distribution.
double kolmogorov_survival(double lambda);

/// Two-sample Kolmogorov-Smirnov test (asymptotic p-value with Stephens' correction).
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

/// One-sample KS test against the standard normal law.
KsResult ks_standard_normal(std::vector<double> x);

}  // namespace fks
