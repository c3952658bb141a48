#include "fks/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fks/errors.hpp"

namespace fks {

namespace {

void require_nonempty(const std::vector<double>& x) {
  if (x.empty()) throw ArgumentError("statistic of an empty sample");
}

double ks_p_value(double d, double effective_n) {
  const double root = std::sqrt(effective_n);
  return kolmogorov_survival((root + 0.12 + 0.11 / root) * d);
}

}  // namespace

double sample_mean(const std::vector<double>& x) {
  require_nonempty(x);
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sample_variance(const std::vector<double>& x) {
  if (x.size() < 2) return 0.0;
  const double m = sample_mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return ss / static_cast<double>(x.size() - 1);
}

double median(std::vector<double> x) {
  require_nonempty(x);
  std::sort(x.begin(), x.end());
  const std::size_t n = x.size();
  return n % 2 == 1 ? x[n / 2] : 0.5 * (x[n / 2 - 1] + x[n / 2]);
}

double jackknife_mean_se(const std::vector<double>& x) {
  require_nonempty(x);
  const auto n = static_cast<double>(x.size());
  if (x.size() < 2) return 0.0;
  const double total = std::accumulate(x.begin(), x.end(), 0.0);
  double mean_loo = 0.0;
  std::vector<double> loo(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    loo[i] = (total - x[i]) / (n - 1.0);
    mean_loo += loo[i];
  }
  mean_loo /= n;
  double ss = 0.0;
  for (double v : loo) ss += (v - mean_loo) * (v - mean_loo);
  return std::sqrt((n - 1.0) / n * ss);
}

double power_mean(const std::vector<double>& x, double q) {
  require_nonempty(x);
  if (!(q >= 1.0)) throw ArgumentError("power mean needs q >= 1");
  double acc = 0.0;
  for (double v : x) acc += std::pow(v, q);
  return std::pow(acc / static_cast<double>(x.size()), 1.0 / q);
}

double power_mean_se(const std::vector<double>& x, double q) {
  require_nonempty(x);
  std::vector<double> powered(x.size());
  std::transform(x.begin(), x.end(), powered.begin(), [q](double v) { return std::pow(v, q); });
  const double m = sample_mean(powered);
  if (!(m > 0.0)) return 0.0;
  const double se_m = std::sqrt(sample_variance(powered) / static_cast<double>(x.size()));
  return std::pow(m, 1.0 / q - 1.0) * se_m / q;
}

double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int j = 1; j <= 200; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += (j % 2 == 1 ? term : -term);
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  require_nonempty(a);
  require_nonempty(b);
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const auto na = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return {d, ks_p_value(d, na * nb / (na + nb))};
}

KsResult ks_standard_normal(std::vector<double> x) {
  require_nonempty(x);
  std::sort(x.begin(), x.end());
  const auto n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = 0.5 * std::erfc(-x[i] / std::sqrt(2.0));
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return {d, ks_p_value(d, n)};
}

}  // namespace fks
