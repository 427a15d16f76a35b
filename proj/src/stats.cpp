#include "flock/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace flock {

namespace {

// Series expansion for the lower regularized gamma P(a, x), x < a + 1.
double gamma_p_series(double a, double x) {
  double sum = 1.0 / a;
  double term = sum;
  for (int n = 1; n < 500; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Lentz continued fraction for Q(a, x), x >= a + 1.
double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 500; ++i) {
    double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_q(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw std::invalid_argument("gamma_q: bad arguments");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

double chi_squared_p_value(double stat, int df) {
  if (df <= 0) throw std::invalid_argument("chi_squared_p_value: df must be positive");
  if (stat <= 0.0) return 1.0;
  return gamma_q(0.5 * df, 0.5 * stat);
}

double chi_squared_test(const std::vector<long>& observed, const std::vector<double>& expected) {
  if (observed.size() != expected.size() || observed.empty())
    throw std::invalid_argument("chi_squared_test: size mismatch");
  long total = 0;
  for (long c : observed) total += c;
  double stat = 0.0;
  for (size_t i = 0; i < observed.size(); ++i) {
    double e = expected[i] * static_cast<double>(total);
    if (e <= 0.0) throw std::invalid_argument("chi_squared_test: nonpositive expected count");
    double diff = static_cast<double>(observed[i]) - e;
    stat += diff * diff / e;
  }
  return chi_squared_p_value(stat, static_cast<int>(observed.size()) - 1);
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median: empty input");
  std::sort(values.begin(), values.end());
  size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace flock
