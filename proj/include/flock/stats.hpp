#pragma once

#include <cstddef>
#include <vector>

namespace flock {

// Upper regularized incomplete gamma Q(a, x).
double gamma_q(double a, double x);

// P(X >= stat) for X ~ chi-squared with df degrees of freedom.
double chi_squared_p_value(double stat, int df);

// Pearson chi-squared test of observed counts against expected probabilities.
// Returns the p-value; expected[i] must be > 0 and sum to ~1.
double chi_squared_test(const std::vector<long>& observed, const std::vector<double>& expected);

double median(std::vector<double> values);

}  // namespace flock
