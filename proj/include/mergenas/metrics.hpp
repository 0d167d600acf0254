#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mergenas/errors.hpp"

namespace mergenas {

// Trailing-window mean; shorter prefixes average over what exists.
std::vector<double> moving_average(const std::vector<double>& values, int window);

std::vector<double> best_so_far(const std::vector<double>& values);

double mean_of(const std::vector<double>& v);
double sample_std(const std::vector<double>& v);
// Standard error of the mean: the half-width of the 68% band.
double stderr_of(const std::vector<double>& v);
double median_of(std::vector<double> v);

struct CurvePoint {
  long long trial = 0;
  double mean = 0.0;
  double ci68 = 0.0;  // one standard error across replicas
};

// Pointwise mean/error across equally long replica series.
std::vector<CurvePoint> aggregate_curves(const std::vector<std::vector<double>>& replicas);

// regret(t) = best attainable test accuracy - test accuracy of the genotype
// with the best validation accuracy among the first t trials.
std::vector<double> regret_series(const std::vector<double>& valid_accs,
                                  const std::vector<double>& test_accs,
                                  double best_possible_test);

struct ThresholdResult {
  std::vector<long long> per_replica;  // first 1-based trial with bsf >= threshold
  std::vector<bool> censored;          // true when never reached within budget
  double median = 0.0;
};

// First trial index per replica whose best-so-far reaches the threshold;
// censored replicas count at their budget.
ThresholdResult trials_to_threshold(const std::vector<std::vector<double>>& replica_values,
                                    double threshold);

// median(slow) / median(fast): how many times fewer trials `fast` needs.
double speedup_ratio(const ThresholdResult& slow, const ThresholdResult& fast);

}  // namespace mergenas
