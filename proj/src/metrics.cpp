#include "mergenas/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace mergenas {

std::vector<double> moving_average(const std::vector<double>& values, int window) {
  if (window < 1) throw contract_error("moving_average: window must be >= 1");
  std::vector<double> out;
  out.reserve(values.size());
  double acc = 0.0;
  for (size_t i = 0; i < values.size(); ++i) {
    acc += values[i];
    if (i >= static_cast<size_t>(window)) acc -= values[i - window];
    const double n = std::min<double>(window, static_cast<double>(i + 1));
    out.push_back(acc / n);
  }
  return out;
}

std::vector<double> best_so_far(const std::vector<double>& values) {
  std::vector<double> out;
  out.reserve(values.size());
  double best = -1e300;
  for (double v : values) {
    best = std::max(best, v);
    out.push_back(best);
  }
  return out;
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) throw contract_error("mean_of: empty series");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

double stderr_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  return sample_std(v) / std::sqrt(static_cast<double>(v.size()));
}

double median_of(std::vector<double> v) {
  if (v.empty()) throw contract_error("median_of: empty series");
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<CurvePoint> aggregate_curves(const std::vector<std::vector<double>>& replicas) {
  if (replicas.empty()) throw contract_error("aggregate_curves: no replicas");
  const size_t len = replicas[0].size();
  for (const auto& r : replicas)
    if (r.size() != len) throw contract_error("aggregate_curves: replica lengths differ");
  std::vector<CurvePoint> out(len);
  std::vector<double> column(replicas.size());
  for (size_t t = 0; t < len; ++t) {
    for (size_t r = 0; r < replicas.size(); ++r) column[r] = replicas[r][t];
    out[t].trial = static_cast<long long>(t) + 1;
    out[t].mean = mean_of(column);
    out[t].ci68 = stderr_of(column);
  }
  return out;
}

std::vector<double> regret_series(const std::vector<double>& valid_accs,
                                  const std::vector<double>& test_accs,
                                  double best_possible_test) {
  if (valid_accs.size() != test_accs.size())
    throw contract_error("regret_series: series lengths differ");
  std::vector<double> out;
  out.reserve(valid_accs.size());
  double best_valid = -1e300;
  double test_of_best = 0.0;
  for (size_t i = 0; i < valid_accs.size(); ++i) {
    if (valid_accs[i] > best_valid) {
      best_valid = valid_accs[i];
      test_of_best = test_accs[i];
    }
    out.push_back(best_possible_test - test_of_best);
  }
  return out;
}

ThresholdResult trials_to_threshold(const std::vector<std::vector<double>>& replica_values,
                                    double threshold) {
  ThresholdResult res;
  std::vector<double> finite;
  for (const auto& series : replica_values) {
    const std::vector<double> bsf = best_so_far(series);
    long long hit = static_cast<long long>(series.size());
    bool censored = true;
    for (size_t t = 0; t < bsf.size(); ++t) {
      if (bsf[t] >= threshold) {
        hit = static_cast<long long>(t) + 1;
        censored = false;
        break;
      }
    }
    res.per_replica.push_back(hit);
    res.censored.push_back(censored);
    finite.push_back(static_cast<double>(hit));
  }
  res.median = median_of(finite);
  return res;
}

double speedup_ratio(const ThresholdResult& slow, const ThresholdResult& fast) {
  if (fast.median <= 0.0) throw contract_error("speedup_ratio: degenerate fast median");
  return slow.median / fast.median;
}

}  // namespace mergenas
