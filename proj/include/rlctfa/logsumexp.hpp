#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

namespace rlctfa {

/// Running log-sum-exp of log weights x, tracking sum exp(x) and
/// sum exp(2x) relative to a shared maximum so nothing underflows.
struct LogSumExp {
  double max = -std::numeric_limits<double>::infinity();
  double sum = 0.0;     // sum exp(x - max)
  double sum_sq = 0.0;  // sum exp(2 (x - max))

  void add(double x) {
    if (x == -std::numeric_limits<double>::infinity()) return;
    if (x > max) {
      const double scale = std::exp(max - x);
      sum = sum * scale + 1.0;
      sum_sq = sum_sq * scale * scale + 1.0;
      max = x;
    } else {
      const double e = std::exp(x - max);
      sum += e;
      sum_sq += e * e;
    }
  }

  void merge(const LogSumExp& o) {
    if (o.max == -std::numeric_limits<double>::infinity()) return;
    if (o.max > max) {
      const double scale = std::exp(max - o.max);
      sum = sum * scale + o.sum;
      sum_sq = sum_sq * scale * scale + o.sum_sq;
      max = o.max;
    } else {
      const double scale = std::exp(o.max - max);
      sum += o.sum * scale;
      sum_sq += o.sum_sq * scale * scale;
    }
  }

  /// log((1/count) sum exp(x)); count includes draws that were -inf.
  double log_mean(long long count) const { return max + std::log(sum / static_cast<double>(count)); }

  /// Delta-method standard error of log_mean.
  double log_mean_std_error(long long count) const {
    const double nd = static_cast<double>(count);
    const double mean = sum / nd;
    const double var = std::max(0.0, (sum_sq / nd - mean * mean) * nd / (nd - 1.0));
    return std::sqrt(var / nd) / mean;
  }
};

}  // namespace rlctfa
