#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "spikedet/random.hpp"

namespace spikedet {

/// Running sum of exp(a_i) stored as exp(shift) · scaled, plus a sample
/// count that may include samples contributing nothing (indicator-weighted
/// estimators divide by the full count).
class ExpAccumulator {
 public:
  void add(double log_value);
  /// A sample whose contribution is exactly zero.
  void skip() { ++count_; }
  void merge(const ExpAccumulator& other);

  std::size_t count() const { return count_; }
  double shift() const { return shift_; }
  double scaled() const { return scaled_; }
  double max_log_value() const { return max_log_; }

  /// Σ exp(a_i) / count; exactly 0 when nothing was added.
  double mean() const;
  /// log of mean(); -inf when nothing was added.
  double log_mean() const;

 private:
  double shift_ = -std::numeric_limits<double>::infinity();
  double scaled_ = 0.0;
  double max_log_ = -std::numeric_limits<double>::infinity();
  std::size_t count_ = 0;
};

struct MCEstimate {
  std::size_t count = 0;
  double mean = 0.0;
  double std_error = 0.0;
  /// log(mean), finite even when mean overflows.
  double log_mean = 0.0;
  /// Largest exponent a_i seen; exp(a_i) is what got averaged.
  double log_domain_max = 0.0;
  SeedSpec seed;
};

/// Batch-means estimate of E[exp(a)] from per-batch accumulators.
MCEstimate estimate_from_batches(std::span<const ExpAccumulator> batches, SeedSpec seed);

/// Estimate of a plain mean (e.g. an indicator frequency) with a binomial /
/// sample standard error.
MCEstimate estimate_from_moments(std::size_t count, double sum, double sum_sq, SeedSpec seed);

/// Number of batches used by the batch-means drivers.
inline constexpr std::size_t kDefaultBatches = 32;

/// Split of `total` samples into `batches` nearly equal, contiguous parts.
struct BatchPlan {
  std::size_t total = 0;
  std::size_t batches = 0;

  static BatchPlan make(std::size_t total, std::size_t max_batches = kDefaultBatches);
  std::size_t begin(std::size_t b) const { return b * total / batches; }
  std::size_t size(std::size_t b) const { return begin(b + 1) - begin(b); }
};

/// Runs body(i) for i in [0, count) on up to `threads` workers (0 means
/// hardware concurrency). Each index runs exactly once; callers write
/// results into per-index slots and reduce in index order.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body);

unsigned resolve_threads(unsigned threads);

}  // namespace spikedet
