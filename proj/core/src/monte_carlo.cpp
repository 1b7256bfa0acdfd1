#include "spikedet/monte_carlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "spikedet/error.hpp"

namespace spikedet {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

void ExpAccumulator::add(double log_value) {
  ++count_;
  max_log_ = std::max(max_log_, log_value);
  if (log_value == kNegInf) return;
  if (log_value > shift_) {
    scaled_ = scaled_ * std::exp(shift_ - log_value) + 1.0;
    shift_ = log_value;
  } else {
    scaled_ += std::exp(log_value - shift_);
  }
}

void ExpAccumulator::merge(const ExpAccumulator& other) {
  count_ += other.count_;
  max_log_ = std::max(max_log_, other.max_log_);
  if (other.scaled_ == 0.0) return;
  if (scaled_ == 0.0) {
    shift_ = other.shift_;
    scaled_ = other.scaled_;
  } else if (other.shift_ > shift_) {
    scaled_ = scaled_ * std::exp(shift_ - other.shift_) + other.scaled_;
    shift_ = other.shift_;
  } else {
    scaled_ += other.scaled_ * std::exp(other.shift_ - shift_);
  }
}

double ExpAccumulator::mean() const {
  if (scaled_ == 0.0 || count_ == 0) return 0.0;
  return std::exp(shift_) * scaled_ / static_cast<double>(count_);
}

double ExpAccumulator::log_mean() const {
  if (scaled_ == 0.0 || count_ == 0) return kNegInf;
  return shift_ + std::log(scaled_ / static_cast<double>(count_));
}

MCEstimate estimate_from_batches(std::span<const ExpAccumulator> batches, SeedSpec seed) {
  MCEstimate est;
  est.seed = seed;
  est.log_domain_max = kNegInf;
  ExpAccumulator total;
  for (const ExpAccumulator& b : batches) total.merge(b);
  est.count = total.count();
  est.mean = total.mean();
  est.log_mean = total.log_mean();
  est.log_domain_max = total.max_log_value();

  // Batch means, all expressed relative to exp(shift) of the merged total.
  std::vector<double> rel;
  rel.reserve(batches.size());
  for (const ExpAccumulator& b : batches) {
    if (b.count() == 0) continue;
    const double m = b.scaled() == 0.0
                         ? 0.0
                         : std::exp(b.shift() - total.shift()) * b.scaled() /
                               static_cast<double>(b.count());
    rel.push_back(m);
  }
  if (rel.size() < 2 || total.scaled() == 0.0) {
    est.std_error = 0.0;
    return est;
  }
  double avg = 0.0;
  for (double m : rel) avg += m;
  avg /= static_cast<double>(rel.size());
  double ss = 0.0;
  for (double m : rel) ss += (m - avg) * (m - avg);
  const double sd = std::sqrt(ss / static_cast<double>(rel.size() - 1));
  est.std_error = std::exp(total.shift()) * sd / std::sqrt(static_cast<double>(rel.size()));
  return est;
}

MCEstimate estimate_from_moments(std::size_t count, double sum, double sum_sq, SeedSpec seed) {
  if (count == 0) throw ParameterError("estimate_from_moments: empty sample");
  MCEstimate est;
  est.seed = seed;
  est.count = count;
  const double n = static_cast<double>(count);
  est.mean = sum / n;
  est.log_mean = std::log(est.mean);
  est.log_domain_max = 0.0;
  if (count > 1) {
    const double var = std::max(0.0, (sum_sq - n * est.mean * est.mean) / (n - 1.0));
    est.std_error = std::sqrt(var / n);
  }
  return est;
}

BatchPlan BatchPlan::make(std::size_t total, std::size_t max_batches) {
  if (total == 0) throw ParameterError("BatchPlan: no samples");
  return BatchPlan{total, std::min(total, std::max<std::size_t>(max_batches, 1))};
}

unsigned resolve_threads(unsigned threads) {
  if (threads != 0) return threads;
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body) {
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(resolve_threads(threads), count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
          try {
            body(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace spikedet
