#include "nsslip/common.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

namespace nsslip {

MeanStats mean_stats(const std::vector<double>& xs) {
  MeanStats s;
  s.count = static_cast<int>(xs.size());
  if (xs.empty()) return s;
  CompensatedSum sum;
  for (double x : xs) sum.add(x);
  s.mean = sum.value() / s.count;
  if (s.count > 1) {
    CompensatedSum var;
    for (double x : xs) var.add((x - s.mean) * (x - s.mean));
    s.stddev = std::sqrt(var.value() / (s.count - 1));
    s.stderr_ = s.stddev / std::sqrt(static_cast<double>(s.count));
  }
  return s;
}

Mat compensated_mean(const std::vector<const Mat*>& items) {
  if (items.empty()) return Mat();
  const Mat& first = *items.front();
  Mat out(first.rows(), first.cols());
  for (Eigen::Index c = 0; c < first.cols(); ++c) {
    for (Eigen::Index r = 0; r < first.rows(); ++r) {
      CompensatedSum s;
      for (const Mat* m : items) s.add((*m)(r, c));
      out(r, c) = s.value() / static_cast<double>(items.size());
    }
  }
  return out;
}

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  if (threads <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  int workers = std::min(threads, count);
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        int i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          next.store(count);
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace nsslip
