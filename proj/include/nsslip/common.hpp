#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nsslip {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;
using Triplets = std::vector<Eigen::Triplet<double>>;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BlowUpError : std::runtime_error {
  int sample = -1;
  int step = -1;
  BlowUpError(const std::string& what, int sample_, int step_)
      : std::runtime_error(what), sample(sample_), step(step_) {}
};

struct AssumptionViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Neumaier summation; order of additions is fixed by the caller so results
// are identical regardless of how samples were scheduled.
class CompensatedSum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct MeanStats {
  double mean = 0.0;
  double stderr_ = 0.0;
  double stddev = 0.0;
  int count = 0;
};

MeanStats mean_stats(const std::vector<double>& xs);

// Elementwise compensated mean of equally shaped matrices.
Mat compensated_mean(const std::vector<const Mat*>& items);

void parallel_for(int count, int threads, const std::function<void(int)>& fn);

std::uint64_t splitmix64(std::uint64_t x);

std::string fmt17(double x);

}  // namespace nsslip
