#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace rdiff {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// ---------------------------------------------------------------------------
// Errors

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct DimensionMismatch : Error {
  using Error::Error;
};
struct ChartDomainError : Error {
  using Error::Error;
};
struct DegenerateFrame : Error {
  using Error::Error;
};
struct NotUnitVelocity : Error {
  using Error::Error;
};
struct FrameMismatch : Error {
  using Error::Error;
};
struct NegativeXi : Error {
  using Error::Error;
};
struct PSDError : Error {
  using Error::Error;
};
struct InsufficientSamples : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct SignConditionError : Error {
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Dense rank-4 tensor with n entries per index (n = d+1 stays tiny, <= 4 in
// the model catalog, so flat dense storage is the right trade).

class Tensor4 {
 public:
  Tensor4() : n_(0) {}
  explicit Tensor4(int n) : n_(n), a_(static_cast<size_t>(n) * n * n * n, 0.0) {}

  int dim() const { return n_; }

  double& operator()(int i, int j, int k, int l) {
    return a_[idx(i, j, k, l)];
  }
  double operator()(int i, int j, int k, int l) const {
    return a_[idx(i, j, k, l)];
  }

  void set_zero() { std::fill(a_.begin(), a_.end(), 0.0); }

  double max_abs() const {
    double m = 0.0;
    for (double v : a_) m = std::max(m, std::abs(v));
    return m;
  }

 private:
  size_t idx(int i, int j, int k, int l) const {
    return ((static_cast<size_t>(i) * n_ + j) * n_ + k) * n_ + l;
  }
  int n_;
  std::vector<double> a_;
};

}  // namespace rdiff
