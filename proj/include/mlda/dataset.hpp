#pragma once

#include <utility>
#include <vector>

#include "mlda/matcore.hpp"

namespace mlda {

/// An ordered collection of p x q samples with class labels in {1, 2}.
/// Immutable after construction; all samples share dimensions and are finite.
class Dataset {
 public:
  Dataset(std::vector<Mat> samples, std::vector<int> labels);

  int size() const { return static_cast<int>(samples_.size()); }
  Eigen::Index rows() const { return samples_.front().rows(); }
  Eigen::Index cols() const { return samples_.front().cols(); }
  int n1() const { return n1_; }
  int n2() const { return n2_; }

  const std::vector<Mat>& samples() const { return samples_; }
  const std::vector<int>& labels() const { return labels_; }
  const Mat& sample(int i) const { return samples_[i]; }
  int label(int i) const { return labels_[i]; }

 private:
  std::vector<Mat> samples_;
  std::vector<int> labels_;
  int n1_ = 0;
  int n2_ = 0;
};

/// n x (p*q) matrix whose i-th row is vec(X_i)^T.
Mat flatten_design(const Dataset& data);

}  // namespace mlda
