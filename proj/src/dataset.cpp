#include "mlda/dataset.hpp"

#include <stdexcept>
#include <string>

namespace mlda {

Dataset::Dataset(std::vector<Mat> samples, std::vector<int> labels)
    : samples_(std::move(samples)), labels_(std::move(labels)) {
  if (samples_.empty()) throw std::invalid_argument("Dataset: no samples");
  if (samples_.size() != labels_.size())
    throw std::invalid_argument("Dataset: sample/label count mismatch");
  const Eigen::Index p = samples_.front().rows();
  const Eigen::Index q = samples_.front().cols();
  if (p <= 0 || q <= 0) throw std::invalid_argument("Dataset: empty sample matrix");
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (samples_[i].rows() != p || samples_[i].cols() != q)
      throw std::invalid_argument("Dataset: sample " + std::to_string(i) +
                                  " has mismatched dimensions");
    if (!all_finite(samples_[i]))
      throw std::invalid_argument("Dataset: sample " + std::to_string(i) +
                                  " contains non-finite entries");
    if (labels_[i] == 1)
      ++n1_;
    else if (labels_[i] == 2)
      ++n2_;
    else
      throw std::invalid_argument("Dataset: label of sample " + std::to_string(i) +
                                  " is not in {1,2}");
  }
}

Mat flatten_design(const Dataset& data) {
  const Eigen::Index d = data.rows() * data.cols();
  Mat design(data.size(), d);
  for (int i = 0; i < data.size(); ++i) design.row(i) = vec(data.sample(i)).transpose();
  return design;
}

}  // namespace mlda
