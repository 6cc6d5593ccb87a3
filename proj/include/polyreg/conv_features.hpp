#pragma once

#include <cstdint>
#include <cstdlib>
#include <vector>

#include <Eigen/Core>

#include "polyreg/errors.hpp"

namespace polyreg {

// Degree-2 feature map for images where only pixel pairs coverable by a small
// window contribute a product term.  Feature layout: [bias] then all H*W
// linear pixel terms (row-major), then ordered products x_p * x_q for every
// offset with |drow| <= r and |dcol| <= r (p in row-major order, offsets in
// row-major order, q in bounds).  Ordered pairs are emitted in both
// directions; the duplicated columns are resolved by the solver's
// minimum-norm path.
class ConvFeatureMap {
 public:
  ConvFeatureMap(int height, int width, int window_half_extent)
      : h_(height), w_(width), r_(window_half_extent) {
    if (h_ < 1 || w_ < 1) throw ConfigError("conv features: empty image");
    if (r_ < 0) throw ConfigError("conv features: negative window");
    for (int p = 0; p < h_ * w_; ++p) {
      const int pr = p / w_, pc = p % w_;
      for (int dr = -r_; dr <= r_; ++dr) {
        for (int dc = -r_; dc <= r_; ++dc) {
          const int qr = pr + dr, qc = pc + dc;
          if (qr < 0 || qr >= h_ || qc < 0 || qc >= w_) continue;
          pair_p_.push_back(p);
          pair_q_.push_back(qr * w_ + qc);
        }
      }
    }
  }

  int height() const { return h_; }
  int width() const { return w_; }
  int window_half_extent() const { return r_; }

  std::size_t linear_count() const { return static_cast<std::size_t>(h_) * w_; }
  std::size_t pair_count() const { return pair_p_.size(); }
  // without the bias column
  std::size_t feature_count() const { return linear_count() + pair_count(); }

  // p/q pixel indices of pair feature i (offsets into the flattened image)
  int pair_p(std::size_t i) const { return pair_p_[i]; }
  int pair_q(std::size_t i) const { return pair_q_[i]; }

  // image is a flattened row-major H*W vector
  void featurize_into(const double* image, double* out) const {
    out[0] = 1.0;
    const std::size_t n = linear_count();
    for (std::size_t p = 0; p < n; ++p) out[1 + p] = image[p];
    double* prod = out + 1 + n;
    for (std::size_t i = 0; i < pair_p_.size(); ++i)
      prod[i] = image[pair_p_[i]] * image[pair_q_[i]];
  }

  Eigen::VectorXd featurize(const Eigen::VectorXd& image) const {
    if (image.size() != static_cast<Eigen::Index>(linear_count()))
      throw ConfigError("conv features: image size mismatch");
    Eigen::VectorXd out(static_cast<Eigen::Index>(1 + feature_count()));
    featurize_into(image.data(), out.data());
    return out;
  }

 private:
  int h_, w_, r_;
  std::vector<int> pair_p_, pair_q_;
};

}  // namespace polyreg
