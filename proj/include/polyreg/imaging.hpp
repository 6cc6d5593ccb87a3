#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "polyreg/conv_features.hpp"
#include "polyreg/errors.hpp"
#include "polyreg/rng.hpp"
#include "polyreg/tols.hpp"

namespace polyreg {

using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Images stored as rows of a flattened N x (H*W) matrix, pixels in [0,1].
// Row-major so each image is contiguous.
struct ImageDataset {
  RowMatrixXd images;
  std::vector<int> labels;
  int height = 0;
  int width = 0;
  int classes = 0;

  Eigen::Index size() const { return images.rows(); }

  void validate() const {
    if (images.rows() < 1) throw ConfigError("dataset: empty");
    if (static_cast<Eigen::Index>(labels.size()) != images.rows())
      throw ConfigError("dataset: image/label count mismatch");
    if (images.cols() != static_cast<Eigen::Index>(height) * width)
      throw ConfigError("dataset: image size mismatch");
    for (int l : labels)
      if (l < 0 || l >= classes) throw ConfigError("dataset: label out of range");
  }
};

// i.i.d. N(0, sigma^2) per pixel, clamped back into [0,1].
inline Eigen::VectorXd gaussian_noise(const Eigen::VectorXd& image, double sigma,
                                      std::uint64_t seed) {
  if (sigma < 0.0) throw ConfigError("gaussian_noise: sigma must be >= 0");
  if (sigma == 0.0) return image;
  CounterRng rng(seed, /*stream=*/0x901);
  Eigen::VectorXd out = image;
  for (Eigen::Index i = 0; i < out.size(); ++i)
    out(i) = std::clamp(out(i) + rng.normal(0.0, sigma), 0.0, 1.0);
  return out;
}

struct PatchNoiseOptions {
  int center_min = 6;   // inclusive, 1-based pixel coordinates
  int center_max = 22;  // inclusive
  double aspect_lo = 0.5;
  double aspect_hi = 2.0;
  // test hook: force the aspect ratio instead of drawing it
  bool force_aspect = false;
  double forced_aspect = 1.0;
};

// Black rectangular patch of the given area: center uniform in the configured
// central region, aspect ratio D uniform on (1/2, 2), width floor(D sqrt(A)),
// height floor(sqrt(A)/D).  The patch is clipped at the image boundary.
inline Eigen::VectorXd patch_noise(const Eigen::VectorXd& image, int height, int width,
                                   double area, std::uint64_t seed,
                                   const PatchNoiseOptions& opt = {}) {
  if (area < 1.0) throw ConfigError("patch_noise: area must be >= 1");
  CounterRng rng(seed, /*stream=*/0x902);
  const int ci =
      opt.center_min + static_cast<int>(rng.uniform_index(
                           static_cast<std::uint64_t>(opt.center_max - opt.center_min + 1)));
  const int cj =
      opt.center_min + static_cast<int>(rng.uniform_index(
                           static_cast<std::uint64_t>(opt.center_max - opt.center_min + 1)));
  const double aspect =
      opt.force_aspect ? opt.forced_aspect : rng.uniform(opt.aspect_lo, opt.aspect_hi);
  const int w = static_cast<int>(std::floor(aspect * std::sqrt(area)));
  const int h = static_cast<int>(std::floor(std::sqrt(area) / aspect));

  Eigen::VectorXd out = image;
  const int r1 = std::min(height, ci - 1 - h / 2 + h);
  const int c1 = std::min(width, cj - 1 - w / 2 + w);
  const int r0 = std::max(0, ci - 1 - h / 2);
  const int c0 = std::max(0, cj - 1 - w / 2);
  for (int r = r0; r < r1; ++r)
    for (int c = c0; c < c1; ++c) out(static_cast<Eigen::Index>(r) * width + c) = 0.0;
  return out;
}

// One-vs-rest stack of polynomial regressions over shared conv features.
class StackedClassifier {
 public:
  StackedClassifier(ConvFeatureMap features, Eigen::MatrixXd coeffs)
      : features_(std::move(features)), coeffs_(std::move(coeffs)) {
    if (coeffs_.rows() != static_cast<Eigen::Index>(features_.feature_count() + 1))
      throw ConfigError("classifier: coefficient shape mismatch");
  }

  const ConvFeatureMap& features() const { return features_; }
  const Eigen::MatrixXd& coeffs() const { return coeffs_; }
  int classes() const { return static_cast<int>(coeffs_.cols()); }

  Eigen::VectorXd scores(const Eigen::VectorXd& image) const {
    return coeffs_.transpose() * features_.featurize(image);
  }

  // argmax with lowest index winning ties
  std::pair<int, Eigen::VectorXd> classify(const Eigen::VectorXd& image) const {
    const Eigen::VectorXd s = scores(image);
    int best = 0;
    for (int c = 1; c < s.size(); ++c)
      if (s(c) > s(best)) best = c;
    return {best, s};
  }

  double accuracy(const ImageDataset& ds) const {
    Eigen::Index hits = 0;
    for (Eigen::Index i = 0; i < ds.size(); ++i)
      if (classify(ds.images.row(i).transpose()).first == ds.labels[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(ds.size());
  }

 private:
  ConvFeatureMap features_;
  Eigen::MatrixXd coeffs_;  // (1 + features) x classes
};

struct BatchTrainResult {
  StackedClassifier final_classifier;
  // coefficient snapshots, retrievable for learning curves
  std::vector<Eigen::MatrixXd> per_batch;
  std::vector<Eigen::MatrixXd> cumulative_average;
};

// Batching-and-averaging: each step fits the one-vs-rest regressions on B
// indices sampled uniformly with replacement, and the final coefficients are
// the average over batches.
inline BatchTrainResult train_batched(const ImageDataset& ds, int n_batches,
                                      Eigen::Index batch_size, std::uint64_t seed,
                                      int window_half_extent = 2,
                                      bool keep_snapshots = false) {
  ds.validate();
  if (n_batches < 1) throw ConfigError("train_batched: need at least one batch");
  if (batch_size < 1 || batch_size > ds.size())
    throw ConfigError("train_batched: bad batch size");

  ConvFeatureMap fmap(ds.height, ds.width, window_half_extent);
  const auto n_feat = static_cast<Eigen::Index>(fmap.feature_count() + 1);

  BatchTrainResult result{StackedClassifier(fmap, Eigen::MatrixXd::Zero(n_feat, ds.classes)),
                          {}, {}};
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n_feat, ds.classes);
  CounterRng rng(seed, /*stream=*/0xba7c);

  RowMatrixXd design(batch_size, n_feat);
  Eigen::MatrixXd targets(batch_size, ds.classes);
  for (int b = 0; b < n_batches; ++b) {
    for (Eigen::Index i = 0; i < batch_size; ++i) {
      const auto idx =
          static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::uint64_t>(ds.size())));
      fmap.featurize_into(ds.images.row(idx).data(), design.row(i).data());
      for (int c = 0; c < ds.classes; ++c)
        targets(i, c) = (ds.labels[static_cast<std::size_t>(idx)] == c) ? 1.0 : 0.0;
    }
    const Eigen::MatrixXd coeffs = min_norm_lsq(design, targets);
    sum += coeffs;
    if (keep_snapshots) {
      result.per_batch.push_back(coeffs);
      result.cumulative_average.push_back(sum / static_cast<double>(b + 1));
    }
  }
  result.final_classifier =
      StackedClassifier(fmap, sum / static_cast<double>(n_batches));
  return result;
}

}  // namespace polyreg
