#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "polyreg/errors.hpp"
#include "polyreg/measure.hpp"
#include "polyreg/multiindex.hpp"

namespace polyreg {

struct SolveDiagnostics {
  Eigen::Index rank = 0;
  double min_singular_value_retained = 0.0;
  double max_singular_value = 0.0;
  double residual_norm = 0.0;
  std::string method;  // "svd" or "gram"

  nlohmann::json to_json() const {
    return {{"rank", rank},
            {"min_singular_value_retained", min_singular_value_retained},
            {"max_singular_value", max_singular_value},
            {"residual_norm", residual_norm},
            {"method", method}};
  }
};

inline constexpr double kSvdRelativeCutoff = 1e-10;
// The Gram matrix squares the spectrum, so its numerical noise floor sits near
// machine epsilon times the top eigenvalue; a squared SVD cutoff (1e-20) would
// invert that noise on rank-deficient systems.
inline constexpr double kGramRelativeCutoff = 1e-12;

// Minimum-norm least squares for multiple right-hand sides.  Tall systems go
// through a thin SVD of the design; wide systems (features >> rows, the conv
// regime) through the Gram matrix X X^T, which gives the same minimum-norm
// solution at far lower cost.
template <typename DerivedX>
Eigen::MatrixXd min_norm_lsq(const Eigen::MatrixBase<DerivedX>& X,
                             const Eigen::MatrixXd& Y,
                             SolveDiagnostics* diag = nullptr) {
  if (X.rows() != Y.rows()) throw ConfigError("min_norm_lsq: row count mismatch");
  SolveDiagnostics local;
  SolveDiagnostics& d = diag ? *diag : local;

  Eigen::MatrixXd coeffs;
  if (X.rows() >= X.cols()) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(kSvdRelativeCutoff);
    coeffs = svd.solve(Y);
    d.rank = svd.rank();
    d.max_singular_value = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
    d.min_singular_value_retained =
        d.rank > 0 ? svd.singularValues()(d.rank - 1) : 0.0;
    d.method = "svd";
  } else {
    const Eigen::MatrixXd G = X * X.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
    const auto& evals = es.eigenvalues();  // ascending
    const double lmax = evals.size() ? evals(evals.size() - 1) : 0.0;
    const double cutoff = lmax * kGramRelativeCutoff;
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(evals.size());
    Eigen::Index rank = 0;
    double smin = 0.0;
    for (Eigen::Index i = 0; i < evals.size(); ++i) {
      if (evals(i) > cutoff && evals(i) > 0.0) {
        inv(i) = 1.0 / evals(i);
        ++rank;
        if (smin == 0.0 || std::sqrt(evals(i)) < smin) smin = std::sqrt(evals(i));
      }
    }
    // coeffs = X^T (X X^T)^+ Y
    coeffs = X.transpose() *
             (es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose() * Y);
    d.rank = rank;
    d.max_singular_value = std::sqrt(std::max(lmax, 0.0));
    d.min_singular_value_retained = smin;
    d.method = "gram";
  }
  d.residual_norm = (Y - X * coeffs).norm();
  return coeffs;
}

// N x |C| matrix whose i-th row is the monomial featurization of sample i.
class DesignMatrix {
 public:
  DesignMatrix(const Eigen::MatrixXd& xs, std::shared_ptr<const MultiplicitiesSet> set,
               std::size_t budget = MultiplicitiesSet::kDefaultBudget)
      : set_(std::move(set)) {
    if (xs.rows() < 1) throw ConfigError("assemble: need at least one sample");
    if (xs.cols() != set_->dimension())
      throw ConfigError("assemble: sample dimension mismatch");
    const std::size_t cells = static_cast<std::size_t>(xs.rows()) * set_->size();
    if (cells > budget) throw BudgetError("assemble: design matrix exceeds feature budget");
    data_.resize(xs.rows(), static_cast<Eigen::Index>(set_->size()));
    for (Eigen::Index i = 0; i < xs.rows(); ++i)
      data_.row(i) = set_->featurize(xs.row(i).transpose()).transpose();
  }

  const Eigen::MatrixXd& data() const { return data_; }
  const MultiplicitiesSet& set() const { return *set_; }
  std::shared_ptr<const MultiplicitiesSet> set_ptr() const { return set_; }
  Eigen::Index rows() const { return data_.rows(); }

  Eigen::VectorXd column_means() const { return data_.colwise().mean(); }

 private:
  std::shared_ptr<const MultiplicitiesSet> set_;
  Eigen::MatrixXd data_;
};

// Output of the tensorized least-squares fit: a coefficient vector over a
// multiplicities set, evaluable at new points.
class Predictor {
 public:
  Predictor(std::shared_ptr<const MultiplicitiesSet> set, Eigen::VectorXd coeffs,
            SolveDiagnostics diag)
      : set_(std::move(set)), coeffs_(std::move(coeffs)), diag_(std::move(diag)) {
    if (coeffs_.size() != static_cast<Eigen::Index>(set_->size()))
      throw ConfigError("predictor: coefficient length mismatch");
  }

  const Eigen::VectorXd& coeffs() const { return coeffs_; }
  const MultiplicitiesSet& set() const { return *set_; }
  const SolveDiagnostics& diagnostics() const { return diag_; }

  double predict(const Eigen::VectorXd& x) const {
    return set_->featurize(x).dot(coeffs_);
  }

  Eigen::VectorXd predict_rows(const Eigen::MatrixXd& xs) const {
    Eigen::VectorXd y(xs.rows());
    for (Eigen::Index i = 0; i < xs.rows(); ++i) y(i) = predict(xs.row(i).transpose());
    return y;
  }

  nlohmann::json to_json() const {
    return {{"set", set_->to_json()},
            {"coeffs", std::vector<double>(coeffs_.data(), coeffs_.data() + coeffs_.size())},
            {"diagnostics", diag_.to_json()}};
  }

  static Predictor from_json(const nlohmann::json& j) {
    auto set = std::make_shared<MultiplicitiesSet>(
        MultiplicitiesSet::from_json(j.at("set")));
    const auto c = j.at("coeffs").get<std::vector<double>>();
    SolveDiagnostics diag;
    return Predictor(std::move(set),
                     Eigen::Map<const Eigen::VectorXd>(c.data(),
                                                       static_cast<Eigen::Index>(c.size())),
                     diag);
  }

 private:
  std::shared_ptr<const MultiplicitiesSet> set_;
  Eigen::VectorXd coeffs_;
  SolveDiagnostics diag_;
};

inline Predictor fit(const DesignMatrix& design, const Eigen::VectorXd& y) {
  if (y.size() != design.rows()) throw ConfigError("fit: label count mismatch");
  SolveDiagnostics diag;
  Eigen::VectorXd coeffs = min_norm_lsq(design.data(), y, &diag);
  return Predictor(design.set_ptr(), std::move(coeffs), std::move(diag));
}

// Monte-Carlo estimate of E[(h(X) - truth(X))^2] on fresh samples; returns
// {mean, standard error}.
template <typename Truth>
std::pair<double, double> mse(const Predictor& p, const Truth& truth,
                              const MeasureSpec& spec, Eigen::Index n_test,
                              std::uint64_t seed) {
  if (n_test < 1) throw ConfigError("mse: n_test must be >= 1");
  const Eigen::MatrixXd xs =
      spec.sample_matrix(n_test, p.set().dimension(), seed, /*stream=*/0x3e57);
  double sum = 0.0, sumsq = 0.0;
  for (Eigen::Index i = 0; i < n_test; ++i) {
    const Eigen::VectorXd x = xs.row(i).transpose();
    const double e = p.predict(x) - truth(x);
    sum += e * e;
    sumsq += e * e * e * e;
  }
  const double mean = sum / static_cast<double>(n_test);
  const double var = std::max(0.0, sumsq / static_cast<double>(n_test) - mean * mean);
  return {mean, std::sqrt(var / static_cast<double>(n_test))};
}

}  // namespace polyreg
