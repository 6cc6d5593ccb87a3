#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "polyreg/errors.hpp"
#include "polyreg/measure.hpp"
#include "polyreg/multiindex.hpp"

namespace polyreg {

// Orthonormal univariate polynomial family for a measure P, up to order
// omega(P,k), together with the Hankel determinants of the moment sequence.
class OrthoBasis {
 public:
  OrthoBasis(const MeasureSpec& spec, int k) : measure_(spec) {
    if (k < 0) throw ConfigError("ortho basis: k must be >= 0");
    order_ = omega(spec.support_cardinality(), k);
    moments_ = spec.exact_moments(2 * order_ + 2);

    hankel_.resize(static_cast<std::size_t>(order_) + 1);
    for (int n = 0; n <= order_; ++n) {
      Eigen::MatrixXd H(n + 1, n + 1);
      for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j) H(i, j) = moments_[static_cast<std::size_t>(i + j)];
      hankel_[static_cast<std::size_t>(n)] = H.determinant();
      if (!(hankel_[static_cast<std::size_t>(n)] > 0.0))
        throw ConfigError("ortho basis: Hankel determinant not positive "
                          "(degenerate measure or order above support)");
    }

    build_gram_schmidt();
    cross_check_determinant_formula();
  }

  const MeasureSpec& measure() const { return measure_; }
  int order() const { return order_; }
  double hankel(int n) const { return hankel_[static_cast<std::size_t>(n)]; }
  double moment(int n) const { return moments_[static_cast<std::size_t>(n)]; }

  // monomial coefficients of T_i
  const std::vector<double>& poly(int i) const {
    return polys_[static_cast<std::size_t>(i)];
  }

  double eval(int i, double x) const { return horner_local(poly(i), x); }

  // E[x^a T_b(x)] from the coefficient expansion and exact moments
  double moment_against(int a, int b) const {
    const auto& t = poly(b);
    double acc = 0.0;
    for (std::size_t n = 0; n < t.size(); ++n)
      acc += t[n] * moments_[static_cast<std::size_t>(a) + n];
    return acc;
  }

  // E[T_i T_j]
  double gram(int i, int j) const {
    const auto& p = poly(i);
    const auto& q = poly(j);
    double acc = 0.0;
    for (std::size_t a = 0; a < p.size(); ++a)
      for (std::size_t b = 0; b < q.size(); ++b)
        acc += p[a] * q[b] * moments_[a + b];
    return acc;
  }

  // Product family T_alpha(x) = prod_i T_{alpha_i}(x_i).
  std::function<double(const Eigen::VectorXd&)> multivariate(const MultiIndex& alpha) const {
    for (int e : alpha.exponents)
      if (e > order_) throw ConfigError("multivariate T: exponent exceeds basis order");
    std::vector<int> a = alpha.exponents;
    return [this, a](const Eigen::VectorXd& x) {
      if (x.size() != static_cast<Eigen::Index>(a.size()))
        throw ConfigError("multivariate T: dimension mismatch");
      double v = 1.0;
      for (Eigen::Index i = 0; i < x.size(); ++i)
        v *= eval(a[static_cast<std::size_t>(i)], x(i));
      return v;
    };
  }

  // E[X_alpha T_beta(X)] under the product measure
  double product_moment_against(const MultiIndex& alpha, const MultiIndex& beta) const {
    double v = 1.0;
    for (std::size_t i = 0; i < alpha.exponents.size(); ++i)
      v *= moment_against(alpha.exponents[i], beta.exponents[i]);
    return v;
  }

 private:
  static double horner_local(const std::vector<double>& c, double x) {
    double acc = 0.0;
    for (std::size_t i = c.size(); i-- > 0;) acc = acc * x + c[i];
    return acc;
  }

  void build_gram_schmidt() {
    polys_.clear();
    for (int i = 0; i <= order_; ++i) {
      std::vector<double> p(static_cast<std::size_t>(i) + 1, 0.0);
      p[static_cast<std::size_t>(i)] = 1.0;  // x^i
      for (int j = 0; j < i; ++j) {
        // subtract <x^i, T_j> T_j
        double proj = 0.0;
        const auto& t = polys_[static_cast<std::size_t>(j)];
        for (std::size_t n = 0; n < t.size(); ++n)
          proj += t[n] * moments_[static_cast<std::size_t>(i) + n];
        for (std::size_t n = 0; n < t.size(); ++n) p[n] -= proj * t[n];
      }
      double norm2 = 0.0;
      for (std::size_t a = 0; a < p.size(); ++a)
        for (std::size_t b = 0; b < p.size(); ++b) norm2 += p[a] * p[b] * moments_[a + b];
      if (!(norm2 > 0.0))
        throw ConfigError("ortho basis: degenerate inner product during Gram-Schmidt");
      const double inv = 1.0 / std::sqrt(norm2);
      for (double& c : p) c *= inv;
      polys_.push_back(std::move(p));
    }
  }

  // T_i is also det of the moment matrix bordered by (1, x, ..., x^i),
  // divided by sqrt(D_i D_{i-1}).  The two constructions agree up to
  // floating point; disagreement beyond tolerance flags a numerical problem.
  void cross_check_determinant_formula() const {
    for (int i = 1; i <= order_; ++i) {
      const double scale =
          1.0 / std::sqrt(hankel_[static_cast<std::size_t>(i)] *
                          hankel_[static_cast<std::size_t>(i - 1)]);
      const double hankel_cond =
          hankel_[0] / std::min(hankel_[static_cast<std::size_t>(i)],
                                hankel_[static_cast<std::size_t>(i - 1)]);
      const double tol = 1e-10 * std::max(1.0, hankel_cond);
      for (int n = 0; n <= i; ++n) {
        // cofactor of the (i, n) entry of the bordered matrix
        Eigen::MatrixXd minor(i, i);
        for (int r = 0; r < i; ++r) {
          int cc = 0;
          for (int c = 0; c <= i; ++c) {
            if (c == n) continue;
            minor(r, cc++) = moments_[static_cast<std::size_t>(r + c)];
          }
        }
        const double coeff =
            ((i + n) % 2 == 0 ? 1.0 : -1.0) * minor.determinant() * scale;
        const double gs = polys_[static_cast<std::size_t>(i)][static_cast<std::size_t>(n)];
        if (std::abs(coeff - gs) > tol * std::max(1.0, std::abs(gs)))
          throw ConfigError("ortho basis: Gram-Schmidt and determinant "
                            "constructions disagree");
      }
    }
  }

  MeasureSpec measure_;
  int order_;
  std::vector<double> moments_;
  std::vector<double> hankel_;
  std::vector<std::vector<double>> polys_;
};

// Exact covariance of the monomial feature vector over a multiplicities set:
// enumeration over the product support for discrete measures, moment
// factorization for continuous-uniform ones.
inline Eigen::MatrixXd sigma_exact(const MeasureSpec& spec, const MultiplicitiesSet& set,
                                   std::size_t enumeration_budget = 1'000'000) {
  const int d = set.dimension();
  const auto n = static_cast<Eigen::Index>(set.size());
  Eigen::MatrixXd sigma(n, n);

  if (spec.discrete()) {
    const auto& support = spec.support();
    const auto& weights = spec.weights();
    const std::size_t s = support.size();
    double points = 1.0;
    for (int i = 0; i < d; ++i) points *= static_cast<double>(s);
    if (points > static_cast<double>(enumeration_budget))
      throw BudgetError("sigma_exact: enumeration budget exceeded");

    sigma.setZero();
    std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
    Eigen::VectorXd x(d);
    while (true) {
      double w = 1.0;
      for (int c = 0; c < d; ++c) {
        x(c) = support[idx[static_cast<std::size_t>(c)]];
        w *= weights[idx[static_cast<std::size_t>(c)]];
      }
      const Eigen::VectorXd v = set.featurize(x);
      sigma.noalias() += w * v * v.transpose();
      int c = 0;
      for (; c < d; ++c) {
        if (++idx[static_cast<std::size_t>(c)] < s) break;
        idx[static_cast<std::size_t>(c)] = 0;
      }
      if (c == d) break;
    }
    return sigma;
  }

  // product measure: E[X_{alpha+beta}] = prod_i c_{alpha_i + beta_i}
  const auto moments = spec.exact_moments(2 * set.per_coordinate_cap());
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = a; b < n; ++b) {
      double v = 1.0;
      for (int c = 0; c < d; ++c)
        v *= moments[static_cast<std::size_t>(
            set.exponent(static_cast<std::size_t>(a), c) +
            set.exponent(static_cast<std::size_t>(b), c))];
      sigma(a, b) = sigma(b, a) = v;
    }
  }
  return sigma;
}

// Dimension-free constants controlling the spectrum of Sigma.
struct EigenBounds {
  double c = 1.0;           // lower-bound constant
  double f = 1.0;           // upper-bound constant
  double C = 1.0;           // f / c
  double lambda_min_lb = 0.0;
  double lambda_max_ub = 0.0;
  double kappa_ub = 0.0;    // C * d^{3k}, meaningful for d >= 4
  double count_sum = 0.0;   // sum_{i=0}^{k} C(d+i-1, i)

  nlohmann::json to_json() const {
    return {{"c", c},
            {"f", f},
            {"C", C},
            {"lambda_min_lb", lambda_min_lb},
            {"lambda_max_ub", lambda_max_ub},
            {"kappa_ub", kappa_ub},
            {"count_sum", count_sum}};
  }
};

inline EigenBounds eigen_bounds(const MeasureSpec& spec, int k, int d) {
  if (k < 0 || d < 1) throw ConfigError("eigen_bounds: bad arguments");
  OrthoBasis basis(spec, k);
  const int w = basis.order();

  double min_ratio = 1e300, max_ratio = -1e300;
  for (int i = 1; i <= w; ++i) {
    const double r = basis.hankel(i) / basis.hankel(i - 1);
    min_ratio = std::min(min_ratio, r);
    max_ratio = std::max(max_ratio, r);
  }
  EigenBounds b;
  const double kk = static_cast<double>(k);
  if (w >= 1) {
    b.c = std::min(std::pow(min_ratio, kk / 2.0), 1.0);
    const double c2w = basis.moment(2 * w);
    b.f = std::max(std::pow(c2w, kk), 1.0) * std::max(std::pow(max_ratio, kk), 1.0) /
          std::min(std::pow(min_ratio, kk), 1.0);
  }
  b.C = b.f / b.c;
  b.count_sum = count_bound(d, k);
  b.lambda_min_lb = b.c / b.count_sum;
  b.lambda_max_ub = b.f * b.count_sum;
  b.kappa_ub = b.C * std::pow(static_cast<double>(d), 3.0 * kk);
  return b;
}

// Sigma = V diag(D) V^T where V_{alpha,beta} = E[X_alpha T_beta]/E[X_beta T_beta]
// and D_alpha = E[X_alpha T_alpha]^2.  Under the graded-descending ordering V
// is unit upper triangular.
struct SigmaDecomposition {
  std::shared_ptr<const MultiplicitiesSet> set;
  Eigen::MatrixXd sigma;
  Eigen::MatrixXd V;
  Eigen::VectorXd Ddiag;
  EigenBounds bounds;

  Eigen::MatrixXd reconstruct() const { return V * Ddiag.asDiagonal() * V.transpose(); }
};

inline SigmaDecomposition decompose(const MeasureSpec& spec,
                                    std::shared_ptr<const MultiplicitiesSet> set) {
  SigmaDecomposition out;
  out.set = set;
  out.sigma = sigma_exact(spec, *set);

  OrthoBasis basis(spec, set->degree_cap());
  const auto n = static_cast<Eigen::Index>(set->size());
  out.V.resize(n, n);
  out.Ddiag.resize(n);
  std::vector<double> diag_moment(static_cast<std::size_t>(n));
  for (Eigen::Index b = 0; b < n; ++b) {
    const MultiIndex beta = set->index(static_cast<std::size_t>(b));
    diag_moment[static_cast<std::size_t>(b)] = basis.product_moment_against(beta, beta);
    out.Ddiag(b) = diag_moment[static_cast<std::size_t>(b)] *
                   diag_moment[static_cast<std::size_t>(b)];
  }
  for (Eigen::Index a = 0; a < n; ++a) {
    const MultiIndex alpha = set->index(static_cast<std::size_t>(a));
    for (Eigen::Index b = 0; b < n; ++b) {
      const MultiIndex beta = set->index(static_cast<std::size_t>(b));
      out.V(a, b) = basis.product_moment_against(alpha, beta) /
                    diag_moment[static_cast<std::size_t>(b)];
    }
  }
  out.bounds = eigen_bounds(spec, set->degree_cap(), set->dimension());
  return out;
}

// Exact extreme eigenvalues of Sigma next to the certified bounds.
struct CondNumberRow {
  int d = 0;
  int k = 0;
  double lambda_min = 0.0;
  double lambda_min_lb = 0.0;
  double lambda_max = 0.0;
  double lambda_max_ub = 0.0;
  double kappa = 0.0;
  double kappa_ub = 0.0;
};

inline CondNumberRow cond_number_exact(const MeasureSpec& spec, int d, int k) {
  const MultiplicitiesSet set(d, k, spec.support_cardinality());
  const Eigen::MatrixXd sigma = sigma_exact(spec, set);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
  const EigenBounds b = eigen_bounds(spec, k, d);
  CondNumberRow row;
  row.d = d;
  row.k = k;
  row.lambda_min = es.eigenvalues()(0);
  row.lambda_max = es.eigenvalues()(es.eigenvalues().size() - 1);
  row.lambda_min_lb = b.lambda_min_lb;
  row.lambda_max_ub = b.lambda_max_ub;
  row.kappa = row.lambda_max / row.lambda_min;
  row.kappa_ub = b.kappa_ub;
  return row;
}

}  // namespace polyreg
