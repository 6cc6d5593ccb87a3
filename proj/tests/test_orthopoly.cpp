#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>

#include "polyreg/orthopoly.hpp"

using polyreg::MeasureSpec;
using polyreg::MultiplicitiesSet;
using polyreg::Ordering;
using polyreg::OrthoBasis;

namespace {

const std::vector<MeasureSpec>& test_measures() {
  static const std::vector<MeasureSpec> ms{
      MeasureSpec::rademacher(),
      MeasureSpec::discrete_uniform({-1.0, 0.0, 1.0}),
      MeasureSpec::discrete_weighted({-1.0, 1.0}, {0.3, 0.7}),
  };
  return ms;
}

}  // namespace

TEST_CASE("hankel determinants positive, D0 = 1, T0 = 1") {
  for (const auto& spec : test_measures()) {
    const OrthoBasis basis(spec, 4);
    CHECK(basis.hankel(0) == 1.0);
    for (int n = 0; n <= basis.order(); ++n) CHECK(basis.hankel(n) > 0.0);
    CHECK(basis.poly(0) == std::vector<double>{1.0});
  }
}

TEST_CASE("orthonormality and moment identities by exact enumeration") {
  for (const auto& spec : test_measures()) {
    const OrthoBasis basis(spec, 4);
    const int K = basis.order();
    for (int i = 0; i <= K; ++i) {
      for (int j = 0; j <= K; ++j) {
        const double g = basis.gram(i, j);
        CHECK(std::abs(g - (i == j ? 1.0 : 0.0)) <= 1e-10);
      }
    }
    for (int j = 0; j <= K; ++j) {
      for (int i = 0; i < j; ++i) CHECK(std::abs(basis.moment_against(i, j)) <= 1e-10);
      const double lead = basis.moment_against(j, j);
      const double expected =
          std::sqrt(basis.hankel(j) / (j == 0 ? 1.0 : basis.hankel(j - 1)));
      CHECK(lead == doctest::Approx(expected).epsilon(1e-10));
      CHECK(lead > 0.0);
    }
  }
}

TEST_CASE("rademacher basis is the hand-computable one") {
  const OrthoBasis basis(MeasureSpec::rademacher(), 3);
  CHECK(basis.order() == 1);  // two-point support caps the family at degree 1
  CHECK(basis.eval(1, 1.0) == doctest::Approx(1.0));
  CHECK(basis.eval(1, -1.0) == doctest::Approx(-1.0));
}

TEST_CASE("legendre-like family for continuous uniform") {
  const OrthoBasis basis(MeasureSpec::continuous_uniform(-1.0, 1.0), 3);
  // orthonormalized Legendre: T_n(x) = sqrt(2n+1) P_n(x)
  CHECK(basis.eval(1, 0.5) == doctest::Approx(std::sqrt(3.0) * 0.5));
  CHECK(basis.eval(2, 0.5) ==
        doctest::Approx(std::sqrt(5.0) * 0.5 * (3.0 * 0.25 - 1.0)));
  CHECK(basis.hankel(1) == doctest::Approx(1.0 / 3.0));
  // D_2 = det [[1,0,1/3],[0,1/3,0],[1/3,0,1/5]] = 1/15 - 1/27 = 4/135
  CHECK(basis.hankel(2) == doctest::Approx(4.0 / 135.0).epsilon(1e-12));
}

TEST_CASE("sigma decomposition for small cases") {
  for (const auto& spec : test_measures()) {
    for (int d = 1; d <= 4; ++d) {
      for (int k = 1; k <= 3; ++k) {
        auto set = std::make_shared<const MultiplicitiesSet>(
            d, k, spec.support_cardinality(), Ordering::GradedDescending);
        const auto dec = polyreg::decompose(spec, set);
        CHECK((dec.sigma - dec.reconstruct()).cwiseAbs().maxCoeff() <= 1e-9);

        // unit-triangular change of basis
        double det = 1.0;
        for (Eigen::Index i = 0; i < dec.V.rows(); ++i) det *= dec.V(i, i);
        CHECK(det == doctest::Approx(1.0).epsilon(1e-9));
        for (Eigen::Index i = 0; i < dec.V.rows(); ++i)
          for (Eigen::Index j = 0; j < i; ++j) CHECK(dec.V(i, j) == doctest::Approx(0.0));

        for (Eigen::Index i = 0; i < dec.Ddiag.size(); ++i) CHECK(dec.Ddiag(i) > 0.0);
      }
    }
  }
}

TEST_CASE("diagonal entries are products of hankel ratios") {
  const auto spec = MeasureSpec::discrete_uniform({-1.0, 0.0, 1.0});
  const OrthoBasis basis(spec, 2);
  auto set = std::make_shared<const MultiplicitiesSet>(2, 2, spec.support_cardinality(),
                                                       Ordering::GradedDescending);
  const auto dec = polyreg::decompose(spec, set);
  for (std::size_t idx = 0; idx < set->size(); ++idx) {
    double expected = 1.0;
    for (int c = 0; c < 2; ++c) {
      const int a = set->exponent(idx, c);
      if (a == 0) continue;
      expected *= basis.hankel(a) / (a == 1 ? 1.0 : basis.hankel(a - 1));
    }
    CHECK(dec.Ddiag(static_cast<Eigen::Index>(idx)) ==
          doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("sigma for rademacher is the identity") {
  const auto spec = MeasureSpec::rademacher();
  auto set = std::make_shared<const MultiplicitiesSet>(2, 1, spec.support_cardinality());
  const Eigen::MatrixXd sigma = polyreg::sigma_exact(spec, *set);
  CHECK((sigma - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("continuous sigma agrees with monte carlo") {
  const auto spec = MeasureSpec::continuous_uniform(-1.0, 1.0);
  const MultiplicitiesSet set(2, 2, std::nullopt);
  const Eigen::MatrixXd sigma = polyreg::sigma_exact(spec, set);
  const auto n = static_cast<Eigen::Index>(set.size());
  Eigen::MatrixXd mc = Eigen::MatrixXd::Zero(n, n);
  const auto xs = spec.sample_matrix(20000, 2, 17);
  for (Eigen::Index i = 0; i < xs.rows(); ++i) {
    const Eigen::VectorXd f = set.featurize(xs.row(i).transpose());
    mc += f * f.transpose();
  }
  mc /= static_cast<double>(xs.rows());
  CHECK((sigma - mc).cwiseAbs().maxCoeff() <= 0.05);
}

TEST_CASE("eigenvalue sandwich and condition bound") {
  for (const auto& spec : test_measures()) {
    for (int d = 1; d <= 4; ++d) {
      for (int k = 1; k <= 3; ++k) {
        const auto row = polyreg::cond_number_exact(spec, d, k);
        CHECK(row.lambda_min >= row.lambda_min_lb - 1e-9);
        CHECK(row.lambda_max <= row.lambda_max_ub + 1e-9);
        if (d >= 4) CHECK(row.kappa <= row.kappa_ub + 1e-6);
      }
    }
  }
}
