#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "polyreg/conv_features.hpp"
#include "polyreg/multiindex.hpp"

using polyreg::ConvFeatureMap;
using polyreg::MultiIndex;
using polyreg::MultiplicitiesSet;
using polyreg::Ordering;

TEST_CASE("omega cap") {
  CHECK(polyreg::omega(std::size_t{2}, 5) == 1);
  CHECK(polyreg::omega(std::nullopt, 5) == 5);
  CHECK(polyreg::omega(std::size_t{3}, 1) == 1);
}

TEST_CASE("enumeration matches hand lists") {
  const MultiplicitiesSet a(2, 1, std::nullopt);
  REQUIRE(a.size() == 3);
  CHECK(a.index(0).exponents == std::vector<int>{0, 0});
  CHECK(a.index(1).exponents == std::vector<int>{1, 0});
  CHECK(a.index(2).exponents == std::vector<int>{0, 1});

  // two-point support caps every exponent at 1
  const MultiplicitiesSet b(2, 2, std::size_t{2});
  REQUIRE(b.size() == 4);
  std::set<std::vector<int>> got;
  for (std::size_t i = 0; i < b.size(); ++i) got.insert(b.index(i).exponents);
  CHECK(got == std::set<std::vector<int>>{{0, 0}, {1, 0}, {0, 1}, {1, 1}});

  const MultiplicitiesSet c(3, 2, std::nullopt);
  CHECK(c.size() == 10);  // 1 + 3 + 6
}

TEST_CASE("graded descending puts the top degree block first") {
  const MultiplicitiesSet s(2, 2, std::nullopt, Ordering::GradedDescending);
  REQUIRE(s.size() == 6);
  CHECK(s.total_degree(0) == 2);
  CHECK(s.total_degree(s.size() - 1) == 0);
  CHECK(s.zero_position() == s.size() - 1);
  for (std::size_t i = 1; i < s.size(); ++i)
    CHECK(s.total_degree(i) <= s.total_degree(i - 1));
}

TEST_CASE("featurize on hand values") {
  const MultiplicitiesSet s(2, 2, std::nullopt, Ordering::GradedAscending);
  Eigen::VectorXd x(2);
  x << 0.5, -1.0;
  const Eigen::VectorXd f = s.featurize(x);
  REQUIRE(f.size() == 6);
  CHECK(f(0) == 1.0);
  CHECK(f(1) == 0.5);
  CHECK(f(2) == -1.0);
  CHECK(f(3) == 0.25);
  CHECK(f(4) == -0.5);
  CHECK(f(5) == 1.0);
}

TEST_CASE("featurize zero vector uses 0^0 = 1") {
  const MultiplicitiesSet s(3, 2, std::nullopt);
  const Eigen::VectorXd f = s.featurize(Eigen::VectorXd::Zero(3));
  for (std::size_t i = 0; i < s.size(); ++i)
    CHECK(f(static_cast<Eigen::Index>(i)) == (i == s.zero_position() ? 1.0 : 0.0));
  CHECK(s.featurize(Eigen::VectorXd::Ones(3)) == Eigen::VectorXd::Ones(10));
}

TEST_CASE("featurize is multiplicative over exponent addition") {
  const MultiplicitiesSet s(3, 4, std::nullopt);
  Eigen::VectorXd x(3);
  x << 0.7, -0.3, 1.2;
  const Eigen::VectorXd f = s.featurize(x);
  for (std::size_t a = 0; a < s.size(); ++a) {
    for (std::size_t b = 0; b < s.size(); ++b) {
      MultiIndex sum;
      sum.exponents = s.index(a).exponents;
      for (std::size_t i = 0; i < sum.exponents.size(); ++i)
        sum.exponents[i] += s.index(b).exponents[i];
      const auto pos = s.position(sum);
      if (!pos) continue;
      CHECK(f(static_cast<Eigen::Index>(*pos)) ==
            doctest::Approx(f(static_cast<Eigen::Index>(a)) *
                            f(static_cast<Eigen::Index>(b)))
                .epsilon(1e-12));
    }
  }
}

TEST_CASE("degree groups are nonempty exactly when t <= d*s") {
  for (int d = 1; d <= 5; ++d) {
    for (int s = 1; s <= 3; ++s) {
      for (int t = 0; t <= 15; ++t) {
        const MultiplicitiesSet set(d, t, static_cast<std::size_t>(s) + 1);
        bool has_degree_t = false;
        for (std::size_t i = 0; i < set.size(); ++i)
          if (set.total_degree(i) == t) has_degree_t = true;
        CHECK(has_degree_t == (t <= d * s));
      }
    }
  }
}

TEST_CASE("cardinality bounds") {
  for (int d = 2; d <= 6; ++d) {
    for (int M = 0; M <= 4; ++M) {
      const MultiplicitiesSet s(d, M, std::nullopt);
      const double bound = polyreg::count_bound(d, M);
      CHECK(static_cast<double>(s.size()) <= bound + 0.5);
      CHECK(bound <= std::pow(static_cast<double>(d), 2.0 * M) + 0.5);
    }
  }
}

TEST_CASE("feature budget guard") {
  CHECK_THROWS_AS(MultiplicitiesSet(14, 14, std::nullopt), polyreg::BudgetError);
}

TEST_CASE("json round trip preserves ordering and indices") {
  const MultiplicitiesSet s(3, 3, std::size_t{3}, Ordering::GradedDescending);
  const auto back = MultiplicitiesSet::from_json(s.to_json());
  REQUIRE(back.size() == s.size());
  CHECK(back.ordering() == s.ordering());
  for (std::size_t i = 0; i < s.size(); ++i)
    CHECK(back.index(i).exponents == s.index(i).exponents);
}

TEST_CASE("conv feature counts") {
  CHECK(ConvFeatureMap(28, 28, 2).feature_count() == 18740u);
  CHECK(ConvFeatureMap(1, 1, 2).feature_count() == 2u);   // x and x^2
  CHECK(ConvFeatureMap(1, 3, 0).feature_count() == 6u);   // 3 linear + 3 squares
}

TEST_CASE("conv features on a tiny image") {
  const ConvFeatureMap fmap(1, 2, 1);
  Eigen::VectorXd img(2);
  img << 2.0, 3.0;
  const Eigen::VectorXd f = fmap.featurize(img);
  // bias, x0, x1, then ordered pairs (0,0),(0,1),(1,0),(1,1)
  REQUIRE(f.size() == 7);
  CHECK(f(0) == 1.0);
  CHECK(f(1) == 2.0);
  CHECK(f(2) == 3.0);
  CHECK(f(3) == 4.0);
  CHECK(f(4) == 6.0);
  CHECK(f(5) == 6.0);
  CHECK(f(6) == 9.0);
}
