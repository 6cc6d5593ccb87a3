#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "polyreg/errors.hpp"

namespace polyreg {

// Exponent vector alpha indexing a monomial x_1^{a_1} ... x_d^{a_d}.
struct MultiIndex {
  std::vector<int> exponents;

  int total_degree() const {
    int t = 0;
    for (int e : exponents) t += e;
    return t;
  }

  bool operator==(const MultiIndex& other) const { return exponents == other.exponents; }
};

enum class Ordering { GradedDescending, GradedAscending };

inline std::string to_string(Ordering o) {
  return o == Ordering::GradedDescending ? "graded_descending" : "graded_ascending";
}

inline Ordering ordering_from_string(const std::string& s) {
  if (s == "graded_descending") return Ordering::GradedDescending;
  if (s == "graded_ascending") return Ordering::GradedAscending;
  throw ConfigError("unknown ordering: " + s);
}

// omega(S,t) = min{|S|-1, t}; the per-coordinate exponent cap.  A missing
// cardinality means an infinite support.
inline int omega(std::optional<std::size_t> support_card, int t) {
  if (t < 0) throw ConfigError("omega: t must be >= 0");
  if (!support_card) return t;
  return std::min<int>(static_cast<int>(*support_card) - 1, t);
}

inline double count_bound(int d, int M) {
  // sum_{i=0}^{M} C(d+i-1, i), computed in floating point
  double total = 0.0, term = 1.0;
  for (int i = 0; i <= M; ++i) {
    total += term;
    term *= static_cast<double>(d + i) / static_cast<double>(i + 1);
  }
  return total;
}

// Ordered collection of exponent vectors: all alpha with |alpha| <= M' and
// alpha_i <= s_cap, where M' = min{M, d*s_cap}.
class MultiplicitiesSet {
 public:
  static constexpr std::size_t kDefaultBudget = 5'000'000;

  MultiplicitiesSet(int d, int M, std::optional<std::size_t> support_card,
                    Ordering ordering = Ordering::GradedAscending,
                    std::size_t budget = kDefaultBudget)
      : d_(d), degree_cap_(M), s_cap_(omega(support_card, M)), ordering_(ordering) {
    if (d < 1) throw ConfigError("multiplicities: d must be >= 1");
    if (M < 0) throw ConfigError("multiplicities: M must be >= 0");
    const int m_eff = std::min<long long>(M, static_cast<long long>(d) * s_cap_);
    if (count_bound(d, m_eff) > static_cast<double>(budget))
      throw BudgetError("multiplicities: feature budget exceeded");
    effective_degree_ = m_eff;

    std::vector<std::vector<int>> by_degree(static_cast<std::size_t>(m_eff) + 1);
    std::vector<int> cur(static_cast<std::size_t>(d), 0);
    enumerate(cur, 0, 0, m_eff, by_degree);

    if (ordering_ == Ordering::GradedAscending) {
      for (int t = 0; t <= m_eff; ++t) append_degree_group(by_degree, t);
    } else {
      for (int t = m_eff; t >= 0; --t) append_degree_group(by_degree, t);
    }
    zero_position_ = 0;
    for (std::size_t i = 0; i < size(); ++i)
      if (total_degree(i) == 0) zero_position_ = i;
  }

  int dimension() const { return d_; }
  int degree_cap() const { return degree_cap_; }
  int effective_degree() const { return effective_degree_; }
  int per_coordinate_cap() const { return s_cap_; }
  Ordering ordering() const { return ordering_; }
  std::size_t size() const { return flat_.size() / static_cast<std::size_t>(d_); }
  std::size_t zero_position() const { return zero_position_; }

  int exponent(std::size_t idx, int coord) const {
    return flat_[idx * static_cast<std::size_t>(d_) + static_cast<std::size_t>(coord)];
  }

  MultiIndex index(std::size_t idx) const {
    MultiIndex mi;
    mi.exponents.assign(flat_.begin() + static_cast<std::ptrdiff_t>(idx * d_),
                        flat_.begin() + static_cast<std::ptrdiff_t>((idx + 1) * d_));
    return mi;
  }

  int total_degree(std::size_t idx) const {
    int t = 0;
    for (int c = 0; c < d_; ++c) t += exponent(idx, c);
    return t;
  }

  // Monomial feature vector at x; 0^0 = 1.
  Eigen::VectorXd featurize(const Eigen::VectorXd& x) const {
    if (x.size() != d_) throw ConfigError("featurize: dimension mismatch");
    // per-coordinate power tables up to s_cap
    Eigen::MatrixXd pow(static_cast<Eigen::Index>(s_cap_) + 1, d_);
    for (int c = 0; c < d_; ++c) {
      pow(0, c) = 1.0;
      for (int p = 1; p <= s_cap_; ++p) pow(p, c) = pow(p - 1, c) * x(c);
    }
    Eigen::VectorXd out(static_cast<Eigen::Index>(size()));
    for (std::size_t i = 0; i < size(); ++i) {
      double v = 1.0;
      for (int c = 0; c < d_; ++c) v *= pow(exponent(i, c), c);
      out(static_cast<Eigen::Index>(i)) = v;
    }
    return out;
  }

  std::optional<std::size_t> position(const MultiIndex& alpha) const {
    for (std::size_t i = 0; i < size(); ++i)
      if (index(i) == alpha) return i;
    return std::nullopt;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["d"] = d_;
    j["degree"] = degree_cap_;
    j["s_cap"] = s_cap_;
    j["ordering"] = to_string(ordering_);
    nlohmann::json idx = nlohmann::json::array();
    for (std::size_t i = 0; i < size(); ++i) idx.push_back(index(i).exponents);
    j["indices"] = idx;
    return j;
  }

  static MultiplicitiesSet from_json(const nlohmann::json& j) {
    const int s_cap = j.at("s_cap").get<int>();
    MultiplicitiesSet set(j.at("d").get<int>(), j.at("degree").get<int>(),
                          static_cast<std::size_t>(s_cap) + 1,
                          ordering_from_string(j.at("ordering").get<std::string>()));
    // sanity: the explicit index list must match the enumeration
    const auto& idx = j.at("indices");
    if (idx.size() != set.size())
      throw ConfigError("multiplicities: serialized index list size mismatch");
    return set;
  }

 private:
  void enumerate(std::vector<int>& cur, int coord, int used, int m_eff,
                 std::vector<std::vector<int>>& by_degree) {
    if (coord == d_) {
      auto& bucket = by_degree[static_cast<std::size_t>(used)];
      bucket.insert(bucket.end(), cur.begin(), cur.end());
      return;
    }
    // descending exponent keeps within-group order lexicographically decreasing
    const int cap = std::min(s_cap_, m_eff - used);
    for (int e = cap; e >= 0; --e) {
      cur[static_cast<std::size_t>(coord)] = e;
      enumerate(cur, coord + 1, used + e, m_eff, by_degree);
    }
    cur[static_cast<std::size_t>(coord)] = 0;
  }

  void append_degree_group(const std::vector<std::vector<int>>& by_degree, int t) {
    const auto& g = by_degree[static_cast<std::size_t>(t)];
    flat_.insert(flat_.end(), g.begin(), g.end());
  }

  int d_;
  int degree_cap_;
  int s_cap_;
  int effective_degree_;
  Ordering ordering_;
  std::vector<int> flat_;  // size() * d exponents
  std::size_t zero_position_ = 0;
};

}  // namespace polyreg
