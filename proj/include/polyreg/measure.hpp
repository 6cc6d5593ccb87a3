#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "polyreg/errors.hpp"
#include "polyreg/rng.hpp"

namespace polyreg {

// Univariate input distribution P on [-1,1].  Coordinates of data vectors are
// i.i.d. draws from P.
class MeasureSpec {
 public:
  enum class Kind { DiscreteUniform, DiscreteWeighted, ContinuousUniform };

  static MeasureSpec discrete_uniform(std::vector<double> support) {
    const std::size_t n = support.size();
    return MeasureSpec(Kind::DiscreteUniform, std::move(support),
                       std::vector<double>(n, 1.0 / static_cast<double>(n)), 0.0, 0.0);
  }

  static MeasureSpec discrete_weighted(std::vector<double> support,
                                       std::vector<double> weights) {
    return MeasureSpec(Kind::DiscreteWeighted, std::move(support), std::move(weights),
                       0.0, 0.0);
  }

  static MeasureSpec continuous_uniform(double lo, double hi) {
    return MeasureSpec(Kind::ContinuousUniform, {}, {}, lo, hi);
  }

  static MeasureSpec rademacher() { return discrete_uniform({-1.0, 1.0}); }

  Kind kind() const { return kind_; }
  const std::vector<double>& support() const { return support_; }
  const std::vector<double>& weights() const { return weights_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }

  bool discrete() const { return kind_ != Kind::ContinuousUniform; }

  // |Support(P)| for discrete measures, nullopt for continuous ones.
  std::optional<std::size_t> support_cardinality() const {
    if (discrete()) return support_.size();
    return std::nullopt;
  }

  bool symmetric() const {
    if (!discrete()) return lo_ == -hi_;
    // support sorted ascending; check mirror pairs with matching weights
    const std::size_t n = support_.size();
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = n - 1 - i;
      if (std::abs(support_[i] + support_[j]) > 1e-15) return false;
      if (std::abs(weights_[i] - weights_[j]) > 1e-15) return false;
    }
    return true;
  }

  // c_n = E[X^n] for n = 0..K, computed exactly (weighted power sums for
  // discrete, closed form for a uniform interval).
  std::vector<double> exact_moments(int K) const {
    if (K < 0) throw ConfigError("exact_moments: K must be >= 0");
    std::vector<double> c(static_cast<std::size_t>(K) + 1, 0.0);
    if (discrete()) {
      for (int n = 0; n <= K; ++n) {
        double acc = 0.0;
        for (std::size_t i = 0; i < support_.size(); ++i)
          acc += weights_[i] * std::pow(support_[i], n);
        c[static_cast<std::size_t>(n)] = acc;
      }
      if (symmetric())
        for (int n = 1; n <= K; n += 2) c[static_cast<std::size_t>(n)] = 0.0;
    } else {
      // E[X^n] = (hi^{n+1} - lo^{n+1}) / ((n+1)(hi-lo))
      for (int n = 0; n <= K; ++n)
        c[static_cast<std::size_t>(n)] =
            (std::pow(hi_, n + 1) - std::pow(lo_, n + 1)) / ((n + 1) * (hi_ - lo_));
    }
    c[0] = 1.0;
    return c;
  }

  double sample_one(CounterRng& rng) const {
    if (kind_ == Kind::ContinuousUniform) return rng.uniform(lo_, hi_);
    if (kind_ == Kind::DiscreteUniform)
      return support_[rng.uniform_index(support_.size())];
    const double u = rng.next_double();
    double acc = 0.0;
    for (std::size_t i = 0; i < support_.size(); ++i) {
      acc += weights_[i];
      if (u < acc) return support_[i];
    }
    return support_.back();
  }

  // n x d matrix of i.i.d. draws, deterministic for a given (seed, stream).
  Eigen::MatrixXd sample_matrix(Eigen::Index n, Eigen::Index d, std::uint64_t seed,
                                std::uint64_t stream = 0) const {
    if (n < 1 || d < 1) throw ConfigError("sample_matrix: n and d must be >= 1");
    CounterRng rng(seed, stream);
    Eigen::MatrixXd out(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < d; ++j) out(i, j) = sample_one(rng);
    return out;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    switch (kind_) {
      case Kind::DiscreteUniform:
        if (support_ == std::vector<double>{-1.0, 1.0})
          j["kind"] = "rademacher";
        else {
          j["kind"] = "discrete";
          j["support"] = support_;
        }
        break;
      case Kind::DiscreteWeighted:
        j["kind"] = "discrete";
        j["support"] = support_;
        j["weights"] = weights_;
        break;
      case Kind::ContinuousUniform:
        j["kind"] = "uniform";
        j["lo"] = lo_;
        j["hi"] = hi_;
        break;
    }
    return j;
  }

  static MeasureSpec from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "rademacher") return rademacher();
    if (kind == "uniform")
      return continuous_uniform(j.value("lo", -1.0), j.value("hi", 1.0));
    if (kind == "discrete") {
      auto support = j.at("support").get<std::vector<double>>();
      if (j.contains("weights"))
        return discrete_weighted(std::move(support),
                                 j.at("weights").get<std::vector<double>>());
      return discrete_uniform(std::move(support));
    }
    throw ConfigError("unknown measure kind: " + kind);
  }

 private:
  MeasureSpec(Kind kind, std::vector<double> support, std::vector<double> weights,
              double lo, double hi)
      : kind_(kind),
        support_(std::move(support)),
        weights_(std::move(weights)),
        lo_(lo),
        hi_(hi) {
    validate();
  }

  void validate() const {
    if (kind_ == Kind::ContinuousUniform) {
      if (!(lo_ < hi_)) throw ConfigError("measure: need lo < hi");
      if (lo_ < -1.0 || hi_ > 1.0) throw ConfigError("measure: interval not in [-1,1]");
      return;
    }
    if (support_.size() < 2) throw ConfigError("measure: need at least 2 support points");
    if (support_.size() != weights_.size())
      throw ConfigError("measure: support/weight size mismatch");
    double wsum = 0.0;
    for (std::size_t i = 0; i < support_.size(); ++i) {
      if (support_[i] < -1.0 || support_[i] > 1.0)
        throw ConfigError("measure: support point outside [-1,1]");
      if (i > 0 && !(support_[i - 1] < support_[i]))
        throw ConfigError("measure: support must be strictly increasing");
      if (!(weights_[i] > 0.0)) throw ConfigError("measure: weights must be positive");
      wsum += weights_[i];
    }
    if (std::abs(wsum - 1.0) > 1e-12) throw ConfigError("measure: weights must sum to 1");
  }

  Kind kind_;
  std::vector<double> support_;  // sorted ascending
  std::vector<double> weights_;
  double lo_, hi_;
};

}  // namespace polyreg
