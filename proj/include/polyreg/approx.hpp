#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "polyreg/errors.hpp"

namespace polyreg {

inline double horner(const std::vector<double>& coeffs, double x) {
  double acc = 0.0;
  for (std::size_t i = coeffs.size(); i-- > 0;) acc = acc * x + coeffs[i];
  return acc;
}

// Admissible activations: 1-Lipschitz, bounded by 1 on [-1,1], uniformly
// approximable by polynomials with range in [0,1].
class Activation {
 public:
  enum class Kind { ReLU, Sigmoid, Polynomial };

  static Activation relu() { return Activation(Kind::ReLU, {}); }
  static Activation sigmoid() { return Activation(Kind::Sigmoid, {}); }
  static Activation polynomial(std::vector<double> coeffs) {
    return Activation(Kind::Polynomial, std::move(coeffs));
  }

  Kind kind() const { return kind_; }
  const std::vector<double>& coeffs() const { return coeffs_; }

  int polynomial_degree() const {
    if (kind_ != Kind::Polynomial) throw ConfigError("activation is not polynomial");
    int deg = 0;
    for (std::size_t i = 0; i < coeffs_.size(); ++i)
      if (coeffs_[i] != 0.0) deg = static_cast<int>(i);
    return deg;
  }

  double operator()(double x) const {
    switch (kind_) {
      case Kind::ReLU:
        return x > 0.0 ? x : 0.0;
      case Kind::Sigmoid:
        return 1.0 / (1.0 + std::exp(-x));
      case Kind::Polynomial:
        return horner(coeffs_, x);
    }
    return 0.0;
  }

  std::string name() const {
    switch (kind_) {
      case Kind::ReLU: return "relu";
      case Kind::Sigmoid: return "sigmoid";
      case Kind::Polynomial: return "polynomial";
    }
    return "?";
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["kind"] = name();
    if (kind_ == Kind::Polynomial) j["coeffs"] = coeffs_;
    return j;
  }

  static Activation from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "relu") return relu();
    if (kind == "sigmoid") return sigmoid();
    if (kind == "polynomial")
      return polynomial(j.at("coeffs").get<std::vector<double>>());
    throw ConfigError("unknown activation: " + kind);
  }

 private:
  Activation(Kind kind, std::vector<double> coeffs)
      : kind_(kind), coeffs_(std::move(coeffs)) {}

  Kind kind_;
  std::vector<double> coeffs_;
};

// Polynomial approximant of an activation on [-1,1].  Sup error is certified
// on a fixed equispaced grid (which contains 0 exactly) and the range is
// post-conditioned into [0,1].
struct PolyApprox {
  std::vector<double> coeffs;  // monomial basis
  double achieved_sup_error = 0.0;
  double epsilon_target = 0.0;
  int grid_size = 0;

  int degree() const { return static_cast<int>(coeffs.size()) - 1; }
  double operator()(double x) const { return horner(coeffs, x); }

  nlohmann::json to_json() const {
    return {{"coeffs", coeffs},
            {"achieved_sup_error", achieved_sup_error},
            {"epsilon_target", epsilon_target},
            {"grid_size", grid_size}};
  }
};

namespace detail {

// Chebyshev projection of f at the given degree, returned in the monomial
// basis.  Coefficients come from Chebyshev-Gauss quadrature.
template <typename F>
std::vector<double> chebyshev_monomial_fit(const F& f, int degree) {
  const int n = 4 * degree + 64;  // quadrature nodes
  std::vector<double> cheb(static_cast<std::size_t>(degree) + 1, 0.0);
  constexpr double pi = 3.14159265358979323846;
  for (int j = 0; j < n; ++j) {
    const double theta = pi * (j + 0.5) / n;
    const double fx = f(std::cos(theta));
    for (int k = 0; k <= degree; ++k)
      cheb[static_cast<std::size_t>(k)] += fx * std::cos(k * theta);
  }
  for (int k = 0; k <= degree; ++k)
    cheb[static_cast<std::size_t>(k)] *= (k == 0 ? 1.0 : 2.0) / n;

  // Chebyshev -> monomial via the T_k recurrence
  std::vector<double> mono(static_cast<std::size_t>(degree) + 1, 0.0);
  std::vector<double> t_prev{1.0};      // T_0
  std::vector<double> t_cur{0.0, 1.0};  // T_1
  mono[0] += cheb[0];
  if (degree >= 1) mono[1] += cheb[1];
  for (int k = 2; k <= degree; ++k) {
    std::vector<double> t_next(static_cast<std::size_t>(k) + 1, 0.0);
    for (std::size_t i = 0; i < t_cur.size(); ++i) t_next[i + 1] += 2.0 * t_cur[i];
    for (std::size_t i = 0; i < t_prev.size(); ++i) t_next[i] -= t_prev[i];
    for (std::size_t i = 0; i <= static_cast<std::size_t>(k); ++i)
      mono[i] += cheb[static_cast<std::size_t>(k)] * t_next[i];
    t_prev = std::move(t_cur);
    t_cur = std::move(t_next);
  }
  return mono;
}

}  // namespace detail

inline constexpr int kApproxGridSize = 10'001;
inline constexpr int kDefaultDegreeCap = 200;

// Minimal-degree-found polynomial with sup error <= epsilon on the grid and
// range inside [0,1].  Candidates are Chebyshev truncations of increasing
// degree; a candidate whose range leaks outside [0,1] is affinely squeezed
// back and re-checked against the error budget.
inline PolyApprox approximate(const Activation& act, double epsilon,
                              int degree_cap = kDefaultDegreeCap) {
  if (!(epsilon > 0.0 && epsilon <= 1.0))
    throw ConfigError("approximate: epsilon must be in (0,1]");

  if (act.kind() == Activation::Kind::Polynomial) {
    PolyApprox pa;
    pa.coeffs = act.coeffs();
    if (pa.coeffs.empty()) pa.coeffs = {0.0};
    pa.achieved_sup_error = 0.0;
    pa.epsilon_target = epsilon;
    pa.grid_size = kApproxGridSize;
    return pa;
  }

  for (int degree = 0; degree <= degree_cap; ++degree) {
    std::vector<double> coeffs =
        detail::chebyshev_monomial_fit([&](double x) { return act(x); }, degree);

    auto grid_stats = [&](const std::vector<double>& c) {
      double err = 0.0, pmin = 1e300, pmax = -1e300;
      for (int g = 0; g < kApproxGridSize; ++g) {
        const double x = -1.0 + 2.0 * g / (kApproxGridSize - 1);
        const double p = horner(c, x);
        err = std::max(err, std::abs(p - act(x)));
        pmin = std::min(pmin, p);
        pmax = std::max(pmax, p);
      }
      return std::tuple<double, double, double>{err, pmin, pmax};
    };

    auto [err, pmin, pmax] = grid_stats(coeffs);
    if (pmin < 0.0 || pmax > 1.0) {
      // squeeze [min(pmin,0), max(pmax,1)] onto [0,1]
      const double lo = std::min(pmin, 0.0), hi = std::max(pmax, 1.0);
      const double a = 1.0 / (hi - lo), b = -lo / (hi - lo);
      for (double& c : coeffs) c *= a;
      coeffs[0] += b;
      std::tie(err, pmin, pmax) = grid_stats(coeffs);
    }
    if (err <= epsilon && pmin >= -1e-12 && pmax <= 1.0 + 1e-12) {
      PolyApprox pa;
      pa.coeffs = std::move(coeffs);
      pa.achieved_sup_error = err;
      pa.epsilon_target = epsilon;
      pa.grid_size = kApproxGridSize;
      return pa;
    }
  }
  throw BudgetError("approximate: degree budget exceeded (epsilon too small)");
}

struct DegreeSchedule {
  double per_layer_epsilon = 0.0;
  int per_layer_degree = 0;
  long long tensor_degree = 0;  // M = r^L
};

// Per-layer budget sqrt(epsilon) / (budget_denominator * L); tensor degree is
// the per-layer degree raised to the depth.  Polynomial activations need no
// approximation and contribute their exact degree.
inline DegreeSchedule degree_schedule(const Activation& act, int depth, double epsilon,
                                      double budget_denominator = 2.0,
                                      int degree_cap = kDefaultDegreeCap) {
  if (depth < 1) throw ConfigError("degree_schedule: depth must be >= 1");
  if (!(epsilon > 0.0 && epsilon <= 1.0))
    throw ConfigError("degree_schedule: epsilon must be in (0,1]");
  DegreeSchedule s;
  if (act.kind() == Activation::Kind::Polynomial) {
    s.per_layer_epsilon = 0.0;
    s.per_layer_degree = act.polynomial_degree();
  } else {
    s.per_layer_epsilon =
        std::min(1.0, std::sqrt(epsilon) / (budget_denominator * depth));
    s.per_layer_degree = approximate(act, s.per_layer_epsilon, degree_cap).degree();
  }
  s.tensor_degree = 1;
  for (int l = 0; l < depth; ++l) s.tensor_degree *= s.per_layer_degree;
  return s;
}

}  // namespace polyreg
