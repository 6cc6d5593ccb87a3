#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "polyreg/approx.hpp"
#include "polyreg/errors.hpp"
#include "polyreg/rng.hpp"

namespace polyreg {

enum class WeightNorm { L1Rows, L2Sphere };

// Feedforward network f(x) = a^T sigma(W_L sigma(... sigma(W_1 x))).
struct NetworkParams {
  int input_dim = 0;
  int depth = 0;
  int width = 0;
  std::vector<Eigen::MatrixXd> layers;  // W_1: m x d, W_p: m x m
  Eigen::VectorXd output;               // a, length m
  Activation activation = Activation::relu();

  void check_shapes() const {
    if (depth < 1 || static_cast<int>(layers.size()) != depth)
      throw ConfigError("network: layer count does not match depth");
    if (layers[0].rows() != width || layers[0].cols() != input_dim)
      throw ConfigError("network: first layer shape mismatch");
    for (int p = 1; p < depth; ++p)
      if (layers[static_cast<std::size_t>(p)].rows() != width ||
          layers[static_cast<std::size_t>(p)].cols() != width)
        throw ConfigError("network: hidden layer shape mismatch");
    if (output.size() != width) throw ConfigError("network: output vector mismatch");
  }

  double forward(const Eigen::VectorXd& x) const {
    if (x.size() != input_dim) throw ConfigError("forward: input dimension mismatch");
    Eigen::VectorXd v = layers[0] * x;
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = activation(v(i));
    for (int p = 1; p < depth; ++p) {
      v = layers[static_cast<std::size_t>(p)] * v;
      for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = activation(v(i));
    }
    return output.dot(v);
  }

  Eigen::VectorXd forward_rows(const Eigen::MatrixXd& xs) const {
    Eigen::VectorXd y(xs.rows());
    for (Eigen::Index i = 0; i < xs.rows(); ++i) y(i) = forward(xs.row(i).transpose());
    return y;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["input_dim"] = input_dim;
    j["depth"] = depth;
    j["width"] = width;
    j["activation"] = activation.to_json();
    nlohmann::json ls = nlohmann::json::array();
    for (const auto& W : layers) {
      std::vector<double> flat(W.data(), W.data() + W.size());
      ls.push_back({{"rows", W.rows()}, {"cols", W.cols()}, {"data", flat}});
    }
    j["layers"] = ls;
    j["output"] = std::vector<double>(output.data(), output.data() + output.size());
    return j;
  }

  static NetworkParams from_json(const nlohmann::json& j) {
    NetworkParams net;
    net.input_dim = j.at("input_dim").get<int>();
    net.depth = j.at("depth").get<int>();
    net.width = j.at("width").get<int>();
    net.activation = Activation::from_json(j.at("activation"));
    for (const auto& l : j.at("layers")) {
      const auto rows = l.at("rows").get<Eigen::Index>();
      const auto cols = l.at("cols").get<Eigen::Index>();
      const auto flat = l.at("data").get<std::vector<double>>();
      net.layers.push_back(
          Eigen::Map<const Eigen::MatrixXd>(flat.data(), rows, cols));
    }
    const auto out = j.at("output").get<std::vector<double>>();
    net.output = Eigen::Map<const Eigen::VectorXd>(out.data(),
                                                   static_cast<Eigen::Index>(out.size()));
    net.check_shapes();
    return net;
  }
};

// Teacher with Gaussian rows renormalized to the requested row norm, output
// vector renormalized to ||a||_1 <= 1 (nonnegative entries when asked).
inline NetworkParams random_teacher(int d, int depth, int width, Activation act,
                                    std::uint64_t seed, WeightNorm norm = WeightNorm::L1Rows,
                                    bool nonneg_output = false) {
  if (d < 1 || depth < 1 || width < 1)
    throw ConfigError("random_teacher: dimensions must be >= 1");
  CounterRng rng(seed, /*stream=*/0x7e0);
  NetworkParams net;
  net.input_dim = d;
  net.depth = depth;
  net.width = width;
  net.activation = act;

  auto make_layer = [&](Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd W(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) W(i, j) = rng.normal();
      if (norm == WeightNorm::L1Rows) {
        const double l1 = W.row(i).lpNorm<1>();
        if (l1 > 0) W.row(i) /= l1;
      } else {
        const double l2 = W.row(i).norm();
        if (l2 > 0) W.row(i) *= 1.0 / (std::sqrt(static_cast<double>(cols)) * l2);
      }
    }
    return W;
  };

  net.layers.push_back(make_layer(width, d));
  for (int p = 1; p < depth; ++p) net.layers.push_back(make_layer(width, width));

  net.output.resize(width);
  for (int i = 0; i < width; ++i) {
    double a = rng.normal();
    if (nonneg_output) a = std::abs(a);
    net.output(i) = a;
  }
  const double l1 = net.output.lpNorm<1>();
  if (l1 > 0) net.output /= l1;
  net.check_shapes();
  return net;
}

// Widen a network without changing the function it computes: existing rows
// are copied, new rows are zero and carry zero output weight.
inline NetworkParams embed_student(const NetworkParams& teacher, int new_width) {
  if (new_width < teacher.width)
    throw ConfigError("embed_student: width smaller than teacher");
  NetworkParams st = teacher;
  st.width = new_width;
  st.layers.clear();
  for (int p = 0; p < teacher.depth; ++p) {
    const auto& W = teacher.layers[static_cast<std::size_t>(p)];
    const Eigen::Index cols = (p == 0) ? teacher.input_dim : new_width;
    Eigen::MatrixXd We = Eigen::MatrixXd::Zero(new_width, cols);
    We.topLeftCorner(W.rows(), W.cols()) = W;
    st.layers.push_back(std::move(We));
  }
  st.output = Eigen::VectorXd::Zero(new_width);
  st.output.head(teacher.width) = teacher.output;
  st.check_shapes();
  return st;
}

// Shallow student with 2z extra units in cancelling +/- pairs sharing one
// direction v: the function is unchanged while ||a||_1 grows by 2 z nu.
inline NetworkParams cancellation_student(const NetworkParams& teacher, int pair_count,
                                          const Eigen::VectorXd& direction, double nu) {
  if (teacher.depth != 1) throw ConfigError("cancellation_student: teacher must be shallow");
  if (pair_count < 1) throw ConfigError("cancellation_student: need pair_count >= 1");
  if (!(nu > 0.0)) throw ConfigError("cancellation_student: need nu > 0");
  if (direction.size() != teacher.input_dim)
    throw ConfigError("cancellation_student: direction dimension mismatch");

  const int m = teacher.width;
  const int mh = m + 2 * pair_count;
  NetworkParams st = teacher;
  st.width = mh;
  st.layers.clear();
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(mh, teacher.input_dim);
  W.topRows(m) = teacher.layers[0];
  for (int j = m; j < mh; ++j) W.row(j) = direction.transpose();
  st.layers.push_back(std::move(W));
  st.output = Eigen::VectorXd::Zero(mh);
  st.output.head(m) = teacher.output;
  for (int j = m; j < mh; ++j) st.output(j) = (j % 2 == 0) ? nu : -nu;
  st.check_shapes();
  return st;
}

// Rescale every first-layer row of a shallow homogeneous network to
// ||W_j||_2 = 1/sqrt(d), pushing the scale into the output weights.
inline NetworkParams homogeneous_rescale(const NetworkParams& net, double kappa) {
  if (net.depth != 1) throw ConfigError("homogeneous_rescale: network must be shallow");
  if (net.activation.kind() == Activation::Kind::Sigmoid)
    throw ConfigError("homogeneous_rescale: activation not positive homogeneous");
  NetworkParams out = net;
  const double target = 1.0 / std::sqrt(static_cast<double>(net.input_dim));
  for (int j = 0; j < net.width; ++j) {
    const double n2 = net.layers[0].row(j).norm();
    if (n2 == 0.0) {
      out.output(j) = 0.0;
      continue;
    }
    const double theta = target / n2;
    out.layers[0].row(j) *= theta;
    out.output(j) *= std::pow(theta, -kappa);
  }
  return out;
}

}  // namespace polyreg
