#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "polyreg/data_io.hpp"
#include "polyreg/experiments.hpp"
#include "polyreg/imaging.hpp"
#include "polyreg/orthopoly.hpp"
#include "polyreg/tols.hpp"

namespace {

using nlohmann::json;

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw polyreg::IoError("cannot open file: " + path);
  json j;
  in >> j;
  return j;
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw polyreg::IoError("cannot write file: " + path);
  out << j.dump(2) << "\n";
}

polyreg::MeasureSpec measure_from_arg(const std::string& arg) {
  // inline JSON or a path to a JSON file
  if (!arg.empty() && arg.front() == '{')
    return polyreg::MeasureSpec::from_json(json::parse(arg));
  return polyreg::MeasureSpec::from_json(read_json_file(arg));
}

int run(int argc, char** argv) {
  CLI::App app{"polynomial regression over tensorized features"};
  app.require_subcommand(1);
  app.fallthrough();

  std::uint64_t seed = 1;
  int workers = 1;
  std::string out_path;
  std::string config_path;
  app.add_option("--seed", seed, "base random seed");
  app.add_option("--workers", workers, "worker thread count");
  app.add_option("--out", out_path, "output path");
  app.add_option("--config", config_path, "config file path");

  // tols fit / predict
  auto* tols = app.add_subcommand("tols", "fit or evaluate a tensorized OLS model");
  tols->fallthrough();
  tols->require_subcommand(1);

  std::string data_path, labels_path, model_path, measure_arg = R"({"kind":"uniform"})";
  int degree = 2;
  auto* fit_cmd = tols->add_subcommand("fit", "fit on a matrix dump of samples");
  fit_cmd->fallthrough();
  fit_cmd->add_option("--data", data_path, "sample matrix dump (N x d)")->required();
  fit_cmd->add_option("--labels", labels_path, "label matrix dump (N x 1)")->required();
  fit_cmd->add_option("--degree", degree, "total degree cap M");
  fit_cmd->add_option("--measure", measure_arg, "measure spec (inline JSON or file)");

  auto* predict_cmd = tols->add_subcommand("predict", "evaluate a fitted model");
  predict_cmd->fallthrough();
  predict_cmd->add_option("--model", model_path, "predictor JSON")->required();
  predict_cmd->add_option("--data", data_path, "sample matrix dump (N x d)")->required();

  // condnum
  auto* condnum = app.add_subcommand("condnum", "covariance eigenvalue bounds report");
  condnum->fallthrough();
  int cn_d = 2, cn_k = 1;
  bool cn_exact = false;
  condnum->add_option("--d", cn_d, "input dimension");
  condnum->add_option("--k", cn_k, "degree");
  condnum->add_option("--measure", measure_arg, "measure spec (inline JSON or file)");
  condnum->add_flag("--exact", cn_exact, "also compute exact eigenvalues");

  // experiment run <config>
  auto* experiment = app.add_subcommand("experiment", "run a configured experiment");
  experiment->fallthrough();
  std::string exp_config;
  auto* exp_run = experiment->add_subcommand("run", "run from a JSON config");
  exp_run->fallthrough();
  exp_run->add_option("config", exp_config, "experiment config file")->required();

  // mnist train / eval / noise
  auto* mnist = app.add_subcommand("mnist", "convolutional-feature image classification");
  mnist->fallthrough();
  mnist->require_subcommand(1);
  std::string train_images, train_labels, test_images, test_labels;
  int n_batches = 50;
  Eigen::Index batch_size = 1000;
  auto add_data_opts = [&](CLI::App* cmd, bool need_train, bool need_test) {
    if (need_train) {
      cmd->add_option("--train-images", train_images)->required();
      cmd->add_option("--train-labels", train_labels)->required();
    }
    if (need_test) {
      cmd->add_option("--test-images", test_images)->required();
      cmd->add_option("--test-labels", test_labels)->required();
    }
  };
  auto* mnist_train = mnist->add_subcommand("train", "train by batching and averaging");
  mnist_train->fallthrough();
  add_data_opts(mnist_train, true, false);
  mnist_train->add_option("--batches", n_batches, "number of batches");
  mnist_train->add_option("--batch-size", batch_size, "samples per batch");

  auto* mnist_eval = mnist->add_subcommand("eval", "evaluate a saved model");
  mnist_eval->fallthrough();
  add_data_opts(mnist_eval, false, true);
  mnist_eval->add_option("--model", model_path, "model coefficient dump")->required();

  auto* mnist_noise = mnist->add_subcommand("noise", "accuracy under corruption sweeps");
  mnist_noise->fallthrough();
  add_data_opts(mnist_noise, false, true);
  mnist_noise->add_option("--model", model_path, "model coefficient dump")->required();

  // dataset synth
  auto* dataset = app.add_subcommand("dataset", "dataset generation");
  dataset->fallthrough();
  std::string teacher_path;
  Eigen::Index synth_n = 100;
  auto* synth = dataset->add_subcommand("synth", "teacher-labelled synthetic dataset");
  synth->fallthrough();
  synth->add_option("--teacher", teacher_path, "teacher network JSON")->required();
  synth->add_option("--n", synth_n, "sample count");
  synth->add_option("--measure", measure_arg, "measure spec (inline JSON or file)");

  CLI11_PARSE(app, argc, argv);

  if (*fit_cmd) {
    const Eigen::MatrixXd xs = polyreg::load_matrix(data_path);
    const Eigen::MatrixXd ys = polyreg::load_matrix(labels_path);
    if (ys.cols() != 1 || ys.rows() != xs.rows())
      throw polyreg::ConfigError("labels must be N x 1 matching the data");
    const auto measure = measure_from_arg(measure_arg);
    auto set = polyreg::make_set(measure, static_cast<int>(xs.cols()), degree);
    const polyreg::DesignMatrix design(xs, set);
    const polyreg::Predictor p = polyreg::fit(design, ys.col(0));
    const json j = p.to_json();
    if (out_path.empty())
      std::cout << j.dump(2) << "\n";
    else
      write_json_file(out_path, j);
    return 0;
  }

  if (*predict_cmd) {
    const polyreg::Predictor p = polyreg::Predictor::from_json(read_json_file(model_path));
    const Eigen::MatrixXd xs = polyreg::load_matrix(data_path);
    const Eigen::VectorXd ys = p.predict_rows(xs);
    if (out_path.empty()) {
      for (Eigen::Index i = 0; i < ys.size(); ++i) std::cout << ys(i) << "\n";
    } else {
      polyreg::save_matrix(out_path, ys);
    }
    return 0;
  }

  if (*condnum) {
    const auto measure = measure_from_arg(measure_arg);
    const polyreg::EigenBounds b = polyreg::eigen_bounds(measure, cn_k, cn_d);
    json j = b.to_json();
    if (cn_exact) {
      const polyreg::CondNumberRow row = polyreg::cond_number_exact(measure, cn_d, cn_k);
      j["lambda_min_exact"] = row.lambda_min;
      j["lambda_max_exact"] = row.lambda_max;
      j["kappa_exact"] = row.kappa;
    }
    if (out_path.empty())
      std::cout << j.dump(2) << "\n";
    else
      write_json_file(out_path, j);
    return 0;
  }

  if (*exp_run) {
    auto cfg = polyreg::ExperimentConfig::from_json(read_json_file(exp_config));
    if (!out_path.empty()) cfg.out_dir = out_path;
    if (workers > 1) cfg.workers = workers;
    polyreg::run_experiment(cfg);
    return 0;
  }

  if (*mnist_train) {
    const auto train = polyreg::load_idx_dataset(train_images, train_labels);
    const auto r = polyreg::train_batched(train, n_batches, batch_size, seed);
    if (out_path.empty()) throw polyreg::ConfigError("mnist train needs --out");
    polyreg::save_matrix(out_path, r.final_classifier.coeffs());
    write_json_file(out_path + ".json",
                    {{"height", train.height},
                     {"width", train.width},
                     {"classes", train.classes},
                     {"window_half_extent", 2},
                     {"version", polyreg::kVersion}});
    return 0;
  }

  if (*mnist_eval || *mnist_noise) {
    const json meta = read_json_file(model_path + ".json");
    polyreg::ConvFeatureMap fmap(meta.at("height").get<int>(), meta.at("width").get<int>(),
                                 meta.at("window_half_extent").get<int>());
    const polyreg::StackedClassifier model(fmap, polyreg::load_matrix(model_path));
    const auto test = polyreg::load_idx_dataset(test_images, test_labels,
                                                meta.at("classes").get<int>());
    if (*mnist_eval) {
      std::cout << "test_accuracy," << model.accuracy(test) << "\n";
      return 0;
    }
    polyreg::ExperimentConfig cfg;
    cfg.kind = polyreg::ExperimentKind::NoiseRobustness;
    cfg.seed = seed;
    cfg.out_dir = out_path;
    if (!config_path.empty())
      cfg.params = read_json_file(config_path).value("params", json::object());
    const auto points = polyreg::run_noise(cfg, model, test);
    for (const auto& p : points)
      std::cout << p.kind << "," << p.level << "," << p.accuracy << "\n";
    return 0;
  }

  if (*synth) {
    if (out_path.empty()) throw polyreg::ConfigError("dataset synth needs --out");
    const auto measure = measure_from_arg(measure_arg);
    const auto teacher = polyreg::NetworkParams::from_json(read_json_file(teacher_path));
    const auto [xs, ys] = polyreg::synth_teacher_dataset(measure, teacher, synth_n, seed);
    polyreg::save_matrix(out_path + ".x", xs);
    polyreg::save_matrix(out_path + ".y", ys);
    write_json_file(out_path + ".json", {{"n", synth_n},
                                         {"d", teacher.input_dim},
                                         {"seed", seed},
                                         {"measure", measure.to_json()},
                                         {"version", polyreg::kVersion}});
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const polyreg::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const polyreg::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 3;
  } catch (const polyreg::BudgetError& e) {
    std::cerr << "budget exceeded: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
