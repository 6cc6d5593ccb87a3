#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "polyreg/approx.hpp"
#include "polyreg/data_io.hpp"
#include "polyreg/errors.hpp"
#include "polyreg/imaging.hpp"
#include "polyreg/measure.hpp"
#include "polyreg/multiindex.hpp"
#include "polyreg/network.hpp"
#include "polyreg/orthopoly.hpp"
#include "polyreg/tols.hpp"

namespace polyreg {

inline constexpr const char* kVersion = "polyreg-0.1.0";

enum class ExperimentKind {
  ExactPoly,
  GeneralizeAdmissible,
  TeacherStudent,
  SelfRegularization,
  CoveringEvent,
  CondNumber,
  MnistConv,
  NoiseRobustness,
};

inline ExperimentKind experiment_kind_from_string(const std::string& s) {
  if (s == "exact_poly") return ExperimentKind::ExactPoly;
  if (s == "generalize_admissible") return ExperimentKind::GeneralizeAdmissible;
  if (s == "teacher_student") return ExperimentKind::TeacherStudent;
  if (s == "self_regularization") return ExperimentKind::SelfRegularization;
  if (s == "covering_event") return ExperimentKind::CoveringEvent;
  if (s == "cond_number") return ExperimentKind::CondNumber;
  if (s == "mnist_conv") return ExperimentKind::MnistConv;
  if (s == "noise_robustness") return ExperimentKind::NoiseRobustness;
  throw ConfigError("unknown experiment kind: " + s);
}

inline std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::ExactPoly: return "exact_poly";
    case ExperimentKind::GeneralizeAdmissible: return "generalize_admissible";
    case ExperimentKind::TeacherStudent: return "teacher_student";
    case ExperimentKind::SelfRegularization: return "self_regularization";
    case ExperimentKind::CoveringEvent: return "covering_event";
    case ExperimentKind::CondNumber: return "cond_number";
    case ExperimentKind::MnistConv: return "mnist_conv";
    case ExperimentKind::NoiseRobustness: return "noise_robustness";
  }
  throw ConfigError("unknown experiment kind enum");
}

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::ExactPoly;
  std::uint64_t seed = 1;
  int workers = 1;
  std::string out_dir;
  MeasureSpec measure = MeasureSpec::continuous_uniform(-1.0, 1.0);
  nlohmann::json params;  // kind-specific knobs

  static ExperimentConfig from_json(const nlohmann::json& j) {
    ExperimentConfig cfg;
    cfg.kind = experiment_kind_from_string(j.at("kind").get<std::string>());
    cfg.seed = j.value("seed", std::uint64_t{1});
    cfg.workers = j.value("workers", 1);
    if (cfg.workers < 1) throw ConfigError("config: workers must be >= 1");
    cfg.out_dir = j.value("out_dir", std::string{});
    if (j.contains("measure")) cfg.measure = MeasureSpec::from_json(j.at("measure"));
    cfg.params = j.value("params", nlohmann::json::object());
    return cfg;
  }

  nlohmann::json to_json() const {
    return {{"kind", to_string(kind)}, {"seed", seed},       {"workers", workers},
            {"out_dir", out_dir},      {"measure", measure.to_json()},
            {"params", params},        {"version", kVersion}};
  }
};

namespace detail {

// Deterministic map over [0, n): each worker owns a strided slice of the index
// range, so aggregation order never depends on scheduling.
inline void parallel_for(int workers, std::size_t n,
                         const std::function<void(std::size_t)>& body) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  const auto k = static_cast<std::size_t>(std::min<int>(workers, static_cast<int>(n)));
  std::vector<std::thread> pool;
  pool.reserve(k);
  for (std::size_t w = 0; w < k; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += k) body(i);
    });
  for (auto& t : pool) t.join();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write file: " + path);
  out << text;
}

inline std::string csv_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace detail

// Every run directory gets the resolved config so the run can be replayed.
inline void write_run_snapshot(const ExperimentConfig& cfg) {
  if (cfg.out_dir.empty()) return;
  std::filesystem::create_directories(cfg.out_dir);
  detail::write_text(cfg.out_dir + "/config.json", cfg.to_json().dump(2) + "\n");
}

inline void write_csv(const std::string& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
  std::ostringstream os;
  for (std::size_t i = 0; i < header.size(); ++i)
    os << (i ? "," : "") << header[i];
  os << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      os << (i ? "," : "") << detail::csv_number(row[i]);
    os << "\n";
  }
  detail::write_text(path, os.str());
}

// Number of samples that makes the square-polynomial design exactly
// determined: sum of C(d+t-1, t) for t = 0..M.
inline Eigen::Index determined_sample_count(int d, int M) {
  double total = 0.0;
  double term = 1.0;  // C(d-1, 0)
  for (int t = 0; t <= M; ++t) {
    total += term;
    term *= static_cast<double>(d + t) / static_cast<double>(t + 1);
  }
  return static_cast<Eigen::Index>(std::llround(total));
}

inline std::shared_ptr<const MultiplicitiesSet> make_set(const MeasureSpec& measure,
                                                         int d, int M) {
  return std::make_shared<const MultiplicitiesSet>(d, M, measure.support_cardinality());
}

inline Predictor fit_teacher_sample(const MeasureSpec& measure, const NetworkParams& teacher,
                                    std::shared_ptr<const MultiplicitiesSet> set,
                                    Eigen::Index n, std::uint64_t seed) {
  const auto [xs, ys] = synth_teacher_dataset(measure, teacher, n, seed);
  const DesignMatrix design(xs, std::move(set));
  return fit(design, ys);
}

struct ExactPolyReport {
  std::vector<double> max_fresh_error;  // one entry per seed
  double student_max_gap = 0.0;         // teacher vs embedded student predictions

  double worst() const {
    return max_fresh_error.empty()
               ? 0.0
               : *std::max_element(max_fresh_error.begin(), max_fresh_error.end());
  }
};

// Square-polynomial teacher learned from an exactly determined sample; checks
// recovery on fresh points and that a zero-padded wider student is the same
// function.
inline ExactPolyReport run_exact_poly(const ExperimentConfig& cfg) {
  const int d = cfg.params.value("d", 3);
  const int k = cfg.params.value("k", 2);
  const int depth = cfg.params.value("depth", 1);
  const int width = cfg.params.value("width", 4);
  const int n_seeds = cfg.params.value("n_seeds", 20);
  const int n_fresh = cfg.params.value("n_fresh", 1000);
  const int student_factor = cfg.params.value("student_width_factor", 4);
  if (k != 2) throw ConfigError("exact_poly: only the square activation is wired up");
  if (cfg.measure.discrete())
    throw ConfigError("exact_poly: needs a continuous measure");

  int M = 1;
  for (int l = 0; l < depth; ++l) M *= k;
  auto set = make_set(cfg.measure, d, M);
  const Eigen::Index n = determined_sample_count(d, M);

  ExactPolyReport report;
  report.max_fresh_error.assign(static_cast<std::size_t>(n_seeds), 0.0);
  std::vector<double> student_gap(static_cast<std::size_t>(n_seeds), 0.0);

  detail::parallel_for(cfg.workers, static_cast<std::size_t>(n_seeds), [&](std::size_t s) {
    const std::uint64_t seed = cfg.seed + s;
    const Activation square = Activation::polynomial({0.0, 0.0, 1.0});
    const NetworkParams teacher = random_teacher(d, depth, width, square, seed);
    const Predictor p = fit_teacher_sample(cfg.measure, teacher, set, n, seed);

    const Eigen::MatrixXd fresh = cfg.measure.sample_matrix(n_fresh, d, seed, 0x0f5e);
    const NetworkParams student = embed_student(teacher, width * student_factor);
    double worst = 0.0, gap = 0.0;
    for (Eigen::Index i = 0; i < fresh.rows(); ++i) {
      const Eigen::VectorXd x = fresh.row(i).transpose();
      const double truth = teacher.forward(x);
      worst = std::max(worst, std::abs(p.predict(x) - truth));
      gap = std::max(gap, std::abs(student.forward(x) - truth));
    }
    report.max_fresh_error[s] = worst;
    student_gap[s] = gap;
  });
  report.student_max_gap = *std::max_element(student_gap.begin(), student_gap.end());

  if (!cfg.out_dir.empty()) {
    write_run_snapshot(cfg);
    std::vector<std::vector<double>> rows;
    for (std::size_t s = 0; s < report.max_fresh_error.size(); ++s)
      rows.push_back({static_cast<double>(cfg.seed + s), report.max_fresh_error[s]});
    write_csv(cfg.out_dir + "/exact_poly.csv", {"seed", "max_fresh_error"}, rows);
  }
  return report;
}

struct LearningCurvePoint {
  Eigen::Index n = 0;
  double median_mse = 0.0;
  std::vector<double> per_seed_mse;
};

struct GeneralizeReport {
  int tensor_degree = 0;
  std::size_t n_features = 0;
  std::vector<LearningCurvePoint> curve;

  int inversions() const {
    int inv = 0;
    for (std::size_t i = 1; i < curve.size(); ++i)
      if (curve[i].median_mse > curve[i - 1].median_mse) ++inv;
    return inv;
  }
};

inline double median(std::vector<double> v) {
  if (v.empty()) throw ConfigError("median: empty");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return (v.size() % 2) ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// Learning curve of T-OLS against a fixed-architecture random teacher; the
// tensor degree comes from the activation approximation schedule at the
// requested accuracy.
inline GeneralizeReport run_generalize(const ExperimentConfig& cfg) {
  const int d = cfg.params.value("d", 4);
  const int depth = cfg.params.value("depth", 1);
  const int width = cfg.params.value("width", 10);
  const double epsilon = cfg.params.value("epsilon", 0.05);
  const int n_seeds = cfg.params.value("n_seeds", 10);
  const int n_test = cfg.params.value("n_test", 2000);
  const auto multipliers =
      cfg.params.value("sample_multipliers", std::vector<double>{2.0, 8.0, 32.0});
  const std::string act_name = cfg.params.value("activation", std::string{"relu"});
  const Activation act =
      act_name == "sigmoid" ? Activation::sigmoid() : Activation::relu();

  const DegreeSchedule sched = degree_schedule(act, depth, epsilon);
  const int M = static_cast<int>(sched.tensor_degree);
  auto set = make_set(cfg.measure, d, M);

  GeneralizeReport report;
  report.tensor_degree = M;
  report.n_features = set->size();

  for (double mult : multipliers) {
    LearningCurvePoint pt;
    pt.n = static_cast<Eigen::Index>(
        std::llround(mult * static_cast<double>(set->size())));
    pt.per_seed_mse.assign(static_cast<std::size_t>(n_seeds), 0.0);
    detail::parallel_for(cfg.workers, static_cast<std::size_t>(n_seeds), [&](std::size_t s) {
      const std::uint64_t seed = cfg.seed + s;
      const NetworkParams teacher = random_teacher(d, depth, width, act, seed);
      const Predictor p = fit_teacher_sample(cfg.measure, teacher, set, pt.n, seed);
      pt.per_seed_mse[s] =
          mse(p, [&](const Eigen::VectorXd& x) { return teacher.forward(x); },
              cfg.measure, n_test, seed)
              .first;
    });
    pt.median_mse = median(pt.per_seed_mse);
    report.curve.push_back(std::move(pt));
  }

  if (!cfg.out_dir.empty()) {
    write_run_snapshot(cfg);
    std::vector<std::vector<double>> rows;
    for (const auto& pt : report.curve)
      rows.push_back({static_cast<double>(pt.n), pt.median_mse});
    write_csv(cfg.out_dir + "/learning_curve.csv", {"n", "median_mse"}, rows);
  }
  return report;
}

struct TeacherStudentReport {
  std::vector<int> widths;
  std::vector<double> max_prediction_gap;  // student vs teacher on fresh points
  std::vector<double> mse_values;          // T-OLS mse against each network

  double max_gap() const {
    return max_prediction_gap.empty()
               ? 0.0
               : *std::max_element(max_prediction_gap.begin(), max_prediction_gap.end());
  }
  double mse_spread() const {
    if (mse_values.empty()) return 0.0;
    const auto [lo, hi] = std::minmax_element(mse_values.begin(), mse_values.end());
    return *hi - *lo;
  }
};

// Embedded students compute the same function, so the fitted estimator and its
// error are width-independent by construction; this run verifies the symmetry
// numerically.
inline TeacherStudentReport run_teacher_student(const ExperimentConfig& cfg) {
  const int d = cfg.params.value("d", 4);
  const int width = cfg.params.value("width", 10);
  const double epsilon = cfg.params.value("epsilon", 0.05);
  const int n_fresh = cfg.params.value("n_fresh", 1000);
  const int n_test = cfg.params.value("n_test", 2000);
  const double n_mult = cfg.params.value("sample_multiplier", 32.0);
  const auto factors = cfg.params.value("width_factors", std::vector<int>{1, 4, 16});

  const Activation act = Activation::relu();
  const DegreeSchedule sched = degree_schedule(act, 1, epsilon);
  auto set = make_set(cfg.measure, d, static_cast<int>(sched.tensor_degree));
  const auto n = static_cast<Eigen::Index>(
      std::llround(n_mult * static_cast<double>(set->size())));

  const NetworkParams teacher = random_teacher(d, 1, width, act, cfg.seed);
  const Predictor p = fit_teacher_sample(cfg.measure, teacher, set, n, cfg.seed);
  const Eigen::MatrixXd fresh = cfg.measure.sample_matrix(n_fresh, d, cfg.seed, 0x0f5e);

  TeacherStudentReport report;
  for (int f : factors) {
    const NetworkParams student = embed_student(teacher, width * f);
    double gap = 0.0;
    for (Eigen::Index i = 0; i < fresh.rows(); ++i) {
      const Eigen::VectorXd x = fresh.row(i).transpose();
      gap = std::max(gap, std::abs(student.forward(x) - teacher.forward(x)));
    }
    report.widths.push_back(width * f);
    report.max_prediction_gap.push_back(gap);
    report.mse_values.push_back(
        mse(p, [&](const Eigen::VectorXd& x) { return student.forward(x); },
            cfg.measure, n_test, cfg.seed)
            .first);
  }

  if (!cfg.out_dir.empty()) {
    write_run_snapshot(cfg);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < report.widths.size(); ++i)
      rows.push_back({static_cast<double>(report.widths[i]),
                      report.max_prediction_gap[i], report.mse_values[i]});
    write_csv(cfg.out_dir + "/teacher_student.csv",
              {"student_width", "max_prediction_gap", "mse"}, rows);
  }
  return report;
}

// True when every signed standard-basis vector has a sample within 1/(4d).
inline bool covering_event(const Eigen::MatrixXd& xs) {
  const Eigen::Index d = xs.cols();
  const double radius = 1.0 / (4.0 * static_cast<double>(d));
  for (Eigen::Index i = 0; i < d; ++i) {
    for (double sign : {1.0, -1.0}) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(d);
      e(i) = sign;
      bool hit = false;
      for (Eigen::Index r = 0; r < xs.rows() && !hit; ++r)
        hit = (xs.row(r).transpose() - e).norm() <= radius;
      if (!hit) return false;
    }
  }
  return true;
}

struct CoveringReport {
  Eigen::Index n = 0;
  int trials = 0;
  double frequency = 0.0;
};

inline CoveringReport run_covering_event(const ExperimentConfig& cfg) {
  const int d = cfg.params.value("d", 2);
  const int trials = cfg.params.value("trials", 200);
  const Eigen::Index n = cfg.params.value(
      "n", static_cast<Eigen::Index>(std::ceil(
               std::exp(3.0 * d * std::log(static_cast<double>(d))))));
  if (cfg.measure.discrete())
    throw ConfigError("covering_event: needs a continuous measure");

  std::vector<int> hits(static_cast<std::size_t>(trials), 0);
  detail::parallel_for(cfg.workers, static_cast<std::size_t>(trials), [&](std::size_t t) {
    const Eigen::MatrixXd xs = cfg.measure.sample_matrix(n, d, cfg.seed + t, 0xc0e);
    hits[t] = covering_event(xs) ? 1 : 0;
  });

  CoveringReport report;
  report.n = n;
  report.trials = trials;
  report.frequency = std::accumulate(hits.begin(), hits.end(), 0) /
                     static_cast<double>(trials);
  if (!cfg.out_dir.empty()) {
    write_run_snapshot(cfg);
    write_csv(cfg.out_dir + "/covering.csv", {"d", "n", "trials", "frequency"},
              {{static_cast<double>(d), static_cast<double>(n),
                static_cast<double>(trials), report.frequency}});
  }
  return report;
}

struct L1BoundCase {
  std::string label;
  double ratio = 0.0;  // ||a_student||_1 / ||a_teacher||_1
  double bound = 0.0;  // d^{kappa+1} 2^{kappa+1}
  bool within = false;
};

struct SelfRegularizationReport {
  CoveringReport covering;
  std::vector<L1BoundCase> cases;
};

// Covering-event frequency plus the output-weight inequality on constructed
// interpolants.  The signed cancellation student sits outside the
// nonnegative-output hypothesis and is recorded as the counterexample.
inline SelfRegularizationReport run_self_regularization(const ExperimentConfig& cfg) {
  const int d = cfg.params.value("d", 2);
  const double kappa = cfg.params.value("kappa", 1.0);
  const int width = cfg.params.value("width", 5);
  const int cancel_pairs = cfg.params.value("cancel_pairs", 8);
  const double nu = cfg.params.value("nu", 4.0);

  SelfRegularizationReport report;
  report.covering = run_covering_event(cfg);

  const double bound = std::pow(static_cast<double>(d), kappa + 1.0) *
                       std::pow(2.0, kappa + 1.0);
  const NetworkParams teacher =
      random_teacher(d, 1, width, Activation::relu(), cfg.seed, WeightNorm::L1Rows,
                     /*nonneg_output=*/true);
  const double base_l1 = teacher.output.lpNorm<1>();

  auto add_case = [&](const std::string& label, const NetworkParams& net) {
    L1BoundCase c;
    c.label = label;
    c.ratio = net.output.lpNorm<1>() / base_l1;
    c.bound = bound;
    c.within = c.ratio <= bound;
    report.cases.push_back(c);
  };
  add_case("embedded", embed_student(teacher, 4 * width));
  add_case("rescaled", homogeneous_rescale(teacher, kappa));
  Eigen::VectorXd dir = Eigen::VectorXd::Zero(d);
  dir(0) = 1.0;
  add_case("cancellation", cancellation_student(teacher, cancel_pairs, dir, nu));

  if (!cfg.out_dir.empty()) {
    write_run_snapshot(cfg);
    std::ostringstream os;
    os << "case,l1_ratio,bound,within\n";
    for (const auto& c : report.cases)
      os << c.label << "," << detail::csv_number(c.ratio) << ","
         << detail::csv_number(c.bound) << "," << (c.within ? 1 : 0) << "\n";
    detail::write_text(cfg.out_dir + "/l1_bounds.csv", os.str());
  }
  return report;
}

inline std::vector<CondNumberRow> run_condnumber(const ExperimentConfig& cfg) {
  const auto ds = cfg.params.value("d_values", std::vector<int>{1, 2, 3, 4});
  const auto ks = cfg.params.value("k_values", std::vector<int>{1, 2, 3});
  std::vector<CondNumberRow> rows;
  for (int d : ds)
    for (int k : ks) rows.push_back(cond_number_exact(cfg.measure, d, k));

  if (!cfg.out_dir.empty()) {
    write_run_snapshot(cfg);
    std::vector<std::vector<double>> out;
    for (const auto& r : rows)
      out.push_back({static_cast<double>(r.d), static_cast<double>(r.k), r.lambda_min,
                     r.lambda_min_lb, r.lambda_max, r.lambda_max_ub, r.kappa,
                     r.kappa_ub});
    write_csv(cfg.out_dir + "/condnum.csv",
              {"d", "k", "lambda_min", "lb", "lambda_max", "ub", "kappa", "ub"}, out);
  }
  return rows;
}

struct MnistReport {
  double test_accuracy = 0.0;
  std::vector<double> accuracy_curve;  // cumulative-average accuracy per batch
};

inline MnistReport run_mnist(const ExperimentConfig& cfg) {
  const auto train_images = cfg.params.at("train_images").get<std::string>();
  const auto train_labels = cfg.params.at("train_labels").get<std::string>();
  const auto test_images = cfg.params.at("test_images").get<std::string>();
  const auto test_labels = cfg.params.at("test_labels").get<std::string>();
  const int n_batches = cfg.params.value("n_batches", 50);
  const Eigen::Index batch_size = cfg.params.value("batch_size", Eigen::Index{1000});
  const bool curve = cfg.params.value("accuracy_curve", false);
  const int curve_stride = cfg.params.value("curve_stride", 10);

  const ImageDataset train = load_idx_dataset(train_images, train_labels);
  const ImageDataset test = load_idx_dataset(test_images, test_labels);

  const BatchTrainResult r =
      train_batched(train, n_batches, batch_size, cfg.seed, 2, curve);

  MnistReport report;
  report.test_accuracy = r.final_classifier.accuracy(test);
  if (curve) {
    for (std::size_t b = 0; b < r.cumulative_average.size(); ++b) {
      if ((b + 1) % static_cast<std::size_t>(curve_stride) != 0 &&
          b + 1 != r.cumulative_average.size())
        continue;
      StackedClassifier c(r.final_classifier.features(), r.cumulative_average[b]);
      report.accuracy_curve.push_back(c.accuracy(test));
    }
  }

  if (!cfg.out_dir.empty()) {
    write_run_snapshot(cfg);
    std::vector<std::vector<double>> rows{{report.test_accuracy}};
    write_csv(cfg.out_dir + "/accuracy.csv", {"test_accuracy"}, rows);
    if (curve) {
      std::vector<std::vector<double>> crows;
      for (std::size_t i = 0; i < report.accuracy_curve.size(); ++i)
        crows.push_back({static_cast<double>(i), report.accuracy_curve[i]});
      write_csv(cfg.out_dir + "/accuracy_curve.csv", {"checkpoint", "accuracy"}, crows);
    }
  }
  return report;
}

struct NoisePoint {
  std::string kind;  // "gaussian" or "patch"
  double level = 0.0;
  double accuracy = 0.0;
};

inline std::vector<NoisePoint> run_noise(const ExperimentConfig& cfg,
                                         const StackedClassifier& model,
                                         const ImageDataset& test) {
  const auto sigmas = cfg.params.value(
      "gaussian_sigmas", std::vector<double>{0.0, 0.1, 0.2, 0.4, 0.8});
  const auto areas = cfg.params.value("patch_areas", std::vector<double>{});
  const Eigen::Index n_eval =
      std::min<Eigen::Index>(test.size(), cfg.params.value("n_eval", Eigen::Index{2000}));

  std::vector<NoisePoint> points;
  auto eval = [&](const std::string& kind, double level,
                  const std::function<Eigen::VectorXd(const Eigen::VectorXd&, std::uint64_t)>&
                      corrupt) {
    Eigen::Index hits = 0;
    for (Eigen::Index i = 0; i < n_eval; ++i) {
      const Eigen::VectorXd img = corrupt(test.images.row(i).transpose(),
                                          cfg.seed + static_cast<std::uint64_t>(i));
      if (model.classify(img).first == test.labels[static_cast<std::size_t>(i)]) ++hits;
    }
    points.push_back({kind, level, static_cast<double>(hits) / n_eval});
  };

  for (double s : sigmas)
    eval("gaussian", s, [&](const Eigen::VectorXd& img, std::uint64_t seed) {
      return gaussian_noise(img, s, seed);
    });
  for (double a : areas)
    eval("patch", a, [&](const Eigen::VectorXd& img, std::uint64_t seed) {
      return patch_noise(img, test.height, test.width, a, seed);
    });

  if (!cfg.out_dir.empty()) {
    write_run_snapshot(cfg);
    std::ostringstream os;
    os << "kind,level,accuracy\n";
    for (const auto& p : points)
      os << p.kind << "," << detail::csv_number(p.level) << ","
         << detail::csv_number(p.accuracy) << "\n";
    detail::write_text(cfg.out_dir + "/noise.csv", os.str());
  }
  return points;
}

inline void run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.kind) {
    case ExperimentKind::ExactPoly:
      run_exact_poly(cfg);
      return;
    case ExperimentKind::GeneralizeAdmissible:
      run_generalize(cfg);
      return;
    case ExperimentKind::TeacherStudent:
      run_teacher_student(cfg);
      return;
    case ExperimentKind::SelfRegularization:
      run_self_regularization(cfg);
      return;
    case ExperimentKind::CoveringEvent:
      run_covering_event(cfg);
      return;
    case ExperimentKind::CondNumber:
      run_condnumber(cfg);
      return;
    case ExperimentKind::MnistConv: {
      run_mnist(cfg);
      return;
    }
    case ExperimentKind::NoiseRobustness: {
      ExperimentConfig train_cfg = cfg;
      train_cfg.out_dir.clear();
      const auto train_images = cfg.params.at("train_images").get<std::string>();
      const auto train_labels = cfg.params.at("train_labels").get<std::string>();
      const auto test_images = cfg.params.at("test_images").get<std::string>();
      const auto test_labels = cfg.params.at("test_labels").get<std::string>();
      const ImageDataset train = load_idx_dataset(train_images, train_labels);
      const ImageDataset test = load_idx_dataset(test_images, test_labels);
      const BatchTrainResult r =
          train_batched(train, cfg.params.value("n_batches", 50),
                        cfg.params.value("batch_size", Eigen::Index{1000}), cfg.seed);
      run_noise(cfg, r.final_classifier, test);
      return;
    }
  }
  throw ConfigError("unknown experiment kind enum");
}

}  // namespace polyreg
