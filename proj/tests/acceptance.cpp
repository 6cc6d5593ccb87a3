// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// asserted criterion fails.  Criterion 9 skips cleanly when no dataset files
// are present.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "polyreg/experiments.hpp"
#include "oracles.hpp"

using namespace polyreg;

namespace {

int failures = 0;

void report(int criterion, const std::string& name, bool pass,
            const std::string& detail = "") {
  std::cout << "criterion " << criterion << " [" << name << "]: "
            << (pass ? "PASS" : "FAIL");
  if (!detail.empty()) std::cout << " (" << detail << ")";
  std::cout << "\n";
  if (!pass) ++failures;
}

void skip(int criterion, const std::string& name, const std::string& detail) {
  std::cout << "criterion " << criterion << " [" << name << "]: SKIP (" << detail
            << ")\n";
}

const std::vector<MeasureSpec>& acceptance_measures() {
  static const std::vector<MeasureSpec> ms{
      MeasureSpec::rademacher(),
      MeasureSpec::discrete_uniform({-1.0, 0.0, 1.0}),
      MeasureSpec::discrete_weighted({-1.0, 1.0}, {0.3, 0.7}),
  };
  return ms;
}

// ---- criterion 1: orthogonal polynomial identities by exact enumeration ----

bool criterion_orthopoly(std::string& detail) {
  double worst = 0.0;
  for (const auto& spec : acceptance_measures()) {
    const OrthoBasis basis(spec, 4);
    const int K = basis.order();
    for (int n = 0; n <= K; ++n)
      if (!(basis.hankel(n) > 0.0)) return false;
    for (int i = 0; i <= K; ++i)
      for (int j = 0; j <= K; ++j)
        worst = std::max(worst,
                         std::abs(basis.gram(i, j) - (i == j ? 1.0 : 0.0)));
    for (int j = 0; j <= K; ++j) {
      for (int i = 0; i < j; ++i)
        worst = std::max(worst, std::abs(basis.moment_against(i, j)));
      const double expected =
          std::sqrt(basis.hankel(j) / (j == 0 ? 1.0 : basis.hankel(j - 1)));
      worst = std::max(worst, std::abs(basis.moment_against(j, j) - expected));
    }
  }
  std::ostringstream os;
  os << "max deviation " << worst;
  detail = os.str();
  return worst <= 1e-10;
}

// ---- criterion 2: Sigma = V D V^T, det(V) = 1, eigenvalue sandwich ----

bool criterion_sigma(std::string& detail) {
  double worst_recon = 0.0, worst_det = 0.0;
  for (const auto& spec : acceptance_measures()) {
    for (int d = 1; d <= 4; ++d) {
      for (int k = 1; k <= 3; ++k) {
        auto set = std::make_shared<const MultiplicitiesSet>(
            d, k, spec.support_cardinality(), Ordering::GradedDescending);
        const auto dec = decompose(spec, set);
        worst_recon = std::max(
            worst_recon, (dec.sigma - dec.reconstruct()).cwiseAbs().maxCoeff());
        double det = 1.0;
        for (Eigen::Index i = 0; i < dec.V.rows(); ++i) det *= dec.V(i, i);
        worst_det = std::max(worst_det, std::abs(det - 1.0));

        const auto row = cond_number_exact(spec, d, k);
        if (row.lambda_min < row.lambda_min_lb - 1e-9) return false;
        if (row.lambda_max > row.lambda_max_ub + 1e-9) return false;
        if (d == 4 && row.kappa > row.kappa_ub + 1e-6) return false;
      }
    }
  }
  std::ostringstream os;
  os << "max |Sigma - VDV^T| " << worst_recon << ", max |det(V)-1| " << worst_det;
  detail = os.str();
  return worst_recon <= 1e-9 && worst_det <= 1e-9;
}

// ---- criterion 3: exact learning of square-activation networks ----

bool criterion_exact_learning(std::string& detail) {
  double worst_pred = 0.0, worst_coeff = 0.0;
  const auto spec = MeasureSpec::continuous_uniform(-1.0, 1.0);
  for (const int depth : {1, 2}) {
    const int d = 3, width = 3;
    int M = 1;
    for (int l = 0; l < depth; ++l) M *= 2;
    auto set = std::make_shared<const MultiplicitiesSet>(d, M, std::nullopt);
    const Eigen::Index n = determined_sample_count(d, M);
    for (int s = 0; s < 20; ++s) {
      const std::uint64_t seed = 100 + static_cast<std::uint64_t>(s);
      const auto teacher = random_teacher(
          d, depth, width, Activation::polynomial({0.0, 0.0, 1.0}), seed);
      const Predictor p = fit_teacher_sample(spec, teacher, set, n, seed);

      const Eigen::MatrixXd fresh = spec.sample_matrix(1000, d, seed, 0xf00d);
      for (Eigen::Index i = 0; i < fresh.rows(); ++i) {
        const Eigen::VectorXd x = fresh.row(i).transpose();
        worst_pred =
            std::max(worst_pred, std::abs(p.predict(x) - teacher.forward(x)));
      }

      // independent oracle: symbolic expansion into monomial coefficients
      const auto expanded = oracles::expand_power_network(teacher, 2);
      Eigen::VectorXd oracle = Eigen::VectorXd::Zero(p.coeffs().size());
      for (const auto& [e, c] : expanded) {
        MultiIndex mi;
        mi.exponents = e;
        const auto pos = set->position(mi);
        if (!pos) return false;  // oracle found a monomial outside the set
        oracle(static_cast<Eigen::Index>(*pos)) = c;
      }
      worst_coeff = std::max(
          worst_coeff, (p.coeffs() - oracle).norm() / std::max(oracle.norm(), 1e-12));
    }
  }
  std::ostringstream os;
  os << "max fresh-point error " << worst_pred << ", max relative coeff error "
     << worst_coeff;
  detail = os.str();
  return worst_pred <= 1e-6 && worst_coeff <= 1e-6;
}

// ---- criterion 4: prime-power Vandermonde designs are invertible ----

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t p) {
  return static_cast<std::uint64_t>(
      static_cast<unsigned __int128>(a) * b % p);
}

std::uint64_t powmod(std::uint64_t base, std::uint64_t e, std::uint64_t p) {
  std::uint64_t r = 1 % p;
  base %= p;
  while (e) {
    if (e & 1) r = mulmod(r, base, p);
    base = mulmod(base, base, p);
    e >>= 1;
  }
  return r;
}

// determinant mod a prime by Gaussian elimination; nonzero mod p proves the
// integer determinant is nonzero
bool det_nonzero_mod(std::vector<std::vector<std::uint64_t>> a, std::uint64_t p) {
  const std::size_t n = a.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    while (pivot < n && a[pivot][col] == 0) ++pivot;
    if (pivot == n) return false;
    std::swap(a[pivot], a[col]);
    const std::uint64_t inv = powmod(a[col][col], p - 2, p);
    for (std::size_t r = col + 1; r < n; ++r) {
      if (a[r][col] == 0) continue;
      const std::uint64_t f = mulmod(a[r][col], inv, p);
      for (std::size_t c = col; c < n; ++c) {
        const std::uint64_t sub = mulmod(f, a[col][c], p);
        a[r][c] = (a[r][c] + p - sub) % p;
      }
    }
  }
  return true;
}

bool criterion_vandermonde(std::string& detail) {
  const std::uint64_t primes_list[] = {2, 3, 5};
  int checked = 0;
  for (int d = 1; d <= 3; ++d) {
    for (int M = 1; M <= 4; ++M) {
      const MultiplicitiesSet set(d, M, std::nullopt);
      const std::size_t n = set.size();
      // node for alpha is prod p_j^{alpha_j}; row i is nodes^i
      bool ok = false;
      for (const std::uint64_t p : {1000000007ull, 998244353ull}) {
        std::vector<std::uint64_t> nodes(n);
        for (std::size_t a = 0; a < n; ++a) {
          std::uint64_t node = 1;
          for (int j = 0; j < d; ++j)
            node = mulmod(node,
                          powmod(primes_list[j],
                                 static_cast<std::uint64_t>(set.exponent(a, j)), p),
                          p);
          nodes[a] = node;
        }
        std::vector<std::vector<std::uint64_t>> A(n,
                                                  std::vector<std::uint64_t>(n));
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t a = 0; a < n; ++a)
            A[i][a] = powmod(nodes[a], static_cast<std::uint64_t>(i), p);
        if (det_nonzero_mod(std::move(A), p)) {
          ok = true;
          break;
        }
      }
      if (!ok) {
        std::ostringstream os;
        os << "singular design at d=" << d << " M=" << M;
        detail = os.str();
        return false;
      }
      ++checked;
    }
  }
  std::ostringstream os;
  os << checked << " designs, |det| > 0 via modular elimination";
  detail = os.str();
  return true;
}

// ---- criterion 5: activation approximation orders ----

bool criterion_approx(std::string& detail) {
  const auto relu = approximate(Activation::relu(), 0.1);
  if (relu.degree() > 40 || relu.achieved_sup_error > 0.1) return false;
  for (int g = 0; g < kApproxGridSize; ++g) {
    const double x = -1.0 + 2.0 * g / (kApproxGridSize - 1);
    const double v = relu(x);
    if (v < 0.0 || v > 1.0) return false;
  }
  const auto sigmoid = approximate(Activation::sigmoid(), 0.01);
  if (sigmoid.degree() > 30 || sigmoid.achieved_sup_error > 0.01) return false;

  std::vector<int> relu_deg, sig_deg;
  for (const double eps : {0.4, 0.2, 0.1, 0.05}) {
    relu_deg.push_back(approximate(Activation::relu(), eps).degree());
    sig_deg.push_back(approximate(Activation::sigmoid(), eps).degree());
  }
  for (std::size_t i = 1; i < relu_deg.size(); ++i) {
    if (relu_deg[i] < relu_deg[i - 1]) return false;
    if (sig_deg[i] < sig_deg[i - 1]) return false;
  }
  // relu degree grows roughly linearly in 1/eps (8x budget over an 8x range);
  // sigmoid grows strictly slower
  if (relu_deg.back() > 8 * std::max(relu_deg.front(), 1)) return false;
  if (sig_deg.back() > relu_deg.back()) return false;

  std::ostringstream os;
  os << "relu(0.1) degree " << relu.degree() << ", sigmoid(0.01) degree "
     << sigmoid.degree();
  detail = os.str();
  return true;
}

// ---- criterion 6: generalization trend for an admissible relu teacher ----

bool criterion_generalize(std::string& detail) {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::GeneralizeAdmissible;
  cfg.seed = 1000;
  cfg.workers = 4;
  cfg.params = {{"d", 4},         {"depth", 1},
                {"width", 10},    {"epsilon", 0.05},
                {"n_seeds", 10},  {"n_test", 4000},
                {"sample_multipliers", {2.0, 8.0, 32.0}}};
  const auto report = run_generalize(cfg);
  std::ostringstream os;
  os << "median mse";
  for (const auto& pt : report.curve) os << " " << pt.median_mse << " (N=" << pt.n << ")";
  os << ", inversions " << report.inversions();
  detail = os.str();
  return report.inversions() <= 1 && report.curve.back().median_mse <= 0.05;
}

// ---- criterion 7: teacher/student width independence ----

bool criterion_teacher_student(std::string& detail) {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::TeacherStudent;
  cfg.seed = 2000;
  cfg.params = {{"d", 4},           {"width", 10},
                {"epsilon", 0.05},  {"n_fresh", 1000},
                {"n_test", 2000},   {"sample_multiplier", 32.0},
                {"width_factors", {1, 4, 16}}};
  const auto report = run_teacher_student(cfg);
  std::ostringstream os;
  os << "max prediction gap " << report.max_gap() << ", mse spread "
     << report.mse_spread();
  detail = os.str();
  return report.max_gap() <= 1e-10 && report.mse_spread() <= 1e-12;
}

// ---- criterion 8: covering event frequency ----

bool criterion_covering(std::string& detail) {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::CoveringEvent;
  cfg.seed = 3000;
  cfg.workers = 4;
  cfg.params = {{"d", 2}, {"n", 64}, {"trials", 200}};
  const auto report = run_covering_event(cfg);
  std::ostringstream os;
  os << "frequency " << report.frequency << " over " << report.trials
     << " trials at N=" << report.n << ", required >= 0.9 (tolerance 0.05)";
  detail = os.str();
  return report.frequency >= 0.9 - 0.05;
}

// ---- criterion 9: MNIST-scale pipeline (optional data) ----

std::string find_file(const std::string& dir, const std::string& stem) {
  for (const auto& suffix : {"", ".gz"}) {
    const std::string p = dir + "/" + stem + suffix;
    if (std::filesystem::exists(p)) return p;
  }
  return "";
}

bool criterion_mnist(std::string& detail, bool& skipped) {
  const ConvFeatureMap fmap(28, 28, 2);
  if (fmap.feature_count() != 18740) {
    detail = "feature count mismatch";
    return false;
  }

  std::string dir = "data";
  if (const char* env = std::getenv("POLYREG_MNIST_DIR")) dir = env;
  const std::string ti = find_file(dir, "train-images-idx3-ubyte");
  const std::string tl = find_file(dir, "train-labels-idx1-ubyte");
  const std::string ei = find_file(dir, "t10k-images-idx3-ubyte");
  const std::string el = find_file(dir, "t10k-labels-idx1-ubyte");
  if (ti.empty() || tl.empty() || ei.empty() || el.empty()) {
    skipped = true;
    detail = "dataset files absent under '" + dir +
             "'; feature count 18740 verified";
    return true;
  }

  const auto train = load_idx_dataset(ti, tl);
  const auto test = load_idx_dataset(ei, el);
  const auto r = train_batched(train, 50, 1000, 4000);
  const double acc = r.final_classifier.accuracy(test);

  // monotone-degradation sanity on a noise sweep
  ExperimentConfig ncfg;
  ncfg.seed = 4100;
  ncfg.params = {{"gaussian_sigmas", {0.0, 0.8}}, {"n_eval", 2000}};
  const auto points = run_noise(ncfg, r.final_classifier, test);
  const bool degrades = points.back().accuracy < points.front().accuracy;

  std::ostringstream os;
  os << "test accuracy " << acc << ", noise degradation "
     << points.front().accuracy << " -> " << points.back().accuracy;
  detail = os.str();
  return acc >= 0.929 && degrades;
}

// ---- criterion 10: solver properties ----

bool criterion_solver(std::string& detail) {
  std::mt19937 gen(99);
  std::normal_distribution<double> nd;
  double worst_orth = 0.0, worst_scale = 0.0, worst_perm = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::MatrixXd X(200, 50);
    Eigen::VectorXd y(200);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      for (Eigen::Index j = 0; j < X.cols(); ++j) X(i, j) = nd(gen);
      y(i) = nd(gen);
    }
    const Eigen::VectorXd c = min_norm_lsq(X, y);
    worst_orth = std::max(
        worst_orth,
        (X.transpose() * (y - X * c)).cwiseAbs().maxCoeff() / y.norm());

    const Eigen::VectorXd c2 = min_norm_lsq(X, (-1.75 * y).eval());
    worst_scale =
        std::max(worst_scale, (c2 + 1.75 * c).norm() / (1.75 * c.norm()));

    std::vector<int> perm(200);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), gen);
    Eigen::MatrixXd Xp(200, 50);
    Eigen::VectorXd yp(200);
    for (int i = 0; i < 200; ++i) {
      Xp.row(i) = X.row(perm[static_cast<std::size_t>(i)]);
      yp(i) = y(perm[static_cast<std::size_t>(i)]);
    }
    worst_perm =
        std::max(worst_perm, (min_norm_lsq(Xp, yp) - c).norm() / (1.0 + c.norm()));
  }
  std::ostringstream os;
  os << "orthogonality " << worst_orth << ", scale " << worst_scale
     << ", permutation " << worst_perm;
  detail = os.str();
  return worst_orth <= 1e-8 && worst_scale <= 1e-10 && worst_perm <= 1e-10;
}

}  // namespace

int main() {
  std::string detail;

  detail.clear();
  report(1, "orthogonal polynomial exactness", criterion_orthopoly(detail), detail);

  detail.clear();
  report(2, "sigma decomposition and eigenvalue sandwich", criterion_sigma(detail),
         detail);

  detail.clear();
  report(3, "exact learning of polynomial networks", criterion_exact_learning(detail),
         detail);

  detail.clear();
  report(4, "prime-power vandermonde invertibility", criterion_vandermonde(detail),
         detail);

  detail.clear();
  report(5, "activation approximation orders", criterion_approx(detail), detail);

  detail.clear();
  report(6, "admissible generalization trend", criterion_generalize(detail), detail);

  detail.clear();
  report(7, "teacher/student width independence", criterion_teacher_student(detail),
         detail);

  detail.clear();
  report(8, "covering event frequency", criterion_covering(detail), detail);

  detail.clear();
  bool skipped = false;
  const bool mnist_ok = criterion_mnist(detail, skipped);
  if (skipped)
    skip(9, "mnist pipeline", detail);
  else
    report(9, "mnist pipeline", mnist_ok, detail);

  detail.clear();
  report(10, "solver properties", criterion_solver(detail), detail);

  std::cout << (failures == 0 ? "all asserted criteria passed"
                              : "failures: " + std::to_string(failures))
            << "\n";
  return failures == 0 ? 0 : 1;
}
