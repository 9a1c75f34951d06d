// Release gate: reruns every built-in benchmark and the deterministic
// property checks, printing one verdict line per criterion. Exit status is
// the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rbfvmc/network.hpp"
#include "rbfvmc/optimizer.hpp"
#include "rbfvmc/oracle.hpp"
#include "rbfvmc/presets.hpp"
#include "rbfvmc/sampler.hpp"

using namespace rbfvmc;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void verdict(int index, const char* label, bool pass, const std::string& note) {
  std::printf("criterion %d (%s): %s%s%s\n", index, label, pass ? "PASS" : "FAIL",
              note.empty() ? "" : " - ", note.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

PresetReport run_and_print(const std::string& name, const fs::path& out_root) {
  const PresetReport report = run_preset(name, kDefaultPresetSeed, out_root / name);
  std::fputs(report.text.c_str(), stdout);
  std::fflush(stdout);
  return report;
}

// ---- criterion 6 helpers ------------------------------------------------

bool check_log_derivatives(std::string& note) {
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> amp(-2.0, 2.0);
  std::uniform_real_distribution<double> pos(0.0, 6.0);
  std::uniform_int_distribution<int> coord(0, 6);
  double worst = 0.0;
  for (ActivationKind kind : {ActivationKind::Gaussian, ActivationKind::ExpAbs}) {
    int checked = 0;
    while (checked < 100) {
      RbfNetwork net;
      net.hidden_count = 3;
      net.input_dim = 2;
      net.activation = kind;
      net.weights.resize(3);
      net.spreads.resize(3);
      net.centers.resize(3, 2);
      for (int i = 0; i < 3; ++i) {
        net.weights[i] = amp(rng);
        double b = amp(rng);
        while (std::abs(b) < 0.05) b = amp(rng);
        net.spreads[i] = b;
        net.centers(i, 0) = pos(rng);
        net.centers(i, 1) = pos(rng);
      }
      const Configuration n = {coord(rng), coord(rng)};
      if (std::abs(evaluate(net, n)) < 1e-3) continue;
      if (kind == ActivationKind::ExpAbs) {
        bool near_kink = false;
        for (int i = 0; i < 3; ++i) {
          const double dx = n[0] - net.centers(i, 0);
          const double dy = n[1] - net.centers(i, 1);
          if (std::sqrt(dx * dx + dy * dy) < 1e-2) near_kink = true;
        }
        if (near_kink) continue;
      }
      const Eigen::VectorXd o = log_derivatives(net, n);
      Eigen::VectorXd params = net.flatten();
      for (int k = 0; k < o.size(); ++k) {
        const double h = 1e-6 * std::max(1.0, std::abs(params[k]));
        RbfNetwork probe = net;
        Eigen::VectorXd shifted = params;
        shifted[k] += h;
        probe.unflatten(shifted);
        const double up = std::log(std::abs(evaluate(probe, n)));
        shifted[k] -= 2.0 * h;
        probe.unflatten(shifted);
        const double down = std::log(std::abs(evaluate(probe, n)));
        const double fd = (up - down) / (2.0 * h);
        worst = std::max(worst, std::abs(o[k] - fd) / std::max(1.0, std::abs(fd)));
      }
      ++checked;
    }
  }
  std::ostringstream s;
  s << "log-derivative fd rel dev " << worst;
  note = s.str();
  return worst <= 1e-5;
}

// Exact single-step proposal matrix of the reflecting +-1 kernel.
Eigen::MatrixXd proposal_matrix(const std::vector<int>& upper) {
  long size = 1;
  for (int ub : upper) size *= ub + 1;
  const auto unflatten = [&](long idx) {
    Configuration n(upper.size());
    for (std::size_t j = upper.size(); j-- > 0;) {
      n[j] = static_cast<int>(idx % (upper[j] + 1));
      idx /= upper[j] + 1;
    }
    return n;
  };
  const auto flatten = [&](const Configuration& n) {
    long idx = 0;
    for (std::size_t j = 0; j < upper.size(); ++j) idx = idx * (upper[j] + 1) + n[j];
    return idx;
  };
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(size, size);
  const double w = 1.0 / (2.0 * double(upper.size()));
  for (long i = 0; i < size; ++i) {
    const Configuration n = unflatten(i);
    for (std::size_t j = 0; j < upper.size(); ++j) {
      for (int step : {-1, 1}) {
        Configuration m = n;
        m[j] = std::clamp(m[j] + step, 0, upper[j]);
        t(i, flatten(m)) += w;
      }
    }
  }
  return t;
}

bool check_proposal_symmetry(std::string& note) {
  double worst = 0.0;
  for (const std::vector<int>& upper :
       {std::vector<int>{5}, std::vector<int>{2, 2}, std::vector<int>{3, 1}}) {
    const Eigen::MatrixXd t = proposal_matrix(upper);
    worst = std::max(worst, (t - t.transpose()).cwiseAbs().maxCoeff());
    worst = std::max(
        worst, (t.rowwise().sum() - Eigen::VectorXd::Ones(t.rows())).cwiseAbs().maxCoeff());
  }
  // The enumerated kernel is what propose_move draws from: verify that with
  // a long fixed-seed histogram on the 1D space.
  const std::vector<int> upper = {5};
  const Eigen::MatrixXd t = proposal_matrix(upper);
  std::mt19937_64 rng(123);
  const int draws = 200000;
  Eigen::MatrixXd hist = Eigen::MatrixXd::Zero(6, 6);
  for (int i = 0; i < 6; ++i) {
    for (int d = 0; d < draws; ++d) {
      const Configuration m = propose_move({i}, upper, rng);
      hist(i, m[0]) += 1.0;
    }
  }
  hist /= draws;
  const double sample_dev = (hist - t).cwiseAbs().maxCoeff();
  std::ostringstream s;
  s << "enumerated asymmetry " << worst << ", sampled kernel dev " << sample_dev;
  note = s.str();
  return worst <= 1e-15 && sample_dev < 0.01;
}

bool check_stationarity(std::string& note) {
  double worst_tv = 0.0;
  struct Case {
    ModelSpec model;
    RbfNetwork net;
  };
  std::vector<Case> cases;
  cases.push_back({ModelSpec{Ho1d{1.0, 6}}, init_random(5, 1, 6, 77)});
  cases.push_back({ModelSpec{Ho2d{1.0, 0.5, 4}}, init_random(5, 2, 4, 78)});
  for (const Case& c : cases) {
    const long size = basis_size(c.model);
    Eigen::VectorXd psi2(size);
    for (long i = 0; i < size; ++i) {
      const double a = evaluate(c.net, unflatten_index(c.model, i));
      psi2[i] = a * a;
    }
    psi2 /= psi2.sum();

    const Eigen::MatrixXd t = proposal_matrix(upper_bounds(c.model));
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(size, size);
    for (long i = 0; i < size; ++i) {
      double stay = 1.0;
      for (long j = 0; j < size; ++j) {
        if (i == j || t(i, j) == 0.0) continue;
        const double accept = std::min(1.0, psi2[j] / psi2[i]);
        p(i, j) = t(i, j) * accept;
        stay -= p(i, j);
      }
      p(i, i) = stay;
    }
    // Power iteration to the chain's stationary distribution.
    Eigen::RowVectorXd pi = Eigen::RowVectorXd::Constant(size, 1.0 / double(size));
    for (int sweep = 0; sweep < 20000; ++sweep) pi = pi * p;
    pi /= pi.sum();
    const double tv = 0.5 * (pi.transpose() - psi2).cwiseAbs().sum();
    worst_tv = std::max(worst_tv, tv);
  }
  std::ostringstream s;
  s << "stationary tv " << worst_tv;
  note = s.str();
  return worst_tv < 0.01;
}

bool check_hermiticity(std::string& note) {
  auto stored = std::make_shared<Eigen::MatrixXd>(5, 5);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) (*stored)(i, j) = 1.0 / (1.0 + i + j);
  }
  const ModelSpec models[] = {
      ModelSpec{Ho1d{1.5, 8}},        ModelSpec{Ho2d{4.0, 2.0, 8}},
      ModelSpec{ParticleBox{8.0, 8}}, ModelSpec{HermitianMatrix{8, nullptr}},
      ModelSpec{HermitianMatrix{5, stored}},
  };
  double worst = 0.0;
  for (const ModelSpec& model : models) {
    const long size = basis_size(model);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(size, size);
    for (long i = 0; i < size; ++i) {
      for (const RowEntry& entry : connected_row(model, unflatten_index(model, i))) {
        if (!in_range(model, entry.to)) return false;
        h(i, flat_index(model, entry.to)) = entry.element;
      }
    }
    worst = std::max(worst, (h - h.transpose()).cwiseAbs().maxCoeff());
  }
  std::ostringstream s;
  s << "row asymmetry " << worst;
  note = s.str();
  return worst <= 1e-12;
}

bool check_regularization(std::string& note) {
  SrConfig cfg;
  cfg.reg_init = 100.0;
  cfg.reg_decay = 0.9;
  cfg.reg_floor = 1e-4;
  double worst = 0.0;
  double expected = cfg.reg_init;
  for (int k = 0; k < 600; ++k) {
    const double got = regularization(k, cfg);
    worst = std::max(worst,
                     std::abs(got - std::max(expected, cfg.reg_floor)) /
                         std::max(expected, cfg.reg_floor));
    expected *= cfg.reg_decay;
  }
  std::ostringstream s;
  s << "schedule rel dev " << worst;
  note = s.str();
  return worst <= 1e-12;
}

bool check_sr_residual(std::string& note) {
  std::srand(99);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 4 + trial % 5;
    const Eigen::MatrixXd a = Eigen::MatrixXd::Random(n, n);
    SrSystem sys;
    sys.s = a * a.transpose() + 0.05 * Eigen::MatrixXd::Identity(n, n);
    sys.f = Eigen::VectorXd::Random(n);
    const SrSolution sol = solve_update(sys, 0.01 * trial, 0.05, 1e-12);
    worst = std::max(worst, sol.residual / std::max(1.0, sys.f.norm()));
  }
  std::ostringstream s;
  s << "solve residual " << worst;
  note = s.str();
  return worst < 1e-8;
}

bool check_oracle_residual(std::string& note) {
  const ModelSpec models[] = {
      ModelSpec{Ho1d{2.0, 20}},
      ModelSpec{Ho2d{4.0, 2.0, 8}},
      ModelSpec{ParticleBox{8.0, 20}},
      ModelSpec{HermitianMatrix{10, nullptr}},
  };
  double worst = 0.0;
  for (const ModelSpec& model : models) {
    const OracleResult r = dense_lowest_eig(model);
    const Eigen::MatrixXd h = dense_matrix(model);
    const double res = (h * r.eigenvector - r.energy * r.eigenvector).norm() /
                       std::max(1.0, std::abs(r.energy));
    worst = std::max(worst, res);
  }
  std::ostringstream s;
  s << "eigen residual " << worst;
  note = s.str();
  return worst < 1e-9;
}

// Every iteration of every benchmark run must respect the variational bound
// against the dense reference recorded alongside it.
bool check_variational_bound(const fs::path& out_root, std::string& note) {
  long rows_checked = 0;
  long violations = 0;
  long runs = 0;
  for (const auto& entry : fs::recursive_directory_iterator(out_root)) {
    if (!entry.is_regular_file() || entry.path().filename() != "summary.txt") continue;
    const fs::path dir = entry.path().parent_path();
    double reference = 0.0;
    bool have_reference = false;
    {
      std::ifstream in(entry.path());
      std::string key;
      while (in >> key) {
        if (key == "reference_energy") {
          in >> reference;
          have_reference = true;
        } else {
          std::string rest;
          std::getline(in, rest);
        }
      }
    }
    if (!have_reference) {
      note = "run without a dense reference: " + dir.string();
      return false;
    }
    std::ifstream csv(dir / "record.csv");
    if (!csv) {
      note = "missing record.csv in " + dir.string();
      return false;
    }
    ++runs;
    std::string line;
    std::getline(csv, line);  // header
    while (std::getline(csv, line)) {
      std::istringstream fields(line);
      std::string iter, energy, error;
      std::getline(fields, iter, ',');
      std::getline(fields, energy, ',');
      std::getline(fields, error, ',');
      const double e = std::stod(energy);
      const double err = std::stod(error);
      ++rows_checked;
      if (e < reference - 3.0 * err - 1e-12) ++violations;
    }
  }
  std::ostringstream s;
  s << runs << " runs, " << rows_checked << " estimates, " << violations
    << " bound violations";
  note = s.str();
  return runs > 0 && rows_checked > 0 && violations == 0;
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path out_root = argc > 1 ? argv[1] : "acceptance-runs";
  fs::create_directories(out_root);

  // 1: tilted-box energies at the published tolerance, under the time cap.
  const auto t0 = std::chrono::steady_clock::now();
  const PresetReport box = run_and_print("box", out_root);
  const double box_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  {
    std::ostringstream note;
    note << "runtime " << box_seconds << " s (cap 300)";
    verdict(1, "box energies", box.all_pass && box_seconds < 300.0, note.str());
  }

  // 2: generator-matrix eigenvalues and the d=10 eigenvector.
  const PresetReport matrix = run_and_print("matrix", out_root);
  verdict(2, "matrix eigenpairs", matrix.all_pass, "");

  // 3: 2D oscillator truncation trend, tail value pinned near -9.
  const PresetReport truncation = run_and_print("truncation", out_root);
  verdict(3, "truncation trend", truncation.all_pass, "");

  // 4: linear-field series against the completed-square values.
  const PresetReport efield = run_and_print("efield", out_root);
  verdict(4, "field series", efield.all_pass, "");

  // 5: per-component amplitudes at unit field.
  const PresetReport overlaps = run_and_print("overlaps", out_root);
  verdict(5, "unit-field amplitudes", overlaps.all_pass, "");

  // 6: deterministic property suite.
  {
    bool all = true;
    std::string notes;
    const struct {
      const char* name;
      bool (*check)(std::string&);
    } props[] = {
        {"log-derivatives", check_log_derivatives},
        {"proposal-symmetry", check_proposal_symmetry},
        {"stationarity", check_stationarity},
        {"hermiticity", check_hermiticity},
        {"regularization-schedule", check_regularization},
        {"sr-residual", check_sr_residual},
        {"oracle-residual", check_oracle_residual},
    };
    for (const auto& prop : props) {
      std::string note;
      const bool ok = prop.check(note);
      std::printf("  property %s: %s (%s)\n", prop.name, ok ? "ok" : "FAILED",
                  note.c_str());
      all = all && ok;
    }
    std::string note;
    const bool bound_ok = check_variational_bound(out_root, note);
    std::printf("  property variational-bound: %s (%s)\n",
                bound_ok ? "ok" : "FAILED", note.c_str());
    all = all && bound_ok;
    verdict(6, "property suite", all, "");
  }

  // 7: the dense oracle agrees with closed forms and the published column.
  {
    double worst_ho = 0.0;
    for (double field : {0.5, 1.0, 2.0}) {
      const double dense = dense_lowest_eig(ModelSpec{Ho1d{field, 60}}).energy;
      worst_ho = std::max(worst_ho, std::abs(dense - ho1d_energy(field)));
    }
    const double slopes[] = {0.0, 2.0, 4.0, 8.0, -8.0};
    const double refs[] = {4.93481, 5.92603, 6.89974, 8.79508, 0.795078};
    double worst_box = 0.0;
    for (int i = 0; i < 5; ++i) {
      const double dense =
          dense_lowest_eig(ModelSpec{ParticleBox{slopes[i], 200}}).energy;
      worst_box = std::max(worst_box, std::abs(dense - refs[i]) / std::abs(refs[i]));
    }
    std::ostringstream note;
    note << "oscillator dev " << worst_ho << " (tol 1e-6), box rel dev "
         << worst_box << " (tol 1e-5)";
    verdict(7, "oracle self-consistency", worst_ho <= 1e-6 && worst_box <= 1e-5,
            note.str());
  }

  std::printf("%s\n", failures == 0 ? "acceptance PASS" : "acceptance FAIL");
  return failures;
}
