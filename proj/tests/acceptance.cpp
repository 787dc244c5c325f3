// Acceptance suite: one line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "rankshape/cli.hpp"
#include "rankshape/collapse_sim.hpp"
#include "rankshape/error.hpp"
#include "rankshape/eval_stats.hpp"
#include "rankshape/reward_shaping.hpp"
#include "rankshape/soe_geometry.hpp"
#include "rankshape/spectral_core.hpp"
#include "rankshape/trajectory_io.hpp"

using namespace rankshape;
using testing::random_matrix;
using testing::random_orthogonal;

namespace {

struct Outcome {
  bool pass = true;
  std::string note;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) note = what;
    pass = pass && ok;
  }
};

int failures = 0;

void criterion(const char* name, double budget_seconds, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.pass = false;
    o.note = std::string("exception: ") + e.what();
  }
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (budget_seconds > 0 && elapsed > budget_seconds) {
    o.require(false, "runtime " + std::to_string(elapsed) + " s over budget");
  }
  if (!o.pass) ++failures;
  std::printf("[%s] %-28s %7.2f s%s%s\n", o.pass ? "PASS" : "FAIL", name, elapsed, o.note.empty() ? "" : "  ",
              o.note.c_str());
  std::fflush(stdout);
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)}); }

Outcome spectral_oracle_suite() {
  Outcome o;
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> size(4, 64);
  std::uniform_real_distribution<double> scale(0.1, 10.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int t = size(rng), d = size(rng);
    const Eigen::MatrixXd m = random_matrix(rng, t, d);
    const Trajectory h(m);
    const Spectrum gram = covariance_spectrum(h, SpectrumPath::kGram);
    const Spectrum cov = covariance_spectrum(h, SpectrumPath::kCovariance);
    const auto oracle = testing::explicit_covariance_eigenvalues(m);
    const double top = oracle.front();
    for (std::size_t i = 0; i < gram.size(); ++i) {
      o.require(std::abs(gram.eigenvalues()[i] - cov.eigenvalues()[i]) <= 1e-8 * top, "gram vs covariance");
      o.require(std::abs(gram.eigenvalues()[i] - std::max(0.0, oracle[i])) <= 1e-8 * top || gram.eigenvalues()[i] == 0.0,
                "gram vs explicit covariance");
    }
    const double e = effective_rank(cov);
    const Eigen::MatrixXd q = random_orthogonal(rng, d);
    o.require(rel_diff(effective_rank(covariance_spectrum(Trajectory(m * q))), e) <= 1e-8, "rotation invariance");
    o.require(rel_diff(effective_rank(covariance_spectrum(Trajectory(scale(rng) * m))), e) <= 1e-8, "scale invariance");
    o.require(e >= 1.0 - 1e-12 && e <= static_cast<double>(cov.nonzero_count()) + 1e-9, "erank bounds");
  }
  return o;
}

Outcome hand_spectral_values() {
  Outcome o;
  o.require(std::abs(effective_rank(Spectrum::from_eigenvalues(Eigen::Vector3d(0.5, 0.25, 0.25))) - 2.828427) <= 1e-5, "(0.5,0.25,0.25)");
  for (int k = 1; k <= 64; ++k) {
    Eigen::VectorXd ev = Eigen::VectorXd::Zero(80);
    ev.head(k).setConstant(1.0 / k);
    o.require(std::abs(effective_rank(Spectrum::from_eigenvalues(ev)) - k) <= 1e-9, "uniform k=" + std::to_string(k));
  }
  return o;
}

Outcome passk_exactness() {
  Outcome o;
  for (int n = 1; n <= 12; ++n) {
    for (int c = 0; c <= n; ++c) {
      for (int k = 1; k <= n; ++k) {
        o.require(std::abs(pass_at_k(n, c, k) - testing::pass_at_k_by_enumeration(n, c, k)) <= 1e-12, "enumeration");
      }
    }
  }
  const long ks[] = {1, 4, 8, 16, 32, 64};
  for (long c = 0; c <= 64; ++c) {
    o.require(pass_at_k(64, c, 1) == static_cast<double>(c) / 64.0, "pass@1 = c/64");
    for (int i = 1; i < 6; ++i) o.require(pass_at_k(64, c, ks[i]) >= pass_at_k(64, c, ks[i - 1]), "monotone in k");
  }
  return o;
}

Outcome omega_correctness() {
  Outcome o;
  const double eps = kDefaultOmegaEps;
  ManifoldBasis b;
  b.mean = Eigen::VectorXd::Zero(2);
  b.directions = Eigen::MatrixXd::Identity(2, 1);
  o.require(std::abs(orthogonality_score(Eigen::Vector2d(1, 0), b, eps)) <= 1e-10, "in-span");
  o.require(std::abs(orthogonality_score(Eigen::Vector2d(0, 1), b, eps) - 1.0 / (1.0 + eps)) <= 1e-10, "orthogonal");
  o.require(std::abs(orthogonality_score(Eigen::Vector2d(1, 1) / std::sqrt(2.0), b, eps) - 0.7071) <= 1e-4, "45 degrees");
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index d = 3 + trial % 14, k = 1 + trial % (d - 1);
    ManifoldBasis r;
    r.directions = random_orthogonal(rng, d).leftCols(k);
    r.mean = random_matrix(rng, d, 1).col(0);
    const Eigen::VectorXd z = random_matrix(rng, d, 1).col(0);
    const Eigen::VectorXd x = z - r.mean;
    const double omega = orthogonality_score(z, r, eps);
    // Residual norm recovered from Omega against the parallel part computed directly.
    const double perp = omega * (x.norm() + eps);
    const double par = (r.directions.transpose() * x).norm();
    o.require(std::abs(par * par + perp * perp - x.squaredNorm()) <= 1e-9 * std::max(1.0, x.squaredNorm()), "Pythagoras");
  }
  return o;
}

Outcome advantage_contract() {
  Outcome o;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.5);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> r(8);
    for (auto& x : r) x = trial % 10 == 0 ? std::floor(u(rng)) : u(rng);
    double m = 0, v = 0;
    for (const double x : r) m += x;
    m /= 8;
    for (const double x : r) v += (x - m) * (x - m);
    const double sigma = std::sqrt(v / 8);
    const auto a = group_advantages(r);
    double am = 0, av = 0;
    for (const double x : a) am += x;
    am /= 8;
    for (const double x : a) av += (x - am) * (x - am);
    if (sigma > 1e-6) {
      o.require(std::abs(am) <= 1e-9, "mean");
      o.require(std::abs(std::sqrt(av / 8) - 1.0) <= 1e-9, "population std");
    }
  }
  const std::vector<double> equal(8, 0.75);
  for (const double x : group_advantages(equal)) o.require(x == 0.0, "all-equal group");
  return o;
}

std::vector<DecouplingSample> logistic_data(std::uint64_t seed, int n) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<DecouplingSample> out;
  for (int i = 0; i < n; ++i) {
    const double zr = normal(rng), ze = normal(rng);
    out.push_back({zr, ze, u(rng) < 1.0 / (1.0 + std::exp(-0.56 * zr))});
  }
  return out;
}

Outcome logistic_recovery() {
  Outcome o;
  int good = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const LogitFit f = fit_decoupling_logit(logistic_data(seed, 5000));
    if (std::abs(f.beta_r - 0.56) <= 0.10 && f.p_values[1] < 1e-3 && f.p_values[2] > 0.05) ++good;
  }
  o.require(good >= 4, std::to_string(good) + "/5 seeds recovered");
  return o;
}

Outcome gradient_check() {
  Outcome o;
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> vocab(2, 8), horizon(1, 4);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 20; ++trial) {
    const int v = vocab(rng), t = horizon(rng);
    PolicyParams p;
    p.logits = random_matrix(rng, v, 1).col(0);
    p.scale = 1.0 + 0.1 * trial;
    std::uniform_int_distribution<int> tok(0, v - 1);
    std::vector<std::vector<int>> seqs(4);
    std::vector<double> adv(4);
    for (int g = 0; g < 4; ++g) {
      for (int s = 0; s < t; ++s) seqs[g].push_back(tok(rng));
      adv[g] = normal(rng);
    }
    const auto f = [&](const Eigen::VectorXd& theta) {
      double acc = 0;
      for (int g = 0; g < 4; ++g) {
        for (const int a : seqs[g]) acc += adv[g] * testing::log_softmax_at(theta, p.scale, a);
      }
      return acc / 4;
    };
    const Eigen::VectorXd analytic = grpo_policy_gradient(p, seqs, adv);
    const Eigen::VectorXd numeric = testing::finite_difference(f, p.logits, 1e-5);
    o.require((analytic - numeric).norm() <= 1e-4 * std::max(numeric.norm(), 1e-8), "trial " + std::to_string(trial));
  }
  return o;
}

struct PairedRun {
  SimTrace plain;
  SimTrace shaped;
};

const EnvSpec& default_env() {
  static const EnvSpec env = build_env({});
  return env;
}

const std::vector<PairedRun>& paired_runs() {
  static const std::vector<PairedRun> runs = [] {
    std::vector<PairedRun> out;
    const EnvSpec& env = default_env();
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      TrainConfig cfg;
      cfg.seed = seed;
      cfg.alpha = 0.0;
      SimTrace plain = train(env, biased_policy(env), cfg);
      cfg.alpha = 0.5;
      out.push_back({std::move(plain), train(env, biased_policy(env), cfg)});
    }
    return out;
  }();
  return runs;
}

Outcome collapse_phenomenon() {
  Outcome o;
  int wins = 0;
  std::ostringstream detail;
  for (const auto& run : paired_runs()) {
    const double p0 = run.plain.records.front().mean_windowed_erank;
    const double p1 = run.plain.records.back().mean_windowed_erank;
    const double s1 = run.shaped.records.back().mean_windowed_erank;
    o.require(p1 < p0, "alpha=0 run did not collapse");
    if (s1 > p1) ++wins;
    char buf[96];
    std::snprintf(buf, sizeof buf, " %.2f->%.2f|%.2f", p0, p1, s1);
    detail << buf;
  }
  o.require(wins >= 4, std::to_string(wins) + "/5 pairs");
  if (o.pass) o.note = "erank alpha0 start->end|alpha0.5 end:" + detail.str();
  return o;
}

Outcome boundary_expansion() {
  Outcome o;
  int wins = 0;
  std::ostringstream detail;
  const EnvSpec& env = default_env();
  std::uint64_t pair = 0;
  for (const auto& run : paired_runs()) {
    const std::uint64_t seed = derive_seed(1000 + pair++, 0x6576616c);
    const PolicyEvaluation plain = evaluate_policy(run.plain.final_policy, env, 64, seed);
    const PolicyEvaluation shaped = evaluate_policy(run.shaped.final_policy, env, 64, seed);
    const double p = pass_at_k(64, plain.successes, 16);
    const double s = pass_at_k(64, shaped.successes, 16);
    if (s >= p) ++wins;
    detail << " " << plain.successes << "|" << shaped.successes;
  }
  o.require(wins >= 4, std::to_string(wins) + "/5 pairs");
  if (o.pass) o.note = "successes/64 alpha0|alpha0.5:" + detail.str();
  return o;
}

Outcome temperature_sweep_check() {
  Outcome o;
  const EnvSpec& env = default_env();
  const std::vector<double> scales{1, 2, 4, 8};
  const auto sweep = temperature_sweep(biased_policy(env), env, scales, 500, 8);
  std::ostringstream detail;
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    if (i > 0) {
      const double tol = 2.0 * std::hypot(sweep[i].std_error, sweep[i - 1].std_error);
      o.require(sweep[i].mean_erank <= sweep[i - 1].mean_erank + tol, "increase at scale " + std::to_string(scales[i]));
    }
    char buf[48];
    std::snprintf(buf, sizeof buf, " %.3f", sweep[i].mean_erank);
    detail << buf;
  }
  if (o.pass) o.note = "mean erank:" + detail.str();
  return o;
}

int cli_exit(std::vector<std::string> args, std::string* err_out = nullptr) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  if (err_out) *err_out = err.str();
  return code;
}

Outcome format_round_trip() {
  Outcome o;
  std::mt19937_64 rng(50);
  std::uniform_int_distribution<int> dim(1, 64);
  std::normal_distribution<float> normal(0.0f, 5.0f);
  const auto dir = std::filesystem::temp_directory_path() / "rankshape_acceptance";
  std::filesystem::create_directories(dir);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::MatrixXd m(dim(rng), dim(rng));
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
    const auto path = dir / ("rt" + std::to_string(trial) + ".hstb");
    write_trajectory(path, Trajectory(m));
    const Trajectory back = read_trajectory(path);
    o.require(back.rows() == m.rows() && back.dim() == m.cols() &&
                  std::memcmp(back.values().data(), m.data(), sizeof(double) * m.size()) == 0,
              "round trip " + std::to_string(trial));
  }

  const auto write = [&](const std::string& name, const std::string& content) {
    std::ofstream(dir / name, std::ios::binary) << content;
    return (dir / name).string();
  };
  const std::string good = encode_hstb(Trajectory(Eigen::MatrixXd::Identity(3, 2)));
  std::string bad_version = good;
  bad_version[4] = 9;
  const struct {
    std::vector<std::string> args;
    int code;
    const char* id;
  } cases[] = {
      {{"effrank", write("bad.hstb", "XSTB" + good.substr(4))}, 1, "bad_magic"},
      {{"effrank", write("short.hstb", good.substr(0, good.size() - 1))}, 1, "truncated_payload"},
      {{"effrank", write("version.hstb", bad_version)}, 1, "unsupported_version"},
      {{"effrank", write("nan.csv", "1,2\n3,nan\n")}, 1, "non_finite_value"},
      {{"effrank", write("ragged.csv", "1,2\n3\n")}, 1, "dimension_mismatch"},
      {{"effrank", write("flat.csv", "1,2\n1,2\n1,2\n")}, 2, "degenerate_spectrum"},
      {{"passk", "--n", "4", "--ks", "5", write("counts.csv", "2\n")}, 1, "range"},
      {{"advantage", write("one.csv", "1\n")}, 1, "group_too_small"},
      {{"simulate", "--set", "bogus=1", "--out", dir.string()}, 1, "unknown_config_key"},
      {{"fit-decouple", write("labels.csv", [] {
          std::string s = "eff_rank,entropy,correct\n";
          for (int i = 0; i < 25; ++i) s += std::to_string(i) + "," + std::to_string(i % 3) + ",0\n";
          return s;
        }())},
       2, "degenerate_labels"},
      {{"soe-select", "--basis", write("same.csv", "1,1\n1,1\n"), "--probes", write("p.csv", "1,0\n")}, 2,
       "zero_variance_lookahead"},
      {{"nonsense"}, 1, "usage"},
  };
  for (const auto& c : cases) {
    std::string err;
    const int code = cli_exit(c.args, &err);
    const bool single_line = !err.empty() && err.find('\n') == err.size() - 1;
    o.require(code == c.code && single_line && err.find(std::string("\"error\":\"") + c.id + "\"") != std::string::npos,
              std::string("cli error path ") + c.id);
  }
  std::filesystem::remove_all(dir);
  return o;
}

}  // namespace

int main() {
  criterion("spectral oracle suite", 10, spectral_oracle_suite);
  criterion("hand spectral values", 0, hand_spectral_values);
  criterion("pass@k exactness", 5, passk_exactness);
  criterion("orthogonality score", 0, omega_correctness);
  criterion("advantage contract", 0, advantage_contract);
  criterion("logistic recovery", 30, logistic_recovery);
  criterion("policy gradient check", 0, gradient_check);
  criterion("rank collapse", 120, collapse_phenomenon);
  criterion("boundary expansion", 0, boundary_expansion);
  criterion("temperature sweep", 0, temperature_sweep_check);
  criterion("format round trip", 0, format_round_trip);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
