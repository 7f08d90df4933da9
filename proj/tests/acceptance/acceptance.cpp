/*
 * Copyright (c) 2026, the sclopt authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Acceptance gate: one PASS/FAIL line per criterion.

#include "sclopt/cli.hpp"
#include "sclopt/sclopt.hpp"
#include "support/desk.hpp"
#include "support/oracles.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace sclopt;
namespace st = sclopt::testing;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct NamedOracle {
  std::string name;
  std::shared_ptr<const SmoothOracle> f;
};

std::vector<NamedOracle> derivative_oracles() {
  std::mt19937_64 rng(11);
  Matrix A = st::random_spd(5, rng);
  Vector b = Vector::NullaryExpr(5, [&]() { return std::normal_distribution<double>()(rng); });
  return {{"logistic", logistic_oracle(synth_logistic_data(20, 5, 3))},
          {"logistic+bias", logistic_oracle(synth_logistic_data(20, 5, 4, true))},
          {"multinomial", multinomial_oracle(synth_multinomial_data(10, 4, 3, 5))},
          {"expsum", expsum_oracle(synth_gp_data(4, 6, 6))},
          {"quadratic", quadratic_oracle(A, b)}};
}

// 1. Gradient and Hessian-vector products against central differences.
Outcome criterion_derivatives() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  for (const auto& [name, f] : derivative_oracles()) {
    std::mt19937_64 rng(101);
    double worst_g = 0, worst_h = 0;
    for (int i = 0; i < 100; ++i) {
      const Vector x = sample_ball(Vector::Zero(f->dimension()), 2.0, rng);
      const Vector v = sample_sphere(f->dimension(), rng);
      const Vector g = f->gradient(x);
      const Vector g_fd = st::fd_gradient([&](const Vector& y) { return f->value(y); }, x);
      worst_g = std::max(worst_g, (g - g_fd).norm() / std::max(g.norm(), 1e-6));
      const Vector hv = f->hess_vec(x, v);
      const Vector hv_fd = st::fd_directional([&](const Vector& y) { return f->gradient(y); }, x, v);
      worst_h = std::max(worst_h, (hv - hv_fd).norm() / std::max(hv.norm(), 1e-6));
    }
    o.detail << ' ' << name << "(grad " << worst_g << ", hv " << worst_h << ")";
    o.require(worst_g <= 1e-6, name + " gradient");
    o.require(worst_h <= 1e-5, name + " hess_vec");
  }
  const double secs = seconds_since(t0);
  o.detail << " time " << secs << "s";
  o.require(secs < 10.0, "runtime");
  return o;
}

// 2. Sample and pair-bound checks at the stated constants, 500 samples each.
Outcome criterion_scl() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(12);
  Matrix A = st::random_spd(8, rng);
  const std::vector<NamedOracle> oracles = {
      {"logistic", logistic_oracle(synth_logistic_data(50, 10, 21, true))},
      {"multinomial", multinomial_oracle(synth_multinomial_data(20, 5, 3, 22))},
      {"expsum", expsum_oracle(synth_gp_data(10, 8, 23))},
      {"quadratic", quadratic_oracle(A, Vector::Zero(8))}};
  for (const auto& [name, f] : oracles) {
    SclSampling s;
    s.samples = 500;
    const SclSuiteReport rep = verify_scl(*f, s, 1e-8);
    o.detail << ' ' << name << "(M_f " << f->scl_constant() << ", def " << rep.definition.violations << '/'
             << rep.definition.samples << ", pairs " << rep.pair_bounds.violations << '/' << rep.pair_bounds.samples;
    if (!rep.clean()) o.detail << ", empirical M_f " << estimate_Mf(*f, 500, s);
    o.detail << ")";
    o.require(rep.definition.violations == 0 && rep.definition.skipped == 0, name + " definition");
    o.require(rep.pair_bounds.violations == 0 && rep.pair_bounds.skipped == 0, name + " pair bounds");
  }
  const double secs = seconds_since(t0);
  o.detail << " time " << secs << "s";
  o.require(secs < 60.0, "runtime");
  return o;
}

// 3. Every accepted proximal-gradient step realizes its guaranteed decrease.
Outcome criterion_descent() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  int steps = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const ProblemInstance p = st::desk_logistic(seed);
    SolverOptions opts;
    opts.epsilon = 1e-8;
    const SolveResult res = prox_gradient_solve(p, Vector::Zero(p.dimension()), opts);
    o.require(res.converged, "seed " + std::to_string(seed) + " converged");
    const auto& rec = res.trace.records;
    for (std::size_t k = 0; k + 1 < rec.size(); ++k) {
      const double slack = 1e-10 * (1.0 + std::abs(rec[k].F_value));
      o.require(rec[k + 1].F_value <= rec[k].F_value - rec[k].predicted_decrease + slack,
                "decrease at seed " + std::to_string(seed) + " k " + std::to_string(k));
      o.require(rec[k + 1].F_value <= rec[k].F_value + slack, "monotone");
      ++steps;
    }
  }
  const double secs = seconds_since(t0);
  o.detail << " accepted steps " << steps << ", time " << secs << "s";
  o.require(secs < 30.0, "runtime");
  return o;
}

double psi_k(const StepQuantities& q, double tau) { return worst_case_decrement(q, tau); }

// 4. alpha maximizes the worst-case decrement; the boundary gives alpha = 1.
Outcome criterion_step_optimality() {
  Outcome o;
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  int checked = 0;
  double worst_boundary = 0;
  for (int i = 0; i < 1000; ++i) {
    StepQuantities q;
    q.lambda = std::exp(std::log(0.1) + unif(rng) * std::log(100.0));
    q.r = std::exp(std::log(1e-3) + unif(rng) * std::log(5e3));
    const double beta_max = std::sqrt(std::expm1(q.r) / q.r) * q.lambda;
    q.beta = beta_max * (0.05 + 0.95 * unif(rng));
    const StepResult s = analytic_step(q);
    o.require(s.condition_holds, "condition holds by construction");
    const double a = s.alpha;
    const double center = psi_k(q, a);
    if (a - 1e-4 > 0) o.require(center >= psi_k(q, a - 1e-4), "left neighbour");
    o.require(center >= psi_k(q, a + 1e-4), "right neighbour");
    ++checked;

    StepQuantities b = q;
    b.beta = beta_max;
    worst_boundary = std::max(worst_boundary, std::abs(analytic_step(b).alpha - 1.0));
  }
  o.detail << " triples " << checked << ", boundary |alpha - 1| max " << worst_boundary;
  o.require(worst_boundary <= 1e-12, "boundary alpha");
  return o;
}

struct NewtonRun {
  SolveResult res;
  double F_star = 0;
};

std::vector<NewtonRun>& newton_runs() {
  static std::vector<NewtonRun> runs = [] {
    std::vector<NewtonRun> out;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const ProblemInstance p = st::desk_logistic(seed);
      SolverOptions opts;
      opts.epsilon = 1e-10;
      NewtonRun r;
      r.res = prox_newton_solve(p, Vector::Zero(p.dimension()), opts);
      const SolveResult ref = st::reference_solve(p);
      r.F_star = objective_value(p, ref.x);
      out.push_back(std::move(r));
    }
    return out;
  }();
  return runs;
}

// 5. Quadratic tail of the proximal-Newton decrement once lambda <= sigma.
Outcome criterion_newton_tail() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < newton_runs().size(); ++i) {
    const SolveResult& res = newton_runs()[i].res;
    const auto& rec = res.trace.records;
    std::size_t first = rec.size();
    for (std::size_t k = 0; k < rec.size(); ++k)
      if (rec[k].lambda <= res.sigma) {
        first = k;
        break;
      }
    o.require(res.converged, "converged");
    o.require(first < rec.size(), "reached lambda <= sigma");
    if (first == rec.size()) continue;
    const std::size_t further = rec.size() - 1 - first;
    std::vector<double> xs, ys;
    for (std::size_t k = first; k + 1 < rec.size(); ++k)
      if (rec[k].lambda > 0 && rec[k + 1].lambda > 0) {
        xs.push_back(std::log(rec[k].lambda));
        ys.push_back(std::log(rec[k + 1].lambda));
      }
    o.detail << " run" << i + 1 << "(sigma " << res.sigma << ", further " << further << ", pairs " << xs.size();
    if (xs.size() >= 2) {
      const double slope = least_squares_line(xs, ys).slope;
      o.detail << ", exponent " << slope;
      o.require(slope >= 1.7 && slope <= 2.3, "exponent in [1.7, 2.3]");
    } else {
      o.require(false, "two or more decrement pairs for the fit");
    }
    o.detail << ")";
    o.require(further <= 6, "at most 6 further iterations");
    o.require(rec.back().lambda <= 1e-10, "final lambda");
  }
  const double secs = seconds_since(t0);
  o.detail << " time " << secs << "s";
  o.require(secs < 30.0, "runtime");
  return o;
}

// 6. Damped iterations never exceed floor((F(x0) - F*) / psi(sigma)).
Outcome criterion_damped_bound() {
  Outcome o;
  for (std::size_t i = 0; i < newton_runs().size(); ++i) {
    const auto& run = newton_runs()[i];
    const auto& rec = run.res.trace.records;
    long long damped = 0;
    for (std::size_t k = 0; k + 1 < rec.size(); ++k) damped += rec[k].lambda > run.res.sigma ? 1 : 0;
    const double gap0 = std::max(0.0, rec.front().F_value - run.F_star);
    const long long cap = damped_phase_cap(run.res.sigma, gap0);
    o.detail << " run" << i + 1 << "(damped " << damped << " <= " << cap << ")";
    o.require(damped <= cap, "damped-phase cap");
  }
  return o;
}

// 7. Linear tail of the proximal-gradient objective gap.
Outcome criterion_linear_tail() {
  Outcome o;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const ProblemInstance p = st::desk_logistic(seed);
    SolverOptions opts;
    opts.epsilon = 1e-10;
    opts.record_iterates = true;
    const SolveResult res = prox_gradient_solve(p, Vector::Zero(p.dimension()), opts);
    const SolveResult ref = st::reference_solve(p);
    const RateDiagnostics d = rate_diagnostics(p, ref.x, res.trace, res.trace.back().metric_scale);
    const Vector ev = st::dense_eigenvalues(p.oracle().hess_dense(ref.x));
    const double kappa = ev.maxCoeff() / ev.minCoeff();
    o.detail << " s" << seed << "(slope " << d.tail_slope << ", R2 " << d.tail_r2 << ", kappa_r "
             << d.restricted_kappa << " <= " << kappa << ")";
    o.require(d.available, "diagnostics available (" + d.reason + ")");
    o.require(d.tail_slope < 0.0, "negative slope");
    o.require(d.tail_r2 >= 0.98, "R^2 >= 0.98");
    o.require(d.restricted_kappa <= kappa + 1e-6, "restricted kappa <= kappa");
  }
  return o;
}

// 8. Non-expansiveness of the scaled proximal operator.
Outcome criterion_nonexpansive() {
  Outcome o;
  std::mt19937_64 rng(18);
  std::uniform_int_distribution<int> dim(1, 10), kind(0, 2);
  std::normal_distribution<double> normal;
  double worst = -1e300;
  for (int i = 0; i < 1000; ++i) {
    const Index n = dim(rng);
    const Metric H = Metric::dense(st::random_spd(n, rng, 0.05));
    std::shared_ptr<NonsmoothTerm> g;
    switch (kind(rng)) {
      case 0:
        g = std::make_shared<ZeroTerm>();
        break;
      case 1:
        g = std::make_shared<L1Norm>(n, 0.5 * std::abs(normal(rng)) + 0.05);
        break;
      default: {
        const Vector lo = Vector::NullaryExpr(n, [&]() { return -std::abs(normal(rng)); });
        g = std::make_shared<BoxIndicator>(lo, lo + Vector::NullaryExpr(n, [&]() { return std::abs(normal(rng)); }));
      }
    }
    const Vector u = 2.0 * Vector::NullaryExpr(n, [&]() { return normal(rng); });
    const Vector v = 2.0 * Vector::NullaryExpr(n, [&]() { return normal(rng); });
    const Vector pu = scaled_prox(*g, H, u, 1e-13).z, pv = scaled_prox(*g, H, v, 1e-13).z;
    const double lhs = H.norm(pu - pv), rhs = H.dual_norm(u - v);
    worst = std::max(worst, lhs - rhs);
    o.require(lhs <= rhs + 1e-8, "instance " + std::to_string(i));
  }
  o.detail << " 1000 instances, max(lhs - rhs) " << worst;
  return o;
}

// 9. Geometric program solved without any Lipschitz input.
Outcome criterion_gp() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const ProblemInstance p = synth_gp_instance(50, 30, 2026);
  SolverOptions opts;
  opts.epsilon = 1e-9;
  const SolveResult res = prox_gradient_solve(p, Vector::Zero(50), opts);
  const double secs = seconds_since(t0);
  const double resid = fixed_point_residual(p, res.x, Metric::identity(50));
  o.detail << " iterations " << res.iterations << ", residual " << resid << ", time " << secs << "s";
  o.require(res.converged, "converged");
  o.require(resid <= 1e-8, "residual <= 1e-8");
  o.require(secs < 10.0, "runtime");
  return o;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string strip_seconds(const std::string& jsonl) {
  std::istringstream in(jsonl);
  std::string line, out;
  while (std::getline(in, line)) {
    auto j = nlohmann::json::parse(line);
    j.erase("seconds");
    out += j.dump() + "\n";
  }
  return out;
}

std::string strip_trace_seconds(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    if (cells.size() > 10) cells.erase(cells.begin() + 10);
    for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + cells[i];
    out += '\n';
  }
  return out;
}

// 10. Profile hand example, LIBSVM round trips, CLI determinism.
Outcome criterion_io(const std::filesystem::path& data_dir) {
  Outcome o;
  ProfileTable t;
  t.times = Matrix(1, 2);
  t.times << 2.0, 4.0;
  t.solver_names = {"a", "b"};
  t.problem_names = {"p"};
  const PerformanceProfile prof = performance_profile(t, {0.0, 1.0});
  o.require(prof.rho(0, 0) == 1.0 && prof.rho(0, 1) == 0.0 && prof.rho(1, 0) == 1.0 && prof.rho(1, 1) == 1.0,
            "2x2 hand example");

  int fixtures = 0;
  for (const auto& entry : std::filesystem::directory_iterator(data_dir)) {
    if (entry.path().extension() != ".libsvm") continue;
    ++fixtures;
    const std::string once = serialize_libsvm(load_libsvm(entry.path().string()));
    const std::string twice = serialize_libsvm(parse_libsvm(once));
    o.require(once == twice, "round trip " + entry.path().filename().string());
    o.require(parse_libsvm(once) == load_libsvm(entry.path().string()), "reparse " + entry.path().filename().string());
  }
  o.require(fixtures > 0, "fixtures present");

  const auto tmp = std::filesystem::temp_directory_path() / "sclopt_acceptance_cli";
  std::filesystem::remove_all(tmp);
  std::ostringstream sink;
  std::string record[2], trace[2];
  for (int i = 0; i < 2; ++i) {
    const auto dir = tmp / std::to_string(i);
    const int code = run_command({"solve", "--synthetic", "logistic", "--seed", "7", "--solver", "prox-bfgs", "--eps",
                                  "1e-8", "--out", dir.string()},
                                 sink, sink);
    o.require(code == 0, "cli solve exit code");
    record[i] = strip_seconds(read_file(dir / "record.jsonl"));
    trace[i] = strip_trace_seconds(read_file(dir / "trace.csv"));
  }
  o.require(!record[0].empty() && record[0] == record[1], "deterministic record");
  o.require(!trace[0].empty() && trace[0] == trace[1], "deterministic trace");
  std::filesystem::remove_all(tmp);
  o.detail << " profile hand example, " << fixtures << " LIBSVM fixtures, CLI determinism";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::filesystem::path data_dir = argc > 1 ? argv[1] : "tests/data";
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"derivative correctness", criterion_derivatives},
      {"SCL certification", criterion_scl},
      {"analytic-step descent", criterion_descent},
      {"step-size optimality", criterion_step_optimality},
      {"prox-Newton quadratic tail", criterion_newton_tail},
      {"damped-phase bound", criterion_damped_bound},
      {"prox-gradient linear tail", criterion_linear_tail},
      {"scaled prox non-expansiveness", criterion_nonexpansive},
      {"geometric program without Lipschitz gradient", criterion_gp},
      {"profiles and I/O", [&] { return criterion_io(data_dir); }}};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    failed += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << " (" << criteria[i].first << "):"
              << o.detail.str() << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " acceptance criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
