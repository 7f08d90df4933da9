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

#pragma once

#include "sclopt/bench.hpp"
#include "sclopt/libsvm.hpp"
#include "sclopt/profile.hpp"
#include "sclopt/records.hpp"
#include "sclopt/scl_verify.hpp"
#include "sclopt/solvers.hpp"
#include "sclopt/synth.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace sclopt {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitNonConvergence = 3, kExitViolations = 4 };

namespace cli_detail {

struct ProblemArgs {
  std::string dataset;
  std::string synthetic = "logistic";
  std::string oracle;  // empty: logistic for datasets, implied by --synthetic otherwise
  std::string g = "l1";
  std::optional<double> rho;
  double box_lo = -1.0;
  double box_hi = 1.0;
  long long N = 200, p = 50, classes = 3, n = 50, m = 30;
  bool bias = false;
  std::uint64_t seed = 1;
};

inline void add_problem_flags(CLI::App* sub, ProblemArgs& a, bool with_g) {
  sub->add_option("--dataset", a.dataset, "LIBSVM file (overrides --synthetic)");
  sub->add_option("--synthetic", a.synthetic, "Synthetic family")
      ->check(CLI::IsMember({"logistic", "multinomial", "gp", "quadratic"}));
  sub->add_option("--oracle", a.oracle, "Smooth part for --dataset")
      ->check(CLI::IsMember({"logistic", "multinomial", "expsum", "quadratic"}));
  sub->add_option("--N", a.N, "Synthetic sample count")->check(CLI::PositiveNumber);
  sub->add_option("--p", a.p, "Synthetic feature count")->check(CLI::PositiveNumber);
  sub->add_option("--classes", a.classes, "Explicit classes of the synthetic multinomial")->check(CLI::PositiveNumber);
  sub->add_option("--n", a.n, "Variables of the synthetic geometric program")->check(CLI::PositiveNumber);
  sub->add_option("--m", a.m, "Exponential terms of the synthetic geometric program")->check(CLI::PositiveNumber);
  sub->add_flag("--bias", a.bias, "Append an unpenalized bias coordinate (logistic)");
  sub->add_option("--seed", a.seed, "Seed for synthetic data and sampling");
  if (with_g) {
    sub->add_option("--g", a.g, "Nonsmooth term")->check(CLI::IsMember({"l1", "zero", "box"}));
    sub->add_option("--rho", a.rho,
                    "l1 weight; scaled by N^{-1/2} for logistic and multinomial data (default 0.1, 1 for gp)");
    sub->add_option("--box-lo", a.box_lo, "Lower bound for --g box");
    sub->add_option("--box-hi", a.box_hi, "Upper bound for --g box");
  }
}

inline std::string family_of(const ProblemArgs& a) {
  if (!a.oracle.empty()) return a.oracle == "expsum" ? "gp" : a.oracle;
  return a.dataset.empty() ? a.synthetic : "logistic";
}

inline std::shared_ptr<const SmoothOracle> build_oracle(const ProblemArgs& a, Index& sample_count) {
  const std::string fam = family_of(a);
  sample_count = 1;
  if (!a.dataset.empty()) {
    const SparseDataset ds = load_libsvm(a.dataset);
    sample_count = static_cast<Index>(ds.size());
    if (ds.size() == 0) throw ParseError("dataset '" + a.dataset + "' has no rows", 0, 0);
    if (fam == "logistic") return logistic_oracle(to_logistic_data(ds, a.bias));
    if (fam == "multinomial") return multinomial_oracle(to_multinomial_data(ds));
    throw InvalidArgument("--oracle " + a.oracle + " cannot be built from a dataset");
  }
  if (fam == "logistic") {
    sample_count = a.N;
    return logistic_oracle(synth_logistic_data(a.N, a.p, a.seed, a.bias));
  }
  if (fam == "multinomial") {
    sample_count = a.N;
    return multinomial_oracle(synth_multinomial_data(a.N, a.p, a.classes, a.seed));
  }
  if (fam == "gp") return expsum_oracle(synth_gp_data(a.n, a.m, a.seed));
  std::mt19937_64 rng(a.seed);
  std::normal_distribution<double> normal;
  const Matrix B = Matrix::NullaryExpr(a.n, a.n, [&]() { return normal(rng); });
  const Vector b = Vector::NullaryExpr(a.n, [&]() { return normal(rng); });
  return quadratic_oracle(B.transpose() * B / static_cast<double>(a.n) + Matrix::Identity(a.n, a.n), b);
}

inline ProblemInstance build_problem(const ProblemArgs& a, std::string& name) {
  Index N = 1;
  auto f = build_oracle(a, N);
  const Index n = f->dimension();
  const std::string fam = family_of(a);
  name = a.dataset.empty() ? fam + "-seed" + std::to_string(a.seed) : std::filesystem::path(a.dataset).stem().string();
  std::shared_ptr<const NonsmoothTerm> g;
  if (a.g == "zero") {
    g = std::make_shared<ZeroTerm>();
  } else if (a.g == "box") {
    g = std::make_shared<BoxIndicator>(Vector::Constant(n, a.box_lo), Vector::Constant(n, a.box_hi));
  } else {
    const double rho = a.rho.value_or(fam == "gp" ? 1.0 : 0.1);
    const bool data_scaled = fam == "logistic" || fam == "multinomial";
    Vector w = Vector::Constant(n, data_scaled ? rho / std::sqrt(static_cast<double>(N)) : rho);
    if (fam == "logistic" && a.bias) w[n - 1] = 0.0;
    g = std::make_shared<L1Norm>(std::move(w));
  }
  return ProblemInstance(std::move(f), std::move(g));
}

struct SolverArgs {
  std::string solver = "prox-grad";
  double eps = 1e-8;
  int max_iter = 10000;
  std::optional<double> sigma;
  double shrink = 0.5;
  int max_shrinks = 60;
  double L0 = 1.0;
};

inline void add_solver_flags(CLI::App* sub, SolverArgs& s, bool with_solver) {
  if (with_solver)
    sub->add_option("--solver", s.solver, "Outer method")
        ->check(CLI::IsMember({"prox-grad", "prox-newton", "prox-bfgs"}));
  sub->add_option("--eps", s.eps, "Termination tolerance")->check(CLI::PositiveNumber);
  sub->add_option("--max-iter", s.max_iter, "Iteration cap")->check(CLI::PositiveNumber);
  sub->add_option("--sigma", s.sigma, "Phase threshold of prox-newton (default: ln(4/3) times a Lanczos estimate)")
      ->check(CLI::PositiveNumber);
  sub->add_option("--shrink", s.shrink, "Metric shrink factor")->check(CLI::Range(1e-6, 0.999999));
  sub->add_option("--max-shrinks", s.max_shrinks, "Shrinks allowed per iteration")->check(CLI::PositiveNumber);
  sub->add_option("--L0", s.L0, "Initial metric scale")->check(CLI::PositiveNumber);
}

inline SolverOptions to_options(const SolverArgs& s) {
  SolverOptions o;
  o.epsilon = s.eps;
  o.max_iterations = s.max_iter;
  o.sigma_override = s.sigma;
  o.metric_shrink_factor = s.shrink;
  o.max_shrinks_per_iteration = s.max_shrinks;
  o.initial_L = s.L0;
  return o;
}

inline nlohmann::json report_json(const SclCheckReport& r) {
  nlohmann::json j;
  j["samples"] = r.samples;
  j["violations"] = r.violations;
  j["skipped"] = r.skipped;
  j["worst_margin"] = std::isfinite(r.worst_margin) ? nlohmann::json(r.worst_margin) : nlohmann::json(nullptr);
  j["tolerance"] = r.tolerance;
  return j;
}

// Data problems surface as 2, solver problems as 3.
template <class Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const NonConvergence& e) {
    err << "error: " << e.what() << '\n';
    return kExitNonConvergence;
  } catch (const SolverAborted& e) {
    err << "error: " << e.what() << '\n';
    return kExitNonConvergence;
  } catch (const NonConvexError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNonConvergence;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
}

}  // namespace cli_detail

/**
 * Entry point of the sclopt tool; `args` excludes the program name.
 * Exit codes: 0 success, 1 usage, 2 data or parse error, 3 solver
 * non-convergence, 4 verification violations.
 */
inline int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  using namespace cli_detail;
  CLI::App app{"Composite minimization with self-concordant-like smooth parts", "sclopt"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1, 1);

  ProblemArgs pa;
  SolverArgs sa;
  std::string out_dir = ".";

  auto* solve_cmd = app.add_subcommand("solve", "Solve one problem and write its record and trace");
  add_problem_flags(solve_cmd, pa, true);
  add_solver_flags(solve_cmd, sa, true);
  solve_cmd->add_option("--out", out_dir, "Output directory for record.jsonl and trace.csv");

  int samples = 500;
  auto* verify_cmd = app.add_subcommand("verify", "Check the self-concordant-like inequalities of an oracle");
  add_problem_flags(verify_cmd, pa, false);
  verify_cmd->add_option("--samples", samples, "Random samples")->check(CLI::PositiveNumber);
  verify_cmd->add_option("--out", out_dir, "Output directory for scl_report.json");

  std::vector<std::string> solver_names{"prox-grad", "prox-newton", "prox-bfgs"};
  std::vector<std::string> datasets;
  int count = 4, gp_count = 0;
  auto* bench_cmd = app.add_subcommand("bench", "Run the solver x problem matrix");
  add_solver_flags(bench_cmd, sa, false);
  bench_cmd->add_option("--solvers", solver_names, "Solvers to compare")
      ->check(CLI::IsMember({"prox-grad", "prox-newton", "prox-bfgs"}));
  bench_cmd->add_option("--dataset", datasets, "LIBSVM files (logistic + l1), repeatable");
  bench_cmd->add_option("--count", count, "Synthetic logistic + l1 problems")->check(CLI::NonNegativeNumber);
  bench_cmd->add_option("--gp-count", gp_count, "Synthetic geometric programs")->check(CLI::NonNegativeNumber);
  bench_cmd->add_option("--N", pa.N, "Synthetic sample count")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--p", pa.p, "Synthetic feature count")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--rho", pa.rho, "l1 weight (scaled by N^{-1/2})");
  bench_cmd->add_option("--seed", pa.seed, "First synthetic seed");
  bench_cmd->add_option("--out", out_dir, "Output directory for runs.jsonl");

  std::string in_path, csv_path = "profile.csv", metric = "seconds";
  std::vector<double> tau;
  auto* profile_cmd = app.add_subcommand("profile", "Performance profiles from run records");
  profile_cmd->add_option("--in", in_path, "Run records (jsonl)")->required();
  profile_cmd->add_option("--out", csv_path, "Profile CSV; the SVG is written next to it");
  profile_cmd->add_option("--metric", metric, "Cost measure")->check(CLI::IsMember({"seconds", "prox_calls", "iters"}));
  profile_cmd->add_option("--tau", tau, "Explicit log2 grid (default 0 to the largest ratio in steps of 0.25)");

  std::vector<std::string> argv_store{"sclopt"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : argv_store) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  if (solve_cmd->parsed()) {
    return guarded(err, [&]() -> int {
      std::string name;
      ProblemInstance p = [&] {
        try {
          return build_problem(pa, name);
        } catch (const InvalidArgument& e) {
          throw ParseError(e.what(), 0, 0);
        }
      }();
      const SolverOptions opts = to_options(sa);
      const SolverKind kind = *parse_solver_kind(sa.solver);
      const SolveResult res = solve(kind, p, Vector::Zero(p.dimension()), opts);
      const std::filesystem::path dir(out_dir);
      write_records_jsonl(dir / "record.jsonl", {make_record(name, sa.solver, res, opts)});
      write_file_atomic(dir / "trace.csv", trace_to_csv(res.trace));
      out << std::setprecision(17) << "F = " << objective_value(p, res.x) << '\n'
          << "residual = " << res.final_residual << '\n'
          << "iterations = " << res.iterations << '\n'
          << "converged = " << (res.converged ? "true" : "false") << '\n';
      if (!res.converged) {
        err << "error: " << sa.solver << " did not reach eps = " << sa.eps << " in " << sa.max_iter
            << " iterations\n";
        return kExitNonConvergence;
      }
      return kExitOk;
    });
  }

  if (verify_cmd->parsed()) {
    return guarded(err, [&]() -> int {
      Index N = 1;
      std::shared_ptr<const SmoothOracle> f;
      try {
        f = build_oracle(pa, N);
      } catch (const InvalidArgument& e) {
        throw ParseError(e.what(), 0, 0);
      }
      SclSampling s;
      s.samples = samples;
      s.seed = pa.seed;
      const SclSuiteReport rep = verify_scl(*f, s);
      nlohmann::json j;
      j["oracle"] = f->name();
      j["M_f"] = f->scl_constant();
      j["samples"] = samples;
      j["seed"] = pa.seed;
      j["definition"] = report_json(rep.definition);
      j["pair_bounds"] = report_json(rep.pair_bounds);
      write_file_atomic(std::filesystem::path(out_dir) / "scl_report.json", j.dump(2) + "\n");
      out << "definition violations = " << rep.definition.violations << " / " << rep.definition.samples << '\n'
          << "pair-bound violations = " << rep.pair_bounds.violations << " / " << rep.pair_bounds.samples << '\n';
      return rep.clean() ? kExitOk : kExitViolations;
    });
  }

  if (bench_cmd->parsed()) {
    return guarded(err, [&]() -> int {
      std::vector<BenchProblem> problems;
      for (const auto& path : datasets) {
        ProblemArgs a;
        a.dataset = path;
        a.rho = pa.rho;
        std::string name;
        ProblemInstance p = build_problem(a, name);
        problems.push_back({name, p, Vector::Zero(p.dimension())});
      }
      for (int i = 0; i < count; ++i) {
        ProblemArgs a = pa;
        a.synthetic = "logistic";
        a.seed = pa.seed + static_cast<std::uint64_t>(i);
        std::string name;
        ProblemInstance p = build_problem(a, name);
        problems.push_back({name, p, Vector::Zero(p.dimension())});
      }
      for (int i = 0; i < gp_count; ++i) {
        const std::uint64_t seed = pa.seed + static_cast<std::uint64_t>(i);
        ProblemInstance p = synth_gp_instance(50, 30, seed);
        problems.push_back({"gp-seed" + std::to_string(seed), p, Vector::Zero(p.dimension())});
      }
      if (problems.empty()) throw InvalidArgument("bench: no problems selected");
      std::vector<SolverKind> kinds;
      for (const auto& s : solver_names) kinds.push_back(*parse_solver_kind(s));
      const auto records = run_bench(problems, kinds, to_options(sa));
      write_records_jsonl(std::filesystem::path(out_dir) / "runs.jsonl", records);
      std::size_t ok = 0;
      for (const auto& r : records) ok += r.converged ? 1 : 0;
      out << "runs = " << records.size() << ", converged = " << ok << '\n';
      return kExitOk;
    });
  }

  return guarded(err, [&]() -> int {
    const auto records = read_records_jsonl(std::filesystem::path(in_path));
    if (records.empty()) throw ParseError("no run records in '" + in_path + "'", 0, 0);
    const ProfileMetric pm = metric == "prox_calls" ? ProfileMetric::prox_calls
                             : metric == "iters"    ? ProfileMetric::iters
                                                    : ProfileMetric::seconds;
    const ProfileTable table = records_to_table(records, pm);
    const auto grid = tau.empty() ? default_tau_grid(table) : tau;
    const PerformanceProfile prof = performance_profile(table, grid);
    std::ostringstream csv;
    write_profile_csv(prof, csv);
    std::filesystem::path csv_file(csv_path);
    write_file_atomic(csv_file, csv.str());
    std::filesystem::path svg_file = csv_file;
    svg_file.replace_extension(".svg");
    write_file_atomic(svg_file, render_profile_svg(prof, "performance profile (" + metric + ")"));
    for (const auto& d : prof.dropped_problems) err << "note: every solver failed on '" << d << "'; dropped\n";
    out << "problems = " << prof.problems_used << ", solvers = " << prof.solver_names.size() << '\n';
    return kExitOk;
  });
}

}  // namespace sclopt
