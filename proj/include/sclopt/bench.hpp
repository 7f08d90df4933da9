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

#include "sclopt/records.hpp"
#include "sclopt/solvers.hpp"

#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace sclopt {

struct BenchProblem {
  std::string name;
  ProblemInstance problem;
  Vector x0;
};

/// Worker count: SCLOPT_THREADS when set to a positive integer, otherwise the
/// hardware concurrency; never more than `tasks`, never less than 1.
inline std::size_t bench_thread_count(std::size_t tasks) {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SCLOPT_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) n = static_cast<std::size_t>(v);
  }
  return std::max<std::size_t>(1, std::min(n, tasks));
}

/**
 * Runs every (problem, solver) pair on a bounded worker pool. Records come
 * back in problem-major order whatever the scheduling; a run that throws is
 * recorded as unconverged with the message in `error`.
 */
inline std::vector<RunRecord> run_bench(const std::vector<BenchProblem>& problems,
                                        const std::vector<SolverKind>& solvers, const SolverOptions& opts,
                                        std::size_t threads = 0) {
  const std::size_t tasks = problems.size() * solvers.size();
  std::vector<RunRecord> out(tasks);
  if (tasks == 0) return out;
  const std::size_t workers = threads > 0 ? std::min(threads, tasks) : bench_thread_count(tasks);
  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (std::size_t t = next++; t < tasks; t = next++) {
      const BenchProblem& bp = problems[t / solvers.size()];
      const SolverKind kind = solvers[t % solvers.size()];
      try {
        const SolveResult res = solve(kind, bp.problem, bp.x0, opts);
        out[t] = make_record(bp.name, to_string(kind), res, opts);
      } catch (const std::exception& e) {
        RunRecord r;
        r.problem = bp.name;
        r.solver = to_string(kind);
        r.options = options_snapshot(opts);
        r.error = e.what();
        out[t] = std::move(r);
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t i = 1; i < workers; ++i) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  return out;
}

}  // namespace sclopt
