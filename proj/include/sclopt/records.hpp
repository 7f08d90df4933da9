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

#include "sclopt/core.hpp"
#include "sclopt/libsvm.hpp"
#include "sclopt/profile.hpp"
#include "sclopt/solvers.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace sclopt {

struct RunRecord {
  std::string problem;
  std::string solver;
  long long iters = 0;
  long long prox_calls = 0;
  double seconds = 0.0;
  double residual = 0.0;
  bool converged = false;
  nlohmann::json options = nlohmann::json::object();  ///< snapshot of the solver options
  std::string error;  ///< set when the run threw

  bool operator==(const RunRecord&) const = default;
};

inline nlohmann::json options_snapshot(const SolverOptions& o) {
  nlohmann::json j;
  j["epsilon"] = o.epsilon;
  j["max_iterations"] = o.max_iterations;
  j["metric_shrink_factor"] = o.metric_shrink_factor;
  j["max_shrinks_per_iteration"] = o.max_shrinks_per_iteration;
  j["initial_L"] = o.initial_L;
  if (o.sigma_override) j["sigma"] = *o.sigma_override;
  return j;
}

inline RunRecord make_record(const std::string& problem, const std::string& solver, const SolveResult& res,
                             const SolverOptions& opts) {
  RunRecord r;
  r.problem = problem;
  r.solver = solver;
  r.iters = res.iterations;
  r.prox_calls = static_cast<long long>(res.prox_calls);
  r.seconds = res.elapsed_seconds;
  r.residual = res.final_residual;
  r.converged = res.converged;
  r.options = options_snapshot(opts);
  return r;
}

inline nlohmann::json to_json(const RunRecord& r) {
  nlohmann::json j;
  j["problem"] = r.problem;
  j["solver"] = r.solver;
  j["iters"] = r.iters;
  j["prox_calls"] = r.prox_calls;
  j["seconds"] = r.seconds;
  j["residual"] = r.residual;
  j["converged"] = r.converged;
  if (!r.options.empty()) j["options"] = r.options;
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

inline RunRecord record_from_json(const nlohmann::json& j) {
  RunRecord r;
  r.problem = j.at("problem").get<std::string>();
  r.solver = j.at("solver").get<std::string>();
  r.iters = j.at("iters").get<long long>();
  r.prox_calls = j.at("prox_calls").get<long long>();
  r.seconds = j.at("seconds").get<double>();
  r.residual = j.at("residual").is_null() ? std::numeric_limits<double>::infinity() : j.at("residual").get<double>();
  r.converged = j.at("converged").get<bool>();
  if (j.contains("options")) r.options = j.at("options");
  if (j.contains("error")) r.error = j.at("error").get<std::string>();
  detail::require(r.seconds >= 0.0, "run record: negative seconds");
  detail::require(r.residual >= 0.0, "run record: negative residual");
  return r;
}

/// Writes `content` to `path` through a sibling temporary file and a rename.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw Error("write to '" + tmp.string() + "' failed");
  }
  std::filesystem::rename(tmp, path);
}

inline std::string records_to_jsonl(const std::vector<RunRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += to_json(r).dump();
    out += '\n';
  }
  return out;
}

inline void write_records_jsonl(const std::filesystem::path& path, const std::vector<RunRecord>& records) {
  write_file_atomic(path, records_to_jsonl(records));
}

inline std::vector<RunRecord> read_records_jsonl(std::istream& in) {
  std::vector<RunRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(record_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(e.what(), line_no, 1);
    } catch (const InvalidArgument& e) {
      throw ParseError(e.what(), line_no, 1);
    }
  }
  return out;
}

inline std::vector<RunRecord> read_records_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'", 0, 0);
  return read_records_jsonl(in);
}

enum class ProfileMetric { seconds, prox_calls, iters };

/// Problems and solvers in order of first appearance. Unconverged runs and
/// missing pairs are failures.
inline ProfileTable records_to_table(const std::vector<RunRecord>& records, ProfileMetric metric) {
  ProfileTable t;
  std::map<std::string, Index> pi, si;
  for (const auto& r : records) {
    if (pi.emplace(r.problem, static_cast<Index>(t.problem_names.size())).second) t.problem_names.push_back(r.problem);
    if (si.emplace(r.solver, static_cast<Index>(t.solver_names.size())).second) t.solver_names.push_back(r.solver);
  }
  t.times = Matrix::Constant(static_cast<Index>(t.problem_names.size()), static_cast<Index>(t.solver_names.size()),
                             std::numeric_limits<double>::infinity());
  for (const auto& r : records) {
    if (!r.converged) continue;
    double v = 0.0;
    switch (metric) {
      case ProfileMetric::seconds:
        v = r.seconds;
        break;
      case ProfileMetric::prox_calls:
        v = static_cast<double>(r.prox_calls);
        break;
      case ProfileMetric::iters:
        v = static_cast<double>(r.iters);
        break;
    }
    // A zero count or time would be a ratio singularity; count it as the smallest unit.
    t.times(pi[r.problem], si[r.solver]) = std::max(v, metric == ProfileMetric::seconds ? 1e-9 : 1.0);
  }
  return t;
}

/// k,F,alpha,lambda,r,beta,residual,predicted_decrease,metric_scale,shrinks,seconds,prox_calls
inline std::string trace_to_csv(const RunTrace& trace) {
  std::string out = "k,F,alpha,lambda,r,beta,residual,predicted_decrease,metric_scale,shrinks,seconds,prox_calls\n";
  for (const auto& t : trace.records) {
    out += std::to_string(t.k);
    for (double v : {t.F_value, t.alpha, t.lambda, t.r, t.beta, t.residual, t.predicted_decrease, t.metric_scale}) {
      out += ',';
      out += detail::format_double(v);
    }
    out += ',' + std::to_string(t.shrinks) + ',' + detail::format_double(t.elapsed_seconds) + ',' +
           std::to_string(t.prox_call_count) + '\n';
  }
  return out;
}

}  // namespace sclopt
