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

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace sclopt {

/// T_{p,s}: problems in rows, solvers in columns. Non-finite entries are failures.
struct ProfileTable {
  Matrix times;
  std::vector<std::string> solver_names;
  std::vector<std::string> problem_names;
};

struct PerformanceProfile {
  std::vector<double> tau;
  std::vector<std::string> solver_names;
  Matrix rho;  ///< tau.size() x n_s
  std::vector<std::string> dropped_problems;  ///< every solver failed
  Index problems_used = 0;
};

/// rho_s(tau) = |{p : log2(T_{p,s} / min_s' T_{p,s'}) <= tau}| / n_p.
/// Failed runs count as infinite ratios; problems nobody solved are dropped.
inline PerformanceProfile performance_profile(const ProfileTable& table, const std::vector<double>& tau_grid) {
  const Index np = table.times.rows(), ns = table.times.cols();
  detail::require(np > 0 && ns > 0, "performance_profile: empty table");
  detail::require(static_cast<Index>(table.solver_names.size()) == ns, "performance_profile: solver name count");
  detail::require(table.problem_names.empty() || static_cast<Index>(table.problem_names.size()) == np,
                  "performance_profile: problem name count");
  detail::require(!tau_grid.empty() && std::is_sorted(tau_grid.begin(), tau_grid.end()),
                  "performance_profile: tau grid must be nonempty and increasing");

  PerformanceProfile out;
  out.tau = tau_grid;
  out.solver_names = table.solver_names;
  std::vector<std::vector<double>> log_ratios(static_cast<std::size_t>(ns));
  for (Index p = 0; p < np; ++p) {
    double best = std::numeric_limits<double>::infinity();
    for (Index s = 0; s < ns; ++s) {
      const double t = table.times(p, s);
      if (std::isfinite(t)) {
        detail::require(t > 0.0, "performance_profile: times must be positive");
        best = std::min(best, t);
      }
    }
    if (!std::isfinite(best)) {
      out.dropped_problems.push_back(table.problem_names.empty() ? std::to_string(p) : table.problem_names[p]);
      continue;
    }
    ++out.problems_used;
    for (Index s = 0; s < ns; ++s) {
      const double t = table.times(p, s);
      log_ratios[s].push_back(std::isfinite(t) ? std::log2(t / best) : std::numeric_limits<double>::infinity());
    }
  }
  detail::require(out.problems_used > 0, "performance_profile: every solver failed on every problem");

  out.rho = Matrix::Zero(static_cast<Index>(tau_grid.size()), ns);
  for (Index s = 0; s < ns; ++s)
    for (std::size_t i = 0; i < tau_grid.size(); ++i) {
      const auto hits = std::count_if(log_ratios[s].begin(), log_ratios[s].end(),
                                      [&](double lr) { return lr <= tau_grid[i]; });
      out.rho(static_cast<Index>(i), s) = static_cast<double>(hits) / static_cast<double>(out.problems_used);
    }
  return out;
}

/// 0, step, 2 step, ..., up to the largest finite log ratio (at least `max_tau`).
inline std::vector<double> default_tau_grid(const ProfileTable& table, double step = 0.25, double max_tau = 1.0) {
  double hi = max_tau;
  for (Index p = 0; p < table.times.rows(); ++p) {
    double best = std::numeric_limits<double>::infinity();
    for (Index s = 0; s < table.times.cols(); ++s)
      if (std::isfinite(table.times(p, s))) best = std::min(best, table.times(p, s));
    for (Index s = 0; s < table.times.cols(); ++s)
      if (std::isfinite(table.times(p, s)) && std::isfinite(best)) hi = std::max(hi, std::log2(table.times(p, s) / best));
  }
  std::vector<double> grid;
  for (int i = 0; i * step <= hi + step * 1e-9 || grid.size() < 2; ++i) grid.push_back(i * step);
  if (grid.back() < hi) grid.push_back(grid.back() + step);
  return grid;
}

/// "tau,<solver>..." followed by one row per grid point.
inline void write_profile_csv(const PerformanceProfile& prof, std::ostream& out) {
  out << "tau";
  for (const auto& s : prof.solver_names) out << ',' << s;
  out << '\n';
  for (std::size_t i = 0; i < prof.tau.size(); ++i) {
    out << detail::format_double(prof.tau[i]);
    for (Index s = 0; s < prof.rho.cols(); ++s) out << ',' << detail::format_double(prof.rho(static_cast<Index>(i), s));
    out << '\n';
  }
}

/// Standalone SVG with one staircase per solver.
inline std::string render_profile_svg(const PerformanceProfile& prof, const std::string& title = "performance profile") {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  const double W = 640, H = 400, ml = 60, mr = 150, mt = 40, mb = 50;
  const double t0 = prof.tau.front(), t1 = std::max(prof.tau.back(), t0 + 1e-12);
  auto X = [&](double t) { return ml + (t - t0) / (t1 - t0) * (W - ml - mr); };
  auto Y = [&](double r) { return H - mb - r * (H - mt - mb); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\">" << title
      << "</text>\n";
  svg << "<line x1=\"" << ml << "\" y1=\"" << Y(0) << "\" x2=\"" << W - mr << "\" y2=\"" << Y(0)
      << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << ml << "\" y1=\"" << Y(0) << "\" x2=\"" << ml << "\" y2=\"" << Y(1)
      << "\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">log2 ratio tau</text>\n";
  for (double r : {0.0, 0.5, 1.0})
    svg << "<text x=\"" << ml - 8 << "\" y=\"" << Y(r) + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << r << "</text>\n";
  for (Index s = 0; s < prof.rho.cols(); ++s) {
    const char* color = palette[s % 6];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < prof.tau.size(); ++i) {
      const double r = prof.rho(static_cast<Index>(i), s);
      if (i > 0) svg << X(prof.tau[i]) << ',' << Y(prof.rho(static_cast<Index>(i - 1), s)) << ' ';
      svg << X(prof.tau[i]) << ',' << Y(r) << ' ';
    }
    svg << "\"/>\n";
    svg << "<text x=\"" << W - mr + 10 << "\" y=\"" << mt + 20 * (s + 1) << "\" fill=\"" << color
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << prof.solver_names[s] << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace sclopt
