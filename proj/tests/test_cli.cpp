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

#include "sclopt/cli.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace sclopt;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_command(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("sclopt_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::string kA1a = std::string(SCLOPT_TEST_DATA) + "/a1a_like.libsvm";

}  // namespace

TEST(Cli, SolveDatasetWritesRecordAndTrace) {
  const fs::path dir = scratch_dir("solve");
  const CliRun r = run({"solve", "--dataset", kA1a, "--g", "l1", "--rho", "0.1", "--solver", "prox-grad", "--eps", "1e-8",
                     "--out", dir.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("F = "), std::string::npos);
  EXPECT_NE(r.out.find("iterations = "), std::string::npos);
  const auto recs = read_records_jsonl(dir / "record.jsonl");
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].problem, "a1a_like");
  EXPECT_EQ(recs[0].solver, "prox-grad");
  EXPECT_TRUE(recs[0].converged);
  EXPECT_EQ(slurp(dir / "trace.csv").rfind("k,F,alpha", 0), 0u);
}

TEST(Cli, SolveEverySolverOnSynthetic) {
  for (const char* solver : {"prox-grad", "prox-newton", "prox-bfgs"}) {
    const fs::path dir = scratch_dir(std::string("synthetic_") + solver);
    const CliRun r = run({"solve", "--synthetic", "logistic", "--N", "60", "--p", "8", "--solver", solver, "--out",
                       dir.string()});
    EXPECT_EQ(r.code, kExitOk) << solver << ": " << r.err;
  }
  const fs::path dir = scratch_dir("gp");
  EXPECT_EQ(run({"solve", "--synthetic", "gp", "--n", "10", "--m", "6", "--out", dir.string()}).code, kExitOk);
}

TEST(Cli, VerifyCompliantOracle) {
  const fs::path dir = scratch_dir("verify");
  const CliRun r = run({"verify", "--oracle", "logistic", "--dataset", kA1a, "--samples", "500", "--out", dir.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto j = nlohmann::json::parse(slurp(dir / "scl_report.json"));
  EXPECT_EQ(j["definition"]["violations"], 0);
  EXPECT_EQ(j["pair_bounds"]["violations"], 0);
  EXPECT_EQ(j["definition"]["samples"], 500);
}

TEST(Cli, VerifyReportsViolations) {
  const fs::path dir = scratch_dir("verify_multi");
  const CliRun r = run({"verify", "--synthetic", "multinomial", "--N", "20", "--p", "5", "--classes", "3", "--out",
                     dir.string()});
  EXPECT_EQ(r.code, kExitViolations) << r.out << r.err;
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, kExitUsage);
  EXPECT_EQ(run({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(run({"solve", "--solver", "newton"}).code, kExitUsage);
  EXPECT_EQ(run({"solve", "--eps", "-1"}).code, kExitUsage);
  EXPECT_EQ(run({"profile"}).code, kExitUsage);
}

TEST(Cli, HelpExitsCleanly) {
  const CliRun top = run({"--help"});
  EXPECT_EQ(top.code, kExitOk);
  EXPECT_NE(top.out.find("solve"), std::string::npos);
  const CliRun sub = run({"solve", "--help"});
  EXPECT_EQ(sub.code, kExitOk);
  EXPECT_NE(sub.out.find("--solver"), std::string::npos);
}

TEST(Cli, DataErrors) {
  const fs::path dir = scratch_dir("data");
  EXPECT_EQ(run({"solve", "--dataset", "/nonexistent.libsvm", "--out", dir.string()}).code, kExitData);
  std::ofstream(dir / "bad.libsvm") << "+1 1:1\n-1 2:oops\n";
  const CliRun r = run({"solve", "--dataset", (dir / "bad.libsvm").string(), "--out", dir.string()});
  EXPECT_EQ(r.code, kExitData);
  EXPECT_NE(r.err.find("line 2"), std::string::npos) << r.err;
  const std::string multi = std::string(SCLOPT_TEST_DATA) + "/multiclass.libsvm";
  EXPECT_EQ(run({"solve", "--dataset", multi, "--out", dir.string()}).code, kExitData);
  std::ofstream(dir / "junk.jsonl") << "not json\n";
  EXPECT_EQ(run({"profile", "--in", (dir / "junk.jsonl").string(), "--out", (dir / "p.csv").string()}).code,
            kExitData);
}

TEST(Cli, IterationCapIsNonConvergence) {
  const fs::path dir = scratch_dir("maxiter");
  const CliRun r = run({"solve", "--synthetic", "logistic", "--max-iter", "2", "--out", dir.string()});
  EXPECT_EQ(r.code, kExitNonConvergence);
  EXPECT_TRUE(fs::exists(dir / "record.jsonl"));
}

TEST(Cli, ProfileHandExample) {
  const fs::path dir = scratch_dir("profile");
  std::ofstream(dir / "runs.jsonl")
      << R"({"problem":"p","solver":"a","iters":1,"prox_calls":1,"seconds":2,"residual":0,"converged":true})" << '\n'
      << R"({"problem":"p","solver":"b","iters":1,"prox_calls":1,"seconds":4,"residual":0,"converged":true})" << '\n';
  const CliRun r = run({"profile", "--in", (dir / "runs.jsonl").string(), "--out", (dir / "prof.csv").string(), "--tau",
                     "0", "--tau", "1"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(slurp(dir / "prof.csv"), "tau,a,b\n0,1,0\n1,1,1\n");
  EXPECT_TRUE(fs::exists(dir / "prof.svg"));
}

TEST(Cli, BenchThenProfile) {
  const fs::path dir = scratch_dir("bench");
  const CliRun b = run({"bench", "--count", "2", "--gp-count", "1", "--N", "60", "--p", "8", "--out", dir.string()});
  ASSERT_EQ(b.code, kExitOk) << b.err;
  const auto recs = read_records_jsonl(dir / "runs.jsonl");
  EXPECT_EQ(recs.size(), 9u);
  const CliRun p = run({"profile", "--in", (dir / "runs.jsonl").string(), "--out", (dir / "prof.csv").string(),
                     "--metric", "prox_calls"});
  ASSERT_EQ(p.code, kExitOk) << p.err;
  EXPECT_EQ(slurp(dir / "prof.csv").rfind("tau,prox-grad,prox-newton,prox-bfgs\n", 0), 0u);
}

TEST(Cli, IdenticalArgumentsGiveIdenticalRecords) {
  std::vector<nlohmann::json> runs;
  for (int i = 0; i < 2; ++i) {
    const fs::path dir = scratch_dir("det" + std::to_string(i));
    ASSERT_EQ(run({"solve", "--synthetic", "logistic", "--seed", "7", "--solver", "prox-bfgs", "--out", dir.string()})
                  .code,
              kExitOk);
    auto j = nlohmann::json::parse(slurp(dir / "record.jsonl"));
    j.erase("seconds");
    runs.push_back(j);
  }
  EXPECT_EQ(runs[0].dump(), runs[1].dump());
}
