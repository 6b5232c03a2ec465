#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "rsfluct/io.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string output;  // stdout and stderr
};

Run run(const std::string& args) {
  const std::string command = std::string(RSFLUCT_CLI) + " " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(command.c_str(), "r");
  if (!pipe) return r;
  char buffer[4096];
  while (const auto n = std::fread(buffer, 1, sizeof buffer, pipe)) r.output.append(buffer, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("rsfluct_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Cli, PathsCount) {
  const auto r = run("paths --k 4 --beta 2delta");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.output, "8\n");
  EXPECT_EQ(run("paths --k 4 --beta delta+").code, 2);
}

TEST(Cli, PathsTable) {
  const auto r = run("paths --k 3");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.output.find("# format: rsfluct/1"), std::string::npos);
  EXPECT_NE(r.output.find("delta,1,6\n"), std::string::npos);
  EXPECT_NE(r.output.find("3delta,3,1\n"), std::string::npos);
  EXPECT_EQ(run("paths --k 20").code, 2);
}

TEST(Cli, TracePoly) {
  const auto r = run("trace-poly --N 5 --k 2");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.output.find("constant,,8\n"), std::string::npos);
  EXPECT_NE(r.output.find("\n3,2,1\n"), std::string::npos);
}

TEST(Cli, ExpansionValidation) {
  EXPECT_EQ(run("expansion --k 4 --N 30 --alpha 0").code, 2);
  EXPECT_EQ(run("expansion --k 4 --N 8 --alpha 0.5").code, 2);
  const auto r = run("expansion --k 2 --N 100 --alpha 0.5 --dist rademacher");
  EXPECT_EQ(r.code, 0) << r.output;
  const auto j = rsfluct::Json::parse(r.output);
  EXPECT_NEAR(j["report"]["reconstructed_mean"].get<double>(), 198.0 + 5.1873775176396203, 1e-11);
}

TEST(Cli, VerifyFaultInjection) {
  EXPECT_EQ(run("verify --level fast").code, 0);
  const auto r = run("verify --inject 4,20,2delta");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.output.find("k=4 N=20 beta=2delta"), std::string::npos) << r.output;
  EXPECT_EQ(run("verify --inject 4").code, 2);
}

TEST(Cli, SimulateIsReproducible) {
  const auto a = scratch("a");
  const auto b = scratch("b");
  const std::string common = "simulate --f poly:0,1 --f poly:0,0,0,1 --alpha 0.3 --n-grid 100,400 --replicas 120 --seed 5";
  ASSERT_EQ(run(common + " --workers 1 --out " + a.string()).code, 0);
  ASSERT_EQ(run(common + " --workers 3 --out " + b.string()).code, 0);
  for (const char* name : {"samples.csv", "clt_report.json", "correlation.csv"}) {
    ASSERT_TRUE(fs::exists(a / name)) << name;
    EXPECT_EQ(slurp(a / name), slurp(b / name)) << name;
  }
  EXPECT_TRUE(fs::exists(a / "run_info.json"));
  const auto report = rsfluct::Json::parse(slurp(a / "clt_report.json"));
  EXPECT_EQ(report["format"], "rsfluct/1");
  EXPECT_TRUE(report.contains("convergence"));

  std::istringstream csv(slurp(a / "samples.csv"));
  std::string line;
  std::size_t rows = 0;
  bool header = false;
  while (std::getline(csv, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      EXPECT_EQ(line, "replica,f_id,N,raw_trace,centered,scaled");
      header = true;
      continue;
    }
    ++rows;
  }
  EXPECT_EQ(rows, 2u * 2u * 120u);
}

TEST(Cli, ConfigFileAndFlagPrecedence) {
  const auto dir = scratch("cfg");
  {
    std::ofstream cfg(dir / "run.cfg");
    cfg << "# ensemble\nf=poly:0,1;poly:0,0,0,1\nalpha=0.3\nn-grid=100\nreplicas=120\nseed=9\n";
  }
  ASSERT_EQ(run("simulate --config " + (dir / "run.cfg").string() + " --out " + (dir / "from_cfg").string()).code, 0);
  ASSERT_EQ(run("simulate --config " + (dir / "run.cfg").string() + " --seed 10 --out " + (dir / "flag").string()).code,
            0);
  ASSERT_EQ(run("simulate --f poly:0,1 --f poly:0,0,0,1 --alpha 0.3 --n-grid 100 --replicas 120 --seed 10 --out " +
                (dir / "plain").string())
                .code,
            0);
  auto body = [](const std::string& csv) { return csv.substr(csv.find("replica,")); };
  const auto cfg = body(slurp(dir / "from_cfg" / "samples.csv"));
  const auto flag = body(slurp(dir / "flag" / "samples.csv"));
  EXPECT_NE(cfg, flag);
  EXPECT_EQ(flag, body(slurp(dir / "plain" / "samples.csv")));

  {
    std::ofstream bad(dir / "bad.cfg");
    bad << "alpha 0.3\n";
  }
  EXPECT_EQ(run("simulate --config " + (dir / "bad.cfg").string() + " --f poly:0,1 --out " + dir.string()).code, 2);
}

TEST(Cli, SimulateWarningsAndErrors) {
  const auto dir = scratch("warn");
  const auto one = run("simulate --f poly:0,1 --replicas 1 --n-grid 10 --out " + dir.string());
  EXPECT_EQ(one.code, 0);
  EXPECT_NE(one.output.find("warning"), std::string::npos);
  EXPECT_EQ(run("simulate --f poly:0,1 --f poly:0,0,1 --replicas 10 --n-grid 10 --out " + dir.string()).code, 2);
  EXPECT_EQ(run("simulate --f poly:0,1 --case B --replicas 10 --n-grid 10 --out " + dir.string()).code, 2);
  EXPECT_EQ(run("simulate --f poly:0,1 --out " + dir.string() + " --n-grid 1").code, 2);
  EXPECT_EQ(run("simulate --f poly:0,1 --dist gauss --out " + dir.string()).code, 2);
  EXPECT_EQ(run("nonsense").code, 2);
}
