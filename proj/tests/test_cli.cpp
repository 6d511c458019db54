#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mco_ce_cli_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

CliResult run(const std::string& args, const std::string& env = "") {
  const fs::path dir = scratch("io");
  const std::string cmd = env + " " + MCO_CE_BINARY + " " + args + " > " + (dir / "out").string() + " 2> " +
                          (dir / "err").string();
  const int status = std::system(cmd.c_str());
  CliResult r{WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(dir / "out"), slurp(dir / "err")};
  fs::remove_all(dir);
  return r;
}

}  // namespace

TEST(Cli, ListPrintsRegistryAndVocabulary) {
  const CliResult r = run("list");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("hartman6 6 -3.32237"), std::string::npos);
  for (const char* a : {"CES05", "CES10", "CES15", "CEM05", "CEM10", "CEM15", "CESX", "CEMX"}) {
    EXPECT_NE(r.out.find(a), std::string::npos) << a;
  }
}

TEST(Cli, BenchWritesBothCsvs) {
  const fs::path out = scratch("bench");
  const CliResult r = run("bench --problem hartman6 --algos CES10,CEMX --trials 2 --seed 42 --budget 1800 --pop 300 --out " +
                    out.string());
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string raw = slurp(out / "raw.csv");
  const std::string agg = slurp(out / "aggregate.csv");
  EXPECT_EQ(raw.rfind("problem,algorithm,trial,evals,best_g,kappa_sel,k_sel\n", 0), 0u);
  EXPECT_EQ(agg.rfind("problem,algorithm,evals,mean,ci95,median,min,max\n", 0), 0u);
  EXPECT_NE(raw.find("hartman6,CEMX,1,1800,"), std::string::npos);
  EXPECT_TRUE(fs::exists(out / "config.json"));
  fs::remove_all(out);
}

TEST(Cli, ConfigFileWithFlagOverride) {
  const fs::path dir = scratch("config");
  {
    std::ofstream f(dir / "run.json");
    f << R"({"problems": ["woods"], "algorithms": ["CES10"], "trials": 1, "budget": 800, "pop_size": 200,
             "output": {"dir": ")" << (dir / "a").string() << R"("}})";
  }
  const CliResult r = run("bench --config " + (dir / "run.json").string() + " --trials 3");
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string raw = slurp(dir / "a" / "raw.csv");
  EXPECT_NE(raw.find("woods,CES10,2,800,"), std::string::npos);
  fs::remove_all(dir);
}

TEST(Cli, UsageErrorsExitTwo) {
  const CliResult unknown = run("bench --problem woods --algos CEZ10");
  EXPECT_EQ(unknown.code, 2);
  EXPECT_NE(unknown.err.find("CES05 CES10 CES15 CEM05 CEM10 CEM15 CESX CEMX"), std::string::npos);
  EXPECT_EQ(run("bench --problem woods --trials 0").code, 2);
  EXPECT_EQ(run("bench --problem nowhere").code, 2);
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("lab no_such_demo").code, 2);
  EXPECT_EQ(run("bench --problem woods --config /nonexistent.json").code, 2);
  EXPECT_EQ(run("bench --problem woods --trials 1", "MCO_CE_THREADS=lots").code, 2);
  const fs::path dir = scratch("badcfg");
  {
    std::ofstream f(dir / "bad.json");
    f << R"({"trials": 0, "algorithms": ["CEQ"], "smoothing": {"alpha": 2}})";
  }
  const CliResult bad = run("bench --config " + (dir / "bad.json").string());
  EXPECT_EQ(bad.code, 2);
  // problems missing, trials, algorithm, alpha: every violation listed
  std::size_t lines = 0;
  for (std::size_t pos = 0; (pos = bad.err.find("  - ", pos)) != std::string::npos; ++pos) ++lines;
  EXPECT_EQ(lines, 4u);
  fs::remove_all(dir);
}

TEST(Cli, RuntimeErrorExitOne) {
  const fs::path dir = scratch("plotbad");
  {
    std::ofstream f(dir / "agg.csv");
    f << "problem,algorithm,evals\nwoods,CES10,1\n";
  }
  const CliResult r = run("plot --input " + (dir / "agg.csv").string() + " --out " + (dir / "x.svg").string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("missing columns"), std::string::npos);
  fs::remove_all(dir);
}

TEST(Cli, PlotIsDeterministic) {
  const fs::path out = scratch("plot");
  ASSERT_EQ(run("bench --problem woods --algos CES10,CESX --trials 2 --budget 1000 --pop 200 --out " + out.string()).code, 0);
  for (const char* style : {"mean_ci", "semilog_median"}) {
    const std::string base = "plot --input " + (out / "aggregate.csv").string() + " --style " + style + " --out ";
    ASSERT_EQ(run(base + (out / "a.svg").string()).code, 0);
    ASSERT_EQ(run(base + (out / "b.svg").string()).code, 0);
    const std::string a = slurp(out / "a.svg");
    EXPECT_EQ(a, slurp(out / "b.svg"));
    EXPECT_NE(a.find("<svg"), std::string::npos);
  }
  fs::remove_all(out);
}

TEST(Cli, LabDemos) {
  const CliResult bv = run("lab bias_variance --reps 1000");
  ASSERT_EQ(bv.code, 0);
  EXPECT_EQ(bv.out.rfind("estimator,m,reps,mse,bias_sq,variance\n", 0), 0u);
  std::istringstream rows(bv.out);
  std::string line;
  std::getline(rows, line);
  int n = 0;
  while (std::getline(rows, line)) {
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string x; std::getline(ls, x, ',');) f.push_back(x);
    ASSERT_EQ(f.size(), 6u);
    const double mse = std::stod(f[3]), b = std::stod(f[4]), v = std::stod(f[5]);
    EXPECT_LE(std::abs(mse - b - v), 1e-12 * mse);
    ++n;
  }
  EXPECT_GT(n, 0);

  const CliResult ub = run("lab is_unbiased");
  ASSERT_EQ(ub.code, 0);
  EXPECT_NE(ub.out.find(",1\n"), std::string::npos);  // within_bound

  const fs::path dir = scratch("lab");
  ASSERT_EQ(run("lab naive_mco --m 2 --reps 500 --out " + (dir / "n.csv").string()).code, 0);
  const std::string csv = slurp(dir / "n.csv");
  const auto last = csv.substr(csv.rfind(',') + 1);
  EXPECT_GT(std::stod(last), 0.0);
  fs::remove_all(dir);
}

TEST(Cli, DeterministicAcrossThreadCounts) {
  const fs::path a = scratch("t1"), b = scratch("t4");
  const std::string args = "bench --problem shekel5 --algos CES10,CEMX --trials 3 --seed 7 --budget 1200 --pop 200 --out ";
  ASSERT_EQ(run(args + a.string(), "MCO_CE_THREADS=1").code, 0);
  ASSERT_EQ(run(args + b.string(), "MCO_CE_THREADS=4").code, 0);
  EXPECT_EQ(slurp(a / "raw.csv"), slurp(b / "raw.csv"));
  EXPECT_EQ(slurp(a / "aggregate.csv"), slurp(b / "aggregate.csv"));
  fs::remove_all(a);
  fs::remove_all(b);
}
