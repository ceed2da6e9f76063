#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>
#include <algorithm>
#include <unistd.h>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out, err;
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

Run run(const std::string& args, const std::string& env = "") {
  static int k = 0;
  const fs::path dir = fs::temp_directory_path() / ("qtime1d_cli_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const fs::path o = dir / ("o" + std::to_string(k)), e = dir / ("e" + std::to_string(k));
  ++k;
  const std::string cmd = env + " " + QTIME1D_CLI + " " + args + " >" + o.string() + " 2>" + e.string();
  const int st = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  r.out = slurp(o);
  r.err = slurp(e);
  return r;
}

const std::string kData = QTIME1D_DATA;

int lines(const std::string& s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST(Cli, MissingPotentialNamesPath) {
  const auto r = run("amplitudes --potential missing.json --pmin 1 --pmax 2");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("missing.json"), std::string::npos);
  EXPECT_EQ(lines(r.err), 1);
}

TEST(Cli, UnknownFlagPrintsUsage) {
  const auto r = run("amplitudes --potential " + kData + "/well.json --pmin 1 --pmax 2 --frobnicate 3");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("Usage"), std::string::npos);
  EXPECT_EQ(run("nonsense").code, 2);
  EXPECT_EQ(run("--help").code, 0);
}

TEST(Cli, DomainErrorsExitTwoWithOneLine) {
  for (const std::string& a : std::vector<std::string>{"source --omega0 1.5 --x 1 --tmin 1 --tmax 2", "amplitudes --potential " + kData + "/well.json --pmin -1 --pmax 2",
                              "survival --poles " + kData + "/well.json --tmin 1 --tmax 2", "decay-slope --tmin 1 --tmax 10"}) {
    const auto r = run(a);
    EXPECT_EQ(r.code, 2) << a;
    EXPECT_EQ(lines(r.err), 1) << a << ": " << r.err;
  }
}

TEST(Cli, CsvHeaderAndFullPrecision) {
  const auto r = run("amplitudes --potential " + kData + "/barrier_v5_d1.json --pmin 0.5 --pmax 5 --n 7");
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream s(r.out);
  std::string header, row;
  std::getline(s, header);
  EXPECT_EQ(header, "p,ReT,ImT,absT2,phi_T,ReR_l,ImR_l,ReR_r,ImR_r");
  std::getline(s, row);
  const std::string first = row.substr(row.find(',') + 1, row.find(',', row.find(',') + 1) - row.find(',') - 1);
  std::string digits;
  for (char c : first.substr(0, first.find('e')))
    if (std::isdigit(static_cast<unsigned char>(c))) digits += c;
  EXPECT_GE(digits.size() - digits.find_first_not_of('0'), 16u) << first;
  EXPECT_EQ(lines(r.out), 8);
}

TEST(Cli, JsonFormatFromExtensionAndFlag) {
  const fs::path p = fs::temp_directory_path() / "qtime1d_cli_amp.json";
  const auto r = run("amplitudes --potential " + kData + "/well.json --pmin 0.5 --pmax 2 --n 5 --out " + p.string());
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(slurp(p));
  EXPECT_EQ(j["columns"].size(), 9u);
  EXPECT_EQ(j["rows"].size(), 5u);
  const auto r2 = run("source-scales --omega0 0.75 --x 10 --format csv");
  ASSERT_EQ(r2.code, 0) << r2.err;
  EXPECT_EQ(r2.out.rfind("units,omega0,kappa0,tau", 0), 0u);
  fs::remove(p);
}

TEST(Cli, ByteIdenticalAcrossThreadCounts) {
  for (const std::string& a : std::vector<std::string>{"times --potential " + kData + "/double_barrier.json --quantity qmatrix --pmin 0.5 --pmax 3 --n 40",
                              "survival --poles " + kData + "/poles_resonance.json --tmin 0.01 --tmax 100 --n 30",
                              "source --omega0 0.6 --x 4 --tmin 0.5 --tmax 40 --n 50",
                              "packet --potential " + kData + "/barrier_v5_d1.json --xc -15 --pc 4 --delta 2 --a -10 --b 11 --tmax 12 --n 20"}) {
    const auto r1 = run("--threads 1 " + a);
    const auto r4 = run("--threads 4 " + a);
    const auto re = run(a, "QTIME1D_THREADS=3");
    ASSERT_EQ(r1.code, 0) << r1.err;
    EXPECT_EQ(r1.out, r4.out) << a;
    EXPECT_EQ(r1.out, re.out) << a;
    EXPECT_EQ(r1.out, run("--threads 1 " + a).out) << a;
  }
  EXPECT_EQ(run("faddeeva-selftest", "QTIME1D_THREADS=zero").code, 2);
}

TEST(Cli, SelftestResidualsSmall) {
  const auto r = run("faddeeva-selftest");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_LT(j["reflection"].get<double>(), 1e-11);
  EXPECT_LT(j["conjugation"].get<double>(), 1e-11);
  EXPECT_LT(j["region_switch"].get<double>(), 1e-12);
}

TEST(Cli, ReproduceFig1) {
  const fs::path dir = fs::temp_directory_path() / "qtime1d_cli_fig";
  const auto r = run("reproduce fig1 --out-dir " + dir.string());
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = slurp(dir / "fig1.csv");
  EXPECT_EQ(csv.rfind("p,phi_T_d1,phi_T_d2,phi_T_d3\n", 0), 0u);
  EXPECT_EQ(lines(csv), 601);
  EXPECT_EQ(run("reproduce fig9 --out-dir " + dir.string()).code, 2);
  fs::remove_all(dir);
}

TEST(Cli, PacketTimesJson) {
  const auto r = run("packet-times --potential " + kData + "/barrier_v5_d1.json --xc -15 --pc 4 --delta 2 --a -10 --b 11");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_LT(j["residuals"]["t_out_b"].get<double>(), 5e-3);
  EXPECT_NEAR(j["momentum"]["P_T"].get<double>() + j["momentum"]["P_R"].get<double>(), 1, 1e-6);
  EXPECT_LT(j["dwell"]["residual"].get<double>(), 1e-2);
}
