#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fks/cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "fks");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = fks::cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "fks_cli_tests";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("tau writes the documented schema") {
  const fs::path out = scratch("tau.csv");
  const Run r = run({"tau", "--degree", "0", "--paths", "200", "--grid-exp", "10", "--seed", "42",
                     "--out", out.string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("tau r=0") != std::string::npos);
  const std::string csv = slurp(out);
  CHECK(csv.rfind("r,n_samples,m,estimate,std_error,censoring_rate\n0,200,1,", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}

TEST_CASE("configuration errors exit with 2") {
  CHECK(run({"tau", "--paths", "200"}).code == 2);
  CHECK(run({"tau", "--paths", "200"}).err.find("--out") != std::string::npos);
  CHECK(run({"tau", "--bogus", "1", "--out", scratch("x.csv").string()}).code == 2);
  CHECK(run({"converge", "--sde", "gbm", "--out", scratch("x.csv").string()}).code == 2);
  CHECK(run({"converge", "--q", "7", "--out", scratch("x.csv").string()}).code == 2);
  CHECK(run({"plot"}).code == 2);
  CHECK(run({}).code == 2);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("unwritable output is a configuration error") {
  CHECK(run({"tau", "--paths", "100", "--grid-exp", "8", "--out", "/nonexistent/dir/t.csv"}).code == 2);
}

TEST_CASE("converge output is byte-identical across runs and thread counts") {
  const fs::path a = scratch("conv_a.csv");
  const fs::path b = scratch("conv_b.csv");
  const std::vector<std::string> common{"converge", "--method", "dagger,star,euler,min", "--sde",
                                        "ramp-sigma", "--k", "16,32", "--q", "1,2", "--paths", "6",
                                        "--grid-exp", "11", "--tau-paths", "200", "--tau-grid-exp",
                                        "8", "--seed", "7"};
  auto with = [&](const fs::path& out, const std::string& threads) {
    auto args = common;
    args.insert(args.end(), {"--out", out.string(), "--threads", threads});
    return run(args);
  };
  REQUIRE(with(a, "1").code == 0);
  REQUIRE(with(b, "3").code == 0);
  const std::string csv = slurp(a);
  CHECK(csv == slurp(b));
  CHECK(csv.rfind("method,k,q,n_paths,e_q_hat,std_error,sqrt_k_times_eq,predicted_constant,ratio\n", 0) == 0);
  CHECK(csv.find("\ndagger-as-min-surrogate,16,1,6,") != std::string::npos);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 4 * 2 * 2);
}

TEST_CASE("compare and gamma subcommands") {
  const fs::path c = scratch("cmp.csv");
  REQUIRE(run({"compare", "--method", "dagger,star", "--sde", "ramp-sigma", "--k", "32", "--paths",
               "4", "--grid-exp", "11", "--tau-paths", "200", "--tau-grid-exp", "8", "--out",
               c.string()})
              .code == 0);
  CHECK(slurp(c).rfind("method_a,method_b,k,q,n_paths,e_q_a,e_q_b,ratio,predicted_ratio\ndagger,star,32,1,4,", 0) == 0);

  const fs::path g = scratch("gamma.csv");
  REQUIRE(run({"gamma", "--k", "8,32", "--degree", "1", "--paths", "5", "--grid-exp", "12",
               "--tau-paths", "200", "--tau-grid-exp", "8", "--out", g.string()})
              .code == 0);
  CHECK(slurp(g).rfind("k,r,n_paths,median_gamma,scaled_median\n8,1,5,", 0) == 0);
}

TEST_CASE("config files, overrides and echo") {
  const fs::path cfg = scratch("cfg.json");
  const fs::path out = scratch("cfg_out.csv");
  const fs::path echo = scratch("echo.json");
  {
    std::ofstream f(cfg);
    f << nlohmann::json{{"degree", 1}, {"paths", 150}, {"grid_exp", 9}, {"seed", 5}, {"out", "ignored.csv"}}.dump();
  }
  REQUIRE(run({"tau", "--config", cfg.string(), "--out", out.string(), "--echo-config", echo.string()}).code == 0);
  CHECK(slurp(out).find("\n1,150,1,") != std::string::npos);
  const auto j = nlohmann::json::parse(slurp(echo));
  CHECK(j.at("degree") == 1);
  CHECK(j.at("out") == out.string());
  CHECK(j.at("grid_exp") == 9);
  CHECK(j.contains("library_version"));

  std::ofstream(cfg) << "{ not json";
  CHECK(run({"tau", "--config", cfg.string(), "--out", out.string()}).code == 2);
}
