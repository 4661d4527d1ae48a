#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kConfigs = WCGA_CONFIG_DIR;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("wcga_cli_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Result {
  int code;
  std::string err;
};

/// Runs the real binary; stderr is captured through a file.
Result cli(const std::string& args, const fs::path& out) {
  const fs::path err = out.parent_path() / (out.filename().string() + ".stderr");
  const std::string cmd = std::string(WCGA_CLI_PATH) + " " + args + " -o '" + out.string() + "' > /dev/null 2> '" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(err)};
}

Result cli_raw(const std::string& args) {
  const std::string cmd = std::string(WCGA_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, {}};
}

fs::path write_config(const fs::path& dir, const std::string& name, const std::string& body) {
  const fs::path p = dir / name;
  std::ofstream(p) << body;
  return p;
}

std::map<std::string, std::string> directory_bytes(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) out[e.path().filename().string()] = slurp(e.path());
  return out;
}

json manifest(const fs::path& out) { return json::parse(slurp(out / "manifest.json")); }

}  // namespace

TEST(CliUsage, UnknownOrMissingSubcommand) {
  EXPECT_EQ(cli_raw("frobnicate -c x.json").code, 2);
  EXPECT_EQ(cli_raw("").code, 2);
  EXPECT_EQ(cli_raw("verify-usd").code, 2);
  EXPECT_EQ(cli_raw("--help").code, 0);
  EXPECT_EQ(cli_raw("--version").code, 0);
}

TEST(CliUsage, MissingConfigFile) {
  const auto out = scratch("missing");
  EXPECT_EQ(cli("verify-usd -c /nonexistent/config.json", out).code, 2);
}

TEST(CliUsage, MalformedJsonReportsPosition) {
  const auto dir = scratch("malformed");
  const auto cfg = write_config(dir, "bad.json", "{\n  \"d\": 1,\n  \"p\": ,\n}\n");
  const auto r = cli("verify-usd -c '" + cfg.string() + "'", dir / "out");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("line 3"), std::string::npos) << r.err;
}

TEST(CliUsage, UnknownFieldIsNamed) {
  const auto dir = scratch("unknown");
  const auto cfg = write_config(dir, "typo.json", R"({"d": 1, "system_level": 2, "u": 2, "points": {"kind": "grid", "per_axis": 9}, "trails": 5})");
  const auto r = cli("verify-usd -c '" + cfg.string() + "'", dir / "out");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("trails"), std::string::npos) << r.err;
}

TEST(CliUsage, ZeroThreadsRejected) {
  const auto out = scratch("threads0");
  EXPECT_EQ(cli("verify-usd -c '" + (kConfigs / "verify_usd_grid.json").string() + "' --threads 0", out).code, 2);
}

TEST(CliVerifyUsd, FullGridPasses) {
  const auto out = scratch("grid");
  ASSERT_EQ(cli("verify-usd -c '" + (kConfigs / "verify_usd_grid.json").string() + "'", out).code, 0);
  const auto rep = json::parse(slurp(out / "usd.json"));
  EXPECT_NEAR(rep.at("lower_ratio").get<double>(), 1.0, 1e-10);
  EXPECT_NEAR(rep.at("upper_ratio").get<double>(), 1.0, 1e-10);
  EXPECT_TRUE(rep.at("pass").get<bool>());
}

TEST(CliVerifyUsd, SinglePointFailsWithExitOne) {
  const auto dir = scratch("single");
  const auto cfg = write_config(dir, "one.json", R"({"d": 1, "system_level": 2, "u": 2, "points": {"kind": "random", "m": 1}, "trials": 50})");
  EXPECT_EQ(cli("verify-usd -c '" + cfg.string() + "'", dir / "out").code, 1);
  EXPECT_FALSE(manifest(dir / "out").at("summary").at("pass").get<bool>());
}

TEST(CliRates, WritesTablesPlotAndSlope) {
  const auto out = scratch("rates");
  ASSERT_EQ(cli("rates -c '" + (kConfigs / "rates_small.json").string() + "'", out).code, 0);
  for (const char* f : {"rates.csv", "rates.json", "linear.csv", "linear.json", "rates.svg", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(out / f)) << f;
  }
  const auto m = manifest(out);
  EXPECT_LT(m.at("summary").at("wcga_fit").at("slope").get<double>(), -1.0);
  EXPECT_TRUE(m.at("summary").at("linear_fit").contains("slope"));
  EXPECT_NE(slurp(out / "rates.svg").find("<svg"), std::string::npos);
}

TEST(CliManifest, RecordsSeedHashAndVersions) {
  const auto out = scratch("manifest");
  ASSERT_EQ(cli("verify-usd -c '" + (kConfigs / "verify_usd_grid.json").string() + "' --seed 77", out).code, 0);
  const auto m = manifest(out);
  EXPECT_EQ(m.at("seed").get<std::uint64_t>(), 77u);
  EXPECT_EQ(m.at("config_hash").get<std::string>().rfind("fnv1a64:", 0), 0u);
  EXPECT_TRUE(m.at("versions").contains("eigen"));
  EXPECT_EQ(m.at("subcommand").get<std::string>(), "verify-usd");

  const auto dir = scratch("noseed");
  const auto cfg = write_config(dir, "noseed.json", R"({"d": 1, "system_level": 2, "u": 2, "points": {"kind": "grid", "per_axis": 9}})");
  ASSERT_EQ(cli("verify-usd -c '" + cfg.string() + "'", dir / "out").code, 0);
  EXPECT_EQ(manifest(dir / "out").at("seed").get<std::uint64_t>(), 1u);
}

TEST(CliDeterminism, EverySubcommandRerunsByteIdentical) {
  const std::pair<const char*, const char*> runs[] = {
      {"discretize", "discretize_J4.json"},   {"verify-usd", "verify_usd_random.json"},
      {"rip-check", "rip_check.json"},         {"incoherence", "incoherence.json"},
      {"recover", "recover_sparse.json"},      {"rates", "rates_small.json"},
      {"lebesgue", "lebesgue_p2.json"},        {"oracle-compare", "oracle_compare_small.json"},
      {"plot", "plot_rates.json"}};
  for (const auto& [sub, cfg] : runs) {
    const auto a = scratch(std::string(sub) + "_a"), b = scratch(std::string(sub) + "_b");
    const std::string args = std::string(sub) + " -c '" + (kConfigs / cfg).string() + "'";
    const auto ra = cli(args, a);
    const auto rb = cli(args + " --threads 3", b);
    EXPECT_EQ(ra.code, 0) << sub << ": " << ra.err;
    EXPECT_EQ(ra.code, rb.code) << sub;
    const auto fa = directory_bytes(a), fb = directory_bytes(b);
    EXPECT_EQ(fa.size(), fb.size()) << sub;
    for (const auto& [name, bytes] : fa) EXPECT_TRUE(fb.count(name) && fb.at(name) == bytes) << sub << "/" << name;
  }
}

TEST(CliSeed, OverrideChangesRandomOutputs) {
  const auto a = scratch("seed_a"), b = scratch("seed_b");
  const std::string args = "discretize -c '" + (kConfigs / "discretize_J4.json").string() + "'";
  ASSERT_EQ(cli(args + " --seed 100", a).code, cli(args + " --seed 101", b).code);
  EXPECT_NE(slurp(a / "points.csv"), slurp(b / "points.csv"));
}
