#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("qbundle_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  // Runs the CLI; stdout and stderr land in files next to the artifacts.
  int run(const std::string& args) {
    const std::string cmd =
        std::string(QBUNDLE_EXE) + " " + args + " > " + path("stdout.txt") + " 2> " + path("stderr.txt");
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string read(const std::string& name) const {
    std::ifstream in(path(name));
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  Json json(const std::string& name) const { return Json::parse(read(name)); }

  void write(const std::string& name, const std::string& text) const { std::ofstream(path(name)) << text; }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, ConstructLedger) {
  ASSERT_EQ(run("construct --n 2 --r 2 --variant c --seed 7 --out " + path("c.json")), 0);
  const auto j = json("c.json");
  EXPECT_EQ(j.at("ledger").at("c").at("degrees"), Json::array({0, 2, 8, 10}));
  EXPECT_EQ(j.at("ledger").at("cprime").at("degrees"), Json::array({1, 1, 9, 9}));
  EXPECT_EQ(j.at("diagonal_model").at("unirationality").at("case"), "rank3");
  EXPECT_NE(read("stdout.txt").find("degrees: 0 2 8 10"), std::string::npos);
}

TEST_F(Cli, ConstructRejectsOutOfRangeR) {
  EXPECT_EQ(run("construct --n 2 --r 3 --variant c --seed 1 --out " + path("c.json")), 1);
  EXPECT_FALSE(fs::exists(path("c.json")));
}

TEST_F(Cli, ConstructIsDeterministic) {
  ASSERT_EQ(run("construct --n 3 --r 4 --variant ctildeprime --seed 5 --out " + path("a.json")), 0);
  ASSERT_EQ(run("construct --n 3 --r 4 --variant ctildeprime --seed 5 --out " + path("b.json")), 0);
  EXPECT_EQ(read("a.json"), read("b.json"));
}

TEST_F(Cli, ConstructResampleExhausted) {
  EXPECT_EQ(run("construct --n 4 --r 8 --seed 1 --max-resample 0 --out " + path("c.json")), 2);
}

TEST_F(Cli, VerifySeededRun) {
  ASSERT_EQ(run("verify --n 3 --seed 7 --out " + path("v.json")), 0);
  const auto j = json("v.json");
  EXPECT_EQ(j.at("verdict"), "certified");
  for (const char* k : {"C1", "C2", "C3", "C4"}) EXPECT_TRUE(j.at("checks").at(k).at("passed").get<bool>()) << k;
}

TEST_F(Cli, VerifyCorruptedConfig) {
  ASSERT_EQ(run("verify --n 2 --seed 7 --out " + path("v.json")), 0);
  auto cfg = json("v.json").at("config");
  // bump one coefficient of g_{1,1}
  auto& term = cfg["g"][0][1]["terms"][0][1];
  term = std::to_string(std::stoi(term.get<std::string>()) + 1);
  write("bad.json", cfg.dump());
  EXPECT_EQ(run("verify --config " + path("bad.json") + " --out " + path("out.json")), 2);
  EXPECT_NE(read("stderr.txt").find("failed check: C4"), std::string::npos);
  EXPECT_NE(read("stdout.txt").find("C4 FAIL"), std::string::npos);
  EXPECT_EQ(json("out.json").at("verdict"), "not-certified");
}

TEST_F(Cli, VerifyMalformedJson) {
  write("bad.json", "{\"schema\": \"cto/1\", ");
  EXPECT_EQ(run("verify --config " + path("bad.json")), 1);
  EXPECT_EQ(run("verify --config " + path("missing.json")), 1);
}

TEST_F(Cli, VerifyReadsItsOwnCertificate) {
  ASSERT_EQ(run("verify --n 2 --seed 3 --out " + path("v.json")), 0);
  ASSERT_EQ(run("verify --config " + path("v.json") + " --out " + path("w.json")), 0);
  EXPECT_EQ(read("v.json"), read("w.json"));
}

TEST_F(Cli, Classify) {
  ASSERT_EQ(run("classify --n 4 --r 8 --out " + path("k.json")), 0);
  auto j = json("k.json");
  EXPECT_EQ(j.at("k"), 4);
  EXPECT_TRUE(j.at("cto_band").get<bool>());
  ASSERT_EQ(run("classify --n 2 --r 1 --d 5 --out " + path("k.json")), 0);
  j = json("k.json");
  EXPECT_EQ(j.at("thresholds")[0].at("name"), "type-degrees");
  EXPECT_EQ(j.at("thresholds")[0].at("bound"), 5);
  EXPECT_TRUE(j.at("thresholds")[0].at("met").get<bool>());
  ASSERT_EQ(run("classify --n 2 --r 3 --out " + path("k.json")), 0);
  EXPECT_TRUE(json("k.json").at("lang_rational").get<bool>());
  EXPECT_EQ(run("classify --n 0 --r 3"), 1);
}

TEST_F(Cli, Hypersurface) {
  ASSERT_EQ(run("hypersurface --n 2 --r 1 --d 2 --seed 1 --out " + path("h.json")), 0);
  const auto j = json("h.json");
  EXPECT_EQ(j.at("type"), Json::array({2, 2, 4}));
  EXPECT_EQ(j.at("hypersurface").at("degree"), 4);
  EXPECT_EQ(j.at("hypersurface").at("n"), 4);
  EXPECT_EQ(run("hypersurface --n 7 --r 1 --d 2 --seed 1"), 1);
}

TEST_F(Cli, DoubleCover) {
  ASSERT_EQ(run("doublecover --n 2 --r 2 --d 2 --seed 1 --out " + path("d.json")), 0);
  EXPECT_EQ(json("d.json").at("type"), Json::array({0, 2, 2, 4}));
  EXPECT_EQ(run("doublecover --n 2 --r 1 --d 3 --seed 1 --out " + path("e.json")), 1);
  EXPECT_FALSE(fs::exists(path("e.json")));
}

TEST_F(Cli, ResidueThroughFiles) {
  // (x1 x2, x2 (x0 + x2)) along x1 = 0
  const Json table = {{"n", 2},
                      {"factors",
                       {{{"kind", "linear"}, {"form", {{"n", 2}, {"degree", 1}, {"terms", {{{0, 1, 0}, "1"}}}}}},
                        {{"kind", "linear"}, {"form", {{"n", 2}, {"degree", 1}, {"terms", {{{0, 0, 1}, "1"}}}}}},
                        {{"kind", "linear"},
                         {"form", {{"n", 2}, {"degree", 1}, {"terms", {{{1, 0, 0}, "1"}, {{0, 0, 1}, "1"}}}}}}}}};
  const Json doc = {{"schema", "residue/1"},
                    {"table", table},
                    {"class", {{"degree", 2}, {"symbols", {{{0, 1}, {1, 2}}}}}}};
  write("c.json", doc.dump());
  ASSERT_EQ(run("residue --class " + path("c.json") + " --divisor 0 --out " + path("r.json")), 0);
  const auto r = json("r.json");
  EXPECT_EQ(r.at("schema"), "residue/1");
  ASSERT_EQ(r.at("class").at("symbols").size(), 1u);
  EXPECT_EQ(r.at("class").at("symbols")[0][0].size(), 2u);

  // all entries units along x0 + x2: zero
  ASSERT_EQ(run("residue --class " + path("c.json") + " --divisor 2 --out " + path("r.json")), 0);
  // the divisor x0 + x2 appears once in the second entry, so the residue is (class of x1 x2) restricted
  EXPECT_EQ(json("r.json").at("class").at("symbols").size(), 1u);

  const Json units = {{"schema", "residue/1"},
                      {"table", table},
                      {"class", {{"degree", 1}, {"symbols", {{{1, 2}}}}}}};
  write("u.json", units.dump());
  ASSERT_EQ(run("residue --class " + path("u.json") + " --divisor 0 --out " + path("r.json")), 0);
  EXPECT_TRUE(json("r.json").at("class").at("symbols").empty());

  EXPECT_EQ(run("residue --class " + path("u.json") + " --divisor 9"), 1);
}

TEST_F(Cli, ResidueOutsideUniverse) {
  // x0^2 + x1^2 + x2^2 restricted to x2 = 0 has rank 2 and does not split over Q
  const Json table = {
      {"n", 2},
      {"factors",
       {{{"kind", "linear"}, {"form", {{"n", 2}, {"degree", 1}, {"terms", {{{0, 0, 1}, "1"}}}}}},
        {{"kind", "linear"}, {"form", {{"n", 2}, {"degree", 1}, {"terms", {{{0, 1, 0}, "1"}}}}}},
        {{"kind", "quadric"},
         {"form", {{"n", 2}, {"degree", 2}, {"terms", {{{2, 0, 0}, "1"}, {{0, 2, 0}, "1"}, {{0, 0, 2}, "1"}}}}}}}}};
  const Json doc = {{"schema", "residue/1"},
                    {"table", table},
                    {"class", {{"degree", 2}, {"symbols", {{{0, 1}, {2}}}}}}};
  write("c.json", doc.dump());
  EXPECT_EQ(run("residue --class " + path("c.json") + " --divisor 0"), 2);
}

TEST_F(Cli, ManifestCarriesTiming) {
  ASSERT_EQ(run("classify --n 3 --r 5 --out " + path("k.json") + " --manifest " + path("m.json")), 0);
  const auto m = json("m.json");
  EXPECT_EQ(m.at("command"), "classify");
  EXPECT_TRUE(m.contains("timing_ms"));
  EXPECT_FALSE(json("k.json").contains("timing_ms"));
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run(""), 1);
  EXPECT_EQ(run("construct --n 2"), 1);
  EXPECT_EQ(run("construct --n 2 --r 2 --variant bogus"), 1);
}
