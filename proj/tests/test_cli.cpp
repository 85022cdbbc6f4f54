#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "wienerlab/io.hpp"
#include "wienerlab/random.hpp"

using namespace wienerlab;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(const std::vector<std::string>& args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli_main(args, out, err);
    set_worker_threads(1);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               (std::string("wienerlab_cli_") + ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(dir_);
        save_chaos(dir_ / "h2.json", ChaosElement::integral(make_kernel(2, 1, {{{1, 1}, 1.0}})));
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }
    void write(const std::string& name, const std::string& text) const { std::ofstream(dir_ / name) << text; }

    fs::path dir_;
};

}  // namespace

TEST_F(CliTest, MomentsOfSecondHermite) {
    const auto r = run({"moments", "--chaos", path("h2.json"), "--max", "4"});
    EXPECT_EQ(r.code, kExitPass);
    EXPECT_EQ(r.out, "m1=0\nm2=2\nm3=8\nm4=60\n");
}

TEST_F(CliTest, MomentAboveCapIsAnInputError) {
    save_chaos(dir_ / "h3.json", ChaosElement::integral(make_kernel(3, 1, {{{1, 1, 1}, 1.0}})));
    const auto r = run({"moments", "--chaos", path("h3.json"), "--max", "3"});
    EXPECT_EQ(r.code, kExitUsage);
    EXPECT_NE(r.err.find("order cap"), std::string::npos);
}

TEST_F(CliTest, EvalPrintsValue) {
    const auto r = run({"eval", "--chaos", path("h2.json"), "--point", "2"});
    EXPECT_EQ(r.code, kExitPass);
    EXPECT_EQ(r.out, "3\n");
}

TEST_F(CliTest, EvalWrongPointLength) {
    const auto r = run({"eval", "--chaos", path("h2.json"), "--point", "1,2"});
    EXPECT_EQ(r.code, kExitUsage);
    EXPECT_NE(r.err.find("expected 1 coordinates"), std::string::npos);
}

TEST_F(CliTest, SchemaErrorNamesFileAndField) {
    write("bad.json", R"({"dim": 2, "kernels": [{"order": 2, "entries": [{"idx": [2, 1], "coef": 1}]}]})");
    const auto r = run({"eval", "--chaos", path("bad.json"), "--point", "0,0"});
    EXPECT_EQ(r.code, kExitUsage);
    EXPECT_NE(r.err.find("bad.json:/kernels/0/entries/0/idx"), std::string::npos);
}

TEST_F(CliTest, UsageErrors) {
    EXPECT_EQ(run({}).code, kExitUsage);
    EXPECT_EQ(run({"frobnicate"}).code, kExitUsage);
    EXPECT_EQ(run({"sample", "--chaos", path("h2.json"), "-n", "10", "--out", path("s.csv")}).code, kExitUsage);
    EXPECT_EQ(run({"check", "identities"}).code, kExitUsage);
    EXPECT_EQ(run({"verify", "nonsense", "--config", path("x.json")}).code, kExitUsage);
}

TEST_F(CliTest, SampleWritesCsv) {
    const auto r = run({"sample", "--chaos", path("h2.json"), "-n", "5", "--seed", "3", "--out", path("s.csv")});
    ASSERT_EQ(r.code, kExitPass);
    const auto text = slurp(path("s.csv"));
    EXPECT_EQ(text.rfind("value\n", 0), 0u);
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 6);
    ASSERT_EQ(run({"sample", "--chaos", path("h2.json"), "-n", "5", "--seed", "3", "--out", path("t.csv")}).code, kExitPass);
    EXPECT_EQ(slurp(path("t.csv")), text);
}

TEST_F(CliTest, SampleVectorHeader) {
    std::ofstream(dir_ / "v.json") << to_json(pair_sum_vector(2)).dump();
    ASSERT_EQ(run({"sample", "--chaos", path("v.json"), "-n", "3", "--seed", "1", "--out", path("v.csv")}).code, kExitPass);
    EXPECT_EQ(slurp(path("v.csv")).rfind("x1,x2\n", 0), 0u);
}

TEST_F(CliTest, CheckIdentitiesPasses) {
    const auto r = run({"check", "identities", "--trials", "100", "--seed", "1"});
    EXPECT_EQ(r.code, kExitPass);
    EXPECT_NE(r.err.find("identities: pass"), std::string::npos);
    const auto j = Json::parse(r.out);
    EXPECT_EQ(validate_report_json(j), "");
}

TEST_F(CliTest, VerifyWritesReportAndIsThreadInvariant) {
    write("fm.json", R"({"experiment": "fourth-moment", "seed": 11, "n_samples": 4000, "k": 2,
                         "sequence": {"family": "pair-sum", "indices": [5, 20]}})");
    const auto a = run({"verify", "fourth-moment", "--config", path("fm.json"), "--out", path("a.json")});
    const auto b = run({"--threads", "3", "verify", "fourth-moment", "--config", path("fm.json"), "--out", path("b.json")});
    ASSERT_NE(a.code, kExitUsage) << a.err;
    EXPECT_EQ(a.code, b.code);
    EXPECT_EQ(slurp(path("a.json")), slurp(path("b.json")));
    const auto report = load_report(path("a.json"));
    EXPECT_EQ(report.rows.size(), 2u);
    EXPECT_EQ(report.verdict, recompute_verdict(report));
}

TEST_F(CliTest, VerifyCsvFormat) {
    write("fm.json", R"({"experiment": "fourth-moment", "seed": 11, "n_samples": 4000, "k": 2,
                         "sequence": {"family": "pair-sum", "indices": [5]}})");
    const auto r = run({"verify", "fourth-moment", "--config", path("fm.json"), "--format", "csv"});
    ASSERT_NE(r.code, kExitUsage) << r.err;
    EXPECT_EQ(r.out.rfind("index,", 0), 0u);
}

TEST_F(CliTest, VerifyRejectsMismatchedExperimentAndMissingSeed) {
    write("fm.json", R"({"experiment": "fourth-moment", "seed": 1, "n_samples": 4000, "k": 2,
                         "sequence": {"family": "pair-sum", "indices": [5]}})");
    EXPECT_EQ(run({"verify", "dm", "--config", path("fm.json")}).code, kExitUsage);
    write("noseed.json", R"({"experiment": "dm", "n_samples": 4000})");
    const auto r = run({"verify", "dm", "--config", path("noseed.json")});
    EXPECT_EQ(r.code, kExitUsage);
    EXPECT_NE(r.err.find("/seed"), std::string::npos);
}
