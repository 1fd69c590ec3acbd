#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "atd/cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
    int status;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    int status = atd::cli::run_command(std::move(args), out, err);
    return {status, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir = fs::temp_directory_path() / ("atd_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }

    std::vector<std::string> train_args(const fs::path& out) const {
        return {"--output-dir", out.string(), "train", "--synthetic", "--per-class", "30", "--epochs", "5",
            "--embedding-dim", "8", "--hidden", "8", "--seed", "3", "--quiet", "--learning-rate", "0.001"};
    }

    fs::path dir;
};

}

TEST_F(CliTest, NoArgumentsIsUsageError) {
    auto r = run({});
    EXPECT_EQ(r.status, 2);
    EXPECT_NE(r.err.find("Usage"), std::string::npos);
}

TEST_F(CliTest, UnknownOptionIsArgumentError) {
    auto r = run({"templates", "--categories", "4", "--bogus"});
    EXPECT_EQ(r.status, 2);
    EXPECT_EQ(r.err.rfind("error category=argument message=", 0), 0u) << r.err;
}

TEST_F(CliTest, TemplatesListing) {
    auto r = run({"templates", "--categories", "4"});
    ASSERT_EQ(r.status, 0);
    std::istringstream in(r.out);
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(in, line)) lines.push_back(line);
    ASSERT_EQ(lines.size(), 8u);
    EXPECT_EQ(lines[1], "0,inner,l0,l0,l0,0,0,0/1,0/1");
    EXPECT_EQ(lines[4], "3,inner,l3,l3,l3,0,0,0/1,0/1");
    EXPECT_EQ(lines[5], "4,boundary,l0,l1,l3,0.3333333333333333,0.6666666666666666,1/3,2/3");
    EXPECT_EQ(lines[7], "6,full_rotation,l0,l3,l0,1,1,1/1,1/1");
}

TEST_F(CliTest, TemplatesRejectsTwoCategories) {
    auto r = run({"templates", "--categories", "2"});
    EXPECT_EQ(r.status, 1);
    EXPECT_EQ(r.err.rfind("error category=unsupported-category-count", 0), 0u) << r.err;
}

TEST_F(CliTest, VerifyMetricWritesReport) {
    auto r = run({"--output-dir", dir.string(), "verify-metric", "--dim", "8", "--samples", "500", "--seed", "2"});
    EXPECT_EQ(r.status, 0) << r.err;
    EXPECT_TRUE(fs::exists(dir / "axioms.csv"));
    EXPECT_NE(slurp(dir / "axioms.txt").find("all_passed=true"), std::string::npos);
}

TEST_F(CliTest, TrainEvalMatrixPipeline) {
    auto t = run(train_args(dir));
    ASSERT_EQ(t.status, 0) << t.err;
    ASSERT_TRUE(fs::exists(dir / "model.atd"));
    auto history = slurp(dir / "history.csv");
    EXPECT_EQ(std::count(history.begin(), history.end(), '\n'), 6);

    auto model = (dir / "model.atd").string();
    auto e = run({"--output-dir", dir.string(), "eval", "--model", model, "--k", "1", "3"});
    ASSERT_EQ(e.status, 0) << e.err;
    auto metrics = slurp(dir / "metrics.csv");
    EXPECT_EQ(metrics.rfind("k,retrieval_accuracy,classification_error\n1,", 0), 0u) << metrics;
    EXPECT_NE(metrics.find("\n3,"), std::string::npos);

    auto m = run({"--output-dir", dir.string(), "matrix", "--model", model});
    ASSERT_EQ(m.status, 0) << m.err;
    EXPECT_NE(m.out.find("monotonicity="), std::string::npos);
    EXPECT_TRUE(fs::exists(dir / "matrix.csv"));
}

TEST_F(CliTest, RerunsAreByteIdentical) {
    auto a = dir / "a", b = dir / "b";
    ASSERT_EQ(run(train_args(a)).status, 0);
    ASSERT_EQ(run(train_args(b)).status, 0);
    EXPECT_EQ(slurp(a / "model.atd"), slurp(b / "model.atd"));
    EXPECT_EQ(slurp(a / "history.csv"), slurp(b / "history.csv"));
    ASSERT_EQ(run({"--output-dir", a.string(), "eval", "--model", (a / "model.atd").string()}).status, 0);
    ASSERT_EQ(run({"--output-dir", b.string(), "eval", "--model", (b / "model.atd").string()}).status, 0);
    EXPECT_EQ(slurp(a / "metrics.csv"), slurp(b / "metrics.csv"));
}

TEST_F(CliTest, OutputDirectoryFromEnvironment) {
    auto target = dir / "from_env";
    ::setenv(atd::cli::output_dir_env, target.string().c_str(), 1);
    auto r = run({"verify-metric", "--samples", "50"});
    ::unsetenv(atd::cli::output_dir_env);
    EXPECT_EQ(r.status, 0) << r.err;
    EXPECT_TRUE(fs::exists(target / "axioms.csv"));
}

TEST_F(CliTest, MissingDataSourceIsReported) {
    auto r = run({"--output-dir", dir.string(), "train", "--epochs", "1"});
    EXPECT_EQ(r.status, 1);
    EXPECT_EQ(r.err.rfind("error category=argument message=", 0), 0u) << r.err;
}

TEST_F(CliTest, CorruptModelIsReported) {
    auto path = dir / "bad.atd";
    std::ofstream(path) << "ATD-MODEL 1\ncrc32 00000000\nend\n";
    auto r = run({"--output-dir", dir.string(), "eval", "--model", path.string()});
    EXPECT_EQ(r.status, 1);
    EXPECT_EQ(r.err.rfind("error category=corruption message=", 0), 0u) << r.err;
}
