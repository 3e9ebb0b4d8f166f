#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "kreisslab_cli/cli.hpp"
#include "test_support.hpp"

namespace kt = kreisslab::testing;
namespace fs = std::filesystem;
using kreisslab::cli::ExitCode;

namespace {

struct CliRun {
    int code = 0;
    std::string out;
    std::string err;
};

CliRun invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "kreisslab");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    CliRun r;
    r.code = kreisslab::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / "kreisslab_cli_test";
    fs::create_directories(d);
    return d / name;
}

} // namespace

TEST(Cli, AnalyzeKreiss) {
    const CliRun r = invoke({"analyze", kt::problem_path("example3"), "--norm", "kreiss"});
    EXPECT_EQ(r.code, static_cast<int>(ExitCode::kOk));
    EXPECT_NE(r.out.find("kreiss = 0.1715"), std::string::npos) << r.out;
}

TEST(Cli, AnalyzeCertifiedM0) {
    const CliRun r = invoke({"analyze", kt::problem_path("example3"), "--norm", "m0", "--certify"});
    EXPECT_EQ(r.code, 0) << r.out << r.err;
}

TEST(Cli, UnstableExitsTwo) {
    EXPECT_EQ(invoke({"analyze", kt::problem_path("unstable")}).code, static_cast<int>(ExitCode::kUnstable));
}

TEST(Cli, SchemaErrorsExitThree) {
    const fs::path bad = scratch("bad.json");
    std::ofstream(bad) << R"({"schema_version": 1, "system": {"A": [[-1]]}, "extra": 1})";
    EXPECT_EQ(invoke({"analyze", bad.string()}).code, static_cast<int>(ExitCode::kSchema));
    EXPECT_EQ(invoke({"analyze", kt::problem_path("does_not_exist")}).code, static_cast<int>(ExitCode::kSchema));
    EXPECT_EQ(invoke({"analyze", kt::problem_path("example3"), "--norm", "bogus"}).code,
              static_cast<int>(ExitCode::kSchema));
    EXPECT_EQ(invoke({"simulate", kt::problem_path("brunton_k1"), "--t-on", "200"}).code,
              static_cast<int>(ExitCode::kSchema));
    EXPECT_EQ(invoke({}).code, static_cast<int>(ExitCode::kSchema));
}

TEST(Cli, CertifyVerdicts) {
    EXPECT_EQ(invoke({"certify", kt::problem_path("brunton_static_k1"), "--method", "window"}).code, 0);
    EXPECT_EQ(invoke({"certify", kt::problem_path("brunton_static_k1"), "--method", "bendixson"}).code, 0);
    const CliRun b = invoke({"certify", kt::problem_path("brunton_static_printed"), "--method", "window"});
    EXPECT_EQ(b.code, static_cast<int>(ExitCode::kFail));
    EXPECT_NE(b.out.find("BOUNDARY"), std::string::npos);
    EXPECT_EQ(invoke({"certify", kt::problem_path("brunton_k1"), "--method", "dcgain"}).code, 0);
    EXPECT_EQ(invoke({"certify", kt::problem_path("lorenz28_qc_x"), "--method", "qc"}).code, 0);
}

TEST(Cli, YorkeWithSampleOverride) {
    const CliRun r = invoke({"certify", kt::problem_path("brunton_yorke"), "--method", "yorke", "--samples", "5000"});
    EXPECT_EQ(r.code, 0) << r.out << r.err;
    EXPECT_NE(r.out.find("PASS"), std::string::npos);
}

TEST(Cli, SynthesisFailureExitsFour) {
    EXPECT_EQ(invoke({"synthesize", kt::problem_path("zero_bu"), "--restarts", "2"}).code,
              static_cast<int>(ExitCode::kSynthesisFailed));
}

TEST(Cli, SynthesizeWritesController) {
    const fs::path out = scratch("K.json");
    fs::remove(out);
    const CliRun r = invoke({"synthesize", kt::problem_path("lorenz_synth"), "--restarts", "2", "--out", out.string()});
    EXPECT_EQ(r.code, 0) << r.out << r.err;
    EXPECT_TRUE(fs::exists(out));
}

TEST(Cli, SimulateWritesCsv) {
    const fs::path out = scratch("traj.csv");
    const CliRun r = invoke({"simulate", kt::problem_path("lorenz28_qc_x"), "--dt", "0.5", "--out", out.string()});
    EXPECT_EQ(r.code, 0) << r.out << r.err;
    const std::string csv = slurp(out);
    EXPECT_EQ(csv.rfind("t,x_1,x_2,x_3,u,y\n", 0), 0u);
}

TEST(Cli, OracleSizeLimit) {
    const fs::path big = scratch("big.json");
    std::ostringstream os;
    os << R"({"schema_version": 1, "system": {"A": [)";
    for (int i = 0; i < 13; ++i) {
        os << (i ? "," : "") << '[';
        for (int j = 0; j < 13; ++j) os << (j ? "," : "") << (i == j ? -1 : 0);
        os << ']';
    }
    os << "]}}";
    std::ofstream(big) << os.str();
    EXPECT_EQ(invoke({"oracle", big.string(), "--norm", "m0"}).code, static_cast<int>(ExitCode::kTooLarge));
}

TEST(Cli, ReportBodyDeterministic) {
    const fs::path a = scratch("a.json"), b = scratch("b.json");
    ASSERT_EQ(invoke({"analyze", kt::problem_path("example8"), "--norm", "kreiss", "--report", a.string()}).code, 0);
    ASSERT_EQ(invoke({"analyze", kt::problem_path("example8"), "--norm", "kreiss", "--report", b.string()}).code, 0);
    EXPECT_EQ(slurp(a), slurp(b));
    EXPECT_TRUE(fs::exists(scratch("a.meta.json")));
    EXPECT_EQ(slurp(a).find("generated_at"), std::string::npos);
}
