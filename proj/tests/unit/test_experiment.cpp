#include "driftlab/experiment.hpp"
#include "driftlab/serialization.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace driftlab;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("driftlab_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p)
{
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(slurp(p));
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

const char* kSharp =
    "name = sharp\nfamily = scaled_gaussian\nu0 = 2\nhorizon = log(2)\noutput_interval = 0.05\nscalars = 1\n";

}  // namespace

TEST(FormatNumber, FixedSeventeenDigits)
{
    EXPECT_EQ(format_number(0.1), "0.10000000000000001");
    EXPECT_EQ(format_number(0.0), "0");
    EXPECT_EQ(format_number(-2.5), "-2.5");
    EXPECT_EQ(format_number(std::nan("")), "nan");
    EXPECT_EQ(format_number(-1.0 / 0.0), "-inf");
}

TEST(Execute, SharpnessArtifacts)
{
    const fs::path dir = scratch_dir("sharp");
    ExecuteOptions opt;
    opt.out_dir = dir.string();
    const RunOutcome out = execute(parse_scenario(kSharp), opt);
    ASSERT_EQ(out.exit_code, kExitOk) << out.error_message;
    EXPECT_TRUE(out.verified);

    const auto rows = read_csv(dir / "trajectory.csv");
    ASSERT_GT(rows.size(), 10u);
    const auto& h = rows[0];
    ASSERT_EQ(h[0], "t");
    const auto col = [&](const std::string& name) {
        return static_cast<std::size_t>(std::find(h.begin(), h.end(), name) - h.begin());
    };
    ASSERT_LT(col("residual_commutator"), h.size());
    ASSERT_LT(col("E_1"), h.size());
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const double lam = std::stod(rows[r][col("lambda_1")]);
        const double bound = std::stod(rows[r][col("bound_1")]);
        EXPECT_NEAR(lam, bound, 1e-8 * bound);
    }

    const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
    EXPECT_EQ(manifest["config_hash"], parse_scenario(kSharp).hash());
    EXPECT_TRUE(manifest.contains("tolerances"));
    EXPECT_TRUE(manifest["versions"].contains("driftlab"));
    EXPECT_FALSE(manifest["oracle_reports"].empty());
    // Every file in the directory is listed in the manifest.
    std::vector<std::string> listed = manifest["files"];
    for (const auto& e : fs::directory_iterator(dir)) {
        EXPECT_NE(std::find(listed.begin(), listed.end(), e.path().filename().string()), listed.end())
            << e.path();
    }
    for (const auto& f : listed) EXPECT_TRUE(fs::exists(dir / f)) << f;
}

TEST(Execute, CsvIsReproducible)
{
    const fs::path a = scratch_dir("rep_a"), b = scratch_dir("rep_b");
    const auto cfg = parse_scenario(
        "family = round_circle\nbackend = galerkin\nhorizon = 0.2\noutput_interval = 0.1\nscalars = 1\n");
    execute(cfg, ExecuteOptions{a.string(), "", false});
    execute(cfg, ExecuteOptions{b.string(), "", false});
    EXPECT_EQ(slurp(a / "trajectory.csv"), slurp(b / "trajectory.csv"));
    EXPECT_EQ(slurp(a / "bounds.csv"), slurp(b / "bounds.csv"));
    EXPECT_EQ(slurp(a / "trajectory.csv").find('\r'), std::string::npos);
}

TEST(Execute, SplittingCertificateJson)
{
    const fs::path dir = scratch_dir("split");
    const auto cfg = parse_scenario(
        "family = product\nfactors = gaussian:1 circle:1/4\nhorizon = 0.3\noutput_interval = 0.1\n"
        "verify.splitting = true\n");
    const auto out = execute(cfg, ExecuteOptions{dir.string(), "", true});
    ASSERT_EQ(out.exit_code, kExitOk) << out.error_message;
    const auto cert = nlohmann::json::parse(slurp(dir / "certificate.json"));
    EXPECT_TRUE(cert["fired"]);
    EXPECT_TRUE(cert["valid"]);
    EXPECT_EQ(cert["k"], 1);
}

TEST(Execute, FailuresMapToExitCodes)
{
    const fs::path dir = scratch_dir("fail");
    const auto breakdown = parse_scenario(
        "family = scaled_gaussian\nu0 = 1/2\nbackend = galerkin\nhorizon = 1\noutput_interval = 0.1\n");
    const auto out = execute(breakdown, ExecuteOptions{dir.string(), "", false});
    EXPECT_EQ(out.exit_code, kExitStability);
    EXPECT_EQ(out.error_kind, "flow_breakdown");
    EXPECT_FALSE(fs::exists(dir));

    const auto strict = parse_scenario(
        "family = round_circle\nhorizon = 0.1\noutput_interval = 0.05\ntol.commutator = 0\n");
    EXPECT_EQ(execute(strict, ExecuteOptions{dir.string(), "", true}).exit_code, kExitVerification);
    EXPECT_EQ(execute(strict, ExecuteOptions{dir.string(), "", false}).exit_code, kExitOk);
}

TEST(ExitCodes, ByErrorKind)
{
    EXPECT_EQ(exit_code_for(ConfigurationError("x")), kExitConfig);
    EXPECT_EQ(exit_code_for(DomainError("x")), kExitConfig);
    EXPECT_EQ(exit_code_for(StabilityError("x")), kExitStability);
    EXPECT_EQ(exit_code_for(FlowBreakdownError("x", 3)), kExitStability);
    EXPECT_EQ(exit_code_for(SolverError("x", 1.0)), kExitSolver);
    EXPECT_EQ(exit_code_for(DegeneracyError("x")), kExitOther);
    EXPECT_EQ(error_line("config_error", "bad \"a0\""), "error: kind=config_error message=\"bad \\\"a0\\\"\"");
}

TEST(RunSweep, ParallelRunsAndSummary)
{
    const fs::path root = scratch_dir("sweep");
    const auto configs = expand_sweep(parse_document(
        "name = sw\nfamily = round_circle\nhorizon = 0.1\noutput_interval = 0.05\nsweep.a0 = 1 2 3\n"));
    ExecuteOptions opt;
    opt.out_dir = root.string();
    const auto outcomes = run_sweep(configs, opt, 3);
    ASSERT_EQ(outcomes.size(), 3u);
    for (const auto& o : outcomes) EXPECT_EQ(o.exit_code, kExitOk) << o.error_message;
    EXPECT_TRUE(fs::exists(root / "sw_002" / "manifest.json"));
    EXPECT_TRUE(fs::exists(root / "sweep.csv"));
    const std::string summary = summarize_manifests(root.string());
    EXPECT_NE(summary.find("sw_000"), std::string::npos);
    EXPECT_NE(summary.find("sw_002"), std::string::npos);
    EXPECT_THROW(run_sweep(configs, opt, 0), ConfigurationError);
}
