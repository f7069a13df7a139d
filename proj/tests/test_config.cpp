#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <sys/wait.h>

#include "gcir/config.hpp"
#include "gcir/experiments.hpp"
#include "json.hpp"

using namespace gcir;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"({"model": {"alpha": 0.5, "delta": 1.0, "h": 0.75}})";

template <class E>
E expect_error(const std::string& text) {
    try {
        (void)parse_config(text);
    } catch (const E& e) {
        return e;
    }
    throw std::runtime_error("expected error for: " + text);
}

fs::path temp_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("gcir_test_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

struct CliResult {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

CliResult cli(const std::string& args, const fs::path& dir) {
    const std::string cmd = std::string(GCIR_CLI_PATH) + " " + args + " >" + (dir / "out.txt").string() + " 2>" +
                            (dir / "err.txt").string();
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(dir / "out.txt"), slurp(dir / "err.txt")};
}

}  // namespace

TEST(Config, DefaultsFillOmittedFields) {
    const auto cfg = parse_config(kMinimal);
    EXPECT_EQ(cfg.alpha, 0.5);
    EXPECT_EQ(cfg.experiment, Experiment::All);
    EXPECT_EQ(cfg.sim.n_steps, 4096u);
    EXPECT_EQ(cfg.plans.size(), 3u);
    EXPECT_EQ(cfg.scale_constant, 1.0);
    EXPECT_NO_THROW(validate_config(cfg));
}

TEST(Config, ParseErrorsCarryLineAndField) {
    const auto syntax = expect_error<ParseError>("{\"model\": {\"alpha\": 0.5,\n  \"delta\": ,\n \"h\": 0.7}}");
    EXPECT_EQ(syntax.line(), 2u);
    EXPECT_EQ(syntax.field(), "delta");
    const auto type = expect_error<ParseError>(
        "{\"model\": {\"alpha\": 0.5, \"delta\": 1, \"h\": 0.75},\n\"sim\": {\"n_steps\": \"many\"}}");
    EXPECT_EQ(type.line(), 2u);
    EXPECT_EQ(type.field(), "sim.n_steps");
}

TEST(Config, ValidationErrorsNameTheField) {
    auto bad_h = expect_error<ValidationError>(R"({"model": {"alpha": 0.5, "delta": 1, "h": 0.4}})");
    EXPECT_EQ(bad_h.field(), "h");
    EXPECT_EQ(bad_h.reason(), "must lie in (1/2,1)");
    auto missing = expect_error<ValidationError>(R"({"model": {"alpha": 0.5, "h": 0.7}})");
    EXPECT_EQ(missing.field(), "delta");
    auto unknown = expect_error<ValidationError>(R"({"model": {"alpha": 0.5, "delta": 1, "h": 0.7}, "colour": 1})");
    EXPECT_EQ(unknown.field(), "colour");
    auto alpha = expect_error<ValidationError>(R"({"model": {"alpha": 0.1, "delta": 1, "h": 0.7}})");
    EXPECT_EQ(alpha.field(), "alpha");
    EXPECT_NO_THROW((void)parse_config(R"({"model": {"alpha": 0.1, "delta": 1, "h": 0.7}, "experiment": "measure"})"));
    auto exp = expect_error<ValidationError>(R"({"model": {"alpha": 0.5, "delta": 1, "h": 0.7}, "experiment": "x"})");
    EXPECT_EQ(exp.field(), "experiment");
}

TEST(Config, JsonRoundTripAndManifestForm) {
    auto cfg = parse_config(kMinimal);
    cfg.sim.seed = 99;
    cfg.lambdas = {0.6};
    cfg.experiment = Experiment::SuperPoincare;
    const auto again = parse_config(config_to_json(cfg));
    EXPECT_EQ(config_to_json(again), config_to_json(cfg));
    nlohmann::json manifest{{"config", nlohmann::json::parse(config_to_json(cfg))}, {"seed", 99}, {"version", "1.0.0"}};
    EXPECT_EQ(config_to_json(parse_config(manifest.dump())), config_to_json(cfg));
    for (auto e : {Experiment::Simulate, Experiment::LogHarnack, Experiment::SuperPoincare, Experiment::All}) {
        EXPECT_EQ(experiment_from_string(to_string(e)), e);
    }
    EXPECT_NE(config_defaults_help().find("n_steps"), std::string::npos);
}

TEST(Experiments, RunDirectoryArtifactsAndReplay) {
    const auto dir = temp_dir("replay");
    auto cfg = parse_config(kMinimal);
    cfg.experiment = Experiment::Measure;
    cfg.out_dir = dir.string();
    std::ostringstream log;
    const auto run_dir = make_run_dir(cfg.out_dir, 3);
    EXPECT_NE(run_dir.filename().string().find("_seed3"), std::string::npos);
    const auto outcome = run_experiment(cfg, run_dir, log);
    EXPECT_FALSE(outcome.failed) << outcome.failure;
    EXPECT_FALSE(outcome.violated());
    for (const char* f : {"manifest.json", "results.csv", "report.json", "measure.json", "rate_table.csv"}) {
        EXPECT_TRUE(fs::exists(run_dir / f)) << f;
    }
    EXPECT_FALSE(fs::exists(run_dir / "FAILED"));
    const auto replay = parse_config(slurp(run_dir / "manifest.json"));
    EXPECT_EQ(config_to_json(replay), config_to_json(cfg));
    EXPECT_NE(make_run_dir(cfg.out_dir, 3), run_dir);
    fs::remove_all(dir);
}

TEST(Cli, ExitCodes) {
    const auto dir = temp_dir("cli");
    {
        std::ofstream(dir / "good.json") << R"({"model": {"alpha": 0.5, "delta": 1.0, "h": 0.75},
            "sim": {"n_paths": 3000, "n_steps": 128}, "horizons": [1]})";
        std::ofstream(dir / "bad.json") << "{\"model\": {\"alpha\": 0.5, \"delta\": 1.0, \"h\": 1.5}}";
    }
    const std::string out = " --out " + (dir / "runs").string();
    auto ok = cli("run --config " + (dir / "good.json").string() + " --experiment harnack --seed 1,2" + out, dir);
    EXPECT_EQ(ok.code, 0) << ok.out << ok.err;
    EXPECT_NE(ok.out.find("_seed2"), std::string::npos);
    auto half = cli("run --config " + (dir / "good.json").string() + " --experiment harnack --scale-constant 0.5" + out,
                    dir);
    EXPECT_EQ(half.code, 1) << half.out << half.err;
    auto bad = cli("validate --config " + (dir / "bad.json").string(), dir);
    EXPECT_EQ(bad.code, 2);
    EXPECT_NE(bad.err.find("h: must lie in (1/2,1)"), std::string::npos) << bad.err;
    EXPECT_EQ(cli("run --config " + (dir / "good.json").string() + " --no-such-flag", dir).code, 2);
    EXPECT_EQ(cli("validate --config " + (dir / "good.json").string(), dir).code, 0);
    auto help = cli("--help", dir);
    EXPECT_EQ(help.code, 0);
    EXPECT_NE(help.out.find("Exit codes"), std::string::npos);
    fs::path first;
    for (const auto& e : fs::directory_iterator(dir / "runs")) first = e.path();
    auto report = cli("report " + first.string(), dir);
    EXPECT_EQ(report.code, 0);
    EXPECT_NE(report.out.find("harnack:"), std::string::npos);
    fs::remove_all(dir);
}
