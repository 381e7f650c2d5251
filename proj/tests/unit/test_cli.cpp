#include "runner/config.hpp"
#include "runner/runner.hpp"

#include "deadcore/error.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using namespace deadcore;
using namespace deadcore::runner;

namespace {

std::string parse_error(const std::string& text) {
    std::istringstream in(text);
    try {
        parse_config(in);
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ParseError);
        return e.what();
    }
    ADD_FAILURE() << "accepted:\n" << text;
    return {};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

class TempDir {
public:
    TempDir() {
        path_ = fs::temp_directory_path() / ("deadcore_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                             "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }

    fs::path write(const std::string& name, const std::string& text) const {
        std::ofstream(path_ / name) << text;
        return path_ / name;
    }

private:
    fs::path path_;
};

} // namespace

TEST(Config, ParsesKeysCommentsAndLists) {
    std::istringstream in("# experiment\nmode = exponent\n s=0.9  # inline\n\ngamma = 0.25\nblowup_radii = 0.5, 0.25\nseed = 18446744073709551615\n");
    const ExperimentConfig c = parse_config(in);
    EXPECT_EQ(c.mode, Mode::Exponent);
    EXPECT_TRUE(c.mode_explicit);
    EXPECT_DOUBLE_EQ(c.s, 0.9);
    EXPECT_DOUBLE_EQ(c.gamma, 0.25);
    EXPECT_EQ(c.blowup_radii, (std::vector<double>{0.5, 0.25}));
    EXPECT_EQ(c.seed, 18446744073709551615ull);
}

TEST(Config, DefaultsAreDocumentedValues) {
    std::istringstream in("");
    const ExperimentConfig c = parse_config(in);
    EXPECT_EQ(c.seed, 0u);
    EXPECT_EQ(c.mode, Mode::Solve);
    EXPECT_FALSE(c.mode_explicit);
}

TEST(Config, ErrorsCarryLineNumbers) {
    EXPECT_EQ(parse_error("s = 0.9\njust words\n"), "line 2: expected 'key = value', got 'just words'");
    EXPECT_EQ(parse_error("s = 0.9\n\nfoo = 1\n"), "line 3: unknown key 'foo'");
    EXPECT_EQ(parse_error("s = 0.9\ns = 0.8\n"), "line 2: duplicate key 's'");
    EXPECT_EQ(parse_error("# c\ns = abc\n"), "line 2: invalid value 'abc' for key 's'");
    EXPECT_EQ(parse_error("gamma =\n"), "line 1: empty key or value");
    EXPECT_EQ(parse_error("mode = fly\n"), "line 1: unknown mode 'fly'");
    EXPECT_EQ(parse_error("calibrate = maybe\n"), "line 1: invalid value 'maybe' for key 'calibrate'");
}

TEST(Config, DescribeIsStable) {
    std::istringstream in("s = 0.9\n");
    const auto d = describe(parse_config(in));
    EXPECT_EQ(d.at("s"), "0.90000000000000002");
    EXPECT_EQ(d.at("mode"), "solve");
    EXPECT_EQ(d.at("s_list"), "0.90000000000000002,0.94999999999999996,0.98999999999999999");
}

TEST(ValidateParams, SpecifiedExamples) {
    const ParamDiagnostic ok = validate_params(0.95, 0.2);
    EXPECT_EQ(ok.code, ParamCode::Ok);
    ASSERT_TRUE(ok.table.has_value());
    EXPECT_EQ(ok.table->nu, NuRegime::Two);
    EXPECT_NEAR(ok.table->target, 2.375, 1e-14);

    const ParamDiagnostic bad_gamma = validate_params(0.95, 0.4);
    EXPECT_EQ(bad_gamma.code, ParamCode::GammaOutOfRange);
    EXPECT_FALSE(bad_gamma.ok());
    EXPECT_EQ(to_string(bad_gamma.code), "gamma-out-of-range");

    const ParamDiagnostic band = validate_params(0.85, 0.2);
    EXPECT_EQ(band.code, ParamCode::NuIndeterminate);
    EXPECT_TRUE(band.ok());

    EXPECT_EQ(validate_params(0.3, 0.2).code, ParamCode::SOutOfRange);
    EXPECT_NE(render(ok).find("target=2.3749999999999996\n"), std::string::npos);
}

TEST(Run, ZeroDataSolveWritesZeroSolution) {
    TempDir tmp;
    const fs::path cfg = tmp.write("zero.cfg", "shape = zero\nh = 0.0625\n");
    std::ostringstream log;
    RunOptions opts;
    opts.out = tmp.path() / "out";
    EXPECT_EQ(run_file(cfg, Mode::Solve, opts, log), ExitOk) << log.str();
    std::ifstream in(tmp.path() / "out" / "solution.csv");
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line == "x,u") {
            continue;
        }
        EXPECT_EQ(line.substr(line.find(',')), ",0");
        ++rows;
    }
    EXPECT_EQ(rows, 257);
    EXPECT_NE(slurp(tmp.path() / "out" / "solution.meta").find("seed=0\n"), std::string::npos);
}

TEST(Run, ExponentRowContainsTarget) {
    TempDir tmp;
    const fs::path cfg = tmp.write("e.cfg", "s = 0.95\ngamma = 0.2\nshape = ramp\namplitude = 16\nh = 0.0078125\n");
    std::ostringstream log;
    RunOptions opts;
    opts.out = tmp.path() / "out";
    ASSERT_EQ(run_file(cfg, Mode::Exponent, opts, log), ExitOk) << log.str();
    const std::string table = slurp(tmp.path() / "out" / "exponent.csv");
    EXPECT_NE(table.find(",2.3749999999999996,"), std::string::npos) << table;
    EXPECT_TRUE(fs::exists(tmp.path() / "out" / "gradient.csv"));
    EXPECT_TRUE(fs::exists(tmp.path() / "out" / "branching.csv"));
}

TEST(Run, MalformedConfigExitsWithValidationCode) {
    TempDir tmp;
    const fs::path cfg = tmp.write("bad.cfg", "s = 0.95\ngamma 0.2\n");
    std::ostringstream log;
    EXPECT_EQ(run_file(cfg, Mode::Solve, {}, log), ExitValidation);
    EXPECT_NE(log.str().find("line 2"), std::string::npos);
}

TEST(Run, ParameterErrorsExitWithValidationCode) {
    TempDir tmp;
    std::ostringstream log;
    EXPECT_EQ(run_file(tmp.write("g.cfg", "gamma = 0.4\n"), Mode::Solve, {}, log), ExitValidation);
    EXPECT_EQ(run_file(tmp.write("h.cfg", "h = 0.3\n"), Mode::Solve, {}, log), ExitValidation);
    EXPECT_EQ(run_file(tmp.write("m.cfg", "mode = compare\n"), Mode::Solve, {}, log), ExitValidation);
    EXPECT_EQ(run_file(tmp.write("v.cfg", "s = 0.95\ngamma = 0.4\n"), Mode::Validate, {}, log), ExitValidation);
    EXPECT_EQ(run_file(tmp.write("w.cfg", "s = 0.85\ngamma = 0.2\n"), Mode::Validate, {}, log), ExitOk);
}

TEST(Run, NonConvergenceExitCode) {
    TempDir tmp;
    const fs::path cfg = tmp.write("n.cfg", "shape = ramp\namplitude = 16\nh = 0.03125\nmax_iters = 1\n");
    std::ostringstream log;
    RunOptions opts;
    opts.out = tmp.path() / "out";
    EXPECT_EQ(run_file(cfg, Mode::Solve, opts, log), ExitNonConvergence) << log.str();
    EXPECT_NE(slurp(tmp.path() / "out" / "solution.meta").find("converged=false"), std::string::npos);
}

TEST(Run, DryRunWritesNothing) {
    TempDir tmp;
    for (const Mode m : {Mode::Solve, Mode::SolveLocal, Mode::Exponent, Mode::Blowup, Mode::Compare, Mode::Liouville,
                         Mode::SLimit, Mode::Validate}) {
        std::ostringstream log;
        RunOptions opts;
        opts.dry_run = true;
        opts.out = tmp.path() / "dry";
        const fs::path cfg = tmp.write("d.cfg", "s = 0.95\n");
        EXPECT_EQ(run_file(cfg, m, opts, log), ExitOk) << to_string(m) << ": " << log.str();
        EXPECT_FALSE(fs::exists(tmp.path() / "dry")) << to_string(m);
    }
}

TEST(Run, SeedOverrideIsRecorded) {
    TempDir tmp;
    const fs::path cfg = tmp.write("c.cfg", "h = 0.0625\npairs = 2\nseed = 3\n");
    std::ostringstream log;
    RunOptions opts;
    opts.out = tmp.path() / "out";
    opts.seed = 99;
    ASSERT_EQ(run_file(cfg, Mode::Compare, opts, log), ExitOk) << log.str();
    EXPECT_NE(slurp(tmp.path() / "out" / "compare.meta").find("seed=99\n"), std::string::npos);
}

TEST(Run, OutputsAreByteIdenticalAcrossRunsAndJobCounts) {
    TempDir tmp;
    const fs::path a = tmp.write("a.cfg", "h = 0.03125\npairs = 3\n");
    const fs::path b = tmp.write("b.cfg", "h = 0.03125\nshape = plateau\namplitude = 0.5\n");
    std::ostringstream log;
    RunOptions o1, o2;
    o1.out = tmp.path() / "first";
    o2.out = tmp.path() / "second";
    ASSERT_EQ(run_all({a, b}, Mode::Compare, o1, 1, log), ExitOk) << log.str();
    ASSERT_EQ(run_all({a, b}, Mode::Compare, o2, 2, log), ExitOk) << log.str();
    for (const std::string name : {"a/compare.csv", "a/compare.meta", "b/compare.csv", "b/compare.meta"}) {
        const std::string first = slurp(tmp.path() / "first" / name);
        EXPECT_FALSE(first.empty()) << name;
        EXPECT_EQ(first, slurp(tmp.path() / "second" / name)) << name;
    }
}
