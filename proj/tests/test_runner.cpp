#include <filesystem>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "adiavac/runner/config.hpp"
#include "adiavac/runner/output.hpp"
#include "adiavac/runner/runner.hpp"

using namespace adiavac;
using namespace adiavac::runner;

namespace {

const std::filesystem::path config_dir = ADIAVAC_CONFIG_DIR;

std::filesystem::path scratch(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("adiavac_test_" + name);
    std::filesystem::remove_all(p);
    return p;
}

const char* minimal = R"(
[background]
kind = exponential
H = 1.0

[field]
mass = 1.0
orders = 0, 1

[modes]
k_min = 1
k_max = 20
)";

}  // namespace

TEST(Config, ParsesMinimalText) {
    const auto c = parse_config_text(minimal);
    EXPECT_EQ(c.background.kind, "exponential");
    EXPECT_EQ(c.background.hubble, 1.0);
    EXPECT_EQ(c.orders, (std::vector<int>{0, 1}));
    EXPECT_EQ(c.k_max, 20);
    EXPECT_EQ(c.positivity.mode, PositivityAction::Mode::strict);
}

TEST(Config, BundledConfigsValidate) {
    for (const char* name : {"static.ini", "reference.ini", "detector.ini"}) {
        EXPECT_NO_THROW(load_config(config_dir / name)) << name;
    }
}

TEST(Config, RejectsNegativeMass) {
    EXPECT_THROW(parse_config_text("[field]\nmass = -1\n"), ConfigInvalid);
    EXPECT_THROW(parse_config_text("[field]\nmass = 0\n"), ConfigInvalid);
}

TEST(Config, RejectsMalformedValues) {
    EXPECT_THROW(parse_config_text("[field]\nmass = 1 # comment\n"), ConfigInvalid);
    EXPECT_THROW(parse_config_text("[field]\nmass = heavy\n"), ConfigInvalid);
    EXPECT_THROW(parse_config_text("[field]\norders = 0, x\n"), ConfigInvalid);
    EXPECT_THROW(parse_config_text("[field]\norders = -1\n"), ConfigInvalid);
    EXPECT_THROW(parse_config_text("[field]\npositivity = loose\n"), ConfigInvalid);
    EXPECT_THROW(parse_config_text("[modes]\nk_min = 5\nk_max = 4\n"), ConfigInvalid);
    EXPECT_THROW(parse_config_text("[background]\nkind = bouncing\n"), ConfigInvalid);
    EXPECT_THROW(parse_config_text("[field]\nmass = inf\n"), ConfigInvalid);
    EXPECT_THROW(parse_config_text("[field]\nmass 1\n"), ConfigInvalid);
}

TEST(Config, RejectsUnknownKeys) {
    EXPECT_THROW(parse_config_text("[field]\nmas = 1\n"), ConfigInvalid);
    EXPECT_THROW(parse_config_text("[fields]\nmass = 1\n"), ConfigInvalid);
}

TEST(Output, SeventeenSignificantDigits) {
    EXPECT_EQ(format_number(0.1), "0.10000000000000001");
    EXPECT_EQ(format_number(1.0), "1");
    EXPECT_EQ(format_number(-2.5e-300), "-2.5e-300");
    EXPECT_EQ(format_number(2.0 / 3.0), "0.66666666666666663");
    EXPECT_EQ(std::stod(format_number(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(Output, CsvLayout) {
    CsvTable t({"k", "x", "flag", "label"});
    t.row(3, 0.5, true, "a");
    EXPECT_EQ(t.text(), "k,x,flag,label\n3,0.5,1,a\n");
    EXPECT_THROW(t.row(1, 2.0), InvalidArgument);
}

TEST(Output, Sha256KnownVector) {
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Runner, SampledModesCoverEnds) {
    const auto ks = sampled_modes(0, 100, 5);
    EXPECT_EQ(ks.front(), 0);
    EXPECT_EQ(ks.back(), 100);
    EXPECT_TRUE(std::is_sorted(ks.begin(), ks.end()));
    EXPECT_EQ(sampled_modes(4, 4, 3), (std::vector<std::int64_t>{4}));
}

TEST(Runner, InvariantsSuiteOnStaticConfig) {
    const auto out = scratch("static");
    Runner runner(load_config(config_dir / "static.ini"), out);
    std::ostringstream log;
    const auto result = runner.run("invariants", log);
    EXPECT_TRUE(result.passed()) << log.str();
    const auto manifest = nlohmann::json::parse(read_file(result.manifest));
    EXPECT_TRUE(manifest["passed"].get<bool>());
    ASSERT_EQ(manifest["files"].size(), 1u);
    const auto& entry = manifest["files"][0];
    EXPECT_EQ(entry["sha256"], sha256_hex(read_file(out / entry["path"].get<std::string>())));
}

TEST(Runner, FrequenciesSuiteEmitsMasslessCheck) {
    const auto out = scratch("frequencies");
    Runner runner(parse_config_text(minimal), out);
    std::ostringstream log;
    const auto result = runner.run("frequencies", log);
    EXPECT_TRUE(result.passed()) << log.str();
    const std::string csv = read_file(out / "frequencies_massless.csv");
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "k,omega_sq,omega1_sq,closed_form,relative_error");
    int rows = 0;
    while (std::getline(in, line)) {
        const double err = std::stod(line.substr(line.rfind(',') + 1));
        EXPECT_LT(err, 1e-12);
        ++rows;
    }
    EXPECT_GT(rows, 15);
}

TEST(Runner, FailedSuiteIsReported) {
    // a span ending before t0 makes the solver reject it; the error is collected, not thrown
    auto cfg = parse_config_text(minimal);
    cfg.k_min = 1;
    cfg.t_end = -1.0;  // bypasses validation on purpose
    Runner runner(cfg, scratch("failing"));
    std::ostringstream log;
    const auto result = runner.run("modes", log);
    EXPECT_FALSE(result.passed());
    EXPECT_FALSE(result.reports.at(0).error.empty());
}

TEST(Runner, UnknownSuiteRejected) {
    Runner runner(parse_config_text(minimal), scratch("unknown"));
    EXPECT_THROW(runner.run("everything"), InvalidArgument);
}
