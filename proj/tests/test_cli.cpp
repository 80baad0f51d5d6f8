#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "bergman/cli.hpp"
#include "bergman/csv.hpp"
#include "bergman/errors.hpp"

using namespace bergman;
using namespace bergman::cli;

namespace {
struct Run {
    int code;
    std::string out, log;
};
Run run_config(const RunConfig& c) {
    std::ostringstream out, log;
    const int code = run(c, out, log);
    return {code, out.str(), log.str()};
}
}  // namespace

TEST(Cli, CanonicalRoundTrip) {
    RunConfig c;
    c.command = Command::apply;
    c.symbol = "trunc:0.9(abs(ab:0.25))";
    c.tol = 1.0 / 3.0;
    c.rho = 0.1;
    c.transpose = true;
    c.format = Format::json;
    c.f = "1,0:2";
    const auto text = canonical_text(c);
    RunConfig back;
    apply_config_text(back, text);
    EXPECT_EQ(back, c);
    EXPECT_EQ(canonical_text(back), text);
    EXPECT_EQ(canonical_text(RunConfig{}), canonical_text([] {
                  RunConfig d;
                  apply_config_text(d, canonical_text(d));
                  return d;
              }()));
}

TEST(Cli, ConfigCommentsAndErrors) {
    RunConfig c;
    apply_config_text(c, "# comment\n\n  m_max = 3 \ncommand=decompose\n");
    EXPECT_EQ(c.m_max, 3);
    EXPECT_EQ(c.command, Command::decompose);
    try {
        apply_config_text(c, "m_max=3\ntol=abc\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
        EXPECT_EQ(e.column(), 5u);
    }
    EXPECT_THROW(apply_config_text(c, "nokey\n"), ParseError);
    EXPECT_THROW(apply_config_text(c, "bogus=1\n"), ParseError);
    EXPECT_THROW(apply_config_text(c, "format=xml\n"), ParseError);
    EXPECT_THROW(apply_config_text(c, "command=fly\n"), ParseError);
}

TEST(Cli, ValidationRanges) {
    RunConfig c;
    c.rho = 1.0;
    EXPECT_THROW(validate(c), ParseError);
    c = {};
    c.symbol = "ab:";
    EXPECT_THROW(validate(c), ParseError);
    c = {};
    c.f = "1,x";
    EXPECT_THROW(validate(c), ParseError);
    c = {};
    c.command = Command::decompose;
    c.m_max = 30;
    EXPECT_THROW(validate(c), ParseError);
    EXPECT_EQ(run_config(c).code, kExitConfig);
}

TEST(Cli, TestFunctionText) {
    const auto f = parse_test_function("1,0:2,3");
    EXPECT_EQ(f(Complex(0.5)), Complex(1 + 0.75, 1));
    EXPECT_EQ(parse_test_function("z^4")(Complex(0.5)), Complex(0.0625));
    EXPECT_THROW(parse_test_function("z^"), ParseError);
    EXPECT_THROW(parse_radii("0.5,1.2"), ParseError);
}

TEST(Cli, DecomposeRows) {
    RunConfig c;
    c.command = Command::decompose;
    c.m_max = 3;
    const auto r = run_config(c);
    EXPECT_EQ(r.code, kExitOk);
    std::istringstream in(r.out);
    EXPECT_EQ(read_csv(in).rows.size(), 14u);
}

TEST(Cli, SpectrumOfConstant) {
    RunConfig c;
    c.command = Command::spectrum;
    c.symbol = "const:1";
    c.n_max = 10;
    const auto r = run_config(c);
    EXPECT_EQ(r.code, kExitOk);
    std::istringstream in(r.out);
    const auto t = read_csv(in);
    ASSERT_EQ(t.rows.size(), 11u);
    for (std::size_t i = 0; i < t.rows.size(); ++i)
        EXPECT_NEAR(parse_real_cell(t.rows[i][t.column("gamma_re")], i + 2, 2), 1.0, 1e-12);
}

TEST(Cli, JsonMirrorsCsv) {
    RunConfig c;
    c.command = Command::spectrum;
    c.symbol = "pow:0.25";
    c.n_max = 5;
    const auto csv = run_config(c);
    c.format = Format::json;
    const auto json = run_config(c);
    const auto records = nlohmann::json::parse(json.out);
    std::istringstream in(csv.out);
    const auto t = read_csv(in);
    ASSERT_EQ(records.size(), t.rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i)
        EXPECT_EQ(records[i]["gamma_re"].get<double>(), std::stod(t.rows[i][1]));
}

TEST(Cli, DeterministicOutput) {
    RunConfig c;
    c.command = Command::apply;
    c.symbol = "ab:0.25";
    c.f = "1,1";
    c.grid_radii = "0,0.5,0.9";
    c.grid_angles = 3;
    EXPECT_EQ(run_config(c).out, run_config(c).out);
}

TEST(Cli, NonConvergenceStillWritesArtifacts) {
    RunConfig c;
    c.command = Command::converge;
    c.symbol = "const:1";
    c.f = "z^2";
    c.m_max = 3;
    c.grid_radii = "0.5";
    c.grid_angles = 2;
    const auto r = run_config(c);
    EXPECT_EQ(r.code, kExitNonConvergence);
    std::istringstream in(r.out);
    EXPECT_EQ(read_csv(in).rows.size(), 3u);
}

TEST(Cli, SeriesAndTransposeApply) {
    RunConfig c;
    c.command = Command::apply;
    c.symbol = "const:0,1";
    c.grid_radii = "0.3";
    c.grid_angles = 1;
    c.op = "series";
    c.m_max = 3;
    const auto plain = run_config(c);
    c.transpose = true;
    const auto t = run_config(c);
    ASSERT_EQ(plain.code, kExitOk);
    std::istringstream a(plain.out), b(t.out);
    const auto ta = read_csv(a), tb = read_csv(b);
    EXPECT_NEAR(std::stod(ta.rows[0][3]), 0.765625, 1e-9);
    EXPECT_NEAR(std::stod(tb.rows[0][3]), -0.765625, 1e-9);
}

TEST(Cli, NonRadialSpectrumIsConfigError) {
    RunConfig c;
    c.command = Command::spectrum;
    c.symbol = "table:/nonexistent.csv";
    EXPECT_EQ(run_config(c).code, kExitConfig);
}

TEST(Cli, ReproduceVerdict) {
    RunConfig c;
    c.command = Command::reproduce_prop15;
    c.b = 0.25;
    c.n_max = 2000;
    const auto r = run_config(c);
    EXPECT_EQ(r.code, kExitOk) << r.log;
    std::istringstream in(r.out);
    const auto t = read_csv(in);
    auto value_of = [&](const std::string& check) {
        for (const auto& row : t.rows)
            if (row[0] == check) return row[1];
        return std::string("missing");
    };
    EXPECT_EQ(value_of("T_abs_a_unbounded_trend"), "TRUE");
    EXPECT_EQ(value_of("T_a_bounded_trend"), "TRUE");
    EXPECT_NE(r.log.find("verdict: T_{|a|} unbounded-trend TRUE, T_a bounded-trend TRUE"), std::string::npos);
}
