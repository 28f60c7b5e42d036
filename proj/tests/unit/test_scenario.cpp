#include "driftlab/errors.hpp"
#include "driftlab/scenario.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace driftlab;

TEST(ParseReal, Expressions)
{
    EXPECT_DOUBLE_EQ(parse_real("0.25"), 0.25);
    EXPECT_DOUBLE_EQ(parse_real("1/4"), 0.25);
    EXPECT_DOUBLE_EQ(parse_real("log(2)"), std::log(2.0));
    EXPECT_DOUBLE_EQ(parse_real("sqrt(2)"), std::sqrt(2.0));
    EXPECT_DOUBLE_EQ(parse_real("exp(1)"), std::exp(1.0));
    EXPECT_DOUBLE_EQ(parse_real("pi"), std::numbers::pi);
    EXPECT_DOUBLE_EQ(parse_real(" 1e-3 "), 1e-3);
    EXPECT_THROW(parse_real("1/0"), ConfigurationError);
    EXPECT_THROW(parse_real("abc"), ConfigurationError);
    EXPECT_THROW(parse_real("2x"), ConfigurationError);
}

TEST(ParseScenario, SharpnessDocument)
{
    const auto cfg = parse_scenario(
        "# comment\n"
        "name = sharp\n"
        "family = scaled_gaussian\n"
        "u0 = 2\n"
        "horizon = log(2)   # trailing comment\n"
        "output_interval = 0.05\n"
        "scalars = 1 1+2\n"
        "tol.bound = 1e-7\n");
    EXPECT_EQ(cfg.name, "sharp");
    ASSERT_TRUE(cfg.spec.family);
    EXPECT_EQ(cfg.spec.family->initial_scale(), 2.0);
    EXPECT_EQ(cfg.spec.flow.backend, FlowBackend::Analytic);
    EXPECT_DOUBLE_EQ(cfg.spec.horizon, std::log(2.0));
    ASSERT_EQ(cfg.spec.scalars.size(), 2u);
    EXPECT_EQ(cfg.spec.scalars[1].label, "1+2");
    EXPECT_EQ(cfg.tolerances.bound, 1e-7);
    EXPECT_TRUE(cfg.verify.bochner);
    EXPECT_FALSE(cfg.verify.splitting);
}

TEST(ParseScenario, ProductAndCircleState)
{
    const auto p = parse_scenario("family = product\nfactors = gaussian:1 circle:1/4\nverify.splitting = on\n");
    ASSERT_TRUE(p.spec.family);
    EXPECT_EQ(p.spec.family->dimension(), 2);
    EXPECT_TRUE(p.verify.splitting);
    EXPECT_EQ(p.splitting_tolerances.hessian, SplittingTolerances{}.hessian);

    const auto c = parse_scenario("family = circle_state\nmetric_cos = 1 0.1\nmetric_sin = 0.05\n");
    ASSERT_TRUE(c.spec.initial_state);
    EXPECT_EQ(c.spec.flow.backend, FlowBackend::Galerkin);
    EXPECT_EQ(c.splitting_tolerances.hessian, SplittingTolerances::galerkin().hessian);
    const auto& f = std::get<CircleFactor>(c.spec.initial_state->factors[0]);
    EXPECT_EQ(f.metric.sin_coeff(1), 0.05);
}

TEST(ParseScenario, StrictErrorsNameTheLine)
{
    try {
        parse_scenario("family = round_circle\ncolour = blue\n", "x.cfg");
        FAIL();
    } catch (const ConfigurationError& e) {
        EXPECT_NE(std::string(e.what()).find("x.cfg:2"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("colour"), std::string::npos);
    }
    EXPECT_THROW(parse_scenario("family = round_circle\na0 = 1\na0 = 2\n"), ConfigurationError);
    EXPECT_THROW(parse_scenario("family round_circle\n"), ConfigurationError);
    EXPECT_THROW(parse_scenario("a0 = 1\n"), ConfigurationError);
    EXPECT_THROW(parse_scenario("family = torus\n"), ConfigurationError);
}

TEST(ParseScenario, RangeViolationsAreConfigErrors)
{
    EXPECT_THROW(parse_scenario("family = round_circle\na0 = -1\n"), ConfigurationError);
    EXPECT_THROW(parse_scenario("family = scaled_gaussian\nu0 = 0\n"), ConfigurationError);
    EXPECT_THROW(parse_scenario("family = round_circle\nhorizon = 100\n"), ConfigurationError);
    EXPECT_THROW(parse_scenario("family = round_circle\ndt = 0.1\n"), ConfigurationError);
    EXPECT_THROW(parse_scenario("family = round_circle\neigen_count = 0\n"), ConfigurationError);
    EXPECT_THROW(parse_scenario("family = round_circle\ncircle_nodes = 4\n"), ConfigurationError);
    EXPECT_THROW(parse_scenario("family = round_circle\nverify.bochner = maybe\n"), ConfigurationError);
    EXPECT_THROW(parse_scenario("family = circle_state\nmetric_cos = 0.5 1\n"), ConfigurationError);
    EXPECT_THROW(parse_scenario("family = round_circle\nname = a/b\n"), ConfigurationError);
    EXPECT_THROW(parse_scenario("family = circle_state\nbackend = analytic\n"), ConfigurationError);
    EXPECT_THROW(parse_scenario("family = round_circle\ntol.bound = -1\n"), ConfigurationError);
}

TEST(ScenarioConfig, HashIgnoresOutputDirectory)
{
    const auto a = parse_scenario("family = round_circle\na0 = 2\nout = /tmp/a\n");
    const auto b = parse_scenario("a0 = 2\nfamily = round_circle\nout = /tmp/b\n");
    const auto c = parse_scenario("family = round_circle\na0 = 3\n");
    EXPECT_EQ(a.hash(), b.hash());
    EXPECT_NE(a.hash(), c.hash());
    EXPECT_EQ(a.hash().size(), 16u);
}

TEST(ExpandSweep, CartesianGrid)
{
    const auto doc = parse_document("name = s\nfamily = round_circle\nsweep.a0 = 1 2 4\nsweep.mode_cutoff = 8 16\n");
    const auto runs = expand_sweep(doc);
    ASSERT_EQ(runs.size(), 6u);
    EXPECT_EQ(runs[0].name, "s_000");
    EXPECT_EQ(runs[5].name, "s_005");
    EXPECT_EQ(runs[5].spec.family->initial_metric(), 4.0);
    EXPECT_EQ(runs[5].spec.flow.mode_cutoff, 16);
    EXPECT_THROW(parse_document("sweep.name = a b\n"), ConfigurationError);
    EXPECT_THROW(parse_scenario("family = round_circle\nsweep.a0 = 1 2\n"), ConfigurationError);
}

TEST(KnownKeys, CoversDocumentedGroups)
{
    const auto& k = known_keys();
    for (const char* key : {"family", "horizon", "verify.splitting", "tol.bound", "splitting.t0", "seed", "out"}) {
        EXPECT_NE(std::find(k.begin(), k.end(), key), k.end()) << key;
    }
}
