#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include <unidb/config.hpp>

using namespace unidb;

TEST_CASE("defaults serialize canonically and round-trip losslessly") {
  ExperimentConfig c;
  const std::string s1 = c.serialize();
  std::stringstream ss(s1);
  const auto back = ExperimentConfig::parse(ss);
  CHECK(back.serialize() == s1);
  CHECK(back.hash() == c.hash());
}

TEST_CASE("parse: sections, comments, whitespace, lists") {
  std::stringstream ss(R"(# experiment
[schedule]
kind = gou_const
theta = 0.25
  lambda_sq =   2.0

[bridge]
gamma = 1, 100, inf

[grid]
n_steps = 64

[train]
hidden = 64,64
weighted = false
)");
  const auto c = ExperimentConfig::parse(ss);
  CHECK(c.kind == "gou_const");
  CHECK(c.theta == 0.25);
  CHECK(c.lambda_sq == 2.0);
  REQUIRE(c.gammas.size() == 3);
  CHECK(c.gammas[0] == Gamma::finite(1.0));
  CHECK(c.gammas[1] == Gamma::finite(100.0));
  CHECK(c.gammas[2].is_infinite());
  CHECK(c.n_steps == 64);
  CHECK(c.hidden == std::vector<int>{64, 64});
  CHECK_FALSE(c.weighted);
  // untouched keys keep their defaults
  CHECK(c.s_offset == 0.008);
  CHECK(c.dataset == "gaussian2d");
}

TEST_CASE("unknown keys are rejected with the offending line number") {
  std::stringstream ss("[schedule]\nkind = gou_const\nbogus = 1\n");
  try {
    ExperimentConfig::parse(ss);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("line 3") != std::string::npos);
    CHECK(msg.find("schedule.bogus") != std::string::npos);
  }
  std::stringstream bad_section("[schedule\nkind = gou_const\n");
  CHECK_THROWS_AS(ExperimentConfig::parse(bad_section), ConfigError);
  std::stringstream no_eq("[grid]\nn_steps 64\n");
  CHECK_THROWS_AS(ExperimentConfig::parse(no_eq), ConfigError);
  std::stringstream bad_kind("[schedule]\nkind = exotic\n");
  CHECK_THROWS_AS(ExperimentConfig::parse(bad_kind), ConfigError);
  std::stringstream bad_num("[schedule]\ntheta = fast\n");
  CHECK_THROWS_AS(ExperimentConfig::parse(bad_num), ConfigError);
  std::stringstream bad_bool("[train]\nweighted = yes\n");
  CHECK_THROWS_AS(ExperimentConfig::parse(bad_bool), ConfigError);
  std::stringstream empty_gammas("[bridge]\ngamma = ,\n");
  CHECK_THROWS_AS(ExperimentConfig::parse(empty_gammas), ConfigError);
}

TEST_CASE("gamma parsing and printing") {
  CHECK(Gamma::parse("inf").is_infinite());
  CHECK(Gamma::parse("1e6") == Gamma::finite(1e6));
  CHECK(Gamma::parse("1e6").str() == "1000000");
  CHECK(Gamma::infinity().str() == "inf");
  CHECK(Gamma::infinity().inv() == 0.0);
  CHECK(Gamma::finite(4.0).inv() == 0.25);
  CHECK_THROWS_AS(Gamma::parse("ten"), ConfigError);
  CHECK_THROWS_AS(Gamma::parse("1.5x"), ConfigError);
}

TEST_CASE("hash is stable and sensitive to every field") {
  ExperimentConfig a;
  const auto h = a.hash();
  CHECK(a.hash() == h);  // deterministic
  ExperimentConfig b = a;
  b.theta = 0.9999;
  CHECK(b.hash() != h);
  ExperimentConfig c = a;
  c.gammas = {Gamma::finite(10.0)};
  CHECK(c.hash() != h);
  ExperimentConfig d = a;
  d.out_dir = "elsewhere";
  CHECK(d.hash() != h);
}

TEST_CASE("build_params wires the schedule family and the anchor policy") {
  ExperimentConfig c;
  c.kind = "gou_const";
  c.theta = 0.5;
  c.lambda_sq = 1.0;
  c.dim = 3;
  auto p = c.build_params(Gamma::infinity());
  CHECK(p.m_tracks_x_T);
  CHECK(p.m.size() == 3);
  CHECK(p.schedule.f(0.3) == doctest::Approx(-0.5).epsilon(1e-15));

  c.kind = "ve_linear";
  c.ve_slope = 2.0;
  auto ve = c.build_params(Gamma::finite(1.0));
  CHECK_FALSE(ve.m_tracks_x_T);
  CHECK(ve.schedule.f(0.5) == 0.0);
  CHECK(ve.schedule.g_sq(0.5) == doctest::Approx(2.0).epsilon(1e-15));

  c.kind = "vp_const";
  c.vp_c = 1.3;
  auto vp = c.build_params(Gamma::finite(1.0));
  CHECK(vp.schedule.f(0.5) == doctest::Approx(-0.65).epsilon(1e-15));

  // literal floor convention propagates and is rejected downstream
  ExperimentConfig lit;
  lit.floor_convention = "literal";
  CHECK_THROWS_AS(lit.build_schedule(), ConfigError);
}

TEST_CASE("missing config file is a structured error") {
  CHECK_THROWS_AS(ExperimentConfig::parse_file("/nonexistent/experiment.cfg"), ConfigError);
}
