#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "gibbslz/config.hpp"
#include "gibbslz/errors.hpp"

using namespace gibbslz;

TEST_CASE("parse a full config") {
  const ExperimentConfig c = parse_config(R"(
# comment
ensemble.stats = bose
ensemble.beta = 2
ensemble.mu = -0.5     # trailing comment
run.lengths = 2^10, 4096, 2^14
run.replicas = 7
run.seed = 99
run.kind = both
analysis.epsilon = 0.25
analysis.format = jsonl
analysis.typical = absolute
)");
  CHECK(c.stats == Statistics::Bose);
  CHECK(c.beta == 2.0);
  CHECK(c.mu == -0.5);
  CHECK_FALSE(c.density.has_value());
  CHECK(c.lengths == std::vector<std::size_t>{1024, 4096, 16384});
  CHECK(c.replicas == 7);
  CHECK(c.seed == 99);
  CHECK(c.kind == RunKind::Both);
  CHECK(c.epsilon == 0.25);
  CHECK(c.format == OutputFormat::Jsonl);
  CHECK(c.typical == Deviation::Absolute);
}

TEST_CASE("grid dispersion") {
  const ExperimentConfig c = parse_config("ensemble.grid = 0, 1, 0.5\nensemble.mu = -1\n");
  CHECK(c.dispersion.form() == Dispersion::Form::TabulatedGrid);
  CHECK(c.dispersion.grid().size() == 3);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_config("ensemble.beta = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("ensemble.mu = 1\nensemble.bogus = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("ensemble.mu = x\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("ensemble.mu = 1\nrun.lengths = 4096, 1024\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("ensemble.mu = 1\nrun.replicas = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("ensemble.mu = 1\nnot a pair\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("ensemble.mu = 1\nensemble.stats = anyon\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("ensemble.mu = 1\nensemble.grid = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("ensemble.mu = -1\nensemble.dispersion = grid\n"), ConfigError);
}

TEST_CASE("overrides replace mu or density") {
  const ExperimentConfig c = parse_config("ensemble.mu = 1\n", {"ensemble.density=0.3"});
  CHECK_FALSE(c.mu.has_value());
  CHECK(c.density == 0.3);
  CHECK(c.entries.count("ensemble.mu") == 0);
}

TEST_CASE("config hash") {
  const auto a = parse_config("ensemble.mu = 1\nrun.seed = 3\n");
  const auto b = parse_config("run.seed = 3\nensemble.mu = 1\nanalysis.out_dir = /tmp/x\n");
  const auto c = parse_config("ensemble.mu = 1\nrun.seed = 4\n");
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a) != config_hash(c));
  CHECK(config_hash_hex(a).size() == 16);
}

TEST_CASE("resolve ensemble from density") {
  const auto c = parse_config("ensemble.density = 0.5\n");
  const EnsembleSpec s = resolve_ensemble(c);
  CHECK(s.mu == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(target_density(c, s) == 0.5);
}

TEST_CASE("format_double round trips") {
  for (double v : {0.1, 1.0 / 3, 1e-300, 12345.678}) CHECK(std::stod(format_double(v)) == v);
}
