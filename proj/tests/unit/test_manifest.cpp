#include <doctest.h>

#include "symirk/errors.hpp"
#include "symirk/manifest.hpp"

using namespace symirk;

namespace {

std::string field_of(const std::string& text) {
  try {
    parse_manifest(text).validate();
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST_CASE("emitted manifests parse back to the same run") {
  RunManifest m = published_manifest("oss");
  m.estimator_mode = EstimatorMode::Sequential;
  m.r = 5;
  m.seed = 20170101;
  m.oracle_variant = "fpiea";
  m.oracle_bits = 160;
  m.out_dir = "results/oss run";
  m.threads = 3;
  CHECK(parse_manifest(emit_manifest(m)) == m);
  CHECK(parse_manifest(emit_manifest(RunManifest{})) == RunManifest{});
}

TEST_CASE("manifest values and derived quantities") {
  const RunManifest m = parse_manifest(
      "# comment\n"
      "[problem]\nname = oss\n"
      "[method]\nh = 500/3\nt_end = 1e7\nm = 120\n"
      "[estimator]\nmode = parallel\nr = 4\n");
  CHECK(m.problem == "oss");
  CHECK(m.h() == 500.0 / 3.0);
  CHECK(m.n_steps() == 60000);
  CHECK(m.estimator_mode == EstimatorMode::Parallel);
  CHECK(m.integration().estimator_r == 4);
  CHECK(m.integration().sample_every == 120);
  CHECK(m.integration().n_steps == 60000);
}

TEST_CASE("published parameter sets") {
  const RunManifest n = published_manifest("ncdp");
  CHECK(n.h() == 0x1p-7);
  CHECK(n.n_steps() == (1 << 19));
  CHECK(n.m == 1024);
  CHECK(n.P == 1000);
  const RunManifest c = published_manifest("cdp");
  CHECK(c.n_steps() == (1 << 15));
  CHECK(c.m == 256);
  CHECK_THROWS_AS(published_manifest("kepler"), ConfigError);
}

TEST_CASE("configuration errors name the field") {
  CHECK(field_of("[method]\nh = 0\n") == "method.h");
  CHECK(field_of("[method]\nh = -2^-7\n") == "method.h");
  CHECK(field_of("[method]\nbogus = 1\n") == "method.bogus");
  CHECK(field_of("[nonsense]\n") != "");
  CHECK(field_of("[ensemble]\nP = 1\n") != "");
  CHECK(field_of("[oracle]\nbits = 64\n") != "");
  CHECK(field_of("[method]\nh = 2^-7\n") == "");
  CHECK_THROWS_AS(parse_manifest("[method]\nh\n"), ConfigError);
  CHECK_THROWS_AS(read_manifest("/nonexistent/manifest.txt"), ConfigError);
}
