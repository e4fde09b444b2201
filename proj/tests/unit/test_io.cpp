#include <doctest.h>

#include <string>

#include "bpire/errors.hpp"
#include "bpire/model_io.hpp"
#include "bpire/rwre.hpp"

using namespace bpire;

TEST_CASE("model text round-trips") {
  for (const auto& name : preset_names()) {
    const auto m = preset_model(name);
    CHECK(parse_model_text(to_config_text(m)) == m);
    CHECK(model_fingerprint(parse_model_text(to_config_text(m))) == model_fingerprint(m));
  }
  const EnvironmentModel odd({{CountLaw::finite({0.5, 0.25, 0.25}), CountLaw::poisson(0.3)},
                              {CountLaw::geometric(0.1), CountLaw::bernoulli(0.7)}},
                             {0.9, 0.1});
  CHECK(parse_model_text(to_config_text(odd)) == odd);
  CHECK(model_fingerprint(odd) != model_fingerprint(preset_model("ENV-A")));
}

TEST_CASE("json models") {
  const std::string doc = R"({"atoms":[
    {"offspring":{"kind":"geometric","param":0.6666666666666666},"immigration":{"kind":"deterministic","param":1},"prob":0.8},
    {"offspring":{"kind":"geometric","param":0.3333333333333333},"immigration":{"kind":"deterministic","param":1},"prob":0.2}]})";
  const auto m = parse_model_text(doc);
  CHECK(m.size() == 2);
  CHECK(m.offspring_mean(0) == doctest::Approx(0.5));
}

TEST_CASE("site text round-trips") {
  const auto s = preset_sites("RW-KHALF").reflected();
  CHECK(parse_sites_text(to_config_text(s)) == s);
  CHECK(parse_sites("RW-K2") == preset_sites("RW-K2"));
}

TEST_CASE("parse errors and validation errors are distinct") {
  CHECK_THROWS_AS(parse_model_text("atoms[0].offspring = {geometric"), ParseError);
  const std::string bad =
      "atoms[0].offspring = {geometric, 1.5}\n"
      "atoms[0].immigration = {deterministic, 1}\n"
      "atoms[0].prob = 0.4\n";
  try {
    parse_model_text(bad);
    FAIL("accepted an invalid model");
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("prob") != std::string::npos);
    CHECK(msg.find("geometric") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_model("/nonexistent/model.txt"), Error);
}

TEST_CASE("manifest hash ignores wall time and workers") {
  RunManifest a{std::string(kToolVersion), 7, model_fingerprint(preset_model("ENV-A")), "simulate", {{"n", "10"}}, 1.0, 1};
  RunManifest b = a;
  b.wall_time_seconds = 99;
  b.workers = 8;
  CHECK(a.hash() == b.hash());
  b.master_seed = 8;
  CHECK(a.hash() != b.hash());
  CHECK(fnv1a64("") == 0xCBF29CE484222325ULL);
  CHECK(fnv1a64("a") == 0xAF63DC4C8601EC8CULL);
}

TEST_CASE("model files on disk") {
  const auto m = parse_model(std::string(BPIRE_TEST_DATA) + "/custom_model.txt");
  CHECK(m.size() == 3);
  CHECK(m.offspring_mean(0) == doctest::Approx(0.7));
  CHECK(parse_model_text(to_config_text(m)) == m);
  try {
    parse_model(std::string(BPIRE_TEST_DATA) + "/bad_model.json");
    FAIL("accepted an invalid model");
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("probs sum 1.1") != std::string::npos);
    CHECK(msg.find("not concentrated at 0") != std::string::npos);
  }
}
