#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>

#include "asht/error.hpp"
#include "asht/experiment.hpp"
#include "helpers.hpp"

using namespace asht;

namespace {

PolicySpec spec(std::string kind, std::string label = {}) {
  PolicySpec s;
  s.kind = std::move(kind);
  s.label = std::move(label);
  return s;
}

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.generate = GenerateSpec{4, 6, SyntheticMode::grid(8), 2, 11};
  cfg.policies = {spec("fa-exp"), spec("random")};
  cfg.deltas = {0.1, 0.05};
  cfg.replications = 30;
  cfg.master_seed = 5;
  return cfg;
}

}  // namespace

TEST_CASE("config round trip") {
  ExperimentConfig cfg = small_config();
  PolicySpec nj = spec("nj-pa", "nj-alive");
  nj.alive_pairs = true;
  nj.r = 0.2;
  cfg.policies.push_back(nj);
  PolicySpec rnb = spec("rnb-exp");
  rnb.saturation = 3.5;
  rnb.stop = "timestamps";
  cfg.policies.push_back(rnb);
  cfg.threads = 3;
  cfg.trials_path = "t.csv";
  CHECK(config_from_json(config_to_json(cfg)) == cfg);

  ExperimentConfig files;
  files.instance_files = {"a.json", "b.csv"};
  files.policies = {spec("nj")};
  CHECK(config_from_json(config_to_json(files)) == files);
}

TEST_CASE("config defaults and parse errors") {
  const auto cfg = config_from_json(nlohmann::json::parse(
      R"({"instances": {"generate": {"hyps": 5, "acts": 3}}, "policies": ["random"]})"));
  REQUIRE(cfg.generate);
  CHECK(cfg.generate->mode.kind == SyntheticMode::Kind::Uniform01);
  CHECK(cfg.deltas == std::vector<double>{0.05});
  CHECK(cfg.replications == 100);
  CHECK(cfg.reference_policy == "random");
  CHECK_NOTHROW(cfg.validate());
  CHECK_THROWS_AS(config_from_json(nlohmann::json::array()), ValidationError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"replications": "many"})")),
                  ValidationError);
  CHECK_THROWS_AS(
      config_from_json(nlohmann::json::parse(R"({"instances": {"generate": {"mode": "zipf"}}})")),
      ValidationError);
}

TEST_CASE("policy specs") {
  CHECK(policy_spec_from_json("nj").kind == "nj");
  const auto s = policy_spec_from_json(nlohmann::json::parse(R"({"kind": "fa-exp", "k_max": 3})"));
  CHECK(s.k_max == 3);
  CHECK(s.C == 0.5);
  CHECK(policy_spec_to_json(s) != nullptr);
  CHECK(policy_spec_from_json(policy_spec_to_json(s)) == s);
  CHECK_THROWS_AS(policy_spec_from_json(nlohmann::json::parse(R"({"kind": "fa-exp", "kmax": 3})")),
                  ValidationError);
  CHECK_THROWS_AS(policy_spec_from_json("greedy"), ValidationError);
  CHECK_THROWS_AS(validate_policy_spec(spec("random", "a,b")),
                  ValidationError);
  CHECK(policy_kinds().size() == 7);
}

TEST_CASE("make_policy builds every kind") {
  const Instance inst = generate_synthetic(4, 6, SyntheticMode::grid(8), 3);
  for (const auto& kind : policy_kinds()) {
    const auto p = make_policy(spec(kind), inst, 0.1);
    REQUIRE(p);
    CHECK(p->name() == kind);
  }
}

TEST_CASE("config validation") {
  auto cfg = small_config();
  CHECK_NOTHROW(cfg.validate());
  SUBCASE("delta bounds") {
    for (double d : {0.0, 0.5, -0.1, 0.7}) {
      cfg.deltas = {0.1, d};
      CHECK_THROWS_AS(cfg.validate(), ValidationError);
    }
  }
  SUBCASE("duplicate ids") {
    cfg.policies.push_back(spec("nj", "random"));
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
  }
  SUBCASE("instance source") {
    cfg.instance_files = {"x.json"};
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg.generate.reset();
    cfg.instance_files.clear();
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
  }
  SUBCASE("counts") {
    cfg.replications = 0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
  }
  SUBCASE("empty lists") {
    cfg.policies.clear();
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
  }
}

TEST_CASE("materialized instances") {
  auto cfg = small_config();
  const auto insts = materialize_instances(cfg);
  REQUIRE(insts.size() == 2);
  CHECK(insts[0].id == "syn0");
  CHECK(insts[1].id == "syn1");
  CHECK(instance_to_json(insts[1].instance) ==
        instance_to_json(generate_synthetic(4, 6, SyntheticMode::grid(8), derive_seed({11, 1}))));

  const auto dir = std::filesystem::temp_directory_path() / "asht_test_experiment";
  std::filesystem::create_directories(dir);
  save_instance(insts[0].instance, dir / "saved.json");
  ExperimentConfig files;
  files.instance_files = {(dir / "saved.json").string()};
  files.policies = {spec("random")};
  const auto loaded = materialize_instances(files);
  REQUIRE(loaded.size() == 1);
  CHECK(loaded[0].id == "saved");
  CHECK(instance_to_json(loaded[0].instance) == instance_to_json(insts[0].instance));
  std::filesystem::remove_all(dir);
}

TEST_CASE("experiment records and metrics") {
  const auto cfg = small_config();
  const auto insts = materialize_instances(cfg);
  const auto records = run_experiment(cfg, insts);
  REQUIRE(records.size() == 2 * 2 * 2 * 30);
  CHECK(records.front().instance_id == "syn0");
  CHECK(records.front().policy == "fa-exp");
  CHECK(records.front().delta == 0.1);
  CHECK(records[30].delta == 0.05);
  CHECK(records[60].policy == "random");
  CHECK(records.back().instance_id == "syn1");

  auto threaded = cfg;
  threaded.threads = 4;
  CHECK(run_experiment(threaded, insts) == records);

  const auto j = experiment_metrics_json(cfg, insts, records);
  REQUIRE(j.at("groups").size() == 8);
  for (const auto& g : j.at("groups")) {
    CHECK(g.at("trials") == 30);
    CHECK(g.at("accuracy").get<double>() >= 0.0);
    CHECK(g.at("accuracy").get<double>() <= 1.0);
  }
  CHECK(j.at("capped") == 0);
  REQUIRE(j.contains("curve"));
  CHECK(j.at("curve").size() == 4);

  auto no_ref = cfg;
  no_ref.reference_policy = "missing";
  CHECK_FALSE(experiment_metrics_json(no_ref, insts, records).contains("curve"));
}
