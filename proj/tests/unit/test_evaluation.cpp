#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "cie/evaluation.hpp"
#include "cie/explainer.hpp"
#include "cie/miner.hpp"
#include "support/cli_runner.hpp"
#include "support/fixtures.hpp"

using cie::ConceptInstance;
using cie::FidelityReport;
using cie::PredictionMap;
using cie::SynthSpec;
using testsupport::toy6_instances;
using testsupport::toy6_predictions;

TEST_CASE("split partitions deterministically") {
  std::vector<ConceptInstance> ten;
  for (int i = 0; i < 10; ++i) ten.push_back(testsupport::make_instance("i" + std::to_string(i), {}));

  SUBCASE("10 at 0.8 gives 8/2") {
    const auto [train, test] = cie::split(ten, 0.8, 1);
    CHECK(train.size() == 8);
    CHECK(test.size() == 2);
  }

  SUBCASE("3655 at 0.8 gives 2924/731") {
    std::vector<ConceptInstance> many;
    for (int i = 0; i < 3655; ++i) {
      many.push_back(testsupport::make_instance("i" + std::to_string(i), {}));
    }
    const auto [train, test] = cie::split(many, 0.8, 1);
    CHECK(train.size() == 2924);
    CHECK(test.size() == 731);
  }

  SUBCASE("same seed, same split; disjoint and complete") {
    const auto [train1, test1] = cie::split(ten, 0.7, 99);
    const auto [train2, test2] = cie::split(ten, 0.7, 99);
    REQUIRE(train1.size() == train2.size());
    for (std::size_t i = 0; i < train1.size(); ++i) CHECK(train1[i].id == train2[i].id);

    std::set<std::string> seen;
    for (const auto& inst : train1) seen.insert(inst.id);
    for (const auto& inst : test1) CHECK(seen.insert(inst.id).second);
    CHECK(seen.size() == ten.size());
  }

  SUBCASE("different seeds usually differ") {
    const auto [train1, test1] = cie::split(ten, 0.5, 1);
    const auto [train2, test2] = cie::split(ten, 0.5, 2);
    std::vector<std::string> ids1, ids2;
    for (const auto& inst : train1) ids1.push_back(inst.id);
    for (const auto& inst : train2) ids2.push_back(inst.id);
    CHECK(ids1 != ids2);
  }

  SUBCASE("fraction bounds enforced") {
    CHECK_THROWS_AS(cie::split(ten, 0.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(cie::split(ten, 1.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(cie::split({ten[0]}, 0.5, 1), std::invalid_argument);
  }
}

TEST_CASE("fidelity counts agreements against the black-box") {
  const PredictionMap blackbox = toy6_predictions();

  SUBCASE("identical maps score 1.0") {
    const FidelityReport r = cie::fidelity(blackbox, blackbox);
    CHECK(r.fidelity == 1.0);
    CHECK(r.agreements == 6);
    CHECK(r.per_class == std::map<std::string, double>{{"X", 1.0}, {"Y", 1.0}});
  }

  SUBCASE("total disagreement scores 0.0") {
    PredictionMap flipped;
    for (const auto& [id, label] : blackbox) flipped[id] = (label == "X") ? "Y" : "X";
    CHECK(cie::fidelity(flipped, blackbox).fidelity == 0.0);
  }

  SUBCASE("the fixture's explainer labels score 5/6") {
    const PredictionMap explainer = {{"I1", "X"}, {"I2", "X"}, {"I3", "X"},
                                     {"I4", "Y"}, {"I5", "Y"}, {"I6", "X"}};
    const FidelityReport r = cie::fidelity(explainer, blackbox);
    CHECK(r.total == 6);
    CHECK(r.agreements == 5);
    CHECK(r.fidelity == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
    CHECK(r.per_class.at("X") == 1.0);
    CHECK(r.per_class.at("Y") == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  }

  SUBCASE("aggregate fidelity is symmetric") {
    const PredictionMap other = {{"I1", "X"}, {"I2", "Y"}, {"I3", "X"},
                                 {"I4", "X"}, {"I5", "Y"}, {"I6", "Y"}};
    CHECK(cie::fidelity(other, blackbox).fidelity == cie::fidelity(blackbox, other).fidelity);
  }

  SUBCASE("mismatched id sets are rejected with the offenders named") {
    PredictionMap missing = blackbox;
    missing.erase("I3");
    CHECK_THROWS_WITH_AS(cie::fidelity(missing, blackbox), doctest::Contains("I3"),
                         std::runtime_error);
  }
}

TEST_CASE("curve evaluates the store under shrinking budgets") {
  cie::MinerConfig config;
  const cie::ItemsetStore store = cie::mine(toy6_instances(), toy6_predictions(), config);

  SUBCASE("budget 1 on the fixture") {
    const auto points = cie::curve(store, toy6_instances(), toy6_predictions(), {1});
    REQUIRE(points.size() == 1);
    CHECK(points[0].n == 1);
    CHECK(points[0].fidelity == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
  }

  SUBCASE("saturating budget equals the full-store fidelity exactly") {
    PredictionMap full_labels;
    for (const auto& inst : toy6_instances()) {
      full_labels[inst.id] = cie::explain(inst, store).assigned_label;
    }
    const double full = cie::fidelity(full_labels, toy6_predictions()).fidelity;
    const auto points = cie::curve(store, toy6_instances(), toy6_predictions(), {1, 50});
    CHECK(points.back().fidelity == full);
  }

  SUBCASE("budget validation") {
    CHECK_THROWS_AS(cie::curve(store, toy6_instances(), toy6_predictions(), {}),
                    std::invalid_argument);
    CHECK_THROWS_AS(cie::curve(store, toy6_instances(), toy6_predictions(), {0}),
                    std::invalid_argument);
  }
}

TEST_CASE("gen_synth plants recoverable patterns") {
  SUBCASE("deterministic under the seed") {
    const auto a = cie::gen_synth(SynthSpec{});
    const auto b = cie::gen_synth(SynthSpec{});
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].id == b[i].id);
      CHECK(a[i].concepts == b[i].concepts);
      CHECK(a[i].gold_label == b[i].gold_label);
    }
  }

  SUBCASE("no noise, one concept each: fully separable") {
    SynthSpec spec;
    spec.shared_noise = 0;
    spec.concepts_per_instance = 1;
    spec.instances = 100;
    for (const auto& inst : cie::gen_synth(spec)) {
      REQUIRE(inst.concepts.size() == 1);
      REQUIRE(inst.gold_label.has_value());
      // c<class index>_x...
      const std::string expected_prefix = "c" + inst.gold_label->substr(5) + "_x";
      CHECK(inst.concepts[0].rfind(expected_prefix, 0) == 0);
    }
  }

  SUBCASE("default spec: every exclusive concept clears min_conf 0.7 for its class") {
    const auto data = cie::gen_synth(SynthSpec{});
    std::map<std::string, std::int64_t> global;
    std::map<std::string, std::map<std::string, std::int64_t>> per_class;
    for (const auto& inst : data) {
      for (const auto& c : inst.concepts) {
        ++global[c];
        ++per_class[*inst.gold_label][c];
      }
    }
    for (const auto& [label, counts] : per_class) {
      for (const auto& [concept_id, count] : counts) {
        if (concept_id.rfind("noise", 0) == 0) continue;
        const double conf = static_cast<double>(count) / static_cast<double>(global[concept_id]);
        INFO("concept ", concept_id, " for ", label);
        CHECK(conf > 0.7);
      }
    }
  }

  SUBCASE("impossible spec rejected") {
    SynthSpec spec;
    spec.exclusive_per_class = 2;
    spec.shared_noise = 1;
    spec.concepts_per_instance = 4;
    CHECK_THROWS_AS(cie::gen_synth(spec), std::invalid_argument);
  }

  SUBCASE("noise concepts are shared across classes") {
    SynthSpec spec;
    spec.instances = 400;
    const auto data = cie::gen_synth(spec);
    std::set<std::string> classes_with_noise;
    for (const auto& inst : data) {
      for (const auto& c : inst.concepts) {
        if (c.rfind("noise", 0) == 0) classes_with_noise.insert(*inst.gold_label);
      }
    }
    CHECK(classes_with_noise.size() == 4);
  }
}

TEST_CASE("report serialization") {
  testsupport::TempDir dir;
  FidelityReport report;
  report.total = 6;
  report.agreements = 5;
  report.fidelity = 5.0 / 6.0;
  report.per_class = {{"X", 1.0}, {"Y", 2.0 / 3.0}};

  SUBCASE("JSON carries all fields") {
    const std::string json = cie::fidelity_report_json(report);
    CHECK(json.find("\"total\": 6") != std::string::npos);
    CHECK(json.find("\"agreements\": 5") != std::string::npos);
    CHECK(json.find("\"per_class\"") != std::string::npos);

    cie::save_fidelity_report(report, dir.file("r.json"));
    CHECK(testsupport::read_file(dir.file("r.json")) == json + "\n");
  }

  SUBCASE("curve CSV lists one row per method and budget") {
    cie::save_curve_csv({{"cie", {{10, 0.9}, {20, 1.0}}}, {"baseline", {{10, 0.8}}}},
                        dir.file("curve.csv"));
    CHECK(testsupport::read_file(dir.file("curve.csv")) ==
          "method,n,fidelity\n"
          "cie,10,0.9\n"
          "cie,20,1.0\n"
          "baseline,10,0.8\n");
  }
}
