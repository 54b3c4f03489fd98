// cie: batch frontend for the confident-itemset explanation pipeline.
//
// Every subcommand is a pure function from input files and flags to output
// files; rerunning with the same inputs and seeds reproduces the outputs byte
// for byte. Machine-readable artifacts go to files, stdout carries short
// summaries, and any failure exits 1 with a one-line diagnostic on stderr.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cie/baseline.hpp"
#include "cie/blackbox.hpp"
#include "cie/concept_space.hpp"
#include "cie/evaluation.hpp"
#include "cie/explainer.hpp"
#include "cie/miner.hpp"

namespace {

std::vector<int> parse_budgets(const std::string& s) {
  std::vector<int> budgets;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const std::size_t comma = std::min(s.find(',', pos), s.size());
    const std::string part = s.substr(pos, comma - pos);
    std::size_t used = 0;
    int value = 0;
    try {
      value = std::stoi(part, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (part.empty() || used != part.size() || value < 1) {
      throw std::invalid_argument("budgets must be a comma-separated list of positive integers: " +
                                  s);
    }
    budgets.push_back(value);
    pos = comma + 1;
  }
  return budgets;
}

cie::PredictionMap labels_from_explanations(const std::vector<cie::Explanation>& explanations) {
  cie::PredictionMap labels;
  for (const cie::Explanation& e : explanations) labels[e.instance_id] = e.assigned_label;
  return labels;
}

// Reference instances grouped by their black-box label; throws on a gap so
// the baseline never silently drops instances.
std::map<std::string, std::vector<cie::ConceptInstance>> group_by_label(
    const std::vector<cie::ConceptInstance>& instances, const cie::PredictionMap& predictions) {
  std::map<std::string, std::vector<cie::ConceptInstance>> groups;
  for (const cie::ConceptInstance& inst : instances) {
    auto it = predictions.find(inst.id);
    if (it == predictions.end()) {
      throw std::runtime_error("no black-box label for instance " + inst.id);
    }
    groups[it->second].push_back(inst);
  }
  return groups;
}

void register_map(CLI::App& app) {
  auto* cmd = app.add_subcommand("map", "Map raw text instances to concept sets via a lexicon");
  auto opts = std::make_shared<std::map<std::string, std::string>>();
  cmd->add_option("--lexicon", (*opts)["lexicon"], "Lexicon TSV (concept_id, name, surfaces)")
      ->required();
  cmd->add_option("--input", (*opts)["input"], "Raw instances JSONL ({id, text, label?})")
      ->required();
  cmd->add_option("--out", (*opts)["out"], "Mapped instances JSONL output")->required();
  cmd->callback([opts]() {
    const cie::Lexicon lexicon = cie::load_lexicon(opts->at("lexicon"));
    const std::vector<cie::RawInstance> raw = cie::load_raw_jsonl(opts->at("input"));
    std::vector<cie::ConceptInstance> mapped;
    mapped.reserve(raw.size());
    for (const cie::RawInstance& r : raw) mapped.push_back(cie::map_text(r, lexicon));
    cie::save_mapped_jsonl(mapped, opts->at("out"));
    std::cout << "mapped " << mapped.size() << " instances -> " << opts->at("out") << "\n";
  });
}

void register_synth(CLI::App& app) {
  auto* cmd = app.add_subcommand("synth", "Generate a planted-pattern synthetic dataset");
  auto spec = std::make_shared<cie::SynthSpec>();
  auto out = std::make_shared<std::string>();
  cmd->add_option("--classes", spec->num_classes, "Number of classes")->capture_default_str();
  cmd->add_option("--exclusive-per-class", spec->exclusive_per_class,
                  "Class-exclusive concepts per class")
      ->capture_default_str();
  cmd->add_option("--shared-noise", spec->shared_noise, "Size of the shared noise pool")
      ->capture_default_str();
  cmd->add_option("--instances", spec->instances, "Number of instances")->capture_default_str();
  cmd->add_option("--concepts-per-instance", spec->concepts_per_instance,
                  "Distinct concepts per instance")
      ->capture_default_str();
  cmd->add_option("--seed", spec->seed, "RNG seed")->capture_default_str();
  cmd->add_option("--out", *out, "Mapped instances JSONL output (with gold labels)")->required();
  cmd->callback([spec, out]() {
    const std::vector<cie::ConceptInstance> data = cie::gen_synth(*spec);
    cie::save_mapped_jsonl(data, *out);
    std::cout << "generated " << data.size() << " instances -> " << *out << "\n";
  });
}

void register_split(CLI::App& app) {
  auto* cmd = app.add_subcommand("split", "Deterministic shuffled train/test split");
  auto opts = std::make_shared<std::map<std::string, std::string>>();
  auto fraction = std::make_shared<double>(0.8);
  auto seed = std::make_shared<std::uint64_t>(42);
  cmd->add_option("--input", (*opts)["input"], "Mapped instances JSONL")->required();
  cmd->add_option("--fraction", *fraction, "Train fraction in (0,1)")->capture_default_str();
  cmd->add_option("--seed", *seed, "Shuffle seed")->capture_default_str();
  cmd->add_option("--out-train", (*opts)["train"], "Train split JSONL output")->required();
  cmd->add_option("--out-test", (*opts)["test"], "Test split JSONL output")->required();
  cmd->callback([opts, fraction, seed]() {
    const std::vector<cie::ConceptInstance> instances = cie::load_mapped_jsonl(opts->at("input"));
    const auto [train, test] = cie::split(instances, *fraction, *seed);
    cie::save_mapped_jsonl(train, opts->at("train"));
    cie::save_mapped_jsonl(test, opts->at("test"));
    std::cout << "split " << instances.size() << " instances into " << train.size() << " train / "
              << test.size() << " test\n";
  });
}

void register_bb_train(CLI::App& app) {
  auto* cmd = app.add_subcommand("bb-train", "Train the reference classifier on gold labels");
  auto opts = std::make_shared<std::map<std::string, std::string>>();
  auto alpha = std::make_shared<double>(1.0);
  cmd->add_option("--instances", (*opts)["instances"], "Mapped instances JSONL with gold labels")
      ->required();
  cmd->add_option("--alpha", *alpha, "Additive smoothing")->capture_default_str();
  cmd->add_option("--out", (*opts)["out"], "Model JSON output")->required();
  cmd->callback([opts, alpha]() {
    const std::vector<cie::ConceptInstance> instances =
        cie::load_mapped_jsonl(opts->at("instances"));
    const cie::ReferenceNB model = cie::train_reference(instances, *alpha);
    model.save(opts->at("out"));
    std::cout << "trained on " << instances.size() << " instances, " << model.label_set().size()
              << " classes, " << model.vocabulary().size() << " concepts -> " << opts->at("out")
              << "\n";
  });
}

void register_bb_predict(CLI::App& app) {
  auto* cmd = app.add_subcommand("bb-predict", "Label instances with a trained model");
  auto opts = std::make_shared<std::map<std::string, std::string>>();
  cmd->add_option("--model", (*opts)["model"], "Model JSON")->required();
  cmd->add_option("--instances", (*opts)["instances"], "Mapped instances JSONL")->required();
  cmd->add_option("--out", (*opts)["out"], "Predictions JSONL output")->required();
  cmd->callback([opts]() {
    const cie::ReferenceNB model = cie::ReferenceNB::load(opts->at("model"));
    const std::vector<cie::ConceptInstance> instances =
        cie::load_mapped_jsonl(opts->at("instances"));
    cie::PredictionMap predictions;
    for (const cie::ConceptInstance& inst : instances) {
      predictions[inst.id] = model.predict(inst);
    }
    cie::save_predictions(predictions, opts->at("out"));
    std::cout << "predicted " << predictions.size() << " labels -> " << opts->at("out") << "\n";
  });
}

void register_mine(CLI::App& app) {
  auto* cmd = app.add_subcommand("mine", "Mine confident itemsets per predicted class");
  auto opts = std::make_shared<std::map<std::string, std::string>>();
  auto config = std::make_shared<cie::MinerConfig>();
  auto measure = std::make_shared<std::string>("rule_confidence");
  auto threads = std::make_shared<int>(1);
  cmd->add_option("--instances", (*opts)["instances"], "Mapped instances JSONL")->required();
  cmd->add_option("--predictions", (*opts)["predictions"], "Black-box predictions JSONL")
      ->required();
  cmd->add_option("--min-conf,--min_conf", config->min_conf, "Confidence threshold")
      ->capture_default_str();
  cmd->add_option("--max-k", config->max_k, "Maximum itemset size")->capture_default_str();
  cmd->add_option("--measure", *measure, "Confidence measure: rule_confidence or lift")
      ->capture_default_str();
  cmd->add_option("--min-global-count", config->min_global_count,
                  "Minimum dataset-wide occurrences per itemset")
      ->capture_default_str();
  cmd->add_option("--threads", *threads, "Worker thread cap (output is thread-count independent)")
      ->capture_default_str();
  cmd->add_option("--out", (*opts)["out"], "Itemset store JSON output")->required();
  cmd->callback([opts, config, measure, threads]() {
    config->measure = cie::measure_from_string(*measure);
    const std::vector<cie::ConceptInstance> instances =
        cie::load_mapped_jsonl(opts->at("instances"));
    const cie::PredictionMap predictions = cie::load_predictions(opts->at("predictions"));
    const cie::ItemsetStore store = cie::mine(instances, predictions, *config, *threads);
    cie::save_store(store, opts->at("out"));
    std::size_t mined = 0;
    for (const auto& [label, itemsets] : store.per_class) mined += itemsets.size();
    std::cout << "mined " << mined << " itemsets across " << store.per_class.size()
              << " classes -> " << opts->at("out") << "\n";
  });
}

void register_explain(CLI::App& app) {
  auto* cmd = app.add_subcommand("explain", "Explain instances against a mined store");
  auto opts = std::make_shared<std::map<std::string, std::string>>();
  auto render = std::make_shared<bool>(false);
  cmd->add_option("--store", (*opts)["store"], "Itemset store JSON")->required();
  cmd->add_option("--instances", (*opts)["instances"], "Mapped instances JSONL")->required();
  cmd->add_option("--out", (*opts)["out"], "Explanations JSONL output")->required();
  cmd->add_flag("--render", *render, "Print per-instance text reports to stdout");
  cmd->add_option("--render-out", (*opts)["render_out"], "Write the text reports to a file");
  cmd->add_option("--lexicon", (*opts)["lexicon"],
                  "Lexicon TSV; rendered reports then show preferred names");
  cmd->callback([opts, render]() {
    const cie::ItemsetStore store = cie::load_store(opts->at("store"));
    const std::vector<cie::ConceptInstance> instances =
        cie::load_mapped_jsonl(opts->at("instances"));
    std::vector<cie::Explanation> explanations;
    explanations.reserve(instances.size());
    for (const cie::ConceptInstance& inst : instances) {
      explanations.push_back(cie::explain(inst, store));
    }
    cie::save_explanations(explanations, opts->at("out"));

    const std::string render_out = (*opts)["render_out"];
    if (*render || !render_out.empty()) {
      std::map<std::string, std::string> names;
      if (!(*opts)["lexicon"].empty()) {
        names = cie::load_lexicon(opts->at("lexicon")).concept_table();
      }
      std::string text;
      for (const cie::Explanation& e : explanations) {
        if (!text.empty()) text += "\n";
        text += cie::render(e, names);
      }
      if (*render) std::cout << text;
      if (!render_out.empty()) {
        std::ofstream out(render_out);
        if (!out) throw std::runtime_error("cannot open file for writing: " + render_out);
        out << text;
      }
    }
    std::cout << "explained " << explanations.size() << " instances -> " << opts->at("out")
              << "\n";
  });
}

void register_eval(CLI::App& app) {
  auto* cmd = app.add_subcommand("eval", "Score explainer labels against black-box labels");
  auto opts = std::make_shared<std::map<std::string, std::string>>();
  cmd->add_option("--explanations", (*opts)["explanations"], "Explanations JSONL")->required();
  cmd->add_option("--predictions", (*opts)["predictions"], "Black-box predictions JSONL")
      ->required();
  cmd->add_option("--out", (*opts)["out"], "Also write the report JSON here");
  cmd->callback([opts]() {
    const std::vector<cie::Explanation> explanations =
        cie::load_explanations(opts->at("explanations"));
    const cie::PredictionMap predictions = cie::load_predictions(opts->at("predictions"));
    const cie::FidelityReport report =
        cie::fidelity(labels_from_explanations(explanations), predictions);
    std::cout << cie::fidelity_report_json(report) << "\n";
    if (!(*opts)["out"].empty()) cie::save_fidelity_report(report, opts->at("out"));
  });
}

void register_curve(CLI::App& app) {
  auto* cmd = app.add_subcommand("curve", "Fidelity across class-wise explanation budgets");
  auto opts = std::make_shared<std::map<std::string, std::string>>();
  auto budgets = std::make_shared<std::string>("10,20,30,40,50");
  auto method = std::make_shared<std::string>("cie");
  cmd->add_option("--store", (*opts)["store"], "Itemset store JSON")->required();
  cmd->add_option("--instances", (*opts)["instances"], "Test instances JSONL")->required();
  cmd->add_option("--predictions", (*opts)["predictions"], "Black-box predictions JSONL")
      ->required();
  cmd->add_option("--budgets", *budgets, "Comma-separated decision-unit budgets")
      ->capture_default_str();
  cmd->add_option("--method", *method, "Method name for the CSV rows")->capture_default_str();
  cmd->add_option("--out", (*opts)["out"], "Curve CSV output")->required();
  cmd->callback([opts, budgets, method]() {
    const cie::ItemsetStore store = cie::load_store(opts->at("store"));
    const std::vector<cie::ConceptInstance> instances =
        cie::load_mapped_jsonl(opts->at("instances"));
    const cie::PredictionMap predictions = cie::load_predictions(opts->at("predictions"));
    const std::vector<cie::CurvePoint> points =
        cie::curve(store, instances, predictions, parse_budgets(*budgets));
    cie::save_curve_csv({{*method, points}}, opts->at("out"));
    std::cout << "wrote " << points.size() << " curve points -> " << opts->at("out") << "\n";
  });
}

void register_baseline(CLI::App& app) {
  auto* cmd = app.add_subcommand(
      "baseline", "Perturbation-based linear explanations of the reference classifier");
  auto opts = std::make_shared<std::map<std::string, std::string>>();
  auto params = std::make_shared<cie::PerturbParams>();
  auto top_n = std::make_shared<int>(10);
  auto budgets = std::make_shared<std::string>("10,20,30,40,50");
  cmd->add_option("--model", (*opts)["model"], "Model JSON to explain")->required();
  cmd->add_option("--instances", (*opts)["instances"], "Reference instances JSONL")->required();
  cmd->add_option("--predictions", (*opts)["predictions"],
                  "Black-box predictions JSONL for the reference instances")
      ->required();
  cmd->add_option("--num-samples", params->num_samples, "Perturbation samples per instance")
      ->capture_default_str();
  cmd->add_option("--kernel-width", params->kernel_width, "Proximity kernel width")
      ->capture_default_str();
  cmd->add_option("--ridge", params->ridge_lambda, "Ridge penalty on coefficients")
      ->capture_default_str();
  cmd->add_option("--seed", params->seed, "Perturbation seed")->capture_default_str();
  cmd->add_option("--top-n", *top_n, "Decision units per class in the class-wise CSV")
      ->capture_default_str();
  cmd->add_option("--output-classwise", (*opts)["classwise"], "Class-wise coefficients CSV");
  cmd->add_option("--eval-instances", (*opts)["eval_instances"],
                  "Held-out instances for the fidelity curve");
  cmd->add_option("--eval-predictions", (*opts)["eval_predictions"],
                  "Black-box predictions for the held-out instances");
  cmd->add_option("--budgets", *budgets, "Comma-separated curve budgets")->capture_default_str();
  cmd->add_option("--output-curve", (*opts)["curve"], "Fidelity curve CSV");
  cmd->callback([opts, params, top_n, budgets]() {
    if ((*opts)["classwise"].empty() && (*opts)["curve"].empty()) {
      throw std::invalid_argument("baseline needs --output-classwise and/or --output-curve");
    }
    const bool want_curve = !(*opts)["curve"].empty();
    if (want_curve &&
        ((*opts)["eval_instances"].empty() || (*opts)["eval_predictions"].empty())) {
      throw std::invalid_argument(
          "--output-curve needs --eval-instances and --eval-predictions");
    }
    const cie::ReferenceNB model = cie::ReferenceNB::load(opts->at("model"));
    const std::vector<cie::ConceptInstance> instances =
        cie::load_mapped_jsonl(opts->at("instances"));
    const cie::PredictionMap predictions = cie::load_predictions(opts->at("predictions"));

    if (!(*opts)["classwise"].empty()) {
      const auto groups = group_by_label(instances, predictions);
      std::map<std::string, std::vector<std::pair<std::string, double>>> class_wise;
      for (const auto& [label, members] : groups) {
        class_wise[label] = cie::class_wise_linear(members, model, label, *top_n, *params);
      }
      cie::save_class_wise_csv(class_wise, opts->at("classwise"));
      std::cout << "wrote class-wise coefficients for " << class_wise.size() << " classes -> "
                << opts->at("classwise") << "\n";
    }

    if (want_curve) {
      const std::vector<cie::ConceptInstance> eval_instances =
          cie::load_mapped_jsonl(opts->at("eval_instances"));
      const cie::PredictionMap eval_predictions =
          cie::load_predictions(opts->at("eval_predictions"));
      const std::vector<cie::CurvePoint> points =
          cie::baseline_curve(instances, predictions, model, eval_instances, eval_predictions,
                              parse_budgets(*budgets), *params);
      cie::save_curve_csv({{"baseline", points}}, opts->at("curve"));
      std::cout << "wrote " << points.size() << " curve points -> " << opts->at("curve") << "\n";
    }
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Confident-itemset explanations for black-box classifiers"};
  app.require_subcommand(1);
  register_map(app);
  register_synth(app);
  register_split(app);
  register_bb_train(app);
  register_bb_predict(app);
  register_mine(app);
  register_explain(app);
  register_eval(app);
  register_curve(app);
  register_baseline(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
