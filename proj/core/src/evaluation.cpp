#include "cie/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

#include "cie/explainer.hpp"
#include "io_util.hpp"

namespace cie {

namespace {

// Rejection-sampled uniform draw in [0, bound); exact and portable.
std::uint64_t bounded_rand(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t threshold = (0 - bound) % bound;
  while (true) {
    const std::uint64_t r = rng();
    if (r >= threshold) return r % bound;
  }
}

double next_double(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::string padded(const std::string& prefix, int index, int count) {
  int digits = 1;
  for (int v = count - 1; v >= 10; v /= 10) ++digits;
  std::string num = std::to_string(index);
  return prefix + std::string(static_cast<std::size_t>(digits) - num.size(), '0') + num;
}

// Black-box labels for exactly the given instances; throws on a gap.
PredictionMap labels_for(const std::vector<ConceptInstance>& instances,
                         const PredictionMap& blackbox_labels) {
  PredictionMap out;
  for (const ConceptInstance& inst : instances) {
    auto it = blackbox_labels.find(inst.id);
    if (it == blackbox_labels.end()) {
      throw std::runtime_error("no black-box label for instance " + inst.id);
    }
    out.emplace(inst.id, it->second);
  }
  return out;
}

std::vector<int> checked_budgets(std::vector<int> budgets) {
  if (budgets.empty()) throw std::invalid_argument("budget list must not be empty");
  for (int n : budgets) {
    if (n < 1) throw std::invalid_argument("budgets must be >= 1");
  }
  std::sort(budgets.begin(), budgets.end());
  return budgets;
}

}  // namespace

std::pair<std::vector<ConceptInstance>, std::vector<ConceptInstance>> split(
    const std::vector<ConceptInstance>& instances, double train_fraction, std::uint64_t seed) {
  if (instances.size() < 2) throw std::invalid_argument("split needs at least 2 instances");
  if (!(train_fraction > 0.0) || !(train_fraction < 1.0)) {
    throw std::invalid_argument("train fraction must be in (0, 1)");
  }
  const std::size_t n = instances.size();
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    const std::uint64_t j = bounded_rand(rng, i + 1);
    std::swap(perm[i], perm[j]);
  }
  const auto n_train =
      static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  std::pair<std::vector<ConceptInstance>, std::vector<ConceptInstance>> out;
  out.first.reserve(n_train);
  out.second.reserve(n - n_train);
  for (std::size_t i = 0; i < n; ++i) {
    (i < n_train ? out.first : out.second).push_back(instances[perm[i]]);
  }
  return out;
}

FidelityReport fidelity(const PredictionMap& explainer_labels,
                        const PredictionMap& blackbox_labels) {
  std::vector<std::string> missing;
  for (const auto& [id, label] : explainer_labels) {
    if (blackbox_labels.find(id) == blackbox_labels.end()) missing.push_back(id);
  }
  for (const auto& [id, label] : blackbox_labels) {
    if (explainer_labels.find(id) == explainer_labels.end()) missing.push_back(id);
  }
  if (!missing.empty()) {
    std::sort(missing.begin(), missing.end());
    std::string msg = "prediction id sets differ; offending ids:";
    for (std::size_t i = 0; i < missing.size() && i < 10; ++i) msg += " " + missing[i];
    if (missing.size() > 10) msg += " (+" + std::to_string(missing.size() - 10) + " more)";
    throw std::runtime_error(msg);
  }
  if (explainer_labels.empty()) throw std::runtime_error("cannot score empty prediction maps");

  FidelityReport report;
  std::map<std::string, std::pair<std::int64_t, std::int64_t>> per_class;  // label -> (agree, n)
  for (const auto& [id, bb_label] : blackbox_labels) {
    auto& [agree, n] = per_class[bb_label];
    ++n;
    ++report.total;
    if (explainer_labels.at(id) == bb_label) {
      ++agree;
      ++report.agreements;
    }
  }
  report.fidelity = static_cast<double>(report.agreements) / static_cast<double>(report.total);
  for (const auto& [label, counts] : per_class) {
    report.per_class[label] =
        static_cast<double>(counts.first) / static_cast<double>(counts.second);
  }
  return report;
}

std::vector<CurvePoint> curve(const ItemsetStore& store,
                              const std::vector<ConceptInstance>& test_instances,
                              const PredictionMap& blackbox_labels, std::vector<int> budgets) {
  budgets = checked_budgets(std::move(budgets));
  const PredictionMap truth = labels_for(test_instances, blackbox_labels);
  std::vector<CurvePoint> points;
  points.reserve(budgets.size());
  for (int n : budgets) {
    const ItemsetStore restricted = restrict_top_n(store, n);
    PredictionMap assigned;
    for (const ConceptInstance& inst : test_instances) {
      assigned.emplace(inst.id, explain(inst, restricted).assigned_label);
    }
    points.push_back({n, fidelity(assigned, truth).fidelity});
  }
  return points;
}

std::vector<CurvePoint> baseline_curve(const std::vector<ConceptInstance>& reference_instances,
                                       const PredictionMap& reference_labels,
                                       const ClassifierOracle& oracle,
                                       const std::vector<ConceptInstance>& test_instances,
                                       const PredictionMap& blackbox_labels,
                                       std::vector<int> budgets, const PerturbParams& params) {
  budgets = checked_budgets(std::move(budgets));
  std::map<std::string, std::vector<ConceptInstance>> groups;
  std::map<std::string, std::int64_t> frequencies;
  for (const ConceptInstance& inst : reference_instances) {
    auto it = reference_labels.find(inst.id);
    if (it == reference_labels.end()) {
      throw std::runtime_error("no black-box label for instance " + inst.id);
    }
    groups[it->second].push_back(inst);
    ++frequencies[it->second];
  }
  if (groups.empty()) throw std::runtime_error("empty reference set");

  // Fits are the expensive part; aggregate once per class and truncate per
  // budget.
  std::map<std::string, std::vector<std::pair<std::string, double>>> full;
  for (const auto& [label, members] : groups) {
    full[label] = aggregate_coefficients(members, oracle, label, params);
  }

  const PredictionMap truth = labels_for(test_instances, blackbox_labels);
  std::vector<CurvePoint> points;
  points.reserve(budgets.size());
  for (int n : budgets) {
    std::map<std::string, std::vector<std::pair<std::string, double>>> expl;
    for (const auto& [label, coeffs] : full) {
      auto top = coeffs;
      if (top.size() > static_cast<std::size_t>(n)) top.resize(static_cast<std::size_t>(n));
      expl[label] = std::move(top);
    }
    PredictionMap assigned;
    for (const ConceptInstance& inst : test_instances) {
      assigned.emplace(inst.id, linear_assign(inst, expl, frequencies));
    }
    points.push_back({n, fidelity(assigned, truth).fidelity});
  }
  return points;
}

std::vector<ConceptInstance> gen_synth(const SynthSpec& spec) {
  if (spec.num_classes < 2) throw std::invalid_argument("synth spec needs >= 2 classes");
  if (spec.exclusive_per_class < 1) {
    throw std::invalid_argument("synth spec needs >= 1 exclusive concept per class");
  }
  if (spec.shared_noise < 0) throw std::invalid_argument("shared_noise must be >= 0");
  if (spec.instances < spec.num_classes) {
    throw std::invalid_argument("synth spec needs at least one instance per class");
  }
  if (spec.concepts_per_instance < 1) {
    throw std::invalid_argument("concepts_per_instance must be >= 1");
  }
  if (spec.concepts_per_instance > spec.exclusive_per_class + spec.shared_noise) {
    throw std::invalid_argument(
        "concepts_per_instance exceeds the available distinct concepts per class");
  }

  std::vector<std::vector<std::string>> exclusive(static_cast<std::size_t>(spec.num_classes));
  for (int q = 0; q < spec.num_classes; ++q) {
    for (int e = 0; e < spec.exclusive_per_class; ++e) {
      exclusive[static_cast<std::size_t>(q)].push_back(
          padded("c" + std::to_string(q) + "_x", e, spec.exclusive_per_class));
    }
  }
  std::vector<std::string> noise;
  for (int e = 0; e < spec.shared_noise; ++e) noise.push_back(padded("noise", e, spec.shared_noise));

  std::mt19937_64 rng(spec.seed);
  std::vector<ConceptInstance> out;
  out.reserve(static_cast<std::size_t>(spec.instances));
  for (int m = 0; m < spec.instances; ++m) {
    const auto q = static_cast<std::size_t>(
        bounded_rand(rng, static_cast<std::uint64_t>(spec.num_classes)));
    std::set<std::string> chosen;
    while (chosen.size() < static_cast<std::size_t>(spec.concepts_per_instance)) {
      const bool from_noise = !noise.empty() && next_double(rng) < 0.3;
      const std::vector<std::string>& pool = from_noise ? noise : exclusive[q];
      chosen.insert(pool[bounded_rand(rng, pool.size())]);
    }
    ConceptInstance inst;
    inst.id = padded("s", m, spec.instances);
    inst.concepts.assign(chosen.begin(), chosen.end());
    inst.gold_label = "class" + std::to_string(q);
    out.push_back(std::move(inst));
  }
  return out;
}

std::string fidelity_report_json(const FidelityReport& report) {
  detail::json j;
  j["total"] = report.total;
  j["agreements"] = report.agreements;
  j["fidelity"] = report.fidelity;
  j["per_class"] = report.per_class;
  return j.dump(2);
}

void save_fidelity_report(const FidelityReport& report, const std::string& path) {
  std::ofstream out = detail::open_output(path);
  out << fidelity_report_json(report) << '\n';
}

void save_curve_csv(const std::vector<std::pair<std::string, std::vector<CurvePoint>>>& curves,
                    const std::string& path) {
  std::ofstream out = detail::open_output(path);
  out << "method,n,fidelity\n";
  for (const auto& [method, points] : curves) {
    for (const CurvePoint& p : points) {
      out << method << ',' << p.n << ',' << detail::double_repr(p.fidelity) << '\n';
    }
  }
}

}  // namespace cie
