#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cie/baseline.hpp"
#include "cie/blackbox.hpp"
#include "cie/concept_space.hpp"
#include "cie/miner.hpp"

namespace cie {

/// How well the explainer mimics the black-box: fraction of instances where
/// the two labels agree. Per-class values are computed over the instances
/// the black-box assigned to that class.
struct FidelityReport {
  std::int64_t total = 0;
  std::int64_t agreements = 0;
  double fidelity = 0.0;
  std::map<std::string, double> per_class;
};

struct CurvePoint {
  int n = 0;  // decision-unit budget
  double fidelity = 0.0;
};

/// Planted-pattern generator spec: per class a pool of exclusive concepts,
/// plus a shared noise pool all classes draw from.
struct SynthSpec {
  int num_classes = 4;
  int exclusive_per_class = 10;
  int shared_noise = 20;
  int instances = 500;
  int concepts_per_instance = 5;
  std::uint64_t seed = 42;
};

/// Deterministic shuffled split; train size is round(fraction * n), so the
/// proportions land within one instance of the request.
std::pair<std::vector<ConceptInstance>, std::vector<ConceptInstance>> split(
    const std::vector<ConceptInstance>& instances, double train_fraction, std::uint64_t seed);

/// Requires identical id sets; throws listing the offending ids otherwise.
FidelityReport fidelity(const PredictionMap& explainer_labels,
                        const PredictionMap& blackbox_labels);

/// For each budget n: restrict the store to its per-class top n, explain all
/// test instances against the restriction, and score fidelity against the
/// black-box labels. Points come back ordered by n.
std::vector<CurvePoint> curve(const ItemsetStore& store,
                              const std::vector<ConceptInstance>& test_instances,
                              const PredictionMap& blackbox_labels, std::vector<int> budgets);

/// The analogous curve for the perturbation baseline: class-wise linear
/// explanations are built from the reference instances (grouped by their
/// black-box labels), truncated per budget, and applied to the test
/// instances via linear_assign.
std::vector<CurvePoint> baseline_curve(const std::vector<ConceptInstance>& reference_instances,
                                       const PredictionMap& reference_labels,
                                       const ClassifierOracle& oracle,
                                       const std::vector<ConceptInstance>& test_instances,
                                       const PredictionMap& blackbox_labels,
                                       std::vector<int> budgets, const PerturbParams& params);

/// Synthetic instances with gold labels. Each instance draws its class
/// uniformly, then concepts until it holds concepts_per_instance distinct
/// ones: with probability 0.3 from the shared noise pool (when non-empty),
/// otherwise from its class-exclusive pool.
std::vector<ConceptInstance> gen_synth(const SynthSpec& spec);

void save_fidelity_report(const FidelityReport& report, const std::string& path);
std::string fidelity_report_json(const FidelityReport& report);

/// Curve CSV rows: method, n, fidelity.
void save_curve_csv(const std::vector<std::pair<std::string, std::vector<CurvePoint>>>& curves,
                    const std::string& path);

}  // namespace cie
