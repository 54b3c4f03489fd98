#pragma once

#include <map>
#include <string>
#include <vector>

#include "cie/concept_space.hpp"
#include "cie/miner.hpp"

namespace cie {

/// Instance-wise explanation: the stored itemsets contained in the instance,
/// grouped per class, with the per-class confidence-sum scores and the label
/// the explainer assigns. Each class score is exactly the sum of that class's
/// matched confidences; fallback_used marks the all-zero case.
struct Explanation {
  std::string instance_id;
  std::map<std::string, std::vector<ConfidentItemset>> matched;
  std::map<std::string, double> class_scores;
  std::string assigned_label;
  bool fallback_used = false;
};

/// Top-N decision units summarizing one class's decision logic.
struct ClassExplanation {
  std::string class_label;
  std::vector<ConfidentItemset> itemsets;
};

/// Every stored itemset that is a subset of the instance's concept set, per
/// class, store order preserved. All store classes appear as keys.
std::map<std::string, std::vector<ConfidentItemset>> match(const ConceptInstance& instance,
                                                           const ItemsetStore& store);

/// Per-class sum of matched confidences; classes with no matches score 0.
std::map<std::string, double> score(
    const std::map<std::string, std::vector<ConfidentItemset>>& matched);

/// Argmax of class_scores. Score ties go to the class with the larger
/// instance count in the store, then to the lexicographically smaller label.
/// All-zero scores fall back to the most frequent class (fallback flag set),
/// frequency ties again lexicographic.
std::pair<std::string, bool> assign_label(const std::map<std::string, double>& class_scores,
                                          const ItemsetStore& store);

/// match -> score -> assign_label, packaged with provenance.
Explanation explain(const ConceptInstance& instance, const ItemsetStore& store);

/// Same store restricted to each class's top n itemsets under the canonical
/// ordering. Valid input for explain().
ItemsetStore restrict_top_n(const ItemsetStore& store, int n);

/// The top-n view per class, ordered by class label.
std::vector<ClassExplanation> class_wise(const ItemsetStore& store, int n);

/// Human-readable block: sample id, predicted class, and the winning class's
/// matched itemsets with confidences, preferred names where the table has
/// them. Unknown ids render as-is.
std::string render(const Explanation& explanation,
                   const std::map<std::string, std::string>& concept_names);

// Explanations JSONL: one object per line with instance_id, assigned_label,
// fallback_used, class_scores, matched (per-class arrays of {items,
// confidence}).
void save_explanations(const std::vector<Explanation>& explanations, const std::string& path);
std::vector<Explanation> load_explanations(const std::string& path);

}  // namespace cie
