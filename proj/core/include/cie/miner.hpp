#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cie/blackbox.hpp"
#include "cie/concept_space.hpp"

namespace cie {

/// How an itemset's association with a class is scored.
///
/// `rule_confidence` is P(class | itemset): the fraction of itemset-containing
/// instances the black-box assigned to the class, bounded in [0, 1].
/// `lift` is P(itemset | class) / P(itemset), unbounded above, 1 at
/// independence. Both define the score as 0 when the itemset never occurs.
enum class ConfidenceMeasure { rule_confidence, lift };

std::string to_string(ConfidenceMeasure m);
ConfidenceMeasure measure_from_string(const std::string& s);

/// A set of distinct concept ids, kept strictly ascending.
using Itemset = std::vector<std::string>;

/// The instances the black-box assigned to one class.
struct Subspace {
  std::string class_label;
  std::vector<std::string> instance_ids;
};

/// An itemset that cleared min_conf for `class_label` at mining time,
/// together with its occurrence counts. class_count <= global_count.
struct ConfidentItemset {
  Itemset items;
  std::string class_label;
  double confidence = 0.0;
  std::int64_t global_count = 0;  // instances containing the itemset, dataset-wide
  std::int64_t class_count = 0;   // instances containing it within the class subspace
};

struct MinerConfig {
  double min_conf = 0.7;
  int max_k = 3;
  ConfidenceMeasure measure = ConfidenceMeasure::rule_confidence;
  std::int64_t min_global_count = 1;
};

/// All mined itemsets grouped by class, plus the counts needed downstream
/// (class frequencies drive tie-breaking and fallback in the explainer).
/// Every observed class is a key of per_class, empty list or not.
struct ItemsetStore {
  MinerConfig config;
  std::map<std::string, std::vector<ConfidentItemset>> per_class;
  std::map<std::string, std::int64_t> class_instance_counts;
  std::int64_t total_instances = 0;
};

/// Occurrence counting over a fixed mining corpus. Exposes the confidence
/// measure directly; mine() uses an interned fast path with the same
/// arithmetic.
class DatasetCounts {
 public:
  DatasetCounts(const std::vector<ConceptInstance>& instances, const PredictionMap& predictions);

  std::int64_t total() const { return total_; }
  std::int64_t class_size(const std::string& class_label) const;  // throws on unknown class
  std::int64_t global_count(const Itemset& itemset) const;
  std::int64_t class_count(const Itemset& itemset, const std::string& class_label) const;
  double confidence(const Itemset& itemset, const std::string& class_label,
                    ConfidenceMeasure measure) const;

  const std::map<std::string, std::int64_t>& class_sizes() const { return class_sizes_; }

 private:
  std::vector<std::vector<std::string>> concept_sets_;  // sorted, per instance
  std::vector<std::string> labels_;                     // per instance
  std::map<std::string, std::int64_t> class_sizes_;
  std::int64_t total_ = 0;
};

/// The raw confidence arithmetic. global_count == 0 yields 0 under both
/// measures.
double confidence_value(ConfidenceMeasure measure, std::int64_t class_count,
                        std::int64_t class_size, std::int64_t global_count, std::int64_t total);

/// Groups instances by their black-box label, one subspace per observed
/// class, ordered by label. Throws when an instance has no prediction.
std::vector<Subspace> discretize(const std::vector<ConceptInstance>& instances,
                                 const PredictionMap& predictions);

/// Level-wise confident itemset mining, per class subspace.
///
/// Level 1 keeps single items whose confidence clears min_conf and whose
/// global count clears min_global_count. Level K candidates join confident
/// (K-1)-itemsets sharing a (K-2)-prefix and are kept only when every
/// (K-1)-subset is itself confident for the class and the candidate clears
/// both thresholds. Mining stops at max_k or when a level yields nothing.
///
/// Per-class output is sorted by (confidence desc, global_count desc, items
/// ascending). `threads` caps internal parallelism; the output is identical
/// for any thread count.
ItemsetStore mine(const std::vector<ConceptInstance>& instances, const PredictionMap& predictions,
                  const MinerConfig& config, int threads = 1);

// Store JSON round-trips exactly: confidences are serialized with
// shortest-round-trip precision and key order is fixed.
void save_store(const ItemsetStore& store, const std::string& path);
ItemsetStore load_store(const std::string& path);

}  // namespace cie
