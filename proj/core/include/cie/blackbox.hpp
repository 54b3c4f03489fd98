#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cie/concept_space.hpp"

namespace cie {

/// instance id -> class label assigned by the black-box. The model-agnostic
/// boundary: any classifier that can write this mapping participates.
using PredictionMap = std::map<std::string, std::string>;

/// Deterministic classifier interface. predict() must always return a member
/// of label_set() and be a pure function of the instance's concept set.
class ClassifierOracle {
 public:
  virtual ~ClassifierOracle() = default;
  virtual std::string predict(const ConceptInstance& instance) const = 0;
  virtual const std::vector<std::string>& label_set() const = 0;
};

/// Multinomial Naive Bayes over concept occurrences. Ships as the built-in
/// reference black-box so the pipeline runs without external models.
class ReferenceNB : public ClassifierOracle {
 public:
  std::string predict(const ConceptInstance& instance) const override;
  const std::vector<std::string>& label_set() const override { return labels_; }

  /// Per-class scores: log prior plus the sum of in-vocabulary concept
  /// log-likelihoods, accumulated over the instance's sorted concepts.
  /// Parallel to label_set().
  std::vector<double> log_posteriors(const ConceptInstance& instance) const;

  double alpha() const { return alpha_; }
  const std::vector<std::string>& vocabulary() const { return vocab_; }
  double class_log_prior(const std::string& label) const;
  double concept_log_likelihood(const std::string& label, const std::string& concept_id) const;

  void save(const std::string& path) const;
  static ReferenceNB load(const std::string& path);

  friend ReferenceNB train_reference(const std::vector<ConceptInstance>&, double);

 private:
  std::vector<std::string> labels_;        // sorted; ties break in this order
  std::vector<double> log_priors_;         // parallel to labels_
  std::vector<std::string> vocab_;         // sorted
  std::vector<std::vector<double>> log_likelihoods_;  // [label][vocab index]
  double alpha_ = 1.0;

  int label_index(const std::string& label) const;
};

/// Trains the reference classifier with additive smoothing `alpha` on
/// instances carrying gold labels. Summation runs over sorted concepts and
/// labels, so identical data yields bit-identical parameters.
ReferenceNB train_reference(const std::vector<ConceptInstance>& instances, double alpha = 1.0);

// Predictions JSONL: one {id, label} object per line. Duplicate ids and
// malformed lines are errors.
PredictionMap load_predictions(const std::string& path);
void save_predictions(const PredictionMap& predictions, const std::string& path);

}  // namespace cie
