#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cie/blackbox.hpp"
#include "cie/concept_space.hpp"

namespace cie {

struct PerturbParams {
  int num_samples = 500;
  double kernel_width = 0.75;
  double ridge_lambda = 1.0;
  std::uint64_t seed = 0;
};

/// Local linear surrogate of the oracle around one instance, for one target
/// class. Coefficients are keyed only by concepts present in that instance.
struct LocalLinearModel {
  std::string target_class;
  double intercept = 0.0;
  std::map<std::string, double> coefficients;
  double kernel_width = 0.0;
  double ridge_lambda = 0.0;
  int num_samples = 0;
  std::uint64_t seed = 0;
};

/// Perturbation fit: num_samples binary masks over the instance's concepts
/// (all-ones mask always included, the rest keep each concept with
/// probability 1/2), oracle queried per mask, target 1 when the oracle says
/// target_class. Rows are weighted by exp(-d^2 / kernel_width^2) with
/// d = 1 - kept fraction, and the weighted least squares is solved in closed
/// form with ridge penalty on the coefficients (intercept unpenalized).
///
/// The random stream derives from (params.seed, instance.id), so fits for
/// different instances are independent and a fixed seed reproduces the model
/// bit for bit.
LocalLinearModel perturb_fit(const ConceptInstance& instance, const ClassifierOracle& oracle,
                             const std::string& target_class, const PerturbParams& params);

/// Mean coefficient per concept across all per-instance fits in which the
/// concept appears, sorted by aggregate descending (ties lexicographic).
std::vector<std::pair<std::string, double>> aggregate_coefficients(
    const std::vector<ConceptInstance>& class_instances, const ClassifierOracle& oracle,
    const std::string& class_label, const PerturbParams& params);

/// Top-n of aggregate_coefficients. Throws on an empty class.
std::vector<std::pair<std::string, double>> class_wise_linear(
    const std::vector<ConceptInstance>& class_instances, const ClassifierOracle& oracle,
    const std::string& class_label, int n, const PerturbParams& params);

/// Scores each class by the sum of its selected concepts' aggregates over
/// the concepts present in the instance; argmax with the same tie chain as
/// the itemset explainer (frequency, then lexicographic). Instances matching
/// no selected concept of any class fall back to the most frequent class.
std::string linear_assign(
    const ConceptInstance& instance,
    const std::map<std::string, std::vector<std::pair<std::string, double>>>& class_wise_expl,
    const std::map<std::string, std::int64_t>& class_frequencies);

/// Class-wise linear explanations CSV: class, rank, concept_id,
/// aggregate_coefficient.
void save_class_wise_csv(
    const std::map<std::string, std::vector<std::pair<std::string, double>>>& class_wise_expl,
    const std::string& path);

}  // namespace cie
