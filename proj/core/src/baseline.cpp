#include "cie/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "io_util.hpp"

namespace cie {

namespace {

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Cholesky solve of the SPD normal matrix. Throws if a pivot collapses,
// which cannot happen while the ridge term is positive.
std::vector<double> solve_spd(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double sum = a[i][j];
      for (std::size_t k = 0; k < j; ++k) sum -= a[i][k] * a[j][k];
      if (i == j) {
        if (sum <= 1e-12) throw std::runtime_error("singular normal matrix in perturbation fit");
        a[i][i] = std::sqrt(sum);
      } else {
        a[i][j] = sum / a[j][j];
      }
    }
  }
  // forward then backward substitution
  for (std::size_t i = 0; i < n; ++i) {
    double sum = b[i];
    for (std::size_t k = 0; k < i; ++k) sum -= a[i][k] * b[k];
    b[i] = sum / a[i][i];
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double sum = b[ii];
    for (std::size_t k = ii + 1; k < n; ++k) sum -= a[k][ii] * b[k];
    b[ii] = sum / a[ii][ii];
  }
  return b;
}

}  // namespace

LocalLinearModel perturb_fit(const ConceptInstance& instance, const ClassifierOracle& oracle,
                             const std::string& target_class, const PerturbParams& params) {
  if (instance.concepts.empty()) {
    throw std::invalid_argument("cannot fit a perturbation model on an empty instance");
  }
  if (params.num_samples < 10) throw std::invalid_argument("num_samples must be >= 10");
  if (!(params.kernel_width > 0.0)) throw std::invalid_argument("kernel_width must be > 0");
  if (params.ridge_lambda < 0.0) throw std::invalid_argument("ridge_lambda must be >= 0");

  const std::size_t p = instance.concepts.size();
  std::mt19937_64 rng(splitmix64(params.seed ^ fnv1a64(instance.id)));

  const std::size_t dim = p + 1;  // intercept column plus one per concept
  std::vector<std::vector<double>> a(dim, std::vector<double>(dim, 0.0));
  std::vector<double> b(dim, 0.0);

  std::vector<char> mask(p, 1);
  ConceptInstance perturbed;
  perturbed.id = instance.id;
  for (int s = 0; s < params.num_samples; ++s) {
    std::size_t kept = p;
    if (s > 0) {  // sample 0 is the unperturbed instance
      kept = 0;
      for (std::size_t j = 0; j < p; ++j) {
        mask[j] = static_cast<char>(rng() & 1u);
        kept += static_cast<std::size_t>(mask[j]);
      }
    } else {
      std::fill(mask.begin(), mask.end(), char{1});
    }

    perturbed.concepts.clear();
    for (std::size_t j = 0; j < p; ++j) {
      if (mask[j]) perturbed.concepts.push_back(instance.concepts[j]);
    }
    const double y = oracle.predict(perturbed) == target_class ? 1.0 : 0.0;
    const double d = 1.0 - static_cast<double>(kept) / static_cast<double>(p);
    const double w = std::exp(-(d * d) / (params.kernel_width * params.kernel_width));

    // Accumulate X^T W X and X^T W y for the row (1, mask).
    a[0][0] += w;
    b[0] += w * y;
    for (std::size_t j = 0; j < p; ++j) {
      if (!mask[j]) continue;
      a[j + 1][0] += w;
      b[j + 1] += w * y;
      for (std::size_t l = 0; l <= j; ++l) {
        if (mask[l]) a[j + 1][l + 1] += w;
      }
    }
  }
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = i + 1; j < dim; ++j) a[i][j] = a[j][i];
  }
  for (std::size_t j = 1; j < dim; ++j) a[j][j] += params.ridge_lambda;  // intercept unpenalized

  std::vector<double> beta = solve_spd(std::move(a), std::move(b));

  LocalLinearModel model;
  model.target_class = target_class;
  model.intercept = beta[0];
  for (std::size_t j = 0; j < p; ++j) model.coefficients[instance.concepts[j]] = beta[j + 1];
  model.kernel_width = params.kernel_width;
  model.ridge_lambda = params.ridge_lambda;
  model.num_samples = params.num_samples;
  model.seed = params.seed;
  return model;
}

std::vector<std::pair<std::string, double>> aggregate_coefficients(
    const std::vector<ConceptInstance>& class_instances, const ClassifierOracle& oracle,
    const std::string& class_label, const PerturbParams& params) {
  if (class_instances.empty()) {
    throw std::invalid_argument("no instances to aggregate for class " + class_label);
  }
  std::map<std::string, std::pair<double, std::int64_t>> sums;  // concept -> (sum, n)
  for (const ConceptInstance& inst : class_instances) {
    LocalLinearModel model = perturb_fit(inst, oracle, class_label, params);
    for (const auto& [concept_id, coef] : model.coefficients) {
      auto& [sum, n] = sums[concept_id];
      sum += coef;
      ++n;
    }
  }
  std::vector<std::pair<std::string, double>> out;
  out.reserve(sums.size());
  for (const auto& [concept_id, acc] : sums) {
    out.emplace_back(concept_id, acc.first / static_cast<double>(acc.second));
  }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    if (x.second != y.second) return x.second > y.second;
    return x.first < y.first;
  });
  return out;
}

std::vector<std::pair<std::string, double>> class_wise_linear(
    const std::vector<ConceptInstance>& class_instances, const ClassifierOracle& oracle,
    const std::string& class_label, int n, const PerturbParams& params) {
  if (n < 1) throw std::invalid_argument("top-n budget must be >= 1");
  auto all = aggregate_coefficients(class_instances, oracle, class_label, params);
  if (all.size() > static_cast<std::size_t>(n)) all.resize(static_cast<std::size_t>(n));
  return all;
}

std::string linear_assign(
    const ConceptInstance& instance,
    const std::map<std::string, std::vector<std::pair<std::string, double>>>& class_wise_expl,
    const std::map<std::string, std::int64_t>& class_frequencies) {
  if (class_frequencies.empty()) throw std::runtime_error("no classes to assign from");

  const std::string* best_label = nullptr;
  double best_score = 0.0;
  std::int64_t best_count = 0;
  bool any_match = false;
  for (const auto& [label, count] : class_frequencies) {
    double s = 0.0;
    if (auto it = class_wise_expl.find(label); it != class_wise_expl.end()) {
      for (const auto& [concept_id, coef] : it->second) {
        if (std::binary_search(instance.concepts.begin(), instance.concepts.end(), concept_id)) {
          s += coef;
          any_match = true;
        }
      }
    }
    if (best_label == nullptr || s > best_score || (s == best_score && count > best_count)) {
      best_label = &label;
      best_score = s;
      best_count = count;
    }
  }
  if (!any_match) {
    // No selected concept of any class appears: most frequent class wins,
    // frequency ties lexicographic.
    best_label = nullptr;
    for (const auto& [label, count] : class_frequencies) {
      if (best_label == nullptr || count > best_count) {
        best_label = &label;
        best_count = count;
      }
    }
  }
  return *best_label;
}

void save_class_wise_csv(
    const std::map<std::string, std::vector<std::pair<std::string, double>>>& class_wise_expl,
    const std::string& path) {
  std::ofstream out = detail::open_output(path);
  out << "class,rank,concept_id,aggregate_coefficient\n";
  for (const auto& [label, concepts] : class_wise_expl) {
    for (std::size_t i = 0; i < concepts.size(); ++i) {
      out << label << ',' << (i + 1) << ',' << concepts[i].first << ','
          << detail::double_repr(concepts[i].second) << '\n';
    }
  }
}

}  // namespace cie
