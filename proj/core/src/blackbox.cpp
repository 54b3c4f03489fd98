#include "cie/blackbox.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include "io_util.hpp"

namespace cie {

int ReferenceNB::label_index(const std::string& label) const {
  auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
  if (it == labels_.end() || *it != label) {
    throw std::runtime_error("unknown class label: " + label);
  }
  return static_cast<int>(it - labels_.begin());
}

double ReferenceNB::class_log_prior(const std::string& label) const {
  return log_priors_[label_index(label)];
}

double ReferenceNB::concept_log_likelihood(const std::string& label,
                                           const std::string& concept_id) const {
  int li = label_index(label);
  auto it = std::lower_bound(vocab_.begin(), vocab_.end(), concept_id);
  if (it == vocab_.end() || *it != concept_id) {
    throw std::runtime_error("concept not in vocabulary: " + concept_id);
  }
  return log_likelihoods_[li][it - vocab_.begin()];
}

std::vector<double> ReferenceNB::log_posteriors(const ConceptInstance& instance) const {
  std::vector<double> scores(labels_.size());
  for (std::size_t li = 0; li < labels_.size(); ++li) {
    // Concept sum first, prior added last: symmetric likelihood tables then
    // produce exact score ties regardless of which class is which.
    double sum = 0.0;
    for (const std::string& c : instance.concepts) {
      auto it = std::lower_bound(vocab_.begin(), vocab_.end(), c);
      if (it != vocab_.end() && *it == c) {
        sum += log_likelihoods_[li][it - vocab_.begin()];
      }
    }
    scores[li] = log_priors_[li] + sum;
  }
  return scores;
}

std::string ReferenceNB::predict(const ConceptInstance& instance) const {
  if (labels_.empty()) throw std::runtime_error("classifier has no labels");
  std::vector<double> scores = log_posteriors(instance);
  std::size_t best = 0;
  for (std::size_t li = 1; li < scores.size(); ++li) {
    if (scores[li] > scores[best]) best = li;  // exact tie keeps label_set order
  }
  return labels_[best];
}

ReferenceNB train_reference(const std::vector<ConceptInstance>& instances, double alpha) {
  if (instances.empty()) throw std::invalid_argument("cannot train on an empty training set");
  if (!(alpha > 0.0)) throw std::invalid_argument("smoothing alpha must be > 0");

  std::set<std::string> label_set;
  std::set<std::string> vocab_set;
  for (const ConceptInstance& inst : instances) {
    if (!inst.gold_label) {
      throw std::invalid_argument("instance " + inst.id + " has no gold label");
    }
    label_set.insert(*inst.gold_label);
    vocab_set.insert(inst.concepts.begin(), inst.concepts.end());
  }

  ReferenceNB model;
  model.alpha_ = alpha;
  model.labels_.assign(label_set.begin(), label_set.end());
  model.vocab_.assign(vocab_set.begin(), vocab_set.end());

  const std::size_t num_labels = model.labels_.size();
  const std::size_t vocab_size = model.vocab_.size();
  std::vector<std::int64_t> class_sizes(num_labels, 0);
  std::vector<std::vector<std::int64_t>> counts(num_labels,
                                                std::vector<std::int64_t>(vocab_size, 0));
  for (const ConceptInstance& inst : instances) {
    auto li = static_cast<std::size_t>(
        std::lower_bound(model.labels_.begin(), model.labels_.end(), *inst.gold_label) -
        model.labels_.begin());
    ++class_sizes[li];
    for (const std::string& c : inst.concepts) {
      auto vi = static_cast<std::size_t>(
          std::lower_bound(model.vocab_.begin(), model.vocab_.end(), c) - model.vocab_.begin());
      ++counts[li][vi];
    }
  }

  const auto total = static_cast<double>(instances.size());
  model.log_priors_.resize(num_labels);
  model.log_likelihoods_.assign(num_labels, std::vector<double>(vocab_size));
  for (std::size_t li = 0; li < num_labels; ++li) {
    model.log_priors_[li] = std::log(static_cast<double>(class_sizes[li]) / total);
    std::int64_t class_total = 0;
    for (std::int64_t c : counts[li]) class_total += c;
    const double denom = static_cast<double>(class_total) + alpha * static_cast<double>(vocab_size);
    for (std::size_t vi = 0; vi < vocab_size; ++vi) {
      model.log_likelihoods_[li][vi] =
          std::log((static_cast<double>(counts[li][vi]) + alpha) / denom);
    }
  }
  return model;
}

void ReferenceNB::save(const std::string& path) const {
  detail::json j;
  j["alpha"] = alpha_;
  j["label_set"] = labels_;
  j["vocabulary"] = vocab_;
  detail::json priors;
  detail::json likelihoods;
  for (std::size_t li = 0; li < labels_.size(); ++li) {
    priors[labels_[li]] = log_priors_[li];
    detail::json row;
    for (std::size_t vi = 0; vi < vocab_.size(); ++vi) {
      row[vocab_[vi]] = log_likelihoods_[li][vi];
    }
    likelihoods[labels_[li]] = std::move(row);
  }
  j["class_log_priors"] = std::move(priors);
  j["concept_log_likelihoods"] = std::move(likelihoods);
  std::ofstream out = detail::open_output(path);
  out << j.dump(2) << '\n';
}

ReferenceNB ReferenceNB::load(const std::string& path) {
  std::ifstream in = detail::open_input(path);
  detail::json j = detail::json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw std::runtime_error(path + ": malformed model JSON");
  }
  ReferenceNB model;
  try {
    model.alpha_ = j.at("alpha").get<double>();
    model.labels_ = j.at("label_set").get<std::vector<std::string>>();
    model.vocab_ = j.at("vocabulary").get<std::vector<std::string>>();
    const auto& priors = j.at("class_log_priors");
    const auto& likelihoods = j.at("concept_log_likelihoods");
    model.log_priors_.reserve(model.labels_.size());
    for (const std::string& label : model.labels_) {
      model.log_priors_.push_back(priors.at(label).get<double>());
      const auto& row = likelihoods.at(label);
      std::vector<double> ll;
      ll.reserve(model.vocab_.size());
      for (const std::string& c : model.vocab_) ll.push_back(row.at(c).get<double>());
      model.log_likelihoods_.push_back(std::move(ll));
    }
  } catch (const detail::json::exception& e) {
    throw std::runtime_error(path + ": invalid model JSON: " + e.what());
  }
  if (!std::is_sorted(model.labels_.begin(), model.labels_.end()) ||
      !std::is_sorted(model.vocab_.begin(), model.vocab_.end())) {
    throw std::runtime_error(path + ": model label_set and vocabulary must be sorted");
  }
  if (!(model.alpha_ > 0.0)) throw std::runtime_error(path + ": model alpha must be > 0");

  // Distribution sanity: priors and per-class likelihoods must exponentiate
  // and sum to 1.
  double prior_sum = 0.0;
  for (double lp : model.log_priors_) prior_sum += std::exp(lp);
  if (std::abs(prior_sum - 1.0) > 1e-9) {
    throw std::runtime_error(path + ": class priors do not sum to 1");
  }
  if (!model.vocab_.empty()) {
    for (std::size_t li = 0; li < model.labels_.size(); ++li) {
      double s = 0.0;
      for (double ll : model.log_likelihoods_[li]) s += std::exp(ll);
      if (std::abs(s - 1.0) > 1e-9) {
        throw std::runtime_error(path + ": likelihoods for class " + model.labels_[li] +
                                 " do not sum to 1");
      }
    }
  }
  return model;
}

PredictionMap load_predictions(const std::string& path) {
  PredictionMap map;
  detail::for_each_jsonl(path, [&](std::size_t line_no, const detail::json& j) {
    std::string id = detail::require_string(j, "id", path, line_no);
    std::string label = detail::require_string(j, "label", path, line_no);
    if (!map.emplace(std::move(id), std::move(label)).second) {
      throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                               ": duplicate instance id " +
                               detail::require_string(j, "id", path, line_no));
    }
  });
  return map;
}

void save_predictions(const PredictionMap& predictions, const std::string& path) {
  std::ofstream out = detail::open_output(path);
  for (const auto& [id, label] : predictions) {
    detail::json j;
    j["id"] = id;
    j["label"] = label;
    out << j.dump() << '\n';
  }
}

}  // namespace cie
