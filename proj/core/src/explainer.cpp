#include "cie/explainer.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

#include "io_util.hpp"

namespace cie {

std::map<std::string, std::vector<ConfidentItemset>> match(const ConceptInstance& instance,
                                                           const ItemsetStore& store) {
  std::map<std::string, std::vector<ConfidentItemset>> matched;
  for (const auto& [label, itemsets] : store.per_class) {
    std::vector<ConfidentItemset>& hits = matched[label];
    for (const ConfidentItemset& cis : itemsets) {
      if (std::includes(instance.concepts.begin(), instance.concepts.end(), cis.items.begin(),
                        cis.items.end())) {
        hits.push_back(cis);
      }
    }
  }
  return matched;
}

std::map<std::string, double> score(
    const std::map<std::string, std::vector<ConfidentItemset>>& matched) {
  std::map<std::string, double> scores;
  for (const auto& [label, itemsets] : matched) {
    double sum = 0.0;
    for (const ConfidentItemset& cis : itemsets) sum += cis.confidence;
    scores[label] = sum;
  }
  return scores;
}

std::pair<std::string, bool> assign_label(const std::map<std::string, double>& class_scores,
                                          const ItemsetStore& store) {
  if (store.class_instance_counts.empty()) {
    throw std::runtime_error("store has no classes");
  }
  // One pass over the sorted class set implements the whole chain: higher
  // score wins, then larger class frequency, then the earlier (smaller)
  // label. The all-zero case degenerates to the frequency fallback.
  const std::string* best_label = nullptr;
  double best_score = 0.0;
  std::int64_t best_count = 0;
  for (const auto& [label, count] : store.class_instance_counts) {
    auto it = class_scores.find(label);
    const double s = it == class_scores.end() ? 0.0 : it->second;
    if (best_label == nullptr || s > best_score ||
        (s == best_score && count > best_count)) {
      best_label = &label;
      best_score = s;
      best_count = count;
    }
  }
  return {*best_label, best_score == 0.0};
}

Explanation explain(const ConceptInstance& instance, const ItemsetStore& store) {
  Explanation e;
  e.instance_id = instance.id;
  e.matched = match(instance, store);
  e.class_scores = score(e.matched);
  auto [label, fallback] = assign_label(e.class_scores, store);
  e.assigned_label = label;
  e.fallback_used = fallback;
  return e;
}

ItemsetStore restrict_top_n(const ItemsetStore& store, int n) {
  if (n < 1) throw std::invalid_argument("top-n budget must be >= 1");
  ItemsetStore out;
  out.config = store.config;
  out.class_instance_counts = store.class_instance_counts;
  out.total_instances = store.total_instances;
  for (const auto& [label, itemsets] : store.per_class) {
    const std::size_t keep = std::min(itemsets.size(), static_cast<std::size_t>(n));
    out.per_class[label].assign(itemsets.begin(),
                                itemsets.begin() + static_cast<std::ptrdiff_t>(keep));
  }
  return out;
}

std::vector<ClassExplanation> class_wise(const ItemsetStore& store, int n) {
  ItemsetStore restricted = restrict_top_n(store, n);
  std::vector<ClassExplanation> out;
  out.reserve(restricted.per_class.size());
  for (auto& [label, itemsets] : restricted.per_class) {
    out.push_back({label, std::move(itemsets)});
  }
  return out;
}

namespace {

// "1.0", "0.75", "0.67" — two decimals with a single trailing zero trimmed,
// the way the report tables read.
std::string format_confidence(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", value);
  std::string s(buf);
  if (s.size() >= 2 && s.back() == '0' && s[s.size() - 2] != '.') s.pop_back();
  return s;
}

}  // namespace

std::string render(const Explanation& explanation,
                   const std::map<std::string, std::string>& concept_names) {
  std::string out;
  out += "Sample: " + explanation.instance_id + "\n";
  out += "Predicted class: " + explanation.assigned_label + "\n";
  if (explanation.fallback_used) {
    out += "Explanation: no matched itemsets (most frequent class assigned)\n";
    return out;
  }
  out += "Explanation:\n";
  auto it = explanation.matched.find(explanation.assigned_label);
  if (it != explanation.matched.end()) {
    std::vector<ConfidentItemset> winning = it->second;
    std::stable_sort(winning.begin(), winning.end(),
                     [](const ConfidentItemset& a, const ConfidentItemset& b) {
                       return a.confidence > b.confidence;
                     });
    for (const ConfidentItemset& cis : winning) {
      out += "  <";
      for (std::size_t i = 0; i < cis.items.size(); ++i) {
        if (i) out += ", ";
        auto name = concept_names.find(cis.items[i]);
        out += (name != concept_names.end() && !name->second.empty()) ? name->second
                                                                      : cis.items[i];
      }
      out += ">  " + format_confidence(cis.confidence) + "\n";
    }
  }
  return out;
}

void save_explanations(const std::vector<Explanation>& explanations, const std::string& path) {
  std::ofstream out = detail::open_output(path);
  for (const Explanation& e : explanations) {
    detail::json j;
    j["instance_id"] = e.instance_id;
    j["assigned_label"] = e.assigned_label;
    j["fallback_used"] = e.fallback_used;
    j["class_scores"] = e.class_scores;
    detail::json matched = detail::json::object();
    for (const auto& [label, itemsets] : e.matched) {
      detail::json arr = detail::json::array();
      for (const ConfidentItemset& cis : itemsets) {
        arr.push_back({{"items", cis.items}, {"confidence", cis.confidence}});
      }
      matched[label] = std::move(arr);
    }
    j["matched"] = std::move(matched);
    out << j.dump() << '\n';
  }
}

std::vector<Explanation> load_explanations(const std::string& path) {
  std::vector<Explanation> out;
  detail::for_each_jsonl(path, [&](std::size_t line_no, const detail::json& j) {
    Explanation e;
    try {
      e.instance_id = j.at("instance_id").get<std::string>();
      e.assigned_label = j.at("assigned_label").get<std::string>();
      e.fallback_used = j.at("fallback_used").get<bool>();
      e.class_scores = j.at("class_scores").get<std::map<std::string, double>>();
      for (const auto& [label, arr] : j.at("matched").items()) {
        std::vector<ConfidentItemset>& hits = e.matched[label];
        for (const auto& entry : arr) {
          ConfidentItemset cis;
          cis.items = entry.at("items").get<std::vector<std::string>>();
          cis.class_label = label;
          cis.confidence = entry.at("confidence").get<double>();
          hits.push_back(std::move(cis));
        }
      }
    } catch (const detail::json::exception& ex) {
      throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                               ": invalid explanation: " + ex.what());
    }
    out.push_back(std::move(e));
  });
  return out;
}

}  // namespace cie
