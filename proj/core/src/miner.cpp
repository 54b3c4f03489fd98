#include "cie/miner.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <set>
#include <stdexcept>
#include <thread>
#include <utility>

#include "io_util.hpp"

namespace cie {

std::string to_string(ConfidenceMeasure m) {
  return m == ConfidenceMeasure::rule_confidence ? "rule_confidence" : "lift";
}

ConfidenceMeasure measure_from_string(const std::string& s) {
  if (s == "rule_confidence" || s == "rule") return ConfidenceMeasure::rule_confidence;
  if (s == "lift") return ConfidenceMeasure::lift;
  throw std::invalid_argument("unknown confidence measure: " + s);
}

double confidence_value(ConfidenceMeasure measure, std::int64_t class_count,
                        std::int64_t class_size, std::int64_t global_count, std::int64_t total) {
  if (global_count == 0) return 0.0;
  if (measure == ConfidenceMeasure::rule_confidence) {
    return static_cast<double>(class_count) / static_cast<double>(global_count);
  }
  return (static_cast<double>(class_count) / static_cast<double>(class_size)) /
         (static_cast<double>(global_count) / static_cast<double>(total));
}

namespace {

void validate_itemset(const Itemset& itemset) {
  if (itemset.empty()) throw std::invalid_argument("itemset must contain at least one item");
  for (std::size_t i = 1; i < itemset.size(); ++i) {
    if (!(itemset[i - 1] < itemset[i])) {
      throw std::invalid_argument("itemset items must be strictly ascending");
    }
  }
}

bool contains_all(const std::vector<std::string>& sorted_concepts, const Itemset& itemset) {
  return std::includes(sorted_concepts.begin(), sorted_concepts.end(), itemset.begin(),
                       itemset.end());
}

}  // namespace

DatasetCounts::DatasetCounts(const std::vector<ConceptInstance>& instances,
                             const PredictionMap& predictions) {
  concept_sets_.reserve(instances.size());
  labels_.reserve(instances.size());
  for (const ConceptInstance& inst : instances) {
    auto it = predictions.find(inst.id);
    if (it == predictions.end()) {
      throw std::runtime_error("no prediction for instance " + inst.id);
    }
    concept_sets_.push_back(inst.concepts);
    labels_.push_back(it->second);
    ++class_sizes_[it->second];
  }
  total_ = static_cast<std::int64_t>(instances.size());
}

std::int64_t DatasetCounts::class_size(const std::string& class_label) const {
  auto it = class_sizes_.find(class_label);
  if (it == class_sizes_.end()) throw std::invalid_argument("unknown class label: " + class_label);
  return it->second;
}

std::int64_t DatasetCounts::global_count(const Itemset& itemset) const {
  validate_itemset(itemset);
  std::int64_t count = 0;
  for (const auto& concepts : concept_sets_) {
    if (contains_all(concepts, itemset)) ++count;
  }
  return count;
}

std::int64_t DatasetCounts::class_count(const Itemset& itemset,
                                        const std::string& class_label) const {
  validate_itemset(itemset);
  class_size(class_label);  // unknown class check
  std::int64_t count = 0;
  for (std::size_t i = 0; i < concept_sets_.size(); ++i) {
    if (labels_[i] == class_label && contains_all(concept_sets_[i], itemset)) ++count;
  }
  return count;
}

double DatasetCounts::confidence(const Itemset& itemset, const std::string& class_label,
                                 ConfidenceMeasure measure) const {
  validate_itemset(itemset);
  const std::int64_t cs = class_size(class_label);
  std::int64_t global = 0;
  std::int64_t in_class = 0;
  for (std::size_t i = 0; i < concept_sets_.size(); ++i) {
    if (contains_all(concept_sets_[i], itemset)) {
      ++global;
      if (labels_[i] == class_label) ++in_class;
    }
  }
  return confidence_value(measure, in_class, cs, global, total_);
}

std::vector<Subspace> discretize(const std::vector<ConceptInstance>& instances,
                                 const PredictionMap& predictions) {
  std::map<std::string, std::vector<std::string>> groups;
  for (const ConceptInstance& inst : instances) {
    auto it = predictions.find(inst.id);
    if (it == predictions.end()) {
      throw std::runtime_error("no prediction for instance " + inst.id);
    }
    groups[it->second].push_back(inst.id);
  }
  std::vector<Subspace> out;
  out.reserve(groups.size());
  for (auto& [label, ids] : groups) out.push_back({label, std::move(ids)});
  return out;
}

namespace {

// Mining works on interned item ids. Ids are assigned in lexicographic
// string order, so integer comparisons reproduce the contract's ordering.
struct MiningData {
  std::vector<std::string> items;                       // id -> concept string
  std::vector<std::vector<std::int32_t>> tidlists;      // id -> ascending instance indices
  std::vector<int> instance_class;                      // instance index -> class index
  std::vector<std::string> classes;                     // sorted
  std::vector<std::int64_t> class_sizes;
  std::vector<std::vector<std::int64_t>> item_class_counts;  // [item][class]
  std::int64_t total = 0;
};

MiningData build_mining_data(const std::vector<ConceptInstance>& instances,
                             const PredictionMap& predictions) {
  MiningData data;
  std::set<std::string> item_set;
  std::set<std::string> class_set;
  for (const ConceptInstance& inst : instances) {
    auto it = predictions.find(inst.id);
    if (it == predictions.end()) {
      throw std::runtime_error("no prediction for instance " + inst.id);
    }
    class_set.insert(it->second);
    item_set.insert(inst.concepts.begin(), inst.concepts.end());
  }
  data.items.assign(item_set.begin(), item_set.end());
  data.classes.assign(class_set.begin(), class_set.end());
  data.class_sizes.assign(data.classes.size(), 0);
  data.tidlists.assign(data.items.size(), {});
  data.item_class_counts.assign(data.items.size(),
                                std::vector<std::int64_t>(data.classes.size(), 0));
  data.instance_class.reserve(instances.size());
  data.total = static_cast<std::int64_t>(instances.size());

  for (std::size_t tid = 0; tid < instances.size(); ++tid) {
    const ConceptInstance& inst = instances[tid];
    const std::string& label = predictions.at(inst.id);
    const int ci = static_cast<int>(
        std::lower_bound(data.classes.begin(), data.classes.end(), label) - data.classes.begin());
    data.instance_class.push_back(ci);
    ++data.class_sizes[ci];
    for (const std::string& concept_id : inst.concepts) {
      auto ii = static_cast<std::size_t>(
          std::lower_bound(data.items.begin(), data.items.end(), concept_id) - data.items.begin());
      data.tidlists[ii].push_back(static_cast<std::int32_t>(tid));
      ++data.item_class_counts[ii][ci];
    }
  }
  return data;
}

// One confident itemset in interned form, with its tidlist kept for joins.
struct MinedNode {
  std::vector<std::uint32_t> items;
  std::vector<std::int32_t> tids;
  std::int64_t global = 0;
  std::int64_t in_class = 0;
  double conf = 0.0;
};

std::vector<std::int32_t> intersect_tids(const std::vector<std::int32_t>& a,
                                         const std::vector<std::int32_t>& b) {
  std::vector<std::int32_t> out;
  out.reserve(std::min(a.size(), b.size()));
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

// Runs fn(i) for i in [0, n), split across `threads` workers in contiguous
// chunks. Results must be written to per-index slots to stay deterministic.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || n < 64) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const auto worker_count = static_cast<std::size_t>(threads);
  std::vector<std::thread> workers;
  workers.reserve(worker_count);
  const std::size_t chunk = (n + worker_count - 1) / worker_count;
  for (std::size_t w = 0; w < worker_count; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    workers.emplace_back([&, begin, end] {
      for (std::size_t i = begin; i < end; ++i) fn(i);
    });
  }
  for (auto& t : workers) t.join();
}

}  // namespace

ItemsetStore mine(const std::vector<ConceptInstance>& instances, const PredictionMap& predictions,
                  const MinerConfig& config, int threads) {
  if (instances.empty()) throw std::invalid_argument("cannot mine an empty dataset");
  if (!(config.min_conf > 0.0)) throw std::invalid_argument("min_conf must be > 0");
  if (config.max_k < 1) throw std::invalid_argument("max_k must be >= 1");
  if (config.min_global_count < 0) throw std::invalid_argument("min_global_count must be >= 0");

  const MiningData data = build_mining_data(instances, predictions);

  ItemsetStore store;
  store.config = config;
  store.total_instances = data.total;
  for (std::size_t ci = 0; ci < data.classes.size(); ++ci) {
    store.class_instance_counts[data.classes[ci]] = data.class_sizes[ci];
    store.per_class[data.classes[ci]] = {};
  }

  for (std::size_t ci = 0; ci < data.classes.size(); ++ci) {
    const std::int64_t class_size = data.class_sizes[ci];
    std::vector<MinedNode> accepted;

    // Level 1: every item present in the data is a candidate.
    std::vector<MinedNode> level;
    for (std::size_t ii = 0; ii < data.items.size(); ++ii) {
      const auto global = static_cast<std::int64_t>(data.tidlists[ii].size());
      if (global < config.min_global_count) continue;
      const std::int64_t in_class = data.item_class_counts[ii][ci];
      const double conf =
          confidence_value(config.measure, in_class, class_size, global, data.total);
      if (conf >= config.min_conf) {
        level.push_back({{static_cast<std::uint32_t>(ii)},
                         data.tidlists[ii],
                         global,
                         in_class,
                         conf});
      }
    }

    std::set<std::vector<std::uint32_t>> prev_set;
    for (int k = 2; !level.empty(); ++k) {
      for (MinedNode& node : level) accepted.push_back(node);
      if (k > config.max_k) break;

      prev_set.clear();
      for (const MinedNode& node : level) prev_set.insert(node.items);

      // Candidates: pairs of (k-1)-itemsets sharing a (k-2)-prefix. The
      // level list is lexicographically sorted, so blocks are contiguous and
      // candidates come out sorted as well.
      std::vector<std::pair<std::size_t, std::size_t>> candidates;
      for (std::size_t i = 0; i < level.size(); ++i) {
        for (std::size_t j = i + 1; j < level.size(); ++j) {
          if (!std::equal(level[i].items.begin(), level[i].items.end() - 1,
                          level[j].items.begin(), level[j].items.end() - 1)) {
            break;
          }
          candidates.emplace_back(i, j);
        }
      }

      std::vector<MinedNode> results(candidates.size());
      std::vector<char> keep(candidates.size(), 0);
      parallel_for(candidates.size(), threads, [&](std::size_t idx) {
        const auto& [i, j] = candidates[idx];
        std::vector<std::uint32_t> items = level[i].items;
        items.push_back(level[j].items.back());

        // Closure criterion: every (k-1)-subset must already be confident.
        // The two parents are members by construction; check the rest too.
        std::vector<std::uint32_t> sub(items.begin() + 1, items.end());
        bool closed = prev_set.count(sub) != 0;
        for (std::size_t drop = 1; closed && drop + 1 < items.size(); ++drop) {
          sub[drop - 1] = items[drop - 1];  // sub = items with position `drop` removed
          std::copy(items.begin() + static_cast<std::ptrdiff_t>(drop) + 1, items.end(),
                    sub.begin() + static_cast<std::ptrdiff_t>(drop));
          closed = prev_set.count(sub) != 0;
        }
        if (!closed) return;

        std::vector<std::int32_t> tids = intersect_tids(level[i].tids, level[j].tids);
        const auto global = static_cast<std::int64_t>(tids.size());
        if (global < config.min_global_count) return;
        std::int64_t in_class = 0;
        for (std::int32_t tid : tids) {
          if (data.instance_class[static_cast<std::size_t>(tid)] == static_cast<int>(ci)) {
            ++in_class;
          }
        }
        const double conf =
            confidence_value(config.measure, in_class, class_size, global, data.total);
        if (conf < config.min_conf) return;
        results[idx] = {std::move(items), std::move(tids), global, in_class, conf};
        keep[idx] = 1;
      });

      std::vector<MinedNode> next;
      for (std::size_t idx = 0; idx < results.size(); ++idx) {
        if (keep[idx]) next.push_back(std::move(results[idx]));
      }
      level = std::move(next);
    }

    std::sort(accepted.begin(), accepted.end(), [](const MinedNode& a, const MinedNode& b) {
      if (a.conf != b.conf) return a.conf > b.conf;
      if (a.global != b.global) return a.global > b.global;
      return a.items < b.items;
    });

    std::vector<ConfidentItemset>& out = store.per_class[data.classes[ci]];
    out.reserve(accepted.size());
    for (const MinedNode& node : accepted) {
      ConfidentItemset cis;
      cis.items.reserve(node.items.size());
      for (std::uint32_t id : node.items) cis.items.push_back(data.items[id]);
      cis.class_label = data.classes[ci];
      cis.confidence = node.conf;
      cis.global_count = node.global;
      cis.class_count = node.in_class;
      out.push_back(std::move(cis));
    }
  }
  return store;
}

void save_store(const ItemsetStore& store, const std::string& path) {
  detail::json j;
  j["config"] = {{"min_conf", store.config.min_conf},
                 {"max_k", store.config.max_k},
                 {"measure", to_string(store.config.measure)},
                 {"min_global_count", store.config.min_global_count}};
  j["total_instances"] = store.total_instances;
  j["class_instance_counts"] = store.class_instance_counts;
  detail::json per_class = detail::json::object();
  for (const auto& [label, itemsets] : store.per_class) {
    detail::json arr = detail::json::array();
    for (const ConfidentItemset& cis : itemsets) {
      arr.push_back({{"items", cis.items},
                     {"confidence", cis.confidence},
                     {"global_count", cis.global_count},
                     {"class_count", cis.class_count}});
    }
    per_class[label] = std::move(arr);
  }
  j["per_class"] = std::move(per_class);
  std::ofstream out = detail::open_output(path);
  out << j.dump(2) << '\n';
}

ItemsetStore load_store(const std::string& path) {
  std::ifstream in = detail::open_input(path);
  detail::json j = detail::json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw std::runtime_error(path + ": malformed store JSON");
  }
  ItemsetStore store;
  try {
    const auto& config = j.at("config");
    store.config.min_conf = config.at("min_conf").get<double>();
    store.config.max_k = config.at("max_k").get<int>();
    store.config.measure = measure_from_string(config.at("measure").get<std::string>());
    store.config.min_global_count = config.at("min_global_count").get<std::int64_t>();
    store.total_instances = j.at("total_instances").get<std::int64_t>();
    store.class_instance_counts =
        j.at("class_instance_counts").get<std::map<std::string, std::int64_t>>();
    for (const auto& [label, arr] : j.at("per_class").items()) {
      if (store.class_instance_counts.find(label) == store.class_instance_counts.end()) {
        throw std::runtime_error(path + ": per_class label " + label +
                                 " missing from class_instance_counts");
      }
      std::vector<ConfidentItemset>& out = store.per_class[label];
      for (const auto& entry : arr) {
        ConfidentItemset cis;
        cis.items = entry.at("items").get<std::vector<std::string>>();
        validate_itemset(cis.items);
        cis.class_label = label;
        cis.confidence = entry.at("confidence").get<double>();
        cis.global_count = entry.at("global_count").get<std::int64_t>();
        cis.class_count = entry.at("class_count").get<std::int64_t>();
        if (cis.class_count > cis.global_count) {
          throw std::runtime_error(path + ": itemset class_count exceeds global_count");
        }
        out.push_back(std::move(cis));
      }
    }
  } catch (const detail::json::exception& e) {
    throw std::runtime_error(path + ": invalid store JSON: " + e.what());
  } catch (const std::invalid_argument& e) {
    // Itemset validation speaks in caller terms; here the bad data came
    // from the file, so surface it as a file-format error.
    throw std::runtime_error(path + ": invalid store JSON: " + e.what());
  }
  std::int64_t sum = 0;
  for (const auto& [label, count] : store.class_instance_counts) {
    sum += count;
    store.per_class[label];  // every class is a key even with no itemsets
  }
  if (sum != store.total_instances) {
    throw std::runtime_error(path + ": class_instance_counts do not sum to total_instances");
  }
  return store;
}

}  // namespace cie
