#pragma once

// Shared test fixtures. The six-instance dataset below is small enough to
// verify every mining and explanation number by hand, which the miner and
// explainer tests do.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "cie/blackbox.hpp"
#include "cie/concept_space.hpp"

namespace testsupport {

inline cie::ConceptInstance make_instance(std::string id, std::vector<std::string> concepts) {
  cie::ConceptInstance inst;
  inst.id = std::move(id);
  inst.concepts = std::move(concepts);
  return inst;
}

// Six instances over items {a, b, c}, two predicted classes:
//   I1 {a,b} -> X    I4 {b,c} -> Y
//   I2 {a,b} -> X    I5 {c}   -> Y
//   I3 {a,c} -> X    I6 {a,c} -> Y
inline std::vector<cie::ConceptInstance> toy6_instances() {
  return {
      make_instance("I1", {"a", "b"}), make_instance("I2", {"a", "b"}),
      make_instance("I3", {"a", "c"}), make_instance("I4", {"b", "c"}),
      make_instance("I5", {"c"}),      make_instance("I6", {"a", "c"}),
  };
}

inline cie::PredictionMap toy6_predictions() {
  return {{"I1", "X"}, {"I2", "X"}, {"I3", "X"}, {"I4", "Y"}, {"I5", "Y"}, {"I6", "Y"}};
}

struct RandomDataset {
  std::vector<cie::ConceptInstance> instances;
  cie::PredictionMap predictions;
};

// Small random dataset within the brute-force oracle's reach: up to 8
// distinct items, up to 40 instances, up to 4 classes. Instances may have
// empty concept sets; classes may end up unused.
inline RandomDataset random_dataset(std::mt19937_64& rng) {
  const int n_items = 1 + static_cast<int>(rng() % 8);
  const int n_instances = 1 + static_cast<int>(rng() % 40);
  const int n_classes = 1 + static_cast<int>(rng() % 4);

  RandomDataset data;
  for (int i = 0; i < n_instances; ++i) {
    cie::ConceptInstance inst;
    inst.id = "r" + std::to_string(i);
    for (int j = 0; j < n_items; ++j) {
      if (rng() % 5 < 2) inst.concepts.push_back(std::string(1, static_cast<char>('a' + j)));
    }
    data.predictions[inst.id] = "L" + std::to_string(rng() % n_classes);
    data.instances.push_back(std::move(inst));
  }
  return data;
}

}  // namespace testsupport
