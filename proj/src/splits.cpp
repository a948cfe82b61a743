#include "srobench/splits.hpp"

#include <algorithm>
#include <iterator>
#include <random>

namespace srobench {

std::map<int, int> entity_occurrences(const std::vector<ImageExample>& examples, const std::vector<std::size_t>& ids) {
  std::map<int, int> counts;
  for (std::size_t id : ids) {
    for (const auto& t : examples[id].gold) {
      ++counts[t.s];
      ++counts[t.o];
    }
  }
  return counts;
}

namespace {

enum class Side { kTrain, kTest, kMixed, kRemoved };

int count_of(const std::map<int, int>& counts, int entity) {
  auto it = counts.find(entity);
  return it == counts.end() ? 0 : it->second;
}

class FoldBuilder {
 public:
  FoldBuilder(const std::vector<ImageExample>& examples, std::set<SROTriplet> test_triplets, int min_count)
      : examples_(examples),
        test_(std::move(test_triplets)),
        initial_test_(test_),
        min_count_(min_count),
        removed_(examples.size()) {}

  SplitFold run(int fold_id) {
    while (resolve_mixed() || resolve_images() || remove_rare() || move_unsupported()) {
    }
    SplitFold fold;
    fold.name = "fold_" + std::to_string(fold_id);
    fold.fold_id = fold_id;
    for (std::size_t i = 0; i < examples_.size(); ++i) {
      switch (side(i)) {
        case Side::kTrain:
          fold.train.push_back(i);
          if (started_in_test(i)) fold.moved[i] = first_reason(i);
          break;
        case Side::kTest:
          fold.test.push_back(i);
          break;
        case Side::kRemoved:
          fold.removed[i] = removed_[i];
          break;
        case Side::kMixed:
          throw Error("compositional_split: unresolved mixed example");
      }
    }
    return fold;
  }

 private:
  Side side(std::size_t i) const {
    if (!removed_[i].empty()) return Side::kRemoved;
    std::size_t in_test = 0;
    for (const auto& t : examples_[i].gold) in_test += test_.count(t);
    if (in_test == 0) return Side::kTrain;
    return in_test == examples_[i].gold.size() ? Side::kTest : Side::kMixed;
  }

  bool started_in_test(std::size_t i) const {
    return std::all_of(examples_[i].gold.begin(), examples_[i].gold.end(),
                       [&](const SROTriplet& t) { return initial_test_.count(t) > 0; });
  }

  std::string first_reason(std::size_t i) const {
    for (const auto& t : examples_[i].gold) {
      auto it = move_reason_.find(t);
      if (it != move_reason_.end()) return it->second;
    }
    return "moved";
  }

  void move_to_train(const SROTriplet& t, const std::string& reason) {
    if (test_.erase(t) > 0) move_reason_.emplace(t, reason);
  }

  std::vector<std::size_t> ids_on(Side s) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < examples_.size(); ++i) {
      if (side(i) == s) out.push_back(i);
    }
    return out;
  }

  bool resolve_mixed() {
    bool changed = false;
    for (std::size_t i : ids_on(Side::kMixed)) {
      for (const auto& t : examples_[i].gold) move_to_train(t, "mixed_example");
      changed = true;
    }
    return changed;
  }

  bool resolve_images() {
    std::set<std::string> train_images;
    for (std::size_t i : ids_on(Side::kTrain)) train_images.insert(examples_[i].image_id);
    bool changed = false;
    for (std::size_t i : ids_on(Side::kTest)) {
      if (!train_images.count(examples_[i].image_id)) continue;
      for (const auto& t : examples_[i].gold) move_to_train(t, "image_overlap");
      changed = true;
    }
    return changed;
  }

  bool remove_rare() {
    const auto train = ids_on(Side::kTrain);
    const auto counts = entity_occurrences(examples_, train);
    bool changed = false;
    for (std::size_t i : train) {
      for (const auto& t : examples_[i].gold) {
        if (count_of(counts, t.s) < min_count_ || count_of(counts, t.o) < min_count_) {
          removed_[i] = "rare_entity";
          changed = true;
          break;
        }
      }
    }
    return changed;
  }

  bool move_unsupported() {
    const auto counts = entity_occurrences(examples_, ids_on(Side::kTrain));
    std::vector<SROTriplet> to_move;
    for (const auto& t : test_) {
      const int cs = count_of(counts, t.s);
      const int co = count_of(counts, t.o);
      if (cs < min_count_ || co < min_count_) to_move.push_back(t);
    }
    for (const auto& t : to_move) {
      const bool unseen = count_of(counts, t.s) == 0 || count_of(counts, t.o) == 0;
      move_to_train(t, unseen ? "unseen_entity" : "rare_in_train");
    }
    return !to_move.empty();
  }

  const std::vector<ImageExample>& examples_;
  std::set<SROTriplet> test_;
  const std::set<SROTriplet> initial_test_;
  int min_count_;
  std::vector<std::string> removed_;
  std::map<SROTriplet, std::string> move_reason_;
};

}  // namespace

std::vector<SplitFold> compositional_split(const std::vector<ImageExample>& examples, int folds, int min_entity_count,
                                           std::uint64_t seed) {
  if (folds < 2) throw Error("compositional_split: folds must be >= 2");
  std::set<SROTriplet> unique;
  for (const auto& ex : examples) {
    if (ex.gold.empty()) throw Error("compositional_split: example with empty gold set");
    unique.insert(ex.gold.begin(), ex.gold.end());
  }
  if (unique.size() < static_cast<std::size_t>(folds)) {
    throw Error("compositional_split: " + std::to_string(unique.size()) + " unique triplets for " +
                std::to_string(folds) + " folds");
  }
  std::vector<SROTriplet> order(unique.begin(), unique.end());
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<SplitFold> out;
  for (int k = 0; k < folds; ++k) {
    std::set<SROTriplet> group;
    for (std::size_t i = static_cast<std::size_t>(k); i < order.size(); i += static_cast<std::size_t>(folds)) {
      group.insert(order[i]);
    }
    out.push_back(FoldBuilder(examples, std::move(group), min_entity_count).run(k));
  }
  return out;
}

SplitFold benchmark_split(const std::vector<ImageExample>& examples, const std::set<std::string>& official_train_ids) {
  SplitFold fold;
  fold.name = "benchmark";
  for (std::size_t i = 0; i < examples.size(); ++i) {
    (official_train_ids.count(examples[i].image_id) ? fold.train : fold.test).push_back(i);
  }
  return fold;
}

std::vector<SplitViolation> validate_split(const SplitFold& fold, const std::vector<ImageExample>& examples,
                                           int min_entity_count) {
  std::vector<SplitViolation> out;
  std::vector<int> seen(examples.size(), 0);
  auto mark = [&](std::size_t id) {
    if (id >= examples.size()) {
      out.push_back({"partition", "example id " + std::to_string(id) + " out of range"});
      return;
    }
    ++seen[id];
  };
  for (auto id : fold.train) mark(id);
  for (auto id : fold.test) mark(id);
  for (const auto& [id, reason] : fold.removed) mark(id);
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (seen[i] != 1) {
      out.push_back({"partition", "example " + std::to_string(i) + " assigned " + std::to_string(seen[i]) + " times"});
    }
  }

  std::vector<std::size_t> train_ids;
  std::copy_if(fold.train.begin(), fold.train.end(), std::back_inserter(train_ids),
               [&](std::size_t id) { return id < examples.size(); });
  std::set<SROTriplet> train_triplets;
  std::set<std::string> train_images;
  for (auto id : train_ids) {
    train_triplets.insert(examples[id].gold.begin(), examples[id].gold.end());
    train_images.insert(examples[id].image_id);
  }
  const auto counts = entity_occurrences(examples, train_ids);
  std::set<SROTriplet> reported_sro;
  std::set<std::string> reported_images;
  std::set<int> reported_entities;
  for (auto id : fold.test) {
    if (id >= examples.size()) continue;
    const auto& ex = examples[id];
    if (train_images.count(ex.image_id) && reported_images.insert(ex.image_id).second) {
      out.push_back({"shared_image", ex.image_id});
    }
    for (const auto& t : ex.gold) {
      if (train_triplets.count(t) && reported_sro.insert(t).second) {
        out.push_back({"shared_sro", std::to_string(t.s) + "," + std::to_string(t.r) + "," + std::to_string(t.o)});
      }
      for (int e : {t.s, t.o}) {
        if (count_of(counts, e) < min_entity_count && reported_entities.insert(e).second) {
          out.push_back({"unseen_entity", std::to_string(e) + " seen " + std::to_string(count_of(counts, e)) +
                                              " times in train"});
        }
      }
    }
  }
  return out;
}

}  // namespace srobench
