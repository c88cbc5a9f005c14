#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "gnas/accuracy.hpp"
#include "gnas/search_space.hpp"

namespace gnas {

enum class StrategyKind { kGpt4Gnas, kRandom, kEvolutionary, kRl };

std::string_view strategy_name(StrategyKind kind);
StrategyKind strategy_from_name(std::string_view name);

struct EvoConfig {
  int population_size = 50;
  int parent_count = 15;
  double mutation_rate = 0.15;
  double crossover_rate = 0.8;
};

struct RlConfig {
  double learning_rate = 0.00035;
  double baseline_decay = 0.9;
  double entropy_coef = 0.0;
};

/// Knobs shared by every strategy. `iterations` and `batch_size` are the
/// run budget: at most iterations * batch_size unique oracle queries
/// (plus the initial population for the evolutionary strategy).
struct StrategyConfig {
  StrategyKind kind = StrategyKind::kGpt4Gnas;
  int iterations = 15;
  int batch_size = 10;
  std::uint64_t seed = 0;
  /// Exploration phase length advertised in the prompt's strategy section.
  /// Guidance text only; the engine itself has no phase switch.
  int explore_iterations = 3;
  EvoConfig evo;
  RlConfig rl;

  void validate() const;
};

/// One evaluated architecture with the iteration that produced it.
struct EvaluatedArch {
  Architecture arch;
  Accuracy val_accuracy;
  int iteration = 0;
};

/// The mutable state of a search run: evaluated history, the evaluated-key
/// set, and the running best (ties keep the earliest evaluation).
class SearchState {
 public:
  bool contains(const std::string& key) const { return keys_.count(key) > 0; }
  const std::unordered_set<std::string>& evaluated_keys() const { return keys_; }
  const std::vector<EvaluatedArch>& history() const { return history_; }
  std::size_t evaluated_count() const { return history_.size(); }

  int iteration() const { return iteration_; }
  void set_iteration(int t) { iteration_ = t; }

  /// Records an evaluation; returns false (and records nothing) when the key
  /// was already evaluated.
  bool record(Architecture arch, Accuracy val_accuracy, int iteration);

  bool empty() const { return history_.empty(); }
  const EvaluatedArch& best() const;

 private:
  std::vector<EvaluatedArch> history_;
  std::unordered_set<std::string> keys_;
  std::optional<std::size_t> best_index_;
  int iteration_ = 0;
};

/// Parser accounting for one LLM response. Every raw candidate is either
/// valid or lands in exactly one dropped_* bucket.
struct ParseDiagnostics {
  int raw_blocks_found = 0;
  int raw_candidates = 0;
  int valid = 0;
  std::vector<std::string> dropped_invalid_op;  // offending tokens
  int dropped_invalid_op_entries = 0;
  int dropped_wrong_arity = 0;
  int dropped_malformed = 0;
  int dropped_duplicates = 0;
  int dropped_already_evaluated = 0;
  int dropped_excess = 0;

  int total_dropped() const {
    return dropped_invalid_op_entries + dropped_wrong_arity + dropped_malformed +
           dropped_duplicates + dropped_already_evaluated + dropped_excess;
  }

  void merge(const ParseDiagnostics& other);
};

/// One line of the iteration report, identical schema for every strategy.
struct IterationRow {
  int iteration = 0;
  std::vector<std::string> batch_keys;  // unique keys first evaluated this iteration
  std::vector<Accuracy> batch_accuracies;
  std::string best_so_far_key;
  Accuracy best_so_far_val;
  ParseDiagnostics diagnostics;
  int dropped_not_in_benchmark = 0;
  int topped_up = 0;
  std::uint64_t unique_queries = 0;  // cumulative
};

}  // namespace gnas
