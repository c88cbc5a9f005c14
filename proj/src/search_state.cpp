#include "gnas/search_state.hpp"

namespace gnas {

std::string_view strategy_name(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::kGpt4Gnas: return "gpt4gnas";
    case StrategyKind::kRandom: return "random";
    case StrategyKind::kEvolutionary: return "evolutionary";
    case StrategyKind::kRl: return "rl";
  }
  return "gpt4gnas";
}

StrategyKind strategy_from_name(std::string_view name) {
  if (name == "gpt4gnas") return StrategyKind::kGpt4Gnas;
  if (name == "random") return StrategyKind::kRandom;
  if (name == "evolutionary") return StrategyKind::kEvolutionary;
  if (name == "rl") return StrategyKind::kRl;
  throw ConfigError("unknown strategy: '" + std::string(name) +
                    "' (expected gpt4gnas|random|evolutionary|rl)");
}

void StrategyConfig::validate() const {
  if (iterations < 1) throw ConfigError("strategy iterations must be >= 1");
  if (batch_size < 1) throw ConfigError("strategy batch size must be >= 1");
  if (explore_iterations < 0) throw ConfigError("explore iterations must be >= 0");
  if (evo.population_size < 1) throw ConfigError("population size must be >= 1");
  if (evo.parent_count < 1 || evo.parent_count > evo.population_size)
    throw ConfigError("parent count must be in [1, population size]");
  if (evo.mutation_rate < 0.0 || evo.mutation_rate > 1.0)
    throw ConfigError("mutation rate must be in [0, 1]");
  if (evo.crossover_rate < 0.0 || evo.crossover_rate > 1.0)
    throw ConfigError("crossover rate must be in [0, 1]");
  if (rl.learning_rate < 0.0) throw ConfigError("learning rate must be >= 0");
  if (rl.baseline_decay < 0.0 || rl.baseline_decay >= 1.0)
    throw ConfigError("baseline decay must be in [0, 1)");
}

bool SearchState::record(Architecture arch, Accuracy val_accuracy, int iteration) {
  if (!keys_.insert(arch.key()).second) return false;
  history_.push_back(EvaluatedArch{std::move(arch), val_accuracy, iteration});
  // ties keep the earliest evaluation
  if (!best_index_ || val_accuracy > history_[*best_index_].val_accuracy)
    best_index_ = history_.size() - 1;
  return true;
}

const EvaluatedArch& SearchState::best() const {
  if (!best_index_) throw ContractError("search state has no evaluations yet");
  return history_[*best_index_];
}

void ParseDiagnostics::merge(const ParseDiagnostics& other) {
  raw_blocks_found += other.raw_blocks_found;
  raw_candidates += other.raw_candidates;
  valid += other.valid;
  dropped_invalid_op.insert(dropped_invalid_op.end(), other.dropped_invalid_op.begin(),
                            other.dropped_invalid_op.end());
  dropped_invalid_op_entries += other.dropped_invalid_op_entries;
  dropped_wrong_arity += other.dropped_wrong_arity;
  dropped_malformed += other.dropped_malformed;
  dropped_duplicates += other.dropped_duplicates;
  dropped_already_evaluated += other.dropped_already_evaluated;
  dropped_excess += other.dropped_excess;
}

}  // namespace gnas
