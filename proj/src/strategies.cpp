#include "gnas/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace gnas {
namespace {

constexpr std::uint64_t kSamplingStreamTag = 0x53414d504c4552ULL;
constexpr std::uint64_t kTopUpStreamTag = 0x544f505550ULL;
constexpr std::uint64_t kEvoStreamTag = 0x45564f4cULL;

struct RunBook {
  RunResult result;
  std::unordered_set<std::string> missing_keys;  // oracle misses, never re-queried

  /// Queries the oracle for an unseen key and folds the outcome into the
  /// state and the current row. Returns false on an oracle miss.
  bool evaluate(const OracleFn& oracle, const Architecture& arch, int iteration,
                IterationRow& row) {
    const std::string& key = arch.key();
    if (result.state.contains(key) || missing_keys.count(key)) return false;
    const BenchmarkRecord* record = oracle(key);
    ++result.oracle_queries;
    if (!record) {
      missing_keys.insert(key);
      ++row.dropped_not_in_benchmark;
      return false;
    }
    result.state.record(arch, record->val_accuracy, iteration);
    row.batch_keys.push_back(key);
    row.batch_accuracies.push_back(record->val_accuracy);
    return true;
  }

  void close_row(IterationRow& row) {
    if (!result.state.empty()) {
      row.best_so_far_key = result.state.best().arch.key();
      row.best_so_far_val = result.state.best().val_accuracy;
    }
    row.unique_queries = result.oracle_queries;
    if (row.batch_keys.empty()) ++result.stagnant_iterations;
    result.rows.push_back(std::move(row));
  }
};

/// Up to `want` distinct architectures not yet evaluated, by rejection
/// sampling with a deterministic enumeration fallback for nearly-exhausted
/// spaces.
std::vector<Architecture> sample_unseen(const SearchSpace& space, Rng& rng,
                                        const SearchState& state, std::uint64_t want) {
  const std::uint64_t card = space.cardinality();
  const std::uint64_t remaining = card - static_cast<std::uint64_t>(state.evaluated_count());
  want = std::min(want, remaining);
  std::vector<Architecture> out;
  std::unordered_set<std::string> chosen;
  std::uint64_t attempts = 0;
  const std::uint64_t attempt_cap = 256 + 64 * want;
  while (out.size() < want && attempts < attempt_cap) {
    ++attempts;
    Architecture arch = random_architecture(space, rng);
    if (state.contains(arch.key()) || chosen.count(arch.key())) continue;
    chosen.insert(arch.key());
    out.push_back(std::move(arch));
  }
  for (std::uint64_t i = 0; out.size() < want && i < card; ++i) {
    Architecture arch = space.at(i);
    if (state.contains(arch.key()) || chosen.count(arch.key())) continue;
    chosen.insert(arch.key());
    out.push_back(std::move(arch));
  }
  return out;
}

}  // namespace

OracleFn table_oracle(const BenchmarkTable& table) {
  return [&table](const std::string& key) { return table.find(key); };
}

Eigen::ArrayXd softmax(const Eigen::ArrayXd& logits) {
  const Eigen::ArrayXd shifted = logits - logits.maxCoeff();
  const Eigen::ArrayXd exps = shifted.exp();
  return exps / exps.sum();
}

Eigen::ArrayXd reinforce_gradient(const Eigen::ArrayXd& logits, int action, double advantage) {
  if (action < 0 || action >= logits.size())
    throw ContractError("reinforce_gradient: action index out of range");
  Eigen::ArrayXd grad = -advantage * softmax(logits);
  grad[action] += advantage;
  return grad;
}

Eigen::ArrayXd entropy_gradient(const Eigen::ArrayXd& logits) {
  const Eigen::ArrayXd probs = softmax(logits);
  const Eigen::ArrayXd log_probs = probs.log();
  const double entropy = -(probs * log_probs).sum();
  return -probs * (log_probs + entropy);
}

void adam_ascend(Eigen::ArrayXd& params, AdamState& state, const Eigen::ArrayXd& gradient,
                 double learning_rate, double epsilon) {
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  if (state.first_moment.size() != params.size()) {
    state.first_moment = Eigen::ArrayXd::Zero(params.size());
    state.second_moment = Eigen::ArrayXd::Zero(params.size());
  }
  ++state.step;
  state.first_moment = kBeta1 * state.first_moment + (1.0 - kBeta1) * gradient;
  state.second_moment = kBeta2 * state.second_moment + (1.0 - kBeta2) * gradient.square();
  const double bias1 = 1.0 - std::pow(kBeta1, static_cast<double>(state.step));
  const double bias2 = 1.0 - std::pow(kBeta2, static_cast<double>(state.step));
  const Eigen::ArrayXd m_hat = state.first_moment / bias1;
  const Eigen::ArrayXd v_hat = state.second_moment / bias2;
  params += learning_rate * m_hat / (v_hat.sqrt() + epsilon);
}

std::uint64_t sampling_stream_seed(std::uint64_t seed) {
  return splitmix64(seed ^ kSamplingStreamTag);
}

RunResult run_gpt4gnas(const SearchSpace& space, const BenchmarkTable& table,
                       const StrategyConfig& cfg, LLMClient& client,
                       const GptRunOptions& options) {
  GptRunOptions opts = options;
  if (opts.dataset.empty()) opts.dataset = table.dataset();
  return run_gpt4gnas_with_oracle(space, opts.dataset, table_oracle(table), cfg, client, opts);
}

RunResult run_gpt4gnas_with_oracle(const SearchSpace& space, const std::string& dataset,
                                   const OracleFn& oracle, const StrategyConfig& cfg,
                                   LLMClient& client, const GptRunOptions& options) {
  cfg.validate();
  RunBook book;
  book.result.strategy_label = std::string(strategy_name(StrategyKind::kGpt4Gnas));
  book.result.seed = cfg.seed;
  SearchState& state = book.result.state;
  Rng topup_rng(splitmix64(cfg.seed ^ kTopUpStreamTag));

  struct PendingBatch {
    std::vector<Architecture> architectures;
    ParseDiagnostics diagnostics;
    int topped_up = 0;
  };
  auto request_batch = [&](const PromptBundle& prompt) {
    PendingBatch pending;
    ParseResult parsed = parse_architectures(client.complete(prompt), space, cfg.batch_size,
                                             state.evaluated_keys());
    pending.diagnostics.merge(parsed.diagnostics);
    if (parsed.empty_batch()) {  // retry the completion once
      parsed = parse_architectures(client.complete(prompt), space, cfg.batch_size,
                                   state.evaluated_keys());
      pending.diagnostics.merge(parsed.diagnostics);
    }
    if (parsed.empty_batch()) {  // top up to batch size with unevaluated random draws
      pending.architectures =
          sample_unseen(space, topup_rng, state, static_cast<std::uint64_t>(cfg.batch_size));
      pending.topped_up = static_cast<int>(pending.architectures.size());
    } else {
      pending.architectures = std::move(parsed.architectures);
    }
    return pending;
  };

  try {
    const PromptBundle gnas_prompt = build_gnas_prompt(dataset, space, cfg, options.ablation);
    book.result.gnas_prompts_built = 1;
    PendingBatch pending = request_batch(gnas_prompt);

    for (int t = 1; t <= cfg.iterations; ++t) {
      state.set_iteration(t);
      IterationRow row;
      row.iteration = t;
      row.diagnostics = std::move(pending.diagnostics);
      row.topped_up = pending.topped_up;
      book.result.total_topped_up += pending.topped_up;
      for (const Architecture& arch : pending.architectures)
        book.evaluate(oracle, arch, t, row);
      book.close_row(row);

      if (t == cfg.iterations) break;
      if (!state.empty()) {
        const PromptBundle feedback =
            build_feedback_prompt(state, space, cfg, options.ablation, options.feedback);
        ++book.result.feedback_prompts_built;
        pending = request_batch(feedback);
      } else {
        // nothing evaluable yet (every candidate missed the oracle); there is
        // no history to report, so re-issue the GNAS prompt instead
        ++book.result.gnas_prompts_built;
        pending = request_batch(gnas_prompt);
      }
    }
  } catch (const Error& e) {
    book.result.failure = e.what();
  }
  book.result.transcripts = client.transcripts();
  return book.result;
}

RunResult run_random(const SearchSpace& space, const BenchmarkTable& table,
                     const StrategyConfig& cfg) {
  return run_random_with_oracle(space, table_oracle(table), cfg);
}

RunResult run_random_with_oracle(const SearchSpace& space, const OracleFn& oracle,
                                 const StrategyConfig& cfg) {
  cfg.validate();
  RunBook book;
  book.result.strategy_label = std::string(strategy_name(StrategyKind::kRandom));
  book.result.seed = cfg.seed;
  Rng rng(sampling_stream_seed(cfg.seed));

  const std::uint64_t budget =
      static_cast<std::uint64_t>(cfg.iterations) * static_cast<std::uint64_t>(cfg.batch_size);
  const std::uint64_t card = space.cardinality();

  if (budget >= card) {
    // Budget covers the space: evaluate all of it in seeded shuffled order,
    // then stop early.
    std::vector<Architecture> all = enumerate_architectures(space);
    for (std::size_t i = all.size(); i > 1; --i)
      std::swap(all[i - 1], all[uniform_index(rng, i)]);
    std::size_t next = 0;
    for (int t = 1; t <= cfg.iterations && next < all.size(); ++t) {
      IterationRow row;
      row.iteration = t;
      for (int i = 0; i < cfg.batch_size && next < all.size(); ++i)
        book.evaluate(oracle, all[next++], t, row);
      book.close_row(row);
    }
    book.result.early_stop = true;
    return book.result;
  }

  for (int t = 1; t <= cfg.iterations; ++t) {
    IterationRow row;
    row.iteration = t;
    for (int i = 0; i < cfg.batch_size; ++i) {
      const Architecture arch = random_architecture(space, rng);
      book.evaluate(oracle, arch, t, row);  // repeats are skipped, draw consumed
    }
    book.close_row(row);
  }
  return book.result;
}

RunResult run_evolutionary(const SearchSpace& space, const BenchmarkTable& table,
                           const StrategyConfig& cfg) {
  return run_evolutionary_with_oracle(space, table_oracle(table), cfg);
}

RunResult run_evolutionary_with_oracle(const SearchSpace& space, const OracleFn& oracle,
                                       const StrategyConfig& cfg) {
  cfg.validate();
  RunBook book;
  book.result.strategy_label = std::string(strategy_name(StrategyKind::kEvolutionary));
  book.result.seed = cfg.seed;
  SearchState& state = book.result.state;
  Rng rng(splitmix64(cfg.seed ^ kEvoStreamTag));

  struct Individual {
    Architecture arch;
    Accuracy fitness;
    std::size_t eval_order;  // earlier evaluations win fitness ties
  };
  std::vector<Individual> population;
  std::unordered_map<std::string, std::pair<Accuracy, std::size_t>> scores;

  auto score_of = [&](const std::string& key) { return scores.find(key); };
  auto fitness_less = [](const Individual& a, const Individual& b) {
    if (a.fitness != b.fitness) return a.fitness > b.fitness;
    return a.eval_order < b.eval_order;
  };

  {
    IterationRow row;
    row.iteration = 0;  // initial population
    for (Architecture& arch :
         sample_unseen(space, rng, state, static_cast<std::uint64_t>(cfg.evo.population_size))) {
      if (book.evaluate(oracle, arch, 0, row)) {
        const std::size_t order = state.history().size() - 1;
        scores.emplace(arch.key(), std::make_pair(state.history().back().val_accuracy, order));
        population.push_back(Individual{std::move(arch), state.history().back().val_accuracy, order});
      }
    }
    book.close_row(row);
  }
  if (population.empty()) {
    book.result.failure = "no evaluable architecture in the initial population";
    return book.result;
  }

  for (int t = 1; t <= cfg.iterations; ++t) {
    state.set_iteration(t);
    IterationRow row;
    row.iteration = t;
    std::sort(population.begin(), population.end(), fitness_less);
    const std::size_t parent_count =
        std::min<std::size_t>(population.size(), static_cast<std::size_t>(cfg.evo.parent_count));

    for (int i = 0; i < cfg.batch_size; ++i) {
      const Individual& p1 = population[uniform_index(rng, parent_count)];
      const Individual& p2 = population[uniform_index(rng, parent_count)];
      Architecture child = uniform_unit(rng) < cfg.evo.crossover_rate
                               ? crossover(p1.arch, p2.arch, rng)
                               : p1.arch;
      child = mutate(child, space, rng, cfg.evo.mutation_rate);

      if (!state.contains(child.key())) {
        if (!book.evaluate(oracle, child, t, row)) continue;  // oracle miss
        scores.emplace(child.key(),
                       std::make_pair(state.history().back().val_accuracy,
                                      state.history().size() - 1));
      }
      const auto it = score_of(child.key());
      population.push_back(Individual{std::move(child), it->second.first, it->second.second});
      // worst-out replacement keeps the population size fixed
      std::sort(population.begin(), population.end(), fitness_less);
      if (population.size() > static_cast<std::size_t>(cfg.evo.population_size))
        population.pop_back();
    }
    book.close_row(row);
  }
  return book.result;
}

RunResult run_rl(const SearchSpace& space, const BenchmarkTable& table,
                 const StrategyConfig& cfg) {
  return run_rl_with_oracle(space, table_oracle(table), cfg);
}

RunResult run_rl_with_oracle(const SearchSpace& space, const OracleFn& oracle,
                             const StrategyConfig& cfg) {
  cfg.validate();
  RunBook book;
  book.result.strategy_label = std::string(strategy_name(StrategyKind::kRl));
  book.result.seed = cfg.seed;
  SearchState& state = book.result.state;
  // Same stream as run_random: with a zero learning rate the policies stay
  // uniform and the two strategies sample identical trajectories.
  Rng rng(sampling_stream_seed(cfg.seed));

  const int n_ops = static_cast<int>(space.operations().size());
  std::array<Eigen::ArrayXd, kOpSlots> logits;
  std::array<AdamState, kOpSlots> adam;
  logits.fill(Eigen::ArrayXd::Zero(n_ops));
  std::optional<double> baseline;  // warm-started on the first reward

  std::unordered_map<std::string, double> reward_cache;

  for (int t = 1; t <= cfg.iterations; ++t) {
    state.set_iteration(t);
    IterationRow row;
    row.iteration = t;
    for (int i = 0; i < cfg.batch_size; ++i) {
      std::array<int, kOpSlots> actions{};
      for (int slot = 0; slot < kOpSlots; ++slot) {
        const Eigen::ArrayXd probs = softmax(logits[slot]);
        actions[slot] = sample_categorical(
            rng, std::span<const double>(probs.data(), static_cast<std::size_t>(probs.size())));
      }
      const Architecture arch = space.make(actions);

      double reward;
      if (const auto it = reward_cache.find(arch.key()); it != reward_cache.end()) {
        reward = it->second;  // re-sampled architecture; no second oracle query
      } else {
        if (!book.evaluate(oracle, arch, t, row)) continue;
        reward = state.history().back().val_accuracy.percent() / 100.0;
        reward_cache.emplace(arch.key(), reward);
      }

      if (!baseline) baseline = reward;
      const double advantage = reward - *baseline;
      baseline = cfg.rl.baseline_decay * *baseline + (1.0 - cfg.rl.baseline_decay) * reward;

      if (cfg.rl.learning_rate > 0.0) {
        for (int slot = 0; slot < kOpSlots; ++slot) {
          Eigen::ArrayXd grad = reinforce_gradient(logits[slot], actions[slot], advantage);
          if (cfg.rl.entropy_coef > 0.0)
            grad += cfg.rl.entropy_coef * entropy_gradient(logits[slot]);
          adam_ascend(logits[slot], adam[slot], grad, cfg.rl.learning_rate);
        }
      }
    }
    book.close_row(row);
  }

  book.result.rl_policy_probs.reserve(kOpSlots);
  for (int slot = 0; slot < kOpSlots; ++slot) {
    const Eigen::ArrayXd probs = softmax(logits[slot]);
    book.result.rl_policy_probs.emplace_back(probs.data(), probs.data() + probs.size());
  }
  return book.result;
}

RunResult run_strategy(const SearchSpace& space, const BenchmarkTable& table,
                       const StrategyConfig& cfg, LLMClient* client,
                       const GptRunOptions& options) {
  switch (cfg.kind) {
    case StrategyKind::kGpt4Gnas:
      if (!client) throw ContractError("the gpt4gnas strategy needs an LLM client");
      return run_gpt4gnas(space, table, cfg, *client, options);
    case StrategyKind::kRandom: return run_random(space, table, cfg);
    case StrategyKind::kEvolutionary: return run_evolutionary(space, table, cfg);
    case StrategyKind::kRl: return run_rl(space, table, cfg);
  }
  throw ContractError("unknown strategy kind");
}

}  // namespace gnas
