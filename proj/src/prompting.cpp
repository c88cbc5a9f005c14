#include "gnas/prompting.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

namespace gnas {
namespace {

using nlohmann::json;

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string task_section(const std::string& dataset) {
  std::string s(kTaskMarker);
  s += "\nThe task is to choose the best GNN architecture on a given dataset. "
       "The architecture will be trained and tested on [" +
       dataset + "], and the objective is to maximize model accuracy.\n";
  return s;
}

std::string space_section(const SearchSpace& space, const AblationFlags& ablation) {
  if (!ablation.include_connections && !ablation.include_operations) return {};
  std::string s(kSpaceMarker);
  s += "\n";
  if (ablation.include_connections) {
    s += "A GNN architecture is defined as follows: The first operation is input, the last "
         "operation is output, and the intermediate operations are candidate operations. "
         "The adjacency matrix of operation connections is as follows:\n";
    for (const std::string& row : render_adjacency_rows(space.topology())) s += row + "\n";
    s += "The (i,j)-th element in the adjacency matrix denotes that the output of operation i "
         "will be used as the input of operation j.\n";
  }
  if (ablation.include_operations) {
    const auto& ops = space.operations();
    std::vector<std::string> names;
    names.reserve(ops.size());
    for (const OperationKind& op : ops) names.push_back(op.name);
    s += "There are " + std::to_string(ops.size()) +
         " operations that can be selected, one per op slot: " + join(names, ", ") + ".\n";
    for (const OperationKind& op : ops) {
      s += "- " + op.name;
      if (!op.description.empty()) s += ": " + op.description;
      s += "\n";
    }
  }
  return s;
}

std::string strategy_section(const StrategyConfig& cfg, const AblationFlags& ablation) {
  if (!ablation.include_strategy) return {};
  std::string s(kStrategyMarker);
  s += "\nAt the beginning, when only a few numbers of evaluated architectures are available, "
       "use the exploration strategy to explore the operations. Randomly select a batch of "
       "operations for evaluation. When a certain amount of evaluated architectures are "
       "available, use the exploitation strategy to find the best operations by sampling the "
       "best candidate operations from previously generated candidates. For the first " +
       std::to_string(cfg.explore_iterations) + " iterations, explore; afterwards, exploit.\n";
  return s;
}

std::string output_section(int n, const AblationFlags& ablation, bool feedback) {
  std::string s(kOutputMarker);
  s += "\n";
  if (feedback)
    s += "Propose " + std::to_string(n) +
         " new architectures that do not repeat any architecture reported above.\n";
  s += "Respond with exactly " + std::to_string(n) +
       " architectures as a fenced JSON array of objects, one object per architecture:\n"
       "```json\n"
       "[{\"ops\": [\"<op1>\", \"<op2>\", \"<op3>\", \"<op4>\"]}]\n"
       "```\n"
       "Each \"ops\" list assigns one operation name to op1..op4 in order.";
  if (ablation.include_operations) s += " Use only the listed operation names.";
  s += " Do not repeat architectures that have already been evaluated.\n";
  return s;
}

PromptBundle finish_bundle(std::string user_text, const AblationFlags& ablation) {
  PromptBundle bundle;
  bundle.system_text =
      "You are an expert in graph neural network architecture design. "
      "Follow the requested output format exactly.";
  bundle.user_text = std::move(user_text);
  bundle.ablation = ablation;
  bundle.token_estimate = estimate_tokens(bundle.system_text) + estimate_tokens(bundle.user_text);
  return bundle;
}

// Scans for top-level JSON arrays, skipping over string literals so that
// brackets inside quoted text do not derail the depth counter.
std::vector<json> scan_json_arrays(std::string_view text) {
  std::vector<json> arrays;
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] != '[') {
      ++i;
      continue;
    }
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    std::size_t end = std::string_view::npos;
    for (std::size_t j = i; j < text.size(); ++j) {
      const char c = text[j];
      if (in_string) {
        if (escaped)
          escaped = false;
        else if (c == '\\')
          escaped = true;
        else if (c == '"')
          in_string = false;
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '[') {
        ++depth;
      } else if (c == ']') {
        if (--depth == 0) {
          end = j;
          break;
        }
      }
    }
    if (end == std::string_view::npos) {
      ++i;
      continue;
    }
    json parsed = json::parse(text.substr(i, end - i + 1), nullptr, false);
    if (!parsed.is_discarded() && parsed.is_array()) {
      arrays.push_back(std::move(parsed));
      i = end + 1;
    } else {
      ++i;  // malformed region; keep looking for nested arrays
    }
  }
  return arrays;
}

struct FencedBlocks {
  int count = 0;
  std::vector<std::string_view> bodies;
};

FencedBlocks extract_fenced_blocks(std::string_view text) {
  FencedBlocks out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t open = text.find("```", pos);
    if (open == std::string_view::npos) break;
    std::size_t body_start = text.find('\n', open + 3);
    if (body_start == std::string_view::npos) break;  // fence with no body
    ++body_start;
    const std::size_t close = text.find("```", body_start);
    if (close == std::string_view::npos) break;  // unterminated fence
    ++out.count;
    out.bodies.push_back(text.substr(body_start, close - body_start));
    pos = close + 3;
  }
  return out;
}

}  // namespace

AblationFlags ablation_flags(AblationVariant variant) {
  AblationFlags flags;
  switch (variant) {
    case AblationVariant::kFull: break;
    case AblationVariant::kNoConnections: flags.include_connections = false; break;
    case AblationVariant::kNoOperations: flags.include_operations = false; break;
    case AblationVariant::kNoStrategy: flags.include_strategy = false; break;
  }
  return flags;
}

std::string_view ablation_label(AblationVariant variant) {
  switch (variant) {
    case AblationVariant::kFull: return "GPT4GNAS";
    case AblationVariant::kNoConnections: return "¬Connections";
    case AblationVariant::kNoOperations: return "¬Operations";
    case AblationVariant::kNoStrategy: return "¬Strategy";
  }
  return "GPT4GNAS";
}

std::string_view ablation_slug(AblationVariant variant) {
  switch (variant) {
    case AblationVariant::kFull: return "none";
    case AblationVariant::kNoConnections: return "no-connections";
    case AblationVariant::kNoOperations: return "no-operations";
    case AblationVariant::kNoStrategy: return "no-strategy";
  }
  return "none";
}

AblationVariant ablation_from_slug(std::string_view slug) {
  if (slug == "none" || slug.empty()) return AblationVariant::kFull;
  if (slug == "no-connections") return AblationVariant::kNoConnections;
  if (slug == "no-operations") return AblationVariant::kNoOperations;
  if (slug == "no-strategy") return AblationVariant::kNoStrategy;
  throw ConfigError("unknown ablation variant: '" + std::string(slug) +
                    "' (expected none|no-connections|no-operations|no-strategy)");
}

int estimate_tokens(std::string_view text) {
  return static_cast<int>((text.size() + 3) / 4);
}

std::vector<std::string> render_adjacency_rows(const MacroTopology& topology) {
  std::vector<std::string> rows;
  rows.reserve(kTopologyNodes);
  for (int i = 0; i < kTopologyNodes; ++i) {
    std::string row = MacroTopology::node_name(i) + ": [";
    for (int j = 0; j < kTopologyNodes; ++j) {
      if (j) row += ", ";
      row += topology.edge(i, j) ? '1' : '0';
    }
    row += "]";
    rows.push_back(std::move(row));
  }
  return rows;
}

PromptBundle build_gnas_prompt(const std::string& dataset, const SearchSpace& space,
                               const StrategyConfig& cfg, const AblationFlags& ablation) {
  if (dataset.empty()) throw ContractError("build_gnas_prompt: dataset name is empty");
  std::string text = task_section(dataset);
  if (std::string s = space_section(space, ablation); !s.empty()) text += "\n" + s;
  if (std::string s = strategy_section(cfg, ablation); !s.empty()) text += "\n" + s;
  text += "\n" + output_section(cfg.batch_size, ablation, /*feedback=*/false);
  return finish_bundle(std::move(text), ablation);
}

std::string feedback_line(const std::string& arch_key, Accuracy val_accuracy) {
  return "Model [" + arch_key + "] achieves an accuracy of " + val_accuracy.str() + ".";
}

PromptBundle build_feedback_prompt(const SearchState& state, const SearchSpace& space,
                                   const StrategyConfig& cfg, const AblationFlags& ablation,
                                   const FeedbackOptions& options) {
  if (state.empty())
    throw ContractError("build_feedback_prompt: no evaluated architectures to report");

  const auto& history = state.history();
  std::string tail;
  if (options.reattach_space_sections) {
    if (std::string s = space_section(space, ablation); !s.empty()) tail += "\n" + s;
    if (std::string s = strategy_section(cfg, ablation); !s.empty()) tail += "\n" + s;
  }
  tail += "\n" + output_section(cfg.batch_size, ablation, /*feedback=*/true);

  auto assemble = [&](const std::vector<std::size_t>& picked, const std::string& note) {
    std::string text(kFeedbackMarker);
    text += "\n";
    if (!note.empty()) text += note + "\n";
    for (std::size_t idx : picked)
      text += feedback_line(history[idx].arch.key(), history[idx].val_accuracy) + "\n";
    text += tail;
    return text;
  };

  // Full history first; fall back to top-K plus the most recent iteration.
  std::vector<std::size_t> all(history.size());
  std::iota(all.begin(), all.end(), 0);
  std::string full = assemble(all, "");
  if (estimate_tokens(full) <= options.budget_tokens)
    return finish_bundle(std::move(full), ablation);

  const int last_iteration =
      std::max_element(history.begin(), history.end(), [](const auto& a, const auto& b) {
        return a.iteration < b.iteration;
      })->iteration;

  std::vector<char> included(history.size(), 0);
  std::vector<std::size_t> picked;
  auto add = [&](std::size_t idx) {
    if (!included[idx]) {
      included[idx] = 1;
      picked.push_back(idx);
    }
  };
  for (std::size_t i = 0; i < history.size(); ++i)
    if (history[i].iteration == last_iteration) add(i);

  // Best first, then the rest by accuracy (ties keep the earlier evaluation).
  std::vector<std::size_t> by_acc(history.size());
  std::iota(by_acc.begin(), by_acc.end(), 0);
  std::stable_sort(by_acc.begin(), by_acc.end(), [&](std::size_t a, std::size_t b) {
    return history[a].val_accuracy > history[b].val_accuracy;
  });

  const int overhead = estimate_tokens(assemble({}, ""));
  const int note_allowance = 64;
  int used = overhead + note_allowance;
  for (std::size_t idx : picked)
    used += estimate_tokens(feedback_line(history[idx].arch.key(), history[idx].val_accuracy)) + 1;

  int top_k_count = 0;
  for (std::size_t rank = 0; rank < by_acc.size(); ++rank) {
    const std::size_t idx = by_acc[rank];
    if (included[idx]) continue;
    const int cost =
        estimate_tokens(feedback_line(history[idx].arch.key(), history[idx].val_accuracy)) + 1;
    // The best-so-far architecture is always reported, budget or not.
    const bool is_best = idx == static_cast<std::size_t>(&state.best() - history.data());
    if (!is_best && used + cost > options.budget_tokens) break;
    used += cost;
    add(idx);
    ++top_k_count;
  }
  // Make sure the best entry is present even when the loop stopped early.
  const std::size_t best_idx = static_cast<std::size_t>(&state.best() - history.data());
  if (!included[best_idx]) {
    add(best_idx);
    ++top_k_count;
  }

  std::sort(picked.begin(), picked.end());  // chronological report order
  const std::string note = "History truncated to fit the prompt budget: reporting the top " +
                           std::to_string(top_k_count) +
                           " architectures by accuracy plus every architecture from iteration " +
                           std::to_string(last_iteration) + ".";
  return finish_bundle(assemble(picked, note), ablation);
}

std::string format_architectures_for_llm(std::span<const Architecture> architectures) {
  json arr = json::array();
  for (const Architecture& arch : architectures) {
    json entry;
    entry["ops"] = arch.ops();
    arr.push_back(std::move(entry));
  }
  return "```json\n" + arr.dump(2) + "\n```\n";
}

ParseResult parse_architectures(std::string_view text, const SearchSpace& space, int n_expected,
                                const std::unordered_set<std::string>& already_seen) {
  if (n_expected < 1) throw ContractError("parse_architectures: n_expected must be positive");
  ParseResult result;
  ParseDiagnostics& diag = result.diagnostics;

  const FencedBlocks blocks = extract_fenced_blocks(text);
  diag.raw_blocks_found = blocks.count;
  std::vector<json> arrays;
  for (std::string_view body : blocks.bodies)
    for (json& arr : scan_json_arrays(body)) arrays.push_back(std::move(arr));
  if (arrays.empty()) arrays = scan_json_arrays(text);  // unfenced fallback

  std::unordered_set<std::string> batch_keys;
  for (const json& arr : arrays) {
    for (const json& entry : arr) {
      ++diag.raw_candidates;

      std::vector<std::string> tokens;
      const json* ops = nullptr;
      if (entry.is_object() && entry.contains("ops") && entry["ops"].is_array())
        ops = &entry["ops"];
      else if (entry.is_array())
        ops = &entry;
      if (ops) {
        bool all_strings = true;
        for (const json& tok : *ops) {
          if (!tok.is_string()) {
            all_strings = false;
            break;
          }
          tokens.push_back(tok.get<std::string>());
        }
        if (!all_strings) ops = nullptr;
      }
      if (!ops) {
        ++diag.dropped_malformed;
        continue;
      }
      if (tokens.size() != kOpSlots) {
        ++diag.dropped_wrong_arity;
        continue;
      }

      std::array<std::string, kOpSlots> canonical;
      bool unknown = false;
      for (int i = 0; i < kOpSlots; ++i) {
        if (const OperationKind* kind = space.try_resolve(tokens[i])) {
          canonical[i] = kind->name;
        } else {
          diag.dropped_invalid_op.push_back(tokens[i]);
          unknown = true;
        }
      }
      if (unknown) {
        ++diag.dropped_invalid_op_entries;
        continue;
      }

      Architecture arch(space.topology().id(), std::move(canonical));
      if (already_seen.count(arch.key())) {
        ++diag.dropped_already_evaluated;
        continue;
      }
      if (batch_keys.count(arch.key())) {
        ++diag.dropped_duplicates;
        continue;
      }
      if (static_cast<int>(result.architectures.size()) >= n_expected) {
        ++diag.dropped_excess;
        continue;
      }
      batch_keys.insert(arch.key());
      result.architectures.push_back(std::move(arch));
      ++diag.valid;
    }
  }
  return result;
}

}  // namespace gnas
