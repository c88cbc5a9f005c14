#pragma once

#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "gnas/search_state.hpp"

namespace gnas {

/// Section toggles for the GNAS prompt. Each flag removes exactly its
/// section; an ablated section is omitted entirely, never half-rendered.
struct AblationFlags {
  bool include_connections = true;
  bool include_operations = true;
  bool include_strategy = true;
};

/// The four standard prompt variants.
enum class AblationVariant { kFull, kNoConnections, kNoOperations, kNoStrategy };
AblationFlags ablation_flags(AblationVariant variant);
std::string_view ablation_label(AblationVariant variant);       // "¬Connections" style
std::string_view ablation_slug(AblationVariant variant);        // "no-connections" style
AblationVariant ablation_from_slug(std::string_view slug);

/// A rendered prompt ready for one completion request.
struct PromptBundle {
  std::string system_text;
  std::string user_text;
  AblationFlags ablation;
  int token_estimate = 0;
};

/// Rough size proxy: one token per 4 characters, rounded up.
int estimate_tokens(std::string_view text);

/// Version tag of the machine-readable output contract embedded in prompts.
/// Bump when the contracted response format changes.
inline constexpr std::string_view kOutputContractVersion = "1";

/// Section marker lines, stable for tests.
inline constexpr std::string_view kTaskMarker = "// Search Task";
inline constexpr std::string_view kSpaceMarker = "// Search Space";
inline constexpr std::string_view kStrategyMarker = "// Search Strategy";
inline constexpr std::string_view kOutputMarker = "// Output Format";
inline constexpr std::string_view kFeedbackMarker = "// Evaluated Architectures";

/// The adjacency matrix as one bracketed 0/1 row per node, "input: [...]".
std::vector<std::string> render_adjacency_rows(const MacroTopology& topology);

/// The initial GNAS prompt: task, space (connections + operations), strategy,
/// and the output-format contract, in that order, subject to ablation flags.
PromptBundle build_gnas_prompt(const std::string& dataset, const SearchSpace& space,
                               const StrategyConfig& cfg, const AblationFlags& ablation = {});

struct FeedbackOptions {
  /// Token budget for the whole feedback prompt. When the full history does
  /// not fit, the prompt reports the top-K architectures by accuracy plus
  /// every architecture from the most recent iteration, and says so.
  int budget_tokens = 6000;
  /// Re-attach the space and strategy sections to each feedback prompt.
  bool reattach_space_sections = true;
};

/// The feedback prompt: one line per reported architecture in the exact
/// template "Model [<key>] achieves an accuracy of <acc>.", followed by the
/// restated output contract. The best-so-far architecture is always
/// reported, budget or not.
PromptBundle build_feedback_prompt(const SearchState& state, const SearchSpace& space,
                                   const StrategyConfig& cfg, const AblationFlags& ablation = {},
                                   const FeedbackOptions& options = {});

/// The exact history-line form used in feedback prompts.
std::string feedback_line(const std::string& arch_key, Accuracy val_accuracy);

/// Serializes architectures in the contracted response format (a fenced
/// JSON array of {"ops": [...]} objects). Mock backends emit through this
/// so every loop test exercises the real parser.
std::string format_architectures_for_llm(std::span<const Architecture> architectures);

struct ParseResult {
  std::vector<Architecture> architectures;
  ParseDiagnostics diagnostics;
  /// True when no valid architecture was recovered; the caller decides
  /// whether to retry or top up.
  bool empty_batch() const { return architectures.empty(); }
};

/// Recovers up to n_expected architectures from an arbitrary LLM response.
/// Fenced JSON arrays are preferred; bare JSON arrays anywhere in the text
/// are the fallback. Candidates with unknown ops, wrong arity, in-batch
/// duplicates, or keys in already_seen are dropped with diagnostics.
ParseResult parse_architectures(std::string_view text, const SearchSpace& space, int n_expected,
                                const std::unordered_set<std::string>& already_seen);

}  // namespace gnas
