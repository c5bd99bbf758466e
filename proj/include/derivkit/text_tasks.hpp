#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "derivkit/rng.hpp"
#include "derivkit/task.hpp"

namespace derivkit {

// ---- common-sense choice ----------------------------------------------------

/// Maps A<->E, B<->D, C<->C.
ChoiceInput transform_mirror_options(const ChoiceInput& in);

/// True iff codepoint(a1) + codepoint(a2) == 2 * codepoint('C').
/// Throws ContractViolation for a letter outside A..E.
bool relate_mirrored_choice(char a1, char a2);

/// Appends explanation.content to the question (no separator) and records
/// "target_option". Throws GenerationError when the input has no explanation.
ChoiceInput transform_add_explanation(const ChoiceInput& in, OracleMeta& meta);

/// True iff a2 is the explained option; a1 is unconstrained.
bool relate_explained_choice(char a1, char a2, const OracleMeta& meta);

/// Solves the bundled arithmetic questions ("Which option equals 17 + 25?"), honouring a
/// trailing correction of the second operand. nullopt if the text is not in that form
/// or no option matches.
std::optional<char> solve_choice(const ChoiceInput& in);

ChoiceInput generate_choice(Rng& rng);

// ---- logic ------------------------------------------------------------------

/// Reverses premise order and records "n".
LogicInput transform_reverse_premises(const LogicInput& in, OracleMeta& meta);

/// y2 must be (n+1-r_{m-1}, ..., n+1-r_1, n+1) for y1 = (r_1, ..., r_{m-1}, n+1).
bool relate_reversed_proof(const std::vector<int>& y1, const std::vector<int>& y2, int n);

/// Prepends "if <conclusion> then <new_conclusion>" as premise 1 and makes
/// new_conclusion the goal. Records "n" (the base premise count).
LogicInput transform_add_corollary(const LogicInput& in, const std::string& new_conclusion,
                                   OracleMeta& meta);

/// y2 must be (r_1+1, ..., r_{m-1}+1, 1, n+2).
bool relate_corollary_proof(const std::vector<int>& y1, const std::vector<int>& y2, int n);

struct ProofSearch {
    std::vector<int> proof;          // premise indexes (1-based) then n+1
    std::size_t minimal_proofs = 0;  // number of distinct minimum-size premise sets
};

/// Finds the smallest premise subset from which the conclusion follows. Premises are
/// facts ("Rex is a wumpus", "Rex is a wumpus and a tumpus"), universal rules
/// ("Every wumpus is a tumpus") or implications ("if <prop> then <prop>").
///
/// Output order: premises sorted by inference stage, then by index. Facts are stage 1;
/// a universal rule inherits the stage of the atom it is applied to; an implication sits
/// one stage after the latest atom in its condition. Returns nullopt when the conclusion
/// does not follow or a premise cannot be read.
std::optional<ProofSearch> search_proof(const LogicInput& in);

LogicInput generate_logic(Rng& rng);

/// Picks a fresh "<entity> is a <category>" for the corollary rule, reusing the
/// conclusion's entity and a category the problem does not mention.
std::string pick_corollary_conclusion(const LogicInput& in, Rng& rng);

// ---- sentence classification -----------------------------------------------

std::string_view default_sentiment_prompt();

/// Appends ten characters from [a-z0-9] to the instruction prompt.
SentenceInput transform_checklist(const SentenceInput& in, Rng& rng);

/// Replaces every 'a' with "as", then removes every 't' (case-sensitive, in that order).
/// The {content} placeholder is left intact.
SentenceInput transform_deepwordbug(const SentenceInput& in);
std::string deepwordbug(std::string_view text);

bool relate_identical_label(std::string_view y1, std::string_view y2);

/// Lexicon vote over whole words; nullopt when no sentiment word occurs or the vote ties.
std::optional<std::string> classify_sentiment(std::string_view text);

SentenceInput generate_sentence(Rng& rng);

// ---- table QA ---------------------------------------------------------------

/// Inserts a "Fare" column filled with "$100" at a uniform index in [0, width].
TableInput transform_add_fare_column(const TableInput& in, Rng& rng);
TableInput insert_fare_column(const TableInput& in, std::size_t at);

TableInput transform_reverse_columns(const TableInput& in);

/// Answers the bundled medal-table question forms by looking columns up by name.
std::optional<std::string> answer_table_question(const TableInput& in);

TableInput generate_table(Rng& rng);

}  // namespace derivkit
