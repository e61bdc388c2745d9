// Horn-clause proof over facts and logic clauses (depth-first SLD
// resolution with chronological backtracking).

#ifndef KBMC_LOGIC_ENGINE_HPP_
#define KBMC_LOGIC_ENGINE_HPP_

#include <cstddef>
#include <memory>
#include <optional>
#include <set>
#include <vector>

#include "kbmc/knowledge_base.hpp"
#include "kbmc/substitution.hpp"

namespace kbmc {

struct ProofConfig {
  // Bounds the depth of the resolution tree, not the number of answers.
  std::size_t depth_limit = 64;
  std::optional<std::size_t> solution_limit;
};

// Lazily produced answers, in depth-first, declaration-order discovery order.
// Each answer is restricted to the goal's variables; duplicates are dropped.
// The knowledge base must outlive the stream.
class AnswerStream {
 public:
  AnswerStream(std::vector<Proposition> goal, const KnowledgeBase& kb, ProofConfig cfg);
  ~AnswerStream();
  AnswerStream(AnswerStream&&) noexcept;
  AnswerStream& operator=(AnswerStream&&) noexcept;

  std::optional<Substitution> next();
  // Drains the stream.
  std::vector<Substitution> all();

  // True once some branch was cut off by the depth limit. An exhausted
  // stream with this flag set means "search truncated", not "no proof".
  bool depth_limited() const;

 private:
  struct State;
  std::unique_ptr<State> state_;
};

// Goal propositions must not contain AltSets.
AnswerStream prove(std::vector<Proposition> goal, const KnowledgeBase& kb,
                   ProofConfig cfg = {});

// Ground consequences of facts and logic clauses reached by at most `bound`
// rounds of bottom-up rule application.
std::set<Proposition> derivable_facts(const KnowledgeBase& kb, std::size_t bound);

}  // namespace kbmc

#endif  // KBMC_LOGIC_ENGINE_HPP_
