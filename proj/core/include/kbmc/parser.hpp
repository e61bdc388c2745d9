// Text format for knowledge bases (.ikb) and queries.
//
// The grammar is documented in docs/language.md. parse_kb() validates every
// semantic invariant the engine relies on, so a successfully parsed KB can be
// handed directly to the constructor.

#ifndef KBMC_PARSER_HPP_
#define KBMC_PARSER_HPP_

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "kbmc/knowledge_base.hpp"
#include "kbmc/term.hpp"

namespace kbmc {

enum class ParseErrorKind {
  kSyntax,
  kUnknownRelation,
  kArityMismatch,
  kBadDistribution,
  kDuplicateDomain,
};

const char* to_string(ParseErrorKind kind);

struct ParseError {
  SourceSpan span;
  ParseErrorKind kind = ParseErrorKind::kSyntax;
  std::string message;
};

std::string to_string(const ParseError& error);

class ParseFailure : public std::runtime_error {
 public:
  explicit ParseFailure(std::vector<ParseError> errors);
  const std::vector<ParseError>& errors() const { return errors_; }

 private:
  std::vector<ParseError> errors_;
};

inline constexpr std::size_t kMaxParseErrors = 20;

struct Query {
  enum class Kind { kLogic, kDist, kDecide };

  Kind kind = Kind::kLogic;
  // A conjunction for logic queries; exactly one proposition otherwise.
  std::vector<Proposition> goals;

  std::vector<std::string> variables() const;
  friend bool operator==(const Query&, const Query&) = default;
};

const char* to_string(Query::Kind kind);
std::string to_string(const Query& query);

// Throws ParseFailure carrying up to kMaxParseErrors errors.
KnowledgeBase parse_kb(std::string_view text, std::string_view file = "<input>");

// Throws ParseFailure on malformed input.
Query parse_query(std::string_view text);

// Checks a parsed query against the KB's domain declarations (arity, AltSet
// membership). Throws ParseFailure.
void validate_query(const Query& query, const KnowledgeBase& kb);

std::string serialize_kb(const KnowledgeBase& kb);

// Shortest decimal form that reads back to the same double.
std::string format_number(double value);

}  // namespace kbmc

#endif  // KBMC_PARSER_HPP_
