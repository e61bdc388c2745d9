#include "kbmc/parser.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <variant>

namespace kbmc {

const char* to_string(ParseErrorKind kind) {
  switch (kind) {
    case ParseErrorKind::kSyntax: return "syntax";
    case ParseErrorKind::kUnknownRelation: return "unknown-relation";
    case ParseErrorKind::kArityMismatch: return "arity-mismatch";
    case ParseErrorKind::kBadDistribution: return "bad-distribution";
    case ParseErrorKind::kDuplicateDomain: return "duplicate-domain";
  }
  return "syntax";
}

std::string to_string(const ParseError& error) {
  return to_string(error.span) + ": " + to_string(error.kind) + ": " + error.message;
}

namespace {

std::string join_errors(const std::vector<ParseError>& errors) {
  std::string out;
  for (const ParseError& e : errors) {
    if (!out.empty()) out += "\n";
    out += to_string(e);
  }
  return out;
}

}  // namespace

ParseFailure::ParseFailure(std::vector<ParseError> errors)
    : std::runtime_error(join_errors(errors)), errors_(std::move(errors)) {}

std::vector<std::string> Query::variables() const {
  std::vector<std::string> out;
  for (const Proposition& g : goals) {
    for (const std::string& v : g.variables()) {
      if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    }
  }
  return out;
}

const char* to_string(Query::Kind kind) {
  switch (kind) {
    case Query::Kind::kLogic: return "logic";
    case Query::Kind::kDist: return "dist";
    case Query::Kind::kDecide: return "decide";
  }
  return "logic";
}

std::string to_string(const Query& query) {
  return std::string("?") + to_string(query.kind) + " " + to_string(query.goals) + ".";
}

std::string format_number(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

namespace {

// ---------------------------------------------------------------------------
// Lexer

enum class Tok {
  kLParen, kRParen, kLBrace, kRBrace, kComma, kColon, kSemicolon, kDot,
  kSlash, kAt, kArrow, kBarP, kBarI, kBarV, kEquals,
  kIdent, kVariable, kNumber, kEnd, kError,
};

struct Token {
  Tok kind = Tok::kEnd;
  std::string text;
  double number = 0.0;
  int line = 1;
  int column = 1;
};

const char* describe(Tok kind) {
  switch (kind) {
    case Tok::kLParen: return "'('";
    case Tok::kRParen: return "')'";
    case Tok::kLBrace: return "'{'";
    case Tok::kRBrace: return "'}'";
    case Tok::kComma: return "','";
    case Tok::kColon: return "':'";
    case Tok::kSemicolon: return "';'";
    case Tok::kDot: return "'.'";
    case Tok::kSlash: return "'/'";
    case Tok::kAt: return "'@'";
    case Tok::kArrow: return "'<-'";
    case Tok::kBarP: return "'|p'";
    case Tok::kBarI: return "'|i'";
    case Tok::kBarV: return "'|v'";
    case Tok::kEquals: return "'='";
    case Tok::kIdent: return "identifier";
    case Tok::kVariable: return "variable";
    case Tok::kNumber: return "number";
    case Tok::kEnd: return "end of input";
    case Tok::kError: return "invalid character";
  }
  return "token";
}

bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

std::vector<Token> lex(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  int line = 1;
  int col = 1;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < text.size(); ++k, ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  auto peek = [&](std::size_t off) -> char {
    return i + off < text.size() ? text[i + off] : '\0';
  };

  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '%') {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    Token tok;
    tok.line = line;
    tok.column = col;
    auto single = [&](Tok kind) {
      tok.kind = kind;
      tok.text = std::string(1, c);
      advance(1);
    };
    switch (c) {
      case '(': single(Tok::kLParen); break;
      case ')': single(Tok::kRParen); break;
      case '{': single(Tok::kLBrace); break;
      case '}': single(Tok::kRBrace); break;
      case ',': single(Tok::kComma); break;
      case ':': single(Tok::kColon); break;
      case ';': single(Tok::kSemicolon); break;
      case '.': single(Tok::kDot); break;
      case '/': single(Tok::kSlash); break;
      case '@': single(Tok::kAt); break;
      case '=': single(Tok::kEquals); break;
      default: {
        if (c == '<' && peek(1) == '-') {
          tok.kind = Tok::kArrow;
          tok.text = "<-";
          advance(2);
        } else if (c == '|' && (peek(1) == 'p' || peek(1) == 'i' || peek(1) == 'v') &&
                   !ident_char(peek(2))) {
          tok.kind = peek(1) == 'p' ? Tok::kBarP : peek(1) == 'i' ? Tok::kBarI : Tok::kBarV;
          tok.text = std::string(text.substr(i, 2));
          advance(2);
        } else if (c == '?' && (std::isalpha(static_cast<unsigned char>(peek(1))) || peek(1) == '_')) {
          advance(1);
          std::size_t start = i;
          while (i < text.size() && ident_char(text[i])) advance(1);
          tok.kind = Tok::kVariable;
          tok.text = std::string(text.substr(start, i - start));
          // Variable names are case-insensitive.
          for (char& ch : tok.text) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        } else if (std::isalpha(static_cast<unsigned char>(c))) {
          std::size_t start = i;
          while (i < text.size() && ident_char(text[i])) advance(1);
          tok.kind = Tok::kIdent;
          tok.text = std::string(text.substr(start, i - start));
        } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                   ((c == '-' || c == '+') && std::isdigit(static_cast<unsigned char>(peek(1))))) {
          std::size_t start = i;
          advance(1);
          while (std::isdigit(static_cast<unsigned char>(peek(0)))) advance(1);
          if (peek(0) == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
            advance(1);
            while (std::isdigit(static_cast<unsigned char>(peek(0)))) advance(1);
          }
          if ((peek(0) == 'e' || peek(0) == 'E') &&
              (std::isdigit(static_cast<unsigned char>(peek(1))) ||
               ((peek(1) == '-' || peek(1) == '+') &&
                std::isdigit(static_cast<unsigned char>(peek(2)))))) {
            advance(2);
            while (std::isdigit(static_cast<unsigned char>(peek(0)))) advance(1);
          }
          tok.kind = Tok::kNumber;
          tok.text = std::string(text.substr(start, i - start));
          std::string_view digits = tok.text;
          if (!digits.empty() && digits.front() == '+') digits.remove_prefix(1);
          std::from_chars(digits.data(), digits.data() + digits.size(), tok.number);
        } else {
          tok.kind = Tok::kError;
          tok.text = std::string(1, c);
          advance(1);
        }
      }
    }
    out.push_back(std::move(tok));
  }
  Token end;
  end.kind = Tok::kEnd;
  end.line = line;
  end.column = col;
  out.push_back(end);
  return out;
}

// ---------------------------------------------------------------------------
// Raw declarations, before domain resolution.

struct RawProp {
  Proposition prop;
  SourceSpan span;
};

struct RawEntry {
  std::vector<Symbol> key;
  std::vector<double> numbers;
  SourceSpan span;
};

struct RawDomain {
  Symbol relation;
  long arity = 0;
  std::vector<std::pair<long, std::vector<Symbol>>> positions;
  std::vector<SourceSpan> position_spans;
};
struct RawFact { RawProp prop; };
struct RawLogic { RawProp head; std::vector<RawProp> body; };
struct RawPrior { RawProp subject; std::vector<RawEntry> entries; };
struct RawProb { RawProp subject; std::vector<RawProp> conditions; std::vector<RawEntry> rows; };
struct RawInfo { RawProp decision; std::vector<RawProp> observed; };
struct RawValue { RawProp subject; std::vector<RawProp> conditions; std::vector<RawEntry> rows; };

struct RawDecl {
  std::variant<RawDomain, RawFact, RawLogic, RawPrior, RawProb, RawInfo, RawValue> body;
  SourceSpan span;
};

class TooManyErrors {};

class ErrorSink {
 public:
  explicit ErrorSink(std::vector<ParseError>& errors) : errors_(errors) {}
  void add(SourceSpan span, ParseErrorKind kind, std::string message) {
    errors_.push_back({std::move(span), kind, std::move(message)});
    if (errors_.size() >= kMaxParseErrors) throw TooManyErrors{};
  }
  bool empty() const { return errors_.empty(); }
  std::size_t size() const { return errors_.size(); }

 private:
  std::vector<ParseError>& errors_;
};

struct SyntaxError {
  SourceSpan span;
  std::string message;
};

class Parser {
 public:
  Parser(std::vector<Token> tokens, std::string file)
      : tokens_(std::move(tokens)), file_(std::move(file)) {}

  bool at_end() const { return cur().kind == Tok::kEnd; }
  const Token& cur() const { return tokens_[pos_]; }

  SourceSpan span_of(const Token& t) const { return {file_, t.line, t.column}; }
  SourceSpan here() const { return span_of(cur()); }

  [[noreturn]] void fail(const std::string& message) const {
    throw SyntaxError{here(), message};
  }

  const Token& expect(Tok kind, const char* context) {
    if (cur().kind != kind) {
      fail(std::string("expected ") + describe(kind) + " " + context + ", found " +
           describe(cur().kind) + (cur().text.empty() ? "" : " '" + cur().text + "'"));
    }
    return tokens_[pos_++];
  }

  bool accept(Tok kind) {
    if (cur().kind != kind) return false;
    ++pos_;
    return true;
  }

  // Skips past the next top-level '.'.
  void recover() {
    int depth = 0;
    while (!at_end()) {
      Tok k = cur().kind;
      ++pos_;
      if (k == Tok::kLParen || k == Tok::kLBrace) ++depth;
      if ((k == Tok::kRParen || k == Tok::kRBrace) && depth > 0) --depth;
      if (k == Tok::kDot && depth == 0) return;
    }
  }

  Symbol symbol(const char* context) {
    const Token& t = cur();
    if (t.kind != Tok::kIdent) expect(Tok::kIdent, context);
    for (char c : t.text) {
      if (std::isupper(static_cast<unsigned char>(c))) {
        fail("symbol '" + t.text + "' must be lowercase");
      }
    }
    ++pos_;
    return t.text;
  }

  std::vector<Symbol> alt_set_members() {
    expect(Tok::kLBrace, "to open an alternative set");
    std::vector<Symbol> members;
    members.push_back(symbol("in alternative set"));
    while (accept(Tok::kComma)) members.push_back(symbol("in alternative set"));
    expect(Tok::kRBrace, "to close an alternative set");
    return members;
  }

  Term term() {
    SourceSpan at = here();
    if (cur().kind == Tok::kVariable) return Term::variable(tokens_[pos_++].text);
    if (cur().kind == Tok::kLBrace) {
      std::vector<Symbol> members = alt_set_members();
      try {
        return Term::alt_set(std::move(members));
      } catch (const std::invalid_argument& e) {
        throw SyntaxError{at, e.what()};
      }
    }
    if (cur().kind == Tok::kIdent) return Term::constant(symbol("as argument"));
    fail(std::string("expected a constant, variable or alternative set, found ") +
         describe(cur().kind));
  }

  RawProp proposition() {
    RawProp out;
    out.span = here();
    expect(Tok::kLParen, "to open a proposition");
    out.prop.relation = symbol("as relation name");
    while (cur().kind != Tok::kRParen) out.prop.args.push_back(term());
    expect(Tok::kRParen, "to close a proposition");
    return out;
  }

  std::vector<RawProp> conjunction() {
    std::vector<RawProp> out;
    out.push_back(proposition());
    while (accept(Tok::kComma)) out.push_back(proposition());
    return out;
  }

  double number(const char* context) { return expect(Tok::kNumber, context).number; }

  long integer(const char* context) {
    const Token& t = expect(Tok::kNumber, context);
    double v = t.number;
    if (v != std::floor(v) || t.text.find_first_of(".eE") != std::string::npos) {
      throw SyntaxError{span_of(t), "expected an integer " + std::string(context)};
    }
    return static_cast<long>(v);
  }

  // key ':' number {',' number} ';'   (key is zero or more symbols)
  RawEntry table_row(bool single_value) {
    RawEntry row;
    row.span = here();
    if (cur().kind != Tok::kColon) {
      row.key.push_back(symbol("in table row key"));
      while (accept(Tok::kComma)) row.key.push_back(symbol("in table row key"));
    }
    expect(Tok::kColon, "after table row key");
    row.numbers.push_back(number("in table row"));
    if (!single_value) {
      while (accept(Tok::kComma)) row.numbers.push_back(number("in table row"));
    }
    expect(Tok::kSemicolon, "to end a table row");
    return row;
  }

  std::vector<RawEntry> table(bool single_value) {
    expect(Tok::kLBrace, "to open a table");
    std::vector<RawEntry> rows;
    while (cur().kind != Tok::kRBrace && !at_end()) rows.push_back(table_row(single_value));
    expect(Tok::kRBrace, "to close a table");
    return rows;
  }

  // '{' key ':' p {',' key ':' p} '}'  with key = symbol | '(' symbol {',' symbol} ')'
  std::vector<RawEntry> prior_entries() {
    expect(Tok::kLBrace, "to open a distribution");
    std::vector<RawEntry> out;
    do {
      RawEntry e;
      e.span = here();
      if (accept(Tok::kLParen)) {
        e.key.push_back(symbol("in outcome key"));
        while (accept(Tok::kComma)) e.key.push_back(symbol("in outcome key"));
        expect(Tok::kRParen, "to close an outcome key");
      } else {
        e.key.push_back(symbol("as outcome key"));
      }
      expect(Tok::kColon, "after outcome key");
      e.numbers.push_back(number("as probability"));
      out.push_back(std::move(e));
    } while (accept(Tok::kComma));
    expect(Tok::kRBrace, "to close a distribution");
    return out;
  }

  RawDecl declaration() {
    RawDecl decl;
    decl.span = here();
    if (cur().kind != Tok::kIdent) fail("expected a declaration keyword");
    std::string keyword = tokens_[pos_++].text;
    if (keyword == "domain") {
      RawDomain d;
      d.relation = symbol("as relation name");
      expect(Tok::kSlash, "between relation and arity");
      d.arity = integer("as arity");
      if (cur().kind != Tok::kAt) fail("domain declaration needs at least one '@position {...}'");
      while (cur().kind == Tok::kAt) {
        d.position_spans.push_back(here());
        ++pos_;
        long position = integer("as restricted position");
        d.positions.emplace_back(position, alt_set_members());
      }
      decl.body = std::move(d);
    } else if (keyword == "fact") {
      decl.body = RawFact{proposition()};
    } else if (keyword == "logic") {
      RawLogic l;
      l.head = proposition();
      if (accept(Tok::kArrow)) l.body = conjunction();
      decl.body = std::move(l);
    } else if (keyword == "prior") {
      RawPrior p;
      p.subject = proposition();
      expect(Tok::kEquals, "before the distribution");
      p.entries = prior_entries();
      decl.body = std::move(p);
    } else if (keyword == "prob") {
      RawProb p;
      p.subject = proposition();
      expect(Tok::kBarP, "after the subject of a probabilistic influence");
      p.conditions = conjunction();
      expect(Tok::kEquals, "before the conditional table");
      p.rows = table(false);
      decl.body = std::move(p);
    } else if (keyword == "info") {
      RawInfo in;
      in.decision = proposition();
      if (accept(Tok::kBarI)) in.observed = conjunction();
      decl.body = std::move(in);
    } else if (keyword == "value") {
      RawValue v;
      v.subject = proposition();
      if (accept(Tok::kBarV)) v.conditions = conjunction();
      expect(Tok::kEquals, "before the value table");
      v.rows = table(true);
      decl.body = std::move(v);
    } else {
      throw SyntaxError{decl.span, "unknown declaration keyword '" + keyword + "'"};
    }
    expect(Tok::kDot, "to end the declaration");
    return decl;
  }

  std::size_t position() const { return pos_; }

 private:
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  std::string file_;
};

// ---------------------------------------------------------------------------
// Semantic resolution

enum class Role { kFact, kLogic, kSubject, kCondition, kValueSubject, kQuery };

class Resolver {
 public:
  Resolver(const std::map<Symbol, DomainDecl>& domains, ErrorSink& sink)
      : domains_(domains), sink_(sink) {}

  const DomainDecl* domain(const Symbol& relation) const {
    auto it = domains_.find(relation);
    return it == domains_.end() ? nullptr : &it->second;
  }

  // Returns nullopt after reporting an error.
  std::optional<Proposition> resolve(const RawProp& raw, Role role) {
    const Proposition& p = raw.prop;
    const DomainDecl* d = domain(p.relation);
    if (role == Role::kSubject && !d) {
      sink_.add(raw.span, ParseErrorKind::kUnknownRelation,
                "no domain declared for relation '" + p.relation + "'");
      return std::nullopt;
    }
    if (d && d->arity != p.arity()) {
      sink_.add(raw.span, ParseErrorKind::kArityMismatch,
                "relation '" + p.relation + "' has arity " + std::to_string(d->arity) +
                    ", used with " + std::to_string(p.arity()) + " arguments");
      return std::nullopt;
    }
    Proposition out = p;
    for (std::size_t i = 0; i < p.args.size(); ++i) {
      const Term& t = p.args[i];
      const DomainDecl::Position* pos = d ? d->find(i) : nullptr;
      if (!pos) {
        if (t.is_alt_set()) {
          sink_.add(raw.span, ParseErrorKind::kArityMismatch,
                    "position " + std::to_string(i + 1) + " of '" + p.relation +
                        "' is not a restricted position");
          return std::nullopt;
        }
        continue;
      }
      if (t.is_alt_set()) {
        if (t.members() != pos->members) {
          sink_.add(raw.span, ParseErrorKind::kArityMismatch,
                    "alternative set " + to_string(t) + " differs from the declared " +
                        to_string(Term::alt_set(pos->members)));
          return std::nullopt;
        }
        if (role == Role::kFact || role == Role::kLogic) {
          sink_.add(raw.span, ParseErrorKind::kSyntax,
                    "alternative sets are not allowed in facts, logic clauses or logic queries");
          return std::nullopt;
        }
      } else if (t.is_constant()) {
        if (std::find(pos->members.begin(), pos->members.end(), t.name()) ==
            pos->members.end()) {
          sink_.add(raw.span, ParseErrorKind::kArityMismatch,
                    "'" + t.name() + "' is not an alternative of position " +
                        std::to_string(i + 1) + " of '" + p.relation + "'");
          return std::nullopt;
        }
        if (role == Role::kSubject) {
          sink_.add(raw.span, ParseErrorKind::kSyntax,
                    "restricted position " + std::to_string(i + 1) +
                        " of an influence subject must be a variable or alternative set");
          return std::nullopt;
        }
      } else if (role == Role::kSubject || role == Role::kCondition) {
        out.args[i] = Term::alt_set(pos->members);
      }
    }
    if (role == Role::kFact && !out.is_ground()) {
      sink_.add(raw.span, ParseErrorKind::kSyntax, "facts must be ground");
      return std::nullopt;
    }
    if (role == Role::kValueSubject && out.variables().size() != 1) {
      sink_.add(raw.span, ParseErrorKind::kSyntax,
                "value subject must carry exactly one variable");
      return std::nullopt;
    }
    return out;
  }

  // A variable that stands in a restricted position is replaced by the
  // declared AltSet; reusing it elsewhere would silently drop a constraint.
  bool check_restricted_variables(const std::vector<const RawProp*>& props) {
    std::map<std::string, int> uses;
    std::set<std::string> restricted;
    for (const RawProp* rp : props) {
      const DomainDecl* d = domain(rp->prop.relation);
      for (std::size_t i = 0; i < rp->prop.args.size(); ++i) {
        const Term& t = rp->prop.args[i];
        if (!t.is_variable()) continue;
        ++uses[t.name()];
        if (d && d->arity == rp->prop.arity() && d->find(i)) restricted.insert(t.name());
      }
    }
    for (const std::string& v : restricted) {
      if (uses[v] > 1) {
        sink_.add(props.front()->span, ParseErrorKind::kSyntax,
                  "variable ?" + v +
                      " stands in a restricted position and may not be reused in the same declaration");
        return false;
      }
    }
    return true;
  }

 private:
  const std::map<Symbol, DomainDecl>& domains_;
  ErrorSink& sink_;
};

std::vector<std::size_t> axis_sizes_of(const std::vector<Proposition>& axes) {
  std::vector<std::size_t> sizes;
  for (const Proposition& a : axes) {
    for (std::size_t pos : a.restricted_positions()) sizes.push_back(a.args[pos].members().size());
  }
  return sizes;
}

// Maps a row key (one symbol per restricted position across `axes`) to a
// joint row index.
std::optional<std::size_t> key_index(const std::vector<Symbol>& key,
                                     const std::vector<Proposition>& axes,
                                     std::string& why) {
  std::vector<const Term*> slots;
  for (const Proposition& a : axes) {
    for (std::size_t pos : a.restricted_positions()) slots.push_back(&a.args[pos]);
  }
  if (key.size() != slots.size()) {
    why = "row key has " + std::to_string(key.size()) + " symbols, expected " +
          std::to_string(slots.size());
    return std::nullopt;
  }
  std::vector<std::size_t> digits;
  std::vector<std::size_t> sizes;
  for (std::size_t k = 0; k < key.size(); ++k) {
    auto idx = slots[k]->index_of(key[k]);
    if (!idx) {
      why = "'" + key[k] + "' is not a member of " + to_string(*slots[k]);
      return std::nullopt;
    }
    digits.push_back(*idx);
    sizes.push_back(slots[k]->members().size());
  }
  return joint_index(digits, sizes);
}

std::string describe_key(const std::vector<Symbol>& key) {
  std::string out;
  for (std::size_t i = 0; i < key.size(); ++i) {
    if (i) out += ", ";
    out += key[i];
  }
  return out.empty() ? "(empty key)" : out;
}

// Fills `rows` (already sized) from the raw entries; reports duplicates,
// unknown keys, missing rows and width problems.
bool fill_rows(const std::vector<RawEntry>& entries, const std::vector<Proposition>& axes,
               std::size_t width, const SourceSpan& decl_span,
               std::vector<std::vector<double>>& rows, ErrorSink& sink) {
  std::vector<bool> seen(rows.size(), false);
  bool ok = true;
  for (const RawEntry& e : entries) {
    std::string why;
    auto idx = key_index(e.key, axes, why);
    if (!idx) {
      sink.add(e.span, ParseErrorKind::kBadDistribution, why);
      ok = false;
      continue;
    }
    if (seen[*idx]) {
      sink.add(e.span, ParseErrorKind::kBadDistribution,
               "duplicate row for " + describe_key(e.key));
      ok = false;
      continue;
    }
    if (e.numbers.size() != width) {
      sink.add(e.span, ParseErrorKind::kBadDistribution,
               "row has " + std::to_string(e.numbers.size()) + " entries, expected " +
                   std::to_string(width));
      ok = false;
      continue;
    }
    seen[*idx] = true;
    rows[*idx] = e.numbers;
  }
  for (std::size_t r = 0; r < seen.size() && ok; ++r) {
    if (!seen[r]) {
      std::vector<Symbol> key;
      std::vector<std::size_t> sizes = axis_sizes_of(axes);
      std::vector<std::size_t> digits = joint_digits(r, sizes);
      std::size_t k = 0;
      for (const Proposition& a : axes) {
        for (std::size_t pos : a.restricted_positions()) key.push_back(a.args[pos].members()[digits[k++]]);
      }
      sink.add(decl_span, ParseErrorKind::kBadDistribution,
               "missing row for " + describe_key(key));
      ok = false;
    }
  }
  return ok;
}

bool check_probability_row(const std::vector<double>& row, const SourceSpan& span,
                           ErrorSink& sink) {
  double sum = 0.0;
  for (double p : row) {
    if (!(p >= 0.0 && p <= 1.0)) {
      sink.add(span, ParseErrorKind::kBadDistribution,
               "probability " + format_number(p) + " is outside [0, 1]");
      return false;
    }
    sum += p;
  }
  if (std::fabs(sum - 1.0) > kRowSumTolerance) {
    sink.add(span, ParseErrorKind::kBadDistribution,
             "probabilities sum to " + format_number(sum) + ", expected 1");
    return false;
  }
  return true;
}

std::vector<Proposition> restricted_only(const std::vector<Proposition>& props) {
  std::vector<Proposition> out;
  for (const Proposition& p : props) {
    if (p.is_restricted()) out.push_back(p);
  }
  return out;
}

class Builder {
 public:
  Builder(const std::map<Symbol, DomainDecl>& domains, ErrorSink& sink)
      : resolver_(domains, sink), sink_(sink) {}

  std::optional<std::vector<Proposition>> resolve_all(const std::vector<RawProp>& raws, Role role) {
    std::vector<Proposition> out;
    bool ok = true;
    for (const RawProp& r : raws) {
      auto p = resolver_.resolve(r, role);
      if (p) {
        out.push_back(std::move(*p));
      } else {
        ok = false;
      }
    }
    if (!ok) return std::nullopt;
    return out;
  }

  std::optional<Influence> build(const RawLogic& l) {
    auto head = resolver_.resolve(l.head, Role::kLogic);
    auto body = resolve_all(l.body, Role::kLogic);
    if (!head || !body) return std::nullopt;
    return LogicClause{std::move(*head), std::move(*body)};
  }

  std::optional<Influence> build(const RawPrior& p, const SourceSpan& span) {
    if (!resolver_.check_restricted_variables({&p.subject})) return std::nullopt;
    auto subject = resolver_.resolve(p.subject, Role::kSubject);
    if (!subject) return std::nullopt;
    std::vector<Proposition> axes{*subject};
    std::vector<std::vector<double>> cells(subject->outcome_count(), std::vector<double>{});
    std::vector<RawEntry> entries = p.entries;
    if (!fill_rows(entries, axes, 1, span, cells, sink_)) return std::nullopt;
    std::vector<double> probs;
    for (const auto& c : cells) probs.push_back(c.front());
    if (!check_probability_row(probs, span, sink_)) return std::nullopt;
    return Prior{Distribution{std::move(*subject), std::move(probs)}};
  }

  std::optional<Influence> build(const RawProb& p, const SourceSpan& span) {
    std::vector<const RawProp*> all{&p.subject};
    for (const RawProp& c : p.conditions) all.push_back(&c);
    if (!resolver_.check_restricted_variables(all)) return std::nullopt;
    auto subject = resolver_.resolve(p.subject, Role::kSubject);
    auto conditions = resolve_all(p.conditions, Role::kCondition);
    if (!subject || !conditions) return std::nullopt;
    ConditionalTable cpt{*subject, restricted_only(*conditions), {}};
    cpt.rows.assign(cpt.row_count(), {});
    if (!fill_rows(p.rows, cpt.row_axes, cpt.width(), span, cpt.rows, sink_)) return std::nullopt;
    for (std::size_t r = 0; r < cpt.rows.size(); ++r) {
      // Point at the offending row when it can be found.
      SourceSpan at = span;
      for (const RawEntry& e : p.rows) {
        std::string why;
        if (key_index(e.key, cpt.row_axes, why) == r) at = e.span;
      }
      if (!check_probability_row(cpt.rows[r], at, sink_)) return std::nullopt;
    }
    return ProbInfluence{std::move(*subject), std::move(*conditions), std::move(cpt)};
  }

  std::optional<Influence> build(const RawInfo& in) {
    std::vector<const RawProp*> all{&in.decision};
    for (const RawProp& o : in.observed) all.push_back(&o);
    if (!resolver_.check_restricted_variables(all)) return std::nullopt;
    auto decision = resolver_.resolve(in.decision, Role::kSubject);
    auto observed = resolve_all(in.observed, Role::kCondition);
    if (!decision || !observed) return std::nullopt;
    return InfoInfluence{std::move(*decision), std::move(*observed)};
  }

  std::optional<Influence> build(const RawValue& v, const SourceSpan& span) {
    std::vector<const RawProp*> all{&v.subject};
    for (const RawProp& c : v.conditions) all.push_back(&c);
    if (!resolver_.check_restricted_variables(all)) return std::nullopt;
    auto subject = resolver_.resolve(v.subject, Role::kValueSubject);
    auto conditions = resolve_all(v.conditions, Role::kCondition);
    if (!subject || !conditions) return std::nullopt;
    ValueTable table{restricted_only(*conditions), {}};
    std::vector<std::vector<double>> cells(table.row_count(), std::vector<double>{});
    if (!fill_rows(v.rows, table.row_axes, 1, span, cells, sink_)) return std::nullopt;
    for (const auto& c : cells) table.values.push_back(c.front());
    return ValueInfluence{std::move(*subject), std::move(*conditions), std::move(table)};
  }

  Resolver& resolver() { return resolver_; }

 private:
  Resolver resolver_;
  ErrorSink& sink_;
};

std::vector<RawDecl> parse_declarations(std::string_view text, const std::string& file,
                                        ErrorSink& sink) {
  Parser parser(lex(text), file);
  std::vector<RawDecl> out;
  while (!parser.at_end()) {
    std::size_t start = parser.position();
    try {
      out.push_back(parser.declaration());
    } catch (const SyntaxError& e) {
      sink.add(e.span, ParseErrorKind::kSyntax, e.message);
      parser.recover();
      if (parser.position() == start) break;
    }
  }
  return out;
}

}  // namespace

KnowledgeBase parse_kb(std::string_view text, std::string_view file) {
  std::vector<ParseError> errors;
  ErrorSink sink(errors);
  KnowledgeBase kb;
  try {
    std::vector<RawDecl> decls = parse_declarations(text, std::string(file), sink);

    // Domains first so that declarations may precede the domain they use.
    std::map<Symbol, DomainDecl> domains;
    for (const RawDecl& d : decls) {
      const auto* raw = std::get_if<RawDomain>(&d.body);
      if (!raw) continue;
      if (domains.count(raw->relation)) {
        sink.add(d.span, ParseErrorKind::kDuplicateDomain,
                 "relation '" + raw->relation + "' already has a domain declaration");
        continue;
      }
      if (raw->arity <= 0) {
        sink.add(d.span, ParseErrorKind::kSyntax, "arity must be positive");
        continue;
      }
      DomainDecl decl{raw->relation, static_cast<std::size_t>(raw->arity), {}};
      bool ok = true;
      for (std::size_t k = 0; k < raw->positions.size(); ++k) {
        const auto& [position, members] = raw->positions[k];
        if (position < 1 || position > raw->arity) {
          sink.add(raw->position_spans[k], ParseErrorKind::kArityMismatch,
                   "restricted position " + std::to_string(position) + " outside 1.." +
                       std::to_string(raw->arity));
          ok = false;
          break;
        }
        auto index = static_cast<std::size_t>(position - 1);
        if (decl.find(index)) {
          sink.add(raw->position_spans[k], ParseErrorKind::kSyntax,
                   "position " + std::to_string(position) + " restricted twice");
          ok = false;
          break;
        }
        std::set<Symbol> distinct(members.begin(), members.end());
        if (members.size() < 2 || distinct.size() != members.size()) {
          sink.add(raw->position_spans[k], ParseErrorKind::kSyntax,
                   "alternative set needs at least two distinct members");
          ok = false;
          break;
        }
        decl.restricted.push_back({index, members});
      }
      if (ok) domains.emplace(raw->relation, std::move(decl));
    }

    Builder builder(domains, sink);
    for (const RawDecl& d : decls) {
      if (const auto* raw = std::get_if<RawDomain>(&d.body)) {
        auto it = domains.find(raw->relation);
        // Only the first declaration of a relation is kept.
        if (it != domains.end() && !kb.find_domain(raw->relation)) {
          kb.add_domain(it->second, d.span);
        }
      } else if (const auto* f = std::get_if<RawFact>(&d.body)) {
        if (auto p = builder.resolver().resolve(f->prop, Role::kFact)) kb.add_fact(*p, d.span);
      } else if (const auto* l = std::get_if<RawLogic>(&d.body)) {
        if (auto inf = builder.build(*l)) kb.add_influence(*inf, d.span);
      } else if (const auto* p = std::get_if<RawPrior>(&d.body)) {
        if (auto inf = builder.build(*p, d.span)) kb.add_influence(*inf, d.span);
      } else if (const auto* pr = std::get_if<RawProb>(&d.body)) {
        if (auto inf = builder.build(*pr, d.span)) kb.add_influence(*inf, d.span);
      } else if (const auto* in = std::get_if<RawInfo>(&d.body)) {
        if (auto inf = builder.build(*in)) kb.add_influence(*inf, d.span);
      } else if (const auto* v = std::get_if<RawValue>(&d.body)) {
        if (auto inf = builder.build(*v, d.span)) kb.add_influence(*inf, d.span);
      }
    }
  } catch (const TooManyErrors&) {
  }
  if (!errors.empty()) throw ParseFailure(std::move(errors));
  return kb;
}

Query parse_query(std::string_view text) {
  Parser parser(lex(text), "<query>");
  Query q;
  try {
    const Token& kw = parser.cur();
    if (kw.kind != Tok::kVariable) parser.fail("expected ?logic, ?dist or ?decide");
    if (kw.text == "logic") {
      q.kind = Query::Kind::kLogic;
    } else if (kw.text == "dist") {
      q.kind = Query::Kind::kDist;
    } else if (kw.text == "decide") {
      q.kind = Query::Kind::kDecide;
    } else {
      parser.fail("unknown query form ?" + kw.text);
    }
    parser.accept(Tok::kVariable);
    for (RawProp& rp : parser.conjunction()) q.goals.push_back(std::move(rp.prop));
    if (q.kind != Query::Kind::kLogic && q.goals.size() != 1) {
      parser.fail(std::string("?") + to_string(q.kind) + " takes exactly one proposition");
    }
    parser.accept(Tok::kDot);
    if (!parser.at_end()) parser.fail("unexpected input after query");
  } catch (const SyntaxError& e) {
    throw ParseFailure({{e.span, ParseErrorKind::kSyntax, e.message}});
  }
  return q;
}

void validate_query(const Query& query, const KnowledgeBase& kb) {
  std::map<Symbol, DomainDecl> domains;
  for (const DomainDecl& d : kb.domains()) domains.emplace(d.relation, d);
  std::vector<ParseError> errors;
  ErrorSink sink(errors);
  Resolver resolver(domains, sink);
  Role role = query.kind == Query::Kind::kLogic ? Role::kLogic : Role::kQuery;
  try {
    for (const Proposition& g : query.goals) {
      resolver.resolve(RawProp{g, {"<query>", 1, 1}}, role);
    }
  } catch (const TooManyErrors&) {
  }
  if (!errors.empty()) throw ParseFailure(std::move(errors));
}

namespace {

void write_prop_list(std::ostream& out, const std::vector<Proposition>& props) {
  for (std::size_t i = 0; i < props.size(); ++i) {
    if (i) out << ", ";
    out << to_string(props[i]);
  }
}

std::vector<std::string> row_keys(const std::vector<Proposition>& axes) {
  std::vector<std::string> keys;
  for (const JointOutcome& joint : alternative_outcomes(axes)) {
    std::string key;
    for (const Outcome& o : joint) {
      for (const Symbol& s : o.choice) {
        if (!key.empty()) key += ", ";
        key += s;
      }
    }
    keys.push_back(key);
  }
  return keys;
}

}  // namespace

std::string serialize_kb(const KnowledgeBase& kb) {
  std::ostringstream out;
  for (const KnowledgeBase::DeclRef& ref : kb.declaration_order()) {
    switch (ref.kind) {
      case KnowledgeBase::DeclKind::kDomain: {
        const DomainDecl& d = kb.domains()[ref.index];
        out << "domain " << d.relation << "/" << d.arity;
        for (const DomainDecl::Position& p : d.restricted) {
          out << " @" << (p.index + 1) << " " << to_string(Term::alt_set(p.members));
        }
        out << ".\n";
        break;
      }
      case KnowledgeBase::DeclKind::kFact:
        out << "fact " << to_string(kb.facts()[ref.index]) << ".\n";
        break;
      case KnowledgeBase::DeclKind::kInfluence: {
        const Influence& inf = kb.influences()[ref.index];
        if (const auto* c = std::get_if<LogicClause>(&inf)) {
          out << "logic " << to_string(c->head);
          if (!c->body.empty()) {
            out << " <- ";
            write_prop_list(out, c->body);
          }
          out << ".\n";
        } else if (const auto* p = std::get_if<Prior>(&inf)) {
          out << "prior " << to_string(p->subject()) << " = {";
          std::vector<Outcome> outcomes = p->dist.outcomes();
          for (std::size_t i = 0; i < outcomes.size(); ++i) {
            if (i) out << ", ";
            if (outcomes[i].choice.size() == 1) {
              out << outcomes[i].choice.front();
            } else {
              out << "(" << outcomes[i].label() << ")";
            }
            out << ": " << format_number(p->dist.probs[i]);
          }
          out << "}.\n";
        } else if (const auto* pi = std::get_if<ProbInfluence>(&inf)) {
          out << "prob " << to_string(pi->subject) << " |p ";
          write_prop_list(out, pi->conditions);
          out << " = {\n";
          std::vector<std::string> keys = row_keys(pi->cpt.row_axes);
          for (std::size_t r = 0; r < keys.size(); ++r) {
            out << "  " << keys[r] << ": ";
            for (std::size_t k = 0; k < pi->cpt.rows[r].size(); ++k) {
              if (k) out << ", ";
              out << format_number(pi->cpt.rows[r][k]);
            }
            out << ";\n";
          }
          out << "}.\n";
        } else if (const auto* ii = std::get_if<InfoInfluence>(&inf)) {
          out << "info " << to_string(ii->decision);
          if (!ii->observed.empty()) {
            out << " |i ";
            write_prop_list(out, ii->observed);
          }
          out << ".\n";
        } else if (const auto* vi = std::get_if<ValueInfluence>(&inf)) {
          out << "value " << to_string(vi->subject);
          if (!vi->conditions.empty()) {
            out << " |v ";
            write_prop_list(out, vi->conditions);
          }
          out << " = {\n";
          std::vector<std::string> keys = row_keys(vi->vtable.row_axes);
          for (std::size_t r = 0; r < keys.size(); ++r) {
            out << "  " << keys[r] << ": " << format_number(vi->vtable.values[r]) << ";\n";
          }
          out << "}.\n";
        }
        break;
      }
    }
  }
  return out.str();
}

}  // namespace kbmc
