// Recursive-descent parser for the rule DSL.
//
//   ruleset   := (rule | effect | fact)*
//   rule      := "rule" IDENT ":" "on" eexpr ["where" cond] "do" action ("," action)*
//                ["post" cond] ["select" first|last|all] ["consume" single|multiple]
//                ["window" INT]
//   effect    := "effect" IDENT ("initiates" | "terminates") IDENT
//   fact      := "fact" IDENT ["(" term ("," term)* ")"]      (literals only)
//   eexpr     := IDENT ["as" VAR] | seq(e, e) | and(e, e) | or(e, e) | not(e, e, e)
//              | any(INT, IDENT, ...) | times(INT, e)
//   cond      := atom ("and" atom)*
//   atom      := term OP term | ["not"] fact(IDENT, term...) | holds(IDENT)
//   action    := assert(tpl) | retract(tpl) | emit(IDENT, {IDENT: term, ...}) | noop
//   tpl       := IDENT ["(" [IDENT ":"] term ("," [IDENT ":"] term)* ")"]
//   term      := INT | DECIMAL | STRING | IDENT | VAR | VAR "." IDENT
//
// A bare IDENT term is a string constant (`true`/`false` are booleans).
// The trailing rule clauses may appear in any order.

#include <cctype>
#include <charconv>
#include <map>
#include <set>

#include "reactor/error.hpp"
#include "reactor/rules.hpp"

namespace reactor {

namespace {

enum class Tok { Ident, Var, Int, Decimal, String, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  std::size_t line = 0;
  std::size_t col = 0;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  std::size_t line = 1;
  std::size_t line_start = 0;
  auto fail = [&](const std::string& msg) -> void {
    throw Error(ErrorCode::SyntaxError, msg, line, i - line_start + 1);
  };
  while (i < src.size()) {
    const char c = src[i];
    if (c == '\n') {
      ++i;
      ++line;
      line_start = i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') ++i;
      continue;
    }
    Token tok;
    tok.line = line;
    tok.col = i - line_start + 1;
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < src.size() && ident_char(src[j])) ++j;
      std::string word(src.substr(i, j - i));
      // assert:NAME / retract:NAME are single event-type names
      if ((word == "assert" || word == "retract") && j + 1 < src.size() && src[j] == ':' &&
          ident_start(src[j + 1])) {
        std::size_t k = j + 1;
        while (k < src.size() && ident_char(src[k])) ++k;
        word = std::string(src.substr(i, k - i));
        j = k;
      }
      tok.kind = Tok::Ident;
      tok.text = std::move(word);
      i = j;
    } else if (c == '?') {
      std::size_t j = i + 1;
      if (j >= src.size() || !ident_start(src[j])) fail("expected variable name after '?'");
      while (j < src.size() && ident_char(src[j])) ++j;
      tok.kind = Tok::Var;
      tok.text = std::string(src.substr(i + 1, j - i - 1));
      i = j;
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               (c == '-' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      std::size_t j = i + 1;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      tok.kind = Tok::Int;
      if (j + 1 < src.size() && src[j] == '.' && std::isdigit(static_cast<unsigned char>(src[j + 1]))) {
        j += 1;
        while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
        tok.kind = Tok::Decimal;
      }
      tok.text = std::string(src.substr(i, j - i));
      i = j;
    } else if (c == '"') {
      std::size_t j = i + 1;
      std::string text;
      while (true) {
        if (j >= src.size() || src[j] == '\n') fail("unterminated string");
        if (src[j] == '"') break;
        if (src[j] == '\\' && j + 1 < src.size()) {
          const char esc = src[j + 1];
          text += esc == 'n' ? '\n' : esc == 't' ? '\t' : esc;
          j += 2;
        } else {
          text += src[j++];
        }
      }
      tok.kind = Tok::String;
      tok.text = std::move(text);
      i = j + 1;
    } else {
      static const std::vector<std::pair<std::string_view, std::string_view>> puncts = {
          {"\xE2\x89\xA0", "!="}, {"\xE2\x89\xA4", "<="}, {"\xE2\x89\xA5", ">="},
          {"!=", "!="}, {"<=", "<="}, {">=", ">="}, {"(", "("}, {")", ")"}, {",", ","},
          {":", ":"}, {"{", "{"}, {"}", "}"}, {".", "."}, {"=", "="}, {"<", "<"}, {">", ">"},
      };
      bool matched = false;
      for (const auto& [spelling, canon] : puncts) {
        if (src.substr(i, spelling.size()) == spelling) {
          tok.kind = Tok::Punct;
          tok.text = std::string(canon);
          i += spelling.size();
          matched = true;
          break;
        }
      }
      if (!matched) fail(std::string("unexpected character '") + c + "'");
    }
    out.push_back(std::move(tok));
  }
  Token end;
  end.kind = Tok::End;
  end.line = line;
  end.col = i - line_start + 1;
  out.push_back(end);
  return out;
}

// Which variables a term may mention at the point it is parsed.
struct Scope {
  std::set<std::string> events;     // bound by the event expression
  std::set<std::string> variables;  // bound by earlier fact lookups
};

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  RuleSet parse_ruleset() {
    RuleSet rs;
    std::set<std::string> ids;
    while (peek().kind != Tok::End) {
      if (at_word("rule")) {
        rs.rules.push_back(parse_rule(ids));
      } else if (at_word("effect")) {
        parse_effect(rs);
      } else if (at_word("fact")) {
        rs.facts.insert(parse_initial_fact());
      } else {
        fail(peek(), "expected 'rule', 'effect' or 'fact'");
      }
    }
    return rs;
  }

  EventExpr parse_expression_only() {
    const Token start = peek();
    EventExpr e = parse_eexpr();
    if (peek().kind != Tok::End) fail(peek(), "unexpected trailing input");
    check_expr(e, start);
    return e;
  }

 private:
  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  Token next() {
    Token t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
  }
  bool at_word(std::string_view w, std::size_t k = 0) const {
    return peek(k).kind == Tok::Ident && peek(k).text == w;
  }
  bool at_punct(std::string_view p, std::size_t k = 0) const {
    return peek(k).kind == Tok::Punct && peek(k).text == p;
  }
  [[noreturn]] void fail(const Token& t, const std::string& msg, ErrorCode code = ErrorCode::SyntaxError) const {
    std::string found = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
    throw Error(code, code == ErrorCode::SyntaxError ? msg + ", found " + found : msg, t.line, t.col);
  }
  void expect_punct(std::string_view p) {
    if (!at_punct(p)) fail(peek(), "expected '" + std::string(p) + "'");
    next();
  }
  void expect_word(std::string_view w) {
    if (!at_word(w)) fail(peek(), "expected '" + std::string(w) + "'");
    next();
  }
  std::string expect_ident(const std::string& what) {
    if (peek().kind != Tok::Ident) fail(peek(), "expected " + what);
    return next().text;
  }
  std::int64_t expect_int(const std::string& what) {
    if (peek().kind != Tok::Int) fail(peek(), "expected " + what);
    const Token t = next();
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc()) fail(t, "integer out of range");
    return v;
  }

  void check_expr(const EventExpr& e, const Token& at) const {
    try {
      validate(e);
    } catch (const Error& err) {
      throw Error(err.code(), err.detail(), at.line, at.col);
    }
  }

  // -- event expressions ----------------------------------------------------

  EventExpr parse_eexpr() {
    const Token head = peek();
    if (head.kind != Tok::Ident) fail(head, "expected event expression");
    if (at_punct("(", 1)) {
      const std::string& op = head.text;
      if (op == "seq" || op == "and" || op == "or") {
        next();
        next();
        EventExpr l = parse_eexpr();
        expect_punct(",");
        EventExpr r = parse_eexpr();
        expect_punct(")");
        if (op == "seq") return make_seq(std::move(l), std::move(r));
        if (op == "and") return make_and(std::move(l), std::move(r));
        return make_or(std::move(l), std::move(r));
      }
      if (op == "not") {
        next();
        next();
        EventExpr a = parse_eexpr();
        expect_punct(",");
        EventExpr o = parse_eexpr();
        expect_punct(",");
        EventExpr c = parse_eexpr();
        expect_punct(")");
        return make_not(std::move(a), std::move(o), std::move(c));
      }
      if (op == "any") {
        next();
        next();
        const std::int64_t n = expect_int("count");
        if (n <= 0) fail(head, "any: count must be positive", ErrorCode::InvalidExpression);
        std::vector<EventTypeId> types;
        while (at_punct(",")) {
          next();
          types.emplace_back(expect_ident("event type"));
        }
        expect_punct(")");
        return make_any(static_cast<std::size_t>(n), std::move(types));
      }
      if (op == "times") {
        next();
        next();
        const std::int64_t n = expect_int("count");
        if (n <= 0) fail(head, "times: count must be positive", ErrorCode::InvalidExpression);
        expect_punct(",");
        EventExpr of = parse_eexpr();
        expect_punct(")");
        return make_times(static_cast<std::size_t>(n), std::move(of));
      }
      fail(head, "unknown operator '" + op + "'");
    }
    next();
    std::optional<std::string> var;
    if (at_word("as")) {
      next();
      if (peek().kind != Tok::Var) fail(peek(), "expected variable after 'as'");
      var = next().text;
    }
    return make_atomic(EventTypeId(head.text), std::move(var));
  }

  // -- terms and conditions -------------------------------------------------

  enum class VarUse { MustBeBound, MayBind };

  Term parse_term(Scope& scope, VarUse use) {
    const Token t = next();
    switch (t.kind) {
      case Tok::Int: {
        std::int64_t v = 0;
        auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        if (ec != std::errc()) fail(t, "integer out of range");
        return Value{v};
      }
      case Tok::Decimal: return Value{std::stod(t.text)};
      case Tok::String: return Value{t.text};
      case Tok::Ident:
        if (t.text == "true") return Value{true};
        if (t.text == "false") return Value{false};
        return Value{t.text};
      case Tok::Var: {
        if (at_punct(".")) {
          next();
          const std::string field = expect_ident("field name");
          if (!scope.events.contains(t.text)) {
            fail(t, "?" + t.text, ErrorCode::UnboundVariable);
          }
          return FieldRef{t.text, field};
        }
        if (scope.events.contains(t.text)) {
          fail(t, "event binding ?" + t.text + " must be used with a field, as ?" + t.text + ".name");
        }
        if (!scope.variables.contains(t.text)) {
          if (use == VarUse::MustBeBound) fail(t, "?" + t.text, ErrorCode::UnboundVariable);
          scope.variables.insert(t.text);
        }
        return VarRef{t.text};
      }
      default: fail(t, "expected term");
    }
  }

  std::optional<CmpOp> comparison_op() const {
    if (peek().kind != Tok::Punct) return std::nullopt;
    static const std::map<std::string, CmpOp> ops = {{"=", CmpOp::Eq},  {"!=", CmpOp::Ne},
                                                     {"<", CmpOp::Lt},  {"<=", CmpOp::Le},
                                                     {">", CmpOp::Gt},  {">=", CmpOp::Ge}};
    auto it = ops.find(peek().text);
    if (it == ops.end()) return std::nullopt;
    return it->second;
  }

  ConditionAtom parse_atom(Scope& scope) {
    bool negated = false;
    if (at_word("not") && at_word("fact", 1)) {
      next();
      negated = true;
    }
    if (at_word("fact") && at_punct("(", 1)) {
      next();
      next();
      FactLookup lookup;
      lookup.negated = negated;
      lookup.name = expect_ident("fact name");
      // variables first seen inside a negated lookup would never be bound
      Scope local = scope;
      while (at_punct(",")) {
        next();
        lookup.args.push_back(parse_term(local, negated ? VarUse::MustBeBound : VarUse::MayBind));
      }
      expect_punct(")");
      if (!negated) scope = std::move(local);
      return lookup;
    }
    if (negated) fail(peek(), "expected 'fact' after 'not'");
    if (at_word("holds") && at_punct("(", 1)) {
      next();
      next();
      HoldsCheck h{expect_ident("fluent name")};
      expect_punct(")");
      return h;
    }
    Comparison cmp;
    cmp.lhs = parse_term(scope, VarUse::MustBeBound);
    auto op = comparison_op();
    if (!op) fail(peek(), "expected comparison operator");
    next();
    cmp.op = *op;
    cmp.rhs = parse_term(scope, VarUse::MustBeBound);
    return cmp;
  }

  Condition parse_condition(Scope& scope) {
    Condition c;
    c.atoms.push_back(parse_atom(scope));
    while (at_word("and")) {
      next();
      c.atoms.push_back(parse_atom(scope));
    }
    return c;
  }

  // -- actions --------------------------------------------------------------

  FactTemplate parse_template(Scope& scope) {
    FactTemplate tpl;
    tpl.name = expect_ident("fact name");
    if (!at_punct("(")) return tpl;
    next();
    if (!at_punct(")")) {
      while (true) {
        TemplateArg arg;
        if (peek().kind == Tok::Ident && at_punct(":", 1)) {
          arg.label = next().text;
          next();
        }
        arg.value = parse_term(scope, VarUse::MustBeBound);
        tpl.args.push_back(std::move(arg));
        if (!at_punct(",")) break;
        next();
      }
    }
    expect_punct(")");
    return tpl;
  }

  Action parse_action(Scope& scope) {
    const Token head = peek();
    if (at_word("noop")) {
      next();
      return NoopAction{};
    }
    if ((at_word("assert") || at_word("retract")) && at_punct("(", 1)) {
      next();
      next();
      FactTemplate tpl = parse_template(scope);
      expect_punct(")");
      if (head.text == "assert") return AssertAction{std::move(tpl)};
      return RetractAction{std::move(tpl)};
    }
    if (at_word("emit") && at_punct("(", 1)) {
      next();
      next();
      const Token type_tok = peek();
      EventTypeId type(expect_ident("event type"));
      if (type.reserved()) fail(type_tok, "event type '" + type.name + "' is reserved");
      expect_punct(",");
      expect_punct("{");
      EmitAction emit{std::move(type), {}};
      std::set<std::string> seen;
      while (!at_punct("}")) {
        const Token field_tok = peek();
        std::string field = expect_ident("payload field");
        if (!seen.insert(field).second) fail(field_tok, "duplicate payload field '" + field + "'");
        expect_punct(":");
        emit.fields.emplace_back(std::move(field), parse_term(scope, VarUse::MustBeBound));
        if (at_punct(",")) next();
      }
      next();
      expect_punct(")");
      return emit;
    }
    fail(head, "expected action");
  }

  // -- statements -----------------------------------------------------------

  Rule parse_rule(std::set<std::string>& ids) {
    expect_word("rule");
    const Token id_tok = peek();
    Rule rule{.id = expect_ident("rule id"), .on = make_atomic("_")};
    if (!ids.insert(rule.id).second) fail(id_tok, rule.id, ErrorCode::DuplicateRuleId);
    expect_punct(":");
    expect_word("on");
    const Token expr_tok = peek();
    rule.on = parse_eexpr();
    check_expr(rule.on, expr_tok);

    Scope scope;
    for (auto& v : bound_variables(rule.on)) scope.events.insert(v);
    if (at_word("where")) {
      next();
      rule.where = parse_condition(scope);
    }
    expect_word("do");
    rule.actions.push_back(parse_action(scope));
    while (at_punct(",")) {
      next();
      rule.actions.push_back(parse_action(scope));
    }

    std::set<std::string> seen;
    auto once = [&](const Token& t) {
      if (!seen.insert(t.text).second) fail(t, "duplicate '" + t.text + "' clause");
    };
    while (true) {
      const Token t = peek();
      if (at_word("post")) {
        once(t);
        next();
        Scope post_scope = scope;
        rule.post = parse_condition(post_scope);
      } else if (at_word("select")) {
        once(t);
        next();
        const Token p = peek();
        const std::string v = expect_ident("selection policy");
        if (v == "first") rule.selection = SelectionPolicy::First;
        else if (v == "last") rule.selection = SelectionPolicy::Last;
        else if (v == "all") rule.selection = SelectionPolicy::All;
        else fail(p, "expected first, last or all");
      } else if (at_word("consume")) {
        once(t);
        next();
        const Token p = peek();
        const std::string v = expect_ident("consumption policy");
        if (v == "single") rule.consumption = ConsumptionPolicy::Single;
        else if (v == "multiple") rule.consumption = ConsumptionPolicy::Multiple;
        else fail(p, "expected single or multiple");
      } else if (at_word("window")) {
        once(t);
        next();
        const Token w = peek();
        const std::int64_t v = expect_int("window length");
        if (v <= 0) fail(w, "window must be positive");
        rule.window = v;
      } else {
        break;
      }
    }
    if (!at_word("rule") && !at_word("effect") && !at_word("fact") && peek().kind != Tok::End) {
      fail(peek(), "expected ',' or rule clause");
    }
    return rule;
  }

  void parse_effect(RuleSet& rs) {
    const Token start = next();
    EventTypeId type(expect_ident("event type"));
    EffectMode mode;
    if (at_word("initiates")) {
      mode = EffectMode::Initiates;
    } else if (at_word("terminates")) {
      mode = EffectMode::Terminates;
    } else {
      fail(peek(), "expected 'initiates' or 'terminates'");
    }
    next();
    EffectRule rule{std::move(type), mode, expect_ident("fluent name")};
    for (const auto& existing : rs.effects) {
      if (existing == rule) {
        fail(start, rule.type.name + " " + std::string(to_string(mode)) + " " + rule.fluent,
             ErrorCode::DuplicateEffect);
      }
    }
    rs.effects.push_back(std::move(rule));
  }

  Fact parse_initial_fact() {
    next();
    Fact f;
    f.name = expect_ident("fact name");
    if (!at_punct("(")) return f;
    next();
    Scope none;
    while (!at_punct(")")) {
      const Token t = peek();
      Term term = parse_term(none, VarUse::MustBeBound);
      const auto* v = std::get_if<Value>(&term);
      if (v == nullptr) fail(t, "initial facts take literal arguments only");
      f.args.push_back(*v);
      if (!at_punct(",")) break;
      next();
    }
    expect_punct(")");
    return f;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace

RuleSet parse_rules(std::string_view text) { return Parser(tokenize(text)).parse_ruleset(); }

EventExpr parse_event_expr(std::string_view text) {
  return Parser(tokenize(text)).parse_expression_only();
}

}  // namespace reactor
