#include "skillforge/skillscript/parser.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <sstream>

namespace skillforge::skillscript {

const QueryDef* SkillDocument::find_query(const std::string& name) const {
  for (const auto& q : queries)
    if (q.name == name) return &q;
  return nullptr;
}

const OperatorDef* SkillDocument::find_operator(const std::string& name) const {
  for (const auto& o : operators)
    if (o.name == name) return &o;
  return nullptr;
}

const MethodDef* SkillDocument::find_method(const std::string& name) const {
  for (const auto& m : methods)
    if (m.name == name) return &m;
  return nullptr;
}

const MethodDef* SkillDocument::method_for_task(const std::string& task) const {
  for (const auto& [t, m] : registrations.tasks)
    if (t == task) return find_method(m);
  return nullptr;
}

bool SkillDocument::operator_registered(const std::string& name) const {
  return std::find(registrations.operators.begin(),
                   registrations.operators.end(),
                   name) != registrations.operators.end();
}

std::string ParseError::to_string() const {
  std::ostringstream out;
  out << pos.line << ":" << pos.col << ": " << message;
  if (!expected.empty()) {
    out << " (expected";
    for (const auto& e : expected) out << " " << e;
    out << ")";
  }
  return out.str();
}

namespace {

struct Token {
  enum class Kind {
    Ident,
    Int,
    String,
    Symbol,  // ( ) , : + - > < >= == := += -=
    End
  };
  Kind kind = Kind::End;
  std::string text;
  std::int64_t int_value = 0;
  SourcePos pos;
};

struct LexFail {
  SourcePos pos;
  std::string message;
};

// Tokenize a single physical line. Comments start with '#'.
std::variant<std::vector<Token>, LexFail> lex_line(const std::string& line,
                                                   int line_no) {
  std::vector<Token> out;
  size_t i = 0;
  auto pos_at = [&](size_t col) { return SourcePos{line_no, int(col) + 1}; };
  while (i < line.size()) {
    char c = line[i];
    if (c == '#') break;
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    size_t start = i;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (i < line.size() && (std::isalnum(static_cast<unsigned char>(line[i])) || line[i] == '_'))
        ++i;
      out.push_back({Token::Kind::Ident, line.substr(start, i - start), 0, pos_at(start)});
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
      Token t{Token::Kind::Int, line.substr(start, i - start), 0, pos_at(start)};
      t.int_value = std::stoll(t.text);
      out.push_back(t);
      continue;
    }
    if (c == '"') {
      ++i;
      std::string value;
      while (i < line.size() && line[i] != '"') value += line[i++];
      if (i >= line.size())
        return LexFail{pos_at(start), "unterminated string literal"};
      ++i;
      out.push_back({Token::Kind::String, value, 0, pos_at(start)});
      continue;
    }
    // Multi-char symbols first.
    auto two = line.substr(i, 2);
    if (two == ":=" || two == "+=" || two == "-=" || two == ">=" ||
        two == "==" || two == "<=") {
      out.push_back({Token::Kind::Symbol, two, 0, pos_at(start)});
      i += 2;
      continue;
    }
    if (std::string("(),:+-><").find(c) != std::string::npos) {
      out.push_back({Token::Kind::Symbol, std::string(1, c), 0, pos_at(start)});
      ++i;
      continue;
    }
    return LexFail{pos_at(start), std::string("unexpected character '") + c + "'"};
  }
  out.push_back({Token::Kind::End, "", 0, pos_at(line.size())});
  return out;
}

class LineCursor {
 public:
  explicit LineCursor(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  const Token& peek() const { return tokens_[idx_]; }
  const Token& next() { return tokens_[std::min(idx_++, tokens_.size() - 1)]; }
  bool at_end() const { return peek().kind == Token::Kind::End; }

  bool accept_symbol(const std::string& s) {
    if (peek().kind == Token::Kind::Symbol && peek().text == s) {
      next();
      return true;
    }
    return false;
  }
  bool accept_ident(const std::string& s) {
    if (peek().kind == Token::Kind::Ident && peek().text == s) {
      next();
      return true;
    }
    return false;
  }

 private:
  std::vector<Token> tokens_;
  size_t idx_ = 0;
};

struct Parser {
  std::vector<std::string> lines;
  size_t line_idx = 0;
  std::optional<ParseError> error;

  void fail(SourcePos pos, std::string message,
            std::vector<std::string> expected = {}) {
    if (!error) error = ParseError{pos, std::move(message), std::move(expected)};
  }

  // --- expressions (standard precedence climbing) ---

  ExprPtr parse_expr(LineCursor& cur) { return parse_or(cur); }

  ExprPtr make(Expr::Binary b, SourcePos pos) {
    auto e = std::make_shared<Expr>();
    e->node = std::move(b);
    e->pos = pos;
    return e;
  }

  ExprPtr parse_or(LineCursor& cur) {
    auto lhs = parse_and(cur);
    while (lhs && cur.peek().kind == Token::Kind::Ident && cur.peek().text == "or") {
      SourcePos pos = cur.next().pos;
      auto rhs = parse_and(cur);
      if (!rhs) return nullptr;
      lhs = make({BinOp::Or, lhs, rhs}, pos);
    }
    return lhs;
  }

  ExprPtr parse_and(LineCursor& cur) {
    auto lhs = parse_not(cur);
    while (lhs && cur.peek().kind == Token::Kind::Ident && cur.peek().text == "and") {
      SourcePos pos = cur.next().pos;
      auto rhs = parse_not(cur);
      if (!rhs) return nullptr;
      lhs = make({BinOp::And, lhs, rhs}, pos);
    }
    return lhs;
  }

  ExprPtr parse_not(LineCursor& cur) {
    if (cur.peek().kind == Token::Kind::Ident && cur.peek().text == "not") {
      SourcePos pos = cur.next().pos;
      auto inner = parse_not(cur);
      if (!inner) return nullptr;
      auto e = std::make_shared<Expr>();
      e->node = Expr::Not{inner};
      e->pos = pos;
      return e;
    }
    return parse_cmp(cur);
  }

  ExprPtr parse_cmp(LineCursor& cur) {
    auto lhs = parse_add(cur);
    if (!lhs) return nullptr;
    static const std::map<std::string, BinOp> cmps = {
        {">", BinOp::Gt}, {">=", BinOp::Ge}, {"==", BinOp::Eq}, {"<", BinOp::Lt}};
    if (cur.peek().kind == Token::Kind::Symbol) {
      auto it = cmps.find(cur.peek().text);
      if (it != cmps.end()) {
        SourcePos pos = cur.next().pos;
        auto rhs = parse_add(cur);
        if (!rhs) return nullptr;
        return make({it->second, lhs, rhs}, pos);
      }
    }
    return lhs;
  }

  ExprPtr parse_add(LineCursor& cur) {
    auto lhs = parse_primary(cur);
    while (lhs && cur.peek().kind == Token::Kind::Symbol &&
           (cur.peek().text == "+" || cur.peek().text == "-")) {
      BinOp op = cur.peek().text == "+" ? BinOp::Add : BinOp::Sub;
      SourcePos pos = cur.next().pos;
      auto rhs = parse_primary(cur);
      if (!rhs) return nullptr;
      lhs = make({op, lhs, rhs}, pos);
    }
    return lhs;
  }

  ExprPtr parse_primary(LineCursor& cur) {
    const Token& t = cur.peek();
    auto e = std::make_shared<Expr>();
    e->pos = t.pos;
    switch (t.kind) {
      case Token::Kind::Int:
        e->node = Expr::IntLit{t.int_value};
        cur.next();
        return e;
      case Token::Kind::String:
        e->node = Expr::StrLit{t.text};
        cur.next();
        return e;
      case Token::Kind::Symbol:
        if (cur.accept_symbol("(")) {
          auto inner = parse_expr(cur);
          if (!inner) return nullptr;
          if (!cur.accept_symbol(")")) {
            fail(cur.peek().pos, "missing ')'", {")"});
            return nullptr;
          }
          return inner;
        }
        fail(t.pos, "unexpected '" + t.text + "' in expression");
        return nullptr;
      case Token::Kind::Ident: {
        std::string name = t.text;
        if (name == "true" || name == "false") {
          e->node = Expr::BoolLit{name == "true"};
          cur.next();
          return e;
        }
        cur.next();
        if (name == "counter") {
          if (!cur.accept_symbol("(")) {
            fail(cur.peek().pos, "counter read requires '('", {"("});
            return nullptr;
          }
          if (cur.peek().kind != Token::Kind::Ident) {
            fail(cur.peek().pos, "counter read requires a counter name");
            return nullptr;
          }
          std::string counter = cur.next().text;
          std::int64_t fallback = 0;
          if (cur.accept_symbol(",")) {
            bool neg = cur.accept_symbol("-");
            if (cur.peek().kind != Token::Kind::Int) {
              fail(cur.peek().pos, "counter default must be an integer");
              return nullptr;
            }
            fallback = cur.next().int_value * (neg ? -1 : 1);
          }
          if (!cur.accept_symbol(")")) {
            fail(cur.peek().pos, "missing ')' after counter read", {")"});
            return nullptr;
          }
          e->node = Expr::CounterRead{counter, fallback};
          return e;
        }
        if (cur.accept_symbol("(")) {
          Expr::QueryCall call{name, {}};
          if (!cur.accept_symbol(")")) {
            while (true) {
              auto arg = parse_expr(cur);
              if (!arg) return nullptr;
              call.args.push_back(arg);
              if (cur.accept_symbol(")")) break;
              if (!cur.accept_symbol(",")) {
                fail(cur.peek().pos, "expected ',' or ')' in call", {",", ")"});
                return nullptr;
              }
            }
          }
          e->node = std::move(call);
          return e;
        }
        e->node = Expr::ParamRef{name};
        return e;
      }
      default:
        fail(t.pos, "unexpected end of line in expression");
        return nullptr;
    }
  }

  // --- lines & constructs ---

  // Returns tokens of the next meaningful line, or nullopt at end of input.
  std::optional<LineCursor> next_line() {
    while (line_idx < lines.size()) {
      int line_no = int(line_idx) + 1;
      auto lexed = lex_line(lines[line_idx], line_no);
      ++line_idx;
      if (auto* lf = std::get_if<LexFail>(&lexed)) {
        fail(lf->pos, lf->message);
        return std::nullopt;
      }
      auto toks = std::get<std::vector<Token>>(lexed);
      if (toks.size() == 1) continue;  // blank or comment-only
      return LineCursor(std::move(toks));
    }
    return std::nullopt;
  }

  bool parse_params(LineCursor& cur, std::vector<std::string>& out) {
    if (!cur.accept_symbol("(")) {
      fail(cur.peek().pos, "expected parameter list", {"("});
      return false;
    }
    if (cur.accept_symbol(")")) return true;
    while (true) {
      if (cur.peek().kind != Token::Kind::Ident) {
        fail(cur.peek().pos, "expected parameter name");
        return false;
      }
      out.push_back(cur.next().text);
      if (cur.accept_symbol(")")) return true;
      if (!cur.accept_symbol(",")) {
        fail(cur.peek().pos, "expected ',' or ')'", {",", ")"});
        return false;
      }
    }
  }

  bool expect_line_end(LineCursor& cur) {
    if (!cur.at_end()) {
      fail(cur.peek().pos, "trailing tokens on line");
      return false;
    }
    return true;
  }

  // Parses a guard header ("when <expr>" already consumed the keyword), or
  // nullptr for otherwise.
  bool parse_subtask_call(LineCursor& cur, SubtaskCall& out) {
    if (cur.peek().kind != Token::Kind::Ident) {
      fail(cur.peek().pos, "expected operator name");
      return false;
    }
    out.pos = cur.peek().pos;
    out.op = cur.next().text;
    if (!cur.accept_symbol("(")) {
      fail(cur.peek().pos, "expected '(' after operator name", {"("});
      return false;
    }
    if (cur.accept_symbol(")")) return true;
    while (true) {
      auto arg = parse_expr(cur);
      if (!arg) return false;
      out.args.push_back(arg);
      if (cur.accept_symbol(")")) return true;
      if (!cur.accept_symbol(",")) {
        fail(cur.peek().pos, "expected ',' or ')'", {",", ")"});
        return false;
      }
    }
  }

  template <typename Branch, typename BodyLineFn>
  bool parse_branches(std::vector<Branch>& branches, BodyLineFn&& body_line,
                      bool allow_empty_branch) {
    Branch* current = nullptr;
    while (true) {
      auto cur_opt = next_line();
      if (!cur_opt) {
        if (!error) fail({int(line_idx), 1}, "unexpected end of input, missing 'end'", {"end"});
        return false;
      }
      LineCursor cur = std::move(*cur_opt);
      const Token& head = cur.peek();
      if (head.kind == Token::Kind::Ident && head.text == "end") {
        cur.next();
        if (!expect_line_end(cur)) return false;
        if (branches.empty()) {
          fail(head.pos, "construct has no branches");
          return false;
        }
        for (auto& b : branches) {
          if (!allow_empty_branch && branch_empty(b)) {
            fail(b.pos, "branch has no body");
            return false;
          }
        }
        return true;
      }
      if (head.kind == Token::Kind::Ident && head.text == "when") {
        SourcePos pos = cur.next().pos;
        auto guard = parse_expr(cur);
        if (!guard || !expect_line_end(cur)) return false;
        branches.push_back({});
        current = &branches.back();
        current->guard = guard;
        current->pos = pos;
        continue;
      }
      if (head.kind == Token::Kind::Ident && head.text == "otherwise") {
        SourcePos pos = cur.next().pos;
        if (!expect_line_end(cur)) return false;
        branches.push_back({});
        current = &branches.back();
        current->pos = pos;
        continue;
      }
      if (!current) {
        fail(head.pos, "expected 'when' or 'otherwise' before branch body",
             {"when", "otherwise"});
        return false;
      }
      if (!body_line(cur, *current)) return false;
    }
  }

  static bool branch_empty(const QueryBranch& b) { return b.result == nullptr; }
  static bool branch_empty(const OperatorBranch&) { return false; }
  static bool branch_empty(const MethodBranch& b) {
    return b.lines.empty() && !b.fail;
  }

  bool parse_query(LineCursor& header, SkillDocument& doc) {
    QueryDef def;
    def.pos = header.peek().pos;
    if (header.peek().kind != Token::Kind::Ident) {
      fail(header.peek().pos, "expected query name");
      return false;
    }
    def.name = header.next().text;
    if (!parse_params(header, def.params) || !expect_line_end(header)) return false;
    auto body = [this](LineCursor& cur, QueryBranch& branch) {
      if (cur.accept_ident("return")) {
        if (branch.result) {
          fail(cur.peek().pos, "query branch already has a return");
          return false;
        }
        branch.result = parse_expr(cur);
        return branch.result != nullptr && expect_line_end(cur);
      }
      fail(cur.peek().pos, "expected 'return' in query branch", {"return"});
      return false;
    };
    if (!parse_branches(def.branches, body, /*allow_empty_branch=*/false))
      return false;
    doc.queries.push_back(std::move(def));
    return true;
  }

  bool parse_operator(LineCursor& header, SkillDocument& doc) {
    OperatorDef def;
    def.pos = header.peek().pos;
    if (header.peek().kind != Token::Kind::Ident) {
      fail(header.peek().pos, "expected operator name");
      return false;
    }
    def.name = header.next().text;
    if (!parse_params(header, def.params) || !expect_line_end(header)) return false;
    auto body = [this](LineCursor& cur, OperatorBranch& branch) {
      if (cur.accept_ident("fail")) {
        branch.fail = true;
        return expect_line_end(cur);
      }
      if (cur.accept_ident("effect")) {
        Effect eff;
        eff.pos = cur.peek().pos;
        if (cur.peek().kind != Token::Kind::Ident) {
          fail(cur.peek().pos, "expected counter name after 'effect'");
          return false;
        }
        eff.counter = cur.next().text;
        if (cur.accept_symbol(":=")) {
          eff.kind = Effect::Kind::Assign;
          eff.value = parse_expr(cur);
          if (!eff.value) return false;
        } else if (cur.accept_symbol("+=") || cur.accept_symbol("-=")) {
          // accept_symbol consumed one of the two; recover which from text
          // by checking the previous call: re-derive via a second lookup.
          // Simpler: re-parse kind explicitly below.
          fail(eff.pos, "internal effect parse");
          return false;
        } else {
          fail(cur.peek().pos, "expected ':=', '+=' or '-=' in effect",
               {":=", "+=", "-="});
          return false;
        }
        branch.effects.push_back(std::move(eff));
        return expect_line_end(cur);
      }
      fail(cur.peek().pos, "expected 'effect' or 'fail' in operator branch",
           {"effect", "fail"});
      return false;
    };
    // The lambda above only handles ':='; handle '+='/'-=' with a dedicated
    // wrapper that inspects the symbol before consuming.
    auto body_full = [this, &body](LineCursor& cur, OperatorBranch& branch) {
      // Peek ahead for the increment forms to avoid the accept ambiguity.
      LineCursor probe = cur;
      if (probe.accept_ident("effect") && probe.peek().kind == Token::Kind::Ident) {
        std::string counter = probe.next().text;
        if (probe.peek().kind == Token::Kind::Symbol &&
            (probe.peek().text == "+=" || probe.peek().text == "-=")) {
          Effect eff;
          eff.counter = counter;
          eff.kind = probe.peek().text == "+=" ? Effect::Kind::Add : Effect::Kind::Sub;
          eff.pos = probe.peek().pos;
          probe.next();
          if (probe.peek().kind != Token::Kind::Int) {
            fail(probe.peek().pos, "'+='/'-=' amount must be an integer literal");
            return false;
          }
          eff.amount = probe.next().int_value;
          if (!expect_line_end(probe)) return false;
          branch.effects.push_back(std::move(eff));
          return true;
        }
      }
      return body(cur, branch);
    };
    if (!parse_branches(def.branches, body_full, /*allow_empty_branch=*/true))
      return false;
    doc.operators.push_back(std::move(def));
    return true;
  }

  bool parse_method(LineCursor& header, SkillDocument& doc) {
    MethodDef def;
    def.pos = header.peek().pos;
    if (header.peek().kind != Token::Kind::Ident) {
      fail(header.peek().pos, "expected method name");
      return false;
    }
    def.name = header.next().text;
    if (!parse_params(header, def.params) || !expect_line_end(header)) return false;
    auto body = [this](LineCursor& cur, MethodBranch& branch) {
      if (cur.accept_ident("fail")) {
        branch.fail = true;
        return expect_line_end(cur);
      }
      if (cur.accept_ident("tasks")) {
        TasksLine line;
        line.pos = cur.peek().pos;
        if (cur.accept_ident("if")) {
          line.guard = parse_expr(cur);
          if (!line.guard) return false;
          if (!cur.accept_symbol(":")) {
            fail(cur.peek().pos, "expected ':' after tasks guard", {":"});
            return false;
          }
        }
        while (true) {
          SubtaskCall call;
          if (!parse_subtask_call(cur, call)) return false;
          line.calls.push_back(std::move(call));
          if (!cur.accept_symbol(",")) break;
        }
        if (!expect_line_end(cur)) return false;
        branch.lines.push_back(std::move(line));
        return true;
      }
      fail(cur.peek().pos, "expected 'tasks' or 'fail' in method branch",
           {"tasks", "fail"});
      return false;
    };
    if (!parse_branches(def.branches, body, /*allow_empty_branch=*/false))
      return false;
    doc.methods.push_back(std::move(def));
    return true;
  }

  bool parse_register(LineCursor& cur, SkillDocument& doc) {
    if (cur.accept_ident("operators")) {
      if (cur.peek().kind != Token::Kind::Ident) {
        fail(cur.peek().pos, "expected at least one operator name");
        return false;
      }
      while (cur.peek().kind == Token::Kind::Ident)
        doc.registrations.operators.push_back(cur.next().text);
      return expect_line_end(cur);
    }
    if (cur.accept_ident("task")) {
      if (cur.peek().kind != Token::Kind::Ident) {
        fail(cur.peek().pos, "expected task name");
        return false;
      }
      std::string task = cur.next().text;
      if (cur.peek().kind != Token::Kind::Ident) {
        fail(cur.peek().pos, "expected method name after task name");
        return false;
      }
      std::string method = cur.next().text;
      doc.registrations.tasks.emplace_back(task, method);
      return expect_line_end(cur);
    }
    fail(cur.peek().pos, "expected 'operators' or 'task' after 'register'",
         {"operators", "task"});
    return false;
  }

  ParseResult run(const std::string& text) {
    SkillDocument doc;
    doc.source_text = text;
    bool saw_any = false;
    while (true) {
      auto cur_opt = next_line();
      if (error) return *error;
      if (!cur_opt) break;
      LineCursor cur = std::move(*cur_opt);
      saw_any = true;
      const Token& head = cur.peek();
      bool ok = false;
      if (cur.accept_ident("skillscript")) {
        // optional format marker line
        ok = expect_line_end(cur);
      } else if (cur.accept_ident("query")) {
        ok = parse_query(cur, doc);
      } else if (cur.accept_ident("operator")) {
        ok = parse_operator(cur, doc);
      } else if (cur.accept_ident("method")) {
        ok = parse_method(cur, doc);
      } else if (cur.accept_ident("register")) {
        ok = parse_register(cur, doc);
      } else {
        fail(head.pos, "expected a top-level construct",
             {"query", "operator", "method", "register"});
      }
      if (!ok) return error ? *error : ParseError{head.pos, "parse failure"};
    }
    if (!saw_any) return ParseError{{1, 1}, "empty skill document"};
    return doc;
  }
};

// --- serialization ---

int precedence(BinOp op) {
  switch (op) {
    case BinOp::Or: return 1;
    case BinOp::And: return 2;
    case BinOp::Gt:
    case BinOp::Ge:
    case BinOp::Eq:
    case BinOp::Lt: return 4;
    case BinOp::Add:
    case BinOp::Sub: return 5;
  }
  return 0;
}

const char* op_text(BinOp op) {
  switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Gt: return ">";
    case BinOp::Ge: return ">=";
    case BinOp::Eq: return "==";
    case BinOp::Lt: return "<";
    case BinOp::And: return "and";
    case BinOp::Or: return "or";
  }
  return "?";
}

void emit_expr(std::ostream& out, const Expr& e, int parent_prec);

void emit_args(std::ostream& out, const std::vector<ExprPtr>& args) {
  out << "(";
  for (size_t i = 0; i < args.size(); ++i) {
    if (i) out << ", ";
    emit_expr(out, *args[i], 0);
  }
  out << ")";
}

void emit_expr(std::ostream& out, const Expr& e, int parent_prec) {
  if (auto* n = std::get_if<Expr::IntLit>(&e.node)) {
    out << n->value;
  } else if (auto* s = std::get_if<Expr::StrLit>(&e.node)) {
    out << '"' << s->value << '"';
  } else if (auto* b = std::get_if<Expr::BoolLit>(&e.node)) {
    out << (b->value ? "true" : "false");
  } else if (auto* p = std::get_if<Expr::ParamRef>(&e.node)) {
    out << p->name;
  } else if (auto* c = std::get_if<Expr::CounterRead>(&e.node)) {
    out << "counter(" << c->counter << ", " << c->fallback << ")";
  } else if (auto* q = std::get_if<Expr::QueryCall>(&e.node)) {
    out << q->query;
    emit_args(out, q->args);
  } else if (auto* u = std::get_if<Expr::Not>(&e.node)) {
    if (parent_prec > 3) out << "(";
    out << "not ";
    emit_expr(out, *u->operand, 3);
    if (parent_prec > 3) out << ")";
  } else if (auto* bin = std::get_if<Expr::Binary>(&e.node)) {
    int prec = precedence(bin->op);
    if (parent_prec > prec) out << "(";
    emit_expr(out, *bin->lhs, prec);
    out << " " << op_text(bin->op) << " ";
    emit_expr(out, *bin->rhs, prec + 1);
    if (parent_prec > prec) out << ")";
  }
}

void emit_header(std::ostream& out, const char* kind, const std::string& name,
                 const std::vector<std::string>& params) {
  out << kind << " " << name << "(";
  for (size_t i = 0; i < params.size(); ++i) {
    if (i) out << ", ";
    out << params[i];
  }
  out << ")\n";
}

void emit_guard(std::ostream& out, const ExprPtr& guard) {
  if (guard) {
    out << "  when ";
    emit_expr(out, *guard, 0);
    out << "\n";
  } else {
    out << "  otherwise\n";
  }
}

template <typename T>
std::vector<const T*> sorted_by_name(const std::vector<T>& items) {
  std::vector<const T*> out;
  for (const auto& item : items) out.push_back(&item);
  std::sort(out.begin(), out.end(),
            [](const T* a, const T* b) { return a->name < b->name; });
  return out;
}

}  // namespace

ParseResult parse(const std::string& text) {
  Parser p;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    p.lines.push_back(line);
  }
  return p.run(text);
}

std::string serialize(const SkillDocument& doc) {
  std::ostringstream out;
  out << "skillscript\n";
  auto gap = [&] { out << "\n"; };
  for (const auto* q : sorted_by_name(doc.queries)) {
    gap();
    emit_header(out, "query", q->name, q->params);
    for (const auto& b : q->branches) {
      emit_guard(out, b.guard);
      out << "    return ";
      emit_expr(out, *b.result, 0);
      out << "\n";
    }
    out << "end\n";
  }
  for (const auto* o : sorted_by_name(doc.operators)) {
    gap();
    emit_header(out, "operator", o->name, o->params);
    for (const auto& b : o->branches) {
      emit_guard(out, b.guard);
      if (b.fail) out << "    fail\n";
      for (const auto& eff : b.effects) {
        out << "    effect " << eff.counter;
        switch (eff.kind) {
          case Effect::Kind::Assign:
            out << " := ";
            emit_expr(out, *eff.value, 0);
            break;
          case Effect::Kind::Add:
            out << " += " << eff.amount;
            break;
          case Effect::Kind::Sub:
            out << " -= " << eff.amount;
            break;
        }
        out << "\n";
      }
    }
    out << "end\n";
  }
  for (const auto* m : sorted_by_name(doc.methods)) {
    gap();
    emit_header(out, "method", m->name, m->params);
    for (const auto& b : m->branches) {
      emit_guard(out, b.guard);
      if (b.fail) out << "    fail\n";
      for (const auto& line : b.lines) {
        out << "    tasks ";
        if (line.guard) {
          out << "if ";
          emit_expr(out, *line.guard, 0);
          out << ": ";
        }
        for (size_t i = 0; i < line.calls.size(); ++i) {
          if (i) out << ", ";
          out << line.calls[i].op;
          emit_args(out, line.calls[i].args);
        }
        out << "\n";
      }
    }
    out << "end\n";
  }
  if (!doc.registrations.operators.empty()) {
    gap();
    auto ops = doc.registrations.operators;
    std::sort(ops.begin(), ops.end());
    out << "register operators";
    for (const auto& o : ops) out << " " << o;
    out << "\n";
  }
  auto tasks = doc.registrations.tasks;
  std::sort(tasks.begin(), tasks.end());
  for (const auto& [task, method] : tasks)
    out << "register task " << task << " " << method << "\n";
  return out.str();
}

bool structurally_equal(const SkillDocument& a, const SkillDocument& b) {
  return serialize(a) == serialize(b);
}

}  // namespace skillforge::skillscript
