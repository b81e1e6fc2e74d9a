#include "refform/dsl.hpp"

#include <cctype>
#include <map>
#include <set>
#include <sstream>

namespace refform {

namespace {

enum class Tok {
  Ident,
  Int,
  LBrace,
  RBrace,
  LBracket,
  RBracket,
  Comma,
  Semi,
  End,
  Bad,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  long long value = 0;
  SourceSpan span;
};

class Lexer {
 public:
  Lexer(std::string_view text, std::vector<Diagnostic>& diagnostics)
      : text_(text), diagnostics_(diagnostics) {}

  std::vector<Token> tokens() {
    std::vector<Token> out;
    for (;;) {
      skip_trivia();
      Token t = next();
      bool end = t.kind == Tok::End;
      if (t.kind != Tok::Bad) out.push_back(std::move(t));
      if (end) break;
    }
    return out;
  }

 private:
  void skip_trivia() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '\n') {
        ++line_;
        col_ = 1;
        ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++col_;
        ++pos_;
      } else if (c == '/' && pos_ + 1 < text_.size() &&
                 text_[pos_ + 1] == '/') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  Token next() {
    SourceSpan span{static_cast<int>(pos_), 1, line_, col_};
    if (pos_ >= text_.size()) return {Tok::End, "", 0, span};
    char c = text_[pos_];
    auto single = [&](Tok kind) {
      ++pos_;
      ++col_;
      return Token{kind, std::string(1, c), 0, span};
    };
    switch (c) {
      case '{':
        return single(Tok::LBrace);
      case '}':
        return single(Tok::RBrace);
      case '[':
        return single(Tok::LBracket);
      case ']':
        return single(Tok::RBracket);
      case ',':
        return single(Tok::Comma);
      case ';':
        return single(Tok::Semi);
      default:
        break;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
              text_[pos_] == '_'))
        ++pos_;
      span.length = static_cast<int>(pos_ - start);
      col_ += span.length;
      return {Tok::Ident, std::string(text_.substr(start, pos_ - start)), 0,
              span};
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      long long value = 0;
      bool overflow = false;
      while (pos_ < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        value = value * 10 + (text_[pos_] - '0');
        if (value > 1000000000) overflow = true;
        ++pos_;
      }
      span.length = static_cast<int>(pos_ - start);
      col_ += span.length;
      if (overflow) {
        diagnostics_.push_back({span, "integer literal too large"});
        value = 0;
      }
      return {Tok::Int, std::string(text_.substr(start, pos_ - start)), value,
              span};
    }
    diagnostics_.push_back(
        {span, "unexpected character '" + printable(c) + "'"});
    ++pos_;
    ++col_;
    return {Tok::Bad, std::string(1, c), 0, span};
  }

  static std::string printable(char c) {
    if (std::isprint(static_cast<unsigned char>(c))) return std::string(1, c);
    char buf[8];
    std::snprintf(buf, sizeof buf, "\\x%02x", static_cast<unsigned char>(c));
    return buf;
  }

  std::string_view text_;
  std::vector<Diagnostic>& diagnostics_;
  std::size_t pos_ = 0;
  int line_ = 1, col_ = 1;
};

struct NameRef {
  std::string name;
  SourceSpan span;
};

struct ConnAst {
  bool selected = false;
  NameRef control;
  SourceSpan select_span;  // span of "select"/"from"
  std::vector<std::vector<NameRef>> alternatives;
};

struct FFAst {
  NameRef name;
  NameRef clock;
  ConnAst conn;
};

class Parser {
 public:
  Parser(std::vector<Token> tokens, std::vector<Diagnostic>& diagnostics)
      : tokens_(std::move(tokens)), diagnostics_(diagnostics) {}

  std::optional<Circuit> parse_circuit() {
    if (!expect_keyword("circuit")) return std::nullopt;
    NameRef name;
    if (!expect_name(name, "circuit name")) return std::nullopt;
    if (!expect(Tok::LBrace, "'{'")) return std::nullopt;
    while (!at(Tok::RBrace) && !at(Tok::End)) parse_item();
    if (!expect(Tok::RBrace, "'}'")) return std::nullopt;
    if (!at(Tok::End))
      error(peek().span, "unexpected trailing input after circuit");
    if (!diagnostics_.empty()) return std::nullopt;
    return build(name);
  }

 private:
  // ---- item parsing -------------------------------------------------------

  void parse_item() {
    const Token& t = peek();
    if (t.kind != Tok::Ident) {
      error(t.span, "expected input, control, clock, ff or output");
      recover();
      return;
    }
    if (t.text == "input") {
      parse_port(PortKind::Data);
    } else if (t.text == "control") {
      parse_port(PortKind::Control);
    } else if (t.text == "clock") {
      parse_clock();
    } else if (t.text == "ff") {
      parse_ff();
    } else if (t.text == "output") {
      parse_output();
    } else {
      error(t.span, "expected input, control, clock, ff or output");
      recover();
    }
  }

  void parse_port(PortKind kind) {
    advance();  // keyword
    NameRef name;
    if (!expect_name(name, "port name") || !expect(Tok::Semi, "';'")) {
      recover();
      return;
    }
    declare(name);
    (kind == PortKind::Data ? data_ports_ : control_ports_).push_back(name);
  }

  void parse_clock() {
    advance();
    NameRef name;
    if (!expect_name(name, "clock name")) {
      recover();
      return;
    }
    ClockRef clock = Free{};
    const Token& t = peek();
    if (t.kind == Tok::Ident && t.text == "free") {
      advance();
    } else if (t.kind == Tok::Ident && t.text == "period") {
      advance();
      long long period = 0, offset = 0;
      if (!expect_int(period, "period") || !expect_keyword("offset") ||
          !expect_int(offset, "offset")) {
        recover();
        return;
      }
      if (period < 1) {
        error(name.span, "clock period must be positive");
        recover();
        return;
      }
      if (offset < 0 || offset >= period) {
        error(name.span, "clock offset must lie in [0, period)");
        recover();
        return;
      }
      clock = Periodic{static_cast<int>(period), static_cast<int>(offset)};
    } else if (t.kind == Tok::Ident && t.text == "edges") {
      advance();
      if (!expect(Tok::LBracket, "'['")) {
        recover();
        return;
      }
      std::vector<TimeStep> edges;
      if (!at(Tok::RBracket)) {
        for (;;) {
          long long v = 0;
          if (!expect_int(v, "edge time")) {
            recover();
            return;
          }
          edges.push_back(static_cast<TimeStep>(v));
          if (at(Tok::Comma)) {
            advance();
            continue;
          }
          break;
        }
      }
      if (!expect(Tok::RBracket, "']'")) {
        recover();
        return;
      }
      std::sort(edges.begin(), edges.end());
      edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
      clock = ExplicitEdges{std::move(edges)};
    } else {
      error(t.span, "expected period, edges or free");
      recover();
      return;
    }
    if (!expect(Tok::Semi, "';'")) {
      recover();
      return;
    }
    if (clocks_.count(name.name)) {
      error(name.span, "clock '" + name.name + "' redefined");
      return;
    }
    clocks_.emplace(name.name, clock);
  }

  bool parse_conn(ConnAst& conn) {
    const Token& t = peek();
    if (t.kind == Tok::Ident && t.text == "from") {
      conn.select_span = t.span;
      advance();
      std::vector<NameRef> set;
      if (!parse_source_set(set)) return false;
      conn.selected = false;
      conn.alternatives.push_back(std::move(set));
      return true;
    }
    if (t.kind == Tok::Ident && t.text == "select") {
      conn.select_span = t.span;
      advance();
      conn.selected = true;
      if (!expect_name(conn.control, "control port name")) return false;
      if (!expect(Tok::LBrace, "'{'")) return false;
      for (;;) {
        std::vector<NameRef> set;
        if (!parse_source_set(set)) return false;
        conn.alternatives.push_back(std::move(set));
        if (at(Tok::Comma)) {
          advance();
          continue;
        }
        break;
      }
      if (!expect(Tok::RBrace, "'}'")) return false;
      if (conn.alternatives.size() < 2) {
        error(conn.select_span, "select needs at least two alternatives");
        return false;
      }
      return true;
    }
    error(t.span, "expected from or select");
    return false;
  }

  bool parse_source_set(std::vector<NameRef>& set) {
    if (!expect(Tok::LBrace, "'{'")) return false;
    for (;;) {
      NameRef name;
      if (!expect_name(name, "source name")) return false;
      set.push_back(std::move(name));
      if (at(Tok::Comma)) {
        advance();
        continue;
      }
      break;
    }
    return expect(Tok::RBrace, "'}'");
  }

  void parse_ff() {
    advance();
    FFAst ff;
    if (!expect_name(ff.name, "flip-flop name") || !expect_keyword("clock") ||
        !expect_name(ff.clock, "clock name") || !parse_conn(ff.conn) ||
        !expect(Tok::Semi, "';'")) {
      recover();
      return;
    }
    declare(ff.name);
    ffs_.push_back(std::move(ff));
  }

  void parse_output() {
    SourceSpan span = peek().span;
    advance();
    ConnAst conn;
    if (!parse_conn(conn) || !expect(Tok::Semi, "';'")) {
      recover();
      return;
    }
    if (output_) {
      error(span, "duplicate output declaration");
      return;
    }
    output_ = std::move(conn);
  }

  // ---- name resolution ----------------------------------------------------

  std::optional<Circuit> build(const NameRef& name) {
    Circuit c;
    c.name = name.name;
    for (const auto& p : data_ports_)
      c.data_ports.push_back({p.name, PortKind::Data});
    for (const auto& p : control_ports_)
      c.control_ports.push_back({p.name, PortKind::Control});
    for (const auto& ff : ffs_) {
      FlipFlop out;
      out.name = ff.name.name;
      auto clock = clocks_.find(ff.clock.name);
      if (clock == clocks_.end()) {
        error(ff.clock.span, "unknown clock " + ff.clock.name);
        continue;
      }
      out.clock = clock->second;
      c.ffs.push_back(std::move(out));
    }
    if (!diagnostics_.empty()) return std::nullopt;
    for (std::size_t i = 0; i < ffs_.size(); ++i)
      c.ffs[i].data_input = resolve_conn(c, ffs_[i].conn);
    if (!output_) {
      error(name.span, "circuit has no output declaration");
      return std::nullopt;
    }
    c.output = resolve_conn(c, *output_);
    if (c.data_ports.empty())
      error(name.span, "circuit needs at least one input");
    if (!diagnostics_.empty()) return std::nullopt;
    validate(c);  // internal consistency; parse errors cover user mistakes
    return c;
  }

  Selector resolve_conn(const Circuit& c, const ConnAst& conn) {
    Selector sel;
    if (conn.selected) {
      int idx = c.control_port_index(conn.control.name);
      if (idx < 0) {
        if (c.data_port_index(conn.control.name) >= 0 ||
            c.ff_index(conn.control.name) >= 0)
          error(conn.control.span,
                conn.control.name + " is not a control port");
        else
          error(conn.control.span, "unknown identifier " + conn.control.name);
      } else {
        sel.control = idx;
      }
    }
    for (const auto& alt : conn.alternatives) {
      std::vector<Source> sources;
      for (const NameRef& ref : alt) {
        if (int p = c.data_port_index(ref.name); p >= 0) {
          sources.push_back({SourceKind::DataPort, p});
        } else if (int f = c.ff_index(ref.name); f >= 0) {
          sources.push_back({SourceKind::FF, f});
        } else if (c.control_port_index(ref.name) >= 0) {
          error(ref.span,
                "control port " + ref.name + " cannot be a data source");
        } else {
          error(ref.span, "unknown identifier " + ref.name);
        }
      }
      sel.alternatives.push_back(make_source_set(std::move(sources)));
    }
    return sel;
  }

  // ---- token plumbing -----------------------------------------------------

  const Token& peek() const { return tokens_[pos_]; }
  bool at(Tok kind) const { return peek().kind == kind; }
  void advance() {
    if (pos_ + 1 < tokens_.size()) ++pos_;
  }

  bool expect(Tok kind, const std::string& what) {
    if (at(kind)) {
      advance();
      return true;
    }
    error(peek().span, "expected " + what);
    return false;
  }

  bool expect_keyword(const std::string& kw) {
    if (peek().kind == Tok::Ident && peek().text == kw) {
      advance();
      return true;
    }
    error(peek().span, "expected '" + kw + "'");
    return false;
  }

  bool expect_name(NameRef& out, const std::string& what) {
    const Token& t = peek();
    if (t.kind != Tok::Ident) {
      error(t.span, "expected " + what);
      return false;
    }
    if (!is_valid_identifier(t.text)) {
      error(t.span, "keyword '" + t.text + "' cannot be used as a name");
      return false;
    }
    out = {t.text, t.span};
    advance();
    return true;
  }

  bool expect_int(long long& out, const std::string& what) {
    const Token& t = peek();
    if (t.kind != Tok::Int) {
      error(t.span, "expected " + what);
      return false;
    }
    out = t.value;
    advance();
    return true;
  }

  void declare(const NameRef& name) {
    if (!declared_.insert(name.name).second)
      error(name.span, "duplicate name " + name.name);
  }

  void error(const SourceSpan& span, std::string message) {
    diagnostics_.push_back({span, std::move(message)});
  }

  // Skip to just past the next ';' (or stop before '}'/end) so one mistake
  // yields one diagnostic.
  void recover() {
    while (!at(Tok::End) && !at(Tok::RBrace)) {
      bool semi = at(Tok::Semi);
      advance();
      if (semi) return;
    }
  }

  std::vector<Token> tokens_;
  std::vector<Diagnostic>& diagnostics_;
  std::size_t pos_ = 0;

  std::vector<NameRef> data_ports_, control_ports_;
  std::map<std::string, ClockRef> clocks_;
  std::vector<FFAst> ffs_;
  std::optional<ConnAst> output_;
  std::set<std::string> declared_;
};

std::string source_name(const Circuit& c, const Source& s) {
  return s.kind == SourceKind::DataPort ? c.data_ports[s.index].name
                                        : c.ffs[s.index].name;
}

void emit_source_set(std::ostream& out, const Circuit& c,
                     const SourceSet& set) {
  out << '{';
  bool first = true;
  for (const Source& s : set) {
    if (!first) out << ", ";
    first = false;
    out << source_name(c, s);
  }
  out << '}';
}

void emit_conn(std::ostream& out, const Circuit& c, const Selector& sel) {
  if (!sel.selected()) {
    out << "from ";
    emit_source_set(out, c, sel.alternatives[0]);
    return;
  }
  out << "select " << c.control_ports[*sel.control].name << " { ";
  bool first = true;
  for (const auto& alt : sel.alternatives) {
    if (!first) out << ", ";
    first = false;
    emit_source_set(out, c, alt);
  }
  out << " }";
}

}  // namespace

ParseResult parse(std::string_view text) {
  ParseResult result;
  Lexer lexer(text, result.diagnostics);
  Parser parser(lexer.tokens(), result.diagnostics);
  auto circuit = parser.parse_circuit();
  if (result.diagnostics.empty()) {
    result.circuit = std::move(circuit);
  } else {
    auto& ds = result.diagnostics;
    std::stable_sort(ds.begin(), ds.end(),
                     [](const Diagnostic& a, const Diagnostic& b) {
                       return a.span.offset < b.span.offset;
                     });
    ds.erase(std::unique(ds.begin(), ds.end(),
                         [](const Diagnostic& a, const Diagnostic& b) {
                           return a.span.offset == b.span.offset;
                         }),
             ds.end());
  }
  return result;
}

std::string emit(const Circuit& c) {
  validate(c);
  std::ostringstream out;
  out << "circuit " << c.name << " {\n";
  for (const auto& p : c.data_ports) out << "  input " << p.name << ";\n";
  for (const auto& p : c.control_ports) out << "  control " << p.name << ";\n";
  for (std::size_t i = 0; i < c.ffs.size(); ++i) {
    out << "  clock k" << i << ' ';
    if (const auto* p = std::get_if<Periodic>(&c.ffs[i].clock)) {
      out << "period " << p->period << " offset " << p->offset;
    } else if (const auto* e = std::get_if<ExplicitEdges>(&c.ffs[i].clock)) {
      out << "edges [";
      for (std::size_t k = 0; k < e->edges.size(); ++k)
        out << (k ? ", " : "") << e->edges[k];
      out << ']';
    } else {
      out << "free";
    }
    out << ";\n";
  }
  for (std::size_t i = 0; i < c.ffs.size(); ++i) {
    out << "  ff " << c.ffs[i].name << " clock k" << i << ' ';
    emit_conn(out, c, c.ffs[i].data_input);
    out << ";\n";
  }
  out << "  output ";
  emit_conn(out, c, c.output);
  out << ";\n}\n";
  return out.str();
}

std::string format_diagnostics(const std::vector<Diagnostic>& diagnostics,
                               std::string_view filename) {
  std::ostringstream out;
  for (const auto& d : diagnostics)
    out << filename << ':' << d.span.line << ':' << d.span.column
        << ": error: " << d.message << '\n';
  return out.str();
}

}  // namespace refform
