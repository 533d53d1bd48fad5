#include "triage/java_source.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <set>
#include <unordered_set>

namespace triage::java {

namespace {

const std::unordered_set<std::string_view>& keywords() {
  static const std::unordered_set<std::string_view> k{
      "abstract", "assert",     "boolean",  "break",     "byte",       "case",
      "catch",    "char",       "class",    "const",     "continue",   "default",
      "do",       "double",     "else",     "enum",      "extends",    "final",
      "finally",  "float",      "for",      "goto",      "if",         "implements",
      "import",   "instanceof", "int",      "interface", "long",       "native",
      "new",      "package",    "private",  "protected", "public",     "return",
      "short",    "static",     "strictfp", "super",     "switch",     "synchronized",
      "this",     "throw",      "throws",   "transient", "try",        "void",
      "volatile", "while",      "true",     "false",     "null"};
  return k;
}

bool ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$' ||
         static_cast<unsigned char>(c) >= 0x80;
}
bool ident_part(char c) {
  return ident_start(c) || std::isdigit(static_cast<unsigned char>(c));
}

constexpr std::array<std::string_view, 16> kMultiOps{
    "...", "->", "::", "==", "!=", "<=", ">=", "&&", "||", "++", "--", "+=", "-=", "*=", "/=", "%="};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '\n') {
        advance();
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
        continue;
      }
      if (c == '/' && peek(1) == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
        continue;
      }
      if (c == '/' && peek(1) == '*') {
        advance(2);
        while (pos_ < src_.size() && !(src_[pos_] == '*' && peek(1) == '/')) advance();
        if (pos_ < src_.size()) advance(2);
        continue;
      }
      int line = line_, col = col_;
      if (c == '"' && peek(1) == '"' && peek(2) == '"') {
        advance(3);
        std::size_t start = pos_;
        while (pos_ < src_.size() && !(src_[pos_] == '"' && peek(1) == '"' && peek(2) == '"')) {
          if (src_[pos_] == '\\') advance();
          advance();
        }
        std::string text(src_.substr(start, std::min(pos_, src_.size()) - start));
        if (pos_ < src_.size()) advance(3);
        out.push_back(finish(TokenKind::string_literal, std::move(text), line, col));
        continue;
      }
      if (c == '"' || c == '\'') {
        advance();
        std::size_t start = pos_;
        while (pos_ < src_.size() && src_[pos_] != c && src_[pos_] != '\n') {
          if (src_[pos_] == '\\' && pos_ + 1 < src_.size() && src_[pos_ + 1] != '\n') advance();
          advance();
        }
        std::string text(src_.substr(start, pos_ - start));
        if (pos_ < src_.size() && src_[pos_] == c) advance();
        out.push_back(finish(c == '"' ? TokenKind::string_literal : TokenKind::char_literal,
                             std::move(text), line, col));
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c)) ||
          (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
        std::size_t start = pos_;
        while (pos_ < src_.size()) {
          char d = src_[pos_];
          if (std::isalnum(static_cast<unsigned char>(d)) || d == '_' || d == '.') {
            advance();
          } else if ((d == '+' || d == '-') &&
                     (src_[pos_ - 1] == 'e' || src_[pos_ - 1] == 'E' || src_[pos_ - 1] == 'p' ||
                      src_[pos_ - 1] == 'P') &&
                     !(src_[start] == '0' && start + 1 < src_.size() &&
                       (src_[start + 1] == 'x' || src_[start + 1] == 'X') &&
                       (src_[pos_ - 1] == 'e' || src_[pos_ - 1] == 'E'))) {
            advance();
          } else {
            break;
          }
        }
        out.push_back(
            finish(TokenKind::number, std::string(src_.substr(start, pos_ - start)), line, col));
        continue;
      }
      if (ident_start(c)) {
        std::size_t start = pos_;
        while (pos_ < src_.size() && ident_part(src_[pos_])) advance();
        std::string word(src_.substr(start, pos_ - start));
        TokenKind kind = is_keyword(word) ? TokenKind::keyword : TokenKind::identifier;
        out.push_back(finish(kind, std::move(word), line, col));
        continue;
      }
      std::string_view rest = src_.substr(pos_);
      std::size_t len = 1;
      for (auto op : kMultiOps) {
        if (rest.substr(0, op.size()) == op) {
          len = op.size();
          break;
        }
      }
      std::string text(rest.substr(0, len));
      advance(len);
      out.push_back(finish(TokenKind::op, std::move(text), line, col));
    }
    return out;
  }

 private:
  char peek(std::size_t n) const { return pos_ + n < src_.size() ? src_[pos_ + n] : '\0'; }

  void advance(std::size_t n = 1) {
    for (std::size_t i = 0; i < n && pos_ < src_.size(); ++i) {
      last_line_ = line_;
      last_col_ = col_;
      if (src_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
      ++pos_;
    }
  }

  Token finish(TokenKind kind, std::string text, int line, int col) const {
    return Token{kind, std::move(text), line, col, last_line_, last_col_};
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1, col_ = 1;
  int last_line_ = 1, last_col_ = 1;
};

bool is_op(const Token& t, std::string_view s) { return t.kind == TokenKind::op && t.text == s; }
bool is_kw(const Token& t, std::string_view s) {
  return t.kind == TokenKind::keyword && t.text == s;
}

const std::set<std::string_view>& modifiers() {
  static const std::set<std::string_view> m{"public",   "private",   "protected", "static",
                                            "final",    "abstract",  "native",    "synchronized",
                                            "transient", "volatile", "strictfp",  "default"};
  return m;
}

class OutlineParser {
 public:
  explicit OutlineParser(Outline& out) : out_(out), toks_(out.tokens) {}

  void run() {
    std::size_t i = 0;
    while (i < toks_.size()) {
      const Token& t = toks_[i];
      if (is_kw(t, "package")) {
        std::string pkg;
        ++i;
        while (i < toks_.size() && !is_op(toks_[i], ";")) pkg += toks_[i++].text;
        out_.package = pkg;
        ++i;
      } else if (is_kw(t, "import")) {
        while (i < toks_.size() && !is_op(toks_[i], ";")) ++i;
        ++i;
      } else if (std::size_t after = type_keyword_at(i); after != 0) {
        i = parse_type(i, after, -1);
      } else {
        ++i;
      }
    }
  }

 private:
  // If a type declaration keyword starts at i (after modifiers/annotations
  // were consumed), returns the index of the type name; else 0.
  std::size_t type_keyword_at(std::size_t i) const {
    if (i >= toks_.size()) return 0;
    const Token& t = toks_[i];
    if (is_kw(t, "class") || is_kw(t, "interface") || is_kw(t, "enum")) return i + 1;
    if (is_op(t, "@") && i + 1 < toks_.size() && is_kw(toks_[i + 1], "interface")) return i + 2;
    if (t.kind == TokenKind::identifier && t.text == "record" && i + 2 < toks_.size() &&
        toks_[i + 1].kind == TokenKind::identifier &&
        (is_op(toks_[i + 2], "(") || is_op(toks_[i + 2], "<"))) {
      return i + 1;
    }
    return 0;
  }

  std::size_t match(std::size_t open, std::string_view o, std::string_view c) const {
    int depth = 0;
    for (std::size_t j = open; j < toks_.size(); ++j) {
      if (is_op(toks_[j], o)) ++depth;
      if (is_op(toks_[j], c) && --depth == 0) return j;
    }
    return toks_.size();
  }

  std::size_t skip_angles(std::size_t i) const {
    if (i < toks_.size() && is_op(toks_[i], "<")) return match(i, "<", ">") + 1;
    return i;
  }

  std::size_t skip_annotation(std::size_t i) const {
    // at '@'
    ++i;
    while (i < toks_.size() && (toks_[i].kind == TokenKind::identifier || is_op(toks_[i], "."))) ++i;
    if (i < toks_.size() && is_op(toks_[i], "(")) i = match(i, "(", ")") + 1;
    return i;
  }

  // Parses "A<X>, pkg.B" style lists until one of the stop tokens.
  std::size_t parse_type_list(std::size_t i, std::vector<std::string>& out) const {
    std::string current;
    while (i < toks_.size()) {
      const Token& t = toks_[i];
      if (is_op(t, "{") || is_kw(t, "implements") || is_kw(t, "extends") ||
          (t.kind == TokenKind::identifier && t.text == "permits")) {
        break;
      }
      if (is_op(t, "<")) {
        i = match(i, "<", ">") + 1;
        continue;
      }
      if (is_op(t, ",")) {
        if (!current.empty()) out.push_back(current);
        current.clear();
      } else if (is_op(t, "@")) {
        i = skip_annotation(i);
        continue;
      } else {
        current += t.text;
      }
      ++i;
    }
    if (!current.empty()) out.push_back(current);
    return i;
  }

  std::size_t parse_type(std::size_t kw_index, std::size_t name_index, int parent) {
    if (name_index >= toks_.size()) return toks_.size();
    bool is_enum = is_kw(toks_[kw_index], "enum");
    TypeDecl decl;
    decl.simple_name = toks_[name_index].text;
    decl.name = parent >= 0 ? out_.types[parent].name + "." + decl.simple_name : decl.simple_name;
    decl.parent = parent;
    decl.start_line = decl_start_line_ > 0 ? decl_start_line_ : toks_[kw_index].line;
    decl_start_line_ = 0;

    std::size_t i = skip_angles(name_index + 1);
    if (i < toks_.size() && is_op(toks_[i], "(")) i = match(i, "(", ")") + 1;  // record header
    while (i < toks_.size() && !is_op(toks_[i], "{")) {
      if (is_kw(toks_[i], "extends") || is_kw(toks_[i], "implements")) {
        i = parse_type_list(i + 1, decl.supertypes);
      } else if (toks_[i].kind == TokenKind::identifier && toks_[i].text == "permits") {
        std::vector<std::string> ignored;
        i = parse_type_list(i + 1, ignored);
      } else if (is_op(toks_[i], ";")) {
        return i + 1;
      } else {
        ++i;
      }
    }
    if (i >= toks_.size()) return i;
    std::size_t open = i;
    std::size_t close = match(open, "{", "}");
    decl.end_line = close < toks_.size() ? toks_[close].line : toks_.back().end_line;

    int index = static_cast<int>(out_.types.size());
    out_.types.push_back(std::move(decl));
    parse_body(open + 1, close, index, is_enum);
    return close + 1;
  }

  void parse_body(std::size_t i, std::size_t close, int type_index, bool is_enum) {
    if (is_enum) {
      // Enum constants run until the first top-level ';'.
      int depth = 0;
      while (i < close) {
        const Token& t = toks_[i];
        if (is_op(t, "(") || is_op(t, "{")) ++depth;
        if (is_op(t, ")") || is_op(t, "}")) --depth;
        ++i;
        if (depth == 0 && is_op(t, ";")) break;
      }
    }
    while (i < close) {
      const Token& t = toks_[i];
      if (is_op(t, ";")) {
        ++i;
        continue;
      }
      if (is_op(t, "{")) {  // initializer block
        i = match(i, "{", "}") + 1;
        decl_start_line_ = 0;
        continue;
      }
      if (is_op(t, "@") && !(i + 1 < close && is_kw(toks_[i + 1], "interface"))) {
        if (decl_start_line_ == 0) decl_start_line_ = t.line;
        i = skip_annotation(i);
        continue;
      }
      if ((t.kind == TokenKind::keyword && modifiers().contains(t.text)) ||
          (t.kind == TokenKind::identifier && (t.text == "sealed" || t.text == "non")) ||
          (is_op(t, "-") && i + 1 < close && toks_[i + 1].text == "sealed")) {
        if (decl_start_line_ == 0) decl_start_line_ = t.line;
        ++i;
        continue;
      }
      if (std::size_t name = type_keyword_at(i); name != 0) {
        i = parse_type(i, name, type_index);
        continue;
      }
      i = parse_member(i, close, type_index);
    }
  }

  std::size_t parse_member(std::size_t i, std::size_t close, int type_index) {
    int start_line = decl_start_line_ > 0 ? decl_start_line_ : toks_[i].line;
    decl_start_line_ = 0;
    std::size_t begin = skip_angles(i);  // generic method type parameters
    // Find the first '(' / '=' / ';' / ',' outside angle brackets.
    std::size_t j = begin;
    int angle = 0;
    while (j < close) {
      const Token& t = toks_[j];
      if (is_op(t, "<")) ++angle;
      else if (is_op(t, ">")) --angle;
      else if (angle <= 0 && (is_op(t, "(") || is_op(t, "=") || is_op(t, ";") || is_op(t, ",") ||
                              is_op(t, "{")))
        break;
      ++j;
    }
    if (j >= close) return close;
    TypeDecl& type = out_.types[type_index];

    if (is_op(toks_[j], "(") && j > begin && toks_[j - 1].kind == TokenKind::identifier) {
      MethodDecl m;
      m.name = toks_[j - 1].text;
      m.return_type = join(begin, j - 1);
      if (m.return_type.empty()) m.return_type = "<init>";
      m.start_line = start_line;
      std::size_t params_end = match(j, "(", ")");
      m.parameters = parameter_names(j + 1, params_end);
      std::size_t k = params_end + 1;
      while (k < close && !is_op(toks_[k], "{") && !is_op(toks_[k], ";")) ++k;
      if (k < close && is_op(toks_[k], "{")) {
        std::size_t body_close = match(k, "{", "}");
        m.body_begin = k + 1;
        m.body_end = body_close;
        m.end_line = body_close < toks_.size() ? toks_[body_close].line : toks_.back().line;
        type.methods.push_back(std::move(m));
        return body_close + 1;
      }
      m.end_line = k < toks_.size() ? toks_[k].line : start_line;
      m.body_begin = m.body_end = k;
      type.methods.push_back(std::move(m));
      return k + 1;
    }

    if (is_op(toks_[j], "{")) return match(j, "{", "}") + 1;

    // Field declaration: one or more declarators.
    std::size_t k = j;
    while (true) {
      std::size_t name = k;
      while (name > begin && is_op(toks_[name - 1], "]")) name -= 2;  // int x[]
      if (name > begin && toks_[name - 1].kind == TokenKind::identifier) {
        type.fields.push_back(toks_[name - 1].text);
      }
      if (k >= close || is_op(toks_[k], ";")) break;
      if (is_op(toks_[k], "=")) {
        int depth = 0;
        while (k < close) {
          const Token& t = toks_[k];
          if (is_op(t, "(") || is_op(t, "{") || is_op(t, "[")) ++depth;
          if (is_op(t, ")") || is_op(t, "}") || is_op(t, "]")) --depth;
          if (depth == 0 && (is_op(t, ",") || is_op(t, ";"))) break;
          ++k;
        }
        if (k >= close || is_op(toks_[k], ";")) break;
      }
      // at ',': next declarator name follows
      begin = k + 1;
      k = begin;
      while (k < close && !is_op(toks_[k], "=") && !is_op(toks_[k], ",") && !is_op(toks_[k], ";")) ++k;
    }
    return k + 1;
  }

  std::vector<std::string> parameter_names(std::size_t begin, std::size_t end) const {
    std::vector<std::string> names;
    int angle = 0;
    std::size_t last_ident = end;
    for (std::size_t k = begin; k < end; ++k) {
      const Token& t = toks_[k];
      if (is_op(t, "<")) ++angle;
      if (is_op(t, ">")) --angle;
      if (angle == 0 && t.kind == TokenKind::identifier) last_ident = k;
      if (angle == 0 && is_op(t, ",")) {
        if (last_ident < end) names.push_back(toks_[last_ident].text);
        last_ident = end;
      }
    }
    if (last_ident < end) names.push_back(toks_[last_ident].text);
    return names;
  }

  std::string join(std::size_t begin, std::size_t end) const {
    std::string out;
    for (std::size_t k = begin; k < end; ++k) {
      const Token& t = toks_[k];
      if (is_op(t, "@")) {
        k = skip_annotation(k) - 1;
        continue;
      }
      if (t.kind == TokenKind::keyword && modifiers().contains(t.text)) continue;
      out += t.text;
    }
    return out;
  }

  Outline& out_;
  const std::vector<Token>& toks_;
  int decl_start_line_ = 0;
};

bool is_constant_name(std::string_view s) {
  if (s.empty() || !std::isupper(static_cast<unsigned char>(s[0]))) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isupper(static_cast<unsigned char>(c)) || std::isdigit(static_cast<unsigned char>(c)) ||
           c == '_';
  });
}

}  // namespace

bool is_keyword(std::string_view word) { return keywords().contains(word); }

bool is_primitive(std::string_view word) {
  static const std::set<std::string_view> p{"boolean", "byte",  "char", "short", "int",
                                            "long",    "float", "double", "void"};
  return p.contains(word);
}

std::vector<Token> tokenize(std::string_view source) { return Lexer(source).run(); }

Outline parse_outline(std::string_view source) {
  Outline out;
  out.tokens = tokenize(source);
  OutlineParser(out).run();
  return out;
}

int Outline::innermost_type(int line) const {
  int best = -1;
  for (int i = 0; i < static_cast<int>(types.size()); ++i) {
    const auto& t = types[i];
    if (line < t.start_line || line > t.end_line) continue;
    if (best < 0 || (t.end_line - t.start_line) <= (types[best].end_line - types[best].start_line)) {
      best = i;
    }
  }
  return best;
}

const MethodDecl* Outline::enclosing_method(int type_index, int line) const {
  if (type_index < 0) return nullptr;
  for (const auto& m : types[type_index].methods) {
    if (line >= m.start_line && line <= m.end_line) return &m;
  }
  return nullptr;
}

std::vector<std::string> fields_used(const Outline& outline, int type_index,
                                     const MethodDecl& method) {
  const auto& toks = outline.tokens;
  std::set<std::string> out;

  // Own fields, searching outward through enclosing types.
  std::vector<std::pair<std::string, std::string>> visible;  // field -> owner
  for (int t = type_index; t >= 0; t = outline.types[t].parent) {
    for (const auto& f : outline.types[t].fields) {
      visible.emplace_back(f, outline.types[t].simple_name);
    }
  }

  // Local names shadow fields unless accessed through `this.`.
  std::set<std::string> locals(method.parameters.begin(), method.parameters.end());
  for (std::size_t k = method.body_begin; k + 1 < method.body_end; ++k) {
    const Token& a = toks[k];
    const Token& b = toks[k + 1];
    bool type_like = a.kind == TokenKind::identifier || is_primitive(a.text) || is_op(a, ">") ||
                     is_op(a, "]");
    if (type_like && b.kind == TokenKind::identifier && k + 2 < method.body_end) {
      const Token& c = toks[k + 2];
      if (is_op(c, "=") || is_op(c, ";") || is_op(c, ":") || is_op(c, ",")) locals.insert(b.text);
    }
  }

  for (std::size_t k = method.body_begin; k < method.body_end; ++k) {
    const Token& t = toks[k];
    if (t.kind != TokenKind::identifier) continue;
    bool followed_by_call = k + 1 < method.body_end && is_op(toks[k + 1], "(");
    bool after_dot = k > method.body_begin && is_op(toks[k - 1], ".");
    bool via_this = after_dot && k >= 2 && is_kw(toks[k - 2], "this");

    if (!followed_by_call && (!after_dot || via_this)) {
      if (via_this || !locals.contains(t.text)) {
        for (const auto& [field, owner] : visible) {
          if (field == t.text) {
            out.insert(owner + "." + field);
            break;
          }
        }
      }
    }

    // Qualified constant: Owner.CONSTANT
    if (k + 2 < method.body_end && is_op(toks[k + 1], ".") &&
        toks[k + 2].kind == TokenKind::identifier && is_constant_name(toks[k + 2].text) &&
        std::isupper(static_cast<unsigned char>(t.text[0])) && !is_constant_name(t.text) &&
        !(k + 3 < method.body_end && is_op(toks[k + 3], "("))) {
      out.insert(t.text + "." + toks[k + 2].text);
    }
  }
  return {out.begin(), out.end()};
}

}  // namespace triage::java
