#include "ecpt/code_lexer.hpp"

#include <algorithm>
#include <array>

namespace ecpt::code {

namespace {

constexpr std::array<std::string_view, 35> kKeywords = {
    "False", "None",   "True",    "and",      "as",       "assert", "async", "await", "break",
    "class", "continue", "def",   "del",      "elif",     "else",   "except", "finally", "for",
    "from",  "global", "if",      "import",   "in",       "is",     "lambda", "nonlocal", "not",
    "or",    "pass",   "raise",   "return",   "try",      "while",  "with",  "yield"};

// Longest first.
constexpr std::array<std::string_view, 48> kOperators = {
    "**=", "//=", ">>=", "<<=", "...", "->", ":=", "**", "//", "<<", ">>", "<=",
    ">=",  "==",  "!=",  "+=",  "-=",  "*=", "/=", "%=", "&=", "|=", "^=", "@=",
    "+",   "-",   "*",   "/",   "%",   "@",  "&",  "|",  "^",  "~",  "<",  ">",
    "(",   ")",   "[",   "]",   "{",   "}",  ",",  ":",  ".",  ";",  "=",  "!"};

bool is_ident_start(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c >= 0x80;
}
bool is_ident_char(unsigned char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }
bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  LexResult run() {
    indents_.push_back(0);
    while (!failed() && pos_ < src_.size()) {
      if (at_line_start_ && depth_ == 0) {
        if (!handle_indentation()) continue;
      }
      if (failed() || pos_ >= src_.size()) break;
      scan_token();
    }
    if (!failed()) {
      if (depth_ > 0) {
        fail("unclosed bracket at end of input");
      } else {
        if (!out_.tokens.empty() && out_.tokens.back().kind != TokenKind::Newline &&
            out_.tokens.back().kind != TokenKind::Dedent &&
            out_.tokens.back().kind != TokenKind::Indent) {
          emit(TokenKind::Newline, "", pos_, pos_);
        }
        while (indents_.size() > 1) {
          indents_.pop_back();
          emit(TokenKind::Dedent, "", pos_, pos_);
        }
        emit(TokenKind::EndMarker, "", pos_, pos_);
      }
    }
    return std::move(out_);
  }

 private:
  bool failed() const { return out_.error.has_value(); }

  void fail(std::string msg) {
    if (!failed()) {
      out_.error = here();
      out_.message = std::move(msg);
    }
  }

  SourcePosition here() const {
    return {line_, static_cast<int>(pos_ - line_begin_) + 1};
  }

  void emit(TokenKind kind, std::string text, std::size_t begin, std::size_t end) {
    Token t{kind, std::move(text), {}, begin, end};
    t.pos = {line_, static_cast<int>(begin >= line_begin_ ? begin - line_begin_ : 0) + 1};
    out_.tokens.push_back(std::move(t));
  }

  void newline_at(std::size_t nl) {
    pos_ = nl + 1;
    ++line_;
    line_begin_ = pos_;
  }

  // Returns false when the line was blank (already consumed).
  bool handle_indentation() {
    int width = 0;
    std::size_t p = pos_;
    while (p < src_.size() && (src_[p] == ' ' || src_[p] == '\t' || src_[p] == '\f')) {
      if (src_[p] == ' ') ++width;
      else if (src_[p] == '\t') width = (width / 8 + 1) * 8;
      ++p;
    }
    if (p >= src_.size()) {
      pos_ = p;
      return false;
    }
    if (src_[p] == '#' || src_[p] == '\n' || src_[p] == '\r') {
      while (p < src_.size() && src_[p] != '\n') ++p;
      if (p < src_.size()) newline_at(p);
      else pos_ = p;
      return false;
    }
    if (src_[p] == '\\' && p + 1 < src_.size() && src_[p + 1] == '\n') {
      fail("line continuation at start of line");
      return false;
    }
    pos_ = p;
    at_line_start_ = false;
    if (width > indents_.back()) {
      indents_.push_back(width);
      emit(TokenKind::Indent, "", pos_, pos_);
    } else {
      while (width < indents_.back()) {
        indents_.pop_back();
        emit(TokenKind::Dedent, "", pos_, pos_);
      }
      if (width != indents_.back()) fail("unindent does not match any outer indentation level");
    }
    return true;
  }

  void scan_token() {
    const char c = src_[pos_];
    if (c == ' ' || c == '\t' || c == '\f' || c == '\r') {
      ++pos_;
      return;
    }
    if (c == '#') {
      while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
      return;
    }
    if (c == '\\') {
      std::size_t p = pos_ + 1;
      if (p < src_.size() && src_[p] == '\r') ++p;
      if (p < src_.size() && src_[p] == '\n') {
        newline_at(p);
        return;
      }
      fail("unexpected character after line continuation");
      return;
    }
    if (c == '\n') {
      if (depth_ == 0) {
        emit(TokenKind::Newline, "\n", pos_, pos_ + 1);
        at_line_start_ = true;
      }
      newline_at(pos_);
      return;
    }
    const auto uc = static_cast<unsigned char>(c);
    if (is_ident_start(uc)) {
      std::size_t p = pos_;
      while (p < src_.size() && is_ident_char(static_cast<unsigned char>(src_[p]))) ++p;
      const auto word = src_.substr(pos_, p - pos_);
      if (p < src_.size() && (src_[p] == '\'' || src_[p] == '"') && is_string_prefix(word)) {
        scan_string(pos_, p);
        return;
      }
      emit(is_python_keyword(word) ? TokenKind::Keyword : TokenKind::Name, std::string(word), pos_,
           p);
      pos_ = p;
      return;
    }
    if (is_digit(uc) || (c == '.' && pos_ + 1 < src_.size() &&
                         is_digit(static_cast<unsigned char>(src_[pos_ + 1])))) {
      scan_number();
      return;
    }
    if (c == '\'' || c == '"') {
      scan_string(pos_, pos_);
      return;
    }
    for (auto op : kOperators) {
      if (src_.substr(pos_, op.size()) == op) {
        if (op == "!") break;
        if (op == "(" || op == "[" || op == "{") ++depth_;
        if (op == ")" || op == "]" || op == "}") {
          if (depth_ == 0) {
            fail("unmatched '" + std::string(op) + "'");
            return;
          }
          --depth_;
        }
        emit(TokenKind::Op, std::string(op), pos_, pos_ + op.size());
        pos_ += op.size();
        return;
      }
    }
    fail("invalid character '" + std::string(1, c) + "'");
  }

  static bool is_string_prefix(std::string_view w) {
    if (w.size() > 2) return false;
    std::string lower(w);
    for (auto& ch : lower) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return lower == "r" || lower == "b" || lower == "u" || lower == "f" || lower == "rb" ||
           lower == "br" || lower == "fr" || lower == "rf";
  }

  void scan_string(std::size_t start, std::size_t quote_pos) {
    const char q = src_[quote_pos];
    const bool triple = src_.substr(quote_pos, 3) == std::string(3, q);
    std::size_t p = quote_pos + (triple ? 3 : 1);
    const int start_line = line_;
    const std::size_t start_line_begin = line_begin_;
    for (;;) {
      if (p >= src_.size()) {
        fail("unterminated string literal");
        return;
      }
      const char ch = src_[p];
      if (ch == '\\') {
        if (p + 1 < src_.size() && src_[p + 1] == '\n') {
          ++line_;
          line_begin_ = p + 2;
        }
        p += 2;
        continue;
      }
      if (ch == '\n') {
        if (!triple) {
          fail("unterminated string literal");
          return;
        }
        ++line_;
        line_begin_ = p + 1;
        ++p;
        continue;
      }
      if (ch == q) {
        if (!triple) {
          ++p;
          break;
        }
        if (src_.substr(p, 3) == std::string(3, q)) {
          p += 3;
          break;
        }
      }
      ++p;
    }
    Token t{TokenKind::String, std::string(src_.substr(start, p - start)), {}, start, p};
    t.pos = {start_line, static_cast<int>(start - start_line_begin) + 1};
    out_.tokens.push_back(std::move(t));
    pos_ = p;
  }

  void scan_number() {
    std::size_t p = pos_;
    auto digit_run = [&](auto pred) {
      while (p < src_.size() && (pred(static_cast<unsigned char>(src_[p])) || src_[p] == '_')) ++p;
    };
    if (src_[p] == '0' && p + 1 < src_.size() &&
        std::string_view("xXoObB").find(src_[p + 1]) != std::string_view::npos) {
      p += 2;
      digit_run([](unsigned char ch) { return std::isxdigit(ch) != 0; });
    } else {
      digit_run(is_digit);
      if (p < src_.size() && src_[p] == '.') {
        ++p;
        digit_run(is_digit);
      }
      if (p < src_.size() && (src_[p] == 'e' || src_[p] == 'E')) {
        std::size_t q = p + 1;
        if (q < src_.size() && (src_[q] == '+' || src_[q] == '-')) ++q;
        if (q < src_.size() && is_digit(static_cast<unsigned char>(src_[q]))) {
          p = q;
          digit_run(is_digit);
        }
      }
      if (p < src_.size() && (src_[p] == 'j' || src_[p] == 'J')) ++p;
    }
    if (p < src_.size() && is_ident_start(static_cast<unsigned char>(src_[p]))) {
      pos_ = p;
      fail("invalid number literal");
      return;
    }
    emit(TokenKind::Number, std::string(src_.substr(pos_, p - pos_)), pos_, p);
    pos_ = p;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_begin_ = 0;
  int line_ = 1;
  int depth_ = 0;
  bool at_line_start_ = true;
  std::vector<int> indents_;
  LexResult out_;
};

}  // namespace

bool is_python_keyword(std::string_view word) {
  return std::find(kKeywords.begin(), kKeywords.end(), word) != kKeywords.end();
}

LexResult lex_python(std::string_view source) { return Lexer(source).run(); }

std::vector<std::string> surface_tokens(std::string_view source) {
  std::vector<std::string> out;
  std::size_t start = 0;
  // Lex what we can; on error emit the offending byte and resume after it.
  while (start < source.size()) {
    const auto rest = source.substr(start);
    LexResult r = lex_python(rest);
    for (const auto& t : r.tokens) {
      if (t.kind == TokenKind::Name || t.kind == TokenKind::Keyword ||
          t.kind == TokenKind::Number || t.kind == TokenKind::String || t.kind == TokenKind::Op) {
        out.push_back(t.text);
      }
    }
    if (r.ok()) break;
    // Resume at the start of the line following the error, emitting the
    // remainder of the failing line as whitespace-separated chunks.
    std::size_t line_start = 0;
    for (int l = 1; l < r.error->line && line_start < rest.size(); ++l) {
      const auto nl = rest.find('\n', line_start);
      if (nl == std::string_view::npos) {
        line_start = rest.size();
        break;
      }
      line_start = nl + 1;
    }
    std::size_t err = std::min(rest.size(), line_start + static_cast<std::size_t>(r.error->column - 1));
    if (!r.tokens.empty()) {
      // Drop tokens at or after the error offset that were already emitted.
      while (!out.empty() && !r.tokens.empty() && r.tokens.back().begin >= err) {
        const auto& t = r.tokens.back();
        if (t.kind == TokenKind::Name || t.kind == TokenKind::Keyword ||
            t.kind == TokenKind::Number || t.kind == TokenKind::String ||
            t.kind == TokenKind::Op) {
          out.pop_back();
        }
        r.tokens.pop_back();
      }
    }
    auto line_end = rest.find('\n', err);
    if (line_end == std::string_view::npos) line_end = rest.size();
    std::size_t p = err;
    while (p < line_end) {
      while (p < line_end && (rest[p] == ' ' || rest[p] == '\t' || rest[p] == '\r')) ++p;
      std::size_t q = p;
      while (q < line_end && rest[q] != ' ' && rest[q] != '\t' && rest[q] != '\r') ++q;
      if (q > p) out.emplace_back(rest.substr(p, q - p));
      p = q;
    }
    start += line_end + 1;
  }
  return out;
}

}  // namespace ecpt::code
