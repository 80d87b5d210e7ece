#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ecpt::code {

enum class TokenKind { Name, Keyword, Number, String, Op, Newline, Indent, Dedent, EndMarker };

struct SourcePosition {
  int line = 1;    // 1-based
  int column = 1;  // 1-based, in bytes

  bool operator==(const SourcePosition&) const = default;
};

struct Token {
  TokenKind kind;
  std::string text;
  SourcePosition pos;
  std::size_t begin = 0;  // byte range in the source
  std::size_t end = 0;
};

struct LexResult {
  std::vector<Token> tokens;
  std::optional<SourcePosition> error;
  std::string message;

  bool ok() const { return !error.has_value(); }
};

bool is_python_keyword(std::string_view word);

/// Python tokenizer with layout tokens. Blank and comment-only lines emit
/// nothing; indentation changes emit INDENT/DEDENT outside brackets; tabs
/// advance to the next multiple of 8 columns. On error the tokens read so
/// far are returned together with the error position.
LexResult lex_python(std::string_view source);

/// Surface tokens for n-gram metrics: identifiers, keywords, numbers,
/// strings and operators, without layout or comments. Never fails; bytes the
/// Python lexer rejects become single-character tokens.
std::vector<std::string> surface_tokens(std::string_view source);

}  // namespace ecpt::code
