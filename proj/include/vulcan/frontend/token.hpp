#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "vulcan/error.hpp"

namespace vulcan::frontend {

enum class TokenKind { Identifier, Keyword, Operator, IntLiteral, BoolLiteral, Punct };

std::string_view to_string(TokenKind kind);

struct Token {
  TokenKind kind;
  std::string text;
  int line;    // 1-indexed
  int column;  // 1-indexed, in bytes
};

bool operator==(const Token& a, const Token& b);

class LexError : public Error {
 public:
  LexError(int line, int column, const std::string& message);
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

/// Splits MiniSol source into tokens. `//` comments and whitespace are dropped.
std::vector<Token> tokenize(std::string_view source);

bool is_keyword(std::string_view word);

}  // namespace vulcan::frontend
