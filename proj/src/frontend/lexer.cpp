#include <array>
#include <cctype>

#include "vulcan/frontend/source.hpp"
#include "vulcan/frontend/token.hpp"

namespace vulcan::frontend {

namespace {

constexpr std::array<std::string_view, 6> kKeywords = {"func", "var", "if", "else", "while", "return"};

// Longest match first.
constexpr std::array<std::string_view, 15> kOperators = {"<=", ">=", "==", "!=", "&&", "||", "+", "-",
                                                          "*",  "/",  "%",  "<",  ">",  "!",  "="};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0 || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_'; }

}  // namespace

std::string_view to_string(TokenKind kind) {
  switch (kind) {
    case TokenKind::Identifier: return "Identifier";
    case TokenKind::Keyword: return "Keyword";
    case TokenKind::Operator: return "Operator";
    case TokenKind::IntLiteral: return "IntLiteral";
    case TokenKind::BoolLiteral: return "BoolLiteral";
    case TokenKind::Punct: return "Punct";
  }
  return "?";
}

bool operator==(const Token& a, const Token& b) {
  return a.kind == b.kind && a.text == b.text && a.line == b.line && a.column == b.column;
}

LexError::LexError(int line, int column, const std::string& message)
    : Error(ErrorCategory::Data,
            "lex error at " + std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

bool is_keyword(std::string_view word) {
  for (auto k : kKeywords) {
    if (k == word) return true;
  }
  return false;
}

std::vector<Token> tokenize(std::string_view source) {
  std::vector<Token> tokens;
  int line = 1;
  int column = 1;
  std::size_t i = 0;
  const std::size_t n = source.size();

  auto advance = [&](std::size_t count) {
    i += count;
    column += static_cast<int>(count);
  };

  while (i < n) {
    const char c = source[i];
    if (c == '\n') {
      ++i;
      ++line;
      column = 1;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r') {
      advance(1);
      continue;
    }
    if (c == '/' && i + 1 < n && source[i + 1] == '/') {
      while (i < n && source[i] != '\n') advance(1);
      continue;
    }
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < n && ident_char(source[j])) ++j;
      std::string word(source.substr(i, j - i));
      TokenKind kind = TokenKind::Identifier;
      if (word == "true" || word == "false") {
        kind = TokenKind::BoolLiteral;
      } else if (is_keyword(word)) {
        kind = TokenKind::Keyword;
      }
      tokens.push_back({kind, std::move(word), line, column});
      advance(j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) != 0) {
      std::size_t j = i;
      while (j < n && std::isdigit(static_cast<unsigned char>(source[j])) != 0) ++j;
      if (j < n && ident_char(source[j])) {
        throw LexError(line, column + static_cast<int>(j - i), "malformed integer literal");
      }
      tokens.push_back({TokenKind::IntLiteral, std::string(source.substr(i, j - i)), line, column});
      advance(j - i);
      continue;
    }
    if (c == '(' || c == ')' || c == '{' || c == '}' || c == ',') {
      tokens.push_back({TokenKind::Punct, std::string(1, c), line, column});
      advance(1);
      continue;
    }
    bool matched = false;
    for (auto op : kOperators) {
      if (source.substr(i, op.size()) == op) {
        tokens.push_back({TokenKind::Operator, std::string(op), line, column});
        advance(op.size());
        matched = true;
        break;
      }
    }
    if (matched) continue;
    // '&' and '|' alone fall through to here as well.
    throw LexError(line, column, std::string("unexpected character '") + c + "'");
  }
  return tokens;
}

SourceProgram SourceProgram::from_text(std::string id, std::string source) {
  SourceProgram p;
  p.id = std::move(id);
  std::size_t start = 0;
  while (true) {
    const auto nl = source.find('\n', start);
    if (nl == std::string::npos) {
      p.lines.push_back(source.substr(start));
      break;
    }
    p.lines.push_back(source.substr(start, nl - start));
    start = nl + 1;
  }
  p.source = std::move(source);
  return p;
}

bool operator==(const SourceProgram& a, const SourceProgram& b) {
  return a.id == b.id && a.source == b.source && a.lines == b.lines;
}

}  // namespace vulcan::frontend
