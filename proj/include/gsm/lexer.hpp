#pragma once

// Tokenizer shared by the model language and the property language.

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gsm/model.hpp"

namespace gsm {

struct Token {
  enum class Kind { Ident, Int, Decimal, String, Punct, End };

  Kind kind = Kind::End;
  std::string text;  // identifier, punctuation, unescaped string or number spelling
  SourcePos pos;

  bool is(std::string_view punct) const { return kind == Kind::Punct && text == punct; }
  bool is_word(std::string_view word) const { return kind == Kind::Ident && text == word; }
};

struct SyntaxError : std::runtime_error {
  SyntaxError(SourcePos p, const std::string& msg) : std::runtime_error(msg), pos(p) {}
  SourcePos pos;
};

/// `#` and `//` start line comments. Throws SyntaxError on a lexical error.
std::vector<Token> tokenize(std::string_view text);

/// Cursor over a token vector with the usual expect/accept helpers.
class TokenStream {
 public:
  explicit TokenStream(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  const Token& peek(std::size_t ahead = 0) const;
  const Token& next();
  bool at_end() const { return peek().kind == Token::Kind::End; }

  bool accept(std::string_view punct);
  bool accept_word(std::string_view word);
  const Token& expect(std::string_view punct);
  const Token& expect_word(std::string_view word);
  const Token& expect_ident(std::string_view what);
  const Token& expect_kind(Token::Kind kind, std::string_view what);

  [[noreturn]] void fail(const std::string& msg) const;

  std::size_t position() const { return pos_; }
  void seek(std::size_t p) { pos_ = p; }

 private:
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

std::string describe(const Token& t);

}  // namespace gsm
