#include "gsm/lexer.hpp"

#include <array>
#include <cctype>

namespace gsm {

namespace {

constexpr std::array<std::string_view, 20> kPunct = {
    "==>", "->", "..", "==", "!=", "<=", ">=", "&&", "||", "{", "}", "(", ")",
    ",",   ":",  "=",  "<",  ">",  "!",  ";"};

constexpr std::string_view kSingle = "*-[].";

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool digit(char c) { return c >= '0' && c <= '9'; }

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  int line = 1;
  int col = 1;
  std::size_t i = 0;
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
  while (i < text.size()) {
    const char c = text[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance(1);
      continue;
    }
    if (c == '#' || (c == '/' && i + 1 < text.size() && text[i + 1] == '/')) {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    Token tok;
    tok.pos = {line, col};
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < text.size() && ident_char(text[j])) ++j;
      tok.kind = Token::Kind::Ident;
      tok.text = std::string(text.substr(i, j - i));
      advance(j - i);
    } else if (digit(c)) {
      std::size_t j = i;
      while (j < text.size() && digit(text[j])) ++j;
      tok.kind = Token::Kind::Int;
      if (j + 1 < text.size() && text[j] == '.' && digit(text[j + 1])) {
        ++j;
        while (j < text.size() && digit(text[j])) ++j;
        tok.kind = Token::Kind::Decimal;
      }
      if (j < text.size() && ident_start(text[j])) {
        throw SyntaxError(tok.pos, "malformed number '" + std::string(text.substr(i, j - i + 1)) + "'");
      }
      tok.text = std::string(text.substr(i, j - i));
      advance(j - i);
    } else if (c == '"') {
      std::string value;
      std::size_t j = i + 1;
      bool closed = false;
      while (j < text.size()) {
        const char d = text[j];
        if (d == '"') {
          closed = true;
          ++j;
          break;
        }
        if (d == '\n') break;
        if (d == '\\' && j + 1 < text.size()) {
          const char e = text[j + 1];
          if (e == 'n') value += '\n';
          else if (e == 't') value += '\t';
          else if (e == '"' || e == '\\') value += e;
          else throw SyntaxError(tok.pos, std::string("unknown escape '\\") + e + "' in string");
          j += 2;
          continue;
        }
        value += d;
        ++j;
      }
      if (!closed) throw SyntaxError(tok.pos, "unterminated string literal");
      tok.kind = Token::Kind::String;
      tok.text = std::move(value);
      advance(j - i);
    } else {
      std::string_view rest = text.substr(i);
      bool matched = false;
      for (auto p : kPunct) {
        if (rest.substr(0, p.size()) == p) {
          tok.kind = Token::Kind::Punct;
          tok.text = std::string(p);
          advance(p.size());
          matched = true;
          break;
        }
      }
      if (!matched && kSingle.find(c) != std::string_view::npos) {
        tok.kind = Token::Kind::Punct;
        tok.text = std::string(1, c);
        advance(1);
        matched = true;
      }
      if (!matched) {
        throw SyntaxError(tok.pos, std::string("unexpected character '") + c + "'");
      }
    }
    out.push_back(std::move(tok));
  }
  Token end;
  end.kind = Token::Kind::End;
  end.pos = {line, col};
  out.push_back(end);
  return out;
}

std::string describe(const Token& t) {
  switch (t.kind) {
    case Token::Kind::End: return "end of input";
    case Token::Kind::String: return "string \"" + t.text + "\"";
    default: return "'" + t.text + "'";
  }
}

const Token& TokenStream::peek(std::size_t ahead) const {
  const std::size_t p = std::min(pos_ + ahead, tokens_.size() - 1);
  return tokens_[p];
}

const Token& TokenStream::next() {
  const Token& t = tokens_[pos_];
  if (pos_ + 1 < tokens_.size()) ++pos_;
  return t;
}

bool TokenStream::accept(std::string_view punct) {
  if (peek().is(punct)) {
    next();
    return true;
  }
  return false;
}

bool TokenStream::accept_word(std::string_view word) {
  if (peek().is_word(word)) {
    next();
    return true;
  }
  return false;
}

const Token& TokenStream::expect(std::string_view punct) {
  if (!peek().is(punct)) fail("expected '" + std::string(punct) + "' but found " + describe(peek()));
  return next();
}

const Token& TokenStream::expect_word(std::string_view word) {
  if (!peek().is_word(word)) fail("expected '" + std::string(word) + "' but found " + describe(peek()));
  return next();
}

const Token& TokenStream::expect_ident(std::string_view what) {
  if (peek().kind != Token::Kind::Ident) fail("expected " + std::string(what) + " but found " + describe(peek()));
  return next();
}

const Token& TokenStream::expect_kind(Token::Kind kind, std::string_view what) {
  if (peek().kind != kind) fail("expected " + std::string(what) + " but found " + describe(peek()));
  return next();
}

void TokenStream::fail(const std::string& msg) const { throw SyntaxError(peek().pos, msg); }

}  // namespace gsm
