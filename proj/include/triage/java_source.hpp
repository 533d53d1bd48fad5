#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace triage::java {

enum class TokenKind { identifier, keyword, string_literal, char_literal, number, op };

struct Token {
  TokenKind kind;
  std::string text;  // for string/char literals: the raw content between the quotes
  int line;          // 1-based
  int col;           // 1-based, first character
  int end_line;
  int end_col;       // 1-based, last character (inclusive)
};

bool is_keyword(std::string_view word);
bool is_primitive(std::string_view word);

// Tolerant lexer: comments are dropped; unterminated literals run to the end
// of their line. Never throws.
std::vector<Token> tokenize(std::string_view source);

struct MethodDecl {
  std::string name;
  std::string return_type;  // "<init>" for constructors
  int start_line = 0;
  int end_line = 0;
  std::size_t body_begin = 0;  // token range of the body, exclusive of braces
  std::size_t body_end = 0;
  std::vector<std::string> parameters;
};

struct TypeDecl {
  std::string name;  // dotted path for nested types, e.g. "Outer.Inner"
  std::string simple_name;
  int start_line = 0;
  int end_line = 0;
  int parent = -1;  // index into Outline::types
  std::vector<std::string> supertypes;  // direct extends/implements, generics stripped
  std::vector<std::string> fields;
  std::vector<MethodDecl> methods;
};

/// Structural skeleton of one compilation unit.
struct Outline {
  std::string package;
  std::vector<TypeDecl> types;
  std::vector<Token> tokens;

  // Innermost type whose line range contains `line`, or -1.
  int innermost_type(int line) const;
  // Method of types[type_index] containing `line`, or nullptr.
  const MethodDecl* enclosing_method(int type_index, int line) const;
};

Outline parse_outline(std::string_view source);

// Fields referenced inside a method body: own (and enclosing-type) fields as
// "Owner.field", plus qualified constants like "StringUtils.COMMA".
std::vector<std::string> fields_used(const Outline& outline, int type_index,
                                     const MethodDecl& method);

}  // namespace triage::java
