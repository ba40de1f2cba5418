#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fdcc::ini {

/// Malformed input; `what()` carries `source:line: message`.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, int line, const std::string& message);
  int line() const { return line_; }

 private:
  int line_;
};

struct Entry {
  std::string key;
  std::string value;
  int line = 0;
};

struct Section {
  std::string kind;  // text before the first space inside the brackets; empty for the preamble
  std::string name;  // remainder, trimmed
  int line = 0;
  std::vector<Entry> entries;
};

/// Grammar:
///   line    := blank | comment | section | entry
///   comment := ('#' | ';') any
///   section := '[' kind [ws name] ']'
///   entry   := key ws* '=' ws* value [ws '#' comment]
/// Keys are `[A-Za-z0-9_.]+`. Duplicate keys within a section are rejected.
std::vector<Section> parse(const std::string& text, const std::string& source);

std::string read_file(const std::string& path);

std::string trim(const std::string& s);

/// Splits on commas and/or whitespace and parses each token as a double.
std::vector<double> parse_numbers(const std::string& value);

}  // namespace fdcc::ini
