#include "fdcc/ini.hpp"

#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace fdcc::ini {

ParseError::ParseError(const std::string& source, int line, const std::string& message)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + message), line_(line) {}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

namespace {

bool valid_key(const std::string& key) {
  if (key.empty()) return false;
  for (char c : key) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.')) return false;
  }
  return true;
}

std::string strip_comment(const std::string& value) {
  for (std::size_t i = 0; i < value.size(); ++i) {
    if (value[i] == '#' && (i == 0 || value[i - 1] == ' ' || value[i - 1] == '\t')) return value.substr(0, i);
  }
  return value;
}

}  // namespace

std::vector<Section> parse(const std::string& text, const std::string& source) {
  std::vector<Section> sections(1);
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(raw);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s[0] == '[') {
      if (s.back() != ']') throw ParseError(source, line, "unterminated section header");
      const std::string inner = trim(s.substr(1, s.size() - 2));
      if (inner.empty()) throw ParseError(source, line, "empty section header");
      Section sec;
      sec.line = line;
      const auto space = inner.find_first_of(" \t");
      sec.kind = inner.substr(0, space);
      sec.name = space == std::string::npos ? "" : trim(inner.substr(space));
      sections.push_back(std::move(sec));
      seen.clear();
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ParseError(source, line, "expected 'key = value'");
    Entry e;
    e.key = trim(s.substr(0, eq));
    e.value = trim(strip_comment(s.substr(eq + 1)));
    e.line = line;
    if (!valid_key(e.key)) throw ParseError(source, line, "invalid key '" + e.key + "'");
    if (!seen.insert(e.key).second) throw ParseError(source, line, "duplicate key '" + e.key + "'");
    sections.back().entries.push_back(std::move(e));
  }
  return sections;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<double> parse_numbers(const std::string& value) {
  std::vector<double> out;
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end != token.c_str() + token.size() || errno == ERANGE) {
      throw std::invalid_argument("'" + token + "' is not a number");
    }
    out.push_back(v);
    token.clear();
  };
  for (char c : value) {
    if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else {
      token.push_back(c);
    }
  }
  flush();
  return out;
}

}  // namespace fdcc::ini
