#include "mergenas/dsl.hpp"

#include <cctype>
#include <sstream>

namespace mergenas {

namespace {

// Line-oriented tokenizer. Bare names are [A-Za-z0-9_-]+; anything else
// (spaces, dots, brackets, commas) must be double-quoted.
struct Cursor {
  const std::string& s;
  int line;
  size_t pos = 0;

  void skip_ws() {
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
  }
  bool done() {
    skip_ws();
    return pos >= s.size() || s[pos] == '#';
  }
  int col() const { return static_cast<int>(pos) + 1; }

  [[noreturn]] void fail(const std::string& msg) { throw parse_error(msg, line, col()); }

  char peek() {
    skip_ws();
    if (pos >= s.size()) fail("unexpected end of line");
    return s[pos];
  }

  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos;
  }

  bool accept(char c) {
    if (!done() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  static bool bare_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  }

  std::string name() {
    skip_ws();
    if (pos >= s.size()) fail("expected a name");
    if (s[pos] == '"') {
      ++pos;
      std::string out;
      while (pos < s.size() && s[pos] != '"') {
        if (s[pos] == '\\' && pos + 1 < s.size()) ++pos;
        out += s[pos++];
      }
      if (pos >= s.size()) fail("unterminated quoted name");
      ++pos;
      if (out.empty()) fail("empty quoted name");
      return out;
    }
    std::string out;
    while (pos < s.size() && bare_char(s[pos])) out += s[pos++];
    if (out.empty()) fail("expected a name");
    return out;
  }

  std::string keyword() {
    skip_ws();
    std::string out;
    while (pos < s.size() && std::isalpha(static_cast<unsigned char>(s[pos]))) out += s[pos++];
    return out;
  }

  std::vector<std::string> name_list(char close) {
    std::vector<std::string> out;
    out.push_back(name());
    while (accept(',')) out.push_back(name());
    expect(close);
    return out;
  }
};

}  // namespace

SpaceDocument parse_space_document(const std::string& text) {
  SpaceDocument doc;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    Cursor c{raw, line_no};
    if (c.done()) continue;
    const std::string kw = c.keyword();
    if (kw == "state") {
      StateDef sd;
      sd.name = c.name();
      if (sd.name == kStartState || sd.name == kTerminalState)
        c.fail("state name '" + sd.name + "' is reserved");
      c.expect('{');
      sd.actions = c.name_list('}');
      doc.states.push_back(std::move(sd));
    } else if (kw == "space") {
      SearchSpaceDef ss;
      ss.id = c.name();
      c.expect('=');
      c.expect('[');
      ss.chain = c.name_list(']');
      doc.spaces.push_back(std::move(ss));
    } else if (kw == "restrict") {
      const std::string space_id = c.name();
      c.expect('.');
      const std::string state = c.name();
      if (c.keyword() != "to") c.fail("expected 'to'");
      c.expect('{');
      auto actions = c.name_list('}');
      bool found = false;
      for (SearchSpaceDef& ss : doc.spaces) {
        if (ss.id == space_id) {
          ss.allowed[state] = actions;
          found = true;
        }
      }
      if (!found) c.fail("restrict names unknown space '" + space_id + "'");
    } else if (kw == "pair") {
      PairKey p;
      p.space = c.name();
      p.task = c.name();
      doc.pairs.pairs.push_back(std::move(p));
    } else {
      c.fail(kw.empty() ? "expected a declaration" : "unknown keyword '" + kw + "'");
    }
    if (!c.done()) c.fail("trailing input");
  }

  // Reference validation beyond what merge() checks, so errors carry positions
  // as far as possible; cross-checks without positions are left to merge().
  return doc;
}

SearchSpaceDef define_space(const std::string& text) {
  SpaceDocument doc = parse_space_document(text);
  if (doc.spaces.size() != 1)
    throw contract_error("define_space: document declares " +
                         std::to_string(doc.spaces.size()) + " spaces, expected 1");
  // Surface undeclared-state errors now rather than at merge time.
  for (const std::string& st : doc.spaces[0].chain) {
    bool found = false;
    for (const StateDef& sd : doc.states) found = found || sd.name == st;
    if (!found)
      throw contract_error("define_space: space '" + doc.spaces[0].id +
                           "' references undeclared state '" + st + "'");
  }
  return doc.spaces[0];
}

MergedSpace merge_document(const SpaceDocument& doc) {
  return merge(doc.spaces, doc.states, doc.pairs);
}

}  // namespace mergenas
