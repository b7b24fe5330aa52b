#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <string>
#include <string_view>

#include "hardneg/corpus.hpp"

namespace hardneg {
namespace {

constexpr std::array<std::string_view, 4> kDroppedTags = {"nav", "header", "footer", "aside"};
constexpr std::array<std::string_view, 4> kDroppedMarkers = {"sidebar", "header", "footer", "nav"};
constexpr std::array<std::string_view, 4> kRawTextTags = {"script", "style", "noscript", "template"};

constexpr std::array<std::string_view, 14> kVoidTags = {
    "area", "base", "br", "col", "embed", "hr", "img",
    "input", "link", "meta", "param", "source", "track", "wbr"};

constexpr std::array<std::string_view, 38> kBlockTags = {
    "address", "article", "aside", "blockquote", "body", "br", "caption", "dd",
    "div", "dl", "dt", "fieldset", "figcaption", "figure", "footer", "form",
    "h1", "h2", "h3", "h4", "h5", "h6", "head", "header", "hr", "html",
    "li", "main", "nav", "ol", "p", "pre", "section", "table", "td", "th",
    "title", "tr"};

template <std::size_t N>
bool contains(const std::array<std::string_view, N>& set, std::string_view value) {
  return std::find(set.begin(), set.end(), value) != set.end();
}

bool is_block(std::string_view name) {
  return contains(kBlockTags, name) || name == "ul" || name == "tbody" ||
         name == "thead" || name == "tfoot";
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == ':';
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v'; }

struct Tag {
  std::string name;  // lower-case
  bool closing = false;
  bool self_closing = false;
  bool boilerplate_attr = false;
  std::size_t end = 0;  // one past '>'
};

// Attribute values of class/id mentioning a boilerplate marker.
bool has_boilerplate_attr(std::string_view attrs) {
  std::size_t i = 0;
  while (i < attrs.size()) {
    while (i < attrs.size() && (is_space(attrs[i]) || attrs[i] == '\n' || attrs[i] == '/')) ++i;
    const std::size_t name_start = i;
    while (i < attrs.size() && !is_space(attrs[i]) && attrs[i] != '\n' && attrs[i] != '=' &&
           attrs[i] != '/') {
      ++i;
    }
    const std::string name = lower(attrs.substr(name_start, i - name_start));
    while (i < attrs.size() && (is_space(attrs[i]) || attrs[i] == '\n')) ++i;
    std::string_view value;
    if (i < attrs.size() && attrs[i] == '=') {
      ++i;
      while (i < attrs.size() && (is_space(attrs[i]) || attrs[i] == '\n')) ++i;
      if (i < attrs.size() && (attrs[i] == '"' || attrs[i] == '\'')) {
        const char quote = attrs[i++];
        const std::size_t start = i;
        while (i < attrs.size() && attrs[i] != quote) ++i;
        value = attrs.substr(start, i - start);
        if (i < attrs.size()) ++i;
      } else {
        const std::size_t start = i;
        while (i < attrs.size() && !is_space(attrs[i]) && attrs[i] != '\n') ++i;
        value = attrs.substr(start, i - start);
      }
    }
    if (name_start == i) {
      ++i;
      continue;
    }
    if (name == "class" || name == "id") {
      const std::string v = lower(value);
      for (auto marker : kDroppedMarkers) {
        if (v.find(marker) != std::string::npos) return true;
      }
    }
  }
  return false;
}

// Parses a tag starting at html[pos] == '<'. Returns false when the bytes do
// not form a tag, in which case '<' is literal text.
bool parse_tag(std::string_view html, std::size_t pos, Tag& tag) {
  std::size_t i = pos + 1;
  tag = Tag{};
  if (i < html.size() && html[i] == '/') {
    tag.closing = true;
    ++i;
  }
  if (i >= html.size() || !std::isalpha(static_cast<unsigned char>(html[i]))) return false;
  const std::size_t name_start = i;
  while (i < html.size() && is_name_char(html[i])) ++i;
  tag.name = lower(html.substr(name_start, i - name_start));
  const std::size_t attrs_start = i;
  char quote = 0;
  while (i < html.size()) {
    const char c = html[i];
    if (quote) {
      if (c == quote) quote = 0;
    } else if (c == '"' || c == '\'') {
      // Quotes only open inside attribute values (after '=').
      std::size_t k = i;
      while (k > attrs_start && is_space(html[k - 1])) --k;
      if (k > attrs_start && html[k - 1] == '=') quote = c;
    } else if (c == '>') {
      break;
    }
    ++i;
  }
  if (i >= html.size()) return false;
  std::string_view attrs = html.substr(attrs_start, i - attrs_start);
  tag.self_closing = !attrs.empty() && attrs.back() == '/';
  tag.boilerplate_attr = !tag.closing && has_boilerplate_attr(attrs);
  tag.end = i + 1;
  return true;
}

bool starts_with_ci(std::string_view s, std::size_t pos, std::string_view prefix) {
  if (pos + prefix.size() > s.size()) return false;
  for (std::size_t k = 0; k < prefix.size(); ++k) {
    if (std::tolower(static_cast<unsigned char>(s[pos + k])) != prefix[k]) return false;
  }
  return true;
}

// Position one past the end tag closing the element whose start tag ended at
// `from`, counting nested same-name elements. npos if never closed.
std::size_t skip_element(std::string_view html, std::size_t from, std::string_view name,
                         bool raw_text) {
  int depth = 1;
  std::size_t i = from;
  Tag tag;
  while (i < html.size()) {
    const auto lt = html.find('<', i);
    if (lt == std::string_view::npos) return std::string_view::npos;
    if (raw_text) {
      // Raw text elements end at the first matching close tag.
      if (starts_with_ci(html, lt, "</") && starts_with_ci(html, lt + 2, name) &&
          (lt + 2 + name.size() >= html.size() || !is_name_char(html[lt + 2 + name.size()]))) {
        const auto gt = html.find('>', lt);
        return gt == std::string_view::npos ? std::string_view::npos : gt + 1;
      }
      i = lt + 1;
      continue;
    }
    if (starts_with_ci(html, lt, "<!--")) {
      const auto end = html.find("-->", lt + 4);
      if (end == std::string_view::npos) return std::string_view::npos;
      i = end + 3;
      continue;
    }
    if (parse_tag(html, lt, tag)) {
      if (tag.name == name && !tag.self_closing) {
        depth += tag.closing ? -1 : 1;
        if (depth == 0) return tag.end;
      }
      i = tag.end;
    } else {
      i = lt + 1;
    }
  }
  return std::string_view::npos;
}

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = 0xFFFD;
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

struct NamedEntity {
  std::string_view name;
  std::uint32_t code_point;
};

constexpr std::array<NamedEntity, 16> kEntities = {{
    {"amp", '&'}, {"lt", '<'}, {"gt", '>'}, {"quot", '"'}, {"apos", '\''},
    {"nbsp", ' '}, {"ndash", 0x2013}, {"mdash", 0x2014}, {"hellip", 0x2026},
    {"copy", 0xA9}, {"reg", 0xAE}, {"trade", 0x2122}, {"lsquo", 0x2018},
    {"rsquo", 0x2019}, {"ldquo", 0x201C}, {"rdquo", 0x201D},
}};

// Decodes an entity at html[pos] == '&'. Returns the consumed length, or 0.
std::size_t decode_entity(std::string_view html, std::size_t pos, std::string& out) {
  const auto semi = html.find(';', pos);
  if (semi == std::string_view::npos || semi - pos > 12 || semi == pos + 1) return 0;
  std::string_view body = html.substr(pos + 1, semi - pos - 1);
  if (body[0] == '#') {
    std::uint32_t cp = 0;
    const bool hex = body.size() > 1 && (body[1] == 'x' || body[1] == 'X');
    std::string_view digits = body.substr(hex ? 2 : 1);
    if (digits.empty()) return 0;
    for (char c : digits) {
      int d;
      if (std::isdigit(static_cast<unsigned char>(c))) {
        d = c - '0';
      } else if (hex && std::isxdigit(static_cast<unsigned char>(c))) {
        d = std::tolower(static_cast<unsigned char>(c)) - 'a' + 10;
      } else {
        return 0;
      }
      cp = cp * (hex ? 16 : 10) + static_cast<std::uint32_t>(d);
      if (cp > 0x10FFFF) cp = 0x110000;
    }
    append_utf8(out, cp == 0xA0 ? ' ' : cp);
    return semi - pos + 1;
  }
  for (const auto& e : kEntities) {
    if (body == e.name) {
      append_utf8(out, e.code_point);
      return semi - pos + 1;
    }
  }
  return 0;
}

// One extraction pass; the raw output keeps source line breaks and adds one
// per block boundary.
std::string extract_once(std::string_view html) {
  std::string raw;
  raw.reserve(html.size());
  std::size_t i = 0;
  Tag tag;
  while (i < html.size()) {
    const char c = html[i];
    if (c == '<') {
      if (starts_with_ci(html, i, "<!--")) {
        const auto end = html.find("-->", i + 4);
        if (end == std::string_view::npos) break;
        i = end + 3;
        continue;
      }
      if (i + 1 < html.size() && (html[i + 1] == '!' || html[i + 1] == '?')) {
        const auto end = html.find('>', i);
        if (end == std::string_view::npos) break;
        i = end + 1;
        continue;
      }
      if (!parse_tag(html, i, tag)) {
        raw += c;
        ++i;
        continue;
      }
      i = tag.end;
      const bool is_void = contains(kVoidTags, tag.name);
      if (!tag.closing && !tag.self_closing && !is_void) {
        const bool raw_text = contains(kRawTextTags, tag.name);
        const bool dropped = contains(kDroppedTags, tag.name) || tag.boilerplate_attr;
        if (raw_text || dropped) {
          const auto end = skip_element(html, i, tag.name, raw_text);
          raw += '\n';
          if (end == std::string_view::npos) break;
          i = end;
          continue;
        }
      }
      if (is_block(tag.name)) raw += '\n';
      continue;
    }
    if (c == '&') {
      const auto used = decode_entity(html, i, raw);
      if (used > 0) {
        i += used;
        continue;
      }
    }
    raw += c;
    ++i;
  }

  // Collapse whitespace inside lines and drop empty lines.
  std::string out;
  out.reserve(raw.size());
  std::size_t line_start = 0;
  while (line_start <= raw.size()) {
    auto line_end = raw.find('\n', line_start);
    if (line_end == std::string::npos) line_end = raw.size();
    std::string line;
    bool pending_space = false;
    for (std::size_t k = line_start; k < line_end; ++k) {
      const char ch = raw[k];
      if (is_space(ch)) {
        pending_space = !line.empty();
      } else {
        if (pending_space) line += ' ';
        pending_space = false;
        line += ch;
      }
    }
    if (!line.empty()) {
      if (!out.empty()) out += '\n';
      out += line;
    }
    line_start = line_end + 1;
  }
  return out;
}

}  // namespace

std::string html_to_text(std::string_view html) {
  // Decoded entities can spell new markup ("&lt;p&gt;"); iterate to a fixed
  // point so the function is idempotent. Every changing pass shrinks the text.
  std::string current = extract_once(html);
  while (true) {
    std::string next = extract_once(current);
    if (next == current) return current;
    current = std::move(next);
  }
}

}  // namespace hardneg
