#include "tae/text_model.hpp"

#include <cstdint>

#include "tae/error.hpp"

namespace tae {
namespace {

// Decodes one UTF-8 code point starting at s[i]; advances i. Malformed
// sequences decode as the single lead byte.
char32_t next_code_point(std::string_view s, std::size_t& i) noexcept {
  const auto b0 = static_cast<unsigned char>(s[i]);
  auto cont = [&](std::size_t k) {
    return i + k < s.size() && (static_cast<unsigned char>(s[i + k]) & 0xC0) == 0x80;
  };
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  if ((b0 & 0xE0) == 0xC0 && cont(1)) {
    char32_t cp = ((b0 & 0x1F) << 6) | (static_cast<unsigned char>(s[i + 1]) & 0x3F);
    i += 2;
    return cp;
  }
  if ((b0 & 0xF0) == 0xE0 && cont(1) && cont(2)) {
    char32_t cp = ((b0 & 0x0F) << 12) |
                  ((static_cast<unsigned char>(s[i + 1]) & 0x3F) << 6) |
                  (static_cast<unsigned char>(s[i + 2]) & 0x3F);
    i += 3;
    return cp;
  }
  if ((b0 & 0xF8) == 0xF0 && cont(1) && cont(2) && cont(3)) {
    char32_t cp = ((b0 & 0x07) << 18) |
                  ((static_cast<unsigned char>(s[i + 1]) & 0x3F) << 12) |
                  ((static_cast<unsigned char>(s[i + 2]) & 0x3F) << 6) |
                  (static_cast<unsigned char>(s[i + 3]) & 0x3F);
    i += 4;
    return cp;
  }
  ++i;
  return b0;
}

bool is_space(char32_t c) noexcept {
  switch (c) {
    case U' ': case U'\t': case U'\n': case U'\v': case U'\f': case U'\r':
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return c >= 0x2000 && c <= 0x200A;
  }
}

bool is_punct(char32_t c) noexcept {
  if (c < 0x80) {
    return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) ||
           (c >= 0x5B && c <= 0x60) || (c >= 0x7B && c <= 0x7E);
  }
  switch (c) {
    case 0xA1: case 0xA7: case 0xAB: case 0xB6: case 0xB7: case 0xBB: case 0xBF:
      return true;
    default:
      break;
  }
  return (c >= 0x2010 && c <= 0x2027) || (c >= 0x2030 && c <= 0x205E) ||
         (c >= 0x3001 && c <= 0x3003) || (c >= 0x3008 && c <= 0x3011);
}

}  // namespace

Tokens tokenize(std::string_view text, const TokenizerConfig& cfg) {
  Tokens out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  std::size_t i = 0;
  while (i < text.size()) {
    const std::size_t start = i;
    const char32_t cp = next_code_point(text, i);
    if (is_space(cp) || (cfg.strip_punctuation && is_punct(cp))) {
      flush();
      continue;
    }
    if (cfg.lowercase && cp >= U'A' && cp <= U'Z') {
      cur.push_back(static_cast<char>(cp - U'A' + U'a'));
    } else {
      cur.append(text.substr(start, i - start));
    }
  }
  flush();
  return out;
}

PanelSequence make_sequence(const std::vector<std::string>& texts, Role role,
                            TemplateKind template_kind, const TokenizerConfig& cfg) {
  PanelSequence seq;
  seq.role = role;
  seq.template_kind = std::move(template_kind);
  seq.panels.reserve(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    seq.panels.push_back(Panel{i, texts[i], tokenize(texts[i], cfg)});
  }
  return seq;
}

std::size_t utf8_length(std::string_view text) noexcept {
  std::size_t n = 0;
  for (std::size_t i = 0; i < text.size(); ++n) next_code_point(text, i);
  return n;
}

std::string_view to_string(PanelRule rule) noexcept {
  switch (rule) {
    case PanelRule::PerFrame: return "frame";
    case PanelRule::PerSection: return "section";
    case PanelRule::WholeDocument: return "whole";
    case PanelRule::PerParagraph: return "paragraph";
  }
  return "frame";
}

PanelRule parse_panel_rule(std::string_view text) {
  if (text == "frame") return PanelRule::PerFrame;
  if (text == "section") return PanelRule::PerSection;
  if (text == "whole") return PanelRule::WholeDocument;
  if (text == "paragraph") return PanelRule::PerParagraph;
  throw ValidationError("unknown panel rule '" + std::string(text) + "'");
}

TemplateKind TemplateKind::parse(std::string_view text) {
  if (text == "slides") return slides();
  if (text == "poster") return poster();
  if (text == "blog") return blog();
  constexpr std::string_view prefix = "custom:";
  if (text.starts_with(prefix)) {
    auto rest = text.substr(prefix.size());
    auto colon = rest.rfind(':');
    if (colon != std::string_view::npos && colon > 0) {
      return custom(std::string(rest.substr(0, colon)),
                    parse_panel_rule(rest.substr(colon + 1)));
    }
  }
  throw ValidationError("unknown template '" + std::string(text) +
                        "' (expected slides|poster|blog|custom:<name>:<rule>)");
}

std::string TemplateKind::to_string() const {
  if (kind_ != Kind::Custom) return name_;
  return "custom:" + name_ + ":" + std::string(tae::to_string(rule_));
}

std::string_view to_string(Role role) noexcept {
  return role == Role::Reference ? "reference" : "generated";
}

Role parse_role(std::string_view text) {
  if (text == "reference") return Role::Reference;
  if (text == "generated") return Role::Generated;
  throw ValidationError("unknown role '" + std::string(text) + "'");
}

}  // namespace tae
