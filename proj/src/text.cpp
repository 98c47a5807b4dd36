#include "echochamber/text.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <algorithm>
#include <cctype>

namespace echochamber::text {

std::string normalize_lower(std::string_view utf8) {
  if (std::all_of(utf8.begin(), utf8.end(), [](unsigned char c) { return c < 0x80; })) {
    std::string out(utf8);
    for (auto& c : out)
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
  }
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  icu::UnicodeString s = icu::UnicodeString::fromUTF8(icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
  if (U_SUCCESS(status)) {
    icu::UnicodeString normalized = nfc->normalize(s, status);
    if (U_SUCCESS(status)) s = std::move(normalized);
  }
  s.toLower(icu::Locale::getRoot());
  std::string out;
  s.toUTF8String(out);
  return out;
}

std::u32string decode_utf8(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    auto c = static_cast<unsigned char>(s[i]);
    char32_t cp = 0;
    std::size_t len = 0;
    if (c < 0x80) {
      cp = c;
      len = 1;
    } else if ((c >> 5) == 0x6) {
      cp = c & 0x1f;
      len = 2;
    } else if ((c >> 4) == 0xe) {
      cp = c & 0x0f;
      len = 3;
    } else if ((c >> 3) == 0x1e) {
      cp = c & 0x07;
      len = 4;
    } else {
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    if (i + len > s.size()) {
      out.push_back(0xFFFD);
      break;
    }
    bool ok = true;
    for (std::size_t k = 1; k < len; ++k) {
      auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc >> 6) != 0x2) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (cc & 0x3f);
    }
    if (!ok) {
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::string encode_utf8(std::u32string_view cps) {
  std::string out;
  out.reserve(cps.size());
  for (char32_t cp : cps) {
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else if (cp < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    }
  }
  return out;
}

bool is_letter(char32_t c) { return u_isalpha(static_cast<UChar32>(c)) != 0; }
bool is_upper(char32_t c) { return u_isupper(static_cast<UChar32>(c)) != 0; }

namespace {

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool valid_host(std::string_view host) {
  if (host.empty() || host.front() == '.' || host.front() == '-') return false;
  if (host.find("..") != std::string_view::npos) return false;
  if (host.find('.') == std::string_view::npos) return false;
  for (unsigned char c : host) {
    if (c >= 0x80) continue;  // internationalized labels
    if (!(std::isalnum(c) || c == '.' || c == '-')) return false;
  }
  return true;
}

}  // namespace

std::string extract_domain(std::string_view url) {
  std::string_view rest = url;
  while (!rest.empty() && std::isspace(static_cast<unsigned char>(rest.front()))) rest.remove_prefix(1);
  while (!rest.empty() && std::isspace(static_cast<unsigned char>(rest.back()))) rest.remove_suffix(1);

  auto scheme_end = rest.find("://");
  if (scheme_end != std::string_view::npos) {
    auto scheme = rest.substr(0, scheme_end);
    bool ok = !scheme.empty() && std::isalpha(static_cast<unsigned char>(scheme.front()));
    for (unsigned char c : scheme) ok = ok && (std::isalnum(c) || c == '+' || c == '-' || c == '.');
    if (!ok) return std::string(kInvalidDomain);
    rest.remove_prefix(scheme_end + 3);
  } else if (rest.starts_with("//")) {
    rest.remove_prefix(2);
  }

  auto authority = rest.substr(0, rest.find_first_of("/?#"));
  if (auto at = authority.rfind('@'); at != std::string_view::npos) authority.remove_prefix(at + 1);
  if (auto colon = authority.rfind(':'); colon != std::string_view::npos) {
    auto port = authority.substr(colon + 1);
    if (!std::all_of(port.begin(), port.end(), [](unsigned char c) { return std::isdigit(c); }))
      return std::string(kInvalidDomain);
    authority = authority.substr(0, colon);
  }
  std::string host = ascii_lower(authority);
  if (!host.empty() && host.back() == '.') host.pop_back();
  if (host.starts_with("www.")) host.erase(0, 4);
  if (!valid_host(host)) return std::string(kInvalidDomain);
  return host;
}

std::string strip_urls_and_mentions(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  auto at_token_start = [&](std::size_t pos) {
    return pos == 0 || std::isspace(static_cast<unsigned char>(s[pos - 1])) || s[pos - 1] == '(';
  };
  while (i < s.size()) {
    std::string_view tail = s.substr(i);
    bool url = at_token_start(i) &&
               (tail.starts_with("http://") || tail.starts_with("https://") || tail.starts_with("www."));
    bool mention = s[i] == '@';
    if (url || mention) {
      std::size_t j = i + 1;
      if (url) {
        while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
      } else {
        while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
      }
      out.push_back(' ');
      i = j;
      continue;
    }
    out.push_back(s[i]);
    ++i;
  }
  return out;
}

std::vector<std::string> letter_tokens(std::string_view utf8, bool keep_apostrophe) {
  std::vector<std::string> tokens;
  auto cps = decode_utf8(utf8);
  std::u32string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(normalize_lower(encode_utf8(current)));
    current.clear();
  };
  for (char32_t c : cps) {
    if (is_letter(c)) {
      current.push_back(c);
    } else if (keep_apostrophe && (c == U'\'' || c == U'’') && !current.empty()) {
      current.push_back(U'\'');
      flush();
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

}  // namespace echochamber::text
