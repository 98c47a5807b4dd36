#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace echochamber::text {

/// Unicode NFC normalization followed by full lowercasing.
std::string normalize_lower(std::string_view utf8);

/// Decode UTF-8; invalid bytes become U+FFFD.
std::u32string decode_utf8(std::string_view utf8);
std::string encode_utf8(std::u32string_view cps);

bool is_letter(char32_t c);
bool is_upper(char32_t c);

/// Host part of a URL with scheme, credentials, port, path and a leading
/// "www." removed. Returns "(invalid)" when no plausible host is present.
std::string extract_domain(std::string_view url);

inline constexpr std::string_view kInvalidDomain = "(invalid)";

/// Remove http(s)/www URLs and @mentions from tweet text.
std::string strip_urls_and_mentions(std::string_view utf8);

/// Lowercased maximal runs of letters. An apostrophe directly following a
/// letter is kept on the token ("l'" stays distinct from "l").
std::vector<std::string> letter_tokens(std::string_view utf8, bool keep_apostrophe = false);

}  // namespace echochamber::text
