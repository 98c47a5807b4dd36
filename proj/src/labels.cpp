#include "echochamber/labels.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "echochamber/util.hpp"

namespace echochamber {

std::string_view to_string(StanceLabel label) {
  switch (label) {
    case StanceLabel::Skeptic: return "skeptic";
    case StanceLabel::Advocate: return "advocate";
    case StanceLabel::Unassigned: return "unassigned";
  }
  return "unassigned";
}

std::optional<StanceLabel> parse_stance(std::string_view s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "skeptic") return StanceLabel::Skeptic;
  if (lower == "advocate") return StanceLabel::Advocate;
  if (lower == "unassigned") return StanceLabel::Unassigned;
  return std::nullopt;
}

LabelMap read_label_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open: " + path.string());
  LabelMap out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto fields = split(t, ',');
    if (fields.size() < 2) throw ParseError(path.string() + ":" + std::to_string(lineno) + ": expected user,label");
    auto label = parse_stance(trim(fields.back()));
    if (!label) {
      if (lineno == 1) continue;  // header
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": unknown label '" + fields.back() + "'");
    }
    out[trim(fields.front())] = *label;
  }
  return out;
}

}  // namespace echochamber
