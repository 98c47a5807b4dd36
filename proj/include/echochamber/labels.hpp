#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "echochamber/graph.hpp"

namespace echochamber {

enum class StanceLabel { Skeptic, Advocate, Unassigned };

std::string_view to_string(StanceLabel label);
/// Accepts "skeptic", "advocate", "unassigned" (case-insensitive).
std::optional<StanceLabel> parse_stance(std::string_view s);

inline StanceLabel opposite(StanceLabel l) {
  switch (l) {
    case StanceLabel::Skeptic: return StanceLabel::Advocate;
    case StanceLabel::Advocate: return StanceLabel::Skeptic;
    default: return StanceLabel::Unassigned;
  }
}

using LabelMap = std::map<UserId, StanceLabel>;

/// CSV `user,label` with optional header line.
LabelMap read_label_csv(const std::filesystem::path& path);

}  // namespace echochamber
