#pragma once

#include <array>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "echochamber/ingest.hpp"
#include "echochamber/labels.hpp"

namespace echochamber::stance {

/// Tweets a user posted strictly before their split point, the first time
/// they retweeted a user with a known stance.
struct UserHistory {
  UserId user;
  Timestamp split_point = 0;
  std::vector<TweetRecord> tweets;
  StanceLabel label = StanceLabel::Unassigned;
};

/// Positive class for all binary metrics.
inline int class_of(StanceLabel l) { return l == StanceLabel::Advocate ? 1 : 0; }

/// Split-point dataset.
///
/// The split point is the earliest retweet (in either stream) of a user
/// labeled Skeptic or Advocate. Users whose labeled retweet targets span both
/// sides, users without any labeled target, and users whose split point falls
/// before `earliest_split` are excluded. The label is the user's own stance
/// when it is known, else the side of the users they retweet. Output is
/// sorted by user id; histories by (timestamp, tweet id).
std::vector<UserHistory> build_dataset(std::span<const TweetRecord> tweets, std::span<const TweetRecord> historical,
                                       const LabelMap& labels, Timestamp earliest_split);

/// Every historical tweet of each listed user, with no split point; used to
/// score users outside the labeled network.
std::vector<UserHistory> full_histories(std::span<const TweetRecord> historical, std::span<const UserId> users);

struct PosCounts {
  std::size_t verbs = 0;
  std::size_t nouns = 0;
  std::size_t articles = 0;
};

class PosTagger {
 public:
  virtual ~PosTagger() = default;
  virtual PosCounts count(std::string_view text) const = 0;
};

/// Closed-list Italian articles plus suffix rules for verbs and nouns.
class HeuristicItalianTagger final : public PosTagger {
 public:
  PosCounts count(std::string_view text) const override;
};

inline constexpr std::size_t kAggregateFeatureCount = 16;

inline constexpr std::array<std::string_view, kAggregateFeatureCount> kAggregateFeatureNames = {
    "account_age_days", "total_tweets",      "tweet_rate",        "followers",
    "friends",          "pct_retweets",      "pct_with_mentions", "pct_with_hashtags",
    "pct_with_url",     "chars",             "uppercase",         "verbs",
    "nouns",            "articles",          "question_marks",    "exclamation_marks"};

struct AggregateFeatures {
  std::array<double, kAggregateFeatureCount> values{};

  double& operator[](std::string_view name);
  double operator[](std::string_view name) const;
};

/// Throws InvalidArgument on an empty history. `profile` may be null, in
/// which case the account age runs from the first tweet in the history and
/// the tweet total is the history length.
AggregateFeatures aggregate_features(const UserHistory& h, const AccountProfile* profile, const PosTagger& tagger);

}  // namespace echochamber::stance
