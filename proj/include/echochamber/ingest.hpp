#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "echochamber/graph.hpp"
#include "echochamber/labels.hpp"

namespace echochamber {

using Timestamp = std::int64_t;  // UTC seconds

struct TweetRecord {
  std::string tweet_id;
  UserId user_id;
  Timestamp timestamp = 0;
  std::string text;
  std::optional<UserId> retweeted_user_id;
  std::vector<UserId> mentioned_user_ids;
  std::vector<std::string> hashtags;  // lowercase, NFC, no leading '#'
  std::vector<std::string> urls;

  bool is_retweet() const { return retweeted_user_id.has_value(); }
};

struct FollowRecord {
  UserId follower;
  UserId followee;
};

/// Records parsed from a file plus the count of lines that were skipped.
template <typename Record>
struct ParsedStream {
  std::vector<Record> records;
  std::size_t parse_errors = 0;
};

// NDJSON keys: id, user, ts, text, rt_user (nullable), mentions, hashtags, urls.
ParsedStream<TweetRecord> read_tweets(std::istream& in);
ParsedStream<TweetRecord> read_tweets(const std::filesystem::path& path);
/// Throws ParseError on a malformed line.
TweetRecord parse_tweet(std::string_view json_line);
std::string tweet_to_json(const TweetRecord& t);
void write_tweets(std::span<const TweetRecord> tweets, std::ostream& out);
void write_tweets(std::span<const TweetRecord> tweets, const std::filesystem::path& path);

// TSV `follower<TAB>followee`.
ParsedStream<FollowRecord> read_follows(std::istream& in);
ParsedStream<FollowRecord> read_follows(const std::filesystem::path& path);
void write_follows(std::span<const FollowRecord> follows, const std::filesystem::path& path);

/// u->v weighted by the number of times u retweeted v. No thresholding.
DirectedWeightedGraph build_retweet_network(std::span<const TweetRecord> tweets);
/// u->v weighted by the number of times u mentioned v (replies included).
DirectedWeightedGraph build_mention_network(std::span<const TweetRecord> tweets);
/// Unit-weight, deduplicated follow edges.
DirectedWeightedGraph build_follow_network(std::span<const FollowRecord> follows);

struct SideCounts {
  std::uint64_t skeptic = 0;
  std::uint64_t advocate = 0;
  std::uint64_t total() const { return skeptic + advocate; }
  friend bool operator==(const SideCounts&, const SideCounts&) = default;
};

struct RankedCount {
  std::string token;
  SideCounts counts;
};

struct ContentStats {
  std::map<std::string, SideCounts> hashtags;
  std::map<std::string, SideCounts> domains;

  /// Sorted by total usage descending, ties by token.
  std::vector<RankedCount> ranked_hashtags() const;
  std::vector<RankedCount> ranked_domains() const;
};

/// Per-side hashtag and URL-domain counts; tweets by users without a
/// Skeptic/Advocate label are skipped.
ContentStats content_stats(std::span<const TweetRecord> tweets, const LabelMap& labels);

/// Account metadata used by the aggregate stance features.
struct AccountProfile {
  UserId user;
  std::optional<Timestamp> created_at;
  std::uint64_t followers = 0;
  std::uint64_t friends = 0;
  std::optional<std::uint64_t> statuses;
};

using ProfileMap = std::map<UserId, AccountProfile>;

// NDJSON keys: user, created_ts (nullable), followers, friends, statuses (nullable).
ProfileMap read_profiles(const std::filesystem::path& path);
void write_profiles(const ProfileMap& profiles, const std::filesystem::path& path);

}  // namespace echochamber
