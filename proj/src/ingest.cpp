#include "echochamber/ingest.hpp"

#include <algorithm>
#include <fstream>

#include "echochamber/text.hpp"
#include "echochamber/util.hpp"
#include "json.hpp"

namespace echochamber {

using nlohmann::json;

namespace {

std::string require_string(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(std::string("missing key '") + key + "'");
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number_integer()) return std::to_string(it->get<std::int64_t>());
  throw ParseError(std::string("key '") + key + "' must be a string");
}

std::vector<std::string> string_array(const json& obj, const char* key) {
  std::vector<std::string> out;
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return out;
  if (!it->is_array()) throw ParseError(std::string("key '") + key + "' must be an array");
  for (const auto& v : *it) {
    if (v.is_string()) {
      out.push_back(v.get<std::string>());
    } else if (v.is_number_integer()) {
      out.push_back(std::to_string(v.get<std::int64_t>()));
    } else {
      throw ParseError(std::string("key '") + key + "' must hold strings");
    }
  }
  return out;
}

std::string normalize_hashtag(std::string_view tag) {
  while (!tag.empty() && (tag.front() == '#' || tag.front() == ' ')) tag.remove_prefix(1);
  return text::normalize_lower(tag);
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open: " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path.string());
  return out;
}

}  // namespace

TweetRecord parse_tweet(std::string_view line) {
  json obj = json::parse(line, nullptr, false);
  if (obj.is_discarded() || !obj.is_object()) throw ParseError("not a JSON object");
  TweetRecord t;
  t.tweet_id = require_string(obj, "id");
  t.user_id = require_string(obj, "user");
  if (t.user_id.empty()) throw ParseError("empty user");
  auto ts = obj.find("ts");
  if (ts == obj.end() || !ts->is_number()) throw ParseError("missing numeric 'ts'");
  t.timestamp = ts->is_number_integer() ? ts->get<Timestamp>() : static_cast<Timestamp>(ts->get<double>());
  if (t.timestamp <= 0) throw ParseError("timestamp must be positive");
  if (auto it = obj.find("text"); it != obj.end() && !it->is_null()) {
    if (!it->is_string()) throw ParseError("'text' must be a string");
    t.text = it->get<std::string>();
  }
  if (auto it = obj.find("rt_user"); it != obj.end() && !it->is_null()) {
    std::string rt = it->is_string() ? it->get<std::string>()
                     : it->is_number_integer() ? std::to_string(it->get<std::int64_t>())
                                               : throw ParseError("'rt_user' must be a string or null");
    if (rt.empty()) throw ParseError("empty 'rt_user'");
    t.retweeted_user_id = std::move(rt);
  }
  t.mentioned_user_ids = string_array(obj, "mentions");
  std::erase_if(t.mentioned_user_ids, [](const std::string& s) { return s.empty(); });
  for (auto& h : string_array(obj, "hashtags")) {
    auto tag = normalize_hashtag(h);
    if (!tag.empty()) t.hashtags.push_back(std::move(tag));
  }
  t.urls = string_array(obj, "urls");
  return t;
}

std::string tweet_to_json(const TweetRecord& t) {
  json obj = json::object();
  obj["id"] = t.tweet_id;
  obj["user"] = t.user_id;
  obj["ts"] = t.timestamp;
  obj["text"] = t.text;
  obj["rt_user"] = t.retweeted_user_id ? json(*t.retweeted_user_id) : json(nullptr);
  obj["mentions"] = t.mentioned_user_ids;
  obj["hashtags"] = t.hashtags;
  obj["urls"] = t.urls;
  return obj.dump();
}

ParsedStream<TweetRecord> read_tweets(std::istream& in) {
  ParsedStream<TweetRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    try {
      out.records.push_back(parse_tweet(line));
    } catch (const ParseError&) {
      ++out.parse_errors;
    }
  }
  return out;
}

ParsedStream<TweetRecord> read_tweets(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_tweets(in);
}

void write_tweets(std::span<const TweetRecord> tweets, std::ostream& out) {
  for (const auto& t : tweets) out << tweet_to_json(t) << '\n';
}

void write_tweets(std::span<const TweetRecord> tweets, const std::filesystem::path& path) {
  auto out = open_output(path);
  write_tweets(tweets, out);
}

ParsedStream<FollowRecord> read_follows(std::istream& in) {
  ParsedStream<FollowRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() != 2 || fields[0].empty() || fields[1].empty() || fields[0] == fields[1]) {
      ++out.parse_errors;
      continue;
    }
    out.records.push_back({fields[0], fields[1]});
  }
  return out;
}

ParsedStream<FollowRecord> read_follows(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_follows(in);
}

void write_follows(std::span<const FollowRecord> follows, const std::filesystem::path& path) {
  auto out = open_output(path);
  for (const auto& f : follows) out << f.follower << '\t' << f.followee << '\n';
}

DirectedWeightedGraph build_retweet_network(std::span<const TweetRecord> tweets) {
  GraphBuilder b;
  for (const auto& t : tweets)
    if (t.retweeted_user_id) b.add_edge(t.user_id, *t.retweeted_user_id);
  return b.build();
}

DirectedWeightedGraph build_mention_network(std::span<const TweetRecord> tweets) {
  GraphBuilder b;
  for (const auto& t : tweets)
    for (const auto& m : t.mentioned_user_ids) b.add_edge(t.user_id, m);
  return b.build();
}

DirectedWeightedGraph build_follow_network(std::span<const FollowRecord> follows) {
  GraphBuilder b;
  for (const auto& f : follows) b.add_unit_edge(f.follower, f.followee);
  return b.build();
}

namespace {

std::vector<RankedCount> rank(const std::map<std::string, SideCounts>& counts) {
  std::vector<RankedCount> out;
  out.reserve(counts.size());
  for (const auto& [token, c] : counts) out.push_back({token, c});
  std::stable_sort(out.begin(), out.end(),
                   [](const RankedCount& a, const RankedCount& b) { return a.counts.total() > b.counts.total(); });
  return out;
}

void bump(SideCounts& c, StanceLabel side) {
  if (side == StanceLabel::Skeptic) {
    ++c.skeptic;
  } else {
    ++c.advocate;
  }
}

}  // namespace

std::vector<RankedCount> ContentStats::ranked_hashtags() const { return rank(hashtags); }
std::vector<RankedCount> ContentStats::ranked_domains() const { return rank(domains); }

ContentStats content_stats(std::span<const TweetRecord> tweets, const LabelMap& labels) {
  ContentStats stats;
  for (const auto& t : tweets) {
    auto it = labels.find(t.user_id);
    if (it == labels.end() || it->second == StanceLabel::Unassigned) continue;
    for (const auto& h : t.hashtags) bump(stats.hashtags[h], it->second);
    for (const auto& u : t.urls) bump(stats.domains[text::extract_domain(u)], it->second);
  }
  return stats;
}

ProfileMap read_profiles(const std::filesystem::path& path) {
  auto in = open_input(path);
  ProfileMap out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    json obj = json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object())
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": not a JSON object");
    AccountProfile p;
    p.user = require_string(obj, "user");
    if (auto it = obj.find("created_ts"); it != obj.end() && !it->is_null()) p.created_at = it->get<Timestamp>();
    p.followers = obj.value("followers", std::uint64_t{0});
    p.friends = obj.value("friends", std::uint64_t{0});
    if (auto it = obj.find("statuses"); it != obj.end() && !it->is_null()) p.statuses = it->get<std::uint64_t>();
    out[p.user] = std::move(p);
  }
  return out;
}

void write_profiles(const ProfileMap& profiles, const std::filesystem::path& path) {
  auto out = open_output(path);
  for (const auto& [user, p] : profiles) {
    json obj = json::object();
    obj["user"] = user;
    obj["created_ts"] = p.created_at ? json(*p.created_at) : json(nullptr);
    obj["followers"] = p.followers;
    obj["friends"] = p.friends;
    obj["statuses"] = p.statuses ? json(*p.statuses) : json(nullptr);
    out << obj.dump() << '\n';
  }
}

}  // namespace echochamber
