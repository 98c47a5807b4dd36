#include "echochamber/stance.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "echochamber/text.hpp"
#include "echochamber/vectorize.hpp"

namespace echochamber::stance {

namespace {

bool tweet_order(const TweetRecord& a, const TweetRecord& b) {
  return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.tweet_id < b.tweet_id;
}

bool is_side(StanceLabel l) { return l == StanceLabel::Skeptic || l == StanceLabel::Advocate; }

}  // namespace

std::vector<UserHistory> build_dataset(std::span<const TweetRecord> tweets, std::span<const TweetRecord> historical,
                                       const LabelMap& labels, Timestamp earliest_split) {
  struct Seen {
    Timestamp first = 0;
    bool skeptic = false;
    bool advocate = false;
  };
  std::map<UserId, Seen> seen;
  for (auto stream : {tweets, historical}) {
    for (const auto& t : stream) {
      if (!t.retweeted_user_id || *t.retweeted_user_id == t.user_id) continue;
      auto it = labels.find(*t.retweeted_user_id);
      if (it == labels.end() || !is_side(it->second)) continue;
      auto [entry, inserted] = seen.try_emplace(t.user_id, Seen{t.timestamp});
      auto& s = entry->second;
      if (!inserted) s.first = std::min(s.first, t.timestamp);
      (it->second == StanceLabel::Skeptic ? s.skeptic : s.advocate) = true;
    }
  }

  std::map<UserId, UserHistory> included;
  for (const auto& [user, s] : seen) {
    if (s.skeptic && s.advocate) continue;
    if (s.first < earliest_split) continue;
    UserHistory h;
    h.user = user;
    h.split_point = s.first;
    auto own = labels.find(user);
    h.label = own != labels.end() && is_side(own->second) ? own->second
              : s.skeptic                                  ? StanceLabel::Skeptic
                                                           : StanceLabel::Advocate;
    included.emplace(user, std::move(h));
  }
  for (const auto& t : historical) {
    auto it = included.find(t.user_id);
    if (it != included.end() && t.timestamp < it->second.split_point) it->second.tweets.push_back(t);
  }

  std::vector<UserHistory> out;
  out.reserve(included.size());
  for (auto& [_, h] : included) {
    std::sort(h.tweets.begin(), h.tweets.end(), tweet_order);
    out.push_back(std::move(h));
  }
  return out;
}

std::vector<UserHistory> full_histories(std::span<const TweetRecord> historical, std::span<const UserId> users) {
  std::map<UserId, UserHistory> by_user;
  for (const auto& u : users) by_user[u].user = u;
  for (const auto& t : historical) {
    auto it = by_user.find(t.user_id);
    if (it == by_user.end()) continue;
    it->second.tweets.push_back(t);
    it->second.split_point = std::max(it->second.split_point, t.timestamp + 1);
  }
  std::vector<UserHistory> out;
  for (auto& [_, h] : by_user) {
    std::sort(h.tweets.begin(), h.tweets.end(), tweet_order);
    out.push_back(std::move(h));
  }
  return out;
}

PosCounts HeuristicItalianTagger::count(std::string_view text) const {
  static const std::set<std::string, std::less<>> kArticles = {"il", "lo", "la", "i", "gli", "le", "un", "uno", "una", "l'", "un'"};
  static constexpr std::string_view kVerbSuffixes[] = {
      "are",  "ere",  "ire",   "ando",  "endo",  "ato",  "ata",  "ati",  "ate",   "uto",  "uta",   "uti",
      "ito",  "ita",  "iti",   "iamo",  "ono",   "ano",  "ava",  "avano", "eva",  "evano", "ivano", "erà",
      "irà",  "arà",  "ebbe",  "ebbero"};
  static constexpr std::string_view kNounSuffixes[] = {"zione", "zioni", "mento", "menti", "tà", "ista", "isti",
                                                       "ismo", "ore", "ori", "ezza", "enza", "anza"};
  const auto& stop = italian_stopwords();
  PosCounts c;
  for (const auto& tok : text::letter_tokens(text, true)) {
    if (kArticles.contains(tok)) {
      ++c.articles;
      continue;
    }
    if (tok.back() == '\'' || stop.contains(tok) || tok.size() < 3) continue;
    auto ends_with_any = [&](std::span<const std::string_view> suffixes) {
      return std::any_of(suffixes.begin(), suffixes.end(), [&](std::string_view s) {
        return tok.size() > s.size() + 1 && std::string_view(tok).ends_with(s);
      });
    };
    if (ends_with_any(kNounSuffixes)) {
      ++c.nouns;
    } else if (ends_with_any(kVerbSuffixes)) {
      ++c.verbs;
    } else if (std::string_view("aeio").find(tok.back()) != std::string_view::npos) {
      ++c.nouns;
    }
  }
  return c;
}

double& AggregateFeatures::operator[](std::string_view name) {
  auto it = std::find(kAggregateFeatureNames.begin(), kAggregateFeatureNames.end(), name);
  if (it == kAggregateFeatureNames.end()) throw InvalidArgument("unknown aggregate feature: " + std::string(name));
  return values[static_cast<std::size_t>(it - kAggregateFeatureNames.begin())];
}

double AggregateFeatures::operator[](std::string_view name) const {
  return const_cast<AggregateFeatures&>(*this)[name];
}

AggregateFeatures aggregate_features(const UserHistory& h, const AccountProfile* profile, const PosTagger& tagger) {
  if (h.tweets.empty()) throw InvalidArgument("empty history for user " + h.user);
  AggregateFeatures f;
  const auto n = static_cast<double>(h.tweets.size());

  Timestamp created = h.tweets.front().timestamp;
  for (const auto& t : h.tweets) created = std::min(created, t.timestamp);
  if (profile && profile->created_at) created = *profile->created_at;
  const double age_days = std::max(0.0, static_cast<double>(h.split_point - created) / 86400.0);
  const double total = profile && profile->statuses ? static_cast<double>(*profile->statuses) : n;

  f["account_age_days"] = age_days;
  f["total_tweets"] = total;
  f["tweet_rate"] = total / std::max(age_days, 1.0);
  f["followers"] = profile ? static_cast<double>(profile->followers) : 0.0;
  f["friends"] = profile ? static_cast<double>(profile->friends) : 0.0;

  double retweets = 0, mentions = 0, hashtags = 0, urls = 0;
  double chars = 0, upper = 0, verbs = 0, nouns = 0, articles = 0, questions = 0, exclamations = 0;
  for (const auto& t : h.tweets) {
    retweets += t.is_retweet();
    mentions += !t.mentioned_user_ids.empty();
    hashtags += !t.hashtags.empty();
    urls += !t.urls.empty();
    for (char32_t c : text::decode_utf8(t.text)) {
      chars += 1;
      upper += text::is_upper(c);
      questions += c == U'?';
      exclamations += c == U'!';
    }
    auto pos = tagger.count(t.text);
    verbs += static_cast<double>(pos.verbs);
    nouns += static_cast<double>(pos.nouns);
    articles += static_cast<double>(pos.articles);
  }
  f["pct_retweets"] = retweets / n;
  f["pct_with_mentions"] = mentions / n;
  f["pct_with_hashtags"] = hashtags / n;
  f["pct_with_url"] = urls / n;
  f["chars"] = chars / n;
  f["uppercase"] = upper / n;
  f["verbs"] = verbs / n;
  f["nouns"] = nouns / n;
  f["articles"] = articles / n;
  f["question_marks"] = questions / n;
  f["exclamation_marks"] = exclamations / n;
  return f;
}

}  // namespace echochamber::stance
