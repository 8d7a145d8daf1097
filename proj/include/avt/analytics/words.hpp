#pragma once

// Caption word statistics: per-caption length mean/std, vocabulary size
// before and after a stoplist, and the share of captions containing a word.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "avt/error.hpp"

namespace avt::analytics {

/// Lowercases ASCII and splits on every run of characters that are not
/// ASCII letters or digits. Bytes >= 0x80 count as word characters so UTF-8
/// letters stay inside words.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> words;
  std::string current;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    const bool word_char = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
    if (word_char) {
      current += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c);
    } else if (!current.empty()) {
      words.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

/// Prepositions, pronouns, conjunctions and determiners.
inline const std::set<std::string>& default_stoplist() {
  static const std::set<std::string> words = {
      // determiners
      "a", "an", "the", "this", "that", "these", "those", "each", "every", "either", "neither", "some", "any",
      "no", "all", "both", "few", "many", "much", "several", "such", "what", "which", "whose", "another",
      "other", "own",
      // pronouns
      "i", "me", "my", "mine", "myself", "you", "your", "yours", "yourself", "yourselves", "he", "him", "his",
      "himself", "she", "her", "hers", "herself", "it", "its", "itself", "we", "us", "our", "ours",
      "ourselves", "they", "them", "their", "theirs", "themselves", "who", "whom", "someone", "something",
      "anyone", "anything", "everyone", "everything", "nobody", "nothing", "one",
      // prepositions
      "about", "above", "across", "after", "against", "along", "among", "around", "as", "at", "before",
      "behind", "below", "beneath", "beside", "besides", "between", "beyond", "by", "despite", "down",
      "during", "except", "for", "from", "in", "inside", "into", "like", "near", "of", "off", "on", "onto",
      "out", "outside", "over", "past", "since", "through", "throughout", "to", "toward", "towards", "under",
      "underneath", "until", "up", "upon", "with", "within", "without", "via",
      // conjunctions
      "and", "but", "or", "nor", "so", "yet", "because", "although", "though", "while", "whereas", "if",
      "unless", "whether", "than", "when", "where", "once", "till"};
  return words;
}

struct WordPresence {
  std::string word;
  std::uint64_t captions = 0;
  double percent = 0.0;
};

struct WordStatsReport {
  std::uint64_t captions = 0;
  double mean_words = 0.0;
  double std_words = 0.0;  // population
  std::uint64_t min_words = 0;
  std::uint64_t max_words = 0;
  std::uint64_t distinct_words = 0;
  std::uint64_t distinct_after_stoplist = 0;
  std::vector<WordPresence> top;
};

/// Mergeable word-statistics accumulator; all state is integral.
class WordStatsAccumulator {
 public:
  void add(std::string_view caption) {
    const auto words = tokenize(caption);
    const auto n = static_cast<std::uint64_t>(words.size());
    ++captions_;
    sum_ += n;
    sum_sq_ += n * n;
    min_ = captions_ == 1 ? n : std::min(min_, n);
    max_ = std::max(max_, n);
    const std::set<std::string> unique(words.begin(), words.end());
    for (const auto& w : unique) ++presence_[w];
  }

  void merge(const WordStatsAccumulator& other) {
    if (other.captions_ == 0) return;
    min_ = captions_ == 0 ? other.min_ : std::min(min_, other.min_);
    max_ = std::max(max_, other.max_);
    captions_ += other.captions_;
    sum_ += other.sum_;
    sum_sq_ += other.sum_sq_;
    for (const auto& [w, n] : other.presence_) presence_[w] += n;
  }

  std::uint64_t captions() const { return captions_; }
  const std::map<std::string, std::uint64_t>& presence() const { return presence_; }

  friend bool operator==(const WordStatsAccumulator&, const WordStatsAccumulator&) = default;

  WordStatsReport report(const std::set<std::string>& stoplist, std::size_t top_k) const {
    if (captions_ == 0) throw Error(ErrorKind::EmptyCorpus, "no captions");
    WordStatsReport r;
    r.captions = captions_;
    const auto n = static_cast<long double>(captions_);
    r.mean_words = static_cast<double>(static_cast<long double>(sum_) / n);
    const unsigned __int128 var_num = static_cast<unsigned __int128>(captions_) * sum_sq_ -
                                      static_cast<unsigned __int128>(sum_) * sum_;
    r.std_words = static_cast<double>(std::sqrt(static_cast<long double>(var_num) / (n * n)));
    r.min_words = min_;
    r.max_words = max_;
    r.distinct_words = presence_.size();
    std::vector<WordPresence> kept;
    for (const auto& [w, c] : presence_) {
      if (stoplist.contains(w)) continue;
      kept.push_back(WordPresence{w, c, static_cast<double>(static_cast<long double>(c) * 100.0L / n)});
    }
    r.distinct_after_stoplist = kept.size();
    std::stable_sort(kept.begin(), kept.end(),
                     [](const WordPresence& a, const WordPresence& b) { return a.captions > b.captions; });
    if (kept.size() > top_k) kept.resize(top_k);
    r.top = std::move(kept);
    return r;
  }

 private:
  std::uint64_t captions_ = 0;
  std::uint64_t sum_ = 0;
  std::uint64_t sum_sq_ = 0;
  std::uint64_t min_ = 0;
  std::uint64_t max_ = 0;
  std::map<std::string, std::uint64_t> presence_;
};

inline WordStatsReport word_stats(std::span<const std::string> captions,
                                  const std::set<std::string>& stoplist = default_stoplist(),
                                  std::size_t top_k = 60) {
  WordStatsAccumulator acc;
  for (const auto& c : captions) acc.add(c);
  return acc.report(stoplist, top_k);
}

}  // namespace avt::analytics
