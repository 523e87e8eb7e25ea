#pragma once

// Synthetic bilingual NER benchmark.
//
// A gazetteer of single-token PER and LOC names is built from one shared
// syllable inventory, so spelling carries no type signal. Half the names of
// each type occur in the labeled target data ("train names"); the other
// half occur only in the test set and in the secondary-language corpora.
// Test entities are drawn from held-out names with probability 1/2.
//
// Target sentences come from German-like templates. Some templates put an
// entity next to a cue (a title before PER, a preposition before LOC);
// others put a PER, LOC or capitalized common noun into the same slot, so
// only the word itself says whether it is an entity and of which type.
// MISC words exist only in the target language.
//
// Two secondary corpora use English-like templates over all names. Each
// makes 70% of the train names and 70% of the held-out names frequent and
// leaves the rest below the clustering threshold, with different names
// missing from each. A merged clustering therefore covers more held-out
// names than either secondary clustering alone.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace synthetic {

struct Config {
  std::uint64_t seed = 1;
  std::size_t names_per_type = 100;
  std::size_t misc_words = 20;
  std::size_t train_sentences = 500;
  std::size_t test_sentences = 500;
  std::size_t target_unlabeled = 20000;
  std::size_t secondary_a = 50000;
  std::size_t secondary_b = 30000;
  double heldout_share = 0.5;     // of test entities
  double frequent_share = 0.7;    // of each name half, per secondary corpus
  std::size_t rare_max = 4;       // occurrences of a rare name (< min_count)
};

struct Token {
  std::string word;
  std::string label;
};
using Sentence = std::vector<Token>;

class Generator {
 public:
  explicit Generator(Config cfg) : cfg_(cfg), rng_(cfg.seed) { make_lexicon(); }

  const Config& config() const { return cfg_; }
  const std::vector<std::string>& per() const { return per_; }
  const std::vector<std::string>& loc() const { return loc_; }
  const std::vector<std::string>& misc() const { return misc_; }
  /// First half of each name list; the rest is held out.
  std::size_t train_names() const { return cfg_.names_per_type / 2; }

  std::vector<Sentence> labeled(std::size_t n, bool test) {
    std::vector<Sentence> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(target_sentence(test ? 2 : 1));
    return out;
  }

  /// Target-language unlabeled text: train names only.
  std::vector<std::vector<std::string>> target_plain(std::size_t n) {
    std::vector<std::vector<std::string>> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(words(target_sentence(0)));
    return out;
  }

  /// Secondary-language text. `part` 0 or 1 selects which names are
  /// frequent.
  std::vector<std::vector<std::string>> secondary_plain(std::size_t n, int part) {
    std::vector<std::string> fp, fl, rare;
    split_names(per_, part, fp, rare);
    split_names(loc_, part, fl, rare);
    std::vector<std::vector<std::string>> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(secondary_sentence(fp, fl));
    // Rare names: a few occurrences each, in the same kinds of contexts.
    for (const auto& name : rare) {
      const bool is_per = std::find(per_.begin(), per_.end(), name) != per_.end();
      const std::size_t k = 1 + pick(cfg_.rare_max);
      for (std::size_t j = 0; j < k; ++j) {
        auto s = secondary_sentence(fp, fl);
        // Replace the first name of the matching type with the rare name.
        for (auto& w : s)
          if (is_per ? contains(fp, w) : contains(fl, w)) {
            w = name;
            break;
          }
        out.push_back(s);
      }
    }
    // Interleave deterministically so rare sentences are not all at the end.
    for (std::size_t i = out.size(); i > 1; --i) std::swap(out[i - 1], out[pick(i)]);
    return out;
  }

  static void write_conll(const std::vector<Sentence>& sentences,
                          const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    for (const auto& s : sentences) {
      for (const auto& t : s) out << t.word << ' ' << t.label << '\n';
      out << '\n';
    }
  }

  static void write_plain(const std::vector<std::vector<std::string>>& sentences,
                          const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    for (const auto& s : sentences) {
      for (std::size_t i = 0; i < s.size(); ++i) out << (i ? " " : "") << s[i];
      out << '\n';
    }
  }

 private:
  std::size_t pick(std::size_t n) { return std::size_t(rng_() % n); }
  template <class T>
  const T& any(const std::vector<T>& v) {
    return v[pick(v.size())];
  }
  static bool contains(const std::vector<std::string>& v, const std::string& w) {
    return std::find(v.begin(), v.end(), w) != v.end();
  }
  static std::vector<std::string> words(const Sentence& s) {
    std::vector<std::string> out;
    for (const auto& t : s) out.push_back(t.word);
    return out;
  }

  std::string name() {
    static const std::vector<std::string> syl{
        "ka", "ro", "lin", "mar", "te", "su", "vo", "ni", "ber", "dan",
        "el", "mi", "ra", "to", "gu", "sen", "ha", "lo", "pe", "ri"};
    std::string w;
    const std::size_t n = 2 + pick(2);
    for (std::size_t i = 0; i < n; ++i) w += any(syl);
    w[0] = char(w[0] - 'a' + 'A');
    return w;
  }

  void make_lexicon() {
    std::set<std::string> used;
    auto fresh = [&](const std::string& suffix) {
      while (true) {
        std::string w = name() + suffix;
        if (used.insert(w).second) return w;
      }
    };
    for (std::size_t i = 0; i < cfg_.names_per_type; ++i) per_.push_back(fresh(""));
    for (std::size_t i = 0; i < cfg_.names_per_type; ++i) loc_.push_back(fresh(""));
    for (std::size_t i = 0; i < cfg_.misc_words; ++i) misc_.push_back(fresh("isch"));
  }

  // Within each half (train names, held-out names) the first
  // `frequent_share` are frequent in corpus A and the last `frequent_share`
  // in corpus B; the rest occur only a few times.
  void split_names(const std::vector<std::string>& names, int part,
                   std::vector<std::string>& frequent,
                   std::vector<std::string>& rare) const {
    const std::size_t half = names.size() / 2;
    const std::size_t n_freq = std::size_t(double(half) * cfg_.frequent_share + 0.5);
    for (std::size_t i = 0; i < names.size(); ++i) {
      const std::size_t pos = i % half;
      const bool in_a = pos < n_freq;
      const bool in_b = pos >= half - n_freq;
      if (part == 0 ? in_a : in_b)
        frequent.push_back(names[i]);
      else
        rare.push_back(names[i]);
    }
  }

  // mode 0: unlabeled target text, 1: training, 2: test.
  std::string person(int mode) {
    const std::size_t h = train_names();
    if (mode == 2 && double(rng_() % 1000) < 1000.0 * cfg_.heldout_share)
      return per_[h + pick(per_.size() - h)];
    return per_[pick(h)];
  }
  std::string location(int mode) {
    const std::size_t h = train_names();
    if (mode == 2 && double(rng_() % 1000) < 1000.0 * cfg_.heldout_share)
      return loc_[h + pick(loc_.size() - h)];
    return loc_[pick(h)];
  }

  Sentence target_sentence(int mode) {
    static const std::vector<std::string> nouns{
        "Haus",   "Stadt",   "Regierung", "Markt",  "Woche",   "Bericht",
        "Polizei", "Schule", "Firma",     "Zeitung", "Bank",   "Kirche",
        "Partei", "Gericht", "Spiel",     "Wahl",   "Preis",   "Vertrag",
        "Plan",   "Arbeit",  "Welt",      "Zeit",   "Geld",    "Mannschaft"};
    static const std::vector<std::string> verbs{"lobte", "traf", "kritisierte",
                                                "besuchte", "unterstützte"};
    static const std::vector<std::string> days{"Montag", "Dienstag", "Freitag"};
    Sentence s;
    auto o = [&](const std::string& w) { s.push_back({w, "O"}); };
    auto ent = [&](const std::string& w, const char* type) {
      s.push_back({w, std::string("B-") + type});
    };
    auto per = [&] { ent(person(mode), "PER"); };
    auto loc = [&] { ent(location(mode), "LOC"); };
    auto misc = [&] { ent(any(misc_), "MISC"); };
    // Ambiguous slot: person, location or common noun.
    auto slot = [&] {
      switch (pick(3)) {
        case 0: per(); break;
        case 1: loc(); break;
        default: o(any(nouns));
      }
    };
    switch (pick(9)) {
      case 0: o("Herr"); per(); o("sagte"); o("am"); o(any(days)); break;
      case 1: o("Frau"); per(); o("besuchte"); loc(); break;
      case 2: o("die"); o("Regierung"); o("in"); loc(); o(any(verbs)); slot(); break;
      case 3: slot(); o(any(verbs)); o("die"); o(any(nouns)); break;
      case 4: o("gestern"); o(any(verbs)); slot(); o("die"); o(any(nouns)); o("aus"); loc(); break;
      case 5: o("der"); misc(); o(any(nouns)); o("wird"); o("in"); loc(); o("gezeigt"); break;
      case 6: o("die"); o(any(nouns)); o("von"); slot(); o("ist"); o("neu"); break;
      case 7: slot(); o("und"); slot(); o("sind"); o("bekannt"); break;
      default: o("die"); misc(); o(any(nouns)); o(any(verbs)); slot(); break;
    }
    o(".");
    return s;
  }

  std::vector<std::string> secondary_sentence(const std::vector<std::string>& fp,
                                              const std::vector<std::string>& fl) {
    static const std::vector<std::string> nouns{"government", "market", "police",
                                                "school", "team", "report", "bank",
                                                "court", "election", "city"};
    static const std::vector<std::string> said{"said", "told", "added", "claimed"};
    std::vector<std::string> s;
    auto p = [&] { s.push_back(any(fp)); };
    auto l = [&] { s.push_back(any(fl)); };
    switch (pick(8)) {
      case 0: s = {"mr"}; p(); s.push_back(any(said)); s.push_back("reporters"); break;
      case 1: s = {"ms"}; p(); s.push_back(any(said)); s.push_back("the");
              s.push_back(any(nouns)); break;
      case 2: s = {"the"}; s.push_back(any(nouns)); s.push_back("in"); l();
              s.push_back("was"); s.push_back("closed"); break;
      case 3: p(); s.push_back("visited"); l(); s.push_back("on");
              s.push_back("monday"); break;
      case 4: s = {"people", "from"}; l(); s.push_back("like"); s.push_back("the");
              s.push_back(any(nouns)); break;
      case 5: s = {"president"}; p(); s.push_back(any(said)); s.push_back("that"); l();
              s.push_back("will"); s.push_back("win"); break;
      case 6: s = {"flights", "to"}; l(); s.push_back("were"); s.push_back("delayed");
              break;
      default: s = {"the"}; s.push_back(any(nouns)); s.push_back(any(said)); p();
               s.push_back("was"); s.push_back("right"); break;
    }
    s.push_back(".");
    return s;
  }

  Config cfg_;
  std::mt19937_64 rng_;
  std::vector<std::string> per_, loc_, misc_;
};

}  // namespace synthetic
