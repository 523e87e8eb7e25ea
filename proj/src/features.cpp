#include "nerclust/features.hpp"

#include <algorithm>
#include <charconv>

#include "nerclust/error.hpp"

namespace nerclust {
namespace {

constexpr std::string_view kBos = "<BOS>";
constexpr std::string_view kEos = "<EOS>";

// Decodes one code point; malformed bytes are returned as themselves.
std::pair<char32_t, std::size_t> decode(std::string_view s, std::size_t i) {
  const auto c = static_cast<unsigned char>(s[i]);
  std::size_t len = c < 0x80 ? 1 : (c & 0xE0) == 0xC0 ? 2 : (c & 0xF0) == 0xE0 ? 3
                                : (c & 0xF8) == 0xF0 ? 4 : 1;
  if (i + len > s.size()) len = 1;
  if (len == 1) return {c, 1};
  char32_t cp = c & (0x7F >> len);
  for (std::size_t k = 1; k < len; ++k) {
    const auto cc = static_cast<unsigned char>(s[i + k]);
    if ((cc & 0xC0) != 0x80) return {c, 1};
    cp = (cp << 6) | (cc & 0x3F);
  }
  return {cp, len};
}

enum class Case { Upper, Lower, Digit, Other };

Case classify(char32_t cp) {
  if (cp >= '0' && cp <= '9') return Case::Digit;
  if (cp >= 'A' && cp <= 'Z') return Case::Upper;
  if (cp >= 'a' && cp <= 'z') return Case::Lower;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return Case::Upper;
  if (cp >= 0xDF && cp <= 0xFF && cp != 0xF7) return Case::Lower;
  if (cp >= 0x100 && cp <= 0x17F) {
    if (cp == 0x138 || cp == 0x149 || cp == 0x17F) return Case::Lower;
    const bool odd_upper =
        (cp >= 0x139 && cp <= 0x148) || (cp >= 0x179 && cp <= 0x17E);
    return ((cp % 2 == 1) == odd_upper) ? Case::Upper : Case::Lower;
  }
  if (cp >= 0x391 && cp <= 0x3A9) return Case::Upper;
  if (cp >= 0x3B1 && cp <= 0x3C9) return Case::Lower;
  if (cp >= 0x400 && cp <= 0x42F) return Case::Upper;
  if (cp >= 0x430 && cp <= 0x45F) return Case::Lower;
  return Case::Other;
}

std::vector<std::string_view> code_points(std::string_view word) {
  std::vector<std::string_view> out;
  for (std::size_t i = 0; i < word.size();) {
    const auto [cp, len] = decode(word, i);
    out.push_back(word.substr(i, len));
    i += len;
  }
  return out;
}

std::string offset_tag(long offset) { return "@" + std::to_string(offset); }

bool parse_bool(std::string_view v) {
  if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "off" || v == "no") return false;
  throw UsageError("expected a boolean, got '" + std::string(v) + "'");
}

std::size_t parse_size(std::string_view v) {
  std::size_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size())
    throw UsageError("expected a non-negative integer, got '" +
                     std::string(v) + "'");
  return out;
}

}  // namespace

void FeatureConfig::set(std::string_view key, std::string_view value) {
  if (key == "context_window") {
    context_window = parse_size(value);
  } else if (key == "cluster_window") {
    cluster_window = parse_size(value);
  } else if (key == "use_shape") {
    use_shape = parse_bool(value);
  } else if (key == "use_prefix_suffix") {
    use_prefix_suffix = parse_bool(value);
  } else if (key == "use_pos") {
    use_pos = parse_bool(value);
  } else if (key == "use_lemma") {
    use_lemma = parse_bool(value);
  } else if (key == "use_bigrams") {
    use_bigrams = parse_bool(value);
  } else if (key == "transition_mask") {
    transition_mask = parse_bool(value);
  } else if (key == "cluster_sources") {
    cluster_sources.clear();
    std::size_t start = 0;
    while (start < value.size()) {
      auto comma = value.find(',', start);
      auto item = value.substr(start, comma - start);
      if (!item.empty()) cluster_sources.emplace_back(item);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
  } else {
    throw UsageError("unknown feature setting '" + std::string(key) + "'");
  }
}

std::vector<std::pair<std::string, std::string>> FeatureConfig::to_pairs()
    const {
  std::string sources;
  for (const auto& s : cluster_sources) {
    if (!sources.empty()) sources += ',';
    sources += s;
  }
  auto b = [](bool v) { return std::string(v ? "1" : "0"); };
  return {{"context_window", std::to_string(context_window)},
          {"use_shape", b(use_shape)},
          {"use_prefix_suffix", b(use_prefix_suffix)},
          {"use_pos", b(use_pos)},
          {"use_lemma", b(use_lemma)},
          {"use_bigrams", b(use_bigrams)},
          {"cluster_window", std::to_string(cluster_window)},
          {"cluster_sources", sources},
          {"transition_mask", b(transition_mask)}};
}

void FeatureConfig::validate() const {
  auto sorted = cluster_sources;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw UsageError("cluster sources must be distinct");
}

void ClusterSet::add(std::string id, const Clustering& clustering) {
  std::unordered_map<std::string, int> lookup;
  lookup.reserve(clustering.size());
  for (std::size_t i = 0; i < clustering.size(); ++i)
    lookup.emplace(clustering.word(i), clustering.cluster(i));
  add(std::move(id), std::move(lookup));
}

void ClusterSet::add(std::string id, std::unordered_map<std::string, int> lookup) {
  if (id.empty() || id.find_first_of(" \t:,=") != std::string::npos)
    throw UsageError("clustering id '" + id +
                     "' must be non-empty without spaces, ':', ',' or '='");
  if (contains(id)) throw UsageError("duplicate clustering id '" + id + "'");
  ids_.push_back(std::move(id));
  maps_.push_back(std::move(lookup));
}

bool ClusterSet::contains(std::string_view id) const {
  return std::find(ids_.begin(), ids_.end(), id) != ids_.end();
}

const std::unordered_map<std::string, int>& ClusterSet::lookup(
    std::string_view id) const {
  auto it = std::find(ids_.begin(), ids_.end(), id);
  if (it == ids_.end())
    throw UsageError("unknown clustering '" + std::string(id) + "'");
  return maps_[std::size_t(it - ids_.begin())];
}

std::string word_shape(std::string_view word) {
  std::string out;
  std::string last;
  std::size_t run = 0;
  for (std::size_t i = 0; i < word.size();) {
    const auto [cp, len] = decode(word, i);
    std::string sym;
    switch (classify(cp)) {
      case Case::Upper: sym = "X"; break;
      case Case::Lower: sym = "x"; break;
      case Case::Digit: sym = "d"; break;
      case Case::Other: sym = std::string(word.substr(i, len)); break;
    }
    i += len;
    if (sym == last) {
      ++run;
    } else {
      last = sym;
      run = 1;
    }
    if (run <= 4) {
      out += sym;
    } else if (run == 5) {
      out += '*';
    }
  }
  return out;
}

std::vector<std::string> extract_features(const Sentence& sentence,
                                          std::size_t position,
                                          const FeatureConfig& config,
                                          const ClusterSet& clusters) {
  const long n = long(sentence.size());
  const long t = long(position);
  if (t < 0 || t >= n) throw DataError("feature position out of range");
  auto word_at = [&](long i) -> std::string_view {
    if (i < 0) return kBos;
    if (i >= n) return kEos;
    return sentence.tokens[std::size_t(i)].surface;
  };

  std::vector<std::string> f;
  f.emplace_back("BIAS");
  const long cw = long(config.context_window);
  for (long k = -cw; k <= cw; ++k) {
    f.push_back("W:" + std::string(word_at(t + k)) + offset_tag(k));
    const long i = t + k;
    if (i < 0 || i >= n) continue;
    const Token& tok = sentence.tokens[std::size_t(i)];
    if (config.use_pos && tok.pos) f.push_back("POS:" + *tok.pos + offset_tag(k));
    if (config.use_lemma && tok.lemma)
      f.push_back("LEM:" + *tok.lemma + offset_tag(k));
  }
  const std::string_view word = word_at(t);
  if (config.use_shape) f.push_back("SH:" + word_shape(word) + "@0");
  if (config.use_prefix_suffix) {
    const auto cps = code_points(word);
    for (std::size_t len = 1; len <= 3 && len <= cps.size(); ++len) {
      std::string pre, suf;
      for (std::size_t j = 0; j < len; ++j) pre += cps[j];
      for (std::size_t j = cps.size() - len; j < cps.size(); ++j) suf += cps[j];
      f.push_back("PRE" + std::to_string(len) + ":" + pre + "@0");
      f.push_back("SUF" + std::to_string(len) + ":" + suf + "@0");
    }
  }
  if (config.use_bigrams) {
    f.push_back("BG:" + std::string(word_at(t - 1)) + "|" + std::string(word) +
                "@-1");
    f.push_back("BG:" + std::string(word) + "|" + std::string(word_at(t + 1)) +
                "@0");
  }
  const long clw = long(config.cluster_window);
  for (const auto& src : config.cluster_sources) {
    const auto& lookup = clusters.lookup(src);
    for (long k = -clw; k <= clw; ++k) {
      const long i = t + k;
      if (i < 0 || i >= n) continue;
      auto it = lookup.find(sentence.tokens[std::size_t(i)].surface);
      f.push_back("CL:" + src + ":" +
                  (it == lookup.end() ? std::string("NOCLUSTER")
                                      : std::to_string(it->second)) +
                  offset_tag(k));
    }
  }
  std::sort(f.begin(), f.end());
  f.erase(std::unique(f.begin(), f.end()), f.end());
  return f;
}

}  // namespace nerclust
