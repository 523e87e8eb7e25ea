#include "nerclust/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "nerclust/error.hpp"

namespace nerclust {
namespace {

constexpr std::string_view kDocStart = "-DOCSTART-";

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' ||
         c == '\f';
}

std::vector<std::string_view> split_whitespace(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    std::size_t j = i;
    while (j < line.size() && !is_space(line[j])) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<std::string_view> split_fields(std::string_view line, char sep) {
  if (sep != '\t') return split_whitespace(line);
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find('\t', start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim_cr(std::string_view line) {
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n'))
    line.remove_suffix(1);
  return line;
}

bool blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(), is_space);
}

std::string_view label_type(std::string_view label) {
  return label.size() > 2 ? label.substr(2) : std::string_view{};
}

}  // namespace

std::vector<std::string> Sentence::labels() const {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(t.ne_label.value_or("O"));
  return out;
}

ColumnSpec ColumnSpec::conll2003() { return ColumnSpec{}; }

ColumnSpec ColumnSpec::conll2002() {
  ColumnSpec s;
  s.ne_col = 1;
  s.pos_col.reset();
  s.chunk_col.reset();
  return s;
}

ColumnSpec ColumnSpec::conll2002_pos() {
  ColumnSpec s;
  s.pos_col = 1;
  s.ne_col = 2;
  s.chunk_col.reset();
  return s;
}

ColumnSpec ColumnSpec::named(std::string_view name) {
  if (name == "conll2003") return conll2003();
  if (name == "conll2002") return conll2002();
  if (name == "conll2002-pos") return conll2002_pos();
  throw UsageError("unknown column format '" + std::string(name) + "'");
}

ColumnSpec ColumnSpec::parse(std::string_view text) {
  ColumnSpec s;
  s.ne_col.reset();
  s.pos_col.reset();
  s.chunk_col.reset();
  s.lemma_col.reset();
  bool have_word = false;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    std::string_view item = text.substr(start, comma - start);
    auto eq = item.find('=');
    if (eq == std::string_view::npos)
      throw UsageError("bad column item '" + std::string(item) + "'");
    std::string_view key = item.substr(0, eq);
    std::string_view val = item.substr(eq + 1);
    std::size_t idx = 0;
    auto [p, ec] = std::from_chars(val.data(), val.data() + val.size(), idx);
    if (ec != std::errc{} || p != val.data() + val.size())
      throw UsageError("bad column index '" + std::string(val) + "'");
    if (key == "word") {
      s.word_col = idx;
      have_word = true;
    } else if (key == "ne") {
      s.ne_col = idx;
    } else if (key == "pos") {
      s.pos_col = idx;
    } else if (key == "lemma") {
      s.lemma_col = idx;
    } else if (key == "chunk") {
      s.chunk_col = idx;
    } else if (key == "sep") {
      throw UsageError("separator is set with its own option");
    } else {
      throw UsageError("unknown column '" + std::string(key) + "'");
    }
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (!have_word) throw UsageError("column layout needs word=<index>");
  s.validate();
  return s;
}

std::size_t ColumnSpec::width() const {
  std::size_t w = word_col;
  for (const auto& c : {ne_col, pos_col, lemma_col, chunk_col})
    if (c) w = std::max(w, *c);
  return w + 1;
}

void ColumnSpec::validate() const {
  std::vector<std::size_t> used{word_col};
  for (const auto& c : {ne_col, pos_col, lemma_col, chunk_col})
    if (c) used.push_back(*c);
  std::sort(used.begin(), used.end());
  if (std::adjacent_find(used.begin(), used.end()) != used.end())
    throw UsageError("column indices must be distinct");
  if (separator != ' ' && separator != '\t')
    throw UsageError("separator must be space or tab");
}

std::size_t LabeledCorpus::token_count() const {
  std::size_t n = 0;
  for (const auto& s : sentences) n += s.size();
  return n;
}

TagScheme parse_tag_scheme(std::string_view name) {
  if (name == "iob1" || name == "IOB1") return TagScheme::IOB1;
  if (name == "bio2" || name == "BIO2") return TagScheme::BIO2;
  throw UsageError("unknown tag scheme '" + std::string(name) + "'");
}

bool is_entity_type(std::string_view type) {
  return std::find(std::begin(kEntityTypes), std::end(kEntityTypes), type) !=
         std::end(kEntityTypes);
}

bool is_valid_label(std::string_view label) {
  if (label == "O") return true;
  if (label.size() < 3 || (label[0] != 'B' && label[0] != 'I') ||
      label[1] != '-')
    return false;
  return is_entity_type(label.substr(2));
}

LabeledCorpus read_conll(std::istream& in, const ColumnSpec& spec) {
  spec.validate();
  LabeledCorpus corpus;
  corpus.column_spec = spec;
  const std::size_t need = spec.width();

  Sentence current;
  auto flush = [&] {
    if (!current.tokens.empty()) corpus.sentences.push_back(std::move(current));
    current = Sentence{};
  };

  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = trim_cr(raw);
    if (blank(line)) {
      flush();
      continue;
    }
    auto fields = split_fields(line, spec.separator);
    if (fields[std::min(spec.word_col, fields.size() - 1)] == kDocStart) {
      flush();
      continue;
    }
    if (fields.size() < need) {
      throw DataError("line " + std::to_string(line_no) + ": expected at least " +
                      std::to_string(need) + " columns, found " +
                      std::to_string(fields.size()));
    }
    Token tok;
    tok.surface = std::string(fields[spec.word_col]);
    if (tok.surface.empty())
      throw DataError("line " + std::to_string(line_no) + ": empty word");
    if (spec.pos_col) tok.pos = std::string(fields[*spec.pos_col]);
    if (spec.lemma_col) tok.lemma = std::string(fields[*spec.lemma_col]);
    if (spec.chunk_col) tok.chunk = std::string(fields[*spec.chunk_col]);
    if (spec.ne_col) {
      std::string_view label = fields[*spec.ne_col];
      if (!is_valid_label(label))
        throw DataError("line " + std::to_string(line_no) +
                        ": invalid entity label '" + std::string(label) + "'");
      if (label != "O") corpus.label_set.emplace(label_type(label));
      tok.ne_label = std::string(label);
    }
    current.tokens.push_back(std::move(tok));
  }
  flush();
  return corpus;
}

void write_conll(const LabeledCorpus& corpus, std::ostream& out,
                 const std::vector<std::vector<std::string>>* predictions) {
  const ColumnSpec& spec = corpus.column_spec;
  if (predictions && predictions->size() != corpus.sentences.size())
    throw DataError("prediction count does not match sentence count");
  const std::size_t width = spec.width();
  std::vector<std::string_view> cols(width);
  for (std::size_t s = 0; s < corpus.sentences.size(); ++s) {
    const auto& sent = corpus.sentences[s];
    if (predictions && (*predictions)[s].size() != sent.size())
      throw DataError("prediction length mismatch in sentence " +
                      std::to_string(s));
    for (std::size_t i = 0; i < sent.size(); ++i) {
      const Token& t = sent.tokens[i];
      std::fill(cols.begin(), cols.end(), std::string_view("_"));
      cols[spec.word_col] = t.surface;
      auto put = [&](const std::optional<std::size_t>& col,
                     const std::optional<std::string>& v) {
        if (col) cols[*col] = v ? std::string_view(*v) : std::string_view("_");
      };
      put(spec.pos_col, t.pos);
      put(spec.lemma_col, t.lemma);
      put(spec.chunk_col, t.chunk);
      if (spec.ne_col) cols[*spec.ne_col] = t.ne_label ? *t.ne_label : "O";
      for (std::size_t c = 0; c < width; ++c) {
        if (c) out << spec.separator;
        out << cols[c];
      }
      if (predictions) out << spec.separator << (*predictions)[s][i];
      out << '\n';
    }
    out << '\n';
  }
}

std::vector<std::vector<std::string>> read_label_column(std::istream& in) {
  std::vector<std::vector<std::string>> out;
  std::vector<std::string> current;
  std::string raw;
  auto flush = [&] {
    if (!current.empty()) out.push_back(std::move(current));
    current.clear();
  };
  while (std::getline(in, raw)) {
    std::string_view line = trim_cr(raw);
    if (blank(line)) {
      flush();
      continue;
    }
    auto fields = split_whitespace(line);
    if (fields.front() == kDocStart) {
      flush();
      continue;
    }
    current.emplace_back(fields.back());
  }
  flush();
  return out;
}

std::vector<std::string> to_bio2(const std::vector<std::string>& labels,
                                 TagScheme source) {
  std::vector<std::string> out(labels.size());
  std::string_view prev_type;  // empty when previous label is O
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::string& l = labels[i];
    if (!is_valid_label(l))
      throw DataError("position " + std::to_string(i) + ": invalid label '" +
                      l + "'");
    if (l == "O") {
      out[i] = l;
      prev_type = {};
      continue;
    }
    std::string_view type = label_type(l);
    const bool begin = l[0] == 'B';
    if (source == TagScheme::BIO2) {
      if (!begin && type != prev_type)
        throw DataError("position " + std::to_string(i) + ": '" + l +
                        "' does not continue an entity (BIO2)");
      out[i] = l;
    } else {
      // IOB1: B-X only separates two adjacent entities of the same type.
      if (begin && type != prev_type)
        throw DataError("position " + std::to_string(i) + ": '" + l +
                        "' does not follow an entity of the same type (IOB1)");
      const bool starts = begin || type != prev_type;
      out[i] = (starts ? "B-" : "I-") + std::string(type);
    }
    prev_type = type;
  }
  return out;
}

LabeledCorpus normalize_tag_scheme(const LabeledCorpus& corpus,
                                   TagScheme source) {
  LabeledCorpus out = corpus;
  for (std::size_t s = 0; s < out.sentences.size(); ++s) {
    auto& sent = out.sentences[s];
    std::vector<std::string> labels = sent.labels();
    std::vector<std::string> converted;
    try {
      converted = to_bio2(labels, source);
    } catch (const DataError& e) {
      throw DataError("sentence " + std::to_string(s) + ", " + e.what());
    }
    for (std::size_t i = 0; i < sent.size(); ++i)
      if (sent.tokens[i].ne_label) sent.tokens[i].ne_label = converted[i];
  }
  return out;
}

std::optional<std::size_t> find_invalid_utf8(std::string_view text) {
  const auto* p = reinterpret_cast<const unsigned char*>(text.data());
  const std::size_t n = text.size();
  std::size_t i = 0;
  while (i < n) {
    unsigned char c = p[i];
    std::size_t len;
    std::uint32_t cp;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return i;
    }
    if (i + len > n) return i;
    for (std::size_t k = 1; k < len; ++k) {
      if ((p[i + k] & 0xC0) != 0x80) return i;
      cp = (cp << 6) | (p[i + k] & 0x3F);
    }
    // Overlong forms, surrogates and out-of-range code points.
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) ||
        (len == 4 && cp < 0x10000) || cp > 0x10FFFF ||
        (cp >= 0xD800 && cp <= 0xDFFF))
      return i;
    i += len;
  }
  return std::nullopt;
}

PlainCorpus tokenize_plain(std::istream& in) {
  PlainCorpus out;
  std::string line;
  std::size_t offset = 0;
  while (std::getline(in, line)) {
    if (auto bad = find_invalid_utf8(line))
      throw DataError("invalid UTF-8 at byte offset " +
                      std::to_string(offset + *bad));
    offset += line.size() + 1;
    auto words = split_whitespace(line);
    if (words.empty()) continue;
    out.emplace_back(words.begin(), words.end());
  }
  return out;
}

// ---------------------------------------------------------------------------

std::optional<std::uint32_t> Vocabulary::find(std::string_view word) const {
  auto it = ids_.find(std::string(word));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

std::uint64_t Vocabulary::bigram_total() const {
  std::uint64_t t = 0;
  for (const auto& b : bigrams_) t += b.count;
  return t;
}

void Vocabulary::index() {
  ids_.clear();
  for (std::uint32_t i = 0; i < entries_.size(); ++i)
    ids_.emplace(entries_[i].word, i);
}

namespace {

bool frequency_order(const Vocabulary::Entry& a, const Vocabulary::Entry& b) {
  if (a.count != b.count) return a.count > b.count;
  return a.word < b.word;
}

}  // namespace

Vocabulary Vocabulary::from_counts(
    const std::vector<std::pair<std::string, std::uint64_t>>& counts,
    const std::vector<std::tuple<std::string, std::string, std::uint64_t>>&
        bigrams) {
  Vocabulary v;
  for (const auto& [w, c] : counts) {
    v.entries_.push_back({w, c});
    v.unigram_total_ += c;
  }
  std::sort(v.entries_.begin(), v.entries_.end(), frequency_order);
  v.index();
  if (v.ids_.size() != v.entries_.size())
    throw DataError("duplicate word in vocabulary counts");
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint64_t> table;
  for (const auto& [l, r, c] : bigrams) {
    auto li = v.find(l), ri = v.find(r);
    if (!li || !ri)
      throw DataError("bigram (" + l + ", " + r + ") uses unknown word");
    table[{*li, *ri}] += c;
  }
  for (const auto& [k, c] : table)
    if (c) v.bigrams_.push_back({k.first, k.second, c});
  return v;
}

void Vocabulary::write_tsv(std::ostream& out) const {
  for (const auto& e : entries_) out << e.word << '\t' << e.count << '\n';
}

Vocabulary build_vocabulary(const PlainCorpus& sentences,
                            std::uint64_t min_count,
                            std::string_view boundary) {
  if (min_count < 1) throw UsageError("min_count must be at least 1");
  std::unordered_map<std::string, std::uint64_t> raw;
  std::uint64_t tokens = 0;
  std::uint64_t nonempty = 0;
  for (const auto& s : sentences) {
    if (!s.empty()) ++nonempty;
    for (const auto& w : s) {
      ++raw[w];
      ++tokens;
    }
  }
  if (tokens == 0) throw DataError("no tokens");

  Vocabulary v;
  v.min_count_ = min_count;
  v.unigram_total_ = tokens;
  std::uint64_t unk_count = 0;
  for (const auto& [w, c] : raw) {
    if (c >= min_count)
      v.entries_.push_back({w, c});
    else
      unk_count += c;
  }
  if (unk_count > 0) {
    if (raw.count(std::string(kUnknownWord)))
      throw DataError("corpus contains the reserved symbol <unk>");
    v.entries_.push_back({std::string(kUnknownWord), unk_count});
  }
  if (!boundary.empty()) {
    if (raw.count(std::string(boundary)))
      throw DataError("corpus contains the boundary symbol " +
                      std::string(boundary));
    v.entries_.push_back({std::string(boundary), nonempty});
  }
  std::sort(v.entries_.begin(), v.entries_.end(), frequency_order);
  v.index();
  if (unk_count > 0) v.unk_id_ = *v.find(kUnknownWord);
  if (!boundary.empty()) v.boundary_id_ = *v.find(boundary);

  // Bigrams over the thresholded stream.
  std::unordered_map<std::uint64_t, std::uint64_t> table;
  std::vector<std::uint32_t> ids;
  for (const auto& s : sentences) {
    if (s.empty()) continue;
    ids.clear();
    if (v.boundary_id_) ids.push_back(*v.boundary_id_);
    for (const auto& w : s) {
      auto id = v.find(w);
      ids.push_back(id ? *id : *v.unk_id_);
    }
    if (v.boundary_id_) ids.push_back(*v.boundary_id_);
    for (std::size_t i = 0; i + 1 < ids.size(); ++i)
      ++table[(std::uint64_t(ids[i]) << 32) | ids[i + 1]];
  }
  v.bigrams_.reserve(table.size());
  for (const auto& [k, c] : table)
    v.bigrams_.push_back({std::uint32_t(k >> 32), std::uint32_t(k), c});
  std::sort(v.bigrams_.begin(), v.bigrams_.end(),
            [](const Bigram& a, const Bigram& b) {
              return std::tie(a.left, a.right) < std::tie(b.left, b.right);
            });
  return v;
}

}  // namespace nerclust
