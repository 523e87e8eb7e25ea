#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace nerclust {

struct Token {
  std::string surface;
  std::optional<std::string> pos;
  std::optional<std::string> lemma;
  std::optional<std::string> chunk;
  std::optional<std::string> ne_label;
};

struct Sentence {
  std::vector<Token> tokens;

  std::size_t size() const { return tokens.size(); }
  std::vector<std::string> labels() const;
};

/// Column layout of a CoNLL file. Indices are zero-based. `ne_col` may be
/// absent for unlabeled input (e.g. text to be tagged).
struct ColumnSpec {
  std::size_t word_col = 0;
  std::optional<std::size_t> ne_col = 3;
  std::optional<std::size_t> pos_col = 1;
  std::optional<std::size_t> lemma_col;
  std::optional<std::size_t> chunk_col = 2;
  char separator = ' ';

  /// word pos chunk ne (English/German CoNLL-2003 without the lemma column).
  static ColumnSpec conll2003();
  /// word ne (Spanish CoNLL-2002).
  static ColumnSpec conll2002();
  /// word pos ne (Dutch CoNLL-2002).
  static ColumnSpec conll2002_pos();
  /// Parses "word=0,pos=1,chunk=2,ne=3" style layouts.
  static ColumnSpec parse(std::string_view text);
  /// Resolves a named layout ("conll2003", "conll2002", "conll2002-pos").
  static ColumnSpec named(std::string_view name);

  std::size_t width() const;  // max referenced index + 1
  void validate() const;
};

struct LabeledCorpus {
  std::vector<Sentence> sentences;
  std::set<std::string> label_set;  // entity types, e.g. "PER"
  ColumnSpec column_spec;

  std::size_t token_count() const;
};

enum class TagScheme { IOB1, BIO2 };

TagScheme parse_tag_scheme(std::string_view name);

/// The four entity types of the CoNLL shared tasks.
inline constexpr std::string_view kEntityTypes[] = {"LOC", "MISC", "ORG",
                                                    "PER"};

bool is_entity_type(std::string_view type);

/// True for "O" and "(B|I)-(PER|LOC|ORG|MISC)".
bool is_valid_label(std::string_view label);

/// Reads a CoNLL-style file. Blank lines separate sentences and
/// `-DOCSTART-` lines are dropped. Labels are kept as read.
LabeledCorpus read_conll(std::istream& in, const ColumnSpec& spec);

/// Writes tokens back in the column layout of `corpus.column_spec`. Columns
/// not mapped by the spec are written as "_". When `predictions` is given it
/// is appended as a final column.
void write_conll(const LabeledCorpus& corpus, std::ostream& out,
                 const std::vector<std::vector<std::string>>* predictions =
                     nullptr);

/// Reads the last column of every non-blank line (the prediction column
/// written by `tag`), grouped into sentences.
std::vector<std::vector<std::string>> read_label_column(std::istream& in);

/// Rewrites labels into BIO2. Entity spans are preserved exactly.
LabeledCorpus normalize_tag_scheme(const LabeledCorpus& corpus,
                                   TagScheme source);

/// Label-sequence level conversion used by normalize_tag_scheme.
std::vector<std::string> to_bio2(const std::vector<std::string>& labels,
                                 TagScheme source);

using PlainCorpus = std::vector<std::vector<std::string>>;

/// One sentence per line, whitespace-run tokenization, empty lines skipped.
/// Throws DataError with the byte offset on invalid UTF-8.
PlainCorpus tokenize_plain(std::istream& in);

/// Returns the byte offset of the first invalid UTF-8 sequence, if any.
std::optional<std::size_t> find_invalid_utf8(std::string_view text);

// ---------------------------------------------------------------------------
// Vocabulary

inline constexpr std::string_view kUnknownWord = "<unk>";
inline constexpr std::string_view kDefaultBoundary = "<s>";

struct Bigram {
  std::uint32_t left;
  std::uint32_t right;
  std::uint64_t count;

  friend bool operator==(const Bigram&, const Bigram&) = default;
};

/// Thresholded word counts with bigram statistics. Ids are dense and follow
/// descending count, ties broken by lexicographic word order. The unknown
/// symbol is present only if some token fell below the threshold; the
/// boundary symbol only if one was requested.
class Vocabulary {
 public:
  struct Entry {
    std::string word;
    std::uint64_t count = 0;
  };

  std::size_t size() const { return entries_.size(); }
  const Entry& entry(std::size_t id) const { return entries_[id]; }
  const std::vector<Entry>& entries() const { return entries_; }
  std::optional<std::uint32_t> find(std::string_view word) const;

  std::uint64_t unigram_total() const { return unigram_total_; }
  std::uint64_t min_count() const { return min_count_; }
  std::optional<std::uint32_t> unk_id() const { return unk_id_; }
  std::optional<std::uint32_t> boundary_id() const { return boundary_id_; }

  /// Sorted by (left, right).
  const std::vector<Bigram>& bigrams() const { return bigrams_; }
  std::uint64_t bigram_total() const;

  /// Builds from explicit word counts and bigrams over those words. Used for
  /// tests and for loading precomputed statistics.
  static Vocabulary from_counts(
      const std::vector<std::pair<std::string, std::uint64_t>>& counts,
      const std::vector<std::tuple<std::string, std::string, std::uint64_t>>&
          bigrams);

  /// `word<TAB>count`, descending count then word.
  void write_tsv(std::ostream& out) const;

 private:
  friend Vocabulary build_vocabulary(const PlainCorpus&, std::uint64_t,
                                     std::string_view);
  void index();

  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::uint32_t> ids_;
  std::vector<Bigram> bigrams_;
  std::uint64_t unigram_total_ = 0;
  std::uint64_t min_count_ = 1;
  std::optional<std::uint32_t> unk_id_;
  std::optional<std::uint32_t> boundary_id_;
};

/// Counts words, replaces those below `min_count` by the unknown symbol and
/// counts bigrams within sentences. An empty `boundary` disables sentence
/// framing; otherwise each sentence is framed as `<b> w1 ... wn <b>`.
Vocabulary build_vocabulary(const PlainCorpus& sentences,
                            std::uint64_t min_count,
                            std::string_view boundary = kDefaultBoundary);

}  // namespace nerclust
