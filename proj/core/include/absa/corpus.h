#ifndef ABSA_CORPUS_H_
#define ABSA_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "absa/matrix.h"

namespace absa {

// Raised for malformed input files. The message always names the source and
// the offending line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : std::runtime_error(source + ":" + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Six coarse part-of-speech classes plus a catch-all.
enum class Pos : std::uint8_t {
  kNoun = 0,
  kVerb,
  kAdjective,
  kAdverb,
  kPreposition,
  kConjunction,
  kOther,
};
inline constexpr int kNumPosClasses = 6;  // one-hot width; kOther is all-zero

std::string_view pos_name(Pos pos);

// Maps a coarse class name ("noun", "adj", ...) or a Penn Treebank tag
// ("NNS", "VBD", ...) to a class. Anything unrecognised becomes kOther.
Pos parse_pos(std::string_view label);

// Projection table from an external tagset onto the coarse classes. Loaded
// from "TAG<TAB>class" lines; falls back to parse_pos for unlisted tags.
class PosMap {
 public:
  PosMap() = default;
  static PosMap load(const std::filesystem::path& path);
  void add(std::string tag, Pos pos) { map_[std::move(tag)] = pos; }
  Pos project(std::string_view tag) const;

 private:
  std::map<std::string, Pos, std::less<>> map_;
};

enum class Tag : std::uint8_t { kBegin = 0, kInside = 1, kOutside = 2 };
inline constexpr int kNumTags = 3;

std::string_view tag_name(Tag tag);
// Accepts "B-A", "I-A", "O". Returns nullopt for anything else.
std::optional<Tag> parse_tag(std::string_view s);

struct Token {
  std::string surface;
  Pos pos = Pos::kOther;
  std::optional<int> head;  // 0-based index of the governing token
  std::string deprel;       // "_" or empty when unparsed
  std::optional<Tag> tag;
};

struct Sentence {
  std::vector<Token> tokens;
  std::string doc_id;
  int position = 0;  // time instant within the document

  std::size_t size() const { return tokens.size(); }
  bool has_dependencies() const;
  bool fully_tagged() const;
  std::vector<Tag> tags() const;  // requires fully_tagged()
  std::string text() const;
};

struct Document {
  std::string id;
  std::vector<Sentence> sentences;
};

// Half-open token range [start, end).
struct AspectSpan {
  int start = 0;
  int end = 0;

  int length() const { return end - start; }
  friend auto operator<=>(const AspectSpan&, const AspectSpan&) = default;
};

using SpanSet = std::vector<AspectSpan>;  // sorted, non-overlapping

// Reads the tab-separated parsed-corpus format:
//   surface  pos  head  deprel  tag
// head is 1-based (0 = root, "_" = unparsed), tag is B-A/I-A/O or "_".
// Blank lines end sentences and "# doc <id>" lines start documents.
std::vector<Document> parse_corpus(std::istream& in, const std::string& source);
std::vector<Document> load_parsed_corpus(const std::filesystem::path& path);
void write_corpus(std::ostream& out, std::span<const Document> docs);

std::vector<Sentence> flatten(std::span<const Document> docs);

// Relabels dependency relations through a "from<TAB>to" mapping file, e.g.
// nn -> compound, obj -> dobj.
using DeprelMap = std::map<std::string, std::string, std::less<>>;
DeprelMap load_deprel_map(const std::filesystem::path& path);
void normalize_deprels(std::vector<Document>& docs, const DeprelMap& map);

// IOB2 chunk codecs. An I-A with no open chunk starts a new chunk.
SpanSet iob2_decode(std::span<const Tag> tags);
std::vector<Tag> iob2_encode(std::span<const AspectSpan> spans, int len);

// Sorts and unifies overlapping spans into their covers.
SpanSet normalize_spans(SpanSet spans);

enum class UnkPolicy { kZero, kSeededHash };

// word -> d-dimensional vector. Lookup never fails: absent words get a zero
// vector or a deterministic hash-seeded vector in [-0.01, 0.01].
class EmbeddingTable {
 public:
  explicit EmbeddingTable(int dim, UnkPolicy policy = UnkPolicy::kSeededHash,
                          std::uint64_t seed = 0);

  int dim() const { return dim_; }
  UnkPolicy unk_policy() const { return policy_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t size() const { return entries_.size(); }

  bool contains(std::string_view word) const;
  void set(const std::string& word, std::vector<double> vec);
  std::vector<double> lookup(std::string_view word) const;
  // Writes the vector for word into out (out.size() must equal dim()).
  void lookup_into(std::string_view word, std::span<double> out) const;

  // Words in lexicographic order.
  std::vector<std::string> words() const;

  static std::vector<double> hashed_vector(std::string_view word, int dim,
                                           std::uint64_t seed, double scale);

 private:
  int dim_;
  UnkPolicy policy_;
  std::uint64_t seed_;
  std::map<std::string, std::vector<double>, std::less<>> entries_;
};

// Text format "word v1 ... vd", one word per line. An optional leading
// "<count> <dim>" header line is skipped.
EmbeddingTable parse_embeddings(std::istream& in, const std::string& source, int dim,
                                UnkPolicy policy = UnkPolicy::kSeededHash,
                                std::uint64_t seed = 0);
EmbeddingTable load_embeddings(const std::filesystem::path& path, int dim,
                               UnkPolicy policy = UnkPolicy::kSeededHash,
                               std::uint64_t seed = 0);
void write_embeddings(std::ostream& out, const EmbeddingTable& table);

enum class LexiconKind { kSubjectivityClues, kSentimentConcepts, kStopWords };

// Ordered (word, pos) entries; insertion order is the rank order of the file.
// Words are stored lowercased. Entries may be multiword phrases.
class Lexicon {
 public:
  struct Entry {
    std::string word;
    Pos pos = Pos::kOther;
    friend auto operator<=>(const Entry&, const Entry&) = default;
  };

  explicit Lexicon(LexiconKind kind = LexiconKind::kStopWords) : kind_(kind) {}

  LexiconKind kind() const { return kind_; }
  // Returns false when the pair was already present.
  bool add(std::string_view word, Pos pos = Pos::kOther);
  bool contains(std::string_view word) const;
  bool contains(std::string_view word, Pos pos) const;
  std::size_t size() const { return entries_.size(); }
  const std::vector<Entry>& entries() const { return entries_; }
  // Distinct words in rank order.
  std::vector<std::string> words() const;

 private:
  LexiconKind kind_;
  std::vector<Entry> entries_;
  std::set<Entry> seen_;
  std::set<std::string, std::less<>> words_;
};

// "word<TAB>pos" per line; the pos column is optional. '#' starts a comment.
Lexicon load_lexicon(const std::filesystem::path& path, LexiconKind kind);
Lexicon parse_lexicon(std::istream& in, const std::string& source, LexiconKind kind);

std::string to_lower(std::string_view s);

// Word-frequency time series: row i is vocabulary entry i, column t is the
// bag of words of sentence t.
struct BowTimeSeries {
  std::vector<std::string> vocab;
  Matrix counts;  // vocab.size() x T

  std::size_t num_vars() const { return counts.rows(); }
  std::size_t num_instants() const { return counts.cols(); }
};

// Matches vocabulary entries (single words or space-separated phrases)
// against a sentence, case-insensitively. Each inner vector lists the
// vocabulary indices whose occurrence starts at that token position.
class VocabMatcher {
 public:
  explicit VocabMatcher(std::span<const std::string> vocab);
  std::vector<std::vector<int>> match(const Sentence& sentence) const;
  std::size_t size() const { return size_; }

 private:
  std::size_t size_ = 0;
  // first word -> (index, full phrase tokens)
  std::unordered_map<std::string, std::vector<std::pair<int, std::vector<std::string>>>>
      by_first_;
};

BowTimeSeries build_bow_series(std::span<const Sentence> sentences,
                               std::span<const std::string> vocab);

// Whitespace tokenizer with punctuation split off, for raw toy text.
std::vector<std::string> simple_tokenize(std::string_view text);

}  // namespace absa

#endif  // ABSA_CORPUS_H_
