#include "absa/corpus.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "absa/random.h"
#include "absa/textio.h"

namespace absa {

namespace {

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

}  // namespace

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view pos_name(Pos pos) {
  switch (pos) {
    case Pos::kNoun: return "noun";
    case Pos::kVerb: return "verb";
    case Pos::kAdjective: return "adjective";
    case Pos::kAdverb: return "adverb";
    case Pos::kPreposition: return "preposition";
    case Pos::kConjunction: return "conjunction";
    case Pos::kOther: return "other";
  }
  return "other";
}

Pos parse_pos(std::string_view label) {
  const std::string l = to_lower(label);
  if (l == "noun" || l == "n" || l == "propn") return Pos::kNoun;
  if (l == "verb" || l == "v" || l == "aux") return Pos::kVerb;
  if (l == "adjective" || l == "adj" || l == "a") return Pos::kAdjective;
  if (l == "adverb" || l == "adv" || l == "r") return Pos::kAdverb;
  if (l == "preposition" || l == "prep" || l == "adp") return Pos::kPreposition;
  if (l == "conjunction" || l == "conj" || l == "cconj" || l == "sconj") {
    return Pos::kConjunction;
  }
  // Penn Treebank tags.
  const std::string u(label);
  if (u.starts_with("NN")) return Pos::kNoun;
  if (u.starts_with("VB") || u == "MD") return Pos::kVerb;
  if (u.starts_with("JJ")) return Pos::kAdjective;
  if (u.starts_with("RB") || u == "WRB") return Pos::kAdverb;
  if (u == "IN" || u == "TO") return Pos::kPreposition;
  if (u == "CC") return Pos::kConjunction;
  return Pos::kOther;
}

PosMap PosMap::load(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  PosMap map;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto fields = split_fields(t);
    if (fields.size() != 2) {
      throw ParseError(path.string(), lineno, "expected TAG<TAB>class");
    }
    map.add(std::string(fields[0]), parse_pos(fields[1]));
  }
  return map;
}

Pos PosMap::project(std::string_view tag) const {
  if (auto it = map_.find(tag); it != map_.end()) return it->second;
  return parse_pos(tag);
}

std::string_view tag_name(Tag tag) {
  switch (tag) {
    case Tag::kBegin: return "B-A";
    case Tag::kInside: return "I-A";
    case Tag::kOutside: return "O";
  }
  return "O";
}

std::optional<Tag> parse_tag(std::string_view s) {
  if (s == "B-A") return Tag::kBegin;
  if (s == "I-A") return Tag::kInside;
  if (s == "O") return Tag::kOutside;
  return std::nullopt;
}

bool Sentence::has_dependencies() const {
  return std::any_of(tokens.begin(), tokens.end(), [](const Token& t) {
    return t.head.has_value() || (!t.deprel.empty() && t.deprel != "_");
  });
}

bool Sentence::fully_tagged() const {
  return std::all_of(tokens.begin(), tokens.end(),
                     [](const Token& t) { return t.tag.has_value(); });
}

std::vector<Tag> Sentence::tags() const {
  std::vector<Tag> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (!t.tag) throw std::logic_error("sentence is not fully tagged");
    out.push_back(*t.tag);
  }
  return out;
}

std::string Sentence::text() const {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t.surface;
  }
  return out;
}

std::vector<Document> parse_corpus(std::istream& in, const std::string& source) {
  std::vector<Document> docs;
  Sentence current;
  std::vector<std::size_t> token_lines;
  std::vector<long long> raw_heads;

  auto ensure_doc = [&]() -> Document& {
    if (docs.empty()) docs.push_back(Document{"0", {}});
    return docs.back();
  };
  auto flush = [&]() {
    if (current.tokens.empty()) return;
    const auto n = static_cast<long long>(current.tokens.size());
    for (std::size_t i = 0; i < current.tokens.size(); ++i) {
      const long long h = raw_heads[i];
      if (h < 0) continue;  // unparsed
      if (h > n) {
        throw ParseError(source, token_lines[i],
                         "head index " + std::to_string(h) + " outside sentence of " +
                             std::to_string(n) + " tokens");
      }
      if (h == 0) continue;  // root
      if (h - 1 == static_cast<long long>(i)) {
        throw ParseError(source, token_lines[i], "token is its own head");
      }
      current.tokens[i].head = static_cast<int>(h - 1);
    }
    Document& doc = ensure_doc();
    current.doc_id = doc.id;
    current.position = static_cast<int>(doc.sentences.size());
    doc.sentences.push_back(std::move(current));
    current = Sentence{};
    token_lines.clear();
    raw_heads.clear();
  };

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto t = trim(line);
    if (t.empty()) {
      flush();
      continue;
    }
    if (t.front() == '#') {
      const auto fields = split_fields(t.substr(1));
      if (fields.size() >= 2 && fields[0] == "doc") {
        flush();
        docs.push_back(Document{std::string(fields[1]), {}});
      }
      continue;
    }
    const auto fields = split_fields(t);
    if (fields.size() != 5) {
      throw ParseError(source, lineno,
                       "expected 5 columns (surface pos head deprel tag), got " +
                           std::to_string(fields.size()));
    }
    Token tok;
    tok.surface = std::string(fields[0]);
    tok.pos = parse_pos(fields[1]);
    long long head = -1;
    if (fields[2] != "_") {
      const auto h = parse_int(fields[2]);
      if (!h || *h < 0) {
        throw ParseError(source, lineno, "malformed head index '" +
                                             std::string(fields[2]) + "'");
      }
      head = *h;
    }
    tok.deprel = std::string(fields[3]);
    if (fields[4] != "_") {
      tok.tag = parse_tag(fields[4]);
      if (!tok.tag) {
        throw ParseError(source, lineno,
                         "unknown IOB2 tag '" + std::string(fields[4]) + "'");
      }
    }
    current.tokens.push_back(std::move(tok));
    token_lines.push_back(lineno);
    raw_heads.push_back(head);
  }
  flush();
  return docs;
}

std::vector<Document> load_parsed_corpus(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return parse_corpus(in, path.string());
}

void write_corpus(std::ostream& out, std::span<const Document> docs) {
  bool first = true;
  for (const auto& doc : docs) {
    if (!first) out << '\n';
    first = false;
    out << "# doc " << doc.id << '\n';
    for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
      if (s > 0) out << '\n';
      for (const auto& tok : doc.sentences[s].tokens) {
        out << tok.surface << '\t' << pos_name(tok.pos) << '\t'
            << (tok.head ? std::to_string(*tok.head + 1)
                         : (tok.deprel.empty() || tok.deprel == "_" ? "_" : "0"))
            << '\t' << (tok.deprel.empty() ? "_" : tok.deprel) << '\t'
            << (tok.tag ? tag_name(*tok.tag) : "_") << '\n';
      }
    }
  }
}

std::vector<Sentence> flatten(std::span<const Document> docs) {
  std::vector<Sentence> out;
  for (const auto& d : docs) out.insert(out.end(), d.sentences.begin(), d.sentences.end());
  return out;
}

DeprelMap load_deprel_map(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  DeprelMap map;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto fields = split_fields(t);
    if (fields.size() != 2) throw ParseError(path.string(), lineno, "expected from<TAB>to");
    map[std::string(fields[0])] = std::string(fields[1]);
  }
  return map;
}

void normalize_deprels(std::vector<Document>& docs, const DeprelMap& map) {
  for (auto& d : docs) {
    for (auto& s : d.sentences) {
      for (auto& t : s.tokens) {
        if (auto it = map.find(t.deprel); it != map.end()) t.deprel = it->second;
      }
    }
  }
}

SpanSet iob2_decode(std::span<const Tag> tags) {
  SpanSet spans;
  int open = -1;
  const int n = static_cast<int>(tags.size());
  for (int i = 0; i < n; ++i) {
    switch (tags[i]) {
      case Tag::kBegin:
        if (open >= 0) spans.push_back({open, i});
        open = i;
        break;
      case Tag::kInside:
        if (open < 0) open = i;  // orphan I-A starts a chunk
        break;
      case Tag::kOutside:
        if (open >= 0) spans.push_back({open, i});
        open = -1;
        break;
    }
  }
  if (open >= 0) spans.push_back({open, n});
  return spans;
}

std::vector<Tag> iob2_encode(std::span<const AspectSpan> spans, int len) {
  if (len < 0) throw std::invalid_argument("negative sentence length");
  std::vector<Tag> tags(static_cast<std::size_t>(len), Tag::kOutside);
  for (const auto& s : spans) {
    if (s.start < 0 || s.end > len || s.start >= s.end) {
      throw std::invalid_argument("span [" + std::to_string(s.start) + "," +
                                  std::to_string(s.end) + ") out of range for length " +
                                  std::to_string(len));
    }
    for (int i = s.start; i < s.end; ++i) {
      if (tags[i] != Tag::kOutside) {
        throw std::invalid_argument("overlapping spans at token " + std::to_string(i));
      }
      tags[i] = i == s.start ? Tag::kBegin : Tag::kInside;
    }
  }
  return tags;
}

SpanSet normalize_spans(SpanSet spans) {
  std::sort(spans.begin(), spans.end());
  SpanSet out;
  for (const auto& s : spans) {
    if (!out.empty() && s.start < out.back().end) {
      out.back().end = std::max(out.back().end, s.end);
    } else {
      out.push_back(s);
    }
  }
  return out;
}

EmbeddingTable::EmbeddingTable(int dim, UnkPolicy policy, std::uint64_t seed)
    : dim_(dim), policy_(policy), seed_(seed) {
  if (dim <= 0) throw std::invalid_argument("embedding dimension must be positive");
}

bool EmbeddingTable::contains(std::string_view word) const {
  return entries_.find(word) != entries_.end();
}

void EmbeddingTable::set(const std::string& word, std::vector<double> vec) {
  if (static_cast<int>(vec.size()) != dim_) {
    throw std::invalid_argument("vector for '" + word + "' has length " +
                                std::to_string(vec.size()) + ", expected " +
                                std::to_string(dim_));
  }
  entries_[word] = std::move(vec);
}

std::vector<double> EmbeddingTable::hashed_vector(std::string_view word, int dim,
                                                  std::uint64_t seed, double scale) {
  std::vector<double> v(static_cast<std::size_t>(dim));
  std::uint64_t state = hash_string(word, seed);
  for (auto& x : v) {
    state = mix64(state);
    const double u = static_cast<double>(state >> 11) * 0x1.0p-53;
    x = scale * (2.0 * u - 1.0);
  }
  return v;
}

void EmbeddingTable::lookup_into(std::string_view word, std::span<double> out) const {
  if (static_cast<int>(out.size()) != dim_) {
    throw std::invalid_argument("lookup_into: output has wrong length");
  }
  if (auto it = entries_.find(word); it != entries_.end()) {
    std::copy(it->second.begin(), it->second.end(), out.begin());
    return;
  }
  if (policy_ == UnkPolicy::kZero) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  const auto v = hashed_vector(word, dim_, seed_, 0.01);
  std::copy(v.begin(), v.end(), out.begin());
}

std::vector<double> EmbeddingTable::lookup(std::string_view word) const {
  std::vector<double> v(static_cast<std::size_t>(dim_));
  lookup_into(word, v);
  return v;
}

std::vector<std::string> EmbeddingTable::words() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [w, _] : entries_) out.push_back(w);
  return out;
}

EmbeddingTable parse_embeddings(std::istream& in, const std::string& source, int dim,
                                UnkPolicy policy, std::uint64_t seed) {
  EmbeddingTable table(dim, policy, seed);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty()) continue;
    const auto fields = split_fields(t, " \t");
    if (lineno == 1 && fields.size() == 2 && parse_int(fields[0]) &&
        parse_int(fields[1]) == dim) {
      continue;  // word2vec-style header
    }
    const std::string word(fields[0]);
    if (static_cast<int>(fields.size()) - 1 != dim) {
      throw ParseError(source, lineno,
                       "word '" + word + "' has " + std::to_string(fields.size() - 1) +
                           " values, expected " + std::to_string(dim));
    }
    std::vector<double> vec(static_cast<std::size_t>(dim));
    for (int i = 0; i < dim; ++i) {
      const auto v = parse_double(fields[i + 1]);
      if (!v) {
        throw ParseError(source, lineno, "word '" + word + "' has a malformed value");
      }
      vec[i] = *v;
    }
    table.set(word, std::move(vec));
  }
  return table;
}

EmbeddingTable load_embeddings(const std::filesystem::path& path, int dim,
                               UnkPolicy policy, std::uint64_t seed) {
  auto in = open_or_throw(path);
  return parse_embeddings(in, path.string(), dim, policy, seed);
}

void write_embeddings(std::ostream& out, const EmbeddingTable& table) {
  for (const auto& w : table.words()) {
    out << w;
    for (double x : table.lookup(w)) out << ' ' << format_double(x);
    out << '\n';
  }
}

bool Lexicon::add(std::string_view word, Pos pos) {
  Entry e{to_lower(word), pos};
  if (!seen_.insert(e).second) return false;
  words_.insert(e.word);
  entries_.push_back(std::move(e));
  return true;
}

bool Lexicon::contains(std::string_view word) const {
  return words_.find(to_lower(word)) != words_.end();
}

bool Lexicon::contains(std::string_view word, Pos pos) const {
  return seen_.count(Entry{to_lower(word), pos}) > 0;
}

std::vector<std::string> Lexicon::words() const {
  std::vector<std::string> out;
  std::set<std::string, std::less<>> emitted;
  for (const auto& e : entries_) {
    if (emitted.insert(e.word).second) out.push_back(e.word);
  }
  return out;
}

Lexicon parse_lexicon(std::istream& in, const std::string& source, LexiconKind kind) {
  Lexicon lex(kind);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto fields = split_exact(t, '\t');
    if (fields.size() > 2 || trim(fields[0]).empty()) {
      throw ParseError(source, lineno, "expected word<TAB>pos");
    }
    const Pos pos = fields.size() == 2 ? parse_pos(trim(fields[1])) : Pos::kOther;
    lex.add(trim(fields[0]), pos);
  }
  return lex;
}

Lexicon load_lexicon(const std::filesystem::path& path, LexiconKind kind) {
  auto in = open_or_throw(path);
  return parse_lexicon(in, path.string(), kind);
}

VocabMatcher::VocabMatcher(std::span<const std::string> vocab) : size_(vocab.size()) {
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    std::vector<std::string> parts;
    for (auto f : split_fields(vocab[i], " ")) parts.push_back(to_lower(f));
    if (parts.empty()) continue;
    by_first_[parts.front()].emplace_back(static_cast<int>(i), std::move(parts));
  }
}

std::vector<std::vector<int>> VocabMatcher::match(const Sentence& sentence) const {
  const std::size_t n = sentence.tokens.size();
  std::vector<std::string> lowered(n);
  for (std::size_t i = 0; i < n; ++i) lowered[i] = to_lower(sentence.tokens[i].surface);
  std::vector<std::vector<int>> hits(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto it = by_first_.find(lowered[i]);
    if (it == by_first_.end()) continue;
    for (const auto& [index, parts] : it->second) {
      if (i + parts.size() > n) continue;
      bool ok = true;
      for (std::size_t k = 1; k < parts.size() && ok; ++k) ok = lowered[i + k] == parts[k];
      if (ok) hits[i].push_back(index);
    }
  }
  return hits;
}

BowTimeSeries build_bow_series(std::span<const Sentence> sentences,
                               std::span<const std::string> vocab) {
  if (vocab.empty()) throw std::invalid_argument("build_bow_series: empty vocabulary");
  BowTimeSeries series;
  series.vocab.assign(vocab.begin(), vocab.end());
  series.counts = Matrix(vocab.size(), sentences.size());
  const VocabMatcher matcher(vocab);
  for (std::size_t t = 0; t < sentences.size(); ++t) {
    for (const auto& at : matcher.match(sentences[t])) {
      for (int v : at) series.counts(v, t) += 1.0;
    }
  }
  return series;
}

std::vector<std::string> simple_tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto push = [&] {
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  for (char c : text) {
    const auto uc = static_cast<unsigned char>(c);
    if (std::isspace(uc)) {
      push();
    } else if (std::ispunct(uc) && c != '\'' && c != '-') {
      push();
      out.emplace_back(1, c);
    } else {
      cur += c;
    }
  }
  push();
  return out;
}

}  // namespace absa
