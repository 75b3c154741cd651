#ifndef ABSA_SUBJECTIVITY_H_
#define ABSA_SUBJECTIVITY_H_

#include <array>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "absa/cdbn.h"
#include "absa/corpus.h"
#include "absa/eval.h"
#include "absa/gbn.h"
#include "absa/neural.h"

namespace absa {

struct SubjectivityConfig {
  int window = 50;  // sentences are truncated or zero-padded to this many tokens
  int embedding_dim = 30;
  int maps = 100;
  std::vector<int> widths{3, 4, 5};
  int pool_size = 2;  // after every conv layer but the last, which pools globally
  double init_scale = 0.1;
  TrainConfig train{0.05, 30, 0.5, 1, std::nullopt};
  PretrainConfig pretrain{5, 0.01, 10, {}};
  LblOptions lbl;
  FilterOptions filter;
  bool skip_pretrain = false;

  void validate() const;
  // Rows reaching each conv layer, and the length entering the global pool.
  std::vector<std::size_t> layer_lengths() const;
};

struct LabeledSentence {
  Sentence sentence;
  Subjectivity label = Subjectivity::kObjective;
  bool labeled = true;  // false for "_" labels in unlabeled input
};

// "label<TAB>token token ..." per line. "# doc <id>" starts a document;
// blank lines are ignored. Labels accept subjective/objective (or subj/obj),
// and "_" marks an unlabeled sentence.
std::vector<LabeledSentence> parse_labeled_corpus(std::istream& in, const std::string& source);
std::vector<LabeledSentence> load_labeled_corpus(const std::filesystem::path& path);
void write_labeled_corpus(std::ostream& out, std::span<const LabeledSentence> corpus);

class SubjectivityModel {
 public:
  SubjectivityModel(const SubjectivityConfig& config, EmbeddingTable embedding);

  const SubjectivityConfig& config() const { return config_; }
  const EmbeddingTable& embedding() const { return embedding_; }
  Network& network() { return net_; }
  const Network& network() const { return net_; }

  // window x embedding_dim grid; tokens past the window are dropped, missing
  // rows are zero.
  Matrix embed(const Sentence& sentence) const;
  // (p_subjective, p_objective).
  std::array<double, 2> probabilities(const Sentence& sentence) const;

  void write(std::ostream& out) const;
  static SubjectivityModel read(std::istream& in);
  void save(const std::filesystem::path& path) const;
  static SubjectivityModel load(const std::filesystem::path& path);

 private:
  SubjectivityConfig config_;
  EmbeddingTable embedding_;
  Network net_;
};

struct SubjectivityReport {
  std::size_t pretrain_sentences = 0;  // size of the filtered multiset, 0 when skipped
  std::vector<std::vector<double>> pretrain_errors;  // [conv layer][epoch]
  std::vector<double> epoch_loss;  // mean cross-entropy on the corpus after each epoch
};

// Phase 1 (unless skipped or nothing survives filtering): the motif filter
// runs on each class separately, the selected sentences are pooled and the
// conv layers are pre-trained greedily as convolutional RBMs. Phase 2: SGD on
// softmax cross-entropy over the whole corpus. When `embeddings` is null the
// word vectors come from the log-bilinear initializer run on the corpus.
SubjectivityModel train_subjectivity(std::span<const LabeledSentence> corpus,
                                     const MotifSet& motifs, const SubjectivityConfig& config,
                                     const EmbeddingTable* embeddings = nullptr,
                                     SubjectivityReport* report = nullptr);

struct SubjectivityResult {
  Subjectivity label = Subjectivity::kObjective;
  std::array<double, 2> probabilities{0.5, 0.5};
};

// Subjective only when its probability is strictly larger.
Subjectivity decide(const std::array<double, 2>& probabilities);
SubjectivityResult classify(const SubjectivityModel& model, const Sentence& sentence);

}  // namespace absa

#endif  // ABSA_SUBJECTIVITY_H_
