#ifndef ABSA_TAGGER_H_
#define ABSA_TAGGER_H_

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "absa/corpus.h"
#include "absa/matrix.h"
#include "absa/neural.h"

namespace absa {

// log(sum(exp(xs))) with max-shift. Throws on empty input. An all -inf input
// returns -inf.
double logadd(std::span<const double> xs);

// Tag-transition scores of a first-order chain over K tags. start(0, k)
// scores a path that begins in tag k; A(i, j) scores the move i -> j.
struct Transitions {
  Matrix A;      // K x K
  Matrix start;  // 1 x K

  Transitions() = default;
  explicit Transitions(int num_tags) : A(num_tags, num_tags), start(1, num_tags) {}
  int num_tags() const { return static_cast<int>(A.rows()); }
};

// Forward values delta(t, k) = logadd over all paths that end in tag k at t,
// and Viterbi backpointers.
struct ScoreLattice {
  Matrix delta;
  std::vector<std::vector<int>> back;  // T x K; back[0] unused
};

// H is T x K token scores. Paths are tag indices in [0, K).
double sentence_score(const Matrix& H, const Transitions& trans, std::span<const int> path);
ScoreLattice forward_lattice(const Matrix& H, const Transitions& trans);
double log_partition(const Matrix& H, const Transitions& trans);

struct NllResult {
  double loss = 0.0;
  Matrix dH;      // T x K
  Matrix dA;      // K x K
  Matrix dstart;  // 1 x K
};

// -log p(path | H) and its gradients via forward-backward marginals.
NllResult structured_nll(const Matrix& H, const Transitions& trans, std::span<const int> path);

// Best-scoring path. On ties the lower tag index wins, both when choosing a
// predecessor and when choosing the final tag.
std::vector<int> viterbi(const Matrix& H, const Transitions& trans);

int tag_index(Tag tag);
Tag tag_from_index(int index);

struct TaggerConfig {
  int embedding_dim = 300;
  int half_window = 2;  // +-2 tokens => 5-token window
  int conv1_maps = 100;
  int conv1_width = 2;
  int conv2_maps = 50;
  int conv2_width = 3;
  int pool_size = 2;
  int pool_stride = 1;
  double init_scale = 0.01;
  bool hard_constraints = false;  // forbid O -> I-A and start -> I-A
  TrainConfig train{0.02, 30, 0.5, 1, 3.0};

  int feature_width() const { return embedding_dim + kNumPosClasses; }
  int window_size() const { return 2 * half_window + 1; }
  void validate() const;
};

// 5-window feature grid for token t: one row per offset -2..+2, each row the
// token's embedding followed by its 6-slot one-hot POS. Offsets outside the
// sentence are all-zero PAD rows.
Matrix window_grid(const Sentence& sentence, int t, const EmbeddingTable& table,
                   int half_window = 2);
std::vector<double> window_features(const Sentence& sentence, int t,
                                    const EmbeddingTable& table, int half_window = 2);

class TaggerModel {
 public:
  TaggerModel() = default;
  // Builds the scorer for `config` with uniform(+-init_scale) weights.
  explicit TaggerModel(const TaggerConfig& config);

  const TaggerConfig& config() const { return config_; }
  Network& scorer() { return scorer_; }
  const Network& scorer() const { return scorer_; }
  Transitions& transitions() { return trans_; }
  const Transitions& transitions() const { return trans_; }
  // Transitions with forbidden moves set to -inf when hard constraints are on.
  Transitions effective_transitions() const;

  // T x K scores, inference mode.
  Matrix token_scores(const Sentence& sentence, const EmbeddingTable& table) const;

  // Trainable parameters: scorer parameters then A and start.
  std::vector<Param> params();
  void zero_grad();

  void write(std::ostream& out) const;
  static TaggerModel read(std::istream& in);
  void save(const std::filesystem::path& path) const;
  static TaggerModel load(const std::filesystem::path& path);

 private:
  TaggerConfig config_;
  Network scorer_;
  Transitions trans_;
  Matrix grad_A_, grad_start_;
};

// Loss and gradients for one sentence. Scores every token (dropout active
// when mode is kTrain), then backpropagates dH through each cached token
// trace. Gradients accumulate into the model.
double tagger_sentence_step(TaggerModel& model, const Sentence& sentence,
                            const EmbeddingTable& table, Mode mode, Rng* rng);

struct TrainReport {
  std::vector<double> epoch_loss;  // mean NLL on the training set after each epoch
};

using EpochCallback = std::function<void(int epoch, double loss)>;

// SGD on the structured NLL, one update per sentence. Sentence order is
// reshuffled every epoch from the config seed.
TaggerModel train_tagger(std::span<const Sentence> corpus, const EmbeddingTable& table,
                         const TaggerConfig& config, TrainReport* report = nullptr,
                         const EpochCallback& on_epoch = {});

struct TagResult {
  std::vector<Tag> tags;
  SpanSet spans;
};

TagResult tag(const TaggerModel& model, const Sentence& sentence, const EmbeddingTable& table);

}  // namespace absa

#endif  // ABSA_TAGGER_H_
