#ifndef ABSA_GBN_H_
#define ABSA_GBN_H_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "absa/corpus.h"
#include "absa/matrix.h"

namespace absa {

// A word variable observed `lag` instants before the child's instant.
struct NodeRef {
  int var = 0;
  int lag = 0;
  friend auto operator<=>(const NodeRef&, const NodeRef&) = default;
};

class SingularCovarianceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Linear-Gaussian conditional of one node given its parents:
//   x_i = mean + sum_j beta_j (x_j - mean_j) + noise, noise ~ N(0, cond_var).
struct NodeFit {
  std::vector<double> beta;
  std::vector<double> parent_means;
  double mean = 0.0;
  double cond_var = 0.0;  // ML residual variance (divides by n)
  double loglik = 0.0;    // Gaussian log-likelihood over the n aligned instants
  int num_instants = 0;
};

// Residual variances below this floor are clamped when evaluating the
// likelihood, so exact linear relations give a large finite score.
inline constexpr double kVarianceFloor = 1e-9;

// Fits node on its parents over the instants first_instant..T-1, reading
// (var, lag) at instant t from column t - lag. first_instant defaults to the
// largest lag involved. ridge is added to the diagonal of the centred parent
// Gram matrix; with ridge 0 a singular Gram throws SingularCovarianceError.
NodeFit fit_node(const BowTimeSeries& series, NodeRef node, std::span<const NodeRef> parents,
                 int first_instant = -1, double ridge = 0.0);

struct NetNode {
  int var = 0;
  std::vector<NodeRef> parents;
  NodeFit fit;
  double score = 0.0;  // penalized score that selected this parent set
};

// Order-R dynamic network: one lag-0 node per variable; parents are lagged
// copies (lag 1..R) of any variable or lag-0 variables with a smaller index.
struct GaussianNet {
  int order = 0;
  int max_parents = 0;
  std::vector<std::string> vars;
  std::vector<NetNode> nodes;  // nodes[i].var == i

  void write(std::ostream& out) const;
  static GaussianNet read(std::istream& in);
};

enum class StructureSearch { kAuto, kGreedy, kExhaustive };

struct StructureOptions {
  int order = 1;
  int max_parents = 2;
  double epsilon = 0.0;  // extra per-parent cost on top of the BIC penalty
  StructureSearch search = StructureSearch::kAuto;
  // kAuto enumerates every parent set when a node has at most this many
  // candidate sets, and falls back to greedy forward selection otherwise.
  std::size_t exhaustive_budget = 5000;
  double ridge_fallback = 1e-6;
};

// Parents a node may take: (v, lag) for lag 1..order and any v, plus (v, 0)
// for v < var. Listed lag-major, then by variable.
std::vector<NodeRef> candidate_parents(int var, int num_vars, int order);

// Penalized score of a parent set for `var`, fit over instants order..T-1:
// loglik - |parents| * (0.5 * log T + epsilon).
double structure_score(const BowTimeSeries& series, int var, std::span<const NodeRef> parents,
                       const StructureOptions& options, NodeFit* fit = nullptr);

// Learns the network over the variables of `series` (rows are assumed to be
// in clue-rank order). Throws if the series has no variables or too few
// instants.
GaussianNet learn_structure(const BowTimeSeries& series, const StructureOptions& options);

// Convenience: restricts the series to `candidates` (in the given order)
// before learning.
GaussianNet learn_structure(const BowTimeSeries& series,
                            std::span<const std::string> candidates,
                            const StructureOptions& options);

// The `top` lexicon entries occurring most often in the sentences, most
// frequent first (ties keep lexicon rank). Entries that never occur are left
// out; multiword entries count phrase occurrences.
std::vector<std::string> select_clue_words(std::span<const Sentence> sentences,
                                           const Lexicon& clues, std::size_t top = 50);

// A motif is a kernel over the variables at each lag: row 0 weights the words
// of the current sentence (1 for the child, beta for lag-0 parents) and row l
// weights the bag of words l sentences earlier.
struct Motif {
  int node = 0;
  double score = 0.0;  // per-instant log-likelihood
  Matrix kernel;       // (order+1) x num_vars
};

struct MotifSet {
  std::vector<std::string> vars;
  int order = 0;
  double threshold = 0.0;
  std::vector<Motif> motifs;  // score descending, ties by node index

  bool empty() const { return motifs.empty(); }
  void write(std::ostream& out) const;
  static MotifSet read(std::istream& in);
};

MotifSet extract_motifs(const GaussianNet& net, double tau);

struct FilterOptions {
  int window = 5;  // token window for the lag-0 row
};

// Per-sentence hit counts. weights[i] belongs to sentences[i]; the expanded
// multiset repeats sentence i weights[i] times.
struct FilterResult {
  std::vector<int> weights;
  std::vector<double> cutoffs;  // per motif: mean + 1 std of its responses
  std::vector<std::size_t> expanded() const;
};

// Response of motif m at window position p of sentence s: the lag-0 kernel
// row summed over the vocabulary hits of tokens p..p+window-1, plus each
// lagged row dotted with the bag of words of the sentence `lag` positions
// earlier in the same document (zero when that sentence is not in the input).
// Sentences shorter than the window have one position.
std::vector<double> motif_responses(const Motif& motif, const VocabMatcher& matcher,
                                    const Sentence& sentence,
                                    std::span<const std::vector<double>> previous_bows,
                                    int window);

FilterResult filter_sentences(std::span<const Sentence> sentences, const MotifSet& motifs,
                              const FilterOptions& options = {});

struct LblOptions {
  int dim = 30;
  int window = 5;
  int epochs = 10;
  double learning_rate = 0.05;
  std::uint64_t seed = 1;
};

// Context matrices C_1..C_w of the log-bilinear initializer.
struct LblModel {
  int dim = 0;
  int window = 0;
  std::vector<Matrix> context;  // window matrices of dim x dim
};

struct LblResult {
  LblModel model;
  EmbeddingTable table;
  std::vector<double> loss_trace;  // mean squared prediction error per epoch
};

// Predicts each word vector as sum_k C_k x_{i-k} over the preceding
// min(window, i) words of the sentence and trains C and the vectors by SGD on
// the squared error. Vectors start as unit-norm hash-seeded values and are
// projected back to unit norm after every update.
LblResult lbl_init(std::span<const Sentence> corpus, const LblOptions& options);

// Mean squared prediction error of the model over a corpus.
double lbl_loss(const LblModel& model, const EmbeddingTable& table,
                std::span<const Sentence> corpus);

}  // namespace absa

#endif  // ABSA_GBN_H_
