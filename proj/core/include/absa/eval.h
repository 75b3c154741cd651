#ifndef ABSA_EVAL_H_
#define ABSA_EVAL_H_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "absa/corpus.h"

namespace absa {

struct PrfReport {
  long long tp = 0;
  long long fp = 0;
  long long fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  static PrfReport from_counts(long long tp, long long fp, long long fn);
};

struct SpanScoring {
  // Score only spans of at least this many tokens (2 gives the aspect-phrase
  // variant). Applied to gold and predicted spans alike.
  int min_length = 1;
};

// Exact-match chunk scoring: a predicted span counts as a true positive iff
// the same [start, end) span is in gold for that sentence.
PrfReport span_prf(std::span<const SpanSet> gold, std::span<const SpanSet> pred,
                   const SpanScoring& scoring = {});

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Seeded shuffle of 0..n-1 dealt into k test folds whose sizes differ by at
// most one.
std::vector<Fold> kfold(std::size_t n, int k, std::uint64_t seed);

enum class Subjectivity { kSubjective = 0, kObjective = 1 };
std::string_view subjectivity_name(Subjectivity s);
Subjectivity parse_subjectivity(std::string_view s);

struct ClassificationReport {
  // confusion[gold][pred], indexed by Subjectivity.
  long long confusion[2][2] = {{0, 0}, {0, 0}};
  double accuracy = 0.0;
  PrfReport subjective;
  PrfReport objective;
  std::size_t total() const;
};

ClassificationReport classification_report(std::span<const Subjectivity> gold,
                                           std::span<const Subjectivity> pred);

// Aligned table followed by key=value lines.
void write_report(std::ostream& out, const PrfReport& r, const std::string& title);
void write_report(std::ostream& out, const ClassificationReport& r, const std::string& title);

}  // namespace absa

#endif  // ABSA_EVAL_H_
