#include "absa/eval.h"

#include <algorithm>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "absa/random.h"
#include "absa/textio.h"

namespace absa {

PrfReport PrfReport::from_counts(long long tp, long long fp, long long fn) {
  PrfReport r;
  r.tp = tp;
  r.fp = fp;
  r.fn = fn;
  r.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  r.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  r.f1 = r.precision + r.recall > 0
             ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
             : 0.0;
  return r;
}

PrfReport span_prf(std::span<const SpanSet> gold, std::span<const SpanSet> pred,
                   const SpanScoring& scoring) {
  if (gold.size() != pred.size()) {
    throw std::invalid_argument("span_prf: " + std::to_string(gold.size()) +
                                " gold sentences vs " + std::to_string(pred.size()) +
                                " predicted");
  }
  long long tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    std::set<AspectSpan> g, p;
    for (const auto& s : gold[i]) {
      if (s.length() >= scoring.min_length) g.insert(s);
    }
    for (const auto& s : pred[i]) {
      if (s.length() >= scoring.min_length) p.insert(s);
    }
    for (const auto& s : p) {
      if (g.count(s)) ++tp;
      else ++fp;
    }
    for (const auto& s : g) {
      if (!p.count(s)) ++fn;
    }
  }
  return PrfReport::from_counts(tp, fp, fn);
}

std::vector<Fold> kfold(std::size_t n, int k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("kfold: k must be >= 2");
  if (static_cast<std::size_t>(k) > n) {
    throw std::invalid_argument("kfold: k = " + std::to_string(k) + " exceeds " +
                                std::to_string(n) + " items");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);
  std::vector<Fold> folds(k);
  const std::size_t base = n / k;
  const std::size_t extra = n % k;
  std::size_t pos = 0;
  for (int f = 0; f < k; ++f) {
    const std::size_t size = base + (static_cast<std::size_t>(f) < extra ? 1 : 0);
    folds[f].test.assign(order.begin() + pos, order.begin() + pos + size);
    std::sort(folds[f].test.begin(), folds[f].test.end());
    pos += size;
  }
  for (int f = 0; f < k; ++f) {
    std::vector<bool> in_test(n, false);
    for (auto i : folds[f].test) in_test[i] = true;
    for (std::size_t i = 0; i < n; ++i) {
      if (!in_test[i]) folds[f].train.push_back(i);
    }
  }
  return folds;
}

std::string_view subjectivity_name(Subjectivity s) {
  return s == Subjectivity::kSubjective ? "subjective" : "objective";
}

Subjectivity parse_subjectivity(std::string_view s) {
  const auto l = to_lower(s);
  if (l == "subjective" || l == "subj" || l == "1") return Subjectivity::kSubjective;
  if (l == "objective" || l == "obj" || l == "0") return Subjectivity::kObjective;
  throw std::invalid_argument("unknown subjectivity label '" + std::string(s) + "'");
}

std::size_t ClassificationReport::total() const {
  return static_cast<std::size_t>(confusion[0][0] + confusion[0][1] + confusion[1][0] +
                                  confusion[1][1]);
}

ClassificationReport classification_report(std::span<const Subjectivity> gold,
                                           std::span<const Subjectivity> pred) {
  if (gold.size() != pred.size()) {
    throw std::invalid_argument("classification_report: length mismatch");
  }
  ClassificationReport r;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    ++r.confusion[static_cast<int>(gold[i])][static_cast<int>(pred[i])];
  }
  const auto n = static_cast<double>(gold.size());
  r.accuracy = gold.empty() ? 0.0 : (r.confusion[0][0] + r.confusion[1][1]) / n;
  r.subjective = PrfReport::from_counts(r.confusion[0][0], r.confusion[1][0], r.confusion[0][1]);
  r.objective = PrfReport::from_counts(r.confusion[1][1], r.confusion[0][1], r.confusion[1][0]);
  return r;
}

namespace {

std::string pct(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(2) << 100.0 * v;
  return s.str();
}

}  // namespace

void write_report(std::ostream& out, const PrfReport& r, const std::string& title) {
  out << title << '\n';
  out << std::left << std::setw(12) << "Precision" << std::setw(12) << "Recall" << std::setw(12)
      << "F-Score" << std::setw(8) << "TP" << std::setw(8) << "FP" << "FN\n";
  out << std::setw(12) << pct(r.precision) << std::setw(12) << pct(r.recall) << std::setw(12)
      << pct(r.f1) << std::setw(8) << r.tp << std::setw(8) << r.fp << r.fn << '\n';
  out << std::right;
  out << "precision=" << format_double(r.precision) << '\n'
      << "recall=" << format_double(r.recall) << '\n'
      << "f1=" << format_double(r.f1) << '\n'
      << "tp=" << r.tp << '\n'
      << "fp=" << r.fp << '\n'
      << "fn=" << r.fn << '\n';
}

void write_report(std::ostream& out, const ClassificationReport& r, const std::string& title) {
  out << title << '\n';
  out << std::left << std::setw(12) << "Class" << std::setw(12) << "Precision" << std::setw(12)
      << "Recall" << "F-Score\n";
  out << std::setw(12) << "subjective" << std::setw(12) << pct(r.subjective.precision)
      << std::setw(12) << pct(r.subjective.recall) << pct(r.subjective.f1) << '\n';
  out << std::setw(12) << "objective" << std::setw(12) << pct(r.objective.precision)
      << std::setw(12) << pct(r.objective.recall) << pct(r.objective.f1) << '\n';
  out << "accuracy " << pct(r.accuracy) << '\n' << std::right;
  out << "accuracy=" << format_double(r.accuracy) << '\n'
      << "subjective_f1=" << format_double(r.subjective.f1) << '\n'
      << "objective_f1=" << format_double(r.objective.f1) << '\n'
      << "confusion=" << r.confusion[0][0] << ',' << r.confusion[0][1] << ','
      << r.confusion[1][0] << ',' << r.confusion[1][1] << '\n';
}

}  // namespace absa
