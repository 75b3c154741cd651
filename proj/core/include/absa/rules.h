#ifndef ABSA_RULES_H_
#define ABSA_RULES_H_

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "absa/corpus.h"

namespace absa {

// Dependency-pattern rules for marking aspect terms.
//   1   noun subject of a word carrying a lexicon-listed amod/advmod
//   2.1 subject of a verb modified by amod/advmod or governing an advcl
//   2.2 noun direct object of a verb, when not in the sentiment lexicon
//   3   noun complement of a copula
//   4   extend marks over noun-noun compounds
//   5   drop or trim stop-words
// Rules 2.x are skipped for sentences containing an auxiliary verb.
enum class Rule { k1, k2_1, k2_2, k3, k4, k5 };

std::string_view rule_name(Rule r);
// Accepts "1", "2.1", "2.2", "3", "4", "5".
Rule parse_rule(std::string_view s);
// Comma-separated list, e.g. "1,2.1,3".
std::set<Rule> parse_rule_list(std::string_view s);

// Canonical relation labels the rules understand. Other tagsets are mapped
// onto these with normalize_deprels().
namespace deprel {
inline constexpr std::string_view kNsubj = "nsubj";
inline constexpr std::string_view kAmod = "amod";
inline constexpr std::string_view kAdvmod = "advmod";
inline constexpr std::string_view kAdvcl = "advcl";
inline constexpr std::string_view kDobj = "dobj";
inline constexpr std::string_view kCop = "cop";
inline constexpr std::string_view kCompound = "compound";
inline constexpr std::string_view kDet = "det";
}  // namespace deprel

std::set<std::string, std::less<>> default_auxiliary_verbs();

struct RuleConfig {
  Lexicon sentiment_lexicon{LexiconKind::kSentimentConcepts};
  Lexicon stop_words{LexiconKind::kStopWords};
  std::set<std::string, std::less<>> auxiliary_verbs = default_auxiliary_verbs();
  std::set<Rule> enabled_rules{Rule::k1, Rule::k2_1, Rule::k2_2, Rule::k3, Rule::k4, Rule::k5};

  bool enabled(Rule r) const { return enabled_rules.count(r) > 0; }
};

// Rules 1-3. Every mark is a single-token span. Sentences without
// dependency annotations yield no marks.
SpanSet apply_rules(const Sentence& sentence, const RuleConfig& config);

// Rule 4: grows each span over compound edges to adjacent nouns until no span
// changes; overlapping results are unified.
SpanSet merge_compounds(const SpanSet& spans, const Sentence& sentence);

// Rule 5: single stop-word spans are dropped, longer spans lose stop-words at
// either boundary.
SpanSet prune_stopwords(const SpanSet& spans, const Sentence& sentence,
                        const Lexicon& stop_words);

// Union of both extractors followed by rule 4 and rule 5 (when enabled).
SpanSet ensemble(const SpanSet& cnn_spans, const SpanSet& lp_spans, const Sentence& sentence,
                 const RuleConfig& config);

}  // namespace absa

#endif  // ABSA_RULES_H_
