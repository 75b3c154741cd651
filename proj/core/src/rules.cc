#include "absa/rules.h"

#include <algorithm>
#include <stdexcept>

#include "absa/textio.h"

namespace absa {

namespace {

struct DepGraph {
  // children[h] = (dependent index, relation)
  std::vector<std::vector<std::pair<int, std::string_view>>> children;

  explicit DepGraph(const Sentence& s) : children(s.size()) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      const auto& t = s.tokens[i];
      if (t.head) children[*t.head].emplace_back(static_cast<int>(i), t.deprel);
    }
  }

  bool has_child(int h, std::string_view rel) const {
    return std::any_of(children[h].begin(), children[h].end(),
                       [&](const auto& c) { return c.second == rel; });
  }
};

bool is_noun(const Token& t) { return t.pos == Pos::kNoun; }

}  // namespace

std::string_view rule_name(Rule r) {
  switch (r) {
    case Rule::k1: return "1";
    case Rule::k2_1: return "2.1";
    case Rule::k2_2: return "2.2";
    case Rule::k3: return "3";
    case Rule::k4: return "4";
    case Rule::k5: return "5";
  }
  return "?";
}

Rule parse_rule(std::string_view s) {
  for (Rule r : {Rule::k1, Rule::k2_1, Rule::k2_2, Rule::k3, Rule::k4, Rule::k5}) {
    if (rule_name(r) == s) return r;
  }
  throw std::invalid_argument("unknown rule '" + std::string(s) + "'");
}

std::set<Rule> parse_rule_list(std::string_view s) {
  std::set<Rule> out;
  for (auto f : split_fields(s, ", ")) out.insert(parse_rule(f));
  return out;
}

std::set<std::string, std::less<>> default_auxiliary_verbs() {
  return {"is",    "was",   "were",  "am",  "are", "be",   "been",  "would",
          "should", "could", "can",  "may", "might", "must", "will", "shall"};
}

SpanSet apply_rules(const Sentence& sentence, const RuleConfig& config) {
  SpanSet marks;
  if (!sentence.has_dependencies()) return marks;
  const DepGraph g(sentence);
  const auto& toks = sentence.tokens;
  const int n = static_cast<int>(toks.size());

  const bool has_aux = std::any_of(toks.begin(), toks.end(), [&](const Token& t) {
    return config.auxiliary_verbs.count(to_lower(t.surface)) > 0;
  });
  std::vector<bool> marked(n, false);

  for (int h = 0; h < n; ++h) {
    const Token& tok = toks[h];
    if (!tok.head) continue;
    const int t = *tok.head;

    if (tok.deprel == deprel::kNsubj && is_noun(tok)) {
      if (config.enabled(Rule::k1)) {
        for (const auto& [c, rel] : g.children[t]) {
          if ((rel == deprel::kAmod || rel == deprel::kAdvmod) &&
              config.sentiment_lexicon.contains(toks[c].surface)) {
            marked[h] = true;
          }
        }
      }
      if (config.enabled(Rule::k2_1) && !has_aux && toks[t].pos == Pos::kVerb &&
          (g.has_child(t, deprel::kAmod) || g.has_child(t, deprel::kAdvmod) ||
           g.has_child(t, deprel::kAdvcl))) {
        marked[h] = true;
      }
      // Copula analysed as a dependent of the predicate: nsubj(nice, camera),
      // cop(nice, is).
      if (config.enabled(Rule::k3) && g.has_child(t, deprel::kCop)) marked[h] = true;
    }

    if (config.enabled(Rule::k2_2) && !has_aux && tok.deprel == deprel::kDobj &&
        is_noun(tok) && toks[t].pos == Pos::kVerb &&
        !config.sentiment_lexicon.contains(tok.surface)) {
      marked[h] = true;
    }
  }

  if (config.enabled(Rule::k3)) {
    for (int h = 0; h < n; ++h) {
      if (is_noun(toks[h]) && g.has_child(h, deprel::kCop)) marked[h] = true;
    }
  }

  for (int i = 0; i < n; ++i) {
    if (marked[i]) marks.push_back({i, i + 1});
  }
  return marks;
}

SpanSet merge_compounds(const SpanSet& spans, const Sentence& sentence) {
  const int n = static_cast<int>(sentence.size());
  // Undirected compound adjacency.
  std::vector<std::vector<int>> partners(n);
  for (int i = 0; i < n; ++i) {
    const auto& t = sentence.tokens[i];
    if (t.head && t.deprel == deprel::kCompound) {
      partners[i].push_back(*t.head);
      partners[*t.head].push_back(i);
    }
  }
  SpanSet cur = normalize_spans(spans);
  for (int iter = 0; iter <= n; ++iter) {
    bool changed = false;
    for (auto& s : cur) {
      for (int i = s.start; i < s.end; ++i) {
        for (int p : partners[i]) {
          if (!is_noun(sentence.tokens[p])) continue;
          if (p == s.start - 1) {
            s.start = p;
            changed = true;
          } else if (p == s.end) {
            s.end = p + 1;
            changed = true;
          }
        }
      }
    }
    cur = normalize_spans(std::move(cur));
    if (!changed) break;
  }
  return cur;
}

SpanSet prune_stopwords(const SpanSet& spans, const Sentence& sentence,
                        const Lexicon& stop_words) {
  SpanSet out;
  auto is_stop = [&](int i) { return stop_words.contains(sentence.tokens[i].surface); };
  for (auto s : spans) {
    while (s.start < s.end && is_stop(s.start)) ++s.start;
    while (s.end > s.start && is_stop(s.end - 1)) --s.end;
    if (s.start < s.end) out.push_back(s);
  }
  return out;
}

SpanSet ensemble(const SpanSet& cnn_spans, const SpanSet& lp_spans, const Sentence& sentence,
                 const RuleConfig& config) {
  SpanSet all = cnn_spans;
  all.insert(all.end(), lp_spans.begin(), lp_spans.end());
  all = normalize_spans(std::move(all));
  if (config.enabled(Rule::k4)) all = merge_compounds(all, sentence);
  if (config.enabled(Rule::k5)) all = prune_stopwords(all, sentence, config.stop_words);
  return all;
}

}  // namespace absa
