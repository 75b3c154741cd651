#include <gtest/gtest.h>

#include <sstream>

#include "absa/rules.h"
#include "toy.h"

namespace absa {
namespace {

struct Row {
  const char* word;
  Pos pos;
  int head;  // -1 = root
  const char* deprel;
};

Sentence parsed(std::initializer_list<Row> rows) {
  Sentence s;
  for (const auto& r : rows) {
    Token t;
    t.surface = r.word;
    t.pos = r.pos;
    if (r.head >= 0) t.head = r.head;
    t.deprel = r.deprel;
    s.tokens.push_back(t);
  }
  return s;
}

RuleConfig toy_config() {
  RuleConfig c;
  c.sentiment_lexicon = toy::sentiment_lexicon();
  c.stop_words = toy::stop_words();
  return c;
}

SpanSet full_pipeline(const Sentence& s, const RuleConfig& c) {
  return ensemble({}, apply_rules(s, c), s, c);
}

TEST(Rules, ExampleSentences) {
  const auto docs = toy::rule_fixture();
  const auto cfg = toy_config();
  const auto& s = docs[0].sentences;
  ASSERT_EQ(s.size(), 4u);
  EXPECT_EQ(full_pipeline(s[0], cfg), (SpanSet{{1, 2}}));  // battery
  EXPECT_EQ(full_pipeline(s[1], cfg), (SpanSet{{1, 2}}));  // camera
  EXPECT_EQ(full_pipeline(s[2], cfg), (SpanSet{{3, 4}}));  // lens
  EXPECT_EQ(full_pipeline(s[3], cfg), (SpanSet{{1, 3}}));  // battery life
}

TEST(Rules, ShippedLexiconsGiveTheSameExamples) {
  RuleConfig c;
  c.sentiment_lexicon =
      load_lexicon(ABSA_DATA_DIR "/sentiment_lexicon.txt", LexiconKind::kSentimentConcepts);
  c.stop_words = load_lexicon(ABSA_DATA_DIR "/stop_words.txt", LexiconKind::kStopWords);
  EXPECT_EQ(c.sentiment_lexicon.size(), 200u);
  const auto docs = toy::rule_fixture();
  const auto& s = docs[0].sentences;
  EXPECT_EQ(full_pipeline(s[0], c), (SpanSet{{1, 2}}));
  EXPECT_EQ(full_pipeline(s[1], c), (SpanSet{{1, 2}}));
  EXPECT_EQ(full_pipeline(s[2], c), (SpanSet{{3, 4}}));
  EXPECT_EQ(full_pipeline(s[3], c), (SpanSet{{1, 3}}));
}

TEST(Rules, DeprelMapBringsOtherSchemesIn) {
  std::istringstream in("# doc ud\nI\tPRP\t2\tnsubj\t_\nlike\tVBP\t0\troot\t_\n"
                        "the\tDT\t4\tdet\t_\nlens\tNN\t2\tobj\t_\n");
  auto docs = parse_corpus(in, "ud");
  const auto c = toy_config();
  EXPECT_TRUE(apply_rules(docs[0].sentences[0], c).empty());
  normalize_deprels(docs, load_deprel_map(ABSA_DATA_DIR "/deprel_map.txt"));
  EXPECT_EQ(docs[0].sentences[0].tokens[3].deprel, "dobj");
  EXPECT_EQ(full_pipeline(docs[0].sentences[0], c), (SpanSet{{3, 4}}));
}

TEST(Rules, IndividualRulesFireAlone) {
  const auto docs = toy::rule_fixture();
  const auto& s = docs[0].sentences;
  auto only = [](Rule r) {
    RuleConfig c = toy_config();
    c.enabled_rules = {r};
    return c;
  };
  EXPECT_EQ(apply_rules(s[0], only(Rule::k2_1)), (SpanSet{{1, 2}}));
  EXPECT_EQ(apply_rules(s[1], only(Rule::k3)), (SpanSet{{1, 2}}));
  EXPECT_TRUE(apply_rules(s[1], only(Rule::k2_1)).empty());
  EXPECT_EQ(apply_rules(s[2], only(Rule::k2_2)), (SpanSet{{3, 4}}));
  EXPECT_TRUE(apply_rules(s[2], only(Rule::k3)).empty());
}

TEST(Rules, RuleOneNeedsLexiconModifier) {
  // "The screen looks bright": bright is an amod of looks and in the lexicon.
  const auto s = parsed({{"The", Pos::kOther, 1, "det"},
                         {"screen", Pos::kNoun, 2, "nsubj"},
                         {"looks", Pos::kVerb, -1, "root"},
                         {"bright", Pos::kAdjective, 2, "amod"}});
  RuleConfig c = toy_config();
  c.enabled_rules = {Rule::k1};
  EXPECT_EQ(apply_rules(s, c), (SpanSet{{1, 2}}));
  c.sentiment_lexicon = Lexicon(LexiconKind::kSentimentConcepts);
  EXPECT_TRUE(apply_rules(s, c).empty());
}

TEST(Rules, AuxiliaryVerbBlocksRuleTwo) {
  const auto s = parsed({{"I", Pos::kOther, 2, "nsubj"},
                         {"would", Pos::kVerb, 2, "aux"},
                         {"buy", Pos::kVerb, -1, "root"},
                         {"the", Pos::kOther, 4, "det"},
                         {"phone", Pos::kNoun, 2, "dobj"}});
  EXPECT_TRUE(apply_rules(s, toy_config()).empty());
  RuleConfig c = toy_config();
  c.auxiliary_verbs.clear();
  EXPECT_EQ(apply_rules(s, c), (SpanSet{{4, 5}}));
}

TEST(Rules, DirectObjectInLexiconIsNotAnAspect) {
  const auto s = parsed({{"I", Pos::kOther, 1, "nsubj"},
                         {"like", Pos::kVerb, -1, "root"},
                         {"love", Pos::kNoun, 1, "dobj"}});
  EXPECT_TRUE(apply_rules(s, toy_config()).empty());
}

TEST(Rules, UnparsedSentenceYieldsNothing) {
  Sentence s;
  Token t;
  t.surface = "camera";
  t.pos = Pos::kNoun;
  s.tokens.push_back(t);
  EXPECT_TRUE(apply_rules(s, toy_config()).empty());
}

TEST(Compounds, ChainReachesFixpoint) {
  const auto s = parsed({{"laptop", Pos::kNoun, 2, "compound"},
                         {"battery", Pos::kNoun, 2, "compound"},
                         {"life", Pos::kNoun, -1, "root"}});
  EXPECT_EQ(merge_compounds({{1, 2}}, s), (SpanSet{{0, 3}}));
  EXPECT_EQ(merge_compounds({{0, 1}, {2, 3}}, s), (SpanSet{{0, 3}}));
  const auto plain = parsed({{"a", Pos::kOther, 1, "det"}, {"fan", Pos::kNoun, -1, "root"}});
  EXPECT_EQ(merge_compounds({{1, 2}}, plain), (SpanSet{{1, 2}}));
}

TEST(StopWords, DropAndTrim) {
  const auto s = parsed({{"of", Pos::kPreposition, 2, "case"},
                         {"the", Pos::kOther, 2, "det"},
                         {"battery", Pos::kNoun, -1, "root"}});
  const auto stop = toy::stop_words();
  EXPECT_EQ(prune_stopwords({{0, 3}}, s, stop), (SpanSet{{2, 3}}));
  EXPECT_TRUE(prune_stopwords({{1, 2}}, s, stop).empty());
  EXPECT_EQ(prune_stopwords({{2, 3}}, s, stop), (SpanSet{{2, 3}}));
}

TEST(Ensemble, UnionThenCompoundsThenPrune) {
  const auto docs = toy::rule_fixture();
  const auto& life = docs[0].sentences[3];
  const auto& camera = docs[0].sentences[1];
  const auto cfg = toy_config();
  EXPECT_EQ(ensemble({{1, 2}}, {}, life, cfg), (SpanSet{{1, 3}}));
  EXPECT_TRUE(ensemble({}, {}, life, cfg).empty());
  EXPECT_EQ(ensemble({{0, 1}}, {{1, 2}}, camera, cfg), (SpanSet{{1, 2}}));
  RuleConfig none = cfg;
  none.enabled_rules.clear();
  EXPECT_EQ(ensemble({{0, 2}}, {}, camera, none), (SpanSet{{0, 2}}));
}

TEST(RuleNames, ParseAndPrint) {
  EXPECT_EQ(parse_rule("2.1"), Rule::k2_1);
  EXPECT_EQ(rule_name(Rule::k2_2), "2.2");
  EXPECT_EQ(parse_rule_list("1,3,5"), (std::set<Rule>{Rule::k1, Rule::k3, Rule::k5}));
  EXPECT_THROW(parse_rule("6"), std::invalid_argument);
}

}  // namespace
}  // namespace absa
