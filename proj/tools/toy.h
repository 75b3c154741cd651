#ifndef ABSA_TOOLS_TOY_H_
#define ABSA_TOOLS_TOY_H_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "absa/corpus.h"
#include "absa/rules.h"
#include "absa/subjectivity.h"
#include "absa/tagger.h"

// Deterministic fixtures that exercise every pipeline without external data.
namespace absa::toy {

// Ten training and ten test review sentences, each with exactly one noun,
// which is the gold aspect. Test nouns never occur in training.
struct AspectFixture {
  std::vector<Document> train;
  std::vector<Document> test;
  EmbeddingTable embeddings{16};
};

AspectFixture aspect_fixture(std::uint64_t seed, int embedding_dim = 16);
TaggerConfig aspect_config(std::uint64_t seed, int embedding_dim = 16);

// Parsed example sentences for the dependency rules, gold tags included:
//   The battery lasts little / The camera is nice /
//   I like the lens of this camera / The battery life is great
std::vector<Document> rule_fixture();
Lexicon sentiment_lexicon();
Lexicon stop_words();

// Four documents of subjective and objective sentences that differ in their
// opinion words.
std::vector<LabeledSentence> subjectivity_fixture(std::uint64_t seed);
Lexicon clue_lexicon();
SubjectivityConfig subjectivity_config(std::uint64_t seed);

// Writes every fixture plus ready-made config files into dir.
void write_fixtures(const std::filesystem::path& dir, std::uint64_t seed);

}  // namespace absa::toy

#endif  // ABSA_TOOLS_TOY_H_
