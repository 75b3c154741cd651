#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "absa/corpus.h"
#include "cli.h"

namespace absa {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fs::temp_directory_path() / ("absa_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
    const auto r = run({"gen-toy", "--out", dir_.string(), "--seed", "1"});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  static void TearDownTestSuite() { fs::remove_all(dir_); }
  static std::string p(const std::string& name) { return (dir_ / name).string(); }

  static Result train(const std::string& model, const std::string& log,
                      std::vector<std::string> extra = {}) {
    std::vector<std::string> a = {"train-tagger", "--config",     p("tagger.cfg"),
                                  "--train",      p("aspect_train.txt"), "--embeddings",
                                  p("embeddings.txt"), "--out",  p(model),
                                  "--seed",       "1",           "--log", p(log)};
    a.insert(a.end(), extra.begin(), extra.end());
    return run(a);
  }

  static fs::path dir_;
};

fs::path CliTest::dir_;

TEST_F(CliTest, GenToyWritesEveryFixture) {
  for (const char* f : {"aspect_train.txt", "aspect_test.txt", "embeddings.txt", "rules.txt",
                        "sentiment_lexicon.txt", "stop_words.txt", "clues.txt",
                        "subjectivity.txt", "tagger.cfg", "subj.cfg"}) {
    EXPECT_TRUE(fs::exists(dir_ / f)) << f;
  }
}

TEST_F(CliTest, TrainTaggerIsByteReproducible) {
  ASSERT_EQ(train("m1.txt", "log1.txt").code, 0);
  ASSERT_EQ(train("m2.txt", "log2.txt").code, 0);
  EXPECT_EQ(slurp(dir_ / "m1.txt"), slurp(dir_ / "m2.txt"));
  EXPECT_EQ(slurp(dir_ / "log1.txt"), slurp(dir_ / "log2.txt"));
  EXPECT_NE(slurp(dir_ / "log1.txt").find("epoch 1 loss"), std::string::npos);
}

TEST_F(CliTest, TagAndEvaluateToyTestSet) {
  ASSERT_EQ(train("m.txt", "log.txt").code, 0);
  const auto t = run({"tag", "--model", p("m.txt"), "--input", p("aspect_test.txt"),
                      "--embeddings", p("embeddings.txt"), "--mode", "cnn", "--out", p("pred.txt")});
  ASSERT_EQ(t.code, 0) << t.err;
  const auto e = run({"eval-aspect", "--gold", p("aspect_test.txt"), "--pred", p("pred.txt")});
  ASSERT_EQ(e.code, 0) << e.err;
  EXPECT_NE(e.out.find("f1="), std::string::npos);
  const auto pos = e.out.find("f1=");
  EXPECT_GE(std::stod(e.out.substr(pos + 3)), 0.9);
}

TEST_F(CliTest, ZeroEpochsStillWritesModel) {
  const auto r = train("m0.txt", "log0.txt", {"--epochs", "0"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir_ / "m0.txt"));
  EXPECT_EQ(slurp(dir_ / "log0.txt"), "");
}

SpanSet spans_of(const std::string& corpus_text, std::size_t sentence) {
  std::istringstream in(corpus_text);
  const auto docs = parse_corpus(in, "out");
  std::vector<Sentence> all;
  for (const auto& d : docs) all.insert(all.end(), d.sentences.begin(), d.sentences.end());
  return iob2_decode(all.at(sentence).tags());
}

TEST_F(CliTest, RuleModeOnExampleSentences) {
  const auto r = run({"tag", "--input", p("rules.txt"), "--mode", "lp", "--lexicon",
                      p("sentiment_lexicon.txt"), "--stop-words", p("stop_words.txt")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(spans_of(r.out, 0), (SpanSet{{1, 2}}));
  EXPECT_EQ(spans_of(r.out, 1), (SpanSet{{1, 2}}));
  EXPECT_EQ(spans_of(r.out, 2), (SpanSet{{3, 4}}));
  EXPECT_EQ(spans_of(r.out, 3), (SpanSet{{1, 3}}));
}

TEST_F(CliTest, EnsembleCoversCnnSpans) {
  ASSERT_EQ(train("me.txt", "loge.txt").code, 0);
  const std::vector<std::string> common = {"--model", p("me.txt"), "--input", p("aspect_test.txt"),
                                           "--embeddings", p("embeddings.txt"), "--lexicon",
                                           p("sentiment_lexicon.txt"), "--stop-words",
                                           p("stop_words.txt"), "--mode"};
  auto with = [&](const char* mode) {
    std::vector<std::string> a = {"tag"};
    a.insert(a.end(), common.begin(), common.end());
    a.push_back(mode);
    return run(a);
  };
  const auto cnn = with("cnn");
  const auto both = with("cnn+lp");
  ASSERT_EQ(cnn.code, 0) << cnn.err;
  ASSERT_EQ(both.code, 0) << both.err;
  for (std::size_t i = 0; i < 10; ++i) {
    const auto a = spans_of(cnn.out, i);
    const auto b = spans_of(both.out, i);
    for (const auto& s : a) {
      bool covered = false;
      for (const auto& t : b) covered |= t.start <= s.start && s.end <= t.end;
      EXPECT_TRUE(covered) << "sentence " << i;
    }
  }
}

TEST_F(CliTest, SubjectivityTrainClassifyAndFolds) {
  const auto t = run({"train-subj", "--config", p("subj.cfg"), "--corpus", p("subjectivity.txt"),
                      "--clues", p("clues.txt"), "--out", p("subj.model"), "--seed", "1",
                      "--folds", "4", "--motifs-out", p("motifs.txt")});
  ASSERT_EQ(t.code, 0) << t.err;
  EXPECT_NE(t.out.find("fold 4"), std::string::npos);
  EXPECT_NE(t.out.find("mean_accuracy="), std::string::npos);
  EXPECT_TRUE(fs::exists(dir_ / "motifs.txt"));
  const auto c = run({"classify-subj", "--model", p("subj.model"), "--input", p("subjectivity.txt"),
                      "--out", p("labels.txt")});
  ASSERT_EQ(c.code, 0) << c.err;
  EXPECT_NE(c.out.find("accuracy="), std::string::npos);
}

TEST_F(CliTest, SkipPretrainRuns) {
  const auto t = run({"train-subj", "--config", p("subj.cfg"), "--corpus", p("subjectivity.txt"),
                      "--clues", p("clues.txt"), "--out", p("subj2.model"), "--seed", "1",
                      "--skip-pretrain", "--epochs", "2"});
  ASSERT_EQ(t.code, 0) << t.err;
  EXPECT_NE(t.out.find("pretrain_sentences=0"), std::string::npos);
}

TEST_F(CliTest, LearnGbnPrintsNetwork) {
  const auto r = run({"learn-gbn", "--corpus", p("subjectivity.txt"), "--clues", p("clues.txt")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_FALSE(r.out.empty());
}

// Rewrites the tag column of every token line.
std::string retag(const std::string& corpus, const std::string& tag, std::size_t skip_lines = 0) {
  std::istringstream in(corpus);
  std::string line, out;
  for (std::size_t n = 0; std::getline(in, line); ++n) {
    const auto cut = line.rfind('\t');
    if (n >= skip_lines && !line.empty() && line[0] != '#' && cut != std::string::npos) {
      line = line.substr(0, cut + 1) + tag;
    }
    out += line + '\n';
  }
  return out;
}

TEST_F(CliTest, TenFoldOnSeparableToyCorpus) {
  const auto t = run({"train-subj", "--config", p("subj.cfg"), "--corpus", p("subjectivity.txt"),
                      "--clues", p("clues.txt"), "--out", p("subj10.model"), "--seed", "1",
                      "--folds", "10"});
  ASSERT_EQ(t.code, 0) << t.err;
  EXPECT_NE(t.out.find("fold 10 "), std::string::npos);
  EXPECT_NE(t.out.find("mean_accuracy=1\n"), std::string::npos) << t.out;
  const auto again = run({"train-subj", "--config", p("subj.cfg"), "--corpus", p("subjectivity.txt"),
                          "--clues", p("clues.txt"), "--out", p("subj10b.model"), "--seed", "1",
                          "--folds", "10"});
  EXPECT_EQ(again.out, t.out);
}

TEST_F(CliTest, EvalIdentityAndEmptyPrediction) {
  const auto same = run({"eval-aspect", "--gold", p("aspect_test.txt"), "--pred", p("aspect_test.txt")});
  ASSERT_EQ(same.code, 0) << same.err;
  EXPECT_NE(same.out.find("f1=1\n"), std::string::npos) << same.out;
  std::ofstream(dir_ / "all_o.txt") << retag(slurp(dir_ / "aspect_test.txt"), "O");
  const auto none = run({"eval-aspect", "--gold", p("aspect_test.txt"), "--pred", p("all_o.txt")});
  ASSERT_EQ(none.code, 0) << none.err;
  EXPECT_NE(none.out.find("f1=0\n"), std::string::npos) << none.out;
  EXPECT_NE(none.out.find("tp=0"), std::string::npos);
}

TEST_F(CliTest, AllOutsideModelTagsNothing) {
  std::ofstream(dir_ / "train_o.txt") << retag(slurp(dir_ / "aspect_train.txt"), "O");
  const auto t = run({"train-tagger", "--config", p("tagger.cfg"), "--train", p("train_o.txt"),
                      "--embeddings", p("embeddings.txt"), "--out", p("mo.txt"), "--seed", "1",
                      "--log", p("logo.txt")});
  ASSERT_EQ(t.code, 0) << t.err;
  const auto r = run({"tag", "--model", p("mo.txt"), "--input", p("aspect_test.txt"),
                      "--embeddings", p("embeddings.txt"), "--mode", "cnn"});
  ASSERT_EQ(r.code, 0) << r.err;
  for (std::size_t i = 0; i < 10; ++i) EXPECT_TRUE(spans_of(r.out, i).empty()) << i;
}

TEST_F(CliTest, MissingGoldTagsNameTheSentence) {
  std::ofstream(dir_ / "untagged.txt") << retag(slurp(dir_ / "aspect_train.txt"), "_", 9);
  const auto r = run({"train-tagger", "--config", p("tagger.cfg"), "--train", p("untagged.txt"),
                      "--embeddings", p("embeddings.txt"), "--out", p("mu.txt"), "--seed", "1"});
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("sentence 2"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("missing gold tags"), std::string::npos) << r.err;
}

TEST_F(CliTest, ErrorsAreOneLineAndNonZero) {
  auto one_line = [](const Result& r) {
    EXPECT_NE(r.code, 0);
    EXPECT_EQ(r.err.find("absa: "), 0u) << r.err;
    EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1) << r.err;
  };
  one_line(run({"tag", "--input", p("missing.txt"), "--mode", "lp"}));
  one_line(run({"train-tagger", "--train", p("aspect_train.txt")}));
  one_line(run({"tag", "--input", p("rules.txt"), "--mode", "banana"}));
  one_line(run({"no-such-command"}));
  one_line(run({"train-subj", "--corpus", p("subjectivity.txt"), "--seed", "1"}));
  // Unparsed input cannot feed the rules.
  std::ofstream(dir_ / "bare.txt") << "camera\tNN\t_\t_\tO\n";
  one_line(run({"tag", "--input", p("bare.txt"), "--mode", "lp"}));
}

TEST_F(CliTest, HelpExitsZero) {
  EXPECT_EQ(run({"--help"}).code, 0);
  EXPECT_EQ(run({"tag", "--help"}).code, 0);
}

}  // namespace
}  // namespace absa
