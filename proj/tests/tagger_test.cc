#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "absa/tagger.h"
#include "toy.h"

namespace absa {
namespace {

// Frozen from tests/oracles/oracles.py.
const Matrix kH = Matrix::from_rows({{0.5, -1.2, 0.3}, {1.1, 0.4, -0.7}, {-0.2, 0.9, 0.6}, {0.0, -0.5, 1.3}});

Transitions oracle_transitions() {
  Transitions t(3);
  t.A = Matrix::from_rows({{0.2, -0.4, 0.1}, {0.7, 0.3, -0.6}, {-0.1, 0.5, 0.0}});
  t.start = Matrix::from_rows({{0.3, -0.2, 0.1}});
  return t;
}

Transitions random_transitions(int k, Rng& rng) {
  Transitions t(k);
  for (double& v : t.A.data()) v = rng.uniform(-1, 1);
  for (double& v : t.start.data()) v = rng.uniform(-1, 1);
  return t;
}

Matrix random_scores(int len, int k, Rng& rng) {
  Matrix h(len, k);
  for (double& v : h.data()) v = rng.uniform(-2, 2);
  return h;
}

// Enumerates every path of length T over K tags.
template <typename F>
void for_each_path(int len, int k, F&& f) {
  std::vector<int> path(len, 0);
  while (true) {
    f(path);
    int i = len - 1;
    while (i >= 0 && ++path[i] == k) path[i--] = 0;
    if (i < 0) return;
  }
}

TEST(Logadd, Basics) {
  EXPECT_NEAR(logadd(std::vector<double>{0.0, 0.0}), std::log(2.0), 1e-15);
  EXPECT_NEAR(logadd(std::vector<double>{1000.0, 1000.0}), 1000.0 + std::log(2.0), 1e-12);
  const double ninf = -std::numeric_limits<double>::infinity();
  EXPECT_EQ(logadd(std::vector<double>{ninf, ninf}), ninf);
  EXPECT_EQ(logadd(std::vector<double>{ninf, 2.0}), 2.0);
  EXPECT_THROW(logadd(std::vector<double>{}), std::invalid_argument);
}

TEST(Lattice, FrozenOracleValues) {
  const auto t = oracle_transitions();
  EXPECT_NEAR(log_partition(kH, t), 6.411532721212836, 1e-12);
  EXPECT_EQ(viterbi(kH, t), (std::vector<int>{0, 0, 2, 2}));
  const std::vector<int> gold = {0, 1, 1, 2};
  EXPECT_NEAR(structured_nll(kH, t, gold).loss, 3.711532721212836, 1e-12);
}

TEST(Lattice, PartitionAndViterbiMatchBruteForce) {
  Rng rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const int len = 1 + static_cast<int>(rng.index(5));
    const auto t = random_transitions(3, rng);
    const Matrix h = random_scores(len, 3, rng);
    std::vector<double> scores;
    double best = -1e300;
    std::vector<int> arg;
    for_each_path(len, 3, [&](const std::vector<int>& p) {
      const double s = sentence_score(h, t, p);
      scores.push_back(s);
      if (s > best) {
        best = s;
        arg = p;
      }
    });
    EXPECT_NEAR(log_partition(h, t), logadd(scores), 1e-9);
    EXPECT_EQ(viterbi(h, t), arg);
  }
}

TEST(Lattice, ViterbiTiesPreferLowerIndex) {
  Transitions t(3);
  const Matrix h(3, 3, 0.0);
  EXPECT_EQ(viterbi(h, t), (std::vector<int>{0, 0, 0}));
}

TEST(Lattice, NllGradientsMatchFiniteDifferences) {
  Rng rng(4);
  const double eps = 1e-6;
  for (int trial = 0; trial < 5; ++trial) {
    const int len = 2 + static_cast<int>(rng.index(4));
    auto t = random_transitions(3, rng);
    Matrix h = random_scores(len, 3, rng);
    std::vector<int> gold(len);
    for (int& g : gold) g = static_cast<int>(rng.index(3));
    const auto r = structured_nll(h, t, gold);
    auto check = [&](Matrix& m, const Matrix& grad) {
      for (std::size_t i = 0; i < m.size(); ++i) {
        const double keep = m.data()[i];
        m.data()[i] = keep + eps;
        const double up = structured_nll(h, t, gold).loss;
        m.data()[i] = keep - eps;
        const double down = structured_nll(h, t, gold).loss;
        m.data()[i] = keep;
        EXPECT_NEAR(grad.data()[i], (up - down) / (2 * eps), 1e-7);
      }
    };
    check(h, r.dH);
    check(t.A, r.dA);
    check(t.start, r.dstart);
  }
}

TEST(Lattice, ShapeMismatchThrows) {
  Transitions t(3);
  EXPECT_THROW(log_partition(Matrix(2, 4), t), std::invalid_argument);
  EXPECT_THROW(structured_nll(Matrix(2, 3), t, std::vector<int>{0}), std::invalid_argument);
}

Sentence three_tokens() {
  Sentence s;
  for (const char* w : {"the", "camera", "rocks"}) {
    Token t;
    t.surface = w;
    t.pos = std::string(w) == "camera" ? Pos::kNoun : Pos::kOther;
    t.tag = std::string(w) == "camera" ? Tag::kBegin : Tag::kOutside;
    s.tokens.push_back(t);
  }
  return s;
}

TEST(Features, WindowLayoutAndDefaultWidth) {
  EmbeddingTable table(300);
  table.set("camera", std::vector<double>(300, 0.5));
  const Sentence s = three_tokens();
  EXPECT_EQ(window_features(s, 1, table).size(), 1530u);
  const Matrix g = window_grid(s, 0, table);
  ASSERT_EQ(g.rows(), 5u);
  ASSERT_EQ(g.cols(), 306u);
  for (double v : g.row(0)) EXPECT_EQ(v, 0.0);  // pad
  for (double v : g.row(1)) EXPECT_EQ(v, 0.0);  // pad
  EXPECT_EQ(g(3, 0), 0.5);
  EXPECT_EQ(g(3, 300 + static_cast<int>(Pos::kNoun)), 1.0);
  double hot = 0, other = 0;
  for (int c = 300; c < 306; ++c) hot += g(3, c), other += g(2, c);
  EXPECT_EQ(hot, 1.0);
  EXPECT_EQ(other, 0.0);  // determiners fall outside the six classes
}

TaggerConfig tiny_config() {
  TaggerConfig c;
  c.embedding_dim = 4;
  c.conv1_maps = 3;
  c.conv2_maps = 2;
  c.init_scale = 0.3;
  c.train = {0.05, 3, 1.0, 7, std::nullopt};
  return c;
}

EmbeddingTable tiny_table() {
  EmbeddingTable t(4, UnkPolicy::kSeededHash, 3);
  t.set("camera", {0.1, -0.2, 0.3, 0.4});
  return t;
}

TEST(Tagger, ModelGradientCheck) {
  TaggerModel model(tiny_config());
  const auto table = tiny_table();
  const Sentence s = three_tokens();
  const double err = grad_check_params(
      model.params(),
      [&] {
        // A fresh copy keeps the loss evaluation away from gradient buffers.
        TaggerModel copy = model;
        return tagger_sentence_step(copy, s, table, Mode::kInfer, nullptr);
      },
      [&] {
        model.zero_grad();
        tagger_sentence_step(model, s, table, Mode::kInfer, nullptr);
      });
  EXPECT_LT(err, 1e-4);
}

TEST(Tagger, ZeroEpochsReturnsInitialisation) {
  auto cfg = tiny_config();
  cfg.train.epochs = 0;
  const std::vector<Sentence> corpus = {three_tokens()};
  const auto trained = train_tagger(corpus, tiny_table(), cfg);
  std::ostringstream a, b;
  trained.write(a);
  TaggerModel(cfg).write(b);
  EXPECT_EQ(a.str(), b.str());
}

TEST(Tagger, TrainingIsDeterministicAndSavesBitExact) {
  const auto cfg = tiny_config();
  const std::vector<Sentence> corpus = {three_tokens(), three_tokens()};
  TrainReport r1, r2;
  const auto m1 = train_tagger(corpus, tiny_table(), cfg, &r1);
  const auto m2 = train_tagger(corpus, tiny_table(), cfg, &r2);
  std::ostringstream a, b;
  m1.write(a);
  m2.write(b);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(r1.epoch_loss, r2.epoch_loss);
  ASSERT_EQ(r1.epoch_loss.size(), 3u);
  EXPECT_LT(r1.epoch_loss.back(), r1.epoch_loss.front());

  std::istringstream in(a.str());
  const auto back = TaggerModel::read(in);
  const auto table = tiny_table();
  EXPECT_EQ(back.token_scores(corpus[0], table), m1.token_scores(corpus[0], table));
}

TEST(Tagger, HardConstraintsForbidOutsideToInside) {
  auto cfg = tiny_config();
  cfg.hard_constraints = true;
  TaggerModel model(cfg);
  const auto t = model.effective_transitions();
  const int o = tag_index(Tag::kOutside), i = tag_index(Tag::kInside);
  EXPECT_TRUE(std::isinf(t.A(o, i)));
  EXPECT_TRUE(std::isinf(t.start(0, i)));
  Matrix h(3, 3, 0.0);
  h(1, i) = 50.0;
  const auto path = viterbi(h, t);
  EXPECT_FALSE(path[0] == o && path[1] == i);
}

TEST(Tagger, ToyFixtureLearnsAndGeneralises) {
  const auto fx = toy::aspect_fixture(1);
  std::vector<Sentence> train;
  for (const auto& d : fx.train) train.insert(train.end(), d.sentences.begin(), d.sentences.end());
  const auto model = train_tagger(train, fx.embeddings, toy::aspect_config(1));
  int correct = 0, total = 0;
  for (const auto& d : fx.test) {
    for (const auto& s : d.sentences) {
      correct += tag(model, s, fx.embeddings).spans == iob2_decode(s.tags());
      ++total;
    }
  }
  EXPECT_GE(correct, total - 1);
}

}  // namespace
}  // namespace absa
