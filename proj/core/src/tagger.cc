#include "absa/tagger.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "absa/textio.h"

namespace absa {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_lattice(const Matrix& H, const Transitions& trans) {
  if (H.rows() == 0) throw std::invalid_argument("lattice needs at least one token");
  if (static_cast<int>(H.cols()) != trans.num_tags() ||
      static_cast<int>(trans.start.cols()) != trans.num_tags()) {
    throw ShapeError("token scores have " + std::to_string(H.cols()) +
                     " tags but transitions have " + std::to_string(trans.num_tags()));
  }
}

double logadd2(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

}  // namespace

double logadd(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("logadd of an empty list");
  const double m = *std::max_element(xs.begin(), xs.end());
  if (m == kNegInf) return kNegInf;
  if (std::isinf(m)) return m;
  double sum = 0.0;
  for (double x : xs) sum += std::exp(x - m);
  return m + std::log(sum);
}

double sentence_score(const Matrix& H, const Transitions& trans, std::span<const int> path) {
  check_lattice(H, trans);
  if (path.size() != H.rows()) {
    throw std::invalid_argument("path length " + std::to_string(path.size()) +
                                " does not match " + std::to_string(H.rows()) + " tokens");
  }
  const int K = trans.num_tags();
  for (int y : path) {
    if (y < 0 || y >= K) throw std::invalid_argument("tag index out of alphabet");
  }
  double s = trans.start(0, path[0]) + H(0, path[0]);
  for (std::size_t t = 1; t < path.size(); ++t) {
    s += trans.A(path[t - 1], path[t]) + H(t, path[t]);
  }
  return s;
}

ScoreLattice forward_lattice(const Matrix& H, const Transitions& trans) {
  check_lattice(H, trans);
  const std::size_t T = H.rows();
  const int K = trans.num_tags();
  ScoreLattice lat{Matrix(T, K), std::vector<std::vector<int>>(T, std::vector<int>(K, 0))};
  for (int k = 0; k < K; ++k) lat.delta(0, k) = H(0, k) + trans.start(0, k);
  std::vector<double> terms(K);
  for (std::size_t t = 1; t < T; ++t) {
    for (int k = 0; k < K; ++k) {
      for (int j = 0; j < K; ++j) terms[j] = lat.delta(t - 1, j) + trans.A(j, k);
      lat.delta(t, k) = H(t, k) + logadd(terms);
    }
  }
  return lat;
}

double log_partition(const Matrix& H, const Transitions& trans) {
  const auto lat = forward_lattice(H, trans);
  return logadd(lat.delta.row(lat.delta.rows() - 1));
}

NllResult structured_nll(const Matrix& H, const Transitions& trans, std::span<const int> path) {
  const double gold = sentence_score(H, trans, path);
  const std::size_t T = H.rows();
  const int K = trans.num_tags();
  const auto lat = forward_lattice(H, trans);
  const double log_z = logadd(lat.delta.row(T - 1));

  // beta(t, i) = logadd over continuations of a path in tag i at t.
  Matrix beta(T, K);
  for (std::size_t t = T - 1; t-- > 0;) {
    for (int i = 0; i < K; ++i) {
      double acc = kNegInf;
      for (int j = 0; j < K; ++j) {
        acc = logadd2(acc, trans.A(i, j) + H(t + 1, j) + beta(t + 1, j));
      }
      beta(t, i) = acc;
    }
  }

  NllResult r{std::max(0.0, log_z - gold), Matrix(T, K), Matrix(K, K), Matrix(1, K)};
  for (std::size_t t = 0; t < T; ++t) {
    for (int k = 0; k < K; ++k) {
      r.dH(t, k) = std::exp(lat.delta(t, k) + beta(t, k) - log_z);
    }
  }
  for (int k = 0; k < K; ++k) r.dstart(0, k) = r.dH(0, k);
  for (std::size_t t = 1; t < T; ++t) {
    for (int i = 0; i < K; ++i) {
      for (int j = 0; j < K; ++j) {
        r.dA(i, j) +=
            std::exp(lat.delta(t - 1, i) + trans.A(i, j) + H(t, j) + beta(t, j) - log_z);
      }
    }
  }
  r.dstart(0, path[0]) -= 1.0;
  for (std::size_t t = 0; t < T; ++t) {
    r.dH(t, path[t]) -= 1.0;
    if (t > 0) r.dA(path[t - 1], path[t]) -= 1.0;
  }
  return r;
}

std::vector<int> viterbi(const Matrix& H, const Transitions& trans) {
  check_lattice(H, trans);
  const std::size_t T = H.rows();
  const int K = trans.num_tags();
  Matrix best(T, K);
  std::vector<std::vector<int>> back(T, std::vector<int>(K, 0));
  for (int k = 0; k < K; ++k) best(0, k) = H(0, k) + trans.start(0, k);
  for (std::size_t t = 1; t < T; ++t) {
    for (int k = 0; k < K; ++k) {
      int arg = 0;
      double val = best(t - 1, 0) + trans.A(0, k);
      for (int j = 1; j < K; ++j) {
        const double cand = best(t - 1, j) + trans.A(j, k);
        if (cand > val) {
          val = cand;
          arg = j;
        }
      }
      best(t, k) = val + H(t, k);
      back[t][k] = arg;
    }
  }
  int last = 0;
  for (int k = 1; k < K; ++k) {
    if (best(T - 1, k) > best(T - 1, last)) last = k;
  }
  std::vector<int> path(T);
  path[T - 1] = last;
  for (std::size_t t = T - 1; t > 0; --t) path[t - 1] = back[t][path[t]];
  return path;
}

int tag_index(Tag tag) { return static_cast<int>(tag); }

Tag tag_from_index(int index) {
  if (index < 0 || index >= kNumTags) throw std::invalid_argument("tag index out of range");
  return static_cast<Tag>(index);
}

void TaggerConfig::validate() const {
  if (embedding_dim < 1) throw std::invalid_argument("embedding_dim must be positive");
  if (half_window < 0) throw std::invalid_argument("half_window must be >= 0");
  if (conv1_maps < 1 || conv2_maps < 1 || conv1_width < 1 || conv2_width < 1) {
    throw std::invalid_argument("convolution sizes must be positive");
  }
  train.validate();
  // The scorer must reduce a window to at least one position.
  std::size_t len = static_cast<std::size_t>(window_size());
  if (len < static_cast<std::size_t>(conv1_width)) {
    throw std::invalid_argument("window shorter than first kernel");
  }
  len = pooled_length(len - conv1_width + 1, pool_size, pool_stride);
  if (len < static_cast<std::size_t>(conv2_width)) {
    throw std::invalid_argument("second kernel wider than pooled first-layer output");
  }
}

Matrix window_grid(const Sentence& sentence, int t, const EmbeddingTable& table,
                   int half_window) {
  const int n = static_cast<int>(sentence.size());
  if (t < 0 || t >= n) throw std::out_of_range("token index out of range");
  const int d = table.dim();
  const int width = d + kNumPosClasses;
  Matrix grid(2 * half_window + 1, width);
  for (int off = -half_window; off <= half_window; ++off) {
    const int i = t + off;
    if (i < 0 || i >= n) continue;  // PAD row stays zero
    auto row = grid.row(off + half_window);
    const Token& tok = sentence.tokens[i];
    table.lookup_into(tok.surface, row.subspan(0, d));
    if (tok.pos != Pos::kOther) row[d + static_cast<int>(tok.pos)] = 1.0;
  }
  return grid;
}

std::vector<double> window_features(const Sentence& sentence, int t,
                                    const EmbeddingTable& table, int half_window) {
  return window_grid(sentence, t, table, half_window).data();
}

TaggerModel::TaggerModel(const TaggerConfig& config)
    : config_(config), trans_(kNumTags), grad_A_(kNumTags, kNumTags), grad_start_(1, kNumTags) {
  config_.validate();
  const int width = config_.feature_width();
  scorer_.add(std::make_unique<Conv1dLayer>(
      ConvLayer(config_.conv1_maps, config_.conv1_width, width)));
  scorer_.add(std::make_unique<ActivationLayer>(Activation::kTanh));
  scorer_.add(std::make_unique<MaxPoolLayer>(config_.pool_size, config_.pool_stride));
  scorer_.add(std::make_unique<Conv1dLayer>(
      ConvLayer(config_.conv2_maps, config_.conv2_width, config_.conv1_maps)));
  scorer_.add(std::make_unique<ActivationLayer>(Activation::kTanh));
  scorer_.add(std::make_unique<MaxPoolLayer>(config_.pool_size, config_.pool_stride));
  std::size_t len = static_cast<std::size_t>(config_.window_size()) - config_.conv1_width + 1;
  len = pooled_length(len, config_.pool_size, config_.pool_stride);
  len = pooled_length(len - config_.conv2_width + 1, config_.pool_size, config_.pool_stride);
  scorer_.add(std::make_unique<DropoutLayer>(config_.train.dropout_keep));
  scorer_.add(std::make_unique<DenseLayer>(static_cast<int>(len) * config_.conv2_maps, kNumTags));

  Rng rng(config_.train.seed);
  init_uniform(scorer_, rng, config_.init_scale);
  for (double& v : trans_.A.data()) v = rng.uniform(-config_.init_scale, config_.init_scale);
  for (double& v : trans_.start.data()) v = rng.uniform(-config_.init_scale, config_.init_scale);
}

Transitions TaggerModel::effective_transitions() const {
  if (!config_.hard_constraints) return trans_;
  Transitions t = trans_;
  const int o = tag_index(Tag::kOutside);
  const int i = tag_index(Tag::kInside);
  t.A(o, i) = kNegInf;
  t.start(0, i) = kNegInf;
  return t;
}

Matrix TaggerModel::token_scores(const Sentence& sentence, const EmbeddingTable& table) const {
  if (table.dim() != config_.embedding_dim) {
    throw ShapeError("embedding table has dimension " + std::to_string(table.dim()) +
                     ", model expects " + std::to_string(config_.embedding_dim));
  }
  const int n = static_cast<int>(sentence.size());
  Matrix H(n, kNumTags);
  for (int t = 0; t < n; ++t) {
    const Matrix out = scorer_.predict(window_grid(sentence, t, table, config_.half_window));
    for (int k = 0; k < kNumTags; ++k) H(t, k) = out(0, k);
  }
  return H;
}

std::vector<Param> TaggerModel::params() {
  auto ps = scorer_.params();
  ps.push_back({"transitions.A", &trans_.A, &grad_A_, false});
  ps.push_back({"transitions.start", &trans_.start, &grad_start_, false});
  return ps;
}

void TaggerModel::zero_grad() {
  scorer_.zero_grad();
  grad_A_.fill(0.0);
  grad_start_.fill(0.0);
}

void TaggerModel::write(std::ostream& out) const {
  out << "absa-tagger 1\n";
  out << "tags";
  for (int k = 0; k < kNumTags; ++k) out << ' ' << tag_name(tag_from_index(k));
  out << '\n';
  const auto& c = config_;
  out << "config embedding_dim " << c.embedding_dim << " half_window " << c.half_window
      << " conv1_maps " << c.conv1_maps << " conv1_width " << c.conv1_width << " conv2_maps "
      << c.conv2_maps << " conv2_width " << c.conv2_width << " pool_size " << c.pool_size
      << " pool_stride " << c.pool_stride << " hard_constraints " << (c.hard_constraints ? 1 : 0)
      << " dropout_keep " << format_double(c.train.dropout_keep) << '\n';
  out << "transitions";
  for (double v : trans_.A.data()) out << ' ' << format_double(v);
  out << "\nstart";
  for (double v : trans_.start.data()) out << ' ' << format_double(v);
  out << '\n';
  scorer_.write(out);
}

TaggerModel TaggerModel::read(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "absa-tagger 1") {
    throw std::runtime_error("not a tagger model file");
  }
  std::getline(in, line);
  const auto tags = split_fields(line);
  if (tags.size() != kNumTags + 1 || tags[0] != "tags") {
    throw std::runtime_error("tagger model: bad tag alphabet line");
  }
  for (int k = 0; k < kNumTags; ++k) {
    if (tags[k + 1] != tag_name(tag_from_index(k))) {
      throw std::runtime_error("tagger model: unexpected tag alphabet");
    }
  }
  std::getline(in, line);
  const auto fields = split_fields(line);
  if (fields.empty() || fields[0] != "config" || fields.size() % 2 != 1) {
    throw std::runtime_error("tagger model: bad config line");
  }
  TaggerConfig c;
  for (std::size_t i = 1; i + 1 < fields.size(); i += 2) {
    const auto key = fields[i];
    const auto val = fields[i + 1];
    auto as_int = [&] {
      auto v = parse_int<int>(val);
      if (!v) throw std::runtime_error("tagger model: bad value for " + std::string(key));
      return *v;
    };
    if (key == "embedding_dim") c.embedding_dim = as_int();
    else if (key == "half_window") c.half_window = as_int();
    else if (key == "conv1_maps") c.conv1_maps = as_int();
    else if (key == "conv1_width") c.conv1_width = as_int();
    else if (key == "conv2_maps") c.conv2_maps = as_int();
    else if (key == "conv2_width") c.conv2_width = as_int();
    else if (key == "pool_size") c.pool_size = as_int();
    else if (key == "pool_stride") c.pool_stride = as_int();
    else if (key == "hard_constraints") c.hard_constraints = as_int() != 0;
    else if (key == "dropout_keep") {
      auto v = parse_double(val);
      if (!v) throw std::runtime_error("tagger model: bad dropout_keep");
      c.train.dropout_keep = *v;
    }
  }
  TaggerModel m;
  m.config_ = c;
  m.trans_ = Transitions(kNumTags);
  m.grad_A_ = Matrix(kNumTags, kNumTags);
  m.grad_start_ = Matrix(1, kNumTags);
  auto read_row = [&](const char* label, Matrix& dst) {
    std::getline(in, line);
    const auto vals = split_fields(line);
    if (vals.size() != dst.size() + 1 || vals[0] != label) {
      throw std::runtime_error(std::string("tagger model: bad ") + label + " line");
    }
    for (std::size_t i = 0; i < dst.size(); ++i) {
      auto v = parse_double(vals[i + 1]);
      if (!v) throw std::runtime_error(std::string("tagger model: bad value in ") + label);
      dst.data()[i] = *v;
    }
  };
  read_row("transitions", m.trans_.A);
  read_row("start", m.trans_.start);
  m.scorer_ = Network::read(in);
  return m;
}

void TaggerModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write(out);
}

TaggerModel TaggerModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read(in);
}

double tagger_sentence_step(TaggerModel& model, const Sentence& sentence,
                            const EmbeddingTable& table, Mode mode, Rng* rng) {
  const int n = static_cast<int>(sentence.size());
  const auto& cfg = model.config();
  std::vector<ForwardTrace> traces;
  traces.reserve(n);
  Matrix H(n, kNumTags);
  ForwardContext ctx{mode, rng};
  for (int t = 0; t < n; ++t) {
    traces.push_back(
        model.scorer().forward(window_grid(sentence, t, table, cfg.half_window), ctx));
    for (int k = 0; k < kNumTags; ++k) H(t, k) = traces.back().output()(0, k);
  }
  std::vector<int> gold(n);
  for (int t = 0; t < n; ++t) gold[t] = tag_index(*sentence.tokens[t].tag);
  const Transitions trans = model.effective_transitions();
  NllResult r = structured_nll(H, trans, gold);

  Matrix grad_row(1, kNumTags);
  for (int t = 0; t < n; ++t) {
    for (int k = 0; k < kNumTags; ++k) grad_row(0, k) = r.dH(t, k);
    model.scorer().backward(traces[t], grad_row);
  }
  if (cfg.hard_constraints) {
    r.dA(tag_index(Tag::kOutside), tag_index(Tag::kInside)) = 0.0;
    r.dstart(0, tag_index(Tag::kInside)) = 0.0;
  }
  auto ps = model.params();
  Matrix& gA = *ps[ps.size() - 2].grad;
  Matrix& gS = *ps[ps.size() - 1].grad;
  for (std::size_t i = 0; i < gA.size(); ++i) gA.data()[i] += r.dA.data()[i];
  for (std::size_t i = 0; i < gS.size(); ++i) gS.data()[i] += r.dstart.data()[i];
  return r.loss;
}

namespace {

double mean_loss(const TaggerModel& model, std::span<const Sentence> corpus,
                 const EmbeddingTable& table) {
  const Transitions trans = model.effective_transitions();
  double total = 0.0;
  for (const auto& s : corpus) {
    const Matrix H = model.token_scores(s, table);
    std::vector<int> gold(s.size());
    for (std::size_t t = 0; t < s.size(); ++t) gold[t] = tag_index(*s.tokens[t].tag);
    total += log_partition(H, trans) - sentence_score(H, trans, gold);
  }
  return total / static_cast<double>(corpus.size());
}

}  // namespace

TaggerModel train_tagger(std::span<const Sentence> corpus, const EmbeddingTable& table,
                         const TaggerConfig& config, TrainReport* report,
                         const EpochCallback& on_epoch) {
  if (corpus.empty()) throw std::invalid_argument("train_tagger: empty corpus");
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (corpus[i].tokens.empty() || !corpus[i].fully_tagged()) {
      throw std::invalid_argument("train_tagger: sentence " + std::to_string(i) +
                                  " is missing gold tags");
    }
  }
  TaggerModel model(config);
  if (table.dim() != config.embedding_dim) {
    throw ShapeError("embedding table has dimension " + std::to_string(table.dim()) +
                     ", config expects " + std::to_string(config.embedding_dim));
  }
  Rng rng(mix64(config.train.seed));
  const Sgd sgd{config.train.learning_rate, config.train.l2_max};
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < config.train.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t idx : order) {
      model.zero_grad();
      tagger_sentence_step(model, corpus[idx], table, Mode::kTrain, &rng);
      sgd.step(model.params());
    }
    const double loss = mean_loss(model, corpus, table);
    if (report) report->epoch_loss.push_back(loss);
    if (on_epoch) on_epoch(epoch + 1, loss);
  }
  return model;
}

TagResult tag(const TaggerModel& model, const Sentence& sentence, const EmbeddingTable& table) {
  TagResult r;
  if (sentence.tokens.empty()) return r;
  const Matrix H = model.token_scores(sentence, table);
  const auto path = viterbi(H, model.effective_transitions());
  r.tags.reserve(path.size());
  for (int k : path) r.tags.push_back(tag_from_index(k));
  r.spans = iob2_decode(r.tags);
  return r;
}

}  // namespace absa
