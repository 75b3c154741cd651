#include "absa/subjectivity.h"

#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "absa/textio.h"

namespace absa {

void SubjectivityConfig::validate() const {
  if (window < 1 || embedding_dim < 1 || maps < 1 || pool_size < 1) {
    throw std::invalid_argument("subjectivity config: window, embedding_dim, maps and "
                                "pool_size must be positive");
  }
  if (widths.empty()) throw std::invalid_argument("subjectivity config: no conv layers");
  train.validate();
  layer_lengths();
}

std::vector<std::size_t> SubjectivityConfig::layer_lengths() const {
  std::vector<std::size_t> lens;
  std::size_t len = static_cast<std::size_t>(window);
  for (std::size_t l = 0; l < widths.size(); ++l) {
    lens.push_back(len);
    const int k = widths[l];
    if (k < 1 || len < static_cast<std::size_t>(k)) {
      throw ShapeError("subjectivity config: conv layer " + std::to_string(l + 1) +
                       " of width " + std::to_string(k) + " receives only " +
                       std::to_string(len) + " rows");
    }
    len = len - k + 1;
    if (l + 1 < widths.size()) len = pooled_length(len, pool_size, 0);
  }
  lens.push_back(len);
  return lens;
}

std::vector<LabeledSentence> parse_labeled_corpus(std::istream& in, const std::string& source) {
  std::vector<LabeledSentence> out;
  std::string doc = "0";
  int position = 0;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty()) continue;
    if (t.starts_with("#")) {
      const auto f = split_fields(t.substr(1));
      if (f.size() == 2 && f[0] == "doc") {
        doc = std::string(f[1]);
        position = 0;
      }
      continue;
    }
    const auto tab = t.find('\t');
    if (tab == std::string_view::npos) {
      throw ParseError(source, lineno, "expected 'label<TAB>tokens'");
    }
    LabeledSentence ls;
    const auto label = trim(t.substr(0, tab));
    try {
      if (label == "_") ls.labeled = false;
      else ls.label = parse_subjectivity(label);
    } catch (const std::invalid_argument& e) {
      throw ParseError(source, lineno, e.what());
    }
    for (auto w : split_fields(t.substr(tab + 1))) {
      Token tok;
      tok.surface = std::string(w);
      ls.sentence.tokens.push_back(std::move(tok));
    }
    if (ls.sentence.tokens.empty()) throw ParseError(source, lineno, "sentence has no tokens");
    ls.sentence.doc_id = doc;
    ls.sentence.position = position++;
    out.push_back(std::move(ls));
  }
  return out;
}

std::vector<LabeledSentence> load_labeled_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return parse_labeled_corpus(in, path.string());
}

void write_labeled_corpus(std::ostream& out, std::span<const LabeledSentence> corpus) {
  std::string doc;
  bool first = true;
  for (const auto& ls : corpus) {
    if (first || ls.sentence.doc_id != doc) {
      doc = ls.sentence.doc_id;
      out << "# doc " << doc << '\n';
      first = false;
    }
    out << (ls.labeled ? subjectivity_name(ls.label) : "_") << '\t' << ls.sentence.text() << '\n';
  }
}

namespace {

Network build_network(const SubjectivityConfig& c) {
  const auto lens = c.layer_lengths();
  Network net;
  int depth = c.embedding_dim;
  for (std::size_t l = 0; l < c.widths.size(); ++l) {
    net.add(std::make_unique<Conv1dLayer>(ConvLayer(c.maps, c.widths[l], depth)));
    net.add(std::make_unique<ActivationLayer>(Activation::kSigmoid));
    if (l + 1 < c.widths.size()) {
      net.add(std::make_unique<MaxPoolLayer>(c.pool_size, 0));
    } else {
      const int global = static_cast<int>(lens.back());
      net.add(std::make_unique<MaxPoolLayer>(global, global));
    }
    depth = c.maps;
  }
  net.add(std::make_unique<DropoutLayer>(c.train.dropout_keep));
  net.add(std::make_unique<DenseLayer>(c.maps, 2));
  return net;
}

// Layer index of the l-th conv layer in build_network's layout.
std::size_t conv_index(std::size_t l) { return 3 * l; }

}  // namespace

SubjectivityModel::SubjectivityModel(const SubjectivityConfig& config, EmbeddingTable embedding)
    : config_(config), embedding_(std::move(embedding)) {
  config_.validate();
  if (embedding_.dim() != config_.embedding_dim) {
    throw ShapeError("embedding table has dimension " + std::to_string(embedding_.dim()) +
                     ", config expects " + std::to_string(config_.embedding_dim));
  }
  net_ = build_network(config_);
}

Matrix SubjectivityModel::embed(const Sentence& sentence) const {
  Matrix grid(config_.window, config_.embedding_dim);
  const std::size_t n = std::min(sentence.size(), static_cast<std::size_t>(config_.window));
  for (std::size_t i = 0; i < n; ++i) embedding_.lookup_into(sentence.tokens[i].surface, grid.row(i));
  return grid;
}

std::array<double, 2> SubjectivityModel::probabilities(const Sentence& sentence) const {
  const Matrix out = net_.predict(embed(sentence));
  const auto p = softmax(out.row(0));
  return {p[0], p[1]};
}

void SubjectivityModel::write(std::ostream& out) const {
  const auto& c = config_;
  out << "absa-subjectivity 1\n";
  out << "config window " << c.window << " embedding_dim " << c.embedding_dim << " maps "
      << c.maps << " widths ";
  for (std::size_t i = 0; i < c.widths.size(); ++i) out << (i ? "," : "") << c.widths[i];
  out << " pool_size " << c.pool_size << " dropout_keep " << format_double(c.train.dropout_keep)
      << '\n';
  out << "embeddings " << embedding_.size() << ' '
      << (embedding_.unk_policy() == UnkPolicy::kZero ? "zero" : "hash") << ' '
      << embedding_.seed() << '\n';
  write_embeddings(out, embedding_);
  net_.write(out);
}

SubjectivityModel SubjectivityModel::read(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "absa-subjectivity 1") {
    throw std::runtime_error("not a subjectivity model file");
  }
  std::getline(in, line);
  const auto fields = split_fields(line);
  if (fields.empty() || fields[0] != "config" || fields.size() % 2 != 1) {
    throw std::runtime_error("subjectivity model: bad config line");
  }
  SubjectivityConfig c;
  for (std::size_t i = 1; i + 1 < fields.size(); i += 2) {
    const auto key = fields[i];
    const auto val = fields[i + 1];
    auto as_int = [&](std::string_view v) {
      auto x = parse_int<int>(v);
      if (!x) throw std::runtime_error("subjectivity model: bad value for " + std::string(key));
      return *x;
    };
    if (key == "window") c.window = as_int(val);
    else if (key == "embedding_dim") c.embedding_dim = as_int(val);
    else if (key == "maps") c.maps = as_int(val);
    else if (key == "pool_size") c.pool_size = as_int(val);
    else if (key == "widths") {
      c.widths.clear();
      for (auto w : split_fields(val, ",")) c.widths.push_back(as_int(w));
    } else if (key == "dropout_keep") {
      auto v = parse_double(val);
      if (!v) throw std::runtime_error("subjectivity model: bad dropout_keep");
      c.train.dropout_keep = *v;
    }
  }
  std::getline(in, line);
  const auto emb = split_fields(line);
  if (emb.size() != 4 || emb[0] != "embeddings") {
    throw std::runtime_error("subjectivity model: bad embeddings line");
  }
  const auto count = parse_int<std::size_t>(emb[1]);
  const auto seed = parse_int<std::uint64_t>(emb[3]);
  if (!count || !seed || (emb[2] != "zero" && emb[2] != "hash")) {
    throw std::runtime_error("subjectivity model: bad embeddings line");
  }
  // emb views into line, which the loop below overwrites.
  const UnkPolicy policy = emb[2] == "zero" ? UnkPolicy::kZero : UnkPolicy::kSeededHash;
  std::stringstream block;
  for (std::size_t i = 0; i < *count; ++i) {
    if (!std::getline(in, line)) throw std::runtime_error("subjectivity model: truncated");
    block << line << '\n';
  }
  auto table = parse_embeddings(block, "subjectivity model", c.embedding_dim, policy, *seed);
  SubjectivityModel m(c, std::move(table));
  Network net = Network::read(in);
  if (net.num_layers() != m.net_.num_layers()) {
    throw std::runtime_error("subjectivity model: network does not match config");
  }
  m.net_ = std::move(net);
  return m;
}

void SubjectivityModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write(out);
}

SubjectivityModel SubjectivityModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read(in);
}

namespace {

// Indices of corpus sentences selected by the motif filter, run per class.
std::vector<std::size_t> pretrain_selection(std::span<const LabeledSentence> corpus,
                                            const MotifSet& motifs,
                                            const FilterOptions& options) {
  std::vector<std::size_t> picked;
  for (Subjectivity cls : {Subjectivity::kSubjective, Subjectivity::kObjective}) {
    std::vector<std::size_t> idx;
    std::vector<Sentence> sents;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      if (corpus[i].label == cls) {
        idx.push_back(i);
        sents.push_back(corpus[i].sentence);
      }
    }
    if (sents.empty()) continue;
    const auto r = filter_sentences(sents, motifs, options);
    for (auto k : r.expanded()) picked.push_back(idx[k]);
  }
  return picked;
}

void pretrain_convs(SubjectivityModel& model, std::vector<Matrix> data,
                    const SubjectivityConfig& config, Rng& rng, SubjectivityReport* report) {
  Network& net = model.network();
  for (std::size_t l = 0; l < config.widths.size(); ++l) {
    auto& conv = static_cast<Conv1dLayer&>(net.layer(conv_index(l))).conv();
    ConvRbm rbm(conv.num_kernels(), conv.width, conv.depth);
    rbm.kernels = conv.weights;
    for (int z = 0; z < rbm.groups(); ++z) rbm.hidden_bias[z] = conv.bias(0, z);
    rbm.sigma = empirical_sigma(std::span<const Matrix>(data));

    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> errors;
    const auto bs = static_cast<std::size_t>(config.pretrain.batch_size);
    for (int e = 0; e < config.pretrain.epochs; ++e) {
      rng.shuffle(order);
      double total = 0.0;
      for (std::size_t start = 0; start < order.size(); start += bs) {
        const std::size_t end = std::min(order.size(), start + bs);
        std::vector<Matrix> batch;
        for (std::size_t k = start; k < end; ++k) batch.push_back(data[order[k]]);
        total += conv_cd1_epoch(rbm, batch, config.pretrain.learning_rate, rng,
                                config.pretrain.cd) *
                 static_cast<double>(batch.size());
      }
      errors.push_back(total / static_cast<double>(data.size()));
    }
    if (report) report->pretrain_errors.push_back(std::move(errors));

    conv.weights = rbm.kernels;
    for (int z = 0; z < rbm.groups(); ++z) conv.bias(0, z) = rbm.hidden_bias[z];
    if (l + 1 == config.widths.size()) break;
    for (auto& grid : data) {
      grid = max_pool_rows(conv_rbm_hidden(rbm, grid, HiddenMode::kProb), config.pool_size, 0);
    }
  }
}

double mean_loss(const SubjectivityModel& model, std::span<const LabeledSentence> corpus) {
  double total = 0.0;
  for (const auto& ls : corpus) {
    const Matrix out = model.network().predict(model.embed(ls.sentence));
    total += softmax_cross_entropy(out, static_cast<int>(ls.label), nullptr);
  }
  return total / static_cast<double>(corpus.size());
}

}  // namespace

SubjectivityModel train_subjectivity(std::span<const LabeledSentence> corpus,
                                     const MotifSet& motifs, const SubjectivityConfig& config,
                                     const EmbeddingTable* embeddings,
                                     SubjectivityReport* report) {
  if (corpus.empty()) throw std::invalid_argument("train_subjectivity: empty corpus");
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (!corpus[i].labeled) {
      throw std::invalid_argument("train_subjectivity: sentence " + std::to_string(i) +
                                  " has no label");
    }
  }
  config.validate();

  EmbeddingTable table(config.embedding_dim);
  if (embeddings) {
    table = *embeddings;
  } else {
    std::vector<Sentence> sents;
    sents.reserve(corpus.size());
    for (const auto& ls : corpus) sents.push_back(ls.sentence);
    LblOptions lbl = config.lbl;
    lbl.dim = config.embedding_dim;
    table = lbl_init(sents, lbl).table;
  }

  SubjectivityModel model(config, std::move(table));
  // Separate streams so that skipping pre-training leaves initialisation and
  // fine-tuning draws unchanged.
  Rng init_rng(config.train.seed);
  Rng pre_rng(mix64(config.train.seed ^ 0x70726574ULL));
  Rng fit_rng(mix64(config.train.seed));
  init_uniform(model.network(), init_rng, config.init_scale);

  if (report) *report = {};
  if (!config.skip_pretrain && !motifs.empty() && config.pretrain.epochs > 0) {
    const auto picked = pretrain_selection(corpus, motifs, config.filter);
    if (!picked.empty()) {
      std::vector<Matrix> data;
      data.reserve(picked.size());
      for (auto i : picked) data.push_back(model.embed(corpus[i].sentence));
      if (report) report->pretrain_sentences = picked.size();
      pretrain_convs(model, std::move(data), config, pre_rng, report);
    }
  }

  const Sgd sgd{config.train.learning_rate, config.train.l2_max};
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  ForwardContext ctx{Mode::kTrain, &fit_rng};
  Network& net = model.network();
  for (int epoch = 0; epoch < config.train.epochs; ++epoch) {
    fit_rng.shuffle(order);
    for (auto i : order) {
      net.zero_grad();
      const auto trace = net.forward(model.embed(corpus[i].sentence), ctx);
      Matrix grad;
      softmax_cross_entropy(trace.output(), static_cast<int>(corpus[i].label), &grad);
      net.backward(trace, grad);
      sgd.step(net.params());
    }
    if (report) report->epoch_loss.push_back(mean_loss(model, corpus));
  }
  return model;
}

Subjectivity decide(const std::array<double, 2>& p) {
  return p[0] > p[1] ? Subjectivity::kSubjective : Subjectivity::kObjective;
}

SubjectivityResult classify(const SubjectivityModel& model, const Sentence& sentence) {
  SubjectivityResult r;
  r.probabilities = model.probabilities(sentence);
  r.label = decide(r.probabilities);
  return r;
}

}  // namespace absa
