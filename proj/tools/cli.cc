#include "cli.h"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <numeric>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "absa/eval.h"
#include "absa/rules.h"
#include "absa/tagger.h"
#include "absa/textio.h"
#include "toy.h"

namespace absa::cli {

namespace fs = std::filesystem;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// key=value lines; '#' starts a comment. Keys name long options without the
// leading dashes. Options given on the command line win.
void apply_config(CLI::App& sub, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string code = line.substr(0, line.find('#'));
    const auto t = trim(code);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError(path, lineno, "expected key=value");
    }
    const std::string key(trim(t.substr(0, eq)));
    const std::string value(trim(t.substr(eq + 1)));
    if (key == "config") throw ParseError(path, lineno, "config files cannot nest");
    CLI::Option* opt = sub.get_option_no_throw("--" + key);
    if (!opt) {
      throw ParseError(path, lineno, "unknown key '" + key + "' for " + sub.get_name());
    }
    if (opt->count() > 0) continue;
    opt->add_result(value);
    opt->run_callback();
  }
}

void require(CLI::App& sub, std::initializer_list<const char*> names) {
  for (const char* n : names) {
    if (sub.get_option(n)->count() == 0) {
      throw UsageError(sub.get_name() + ": " + n + " is required");
    }
  }
}

std::ostream& open_out(const std::string& path, std::ofstream& file, std::ostream& fallback) {
  if (path.empty() || path == "-") return fallback;
  file.open(path);
  if (!file) throw std::runtime_error("cannot write " + path);
  return file;
}

std::vector<Sentence> load_sentences(const std::string& path, const std::string& deprel_map = {}) {
  auto docs = load_parsed_corpus(path);
  if (!deprel_map.empty()) normalize_deprels(docs, load_deprel_map(deprel_map));
  return flatten(docs);
}

std::string where(const Sentence& s, std::size_t index) {
  return "sentence " + std::to_string(index + 1) + " (doc " + s.doc_id + ", position " +
         std::to_string(s.position) + ")";
}

// ---------------------------------------------------------------- gen-toy

struct GenToyArgs {
  std::string out;
  std::uint64_t seed = 0;
};

void cmd_gen_toy(const GenToyArgs& a, std::ostream& out) {
  toy::write_fixtures(a.out, a.seed);
  out << "wrote fixtures to " << a.out << '\n';
}

// ---------------------------------------------------------- train-tagger

struct TrainTaggerArgs {
  std::string train, embeddings, out, log;
  std::uint64_t seed = 0;
  TaggerConfig config;
  double l2_max = 3.0;
};

void cmd_train_tagger(TrainTaggerArgs a, std::ostream& out) {
  const auto sents = load_sentences(a.train);
  if (sents.empty()) throw std::runtime_error(a.train + ": no sentences");
  for (std::size_t i = 0; i < sents.size(); ++i) {
    if (!sents[i].fully_tagged()) {
      throw std::runtime_error(a.train + ": " + where(sents[i], i) + " is missing gold tags");
    }
  }
  a.config.train.seed = a.seed;
  a.config.train.l2_max = a.l2_max > 0 ? std::optional<double>(a.l2_max) : std::nullopt;
  a.config.validate();
  const auto table =
      load_embeddings(a.embeddings, a.config.embedding_dim, UnkPolicy::kSeededHash, a.seed);
  std::ofstream log_file;
  std::ostream& log = open_out(a.log, log_file, out);
  const auto model = train_tagger(sents, table, a.config, nullptr, [&](int epoch, double loss) {
    log << "epoch " << epoch << " loss " << format_double(loss) << '\n';
  });
  model.save(a.out);
}

// ------------------------------------------------------------------- tag

struct TagArgs {
  std::string model, input, embeddings, mode = "cnn", lexicon, stop_words, deprel_map, out;
  std::string rules = "1,2.1,2.2,3,4,5";
  std::uint64_t seed = 0;
};

RuleConfig make_rule_config(const std::string& lexicon, const std::string& stop_words,
                            const std::string& rules) {
  RuleConfig rc;
  if (!lexicon.empty()) rc.sentiment_lexicon = load_lexicon(lexicon, LexiconKind::kSentimentConcepts);
  if (!stop_words.empty()) rc.stop_words = load_lexicon(stop_words, LexiconKind::kStopWords);
  rc.enabled_rules = parse_rule_list(rules);
  return rc;
}

void write_tagged(std::ostream& out, const std::vector<Sentence>& sents,
                  const std::vector<SpanSet>& spans) {
  std::string doc;
  for (std::size_t i = 0; i < sents.size(); ++i) {
    const auto& s = sents[i];
    if (i == 0 || s.doc_id != doc) {
      if (i > 0) out << '\n';
      doc = s.doc_id;
      out << "# doc " << doc << '\n';
    } else {
      out << '\n';
    }
    out << "# spans";
    for (const auto& sp : spans[i]) out << ' ' << sp.start << '-' << sp.end;
    out << '\n';
    const auto tags = iob2_encode(spans[i], s.size());
    for (std::size_t t = 0; t < s.size(); ++t) {
      const auto& tok = s.tokens[t];
      out << tok.surface << '\t' << pos_name(tok.pos) << '\t'
          << (tok.head ? std::to_string(*tok.head + 1)
                       : (tok.deprel.empty() || tok.deprel == "_" ? "_" : "0"))
          << '\t' << (tok.deprel.empty() ? "_" : tok.deprel) << '\t' << tag_name(tags[t])
          << '\n';
    }
  }
}

void cmd_tag(const TagArgs& a, std::ostream& out) {
  const bool use_cnn = a.mode == "cnn" || a.mode == "cnn+lp";
  const bool use_lp = a.mode == "lp" || a.mode == "cnn+lp";
  if (!use_cnn && !use_lp) {
    throw UsageError("tag: --mode must be cnn, lp or cnn+lp, got '" + a.mode + "'");
  }
  const auto sents = load_sentences(a.input, a.deprel_map);
  if (a.mode == "lp") {
    for (std::size_t i = 0; i < sents.size(); ++i) {
      if (!sents[i].has_dependencies()) {
        throw std::runtime_error("mode lp needs dependency columns; " + where(sents[i], i) +
                                 " has none");
      }
    }
  }
  std::optional<TaggerModel> model;
  std::optional<EmbeddingTable> table;
  if (use_cnn) {
    if (a.model.empty() || a.embeddings.empty()) {
      throw UsageError("tag: --model and --embeddings are required for mode " + a.mode);
    }
    model = TaggerModel::load(a.model);
    table = load_embeddings(a.embeddings, model->config().embedding_dim,
                            UnkPolicy::kSeededHash, model->config().train.seed);
  }
  const RuleConfig rc = make_rule_config(a.lexicon, a.stop_words, a.rules);
  std::vector<SpanSet> spans;
  for (const auto& s : sents) {
    SpanSet cnn, lp;
    if (use_cnn) cnn = tag(*model, s, *table).spans;
    if (use_lp) lp = apply_rules(s, rc);
    spans.push_back(a.mode == "cnn" ? normalize_spans(cnn) : ensemble(cnn, lp, s, rc));
  }
  std::ofstream file;
  write_tagged(open_out(a.out, file, out), sents, spans);
}

// ----------------------------------------------------------- eval-aspect

struct EvalArgs {
  std::string gold, pred, out;
  int min_length = 1;
  std::uint64_t seed = 0;
};

std::vector<SpanSet> spans_of(const std::vector<Sentence>& sents, const std::string& path) {
  std::vector<SpanSet> out;
  for (std::size_t i = 0; i < sents.size(); ++i) {
    if (!sents[i].fully_tagged()) {
      throw std::runtime_error(path + ": " + where(sents[i], i) + " has no tags");
    }
    out.push_back(iob2_decode(sents[i].tags()));
  }
  return out;
}

void cmd_eval_aspect(const EvalArgs& a, std::ostream& out) {
  const auto gold = load_sentences(a.gold);
  const auto pred = load_sentences(a.pred);
  if (gold.size() != pred.size()) {
    throw std::runtime_error("gold has " + std::to_string(gold.size()) +
                             " sentences, predictions have " + std::to_string(pred.size()));
  }
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i].size() != pred[i].size()) {
      throw std::runtime_error("misaligned " + where(gold[i], i) + ": " +
                               std::to_string(gold[i].size()) + " gold tokens vs " +
                               std::to_string(pred[i].size()) + " predicted");
    }
  }
  const auto report =
      span_prf(spans_of(gold, a.gold), spans_of(pred, a.pred), SpanScoring{a.min_length});
  const std::string title = a.min_length > 1 ? "aspect phrases" : "aspect terms";
  write_report(out, report, title);
  if (!a.out.empty()) {
    std::ofstream f(a.out);
    if (!f) throw std::runtime_error("cannot write " + a.out);
    write_report(f, report, title);
  }
}

// ------------------------------------------------------- subjectivity

struct SubjArgs {
  std::string corpus, clues, embeddings, out, gbn_out, motifs_out, report;
  std::uint64_t seed = 0;
  int folds = 0;
  bool skip_pretrain = false;
  std::string widths = "3,4,5";
  std::string search = "auto";
  SubjPipelineOptions pipeline;
};

void finish_pipeline_options(SubjArgs& a) {
  auto& m = a.pipeline.model;
  m.widths.clear();
  for (auto w : split_fields(a.widths, ",")) {
    const auto v = parse_int<int>(w);
    if (!v) throw UsageError("bad --widths value '" + a.widths + "'");
    m.widths.push_back(*v);
  }
  m.train.seed = a.seed;
  m.lbl.seed = a.seed;
  m.skip_pretrain = a.skip_pretrain;
  if (a.search == "auto") a.pipeline.structure.search = StructureSearch::kAuto;
  else if (a.search == "greedy") a.pipeline.structure.search = StructureSearch::kGreedy;
  else if (a.search == "exhaustive") a.pipeline.structure.search = StructureSearch::kExhaustive;
  else throw UsageError("--search must be auto, greedy or exhaustive");
  m.validate();
}

struct TrainedSubj {
  SubjPipelineResult motifs;
  SubjectivityModel model;
};

TrainedSubj train_subj(std::span<const LabeledSentence> corpus, const Lexicon& clues,
                       const SubjArgs& a, const EmbeddingTable* table) {
  auto m = learn_motifs(corpus, clues, a.pipeline);
  auto model = train_subjectivity(corpus, m.motifs, a.pipeline.model, table);
  return {std::move(m), std::move(model)};
}

void cmd_train_subj(SubjArgs a, std::ostream& out) {
  finish_pipeline_options(a);
  if (a.clues.empty()) throw UsageError("train-subj: --clues lexicon is required");
  const auto clues = load_lexicon(a.clues, LexiconKind::kSubjectivityClues);
  const auto corpus = load_labeled_corpus(a.corpus);
  if (corpus.empty()) throw std::runtime_error(a.corpus + ": no sentences");
  std::optional<EmbeddingTable> table;
  if (!a.embeddings.empty()) {
    table = load_embeddings(a.embeddings, a.pipeline.model.embedding_dim,
                            UnkPolicy::kSeededHash, a.seed);
  }
  const EmbeddingTable* tp = table ? &*table : nullptr;

  if (a.folds > 0) {
    const auto folds = kfold(corpus.size(), a.folds, a.seed);
    std::vector<Subjectivity> gold(corpus.size()), pred(corpus.size());
    double sum = 0.0;
    for (std::size_t f = 0; f < folds.size(); ++f) {
      std::vector<LabeledSentence> train;
      for (auto i : folds[f].train) train.push_back(corpus[i]);
      const auto trained = train_subj(train, clues, a, tp);
      std::size_t correct = 0;
      for (auto i : folds[f].test) {
        gold[i] = corpus[i].label;
        pred[i] = classify(trained.model, corpus[i].sentence).label;
        if (gold[i] == pred[i]) ++correct;
      }
      const double acc = static_cast<double>(correct) / folds[f].test.size();
      sum += acc;
      out << "fold " << f + 1 << " test=" << folds[f].test.size()
          << " accuracy=" << format_double(acc) << '\n';
    }
    out << "mean_accuracy=" << format_double(sum / folds.size()) << '\n';
    write_report(out, classification_report(gold, pred), "cross-validation (pooled folds)");
  }

  SubjectivityReport report;
  auto m = learn_motifs(corpus, clues, a.pipeline);
  const auto model = train_subjectivity(corpus, m.motifs, a.pipeline.model, tp, &report);
  out << "clue_words=" << m.clue_words.size() << " motifs=" << m.motifs.motifs.size()
      << " pretrain_sentences=" << report.pretrain_sentences << '\n';
  for (std::size_t e = 0; e < report.epoch_loss.size(); ++e) {
    out << "epoch " << e + 1 << " loss " << format_double(report.epoch_loss[e]) << '\n';
  }
  if (!a.out.empty()) model.save(a.out);
  if (!a.gbn_out.empty()) {
    std::ofstream f(a.gbn_out);
    if (!f) throw std::runtime_error("cannot write " + a.gbn_out);
    m.gbn.write(f);
  }
  if (!a.motifs_out.empty()) {
    std::ofstream f(a.motifs_out);
    if (!f) throw std::runtime_error("cannot write " + a.motifs_out);
    m.motifs.write(f);
  }
}

struct ClassifyArgs {
  std::string model, input, out, report;
  std::uint64_t seed = 0;
};

void cmd_classify_subj(const ClassifyArgs& a, std::ostream& out) {
  const auto model = SubjectivityModel::load(a.model);
  const auto corpus = load_labeled_corpus(a.input);
  std::ofstream file;
  std::ostream& o = open_out(a.out, file, out);
  std::vector<Subjectivity> gold, pred;
  bool all_labeled = !corpus.empty();
  for (const auto& ls : corpus) {
    const auto r = classify(model, ls.sentence);
    o << subjectivity_name(r.label) << '\t' << format_double(r.probabilities[0]) << '\t'
      << format_double(r.probabilities[1]) << '\t' << ls.sentence.text() << '\n';
    all_labeled = all_labeled && ls.labeled;
    gold.push_back(ls.label);
    pred.push_back(r.label);
  }
  if (all_labeled) {
    std::ofstream rf;
    write_report(open_out(a.report, rf, out), classification_report(gold, pred),
                 "subjectivity");
  }
}

struct GbnArgs {
  std::string corpus, clues, out, motifs_out, search = "auto";
  std::uint64_t seed = 0;
  SubjPipelineOptions pipeline;
};

void cmd_learn_gbn(GbnArgs a, std::ostream& out) {
  if (a.search == "auto") a.pipeline.structure.search = StructureSearch::kAuto;
  else if (a.search == "greedy") a.pipeline.structure.search = StructureSearch::kGreedy;
  else if (a.search == "exhaustive") a.pipeline.structure.search = StructureSearch::kExhaustive;
  else throw UsageError("--search must be auto, greedy or exhaustive");
  const auto clues = load_lexicon(a.clues, LexiconKind::kSubjectivityClues);
  const auto corpus = load_labeled_corpus(a.corpus);
  const auto m = learn_motifs(corpus, clues, a.pipeline);
  std::ofstream file;
  m.gbn.write(open_out(a.out, file, out));
  if (!a.motifs_out.empty()) {
    std::ofstream f(a.motifs_out);
    if (!f) throw std::runtime_error("cannot write " + a.motifs_out);
    m.motifs.write(f);
  }
}

void add_structure_options(CLI::App* sub, SubjPipelineOptions& p, std::string& search) {
  sub->add_option("--order", p.structure.order, "Markov order R of the dynamic network");
  sub->add_option("--max-parents", p.structure.max_parents, "Parent limit per node");
  sub->add_option("--epsilon", p.structure.epsilon, "Extra per-parent penalty");
  sub->add_option("--search", search, "auto, greedy or exhaustive");
  sub->add_option("--tau", p.tau, "Minimum per-instant log-likelihood of a motif");
  sub->add_option("--top-motifs", p.top_motifs, "Keep at most this many motifs");
  sub->add_option("--top-clues", p.top_clues, "Most frequent clue words used as variables");
}

}  // namespace

SubjPipelineResult learn_motifs(std::span<const LabeledSentence> corpus, const Lexicon& clues,
                                const SubjPipelineOptions& options) {
  std::vector<Sentence> sents;
  sents.reserve(corpus.size());
  for (const auto& ls : corpus) sents.push_back(ls.sentence);
  SubjPipelineResult r;
  r.clue_words = select_clue_words(sents, clues, options.top_clues);
  r.gbn.order = options.structure.order;
  r.gbn.max_parents = options.structure.max_parents;
  r.motifs.order = options.structure.order;
  r.motifs.threshold = options.tau;
  if (r.clue_words.empty()) return r;
  const auto series = build_bow_series(sents, r.clue_words);
  r.gbn = learn_structure(series, options.structure);
  r.motifs = extract_motifs(r.gbn, options.tau);
  if (r.motifs.motifs.size() > options.top_motifs) r.motifs.motifs.resize(options.top_motifs);
  return r;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Aspect extraction and subjectivity detection toolkit", "absa"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  std::string config;
  auto with_config = [&](CLI::App* sub) {
    sub->add_option("--config", config, "key=value file; command-line flags take precedence");
    return sub;
  };

  GenToyArgs gen;
  auto* s_gen = with_config(app.add_subcommand("gen-toy", "Write the deterministic toy fixtures"));
  s_gen->add_option("--out", gen.out, "Output directory");
  s_gen->add_option("--seed", gen.seed, "Random seed");

  TrainTaggerArgs tt;
  auto* s_tt = with_config(app.add_subcommand("train-tagger", "Train the convolutional tagger"));
  s_tt->add_option("--train", tt.train, "Training corpus with gold IOB2 tags");
  s_tt->add_option("--embeddings", tt.embeddings, "Word vectors, one word per line");
  s_tt->add_option("--out", tt.out, "Model file to write");
  s_tt->add_option("--seed", tt.seed, "Random seed");
  s_tt->add_option("--log", tt.log, "Loss log file (default: standard output)");
  s_tt->add_option("--embedding-dim", tt.config.embedding_dim, "Word vector dimension");
  s_tt->add_option("--conv1-maps", tt.config.conv1_maps, "Feature maps in the first layer");
  s_tt->add_option("--conv1-width", tt.config.conv1_width, "Kernel width of the first layer");
  s_tt->add_option("--conv2-maps", tt.config.conv2_maps, "Feature maps in the second layer");
  s_tt->add_option("--conv2-width", tt.config.conv2_width, "Kernel width of the second layer");
  s_tt->add_option("--pool-size", tt.config.pool_size, "Max-pool window");
  s_tt->add_option("--pool-stride", tt.config.pool_stride, "Max-pool stride");
  s_tt->add_option("--init-scale", tt.config.init_scale, "Uniform initialisation range");
  s_tt->add_option("--lr", tt.config.train.learning_rate, "SGD learning rate");
  s_tt->add_option("--epochs", tt.config.train.epochs, "Training epochs");
  s_tt->add_option("--dropout-keep", tt.config.train.dropout_keep, "Dropout keep probability");
  s_tt->add_option("--l2-max", tt.l2_max, "Row norm cap of the output layer (0 disables)");
  s_tt->add_option("--hard-constraints", tt.config.hard_constraints,
                   "Forbid O->I and start->I transitions");

  TagArgs tg;
  auto* s_tag = with_config(app.add_subcommand("tag", "Extract aspect terms"));
  s_tag->add_option("--model", tg.model, "Tagger model (modes cnn and cnn+lp)");
  s_tag->add_option("--input", tg.input, "Parsed corpus");
  s_tag->add_option("--embeddings", tg.embeddings, "Word vectors");
  s_tag->add_option("--mode", tg.mode, "cnn, lp or cnn+lp");
  s_tag->add_option("--lexicon", tg.lexicon, "Sentiment lexicon for the rules");
  s_tag->add_option("--stop-words", tg.stop_words, "Stop-word list for rule 5");
  s_tag->add_option("--deprel-map", tg.deprel_map, "Relabel dependencies, one from<TAB>to per line");
  s_tag->add_option("--rules", tg.rules, "Enabled rules, e.g. 1,2.1,2.2,3,4,5");
  s_tag->add_option("--out", tg.out, "Output file (default: standard output)");
  s_tag->add_option("--seed", tg.seed, "Accepted for uniformity; tagging is deterministic");

  EvalArgs ev;
  auto* s_ev = with_config(app.add_subcommand("eval-aspect", "Score predicted aspect spans"));
  s_ev->add_option("--gold", ev.gold, "Gold corpus");
  s_ev->add_option("--pred", ev.pred, "Predicted corpus");
  s_ev->add_option("--min-length", ev.min_length, "Score only spans with at least this many tokens");
  s_ev->add_option("--out", ev.out, "Also write the report here");
  s_ev->add_option("--seed", ev.seed, "Accepted for uniformity; scoring is deterministic");

  SubjArgs sj;
  auto* s_sj = with_config(app.add_subcommand("train-subj", "Train the subjectivity classifier"));
  s_sj->add_option("--corpus", sj.corpus, "Labeled sentences");
  s_sj->add_option("--clues", sj.clues, "Subjectivity clue lexicon");
  s_sj->add_option("--embeddings", sj.embeddings, "Word vectors (default: log-bilinear init)");
  s_sj->add_option("--out", sj.out, "Model file to write");
  s_sj->add_option("--gbn-out", sj.gbn_out, "Write the learned network here");
  s_sj->add_option("--motifs-out", sj.motifs_out, "Write the motif set here");
  s_sj->add_option("--seed", sj.seed, "Random seed");
  s_sj->add_option("--folds", sj.folds, "k-fold cross-validation before the final fit (0 = off)");
  s_sj->add_flag("--skip-pretrain", sj.skip_pretrain, "Skip motif filtering and CD pre-training");
  s_sj->add_option("--window", sj.pipeline.model.window, "Tokens per sentence window");
  s_sj->add_option("--embedding-dim", sj.pipeline.model.embedding_dim, "Word vector dimension");
  s_sj->add_option("--maps", sj.pipeline.model.maps, "Feature maps per conv layer");
  s_sj->add_option("--widths", sj.widths, "Kernel widths, comma separated");
  s_sj->add_option("--pool-size", sj.pipeline.model.pool_size, "Max-pool window");
  s_sj->add_option("--init-scale", sj.pipeline.model.init_scale, "Uniform initialisation range");
  s_sj->add_option("--lr", sj.pipeline.model.train.learning_rate, "SGD learning rate");
  s_sj->add_option("--epochs", sj.pipeline.model.train.epochs, "Fine-tuning epochs");
  s_sj->add_option("--dropout-keep", sj.pipeline.model.train.dropout_keep,
                   "Dropout keep probability");
  s_sj->add_option("--pretrain-epochs", sj.pipeline.model.pretrain.epochs, "CD-1 epochs per layer");
  s_sj->add_option("--pretrain-lr", sj.pipeline.model.pretrain.learning_rate, "CD-1 learning rate");
  s_sj->add_option("--pretrain-batch", sj.pipeline.model.pretrain.batch_size, "CD-1 batch size");
  s_sj->add_option("--lbl-epochs", sj.pipeline.model.lbl.epochs, "Log-bilinear init epochs");
  s_sj->add_option("--filter-window", sj.pipeline.model.filter.window, "Motif filter token window");
  add_structure_options(s_sj, sj.pipeline, sj.search);

  ClassifyArgs cl;
  auto* s_cl = with_config(app.add_subcommand("classify-subj", "Classify sentences"));
  s_cl->add_option("--model", cl.model, "Subjectivity model");
  s_cl->add_option("--input", cl.input, "Sentences as label<TAB>text, label may be _");
  s_cl->add_option("--out", cl.out, "Output file (default: standard output)");
  s_cl->add_option("--report", cl.report, "Report file when every input is labeled");
  s_cl->add_option("--seed", cl.seed, "Accepted for uniformity; inference is deterministic");

  GbnArgs gb;
  auto* s_gb = with_config(app.add_subcommand("learn-gbn", "Learn the dynamic Gaussian network"));
  s_gb->add_option("--corpus", gb.corpus, "Labeled sentences in document order");
  s_gb->add_option("--clues", gb.clues, "Subjectivity clue lexicon");
  s_gb->add_option("--out", gb.out, "Network file (default: standard output)");
  s_gb->add_option("--motifs-out", gb.motifs_out, "Write the motif set here");
  s_gb->add_option("--seed", gb.seed, "Accepted for uniformity; learning is deterministic");
  add_structure_options(s_gb, gb.pipeline, gb.search);

  std::vector<std::string> argv_store{"absa"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : argv_store) argv.push_back(s.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "absa: " << e.what() << '\n';
    return e.get_exit_code() != 0 ? e.get_exit_code() : 2;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    if (!config.empty()) apply_config(*sub, config);
    if (sub == s_gen) {
      require(*sub, {"--out", "--seed"});
      cmd_gen_toy(gen, out);
    } else if (sub == s_tt) {
      require(*sub, {"--train", "--embeddings", "--out", "--seed"});
      cmd_train_tagger(tt, out);
    } else if (sub == s_tag) {
      require(*sub, {"--input"});
      cmd_tag(tg, out);
    } else if (sub == s_ev) {
      require(*sub, {"--gold", "--pred"});
      cmd_eval_aspect(ev, out);
    } else if (sub == s_sj) {
      require(*sub, {"--corpus", "--seed"});
      cmd_train_subj(sj, out);
    } else if (sub == s_cl) {
      require(*sub, {"--model", "--input"});
      cmd_classify_subj(cl, out);
    } else if (sub == s_gb) {
      require(*sub, {"--corpus", "--clues"});
      cmd_learn_gbn(gb, out);
    }
  } catch (const std::exception& e) {
    err << "absa: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace absa::cli
