#include "absa/gbn.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>

#include "absa/random.h"
#include "absa/textio.h"

namespace absa {

namespace {

// Solves G x = b for symmetric positive definite G by Cholesky. Throws
// SingularCovarianceError when a pivot collapses relative to the diagonal.
std::vector<double> cholesky_solve(Matrix G, std::vector<double> b) {
  const std::size_t p = G.rows();
  double scale = 0.0;
  for (std::size_t i = 0; i < p; ++i) scale = std::max(scale, std::abs(G(i, i)));
  const double tol = 1e-12 * std::max(scale, 1e-300);
  for (std::size_t j = 0; j < p; ++j) {
    double d = G(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= G(j, k) * G(j, k);
    if (!(d > tol)) {
      throw SingularCovarianceError("singular parent covariance (pivot " + std::to_string(j) +
                                    ")");
    }
    const double l = std::sqrt(d);
    G(j, j) = l;
    for (std::size_t i = j + 1; i < p; ++i) {
      double s = G(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= G(i, k) * G(j, k);
      G(i, j) = s / l;
    }
  }
  for (std::size_t i = 0; i < p; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= G(i, k) * b[k];
    b[i] = s / G(i, i);
  }
  for (std::size_t i = p; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < p; ++k) s -= G(k, i) * b[k];
    b[i] = s / G(i, i);
  }
  return b;
}

std::size_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
    if (r > (std::size_t{1} << 40)) return r;  // large enough to mean "too many"
  }
  return r;
}

double penalty_per_parent(const BowTimeSeries& series, const StructureOptions& options) {
  return 0.5 * std::log(static_cast<double>(series.num_instants())) + options.epsilon;
}

NodeFit fit_with_fallback(const BowTimeSeries& series, int var, std::span<const NodeRef> parents,
                          const StructureOptions& options) {
  try {
    return fit_node(series, NodeRef{var, 0}, parents, options.order, 0.0);
  } catch (const SingularCovarianceError&) {
    return fit_node(series, NodeRef{var, 0}, parents, options.order, options.ridge_fallback);
  }
}

std::string parents_field(const std::vector<NodeRef>& parents,
                          const std::vector<std::string>& vars) {
  if (parents.empty()) return "-";
  std::string out;
  for (const auto& p : parents) {
    if (!out.empty()) out += ',';
    out += vars[p.var] + "@" + std::to_string(p.lag);
  }
  return out;
}

std::string doubles_field(const std::vector<double>& xs) {
  if (xs.empty()) return "-";
  std::string out;
  for (double x : xs) {
    if (!out.empty()) out += ',';
    out += format_double(x);
  }
  return out;
}

std::vector<double> parse_doubles_field(std::string_view f, const char* what) {
  std::vector<double> out;
  if (f == "-") return out;
  for (auto part : split_exact(f, ',')) {
    auto v = parse_double(part);
    if (!v) throw std::runtime_error(std::string("bad number in ") + what);
    out.push_back(*v);
  }
  return out;
}

double parse_header_value(std::string_view line, std::string_view key) {
  for (auto f : split_fields(line)) {
    if (f.starts_with(key) && f.size() > key.size() && f[key.size()] == '=') {
      auto v = parse_double(f.substr(key.size() + 1));
      if (v) return *v;
    }
  }
  throw std::runtime_error("missing header field " + std::string(key));
}

}  // namespace

NodeFit fit_node(const BowTimeSeries& series, NodeRef node, std::span<const NodeRef> parents,
                 int first_instant, double ridge) {
  const int T = static_cast<int>(series.num_instants());
  const int N = static_cast<int>(series.num_vars());
  int max_lag = node.lag;
  for (const auto& p : parents) {
    if (p.var < 0 || p.var >= N || p.lag < 0) throw std::invalid_argument("bad parent reference");
    max_lag = std::max(max_lag, p.lag);
  }
  if (node.var < 0 || node.var >= N) throw std::invalid_argument("bad node reference");
  if (first_instant < 0) first_instant = max_lag;
  if (first_instant < max_lag) throw std::invalid_argument("first_instant precedes a lag");
  const int n = T - first_instant;
  const int p = static_cast<int>(parents.size());
  if (n < p + 2) {
    throw std::invalid_argument("fit_node: " + std::to_string(n) +
                                " usable instants for " + std::to_string(p) + " parents");
  }

  auto value = [&](NodeRef r, int t) { return series.counts(r.var, t - r.lag); };

  NodeFit fit;
  fit.num_instants = n;
  for (int t = first_instant; t < T; ++t) fit.mean += value(node, t);
  fit.mean /= n;
  fit.parent_means.assign(p, 0.0);
  for (int j = 0; j < p; ++j) {
    for (int t = first_instant; t < T; ++t) fit.parent_means[j] += value(parents[j], t);
    fit.parent_means[j] /= n;
  }

  Matrix X(n, p);
  std::vector<double> y(n);
  for (int t = first_instant; t < T; ++t) {
    const int row = t - first_instant;
    y[row] = value(node, t) - fit.mean;
    for (int j = 0; j < p; ++j) X(row, j) = value(parents[j], t) - fit.parent_means[j];
  }

  if (p > 0) {
    Matrix G(p, p);
    std::vector<double> rhs(p, 0.0);
    for (int r = 0; r < n; ++r) {
      for (int i = 0; i < p; ++i) {
        rhs[i] += X(r, i) * y[r];
        for (int j = 0; j <= i; ++j) G(i, j) += X(r, i) * X(r, j);
      }
    }
    for (int i = 0; i < p; ++i) {
      G(i, i) += ridge;
      for (int j = 0; j < i; ++j) G(j, i) = G(i, j);
    }
    fit.beta = cholesky_solve(std::move(G), std::move(rhs));
  }

  double rss = 0.0;
  for (int r = 0; r < n; ++r) {
    double pred = 0.0;
    for (int j = 0; j < p; ++j) pred += X(r, j) * fit.beta[j];
    const double e = y[r] - pred;
    rss += e * e;
  }
  fit.cond_var = rss / n;
  const double v = std::max(fit.cond_var, kVarianceFloor);
  fit.loglik = -0.5 * n * std::log(2.0 * std::numbers::pi * v) - 0.5 * rss / v;
  return fit;
}

std::vector<NodeRef> candidate_parents(int var, int num_vars, int order) {
  std::vector<NodeRef> out;
  for (int v = 0; v < var; ++v) out.push_back({v, 0});
  for (int lag = 1; lag <= order; ++lag) {
    for (int v = 0; v < num_vars; ++v) out.push_back({v, lag});
  }
  return out;
}

double structure_score(const BowTimeSeries& series, int var, std::span<const NodeRef> parents,
                       const StructureOptions& options, NodeFit* fit) {
  NodeFit f = fit_with_fallback(series, var, parents, options);
  const double score = f.loglik - static_cast<double>(parents.size()) *
                                      penalty_per_parent(series, options);
  if (fit) *fit = std::move(f);
  return score;
}

GaussianNet learn_structure(const BowTimeSeries& series, const StructureOptions& options) {
  const int N = static_cast<int>(series.num_vars());
  const int T = static_cast<int>(series.num_instants());
  if (N == 0) throw std::invalid_argument("learn_structure: empty candidate set");
  if (options.order < 0 || options.max_parents < 0) {
    throw std::invalid_argument("learn_structure: order and max_parents must be >= 0");
  }
  if (T - options.order < options.max_parents + 2) {
    throw std::invalid_argument("learn_structure: " + std::to_string(T) +
                                " instants are too few for order " +
                                std::to_string(options.order) + " and " +
                                std::to_string(options.max_parents) + " parents");
  }

  GaussianNet net;
  net.order = options.order;
  net.max_parents = options.max_parents;
  net.vars = series.vocab;
  net.nodes.resize(N);

  for (int var = 0; var < N; ++var) {
    const auto pool = candidate_parents(var, N, options.order);
    const std::size_t maxp =
        std::min<std::size_t>(static_cast<std::size_t>(options.max_parents), pool.size());
    std::size_t total = 0;
    for (std::size_t m = 0; m <= maxp; ++m) total += binomial(pool.size(), m);

    bool exhaustive = options.search == StructureSearch::kExhaustive ||
                      (options.search == StructureSearch::kAuto &&
                       total <= options.exhaustive_budget);

    NetNode& node = net.nodes[var];
    node.var = var;
    std::vector<NodeRef> best_set;
    NodeFit best_fit;
    double best = structure_score(series, var, best_set, options, &best_fit);

    if (exhaustive) {
      std::vector<std::size_t> idx;
      for (std::size_t m = 1; m <= maxp; ++m) {
        idx.resize(m);
        std::iota(idx.begin(), idx.end(), 0);
        for (;;) {
          std::vector<NodeRef> set;
          for (auto i : idx) set.push_back(pool[i]);
          NodeFit f;
          const double s = structure_score(series, var, set, options, &f);
          if (s > best) {
            best = s;
            best_set = std::move(set);
            best_fit = std::move(f);
          }
          // next combination in lexicographic order
          std::size_t i = m;
          while (i > 0 && idx[i - 1] == pool.size() - m + i - 1) --i;
          if (i == 0) break;
          ++idx[i - 1];
          for (std::size_t j = i; j < m; ++j) idx[j] = idx[j - 1] + 1;
        }
      }
    } else {
      std::vector<bool> used(pool.size(), false);
      while (best_set.size() < maxp) {
        double step_best = -std::numeric_limits<double>::infinity();
        std::size_t step_arg = pool.size();
        NodeFit step_fit;
        for (std::size_t c = 0; c < pool.size(); ++c) {
          if (used[c]) continue;
          auto set = best_set;
          set.push_back(pool[c]);
          NodeFit f;
          const double s = structure_score(series, var, set, options, &f);
          if (s > step_best) {
            step_best = s;
            step_arg = c;
            step_fit = std::move(f);
          }
        }
        if (step_arg == pool.size() || step_best - best < 0.0) break;
        used[step_arg] = true;
        best_set.push_back(pool[step_arg]);
        best = step_best;
        best_fit = std::move(step_fit);
      }
    }
    node.parents = std::move(best_set);
    node.fit = std::move(best_fit);
    node.score = best;
  }
  return net;
}

GaussianNet learn_structure(const BowTimeSeries& series,
                            std::span<const std::string> candidates,
                            const StructureOptions& options) {
  if (candidates.empty()) throw std::invalid_argument("learn_structure: empty candidate set");
  std::map<std::string, int, std::less<>> index;
  for (std::size_t i = 0; i < series.vocab.size(); ++i) index.emplace(series.vocab[i], i);
  BowTimeSeries sub;
  sub.counts = Matrix(candidates.size(), series.num_instants());
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    auto it = index.find(candidates[c]);
    if (it == index.end()) {
      throw std::invalid_argument("candidate '" + candidates[c] + "' is not in the vocabulary");
    }
    sub.vocab.push_back(candidates[c]);
    for (std::size_t t = 0; t < series.num_instants(); ++t) {
      sub.counts(c, t) = series.counts(it->second, t);
    }
  }
  return learn_structure(sub, options);
}

void GaussianNet::write(std::ostream& out) const {
  out << "# gbn order=" << order << " max_parents=" << max_parents << " vars=" << vars.size()
      << '\n';
  out << "# node\tlag\tparents\tbeta\tcond_var\tmean\tparent_means\tloglik\tinstants\tscore\n";
  for (const auto& n : nodes) {
    out << vars[n.var] << "\t0\t" << parents_field(n.parents, vars) << '\t'
        << doubles_field(n.fit.beta) << '\t' << format_double(n.fit.cond_var) << '\t'
        << format_double(n.fit.mean) << '\t' << doubles_field(n.fit.parent_means) << '\t'
        << format_double(n.fit.loglik) << '\t' << n.fit.num_instants << '\t'
        << format_double(n.score) << '\n';
  }
}

GaussianNet GaussianNet::read(std::istream& in) {
  GaussianNet net;
  std::string line;
  if (!std::getline(in, line) || !line.starts_with("# gbn")) {
    throw std::runtime_error("not a gbn file");
  }
  net.order = static_cast<int>(parse_header_value(line, "order"));
  net.max_parents = static_cast<int>(parse_header_value(line, "max_parents"));
  std::vector<std::vector<std::string_view>> rows;
  std::vector<std::string> lines;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    lines.push_back(line);
  }
  for (const auto& l : lines) {
    auto f = split_exact(l, '\t');
    if (f.size() != 10) throw std::runtime_error("gbn file: expected 10 columns");
    net.vars.emplace_back(f[0]);
    rows.push_back(std::move(f));
  }
  std::map<std::string, int, std::less<>> index;
  for (std::size_t i = 0; i < net.vars.size(); ++i) index.emplace(net.vars[i], i);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& f = rows[i];
    NetNode n;
    n.var = static_cast<int>(i);
    if (f[2] != "-") {
      for (auto part : split_exact(f[2], ',')) {
        const auto at = part.rfind('@');
        if (at == std::string_view::npos) throw std::runtime_error("gbn file: bad parent");
        auto it = index.find(part.substr(0, at));
        auto lag = parse_int<int>(part.substr(at + 1));
        if (it == index.end() || !lag) throw std::runtime_error("gbn file: bad parent");
        n.parents.push_back({it->second, *lag});
      }
    }
    n.fit.beta = parse_doubles_field(f[3], "beta");
    auto num = [&](std::string_view s, const char* what) {
      auto v = parse_double(s);
      if (!v) throw std::runtime_error(std::string("gbn file: bad ") + what);
      return *v;
    };
    n.fit.cond_var = num(f[4], "cond_var");
    n.fit.mean = num(f[5], "mean");
    n.fit.parent_means = parse_doubles_field(f[6], "parent_means");
    n.fit.loglik = num(f[7], "loglik");
    n.fit.num_instants = static_cast<int>(num(f[8], "instants"));
    n.score = num(f[9], "score");
    if (n.fit.beta.size() != n.parents.size()) {
      throw std::runtime_error("gbn file: beta and parent counts differ");
    }
    net.nodes.push_back(std::move(n));
  }
  return net;
}

MotifSet extract_motifs(const GaussianNet& net, double tau) {
  MotifSet set;
  set.vars = net.vars;
  set.order = net.order;
  set.threshold = tau;
  const int N = static_cast<int>(net.vars.size());
  for (const auto& node : net.nodes) {
    if (node.fit.num_instants <= 0) continue;
    const double score = node.fit.loglik / node.fit.num_instants;
    if (!(score >= tau)) continue;
    Motif m;
    m.node = node.var;
    m.score = score;
    m.kernel = Matrix(net.order + 1, N);
    m.kernel(0, node.var) = 1.0;
    for (std::size_t j = 0; j < node.parents.size(); ++j) {
      const auto& p = node.parents[j];
      m.kernel(p.lag, p.var) += node.fit.beta[j];
    }
    set.motifs.push_back(std::move(m));
  }
  std::stable_sort(set.motifs.begin(), set.motifs.end(), [](const Motif& a, const Motif& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.node < b.node;
  });
  return set;
}

void MotifSet::write(std::ostream& out) const {
  out << "# motifs order=" << order << " vars=" << vars.size()
      << " threshold=" << format_double(threshold) << " count=" << motifs.size() << '\n';
  out << "vars";
  for (const auto& v : vars) out << '\t' << v;
  out << '\n';
  for (const auto& m : motifs) {
    out << "motif\t" << vars[m.node] << '\t' << format_double(m.score) << '\t'
        << doubles_field(m.kernel.data()) << '\n';
  }
}

MotifSet MotifSet::read(std::istream& in) {
  MotifSet set;
  std::string line;
  if (!std::getline(in, line) || !line.starts_with("# motifs")) {
    throw std::runtime_error("not a motif file");
  }
  set.order = static_cast<int>(parse_header_value(line, "order"));
  set.threshold = parse_header_value(line, "threshold");
  if (!std::getline(in, line)) throw std::runtime_error("motif file: missing vars line");
  auto vf = split_exact(line, '\t');
  if (vf.empty() || vf[0] != "vars") throw std::runtime_error("motif file: missing vars line");
  std::map<std::string, int, std::less<>> index;
  for (std::size_t i = 1; i < vf.size(); ++i) {
    set.vars.emplace_back(vf[i]);
    index.emplace(set.vars.back(), static_cast<int>(i - 1));
  }
  const int N = static_cast<int>(set.vars.size());
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    auto f = split_exact(line, '\t');
    if (f.size() != 4 || f[0] != "motif") throw std::runtime_error("motif file: bad motif line");
    Motif m;
    auto it = index.find(f[1]);
    auto score = parse_double(f[2]);
    if (it == index.end() || !score) throw std::runtime_error("motif file: bad motif line");
    m.node = it->second;
    m.score = *score;
    m.kernel = Matrix(set.order + 1, N);
    auto vals = parse_doubles_field(f[3], "kernel");
    if (vals.size() != m.kernel.size()) throw std::runtime_error("motif file: kernel size");
    m.kernel.data() = std::move(vals);
    set.motifs.push_back(std::move(m));
  }
  return set;
}

std::vector<std::size_t> FilterResult::expanded() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    for (int k = 0; k < weights[i]; ++k) out.push_back(i);
  }
  return out;
}

std::vector<double> motif_responses(const Motif& motif, const VocabMatcher& matcher,
                                    const Sentence& sentence,
                                    std::span<const std::vector<double>> previous_bows,
                                    int window) {
  if (window < 1) throw std::invalid_argument("motif window must be >= 1");
  const auto hits = matcher.match(sentence);
  const int L = static_cast<int>(sentence.size());
  double lagged = 0.0;
  for (std::size_t l = 1; l < motif.kernel.rows(); ++l) {
    if (l - 1 >= previous_bows.size()) break;
    const auto& bow = previous_bows[l - 1];
    for (std::size_t v = 0; v < motif.kernel.cols() && v < bow.size(); ++v) {
      lagged += motif.kernel(l, v) * bow[v];
    }
  }
  std::vector<double> per_token(L, 0.0);
  for (int q = 0; q < L; ++q) {
    for (int v : hits[q]) per_token[q] += motif.kernel(0, v);
  }
  const int positions = std::max(1, L - window + 1);
  std::vector<double> out(positions);
  for (int p = 0; p < positions; ++p) {
    double acc = 0.0;
    for (int q = p; q < std::min(L, p + window); ++q) acc += per_token[q];
    out[p] = acc + lagged;
  }
  return out;
}

FilterResult filter_sentences(std::span<const Sentence> sentences, const MotifSet& motifs,
                              const FilterOptions& options) {
  FilterResult result;
  result.weights.assign(sentences.size(), 0);
  if (motifs.empty() || sentences.empty()) return result;

  const VocabMatcher matcher(motifs.vars);
  const std::size_t N = motifs.vars.size();
  std::map<std::pair<std::string, int>, std::vector<double>> bows;
  for (const auto& s : sentences) {
    std::vector<double> bow(N, 0.0);
    for (const auto& at : matcher.match(s)) {
      for (int v : at) bow[v] += 1.0;
    }
    bows[{s.doc_id, s.position}] = std::move(bow);
  }
  const std::vector<double> zeros(N, 0.0);
  std::vector<std::vector<std::vector<double>>> previous(sentences.size());
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    for (int l = 1; l <= motifs.order; ++l) {
      auto it = bows.find({sentences[i].doc_id, sentences[i].position - l});
      previous[i].push_back(it == bows.end() ? zeros : it->second);
    }
  }

  for (const auto& motif : motifs.motifs) {
    std::vector<std::vector<double>> responses(sentences.size());
    std::vector<double> all;
    for (std::size_t i = 0; i < sentences.size(); ++i) {
      responses[i] = motif_responses(motif, matcher, sentences[i], previous[i], options.window);
      all.insert(all.end(), responses[i].begin(), responses[i].end());
    }
    // Sorted so the statistics do not depend on sentence order.
    std::sort(all.begin(), all.end());
    double mean = 0.0;
    for (double r : all) mean += r;
    mean /= static_cast<double>(all.size());
    double var = 0.0;
    for (double r : all) var += (r - mean) * (r - mean);
    var /= static_cast<double>(all.size());
    const double cutoff = mean + std::sqrt(var);
    result.cutoffs.push_back(cutoff);
    for (std::size_t i = 0; i < sentences.size(); ++i) {
      for (double r : responses[i]) {
        if (r > cutoff) ++result.weights[i];
      }
    }
  }
  return result;
}

namespace {

void normalize_unit(std::span<double> v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  if (sq <= 0.0) return;
  const double inv = 1.0 / std::sqrt(sq);
  for (double& x : v) x *= inv;
}

}  // namespace

double lbl_loss(const LblModel& model, const EmbeddingTable& table,
                std::span<const Sentence> corpus) {
  const int d = model.dim;
  double total = 0.0;
  std::size_t count = 0;
  std::vector<double> pred(d), ctx(d);
  for (const auto& s : corpus) {
    for (std::size_t i = 1; i < s.size(); ++i) {
      std::fill(pred.begin(), pred.end(), 0.0);
      const std::size_t span = std::min<std::size_t>(model.window, i);
      for (std::size_t k = 1; k <= span; ++k) {
        table.lookup_into(s.tokens[i - k].surface, ctx);
        const Matrix& C = model.context[k - 1];
        for (int r = 0; r < d; ++r) {
          for (int c = 0; c < d; ++c) pred[r] += C(r, c) * ctx[c];
        }
      }
      const auto target = table.lookup(s.tokens[i].surface);
      double sq = 0.0;
      for (int r = 0; r < d; ++r) sq += (pred[r] - target[r]) * (pred[r] - target[r]);
      total += 0.5 * sq;
      ++count;
    }
  }
  return count ? total / static_cast<double>(count) : 0.0;
}

LblResult lbl_init(std::span<const Sentence> corpus, const LblOptions& options) {
  if (options.dim < 1 || options.window < 1) {
    throw std::invalid_argument("lbl_init: dim and window must be >= 1");
  }
  const int d = options.dim;
  std::map<std::string, std::vector<double>, std::less<>> vecs;
  for (const auto& s : corpus) {
    for (const auto& t : s.tokens) {
      if (vecs.count(t.surface)) continue;
      auto v = EmbeddingTable::hashed_vector(t.surface, d, options.seed, 1.0);
      normalize_unit(v);
      vecs.emplace(t.surface, std::move(v));
    }
  }
  LblModel model{d, options.window, std::vector<Matrix>(options.window, Matrix(d, d))};

  auto snapshot = [&] {
    EmbeddingTable table(d, UnkPolicy::kSeededHash, options.seed);
    for (const auto& [w, v] : vecs) table.set(w, v);
    return table;
  };

  std::vector<double> loss_trace;
  std::vector<double> pred(d), err(d), grad_ctx(d);
  const double lr = options.learning_rate;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    for (const auto& s : corpus) {
      for (std::size_t i = 1; i < s.size(); ++i) {
        const std::size_t span = std::min<std::size_t>(options.window, i);
        std::fill(pred.begin(), pred.end(), 0.0);
        for (std::size_t k = 1; k <= span; ++k) {
          const auto& x = vecs[s.tokens[i - k].surface];
          const Matrix& C = model.context[k - 1];
          for (int r = 0; r < d; ++r) {
            for (int c = 0; c < d; ++c) pred[r] += C(r, c) * x[c];
          }
        }
        auto& target = vecs[s.tokens[i].surface];
        for (int r = 0; r < d; ++r) err[r] = pred[r] - target[r];
        for (std::size_t k = 1; k <= span; ++k) {
          auto& x = vecs[s.tokens[i - k].surface];
          Matrix& C = model.context[k - 1];
          std::fill(grad_ctx.begin(), grad_ctx.end(), 0.0);
          for (int r = 0; r < d; ++r) {
            for (int c = 0; c < d; ++c) {
              grad_ctx[c] += C(r, c) * err[r];
              C(r, c) -= lr * err[r] * x[c];
            }
          }
          for (int c = 0; c < d; ++c) x[c] -= lr * grad_ctx[c];
          normalize_unit(x);
        }
        for (int r = 0; r < d; ++r) target[r] += lr * err[r];
        normalize_unit(target);
      }
    }
    loss_trace.push_back(lbl_loss(model, snapshot(), corpus));
  }
  return LblResult{std::move(model), snapshot(), std::move(loss_trace)};
}

std::vector<std::string> select_clue_words(std::span<const Sentence> sentences,
                                           const Lexicon& clues, std::size_t top) {
  const auto words = clues.words();
  const VocabMatcher matcher(words);
  std::vector<long long> counts(words.size(), 0);
  for (const auto& s : sentences) {
    for (const auto& hits : matcher.match(s)) {
      for (int v : hits) ++counts[v];
    }
  }
  std::vector<std::size_t> order(words.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return counts[a] > counts[b]; });
  std::vector<std::string> out;
  for (auto i : order) {
    if (out.size() >= top || counts[i] == 0) break;
    out.push_back(words[i]);
  }
  return out;
}

}  // namespace absa
