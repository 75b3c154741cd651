#include "absa/cdbn.h"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "absa/neural.h"

namespace absa {

RbmLayer::RbmLayer(int visible, int hidden)
    : W(static_cast<std::size_t>(visible), static_cast<std::size_t>(hidden)),
      b(static_cast<std::size_t>(hidden), 0.0),
      c(static_cast<std::size_t>(visible), 0.0) {
  if (visible <= 0 || hidden <= 0) throw std::invalid_argument("RbmLayer: empty layer");
}

void RbmLayer::init_uniform(Rng& rng, double scale) {
  for (auto& x : W.data()) x = rng.uniform(-scale, scale);
  std::fill(b.begin(), b.end(), 0.0);
  std::fill(c.begin(), c.end(), 0.0);
}

std::vector<double> rbm_hidden(const RbmLayer& layer, std::span<const double> v,
                               HiddenMode mode, Rng* rng) {
  if (static_cast<int>(v.size()) != layer.visible()) {
    throw ShapeError("rbm_hidden: visible vector has " + std::to_string(v.size()) +
                     " units, layer expects " + std::to_string(layer.visible()));
  }
  if (mode == HiddenMode::kSample && !rng) throw std::invalid_argument("rbm_hidden: no rng");
  const int nh = layer.hidden();
  std::vector<double> h(layer.b);
  for (int i = 0; i < layer.visible(); ++i) {
    const auto wrow = layer.W.row(i);
    for (int j = 0; j < nh; ++j) h[j] += v[i] * wrow[j];
  }
  for (auto& x : h) {
    x = sigmoid(x);
    if (mode == HiddenMode::kSample) x = rng->bernoulli(x) ? 1.0 : 0.0;
  }
  return h;
}

std::vector<double> rbm_reconstruct(const RbmLayer& layer, std::span<const double> h,
                                    VisibleMode mode, Rng* rng) {
  if (static_cast<int>(h.size()) != layer.hidden()) {
    throw ShapeError("rbm_reconstruct: hidden vector has " + std::to_string(h.size()) +
                     " units, layer expects " + std::to_string(layer.hidden()));
  }
  if (mode == VisibleMode::kSample && !rng) {
    throw std::invalid_argument("rbm_reconstruct: no rng");
  }
  std::vector<double> v(layer.c);
  for (int i = 0; i < layer.visible(); ++i) {
    const auto wrow = layer.W.row(i);
    for (int j = 0; j < layer.hidden(); ++j) v[i] += h[j] * wrow[j];
    if (mode == VisibleMode::kSample) v[i] += layer.sigma * rng->normal();
  }
  return v;
}

double energy(const RbmLayer& layer, std::span<const double> v, std::span<const double> h) {
  if (static_cast<int>(v.size()) != layer.visible() ||
      static_cast<int>(h.size()) != layer.hidden()) {
    throw ShapeError("energy: state does not match layer " + layer.W.shape_string());
  }
  double e = 0.0;
  for (int i = 0; i < layer.visible(); ++i) {
    for (int j = 0; j < layer.hidden(); ++j) e -= v[i] * h[j] * layer.W(i, j);
  }
  return e;
}

double cd1_epoch(RbmLayer& layer, std::span<const std::vector<double>> batch, double alpha,
                 Rng& rng, const CdOptions& options) {
  if (batch.empty()) return 0.0;
  const int nv = layer.visible(), nh = layer.hidden();
  Matrix dW(nv, nh);
  std::vector<double> db(nh, 0.0), dc(nv, 0.0);
  double err = 0.0;
  for (const auto& v0 : batch) {
    const auto h0 = rbm_hidden(layer, v0,
                               options.sample_hidden ? HiddenMode::kSample : HiddenMode::kProb,
                               &rng);
    const auto mean = rbm_reconstruct(layer, h0, VisibleMode::kMean);
    std::vector<double> v1 = mean;
    if (options.sample_visible) {
      for (auto& x : v1) x += layer.sigma * rng.normal();
    }
    const auto h1 = rbm_hidden(layer, v1, HiddenMode::kProb);
    double e = 0.0;
    for (int i = 0; i < nv; ++i) {
      const double d = v0[i] - mean[i];
      e += d * d;
      for (int j = 0; j < nh; ++j) dW(i, j) += v0[i] * h0[j] - v1[i] * h1[j];
      dc[i] += v0[i] - v1[i];
    }
    for (int j = 0; j < nh; ++j) db[j] += h0[j] - h1[j];
    err += e / nv;
  }
  const double n = static_cast<double>(batch.size());
  if (alpha != 0.0) {
    const double s = alpha / n;
    for (std::size_t k = 0; k < dW.size(); ++k) layer.W.data()[k] += s * dW.data()[k];
    for (int j = 0; j < nh; ++j) layer.b[j] += s * db[j];
    for (int i = 0; i < nv; ++i) layer.c[i] += s * dc[i];
  }
  return err / n;
}

namespace {

double sigma_of(double sum, double sum_sq, double count) {
  if (count <= 0) return 1.0;
  const double mean = sum / count;
  const double var = sum_sq / count - mean * mean;
  return var > 1e-24 ? std::sqrt(var) : 1.0;
}

}  // namespace

double empirical_sigma(std::span<const std::vector<double>> data) {
  double s = 0, ss = 0, n = 0;
  for (const auto& v : data) {
    for (double x : v) {
      s += x;
      ss += x * x;
      n += 1;
    }
  }
  return sigma_of(s, ss, n);
}

double empirical_sigma(std::span<const Matrix> data) {
  double s = 0, ss = 0, n = 0;
  for (const auto& m : data) {
    for (double x : m.data()) {
      s += x;
      ss += x * x;
      n += 1;
    }
  }
  return sigma_of(s, ss, n);
}

void pretrain_stack(std::vector<RbmLayer>& stack, std::span<const std::vector<double>> data,
                    const PretrainConfig& config, Rng& rng, PretrainReport* report) {
  if (config.epochs < 0 || config.batch_size <= 0) {
    throw std::invalid_argument("pretrain_stack: epochs must be >= 0 and batch_size > 0");
  }
  std::vector<std::vector<double>> input(data.begin(), data.end());
  if (report) report->errors.assign(stack.size(), {});
  for (std::size_t l = 0; l < stack.size(); ++l) {
    auto& layer = stack[l];
    layer.sigma = empirical_sigma(input);
    std::vector<std::size_t> order(input.size());
    std::iota(order.begin(), order.end(), 0);
    for (int e = 0; e < config.epochs; ++e) {
      rng.shuffle(order);
      double total = 0.0;
      for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
        const std::size_t end = std::min(order.size(), start + config.batch_size);
        std::vector<std::vector<double>> batch;
        for (std::size_t k = start; k < end; ++k) batch.push_back(input[order[k]]);
        total += cd1_epoch(layer, batch, config.learning_rate, rng, config.cd) *
                 static_cast<double>(batch.size());
      }
      if (report) {
        report->errors[l].push_back(input.empty() ? 0.0
                                                  : total / static_cast<double>(input.size()));
      }
    }
    for (auto& v : input) v = rbm_hidden(layer, v, HiddenMode::kProb);
  }
}

ConvRbm::ConvRbm(int groups, int width_, int depth_)
    : width(width_),
      depth(depth_),
      kernels(static_cast<std::size_t>(groups), static_cast<std::size_t>(width_ * depth_)),
      hidden_bias(static_cast<std::size_t>(groups), 0.0),
      visible_bias(static_cast<std::size_t>(depth_), 0.0) {
  if (groups <= 0 || width_ <= 0 || depth_ <= 0) {
    throw std::invalid_argument("ConvRbm: groups, width and depth must be positive");
  }
}

namespace {

void check_visible(const ConvRbm& rbm, const Matrix& v, const char* where) {
  if (static_cast<int>(v.cols()) != rbm.depth) {
    throw ShapeError(std::string(where) + ": input depth " + std::to_string(v.cols()) +
                     " does not match kernel depth " + std::to_string(rbm.depth));
  }
  if (static_cast<int>(v.rows()) < rbm.width) {
    throw ShapeError(std::string(where) + ": input length " + std::to_string(v.rows()) +
                     " shorter than kernel width " + std::to_string(rbm.width));
  }
}

}  // namespace

Matrix conv_rbm_hidden(const ConvRbm& rbm, const Matrix& v, HiddenMode mode, Rng* rng) {
  check_visible(rbm, v, "conv_rbm_hidden");
  if (mode == HiddenMode::kSample && !rng) throw std::invalid_argument("conv_rbm_hidden: no rng");
  const int positions = static_cast<int>(v.rows()) - rbm.width + 1;
  const int z_count = rbm.groups();
  Matrix h(positions, z_count);
  for (int i = 0; i < positions; ++i) {
    // Window rows i..i+k-1 are contiguous in the row-major grid.
    const double* win = v.data().data() + static_cast<std::size_t>(i) * rbm.depth;
    for (int z = 0; z < z_count; ++z) {
      const auto kern = rbm.kernels.row(z);
      double a = rbm.hidden_bias[z];
      for (std::size_t q = 0; q < kern.size(); ++q) a += win[q] * kern[q];
      double p = sigmoid(a);
      if (mode == HiddenMode::kSample) p = rng->bernoulli(p) ? 1.0 : 0.0;
      h(i, z) = p;
    }
  }
  return h;
}

Matrix conv_rbm_reconstruct(const ConvRbm& rbm, const Matrix& h, std::size_t length,
                            VisibleMode mode, Rng* rng) {
  if (static_cast<int>(h.cols()) != rbm.groups() ||
      h.rows() + rbm.width - 1 != length) {
    throw ShapeError("conv_rbm_reconstruct: hidden grid " + h.shape_string() +
                     " does not fit length " + std::to_string(length));
  }
  if (mode == VisibleMode::kSample && !rng) {
    throw std::invalid_argument("conv_rbm_reconstruct: no rng");
  }
  Matrix v(length, rbm.depth);
  for (std::size_t t = 0; t < length; ++t) {
    for (int s = 0; s < rbm.depth; ++s) v(t, s) = rbm.visible_bias[s];
  }
  for (std::size_t i = 0; i < h.rows(); ++i) {
    for (int z = 0; z < rbm.groups(); ++z) {
      const double hz = h(i, z);
      if (hz == 0.0) continue;
      const auto kern = rbm.kernels.row(z);
      double* win = v.data().data() + i * rbm.depth;
      for (std::size_t q = 0; q < kern.size(); ++q) win[q] += hz * kern[q];
    }
  }
  if (mode == VisibleMode::kSample) {
    for (auto& x : v.data()) x += rbm.sigma * rng->normal();
  }
  return v;
}

double energy(const ConvRbm& rbm, const Matrix& v, const Matrix& h) {
  check_visible(rbm, v, "energy");
  if (h.rows() + rbm.width - 1 != v.rows() || static_cast<int>(h.cols()) != rbm.groups()) {
    throw ShapeError("energy: hidden grid " + h.shape_string() + " does not match input " +
                     v.shape_string());
  }
  double e = 0.0;
  for (int z = 0; z < rbm.groups(); ++z) {
    for (std::size_t i = 0; i < h.rows(); ++i) {
      for (int r = 0; r < rbm.width; ++r) {
        for (int s = 0; s < rbm.depth; ++s) e -= v(i + r, s) * h(i, z) * rbm.w(z, r, s);
      }
    }
  }
  return e;
}

double conv_cd1_epoch(ConvRbm& rbm, std::span<const Matrix> batch, double alpha, Rng& rng,
                      const CdOptions& options) {
  if (batch.empty()) return 0.0;
  const int z_count = rbm.groups();
  const std::size_t kd = rbm.kernels.cols();
  Matrix dW(z_count, kd);
  std::vector<double> db(z_count, 0.0), dc(rbm.depth, 0.0);
  double err = 0.0;
  for (const auto& v0 : batch) {
    const auto h0 = conv_rbm_hidden(
        rbm, v0, options.sample_hidden ? HiddenMode::kSample : HiddenMode::kProb, &rng);
    const auto mean = conv_rbm_reconstruct(rbm, h0, v0.rows(), VisibleMode::kMean);
    Matrix v1 = mean;
    if (options.sample_visible) {
      for (auto& x : v1.data()) x += rbm.sigma * rng.normal();
    }
    const auto h1 = conv_rbm_hidden(rbm, v1, HiddenMode::kProb);
    const double positions = static_cast<double>(h0.rows());
    for (std::size_t i = 0; i < h0.rows(); ++i) {
      const double* w0 = v0.data().data() + i * rbm.depth;
      const double* w1 = v1.data().data() + i * rbm.depth;
      for (int z = 0; z < z_count; ++z) {
        const double a = h0(i, z) / positions, b = h1(i, z) / positions;
        auto g = dW.row(z);
        for (std::size_t q = 0; q < kd; ++q) g[q] += w0[q] * a - w1[q] * b;
        db[z] += a - b;
      }
    }
    double e = 0.0;
    for (std::size_t t = 0; t < v0.rows(); ++t) {
      for (int s = 0; s < rbm.depth; ++s) {
        const double d = v0(t, s) - mean(t, s);
        e += d * d;
        dc[s] += (v0(t, s) - v1(t, s)) / static_cast<double>(v0.rows());
      }
    }
    err += e / static_cast<double>(v0.size());
  }
  const double n = static_cast<double>(batch.size());
  if (alpha != 0.0) {
    const double s = alpha / n;
    for (std::size_t k = 0; k < dW.size(); ++k) rbm.kernels.data()[k] += s * dW.data()[k];
    for (int z = 0; z < z_count; ++z) rbm.hidden_bias[z] += s * db[z];
    for (int c = 0; c < rbm.depth; ++c) rbm.visible_bias[c] += s * dc[c];
  }
  return err / n;
}

}  // namespace absa
