#include "absa/neural.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "absa/textio.h"

namespace absa {

namespace {

void write_values(std::ostream& out, const char* label, const Matrix& m) {
  out << label;
  for (double v : m.data()) out << ' ' << format_double(v);
  out << '\n';
}

std::string next_word(std::istream& in, const char* what) {
  std::string w;
  if (!(in >> w)) throw std::runtime_error(std::string("model file truncated reading ") + what);
  return w;
}

void expect_word(std::istream& in, const std::string& expected) {
  const auto w = next_word(in, expected.c_str());
  if (w != expected) {
    throw std::runtime_error("model file: expected '" + expected + "', found '" + w + "'");
  }
}

long long read_int(std::istream& in, const char* what) {
  const auto w = next_word(in, what);
  const auto v = parse_int(w);
  if (!v) throw std::runtime_error(std::string("model file: bad integer for ") + what);
  return *v;
}

double read_double(std::istream& in, const char* what) {
  const auto w = next_word(in, what);
  const auto v = parse_double(w);
  if (!v) throw std::runtime_error(std::string("model file: bad number for ") + what);
  return *v;
}

void read_values(std::istream& in, const char* label, Matrix& m) {
  expect_word(in, label);
  for (double& v : m.data()) v = read_double(in, label);
}

}  // namespace

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

ConvLayer::ConvLayer(int num_kernels, int width, int depth)
    : width(width), depth(depth), weights(num_kernels, width * depth), bias(1, num_kernels) {
  if (num_kernels < 1 || width < 1 || depth < 1) {
    throw ShapeError("conv layer needs at least one kernel of positive size");
  }
}

Matrix conv1d_grid(const Matrix& input, const ConvLayer& layer) {
  const int k = layer.width;
  const int d = layer.depth;
  if (static_cast<int>(input.cols()) != d) {
    throw ShapeError("conv1d: input depth " + std::to_string(input.cols()) +
                     " does not match kernel depth " + std::to_string(d));
  }
  if (static_cast<int>(input.rows()) < k) {
    throw ShapeError("conv1d: input length " + std::to_string(input.rows()) +
                     " shorter than kernel width " + std::to_string(k));
  }
  const std::size_t out_len = input.rows() - k + 1;
  const int nh = layer.num_kernels();
  Matrix out(out_len, nh);
  const std::size_t span = static_cast<std::size_t>(k) * d;
  for (std::size_t j = 0; j < out_len; ++j) {
    // Rows j..j+k-1 are contiguous in row-major storage.
    const double* window = input.data().data() + j * d;
    for (int h = 0; h < nh; ++h) {
      const double* w = layer.weights.data().data() + h * span;
      double acc = layer.bias(0, h);
      for (std::size_t i = 0; i < span; ++i) acc += w[i] * window[i];
      out(j, h) = acc;
    }
  }
  return out;
}

std::vector<FeatureMap> conv1d(const Matrix& input, const ConvLayer& layer) {
  const Matrix grid = conv1d_grid(input, layer);
  std::vector<FeatureMap> maps(grid.cols(), FeatureMap(grid.rows()));
  for (std::size_t j = 0; j < grid.rows(); ++j) {
    for (std::size_t h = 0; h < grid.cols(); ++h) maps[h][j] = grid(j, h);
  }
  return maps;
}

std::size_t pooled_length(std::size_t length, int size, int stride) {
  if (size < 1) throw std::invalid_argument("pool size must be >= 1");
  if (stride <= 0) stride = size;
  if (length == 0) return 0;
  if (static_cast<std::size_t>(size) >= length) return 1;
  // Windows start at 0, stride, ... while the start is inside the map; with
  // overlapping windows, stop once a window reaches the end.
  std::size_t n = 0;
  for (std::size_t start = 0; start < length; start += stride) {
    ++n;
    if (start + size >= length) break;
  }
  return n;
}

FeatureMap max_pool(std::span<const double> map, int size, int stride) {
  Matrix grid(map.size(), 1);
  std::copy(map.begin(), map.end(), grid.data().begin());
  const Matrix pooled = max_pool_rows(grid, size, stride);
  return pooled.data();
}

Matrix max_pool_rows(const Matrix& grid, int size, int stride, std::vector<int>* argmax) {
  if (stride <= 0) stride = size;
  const std::size_t len = grid.rows();
  const std::size_t out_len = pooled_length(len, size, stride);
  Matrix out(out_len, grid.cols());
  if (argmax) argmax->assign(out_len * grid.cols(), 0);
  for (std::size_t o = 0; o < out_len; ++o) {
    const std::size_t start = o * stride;
    const std::size_t end = std::min(len, start + static_cast<std::size_t>(size));
    for (std::size_t c = 0; c < grid.cols(); ++c) {
      std::size_t best = start;
      for (std::size_t r = start + 1; r < end; ++r) {
        if (grid(r, c) > grid(best, c)) best = r;
      }
      out(o, c) = grid(best, c);
      if (argmax) (*argmax)[o * grid.cols() + c] = static_cast<int>(best);
    }
  }
  return out;
}

void Layer::write(std::ostream& out) const { out << "layer " << kind() << '\n'; }

Conv1dLayer::Conv1dLayer(ConvLayer conv)
    : conv_(std::move(conv)),
      grad_w_(conv_.weights.rows(), conv_.weights.cols()),
      grad_b_(1, conv_.bias.cols()) {}

std::unique_ptr<Layer> Conv1dLayer::clone() const {
  return std::make_unique<Conv1dLayer>(*this);
}

Matrix Conv1dLayer::forward(const Matrix& in, ForwardContext&, Matrix*) const {
  return conv1d_grid(in, conv_);
}

Matrix Conv1dLayer::backward(const Matrix& in, const Matrix&, const Matrix&,
                             const Matrix& grad_out) {
  const int d = conv_.depth;
  const std::size_t span = static_cast<std::size_t>(conv_.width) * d;
  const int nh = conv_.num_kernels();
  Matrix grad_in(in.rows(), in.cols());
  for (std::size_t j = 0; j < grad_out.rows(); ++j) {
    const double* window = in.data().data() + j * d;
    double* gwindow = grad_in.data().data() + j * d;
    for (int h = 0; h < nh; ++h) {
      const double g = grad_out(j, h);
      if (g == 0.0) continue;
      grad_b_(0, h) += g;
      double* gw = grad_w_.data().data() + h * span;
      const double* w = conv_.weights.data().data() + h * span;
      for (std::size_t i = 0; i < span; ++i) {
        gw[i] += g * window[i];
        gwindow[i] += g * w[i];
      }
    }
  }
  return grad_in;
}

std::vector<Param> Conv1dLayer::params() {
  return {{"conv.weights", &conv_.weights, &grad_w_, false},
          {"conv.bias", &conv_.bias, &grad_b_, false}};
}

void Conv1dLayer::write(std::ostream& out) const {
  out << "layer conv1d\nshape " << conv_.num_kernels() << ' ' << conv_.width << ' '
      << conv_.depth << '\n';
  write_values(out, "weights", conv_.weights);
  write_values(out, "bias", conv_.bias);
}

MaxPoolLayer::MaxPoolLayer(int size, int stride) : size_(size), stride_(stride) {
  if (size < 1) throw std::invalid_argument("pool size must be >= 1");
}

std::unique_ptr<Layer> MaxPoolLayer::clone() const {
  return std::make_unique<MaxPoolLayer>(*this);
}

Matrix MaxPoolLayer::forward(const Matrix& in, ForwardContext&, Matrix* aux) const {
  std::vector<int> argmax;
  Matrix out = max_pool_rows(in, size_, stride_, &argmax);
  if (aux) {
    *aux = Matrix(out.rows(), out.cols());
    for (std::size_t i = 0; i < argmax.size(); ++i) aux->data()[i] = argmax[i];
  }
  return out;
}

Matrix MaxPoolLayer::backward(const Matrix& in, const Matrix&, const Matrix& aux,
                              const Matrix& grad_out) {
  Matrix grad_in(in.rows(), in.cols());
  for (std::size_t o = 0; o < grad_out.rows(); ++o) {
    for (std::size_t c = 0; c < grad_out.cols(); ++c) {
      const auto src = static_cast<std::size_t>(aux(o, c));
      grad_in(src, c) += grad_out(o, c);
    }
  }
  return grad_in;
}

void MaxPoolLayer::write(std::ostream& out) const {
  out << "layer maxpool\nshape " << size_ << ' ' << stride_ << '\n';
}

std::unique_ptr<Layer> ActivationLayer::clone() const {
  return std::make_unique<ActivationLayer>(*this);
}

Matrix ActivationLayer::forward(const Matrix& in, ForwardContext&, Matrix*) const {
  Matrix out = in;
  if (fn_ == Activation::kTanh) {
    for (double& v : out.data()) v = std::tanh(v);
  } else {
    for (double& v : out.data()) v = sigmoid(v);
  }
  return out;
}

Matrix ActivationLayer::backward(const Matrix&, const Matrix& out, const Matrix&,
                                 const Matrix& grad_out) {
  Matrix grad_in = grad_out;
  for (std::size_t i = 0; i < grad_in.size(); ++i) {
    const double y = out.data()[i];
    grad_in.data()[i] *= fn_ == Activation::kTanh ? 1.0 - y * y : y * (1.0 - y);
  }
  return grad_in;
}

DenseLayer::DenseLayer(int in, int out)
    : w_(out, in), b_(1, out), grad_w_(out, in), grad_b_(1, out) {
  if (in < 1 || out < 1) throw ShapeError("dense layer needs positive sizes");
}

std::unique_ptr<Layer> DenseLayer::clone() const {
  return std::make_unique<DenseLayer>(*this);
}

Matrix DenseLayer::forward(const Matrix& in, ForwardContext&, Matrix*) const {
  if (in.size() != w_.cols()) {
    throw ShapeError("dense: input has " + std::to_string(in.size()) +
                     " values, layer expects " + std::to_string(w_.cols()));
  }
  Matrix out(1, w_.rows());
  const auto& x = in.data();
  for (std::size_t o = 0; o < w_.rows(); ++o) {
    double acc = b_(0, o);
    const auto row = w_.row(o);
    for (std::size_t i = 0; i < row.size(); ++i) acc += row[i] * x[i];
    out(0, o) = acc;
  }
  return out;
}

Matrix DenseLayer::backward(const Matrix& in, const Matrix&, const Matrix&,
                            const Matrix& grad_out) {
  Matrix grad_in(in.rows(), in.cols());
  const auto& x = in.data();
  auto& gx = grad_in.data();
  for (std::size_t o = 0; o < w_.rows(); ++o) {
    const double g = grad_out(0, o);
    if (g == 0.0) continue;
    grad_b_(0, o) += g;
    const auto row = w_.row(o);
    auto grow = grad_w_.row(o);
    for (std::size_t i = 0; i < row.size(); ++i) {
      grow[i] += g * x[i];
      gx[i] += g * row[i];
    }
  }
  return grad_in;
}

std::vector<Param> DenseLayer::params() {
  return {{"dense.weights", &w_, &grad_w_, true}, {"dense.bias", &b_, &grad_b_, false}};
}

void DenseLayer::write(std::ostream& out) const {
  out << "layer dense\nshape " << w_.rows() << ' ' << w_.cols() << '\n';
  write_values(out, "weights", w_);
  write_values(out, "bias", b_);
}

DropoutLayer::DropoutLayer(double keep) : keep_(keep) {
  if (!(keep > 0.0 && keep <= 1.0)) throw std::invalid_argument("dropout keep must be in (0,1]");
}

std::unique_ptr<Layer> DropoutLayer::clone() const {
  return std::make_unique<DropoutLayer>(*this);
}

Matrix DropoutLayer::forward(const Matrix& in, ForwardContext& ctx, Matrix* aux) const {
  Matrix out = in;
  if (ctx.mode == Mode::kInfer || keep_ == 1.0) {
    if (keep_ != 1.0) {
      for (double& v : out.data()) v *= keep_;
    }
    if (aux) *aux = Matrix(in.rows(), in.cols(), ctx.mode == Mode::kInfer ? keep_ : 1.0);
    return out;
  }
  if (!ctx.rng) throw std::logic_error("dropout in training mode needs a random stream");
  Matrix mask(in.rows(), in.cols());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double m = ctx.rng->bernoulli(keep_) ? 1.0 : 0.0;
    mask.data()[i] = m;
    out.data()[i] *= m;
  }
  if (aux) *aux = std::move(mask);
  return out;
}

Matrix DropoutLayer::backward(const Matrix&, const Matrix&, const Matrix& aux,
                              const Matrix& grad_out) {
  Matrix grad_in = grad_out;
  for (std::size_t i = 0; i < grad_in.size(); ++i) grad_in.data()[i] *= aux.data()[i];
  return grad_in;
}

void DropoutLayer::write(std::ostream& out) const {
  out << "layer dropout\nshape " << format_double(keep_) << '\n';
}

Network::Network(const Network& other) {
  layers_.reserve(other.layers_.size());
  for (const auto& l : other.layers_) layers_.push_back(l->clone());
}

Network& Network::operator=(const Network& other) {
  if (this != &other) {
    Network copy(other);
    layers_ = std::move(copy.layers_);
  }
  return *this;
}

ForwardTrace Network::forward(const Matrix& input, ForwardContext& ctx) const {
  ForwardTrace trace;
  trace.values.reserve(layers_.size() + 1);
  trace.aux.resize(layers_.size());
  trace.values.push_back(input);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    try {
      trace.values.push_back(layers_[i]->forward(trace.values.back(), ctx, &trace.aux[i]));
    } catch (const ShapeError& e) {
      throw ShapeError("layer " + std::to_string(i) + " (" + layers_[i]->kind() +
                       "): " + e.what());
    }
  }
  return trace;
}

Matrix Network::predict(const Matrix& input) const {
  ForwardContext ctx{Mode::kInfer, nullptr};
  Matrix x = input;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    try {
      x = layers_[i]->forward(x, ctx, nullptr);
    } catch (const ShapeError& e) {
      throw ShapeError("layer " + std::to_string(i) + " (" + layers_[i]->kind() +
                       "): " + e.what());
    }
  }
  return x;
}

Matrix Network::backward(const ForwardTrace& trace, const Matrix& grad_output) {
  Matrix grad = grad_output;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    grad = layers_[i]->backward(trace.values[i], trace.values[i + 1], trace.aux[i], grad);
  }
  return grad;
}

std::vector<Param> Network::params() {
  std::vector<Param> out;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    for (auto p : layers_[i]->params()) {
      p.name = "layer" + std::to_string(i) + "." + p.name;
      out.push_back(p);
    }
  }
  return out;
}

std::size_t Network::num_params() {
  std::size_t n = 0;
  for (const auto& p : params()) n += p.value->size();
  return n;
}

void Network::zero_grad() {
  for (auto& p : params()) p.grad->fill(0.0);
}

void Network::write(std::ostream& out) const {
  out << "network " << layers_.size() << '\n';
  for (const auto& l : layers_) l->write(out);
  out << "end network\n";
}

Network Network::read(std::istream& in) {
  expect_word(in, "network");
  const auto n = read_int(in, "layer count");
  Network net;
  for (long long i = 0; i < n; ++i) {
    expect_word(in, "layer");
    const auto kind = next_word(in, "layer kind");
    if (kind == "conv1d") {
      expect_word(in, "shape");
      const int nh = static_cast<int>(read_int(in, "kernels"));
      const int k = static_cast<int>(read_int(in, "width"));
      const int d = static_cast<int>(read_int(in, "depth"));
      ConvLayer conv(nh, k, d);
      read_values(in, "weights", conv.weights);
      read_values(in, "bias", conv.bias);
      net.add(std::make_unique<Conv1dLayer>(std::move(conv)));
    } else if (kind == "maxpool") {
      expect_word(in, "shape");
      const int size = static_cast<int>(read_int(in, "pool size"));
      const int stride = static_cast<int>(read_int(in, "pool stride"));
      net.add(std::make_unique<MaxPoolLayer>(size, stride));
    } else if (kind == "tanh") {
      net.add(std::make_unique<ActivationLayer>(Activation::kTanh));
    } else if (kind == "sigmoid") {
      net.add(std::make_unique<ActivationLayer>(Activation::kSigmoid));
    } else if (kind == "dense") {
      expect_word(in, "shape");
      const int out = static_cast<int>(read_int(in, "outputs"));
      const int inputs = static_cast<int>(read_int(in, "inputs"));
      auto dense = std::make_unique<DenseLayer>(inputs, out);
      read_values(in, "weights", dense->weights());
      read_values(in, "bias", dense->bias());
      net.add(std::move(dense));
    } else if (kind == "dropout") {
      expect_word(in, "shape");
      net.add(std::make_unique<DropoutLayer>(read_double(in, "keep")));
    } else {
      throw std::runtime_error("model file: unknown layer kind '" + kind + "'");
    }
  }
  expect_word(in, "end");
  expect_word(in, "network");
  return net;
}

void init_uniform(Network& net, Rng& rng, double scale) {
  for (auto& p : net.params()) {
    for (double& v : p.value->data()) v = rng.uniform(-scale, scale);
  }
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0)) throw std::invalid_argument("learning rate must be >= 0");
  if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  if (!(dropout_keep > 0.0 && dropout_keep <= 1.0)) {
    throw std::invalid_argument("dropout keep probability must be in (0,1]");
  }
  if (l2_max && !(*l2_max > 0.0)) throw std::invalid_argument("l2 cap must be positive");
}

void Sgd::step(std::span<const Param> params) const {
  if (learning_rate == 0.0) return;
  for (const auto& p : params) {
    auto& v = p.value->data();
    const auto& g = p.grad->data();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= learning_rate * g[i];
    if (!max_norm || !p.max_norm_rows) continue;
    for (std::size_t r = 0; r < p.value->rows(); ++r) {
      auto row = p.value->row(r);
      double sq = 0.0;
      for (double x : row) sq += x * x;
      const double norm = std::sqrt(sq);
      if (norm > *max_norm) {
        const double s = *max_norm / norm;
        for (double& x : row) x *= s;
      }
    }
  }
}

double grad_check_params(std::span<const Param> params, const std::function<double()>& loss,
                         const std::function<void()>& analytic, double step) {
  analytic();
  double worst = 0.0;
  for (const auto& p : params) {
    const std::vector<double> ga = p.grad->data();
    auto& v = p.value->data();
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double orig = v[i];
      v[i] = orig + step;
      const double up = loss();
      v[i] = orig - step;
      const double down = loss();
      v[i] = orig;
      const double gn = (up - down) / (2.0 * step);
      const double rel = std::abs(ga[i] - gn) / std::max(1e-8, std::abs(ga[i]) + std::abs(gn));
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

double grad_check(Network& net, const Matrix& input, const OutputLoss& loss, double step) {
  const auto params = net.params();
  auto eval = [&] { return loss(net.predict(input), nullptr); };
  auto analytic = [&] {
    net.zero_grad();
    ForwardContext ctx{Mode::kInfer, nullptr};
    const auto trace = net.forward(input, ctx);
    Matrix g(trace.output().rows(), trace.output().cols());
    loss(trace.output(), &g);
    net.backward(trace, g);
  };
  return grad_check_params(params, eval, analytic, step);
}

double squared_loss(const Matrix& output, const Matrix& target, Matrix* grad) {
  if (!output.same_shape(target)) throw ShapeError("squared_loss: shape mismatch");
  double loss = 0.0;
  if (grad) *grad = Matrix(output.rows(), output.cols());
  for (std::size_t i = 0; i < output.size(); ++i) {
    const double diff = output.data()[i] - target.data()[i];
    loss += 0.5 * diff * diff;
    if (grad) grad->data()[i] = diff;
  }
  return loss;
}

std::vector<double> softmax(std::span<const double> scores) {
  std::vector<double> p(scores.begin(), scores.end());
  if (p.empty()) return p;
  const double m = *std::max_element(p.begin(), p.end());
  double z = 0.0;
  for (double& x : p) {
    x = std::exp(x - m);
    z += x;
  }
  for (double& x : p) x /= z;
  return p;
}

double softmax_cross_entropy(const Matrix& output, int label, Matrix* grad) {
  const auto p = softmax(output.row(0));
  if (label < 0 || label >= static_cast<int>(p.size())) {
    throw std::invalid_argument("softmax_cross_entropy: label out of range");
  }
  if (grad) {
    *grad = Matrix(1, p.size());
    for (std::size_t i = 0; i < p.size(); ++i) (*grad)(0, i) = p[i];
    (*grad)(0, label) -= 1.0;
  }
  const auto row = output.row(0);
  const double m = *std::max_element(row.begin(), row.end());
  double z = 0.0;
  for (double x : row) z += std::exp(x - m);
  return m + std::log(z) - row[label];
}

}  // namespace absa
