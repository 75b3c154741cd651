#ifndef ABSA_NEURAL_H_
#define ABSA_NEURAL_H_

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "absa/matrix.h"
#include "absa/random.h"

namespace absa {

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// n_h kernels of k x d, stored one flattened kernel per row of `weights`.
// Kernels always span the full input depth, so a k-token window yields one
// value per kernel.
struct ConvLayer {
  int width = 1;  // k
  int depth = 1;  // d
  Matrix weights; // n_h x (k*d)
  Matrix bias;    // 1 x n_h

  ConvLayer() = default;
  ConvLayer(int num_kernels, int width, int depth);
  int num_kernels() const { return static_cast<int>(weights.rows()); }
  double& at(int h, int r, int c) { return weights(h, r * depth + c); }
  double at(int h, int r, int c) const { return weights(h, r * depth + c); }
};

using FeatureMap = std::vector<double>;

// Valid 1-D convolution with stride 1 over the rows of an L x d grid.
// Returns an (L-k+1) x n_h grid: row j, column h is kernel h at offset j.
Matrix conv1d_grid(const Matrix& input, const ConvLayer& layer);
// Same computation returned as one feature map per kernel.
std::vector<FeatureMap> conv1d(const Matrix& input, const ConvLayer& layer);

// Max over windows of `size` advancing by `stride` (stride 0 means size, i.e.
// non-overlapping). A trailing partial window is pooled as-is; size >= length
// pools globally.
FeatureMap max_pool(std::span<const double> map, int size, int stride = 0);
// Column-wise pooling over the rows of a grid. argmax, when given, receives
// the source row of every output cell.
Matrix max_pool_rows(const Matrix& grid, int size, int stride,
                     std::vector<int>* argmax = nullptr);
std::size_t pooled_length(std::size_t length, int size, int stride);

enum class Mode { kTrain, kInfer };

struct ForwardContext {
  Mode mode = Mode::kInfer;
  Rng* rng = nullptr;  // required for kTrain when dropout is present
};

// A trainable tensor and its gradient accumulator.
struct Param {
  std::string name;
  Matrix* value = nullptr;
  Matrix* grad = nullptr;
  bool max_norm_rows = false;  // rows are weight vectors subject to the norm cap
};

class Layer {
 public:
  virtual ~Layer() = default;
  virtual std::string kind() const = 0;
  virtual std::unique_ptr<Layer> clone() const = 0;

  // aux receives per-call state that backward needs (dropout masks, pooling
  // argmaxes).
  virtual Matrix forward(const Matrix& in, ForwardContext& ctx, Matrix* aux) const = 0;
  // Accumulates parameter gradients and returns d(loss)/d(in).
  virtual Matrix backward(const Matrix& in, const Matrix& out, const Matrix& aux,
                          const Matrix& grad_out) = 0;

  virtual std::vector<Param> params() { return {}; }
  virtual void write(std::ostream& out) const;
};

class Conv1dLayer : public Layer {
 public:
  explicit Conv1dLayer(ConvLayer conv);
  std::string kind() const override { return "conv1d"; }
  std::unique_ptr<Layer> clone() const override;
  Matrix forward(const Matrix& in, ForwardContext& ctx, Matrix* aux) const override;
  Matrix backward(const Matrix& in, const Matrix& out, const Matrix& aux,
                  const Matrix& grad_out) override;
  std::vector<Param> params() override;
  void write(std::ostream& out) const override;

  ConvLayer& conv() { return conv_; }
  const ConvLayer& conv() const { return conv_; }

 private:
  ConvLayer conv_;
  Matrix grad_w_, grad_b_;
};

class MaxPoolLayer : public Layer {
 public:
  MaxPoolLayer(int size, int stride);
  std::string kind() const override { return "maxpool"; }
  std::unique_ptr<Layer> clone() const override;
  Matrix forward(const Matrix& in, ForwardContext& ctx, Matrix* aux) const override;
  Matrix backward(const Matrix& in, const Matrix& out, const Matrix& aux,
                  const Matrix& grad_out) override;
  void write(std::ostream& out) const override;
  int size() const { return size_; }
  int stride() const { return stride_; }

 private:
  int size_, stride_;
};

enum class Activation { kTanh, kSigmoid };

class ActivationLayer : public Layer {
 public:
  explicit ActivationLayer(Activation fn) : fn_(fn) {}
  std::string kind() const override {
    return fn_ == Activation::kTanh ? "tanh" : "sigmoid";
  }
  std::unique_ptr<Layer> clone() const override;
  Matrix forward(const Matrix& in, ForwardContext& ctx, Matrix* aux) const override;
  Matrix backward(const Matrix& in, const Matrix& out, const Matrix& aux,
                  const Matrix& grad_out) override;

 private:
  Activation fn_;
};

// Fully connected layer over the row-major flattening of its input; output
// is 1 x n_out.
class DenseLayer : public Layer {
 public:
  DenseLayer(int in, int out);
  std::string kind() const override { return "dense"; }
  std::unique_ptr<Layer> clone() const override;
  Matrix forward(const Matrix& in, ForwardContext& ctx, Matrix* aux) const override;
  Matrix backward(const Matrix& in, const Matrix& out, const Matrix& aux,
                  const Matrix& grad_out) override;
  std::vector<Param> params() override;
  void write(std::ostream& out) const override;

  Matrix& weights() { return w_; }
  Matrix& bias() { return b_; }
  const Matrix& weights() const { return w_; }
  const Matrix& bias() const { return b_; }

 private:
  Matrix w_, b_;  // n_out x n_in, 1 x n_out
  Matrix grad_w_, grad_b_;
};

// Training: multiply by a Bernoulli(keep) mask. Inference: scale by keep.
class DropoutLayer : public Layer {
 public:
  explicit DropoutLayer(double keep);
  std::string kind() const override { return "dropout"; }
  std::unique_ptr<Layer> clone() const override;
  Matrix forward(const Matrix& in, ForwardContext& ctx, Matrix* aux) const override;
  Matrix backward(const Matrix& in, const Matrix& out, const Matrix& aux,
                  const Matrix& grad_out) override;
  void write(std::ostream& out) const override;
  double keep() const { return keep_; }

 private:
  double keep_;
};

// All intermediate values of one forward pass. values[0] is the input and
// values[i+1] the output of layer i.
struct ForwardTrace {
  std::vector<Matrix> values;
  std::vector<Matrix> aux;
  const Matrix& output() const { return values.back(); }
};

class Network {
 public:
  Network() = default;
  Network(const Network& other);
  Network& operator=(const Network& other);
  Network(Network&&) noexcept = default;
  Network& operator=(Network&&) noexcept = default;

  void add(std::unique_ptr<Layer> layer) { layers_.push_back(std::move(layer)); }
  std::size_t num_layers() const { return layers_.size(); }
  Layer& layer(std::size_t i) { return *layers_[i]; }
  const Layer& layer(std::size_t i) const { return *layers_[i]; }

  ForwardTrace forward(const Matrix& input, ForwardContext& ctx) const;
  Matrix predict(const Matrix& input) const;
  // Backpropagates grad_output through the trace; returns d(loss)/d(input).
  Matrix backward(const ForwardTrace& trace, const Matrix& grad_output);

  std::vector<Param> params();
  std::size_t num_params();
  void zero_grad();

  void write(std::ostream& out) const;
  static Network read(std::istream& in);

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
};

// Uniform(-scale, scale) initialisation of every parameter (biases included).
void init_uniform(Network& net, Rng& rng, double scale = 0.01);

struct TrainConfig {
  double learning_rate = 0.01;
  int epochs = 30;
  double dropout_keep = 0.5;
  std::uint64_t seed = 1;
  std::optional<double> l2_max;

  void validate() const;
};

// Plain SGD. When a norm cap is set, each row of a max_norm_rows parameter
// is rescaled to L2 norm <= cap after the step. A zero learning rate leaves
// parameters untouched.
struct Sgd {
  double learning_rate = 0.01;
  std::optional<double> max_norm;
  void step(std::span<const Param> params) const;
};

// max |g_a - g_n| / max(1e-8, |g_a| + |g_n|) over every parameter entry,
// where g_n is a central difference with the given step.
// `analytic` must zero the gradients and fill them for the current point;
// `loss` must evaluate the loss without touching gradients.
double grad_check_params(std::span<const Param> params, const std::function<double()>& loss,
                         const std::function<void()>& analytic, double step = 1e-5);

// Loss on a network output; fills grad with d(loss)/d(output).
using OutputLoss = std::function<double(const Matrix& output, Matrix* grad)>;

double grad_check(Network& net, const Matrix& input, const OutputLoss& loss,
                  double step = 1e-5);

double squared_loss(const Matrix& output, const Matrix& target, Matrix* grad);
// Numerically stable softmax of a vector.
std::vector<double> softmax(std::span<const double> scores);
// Cross-entropy of softmax(output row 0) against `label`.
double softmax_cross_entropy(const Matrix& output, int label, Matrix* grad);

double sigmoid(double x);

}  // namespace absa

#endif  // ABSA_NEURAL_H_
