#ifndef ABSA_CDBN_H_
#define ABSA_CDBN_H_

#include <span>
#include <vector>

#include "absa/matrix.h"
#include "absa/random.h"

namespace absa {

// Restricted Boltzmann machine with Gaussian visible units and binary hidden
// units.
//   hidden pre-activation  b_j + sum_i v_i w_ij,  p(h_j = 1) = sigmoid(.)
//   visible mean           c_i + sum_j h_j w_ij,  v_i ~ N(mean, sigma)
struct RbmLayer {
  Matrix W;               // visible x hidden
  std::vector<double> b;  // hidden biases
  std::vector<double> c;  // visible biases
  double sigma = 1.0;

  RbmLayer() = default;
  RbmLayer(int visible, int hidden);
  int visible() const { return static_cast<int>(W.rows()); }
  int hidden() const { return static_cast<int>(W.cols()); }
  void init_uniform(Rng& rng, double scale);
};

enum class HiddenMode { kProb, kSample };
enum class VisibleMode { kMean, kSample };

std::vector<double> rbm_hidden(const RbmLayer& layer, std::span<const double> v,
                               HiddenMode mode, Rng* rng = nullptr);
std::vector<double> rbm_reconstruct(const RbmLayer& layer, std::span<const double> h,
                                    VisibleMode mode, Rng* rng = nullptr);

// E = -sum_ij v_i h_j w_ij
double energy(const RbmLayer& layer, std::span<const double> v, std::span<const double> h);

struct CdOptions {
  // Data-side hidden states are sampled and the reconstruction is drawn from
  // N(mean, sigma). Turning both off gives a deterministic mean-field chain.
  bool sample_hidden = true;
  bool sample_visible = true;
};

// One CD-1 update from the batch:
//   h0 ~ p(h | v0), v1 ~ p(v | h0), h1 = p(h | v1)
//   dW = alpha (<v0 h0> - <v1 h1>), db = alpha (<h0> - <h1>), dc = alpha (<v0> - <v1>)
// with averages over the batch. Returns the batch mean of the per-unit
// squared error between v0 and the reconstruction mean. alpha = 0 leaves the
// layer untouched.
double cd1_epoch(RbmLayer& layer, std::span<const std::vector<double>> batch, double alpha,
                 Rng& rng, const CdOptions& options = {});

// Population standard deviation over every entry of the data; 1 when the
// data are constant.
double empirical_sigma(std::span<const std::vector<double>> data);

struct PretrainConfig {
  int epochs = 10;
  double learning_rate = 0.01;
  int batch_size = 10;
  CdOptions cd;
};

struct PretrainReport {
  // errors[l][e]: mean reconstruction error of layer l during epoch e.
  std::vector<std::vector<double>> errors;
};

// Greedy layer-wise CD-1. Layer 0 sees `data`; layer l+1 is trained on the
// hidden probabilities of layer l. Each layer's sigma is fixed to the
// empirical standard deviation of its input before training.
void pretrain_stack(std::vector<RbmLayer>& stack, std::span<const std::vector<double>> data,
                    const PretrainConfig& config, Rng& rng, PretrainReport* report = nullptr);

// Convolutional RBM over an L x d grid. Hidden group z holds one unit per
// window position, all sharing kernel z (k x d); hidden grids are
// (L-k+1) x Z, matching conv1d_grid.
struct ConvRbm {
  int width = 1;
  int depth = 1;
  Matrix kernels;                 // Z x (k*d), row-major k x d per group
  std::vector<double> hidden_bias;  // Z
  std::vector<double> visible_bias; // d, shared across positions
  double sigma = 1.0;

  ConvRbm() = default;
  ConvRbm(int groups, int width, int depth);
  int groups() const { return static_cast<int>(kernels.rows()); }
  double w(int z, int r, int s) const { return kernels(z, r * depth + s); }
};

Matrix conv_rbm_hidden(const ConvRbm& rbm, const Matrix& v, HiddenMode mode,
                       Rng* rng = nullptr);
Matrix conv_rbm_reconstruct(const ConvRbm& rbm, const Matrix& h, std::size_t length,
                            VisibleMode mode, Rng* rng = nullptr);

// E = -sum_z sum_i sum_{r,s} v(i+r, s) h(i, z) w_z(r, s)
double energy(const ConvRbm& rbm, const Matrix& v, const Matrix& h);

// CD-1 for the convolutional RBM. Weight statistics are averaged over the
// batch and over hidden positions.
double conv_cd1_epoch(ConvRbm& rbm, std::span<const Matrix> batch, double alpha, Rng& rng,
                      const CdOptions& options = {});

double empirical_sigma(std::span<const Matrix> data);

}  // namespace absa

#endif  // ABSA_CDBN_H_
