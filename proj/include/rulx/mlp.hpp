#pragma once

#include "rulx/predictor.hpp"

#include <cstdint>
#include <vector>

namespace rulx {

struct MlpParams {
  std::vector<std::size_t> hidden_layers{50};
  std::size_t max_iter = 1000;
  double learning_rate = 1e-3;
  /// Divide the step by 5 after two consecutive epochs without improvement.
  bool adaptive = true;
  std::size_t batch_size = 200;
  double momentum = 0.9;
  double tol = 1e-4;
  /// Train against z-scored targets and map outputs back.
  bool standardize_target = true;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Fully connected ReLU network with a linear output unit.
class Mlp final : public Predictor {
 public:
  struct Layer {
    Matrix weights;  // outputs x inputs
    Vector bias;
  };

  Mlp() = default;
  Mlp(std::vector<Layer> layers, double target_mean, double target_scale);

  /// Symmetric uniform init with bound sqrt(6 / (fan_in + fan_out)).
  static Mlp initialize(std::size_t inputs, const std::vector<std::size_t>& hidden, std::uint64_t seed);

  std::size_t arity() const override { return static_cast<std::size_t>(layers_.front().weights.cols()); }
  const std::vector<Layer>& layers() const { return layers_; }
  double target_mean() const { return target_mean_; }
  double target_scale() const { return target_scale_; }

  /// Raw network output (before the target mapping).
  Vector network_output(const Matrix& x) const;
  /// 0.5 * mean((network_output - t)^2)
  double loss(const Matrix& x, const Vector& t) const;
  /// Backpropagated gradient of loss() with respect to parameters(), same layout.
  Vector loss_gradient(const Matrix& x, const Vector& t) const;

  /// Layer by layer: weights (column-major), then bias.
  Vector parameters() const;
  void set_parameters(const Vector& flat);
  std::size_t parameter_count() const;

  std::vector<double> epoch_loss;
  double final_learning_rate = 0.0;

 protected:
  double predict_row(const Eigen::Ref<const Vector>& x) const override;

 private:
  friend Mlp fit_mlp(const Matrix&, const Vector&, const MlpParams&);
  double loss_and_gradient(const Matrix& x, const Vector& t, std::vector<Layer>* grad) const;

  std::vector<Layer> layers_;
  double target_mean_ = 0.0;
  double target_scale_ = 1.0;
};

/// Mini-batch gradient descent with momentum on squared error. Throws when the
/// epoch loss becomes non-finite.
Mlp fit_mlp(const Matrix& x, const Vector& y, const MlpParams& params);

}  // namespace rulx
