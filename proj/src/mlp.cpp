#include "rulx/mlp.hpp"

#include "rulx/random.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace rulx {

void MlpParams::validate() const {
  for (std::size_t width : hidden_layers) require(width >= 1, "hidden layer width must be positive");
  require(learning_rate > 0.0 && std::isfinite(learning_rate), "learning_rate must be positive");
  require(batch_size >= 1, "batch_size must be positive");
  require(momentum >= 0.0 && momentum < 1.0, "momentum must lie in [0, 1)");
  require(tol >= 0.0, "tol must be non-negative");
}

Mlp::Mlp(std::vector<Layer> layers, double target_mean, double target_scale)
    : layers_(std::move(layers)), target_mean_(target_mean), target_scale_(target_scale) {
  require(!layers_.empty(), "network needs at least the output layer");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    require(layers_[l].weights.rows() == layers_[l].bias.size(), "layer bias size mismatch");
    if (l > 0) require(layers_[l].weights.cols() == layers_[l - 1].weights.rows(), "layer shapes do not chain");
  }
  require(layers_.back().weights.rows() == 1, "output layer must have one unit");
}

Mlp Mlp::initialize(std::size_t inputs, const std::vector<std::size_t>& hidden, std::uint64_t seed) {
  require(inputs >= 1, "network needs at least one input");
  Rng rng(derive_seed(seed, "mlp-init"));
  std::vector<Layer> layers;
  std::size_t fan_in = inputs;
  auto widths = hidden;
  widths.push_back(1);
  for (std::size_t fan_out : widths) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> draw(-bound, bound);
    Layer layer{Matrix(fan_out, fan_in), Vector(fan_out)};
    for (Eigen::Index j = 0; j < layer.weights.cols(); ++j)
      for (Eigen::Index i = 0; i < layer.weights.rows(); ++i) layer.weights(i, j) = draw(rng);
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias(i) = draw(rng);
    layers.push_back(std::move(layer));
    fan_in = fan_out;
  }
  return Mlp(std::move(layers), 0.0, 1.0);
}

double Mlp::predict_row(const Eigen::Ref<const Vector>& x) const {
  Vector h = x;
  for (std::size_t l = 0; l + 1 < layers_.size(); ++l) h = (layers_[l].weights * h + layers_[l].bias).cwiseMax(0.0);
  const double out = layers_.back().weights.row(0).dot(h) + layers_.back().bias(0);
  return target_mean_ + target_scale_ * out;
}

Vector Mlp::network_output(const Matrix& x) const {
  require(static_cast<std::size_t>(x.cols()) == arity(), "network input arity mismatch");
  Matrix a = x.transpose();
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Matrix z = (layers_[l].weights * a).colwise() + layers_[l].bias;
    a = l + 1 < layers_.size() ? Matrix(z.cwiseMax(0.0)) : z;
  }
  return a.row(0).transpose();
}

double Mlp::loss_and_gradient(const Matrix& x, const Vector& t, std::vector<Layer>* grad) const {
  require(static_cast<std::size_t>(x.cols()) == arity() && x.rows() == t.size() && x.rows() > 0,
          "network batch shape mismatch");
  const double n = static_cast<double>(x.rows());
  std::vector<Matrix> activations{x.transpose()};
  std::vector<Matrix> pre;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    pre.push_back((layers_[l].weights * activations.back()).colwise() + layers_[l].bias);
    activations.push_back(l + 1 < layers_.size() ? Matrix(pre.back().cwiseMax(0.0)) : pre.back());
  }
  const Eigen::RowVectorXd error = activations.back().row(0) - t.transpose();
  const double loss = 0.5 * error.squaredNorm() / n;
  if (!grad) return loss;

  grad->resize(layers_.size());
  Matrix delta = error / n;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    (*grad)[l].weights = delta * activations[l].transpose();
    (*grad)[l].bias = delta.rowwise().sum();
    if (l > 0) {
      delta = (layers_[l].weights.transpose() * delta).cwiseProduct(
          (pre[l - 1].array() > 0.0).cast<double>().matrix());
    }
  }
  return loss;
}

double Mlp::loss(const Matrix& x, const Vector& t) const { return loss_and_gradient(x, t, nullptr); }

namespace {

std::size_t count_parameters(const std::vector<Mlp::Layer>& layers) {
  std::size_t n = 0;
  for (const auto& l : layers) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
  return n;
}

Vector flatten(const std::vector<Mlp::Layer>& layers) {
  Vector flat(count_parameters(layers));
  Eigen::Index offset = 0;
  for (const auto& l : layers) {
    flat.segment(offset, l.weights.size()) = l.weights.reshaped();
    offset += l.weights.size();
    flat.segment(offset, l.bias.size()) = l.bias;
    offset += l.bias.size();
  }
  return flat;
}

}  // namespace

Vector Mlp::loss_gradient(const Matrix& x, const Vector& t) const {
  std::vector<Layer> grad;
  loss_and_gradient(x, t, &grad);
  return flatten(grad);
}

std::size_t Mlp::parameter_count() const { return count_parameters(layers_); }

Vector Mlp::parameters() const { return flatten(layers_); }

void Mlp::set_parameters(const Vector& flat) {
  require(static_cast<std::size_t>(flat.size()) == parameter_count(), "parameter vector size mismatch");
  Eigen::Index offset = 0;
  for (auto& l : layers_) {
    l.weights.reshaped() = flat.segment(offset, l.weights.size());
    offset += l.weights.size();
    l.bias = flat.segment(offset, l.bias.size());
    offset += l.bias.size();
  }
}

Mlp fit_mlp(const Matrix& x, const Vector& y, const MlpParams& params) {
  params.validate();
  if (x.rows() == 0) fail(ErrorKind::training, "cannot fit an MLP on an empty training set");
  require(x.rows() == y.size(), "feature and target row counts differ");

  const auto n = static_cast<std::size_t>(x.rows());
  double mean = 0.0;
  double scale = 1.0;
  if (params.standardize_target) {
    mean = y.mean();
    const double sd = std::sqrt((y.array() - mean).square().mean());
    if (sd > 0.0) scale = sd;
  }
  const Vector t = (y.array() - mean) / scale;

  Mlp init = Mlp::initialize(static_cast<std::size_t>(x.cols()), params.hidden_layers, params.seed);
  Mlp net(init.layers(), mean, scale);

  Vector theta = net.parameters();
  Vector velocity = Vector::Zero(theta.size());
  double rate = params.learning_rate;
  double best = std::numeric_limits<double>::infinity();
  int stalled = 0;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(params.seed, "mlp-batches"));
  const std::size_t batch = std::min(params.batch_size, n);
  Matrix xb;
  Vector tb;
  std::vector<Mlp::Layer> grad;

  for (std::size_t epoch = 1; epoch <= params.max_iter; ++epoch) {
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, i)]);
    double total = 0.0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t m = std::min(batch, n - start);
      xb.resize(static_cast<Eigen::Index>(m), x.cols());
      tb.resize(static_cast<Eigen::Index>(m));
      for (std::size_t k = 0; k < m; ++k) {
        xb.row(k) = x.row(order[start + k]);
        tb(k) = t(order[start + k]);
      }
      net.set_parameters(theta);
      total += net.loss_and_gradient(xb, tb, &grad) * static_cast<double>(m);
      velocity = params.momentum * velocity - rate * flatten(grad);
      theta += velocity;
    }
    const double epoch_loss = total / static_cast<double>(n);
    if (!std::isfinite(epoch_loss) || !theta.allFinite())
      fail(ErrorKind::training, "MLP training diverged at epoch " + std::to_string(epoch));
    net.epoch_loss.push_back(epoch_loss);

    if (params.adaptive) {
      stalled = epoch_loss > best - params.tol ? stalled + 1 : 0;
      best = std::min(best, epoch_loss);
      if (stalled >= 2) {
        rate /= 5.0;
        stalled = 0;
        if (rate < 1e-6) break;
      }
    }
  }
  net.set_parameters(theta);
  net.final_learning_rate = rate;
  return net;
}

}  // namespace rulx
