#pragma once

#include "rulx/common.hpp"

#include <functional>
#include <memory>

namespace rulx {

/// Maps a feature vector to a real-valued RUL estimate. Implementations are
/// immutable after fitting and safe for concurrent readers.
class Predictor {
 public:
  virtual ~Predictor() = default;

  virtual std::size_t arity() const = 0;

  double predict(const Eigen::Ref<const Vector>& x) const {
    check_arity(static_cast<std::size_t>(x.size()));
    return predict_row(x);
  }

  /// Row-wise application; equal to calling predict on each row.
  Vector predict_batch(const Matrix& x) const {
    check_arity(static_cast<std::size_t>(x.cols()));
    Vector out(x.rows());
    Vector row(x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      row = x.row(i).transpose();
      out(i) = predict_row(row);
    }
    return out;
  }

 protected:
  virtual double predict_row(const Eigen::Ref<const Vector>& x) const = 0;

 private:
  void check_arity(std::size_t n) const {
    if (n != arity())
      fail(ErrorKind::invalid_argument,
           "predictor expects " + std::to_string(arity()) + " features, got " + std::to_string(n));
  }
};

/// Wraps an arbitrary callable; explanation code sees nothing but predict().
class FunctionPredictor final : public Predictor {
 public:
  using Fn = std::function<double(const Eigen::Ref<const Vector>&)>;
  FunctionPredictor(std::size_t arity, Fn fn) : arity_(arity), fn_(std::move(fn)) {}
  std::size_t arity() const override { return arity_; }

 protected:
  double predict_row(const Eigen::Ref<const Vector>& x) const override { return fn_(x); }

 private:
  std::size_t arity_;
  Fn fn_;
};

}  // namespace rulx
