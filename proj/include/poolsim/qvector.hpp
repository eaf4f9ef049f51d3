#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace poolsim {

/// Occupancy profile q(i, j): the fraction of pools that are of class i and
/// hold at least j tasks. Stored densely for levels 0..J; q(i, 0) is the class
/// fraction alpha(i) and every level above J is zero.
template <typename Scalar>
class BasicQVector {
public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Index = Eigen::Index;

  BasicQVector() = default;

  /// Empty profile (no tasks) over levels 0..levels.
  BasicQVector(const Vector& alpha, Index levels) : values_(Matrix::Zero(alpha.size(), levels + 1)) {
    values_.col(0) = alpha;
  }

  /// Takes ownership of a full matrix whose first column is alpha.
  explicit BasicQVector(Matrix values) : values_(std::move(values)) {
    if (values_.cols() < 1) throw std::invalid_argument("QVector needs a level-0 column");
  }

  Index classes() const noexcept { return values_.rows(); }
  /// Highest stored level J.
  Index levels() const noexcept { return values_.cols() - 1; }

  Scalar operator()(Index cls, Index level) const {
    return level <= levels() ? values_(cls, level) : Scalar(0);
  }
  Scalar& operator()(Index cls, Index level) { return values_(cls, level); }

  Scalar alpha(Index cls) const { return values_(cls, 0); }
  Vector alpha() const { return values_.col(0); }

  const Matrix& values() const noexcept { return values_; }
  Matrix& values() noexcept { return values_; }

  /// Grow or shrink the stored level range; new levels are zero.
  void resize_levels(Index levels) { values_.conservativeResizeLike(Matrix::Zero(classes(), levels + 1)); }

  /// Sum of q(i, j) over j >= 1: tasks per pool.
  Scalar mass() const { return values_.rightCols(levels()).sum(); }
  Scalar class_mass(Index cls) const { return values_.row(cls).tail(levels()).sum(); }

  /// 0 <= q(i, j+1) <= q(i, j) <= alpha(i), all within `tol`.
  bool is_valid(Scalar tol = Scalar(0)) const {
    for (Index i = 0; i < classes(); ++i) {
      for (Index j = 1; j <= levels(); ++j) {
        const Scalar v = values_(i, j);
        if (!(v >= -tol) || v > values_(i, j - 1) + tol) return false;
      }
    }
    return true;
  }

  /// Smallest J keeping every nonzero entry.
  Index support() const {
    Index top = 0;
    for (Index i = 0; i < classes(); ++i)
      for (Index j = levels(); j > top; --j)
        if (values_(i, j) != Scalar(0)) {
          top = j;
          break;
        }
    return top;
  }

private:
  Matrix values_;
};

using QVector = BasicQVector<double>;

/// l1 distance over levels j >= 1; ranges may differ.
template <typename Scalar>
Scalar l1_distance(const BasicQVector<Scalar>& a, const BasicQVector<Scalar>& b) {
  const auto levels = std::max(a.levels(), b.levels());
  Scalar total(0);
  for (Eigen::Index i = 0; i < a.classes(); ++i)
    for (Eigen::Index j = 1; j <= levels; ++j) total += std::abs(a(i, j) - b(i, j));
  return total;
}

}  // namespace poolsim
