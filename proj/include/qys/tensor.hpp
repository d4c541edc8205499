#pragma once

#include <initializer_list>
#include <string>
#include <vector>

#include "qys/errors.hpp"

namespace qys {

/// Pointwise dense tensor value with an explicit index signature:
/// 'u' for a contravariant index, 'd' for a covariant one.
class TensorValue {
 public:
  TensorValue() = default;
  TensorValue(std::vector<double> point, std::string signature, int dim);

  /// Symmetric (0,2) constructor; rejects asymmetry beyond 1e-10 relative.
  static TensorValue sym2(std::vector<double> point, int dim,
                          const std::vector<double>& row_major);

  const std::vector<double>& point() const { return point_; }
  const std::string& signature() const { return sig_; }
  int dim() const { return dim_; }
  int rank() const { return static_cast<int>(sig_.size()); }

  double& at(std::initializer_list<int> idx);
  double at(std::initializer_list<int> idx) const;
  double& operator()(int i) { return at({i}); }
  double operator()(int i) const { return at({i}); }
  double& operator()(int i, int j) { return at({i, j}); }
  double operator()(int i, int j) const { return at({i, j}); }
  double& operator()(int i, int j, int k) { return at({i, j, k}); }
  double operator()(int i, int j, int k) const { return at({i, j, k}); }
  double& operator()(int i, int j, int k, int l) { return at({i, j, k, l}); }
  double operator()(int i, int j, int k, int l) const { return at({i, j, k, l}); }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  /// Largest absolute entry.
  double max_abs() const;

 private:
  std::size_t flat_index(std::initializer_list<int> idx) const;

  std::vector<double> point_;
  std::string sig_;
  int dim_ = 0;
  std::vector<double> data_;
};

}  // namespace qys
