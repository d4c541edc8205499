#include "qys/tensor.hpp"

#include <cmath>

namespace qys {

namespace {

std::size_t pow_dim(int dim, int rank) {
  std::size_t s = 1;
  for (int i = 0; i < rank; ++i) s *= static_cast<std::size_t>(dim);
  return s;
}

}  // namespace

TensorValue::TensorValue(std::vector<double> point, std::string signature, int dim)
    : point_(std::move(point)), sig_(std::move(signature)), dim_(dim) {
  for (char c : sig_) {
    if (c != 'u' && c != 'd') throw Error("tensor signature must use 'u'/'d'");
  }
  data_.assign(pow_dim(dim_, rank()), 0.0);
}

TensorValue TensorValue::sym2(std::vector<double> point, int dim,
                              const std::vector<double>& row_major) {
  TensorValue t(std::move(point), "dd", dim);
  if (row_major.size() != t.data_.size())
    throw Error("sym2: component count mismatch");
  double scale = 0.0;
  for (double v : row_major) scale = std::max(scale, std::abs(v));
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      double a = row_major[i * dim + j];
      double b = row_major[j * dim + i];
      if (std::abs(a - b) > 1e-10 * (1.0 + scale))
        throw Error("sym2: input asymmetric beyond tolerance");
    }
  }
  t.data_ = row_major;
  return t;
}

std::size_t TensorValue::flat_index(std::initializer_list<int> idx) const {
  if (static_cast<int>(idx.size()) != rank())
    throw Error("tensor index rank mismatch");
  std::size_t flat = 0;
  for (int i : idx) {
    if (i < 0 || i >= dim_) throw Error("tensor index out of range");
    flat = flat * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(i);
  }
  return flat;
}

double& TensorValue::at(std::initializer_list<int> idx) {
  return data_[flat_index(idx)];
}

double TensorValue::at(std::initializer_list<int> idx) const {
  return data_[flat_index(idx)];
}

double TensorValue::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace qys
