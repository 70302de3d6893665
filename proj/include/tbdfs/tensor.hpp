#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "tbdfs/rng.hpp"

namespace tbdfs {

// Dense row-major f64 array, rank 1 or 2 in practice. Plain value type; the
// autodiff bookkeeping lives in Tape.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> values;

  Tensor() = default;
  Tensor(std::vector<std::size_t> s, std::vector<double> v);

  static Tensor zeros(std::vector<std::size_t> shape);
  static Tensor full(std::vector<std::size_t> shape, double fill);
  static Tensor scalar(double v);
  static Tensor row(std::vector<double> v);  // shape {1, n}
  static Tensor vec(std::vector<double> v);  // shape {n}
  // uniform(-a, a) entries
  static Tensor uniform(std::vector<std::size_t> shape, double a, Rng& rng);

  std::size_t numel() const { return values.size(); }
  std::size_t rank() const { return shape.size(); }
  bool is_scalar() const { return numel() == 1; }
  std::size_t rows() const;
  std::size_t cols() const;

  double& at(std::size_t i) { return values[i]; }
  double at(std::size_t i) const { return values[i]; }
  double& at(std::size_t r, std::size_t c);
  double at(std::size_t r, std::size_t c) const;

  bool same_shape(const Tensor& other) const { return shape == other.shape; }
  bool all_finite() const;
  std::string shape_str() const;
};

std::size_t shape_numel(const std::vector<std::size_t>& shape);

}  // namespace tbdfs
