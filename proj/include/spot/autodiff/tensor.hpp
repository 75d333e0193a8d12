#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace spot::autodiff {

// Row-major batch x feature shape. Scalars are 1 x 1.
struct Shape {
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t size() const { return rows * cols; }
  bool operator==(const Shape&) const = default;
};

std::string to_string(Shape shape);

// Dense 2-D array of doubles. Value type; copies are deep.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);
  Tensor(std::size_t rows, std::size_t cols, double fill = 0.0)
      : Tensor(Shape{rows, cols}, fill) {}

  static Tensor scalar(double value) { return Tensor(Shape{1, 1}, value); }
  // Single row tensor from a list of values.
  static Tensor row(std::initializer_list<double> values);
  static Tensor row(std::span<const double> values);
  static Tensor column(std::span<const double> values);

  Shape shape() const { return shape_; }
  std::size_t rows() const { return shape_.rows; }
  std::size_t cols() const { return shape_.cols; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::vector<double>& storage() { return data_; }
  const std::vector<double>& storage() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& operator()(std::size_t r, std::size_t c) {
    return data_[r * shape_.cols + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * shape_.cols + c];
  }

  std::span<const double> row_span(std::size_t r) const {
    return std::span<const double>(data_).subspan(r * shape_.cols,
                                                  shape_.cols);
  }
  std::span<double> row_span(std::size_t r) {
    return std::span<double>(data_).subspan(r * shape_.cols, shape_.cols);
  }

  // Scalar value of a 1 x 1 tensor.
  double item() const;
  bool all_finite() const;
  void fill(double value);

  bool operator==(const Tensor&) const = default;

 private:
  Shape shape_{};
  std::vector<double> data_;
};

}  // namespace spot::autodiff
