#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace dispo {

using Shape = std::vector<int>;

int64_t numel(const Shape& shape);
std::string shape_str(const Shape& shape);
bool same_shape(const Shape& a, const Shape& b);

// Reference-counted dense tensor of doubles. Copying a Tensor shares storage;
// clone() makes an independent copy. Gradients live in a buffer of the same
// shape and accumulate across backward calls until zero_grad().
struct TensorData {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until backward populates it
  bool requires_grad = false;
};

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, bool requires_grad = false);
  Tensor(Shape shape, std::vector<double> values, bool requires_grad = false);

  static Tensor zeros(Shape shape);
  static Tensor full(Shape shape, double value);
  static Tensor scalar(double value);

  bool defined() const { return d_ != nullptr; }
  const Shape& shape() const { return d_->shape; }
  int ndim() const { return static_cast<int>(d_->shape.size()); }
  int dim(int i) const { return d_->shape[static_cast<size_t>(i)]; }
  int64_t size() const { return static_cast<int64_t>(d_->data.size()); }

  double* data() { return d_->data.data(); }
  const double* data() const { return d_->data.data(); }
  std::vector<double>& values() { return d_->data; }
  const std::vector<double>& values() const { return d_->data; }

  double item() const;  // requires size() == 1

  // Row-major indexing helpers for the ranks used in this project.
  double& at(int i) { return d_->data[static_cast<size_t>(i)]; }
  double at(int i) const { return d_->data[static_cast<size_t>(i)]; }
  double& at(int i, int j) { return d_->data[static_cast<size_t>(i) * dim(1) + j]; }
  double at(int i, int j) const { return d_->data[static_cast<size_t>(i) * dim(1) + j]; }
  double& at(int i, int j, int k) {
    return d_->data[(static_cast<size_t>(i) * dim(1) + j) * dim(2) + k];
  }
  double at(int i, int j, int k) const {
    return d_->data[(static_cast<size_t>(i) * dim(1) + j) * dim(2) + k];
  }

  bool requires_grad() const { return d_->requires_grad; }
  Tensor& set_requires_grad(bool v) {
    d_->requires_grad = v;
    return *this;
  }

  bool has_grad() const { return d_ && !d_->grad.empty(); }
  std::vector<double>& grad();              // allocates zeros on first access
  const std::vector<double>& grad() const;  // throws if absent
  void zero_grad();

  Tensor clone() const;

  TensorData* node() const { return d_.get(); }
  const std::shared_ptr<TensorData>& handle() const { return d_; }

 private:
  std::shared_ptr<TensorData> d_;
};

// Error types. ShapeError carries the op kind and the offending shapes;
// NumericError marks non-finite values and other numeric contract breaks.
struct ShapeError : std::runtime_error {
  explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace dispo
