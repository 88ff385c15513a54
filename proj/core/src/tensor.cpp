#include "dispo/tensor.hpp"

#include <sstream>
#include <stdexcept>

namespace dispo {

int64_t numel(const Shape& shape) {
  int64_t n = 1;
  for (int d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) os << "x";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

bool same_shape(const Shape& a, const Shape& b) { return a == b; }

Tensor::Tensor(Shape shape, bool requires_grad) : d_(std::make_shared<TensorData>()) {
  for (int d : shape) {
    if (d <= 0) throw ShapeError("tensor: non-positive dimension in " + shape_str(shape));
  }
  d_->shape = std::move(shape);
  d_->data.assign(static_cast<size_t>(numel(d_->shape)), 0.0);
  d_->requires_grad = requires_grad;
}

Tensor::Tensor(Shape shape, std::vector<double> values, bool requires_grad)
    : Tensor(std::move(shape), requires_grad) {
  if (values.size() != d_->data.size()) {
    throw ShapeError("tensor: " + std::to_string(values.size()) + " values for shape " +
                     shape_str(d_->shape));
  }
  d_->data = std::move(values);
}

Tensor Tensor::zeros(Shape shape) { return Tensor(std::move(shape)); }

Tensor Tensor::full(Shape shape, double value) {
  Tensor t(std::move(shape));
  for (auto& v : t.d_->data) v = value;
  return t;
}

Tensor Tensor::scalar(double value) {
  return Tensor(Shape{1}, std::vector<double>{value});
}

double Tensor::item() const {
  if (size() != 1) throw ShapeError("item: tensor has shape " + shape_str(shape()));
  return d_->data[0];
}

std::vector<double>& Tensor::grad() {
  if (d_->grad.empty()) d_->grad.assign(d_->data.size(), 0.0);
  return d_->grad;
}

const std::vector<double>& Tensor::grad() const {
  if (d_->grad.empty()) throw std::runtime_error("grad: not populated");
  return d_->grad;
}

void Tensor::zero_grad() { d_->grad.assign(d_->data.size(), 0.0); }

Tensor Tensor::clone() const {
  Tensor t;
  t.d_ = std::make_shared<TensorData>(*d_);
  return t;
}

}  // namespace dispo
