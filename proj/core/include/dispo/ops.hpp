#pragma once

#include <utility>
#include <vector>

#include "dispo/tape.hpp"
#include "dispo/tensor.hpp"

namespace dispo {
namespace ops {

// Elementwise binary ops. The right operand may be a trailing-suffix shape of
// the left one (leading-dimension batch broadcast, e.g. [L x D] + [D]); any
// other mismatch is a ShapeError.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);

Tensor matmul(const Tensor& a, const Tensor& b);  // [m x k] * [k x n]

// y = x * W^T + bias, the dense-layer workhorse. x: [L x I], w: [O x I],
// bias: [O] or undefined.
Tensor linear(const Tensor& x, const Tensor& w, const Tensor& bias);

Tensor exp(const Tensor& x);
Tensor log(const Tensor& x);
Tensor sqrt(const Tensor& x);
Tensor neg(const Tensor& x);
Tensor softplus(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor silu(const Tensor& x);

// Normalizes over the last dimension with epsilon 1e-5.
Tensor layernorm(const Tensor& x, const Tensor& gain, const Tensor& bias);

Tensor concat_rows(const std::vector<Tensor>& parts);
Tensor slice_rows(const Tensor& x, int begin, int end);  // rows [begin, end)
Tensor slice_cols(const Tensor& x, int begin, int end);  // columns [begin, end)

Tensor sum_all(const Tensor& x);   // -> [1]
Tensor mean_all(const Tensor& x);  // -> [1]
Tensor mean_rows(const Tensor& x);  // [L x D] -> [D]

Tensor scale(const Tensor& x, double c);
Tensor broadcast_rows(const Tensor& x, int rows);    // [D] -> [rows x D]
Tensor row_scale(const Tensor& x, const Tensor& r);  // diag(r) * x, r: [L]

// Depthwise causal 1-D convolution: y[l,c] = b[c] + sum_k w[c,k] x[l-K+1+k, c]
// with zero padding on the left, so position l never sees positions > l.
Tensor causal_conv1d(const Tensor& x, const Tensor& w, const Tensor& bias);

Tensor l2_dist(const Tensor& a, const Tensor& b);  // Euclidean distance -> [1]

// Sequential selective-scan recurrence over L positions with per-position
// diagonal transition. abar, bbar: [L x D x N], c: [L x N], u: [L x D].
// h_l = abar_l (.) h_{l-1} + bbar_l * u_l,   y_l[d] = <c_l, h_l[d,:]>.
Tensor selective_scan(const Tensor& abar, const Tensor& bbar, const Tensor& c,
                      const Tensor& u);

// Exact zero-order-hold discretization of a diagonal continuous system.
// a_diag: [D x N] (strictly negative), b: [L x N], delta: [L x D] (strictly
// positive). Returns Abar = exp(delta*a) and Bbar = (delta a)^-1 (exp(delta a)
// - 1) * delta * b, both [L x D x N].
std::pair<Tensor, Tensor> zoh_discretize(const Tensor& a_diag, const Tensor& b,
                                         const Tensor& delta);

// Numeric kernels shared with backward rules and tests.
double softplus_val(double x);
double sigmoid_val(double x);
double phi1(double x);        // (e^x - 1) / x, series near 0
double phi1_prime(double x);  // d/dx phi1

}  // namespace ops
}  // namespace dispo
