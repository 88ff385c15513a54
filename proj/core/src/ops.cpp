#include "dispo/ops.hpp"

#include <cmath>
#include <cstring>

namespace dispo {
namespace ops {

namespace {

[[noreturn]] void shape_fail(const char* kind, const Shape& a, const Shape& b) {
  throw ShapeError(std::string(kind) + ": incompatible shapes " + shape_str(a) + " and " +
                   shape_str(b));
}

void check_finite(const char* kind, const Tensor& x) {
  for (double v : x.values()) {
    if (!std::isfinite(v)) {
      throw NumericError(std::string(kind) + ": non-finite input");
    }
  }
}

// rhs must equal lhs or be a trailing suffix of it; returns the broadcast
// period (rhs element count).
size_t broadcast_period(const char* kind, const Shape& lhs, const Shape& rhs) {
  if (rhs.size() > lhs.size()) shape_fail(kind, lhs, rhs);
  size_t off = lhs.size() - rhs.size();
  for (size_t i = 0; i < rhs.size(); ++i) {
    if (lhs[off + i] != rhs[i]) shape_fail(kind, lhs, rhs);
  }
  return static_cast<size_t>(numel(rhs));
}

template <typename Fwd, typename Pull>
Tensor binary_broadcast(const char* kind, const Tensor& a, const Tensor& b, Fwd fwd,
                        Pull pull) {
  size_t period = broadcast_period(kind, a.shape(), b.shape());
  Tensor out(a.shape());
  const double* pa = a.data();
  const double* pb = b.data();
  double* po = out.data();
  size_t n = static_cast<size_t>(a.size());
  for (size_t i = 0; i < n; ++i) po[i] = fwd(pa[i], pb[i % period]);
  if (OpRecorder::tracking({&a, &b})) {
    out.set_requires_grad(true);
    OpRecorder::record(kind, {&a, &b, &out},
                       [an = a.node(), bn = b.node(), on = out.node(), period,
                        pull](GradStore& gs) {
                         const std::vector<double>* dy = gs.find(on);
                         if (!dy) return;
                         pull(gs, an, bn, *dy, period);
                       });
  }
  return out;
}

// dfn receives (input value, output value) so rules like exp can reuse the
// forward result instead of recomputing it.
template <typename Fwd, typename Dfn>
Tensor unary_op(const char* kind, const Tensor& x, Fwd fwd, Dfn dfn) {
  Tensor out(x.shape());
  const double* px = x.data();
  double* po = out.data();
  size_t n = static_cast<size_t>(x.size());
  for (size_t i = 0; i < n; ++i) po[i] = fwd(px[i]);
  if (OpRecorder::tracking({&x})) {
    out.set_requires_grad(true);
    OpRecorder::record(kind, {&x, &out},
                       [xn = x.node(), on = out.node(), dfn](GradStore& gs) {
                         const std::vector<double>* dy = gs.find(on);
                         if (!dy) return;
                         std::vector<double>& dx = gs.acc(xn);
                         for (size_t i = 0; i < dy->size(); ++i) {
                           dx[i] += (*dy)[i] * dfn(xn->data[i], on->data[i]);
                         }
                       });
  }
  return out;
}

}  // namespace

double softplus_val(double x) {
  if (x > 35.0) return x;
  if (x < -35.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

double sigmoid_val(double x) {
  if (x >= 0.0) {
    double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  double e = std::exp(x);
  return e / (1.0 + e);
}

double phi1(double x) {
  if (std::fabs(x) < 1e-3) {
    return 1.0 + x * (0.5 + x * (1.0 / 6.0 + x * (1.0 / 24.0 + x / 120.0)));
  }
  return std::expm1(x) / x;
}

double phi1_prime(double x) {
  if (std::fabs(x) < 1e-3) {
    return 0.5 + x * (1.0 / 3.0 + x * (0.125 + x * (1.0 / 30.0 + x / 144.0)));
  }
  return (std::exp(x) * (x - 1.0) + 1.0) / (x * x);
}

Tensor add(const Tensor& a, const Tensor& b) {
  return binary_broadcast(
      "add", a, b, [](double x, double y) { return x + y; },
      [](GradStore& gs, TensorData* an, TensorData* bn, const std::vector<double>& dy,
         size_t period) {
        std::vector<double>& da = gs.acc(an);
        for (size_t i = 0; i < dy.size(); ++i) da[i] += dy[i];
        std::vector<double>& db = gs.acc(bn);
        for (size_t i = 0; i < dy.size(); ++i) db[i % period] += dy[i];
      });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary_broadcast(
      "sub", a, b, [](double x, double y) { return x - y; },
      [](GradStore& gs, TensorData* an, TensorData* bn, const std::vector<double>& dy,
         size_t period) {
        std::vector<double>& da = gs.acc(an);
        for (size_t i = 0; i < dy.size(); ++i) da[i] += dy[i];
        std::vector<double>& db = gs.acc(bn);
        for (size_t i = 0; i < dy.size(); ++i) db[i % period] -= dy[i];
      });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary_broadcast(
      "mul", a, b, [](double x, double y) { return x * y; },
      [](GradStore& gs, TensorData* an, TensorData* bn, const std::vector<double>& dy,
         size_t period) {
        std::vector<double>& da = gs.acc(an);
        for (size_t i = 0; i < dy.size(); ++i) da[i] += dy[i] * bn->data[i % period];
        std::vector<double>& db = gs.acc(bn);
        for (size_t i = 0; i < dy.size(); ++i) db[i % period] += dy[i] * an->data[i];
      });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.ndim() != 2 || b.ndim() != 2 || a.dim(1) != b.dim(0)) {
    shape_fail("matmul", a.shape(), b.shape());
  }
  int m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor out({m, n});
  const double* pa = a.data();
  const double* pb = b.data();
  double* po = out.data();
  for (int i = 0; i < m; ++i) {
    for (int p = 0; p < k; ++p) {
      double av = pa[i * k + p];
      const double* brow = pb + p * n;
      double* orow = po + i * n;
      for (int j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
  }
  if (OpRecorder::tracking({&a, &b})) {
    out.set_requires_grad(true);
    OpRecorder::record("matmul", {&a, &b, &out},
                       [an = a.node(), bn = b.node(), on = out.node(), m, k, n](GradStore& gs) {
                         const std::vector<double>* dyp = gs.find(on);
                         if (!dyp) return;
                         const double* dy = dyp->data();
                         std::vector<double>& da = gs.acc(an);
                         std::vector<double>& db = gs.acc(bn);
                         // dA = dY * B^T
                         for (int i = 0; i < m; ++i)
                           for (int p = 0; p < k; ++p) {
                             double s = 0.0;
                             for (int j = 0; j < n; ++j)
                               s += dy[i * n + j] * bn->data[p * n + j];
                             da[i * k + p] += s;
                           }
                         // dB = A^T * dY
                         for (int p = 0; p < k; ++p)
                           for (int i = 0; i < m; ++i) {
                             double av = an->data[i * k + p];
                             for (int j = 0; j < n; ++j)
                               db[p * n + j] += av * dy[i * n + j];
                           }
                       });
  }
  return out;
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& bias) {
  if (x.ndim() != 2 || w.ndim() != 2 || x.dim(1) != w.dim(1)) {
    shape_fail("linear", x.shape(), w.shape());
  }
  int l = x.dim(0), in = x.dim(1), out_dim = w.dim(0);
  if (bias.defined() && (bias.ndim() != 1 || bias.dim(0) != out_dim)) {
    shape_fail("linear(bias)", w.shape(), bias.shape());
  }
  Tensor out({l, out_dim});
  const double* px = x.data();
  const double* pw = w.data();
  double* po = out.data();
  for (int i = 0; i < l; ++i) {
    const double* xrow = px + i * in;
    double* orow = po + i * out_dim;
    if (bias.defined()) std::memcpy(orow, bias.data(), sizeof(double) * out_dim);
    for (int o = 0; o < out_dim; ++o) {
      const double* wrow = pw + o * in;
      double s = 0.0;
      for (int p = 0; p < in; ++p) s += xrow[p] * wrow[p];
      orow[o] += s;
    }
  }
  bool tracked = bias.defined() ? OpRecorder::tracking({&x, &w, &bias})
                                : OpRecorder::tracking({&x, &w});
  if (tracked) {
    out.set_requires_grad(true);
    TensorData* biasn = bias.defined() ? bias.node() : nullptr;
    auto pull = [xn = x.node(), wn = w.node(), biasn, on = out.node(), l, in,
                 out_dim](GradStore& gs) {
      const std::vector<double>* dyp = gs.find(on);
      if (!dyp) return;
      const double* dy = dyp->data();
      std::vector<double>& dx = gs.acc(xn);
      std::vector<double>& dw = gs.acc(wn);
      for (int i = 0; i < l; ++i) {
        const double* dyrow = dy + i * out_dim;
        const double* xrow = xn->data.data() + i * in;
        double* dxrow = dx.data() + i * in;
        for (int o = 0; o < out_dim; ++o) {
          double g = dyrow[o];
          if (g == 0.0) continue;
          const double* wrow = wn->data.data() + o * in;
          double* dwrow = dw.data() + o * in;
          for (int p = 0; p < in; ++p) {
            dxrow[p] += g * wrow[p];
            dwrow[p] += g * xrow[p];
          }
        }
      }
      if (biasn) {
        std::vector<double>& db = gs.acc(biasn);
        for (int i = 0; i < l; ++i)
          for (int o = 0; o < out_dim; ++o) db[o] += dy[i * out_dim + o];
      }
    };
    if (bias.defined()) {
      OpRecorder::record("linear", {&x, &w, &bias, &out}, std::move(pull));
    } else {
      OpRecorder::record("linear", {&x, &w, &out}, std::move(pull));
    }
  }
  return out;
}

Tensor exp(const Tensor& x) {
  check_finite("exp", x);
  return unary_op(
      "exp", x, [](double v) { return std::exp(v); },
      [](double, double y) { return y; });
}

Tensor log(const Tensor& x) {
  return unary_op(
      "log", x, [](double v) { return std::log(v); },
      [](double v, double) { return 1.0 / v; });
}

Tensor sqrt(const Tensor& x) {
  return unary_op(
      "sqrt", x, [](double v) { return std::sqrt(v); },
      [](double, double y) { return y > 0.0 ? 0.5 / y : 0.0; });
}

Tensor neg(const Tensor& x) {
  return unary_op(
      "neg", x, [](double v) { return -v; }, [](double, double) { return -1.0; });
}

Tensor softplus(const Tensor& x) {
  check_finite("softplus", x);
  return unary_op(
      "softplus", x, [](double v) { return softplus_val(v); },
      [](double v, double) { return sigmoid_val(v); });
}

Tensor sigmoid(const Tensor& x) {
  return unary_op(
      "sigmoid", x, [](double v) { return sigmoid_val(v); },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor silu(const Tensor& x) {
  return unary_op(
      "silu", x, [](double v) { return v * sigmoid_val(v); },
      [](double v, double) {
        double s = sigmoid_val(v);
        return s * (1.0 + v * (1.0 - s));
      });
}

Tensor layernorm(const Tensor& x, const Tensor& gain, const Tensor& bias) {
  constexpr double kEps = 1e-5;
  if (x.ndim() < 1) shape_fail("layernorm", x.shape(), gain.shape());
  int d = x.dim(x.ndim() - 1);
  if (gain.ndim() != 1 || gain.dim(0) != d) shape_fail("layernorm", x.shape(), gain.shape());
  if (bias.ndim() != 1 || bias.dim(0) != d) shape_fail("layernorm", x.shape(), bias.shape());
  int rows = static_cast<int>(x.size()) / d;
  Tensor out(x.shape());
  std::vector<double> xhat(static_cast<size_t>(x.size()));
  std::vector<double> inv_std(static_cast<size_t>(rows));
  const double* px = x.data();
  double* po = out.data();
  for (int r = 0; r < rows; ++r) {
    const double* row = px + r * d;
    double mean = 0.0;
    for (int j = 0; j < d; ++j) mean += row[j];
    mean /= d;
    double var = 0.0;
    for (int j = 0; j < d; ++j) {
      double c = row[j] - mean;
      var += c * c;
    }
    var /= d;
    double is = 1.0 / std::sqrt(var + kEps);
    inv_std[static_cast<size_t>(r)] = is;
    for (int j = 0; j < d; ++j) {
      double h = (row[j] - mean) * is;
      xhat[static_cast<size_t>(r * d + j)] = h;
      po[r * d + j] = gain.data()[j] * h + bias.data()[j];
    }
  }
  if (OpRecorder::tracking({&x, &gain, &bias})) {
    out.set_requires_grad(true);
    OpRecorder::record(
        "layernorm", {&x, &gain, &bias, &out},
        [xn = x.node(), gn = gain.node(), bn = bias.node(), on = out.node(), rows, d,
         xhat = std::move(xhat), inv_std = std::move(inv_std)](GradStore& gs) {
          const std::vector<double>* dyp = gs.find(on);
          if (!dyp) return;
          const double* dy = dyp->data();
          std::vector<double>& dx = gs.acc(xn);
          std::vector<double>& dg = gs.acc(gn);
          std::vector<double>& db = gs.acc(bn);
          for (int r = 0; r < rows; ++r) {
            const double* dyrow = dy + r * d;
            const double* hrow = xhat.data() + r * d;
            double m1 = 0.0, m2 = 0.0;
            for (int j = 0; j < d; ++j) {
              double gdy = gn->data[j] * dyrow[j];
              m1 += gdy;
              m2 += gdy * hrow[j];
              dg[j] += dyrow[j] * hrow[j];
              db[j] += dyrow[j];
            }
            m1 /= d;
            m2 /= d;
            double is = inv_std[static_cast<size_t>(r)];
            for (int j = 0; j < d; ++j) {
              double gdy = gn->data[j] * dyrow[j];
              dx[r * d + j] += (gdy - m1 - hrow[j] * m2) * is;
            }
          }
        });
  }
  return out;
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ShapeError("concat_rows: empty input");
  int d = parts[0].dim(parts[0].ndim() - 1);
  int rows = 0;
  for (const Tensor& p : parts) {
    if (p.ndim() != 2 || p.dim(1) != d) shape_fail("concat_rows", parts[0].shape(), p.shape());
    rows += p.dim(0);
  }
  Tensor out({rows, d});
  double* po = out.data();
  int at = 0;
  for (const Tensor& p : parts) {
    std::memcpy(po + at * d, p.data(), sizeof(double) * static_cast<size_t>(p.size()));
    at += p.dim(0);
  }
  std::vector<const Tensor*> pins;
  for (const Tensor& p : parts) pins.push_back(&p);
  if (OpRecorder::tracking(pins)) {
    out.set_requires_grad(true);
    std::vector<TensorData*> nodes;
    std::vector<int> row_counts;
    for (const Tensor& p : parts) {
      nodes.push_back(p.node());
      row_counts.push_back(p.dim(0));
    }
    pins.push_back(&out);
    OpRecorder::record("concat_rows", pins,
                       [nodes, row_counts, on = out.node(), d](GradStore& gs) {
                         const std::vector<double>* dyp = gs.find(on);
                         if (!dyp) return;
                         const double* dy = dyp->data();
                         int at = 0;
                         for (size_t p = 0; p < nodes.size(); ++p) {
                           std::vector<double>& dpart = gs.acc(nodes[p]);
                           int n = row_counts[p] * d;
                           for (int i = 0; i < n; ++i) dpart[i] += dy[at * d + i];
                           at += row_counts[p];
                         }
                       });
  }
  return out;
}

Tensor slice_rows(const Tensor& x, int begin, int end) {
  if (x.ndim() != 2 || begin < 0 || end > x.dim(0) || begin >= end) {
    throw ShapeError("slice_rows: range [" + std::to_string(begin) + "," +
                     std::to_string(end) + ") of " + shape_str(x.shape()));
  }
  int d = x.dim(1);
  Tensor out({end - begin, d});
  std::memcpy(out.data(), x.data() + begin * d,
              sizeof(double) * static_cast<size_t>(out.size()));
  if (OpRecorder::tracking({&x})) {
    out.set_requires_grad(true);
    OpRecorder::record("slice_rows", {&x, &out},
                       [xn = x.node(), on = out.node(), begin, d](GradStore& gs) {
                         const std::vector<double>* dyp = gs.find(on);
                         if (!dyp) return;
                         std::vector<double>& dx = gs.acc(xn);
                         for (size_t i = 0; i < dyp->size(); ++i) {
                           dx[static_cast<size_t>(begin * d) + i] += (*dyp)[i];
                         }
                       });
  }
  return out;
}

Tensor slice_cols(const Tensor& x, int begin, int end) {
  if (x.ndim() != 2 || begin < 0 || end > x.dim(1) || begin >= end) {
    throw ShapeError("slice_cols: range [" + std::to_string(begin) + "," +
                     std::to_string(end) + ") of " + shape_str(x.shape()));
  }
  int l = x.dim(0), d = x.dim(1), w = end - begin;
  Tensor out({l, w});
  for (int i = 0; i < l; ++i) {
    std::memcpy(out.data() + i * w, x.data() + i * d + begin,
                sizeof(double) * static_cast<size_t>(w));
  }
  if (OpRecorder::tracking({&x})) {
    out.set_requires_grad(true);
    OpRecorder::record("slice_cols", {&x, &out},
                       [xn = x.node(), on = out.node(), begin, l, d, w](GradStore& gs) {
                         const std::vector<double>* dyp = gs.find(on);
                         if (!dyp) return;
                         std::vector<double>& dx = gs.acc(xn);
                         for (int i = 0; i < l; ++i)
                           for (int j = 0; j < w; ++j)
                             dx[static_cast<size_t>(i * d + begin + j)] +=
                                 (*dyp)[static_cast<size_t>(i * w + j)];
                       });
  }
  return out;
}

Tensor sum_all(const Tensor& x) {
  double s = 0.0;
  for (double v : x.values()) s += v;
  Tensor out = Tensor::scalar(s);
  if (OpRecorder::tracking({&x})) {
    out.set_requires_grad(true);
    OpRecorder::record("sum_all", {&x, &out}, [xn = x.node(), on = out.node()](GradStore& gs) {
      const std::vector<double>* dyp = gs.find(on);
      if (!dyp) return;
      double g = (*dyp)[0];
      std::vector<double>& dx = gs.acc(xn);
      for (double& v : dx) v += g;
    });
  }
  return out;
}

Tensor mean_all(const Tensor& x) {
  double s = 0.0;
  for (double v : x.values()) s += v;
  double n = static_cast<double>(x.size());
  Tensor out = Tensor::scalar(s / n);
  if (OpRecorder::tracking({&x})) {
    out.set_requires_grad(true);
    OpRecorder::record("mean_all", {&x, &out},
                       [xn = x.node(), on = out.node(), n](GradStore& gs) {
                         const std::vector<double>* dyp = gs.find(on);
                         if (!dyp) return;
                         double g = (*dyp)[0] / n;
                         std::vector<double>& dx = gs.acc(xn);
                         for (double& v : dx) v += g;
                       });
  }
  return out;
}

Tensor mean_rows(const Tensor& x) {
  if (x.ndim() != 2) throw ShapeError("mean_rows: expected 2-D, got " + shape_str(x.shape()));
  int l = x.dim(0), d = x.dim(1);
  Tensor out({d});
  for (int i = 0; i < l; ++i)
    for (int j = 0; j < d; ++j) out.at(j) += x.at(i, j);
  for (int j = 0; j < d; ++j) out.at(j) /= l;
  if (OpRecorder::tracking({&x})) {
    out.set_requires_grad(true);
    OpRecorder::record("mean_rows", {&x, &out},
                       [xn = x.node(), on = out.node(), l, d](GradStore& gs) {
                         const std::vector<double>* dyp = gs.find(on);
                         if (!dyp) return;
                         std::vector<double>& dx = gs.acc(xn);
                         for (int i = 0; i < l; ++i)
                           for (int j = 0; j < d; ++j) dx[i * d + j] += (*dyp)[j] / l;
                       });
  }
  return out;
}

Tensor scale(const Tensor& x, double c) {
  Tensor out(x.shape());
  for (int64_t i = 0; i < x.size(); ++i) out.data()[i] = x.data()[i] * c;
  if (OpRecorder::tracking({&x})) {
    out.set_requires_grad(true);
    OpRecorder::record("scale", {&x, &out}, [xn = x.node(), on = out.node(), c](GradStore& gs) {
      const std::vector<double>* dyp = gs.find(on);
      if (!dyp) return;
      std::vector<double>& dx = gs.acc(xn);
      for (size_t i = 0; i < dyp->size(); ++i) dx[i] += (*dyp)[i] * c;
    });
  }
  return out;
}

Tensor broadcast_rows(const Tensor& x, int rows) {
  if (x.ndim() != 1) throw ShapeError("broadcast_rows: expected 1-D, got " + shape_str(x.shape()));
  int d = x.dim(0);
  Tensor out({rows, d});
  for (int i = 0; i < rows; ++i)
    std::memcpy(out.data() + i * d, x.data(), sizeof(double) * static_cast<size_t>(d));
  if (OpRecorder::tracking({&x})) {
    out.set_requires_grad(true);
    OpRecorder::record("broadcast_rows", {&x, &out},
                       [xn = x.node(), on = out.node(), rows, d](GradStore& gs) {
                         const std::vector<double>* dyp = gs.find(on);
                         if (!dyp) return;
                         std::vector<double>& dx = gs.acc(xn);
                         for (int i = 0; i < rows; ++i)
                           for (int j = 0; j < d; ++j) dx[j] += (*dyp)[i * d + j];
                       });
  }
  return out;
}

Tensor row_scale(const Tensor& x, const Tensor& r) {
  if (x.ndim() != 2 || r.ndim() != 1 || r.dim(0) != x.dim(0)) {
    shape_fail("row_scale", x.shape(), r.shape());
  }
  int l = x.dim(0), d = x.dim(1);
  Tensor out({l, d});
  for (int i = 0; i < l; ++i) {
    double rv = r.at(i);
    for (int j = 0; j < d; ++j) out.at(i, j) = x.at(i, j) * rv;
  }
  if (OpRecorder::tracking({&x, &r})) {
    out.set_requires_grad(true);
    OpRecorder::record("row_scale", {&x, &r, &out},
                       [xn = x.node(), rn = r.node(), on = out.node(), l, d](GradStore& gs) {
                         const std::vector<double>* dyp = gs.find(on);
                         if (!dyp) return;
                         const double* dy = dyp->data();
                         std::vector<double>& dx = gs.acc(xn);
                         std::vector<double>& dr = gs.acc(rn);
                         for (int i = 0; i < l; ++i) {
                           double rv = rn->data[static_cast<size_t>(i)];
                           double s = 0.0;
                           for (int j = 0; j < d; ++j) {
                             dx[i * d + j] += dy[i * d + j] * rv;
                             s += dy[i * d + j] * xn->data[static_cast<size_t>(i * d + j)];
                           }
                           dr[static_cast<size_t>(i)] += s;
                         }
                       });
  }
  return out;
}

Tensor causal_conv1d(const Tensor& x, const Tensor& w, const Tensor& bias) {
  if (x.ndim() != 2 || w.ndim() != 2 || w.dim(0) != x.dim(1)) {
    shape_fail("causal_conv1d", x.shape(), w.shape());
  }
  int l = x.dim(0), c = x.dim(1), k = w.dim(1);
  if (bias.ndim() != 1 || bias.dim(0) != c) shape_fail("causal_conv1d(bias)", x.shape(), bias.shape());
  Tensor out({l, c});
  for (int i = 0; i < l; ++i) {
    for (int ch = 0; ch < c; ++ch) {
      double s = bias.at(ch);
      for (int t = 0; t < k; ++t) {
        int src = i - k + 1 + t;
        if (src >= 0) s += w.at(ch, t) * x.at(src, ch);
      }
      out.at(i, ch) = s;
    }
  }
  if (OpRecorder::tracking({&x, &w, &bias})) {
    out.set_requires_grad(true);
    OpRecorder::record(
        "causal_conv1d", {&x, &w, &bias, &out},
        [xn = x.node(), wn = w.node(), bn = bias.node(), on = out.node(), l, c,
         k](GradStore& gs) {
          const std::vector<double>* dyp = gs.find(on);
          if (!dyp) return;
          const double* dy = dyp->data();
          std::vector<double>& dx = gs.acc(xn);
          std::vector<double>& dw = gs.acc(wn);
          std::vector<double>& db = gs.acc(bn);
          for (int i = 0; i < l; ++i) {
            for (int ch = 0; ch < c; ++ch) {
              double g = dy[i * c + ch];
              if (g == 0.0) continue;
              db[static_cast<size_t>(ch)] += g;
              for (int t = 0; t < k; ++t) {
                int src = i - k + 1 + t;
                if (src < 0) continue;
                dw[static_cast<size_t>(ch * k + t)] += g * xn->data[static_cast<size_t>(src * c + ch)];
                dx[static_cast<size_t>(src * c + ch)] += g * wn->data[static_cast<size_t>(ch * k + t)];
              }
            }
          }
        });
  }
  return out;
}

Tensor l2_dist(const Tensor& a, const Tensor& b) {
  if (!same_shape(a.shape(), b.shape())) shape_fail("l2_dist", a.shape(), b.shape());
  double s = 0.0;
  for (int64_t i = 0; i < a.size(); ++i) {
    double d = a.data()[i] - b.data()[i];
    s += d * d;
  }
  Tensor out = Tensor::scalar(std::sqrt(s));
  if (OpRecorder::tracking({&a, &b})) {
    out.set_requires_grad(true);
    OpRecorder::record("l2_dist", {&a, &b, &out},
                       [an = a.node(), bn = b.node(), on = out.node()](GradStore& gs) {
                         const std::vector<double>* dyp = gs.find(on);
                         if (!dyp) return;
                         double dist = on->data[0];
                         double g = (*dyp)[0] / std::max(dist, 1e-12);
                         std::vector<double>& da = gs.acc(an);
                         std::vector<double>& db = gs.acc(bn);
                         for (size_t i = 0; i < da.size(); ++i) {
                           double diff = (an->data[i] - bn->data[i]) * g;
                           da[i] += diff;
                           db[i] -= diff;
                         }
                       });
  }
  return out;
}

Tensor selective_scan(const Tensor& abar, const Tensor& bbar, const Tensor& c,
                      const Tensor& u) {
  if (abar.ndim() != 3 || !same_shape(abar.shape(), bbar.shape())) {
    shape_fail("selective_scan", abar.shape(), bbar.shape());
  }
  int l = abar.dim(0), d = abar.dim(1), n = abar.dim(2);
  if (c.ndim() != 2 || c.dim(0) != l || c.dim(1) != n) shape_fail("selective_scan(c)", abar.shape(), c.shape());
  if (u.ndim() != 2 || u.dim(0) != l || u.dim(1) != d) shape_fail("selective_scan(u)", abar.shape(), u.shape());

  Tensor out({l, d});
  // h holds the state after each position; needed by the backward pass.
  std::vector<double> h(static_cast<size_t>(l) * d * n, 0.0);
  const double* pa = abar.data();
  const double* pb = bbar.data();
  const double* pc = c.data();
  const double* pu = u.data();
  double* po = out.data();
  for (int i = 0; i < l; ++i) {
    const double* hprev = i > 0 ? h.data() + static_cast<size_t>(i - 1) * d * n : nullptr;
    double* hcur = h.data() + static_cast<size_t>(i) * d * n;
    const double* crow = pc + i * n;
    for (int ch = 0; ch < d; ++ch) {
      size_t base = (static_cast<size_t>(i) * d + ch) * n;
      double uv = pu[i * d + ch];
      double y = 0.0;
      for (int s = 0; s < n; ++s) {
        double hv = pb[base + s] * uv;
        if (hprev) hv += pa[base + s] * hprev[static_cast<size_t>(ch) * n + s];
        hcur[static_cast<size_t>(ch) * n + s] = hv;
        y += crow[s] * hv;
      }
      po[i * d + ch] = y;
    }
  }
  if (OpRecorder::tracking({&abar, &bbar, &c, &u})) {
    out.set_requires_grad(true);
    OpRecorder::record(
        "selective_scan", {&abar, &bbar, &c, &u, &out},
        [an = abar.node(), bn = bbar.node(), cn = c.node(), un = u.node(), on = out.node(),
         l, d, n, h = std::move(h)](GradStore& gs) {
          const std::vector<double>* dyp = gs.find(on);
          if (!dyp) return;
          const double* dy = dyp->data();
          std::vector<double>& da = gs.acc(an);
          std::vector<double>& db = gs.acc(bn);
          std::vector<double>& dc = gs.acc(cn);
          std::vector<double>& du = gs.acc(un);
          std::vector<double> dh(static_cast<size_t>(d) * n, 0.0);
          for (int i = l - 1; i >= 0; --i) {
            const double* hcur = h.data() + static_cast<size_t>(i) * d * n;
            const double* hprev =
                i > 0 ? h.data() + static_cast<size_t>(i - 1) * d * n : nullptr;
            for (int ch = 0; ch < d; ++ch) {
              size_t base = (static_cast<size_t>(i) * d + ch) * n;
              double g = dy[i * d + ch];
              double uv = un->data[static_cast<size_t>(i * d + ch)];
              double dus = 0.0;
              for (int s = 0; s < n; ++s) {
                size_t hs = static_cast<size_t>(ch) * n + s;
                double dhv = dh[hs] + g * cn->data[static_cast<size_t>(i * n + s)];
                dc[static_cast<size_t>(i * n + s)] += g * hcur[hs];
                db[base + s] += dhv * uv;
                dus += dhv * bn->data[base + s];
                if (hprev) {
                  da[base + s] += dhv * hprev[hs];
                  dh[hs] = dhv * an->data[base + s];
                } else {
                  dh[hs] = 0.0;
                }
              }
              du[static_cast<size_t>(i * d + ch)] += dus;
            }
          }
        });
  }
  return out;
}

std::pair<Tensor, Tensor> zoh_discretize(const Tensor& a_diag, const Tensor& b,
                                         const Tensor& delta) {
  if (a_diag.ndim() != 2) throw ShapeError("zoh_discretize: A must be [D x N], got " + shape_str(a_diag.shape()));
  int d = a_diag.dim(0), n = a_diag.dim(1);
  if (delta.ndim() != 2 || delta.dim(1) != d) shape_fail("zoh_discretize(delta)", a_diag.shape(), delta.shape());
  int l = delta.dim(0);
  if (b.ndim() != 2 || b.dim(0) != l || b.dim(1) != n) shape_fail("zoh_discretize(b)", delta.shape(), b.shape());
  for (double v : delta.values()) {
    if (!(v > 0.0)) throw NumericError("zoh_discretize: non-positive delta entry");
  }
  for (double v : a_diag.values()) {
    if (!(v < 0.0)) throw NumericError("zoh_discretize: A must be strictly negative");
  }

  Tensor abar({l, d, n});
  Tensor bbar({l, d, n});
  std::vector<double> exps(static_cast<size_t>(l) * d * n);
  const double* pa = a_diag.data();
  const double* pb = b.data();
  const double* pdt = delta.data();
  double* pabar = abar.data();
  double* pbbar = bbar.data();
  for (int i = 0; i < l; ++i) {
    for (int ch = 0; ch < d; ++ch) {
      double dt = pdt[i * d + ch];
      size_t base = (static_cast<size_t>(i) * d + ch) * n;
      for (int s = 0; s < n; ++s) {
        double x = dt * pa[ch * n + s];
        double e = std::exp(x);
        exps[base + s] = e;
        pabar[base + s] = e;
        pbbar[base + s] = phi1(x) * dt * pb[i * n + s];
      }
    }
  }
  if (OpRecorder::tracking({&a_diag, &b, &delta})) {
    abar.set_requires_grad(true);
    bbar.set_requires_grad(true);
    OpRecorder::record(
        "zoh_discretize", {&a_diag, &b, &delta, &abar, &bbar},
        [an = a_diag.node(), bn = b.node(), dn = delta.node(), abn = abar.node(),
         bbn = bbar.node(), l, d, n, exps = std::move(exps)](GradStore& gs) {
          const std::vector<double>* dab = gs.find(abn);
          const std::vector<double>* dbb = gs.find(bbn);
          if (!dab && !dbb) return;
          std::vector<double>& da = gs.acc(an);
          std::vector<double>& db = gs.acc(bn);
          std::vector<double>& ddt = gs.acc(dn);
          for (int i = 0; i < l; ++i) {
            for (int ch = 0; ch < d; ++ch) {
              double dt = dn->data[static_cast<size_t>(i * d + ch)];
              size_t base = (static_cast<size_t>(i) * d + ch) * n;
              double ddt_acc = 0.0;
              for (int s = 0; s < n; ++s) {
                double a = an->data[static_cast<size_t>(ch * n + s)];
                double bv = bn->data[static_cast<size_t>(i * n + s)];
                double x = dt * a;
                double e = exps[base + s];
                if (dab) {
                  double g = (*dab)[base + s];
                  if (g != 0.0) {
                    ddt_acc += g * e * a;
                    da[static_cast<size_t>(ch * n + s)] += g * e * dt;
                  }
                }
                if (dbb) {
                  double g = (*dbb)[base + s];
                  if (g != 0.0) {
                    double p = phi1(x);
                    double pp = phi1_prime(x);
                    // Bbar = phi1(dt*a) * dt * b
                    ddt_acc += g * bv * (pp * a * dt + p);
                    da[static_cast<size_t>(ch * n + s)] += g * bv * pp * dt * dt;
                    db[static_cast<size_t>(i * n + s)] += g * p * dt;
                  }
                }
              }
              ddt[static_cast<size_t>(i * d + ch)] += ddt_acc;
            }
          }
        });
  }
  return {abar, bbar};
}

}  // namespace ops
}  // namespace dispo
