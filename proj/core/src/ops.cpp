#include "rieif/ndgrad/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rieif/error.hpp"

namespace rieif::nd {
namespace {

using RMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CMap = Eigen::Map<const RMat>;
using MMap = Eigen::Map<RMat>;

[[noreturn]] void shape_fail(const char* op, const Shape& a, const Shape& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + shape_str(a) + " and " + shape_str(b));
}

[[noreturn]] void shape_fail(const char* op, const Shape& a, const std::string& why) {
  throw ShapeError(std::string(op) + ": shape " + shape_str(a) + " " + why);
}

bool is_suffix(const Shape& small, const Shape& big) {
  if (small.size() > big.size()) return false;
  return std::equal(small.rbegin(), small.rend(), big.rbegin());
}

Shape broadcast_shape(const char* op, const Shape& a, const Shape& b) {
  if (a == b) return a;
  if (is_suffix(b, a)) return a;
  if (is_suffix(a, b)) return b;
  shape_fail(op, a, b);
}

bool any_grad(const Var& a) { return a.requires_grad(); }
bool any_grad(const Var& a, const Var& b) { return a.requires_grad() || b.requires_grad(); }

// Visits out[i] with operand indices for suffix broadcasting: the smaller operand repeats
// every `size` elements.
template <class F>
void for_each_broadcast(std::size_t n, std::size_t na, std::size_t nb, F&& f) {
  if (na == n && nb == n) {
    for (std::size_t i = 0; i < n; ++i) f(i, i, i);
  } else if (na == n) {
    for (std::size_t base = 0; base < n; base += nb)
      for (std::size_t j = 0; j < nb; ++j) f(base + j, base + j, j);
  } else {
    for (std::size_t base = 0; base < n; base += na)
      for (std::size_t j = 0; j < na; ++j) f(base + j, j, base + j);
  }
}

template <class Fwd, class Bwd>
Var unary(const Var& a, Fwd fwd, Bwd bwd) {
  Tape& t = a.tape();
  const Array& x = a.value();
  Array y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = fwd(x[i]);
  const std::size_t ia = a.id();
  return t.record(std::move(y), any_grad(a), [ia, bwd](Tape& tp, const Array& g) {
    const Array& xv = tp.value(ia);
    Array& ga = tp.grad_acc(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bwd(xv[i]);
  });
}

struct AxisSplit {
  std::size_t outer = 1;
  std::size_t extent = 1;
  std::size_t inner = 1;
};

AxisSplit split_axis(const Shape& s, std::size_t axis) {
  AxisSplit r;
  for (std::size_t i = 0; i < axis; ++i) r.outer *= s[i];
  r.extent = s[axis];
  for (std::size_t i = axis + 1; i < s.size(); ++i) r.inner *= s[i];
  return r;
}

}  // namespace

double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Var add(const Var& a, const Var& b) {
  const Shape out = broadcast_shape("add", a.shape(), b.shape());
  const Array& x = a.value();
  const Array& y = b.value();
  Array z(out);
  for_each_broadcast(z.size(), x.size(), y.size(),
                     [&](std::size_t i, std::size_t ia, std::size_t ib) { z[i] = x[ia] + y[ib]; });
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape().record(std::move(z), any_grad(a, b), [ia, ib](Tape& t, const Array& g) {
    const std::size_t na = t.value(ia).size(), nb = t.value(ib).size();
    Array* ga = t.requires_grad(ia) ? &t.grad_acc(ia) : nullptr;
    Array* gb = t.requires_grad(ib) ? &t.grad_acc(ib) : nullptr;
    for_each_broadcast(g.size(), na, nb, [&](std::size_t i, std::size_t ja, std::size_t jb) {
      if (ga) (*ga)[ja] += g[i];
      if (gb) (*gb)[jb] += g[i];
    });
  });
}

Var sub(const Var& a, const Var& b) {
  const Shape out = broadcast_shape("sub", a.shape(), b.shape());
  const Array& x = a.value();
  const Array& y = b.value();
  Array z(out);
  for_each_broadcast(z.size(), x.size(), y.size(),
                     [&](std::size_t i, std::size_t ia, std::size_t ib) { z[i] = x[ia] - y[ib]; });
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape().record(std::move(z), any_grad(a, b), [ia, ib](Tape& t, const Array& g) {
    const std::size_t na = t.value(ia).size(), nb = t.value(ib).size();
    Array* ga = t.requires_grad(ia) ? &t.grad_acc(ia) : nullptr;
    Array* gb = t.requires_grad(ib) ? &t.grad_acc(ib) : nullptr;
    for_each_broadcast(g.size(), na, nb, [&](std::size_t i, std::size_t ja, std::size_t jb) {
      if (ga) (*ga)[ja] += g[i];
      if (gb) (*gb)[jb] -= g[i];
    });
  });
}

Var mul(const Var& a, const Var& b) {
  const Shape out = broadcast_shape("mul", a.shape(), b.shape());
  const Array& x = a.value();
  const Array& y = b.value();
  Array z(out);
  for_each_broadcast(z.size(), x.size(), y.size(),
                     [&](std::size_t i, std::size_t ia, std::size_t ib) { z[i] = x[ia] * y[ib]; });
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape().record(std::move(z), any_grad(a, b), [ia, ib](Tape& t, const Array& g) {
    const Array& xv = t.value(ia);
    const Array& yv = t.value(ib);
    Array* ga = t.requires_grad(ia) ? &t.grad_acc(ia) : nullptr;
    Array* gb = t.requires_grad(ib) ? &t.grad_acc(ib) : nullptr;
    for_each_broadcast(g.size(), xv.size(), yv.size(), [&](std::size_t i, std::size_t ja, std::size_t jb) {
      if (ga) (*ga)[ja] += g[i] * yv[jb];
      if (gb) (*gb)[jb] += g[i] * xv[ja];
    });
  });
}

Var div(const Var& a, const Var& b, double eps) {
  const Shape out = broadcast_shape("div", a.shape(), b.shape());
  const Array& x = a.value();
  const Array& y = b.value();
  Array z(out);
  for_each_broadcast(z.size(), x.size(), y.size(),
                     [&](std::size_t i, std::size_t ia, std::size_t ib) { z[i] = x[ia] / (y[ib] + eps); });
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape().record(std::move(z), any_grad(a, b), [ia, ib, eps](Tape& t, const Array& g) {
    const Array& xv = t.value(ia);
    const Array& yv = t.value(ib);
    Array* ga = t.requires_grad(ia) ? &t.grad_acc(ia) : nullptr;
    Array* gb = t.requires_grad(ib) ? &t.grad_acc(ib) : nullptr;
    for_each_broadcast(g.size(), xv.size(), yv.size(), [&](std::size_t i, std::size_t ja, std::size_t jb) {
      const double d = yv[jb] + eps;
      if (ga) (*ga)[ja] += g[i] / d;
      if (gb) (*gb)[jb] -= g[i] * xv[ja] / (d * d);
    });
  });
}

Var scale(const Var& a, double c) {
  return unary(a, [c](double x) { return c * x; }, [c](double) { return c; });
}

Var add_scalar(const Var& a, double c) {
  return unary(a, [c](double x) { return x + c; }, [](double) { return 1.0; });
}

Var softplus(const Var& a) {
  return unary(a, [](double x) { return softplus(x); }, [](double x) { return sigmoid(x); });
}

Var sigmoid(const Var& a) {
  return unary(a, [](double x) { return sigmoid(x); },
               [](double x) {
                 const double s = sigmoid(x);
                 return s * (1.0 - s);
               });
}

Var tanh(const Var& a) {
  return unary(a, [](double x) { return std::tanh(x); },
               [](double x) {
                 const double th = std::tanh(x);
                 return 1.0 - th * th;
               });
}

Var square(const Var& a) {
  return unary(a, [](double x) { return x * x; }, [](double x) { return 2.0 * x; });
}

Var sqrt(const Var& a) {
  return unary(a, [](double x) { return std::sqrt(x); }, [](double x) { return 0.5 / std::sqrt(x); });
}

Var sum(const Var& a) {
  double s = 0.0;
  for (double v : a.value().data()) s += v;
  const std::size_t ia = a.id();
  return a.tape().record(Array::scalar(s), any_grad(a), [ia](Tape& t, const Array& g) {
    Array& ga = t.grad_acc(ia);
    const double gv = g[0];
    for (double& v : ga.storage()) v += gv;
  });
}

Var mean(const Var& a) {
  const double n = static_cast<double>(a.value().size());
  double s = 0.0;
  for (double v : a.value().data()) s += v;
  const std::size_t ia = a.id();
  return a.tape().record(Array::scalar(s / n), any_grad(a), [ia, n](Tape& t, const Array& g) {
    Array& ga = t.grad_acc(ia);
    const double gv = g[0] / n;
    for (double& v : ga.storage()) v += gv;
  });
}

Var matmul(const Var& a, const Var& b) {
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  if (sa.size() != 2 || sb.size() != 2 || sa[1] != sb[0]) shape_fail("matmul", sa, sb);
  const std::size_t m = sa[0], k = sa[1], n = sb[1];
  Array c(Shape{m, n});
  MMap(c.data().data(), m, n).noalias() = CMap(a.value().data().data(), m, k) * CMap(b.value().data().data(), k, n);
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape().record(std::move(c), any_grad(a, b), [ia, ib, m, k, n](Tape& t, const Array& g) {
    CMap G(g.data().data(), m, n);
    if (t.requires_grad(ia)) {
      MMap(t.grad_acc(ia).data().data(), m, k).noalias() += G * CMap(t.value(ib).data().data(), k, n).transpose();
    }
    if (t.requires_grad(ib)) {
      MMap(t.grad_acc(ib).data().data(), k, n).noalias() += CMap(t.value(ia).data().data(), m, k).transpose() * G;
    }
  });
}

Var bmm(const Var& a, const Var& b, bool transpose_b) {
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  if (sa.size() != 3 || sb.size() != 3 || sa[0] != sb[0]) shape_fail("bmm", sa, sb);
  const std::size_t groups = sa[0], m = sa[1], k = sa[2];
  const std::size_t n = transpose_b ? sb[1] : sb[2];
  if ((transpose_b ? sb[2] : sb[1]) != k) shape_fail("bmm", sa, sb);
  Array c(Shape{groups, m, n});
  const double* pa = a.value().data().data();
  const double* pb = b.value().data().data();
  double* pc = c.data().data();
  for (std::size_t gi = 0; gi < groups; ++gi) {
    CMap A(pa + gi * m * k, m, k);
    MMap C(pc + gi * m * n, m, n);
    if (transpose_b) {
      C.noalias() = A * CMap(pb + gi * n * k, n, k).transpose();
    } else {
      C.noalias() = A * CMap(pb + gi * k * n, k, n);
    }
  }
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape().record(std::move(c), any_grad(a, b),
                         [ia, ib, groups, m, k, n, transpose_b](Tape& t, const Array& g) {
    const double* pa = t.value(ia).data().data();
    const double* pb = t.value(ib).data().data();
    double* ga = t.requires_grad(ia) ? t.grad_acc(ia).data().data() : nullptr;
    double* gb = t.requires_grad(ib) ? t.grad_acc(ib).data().data() : nullptr;
    for (std::size_t gi = 0; gi < groups; ++gi) {
      CMap G(g.data().data() + gi * m * n, m, n);
      CMap A(pa + gi * m * k, m, k);
      if (transpose_b) {
        CMap B(pb + gi * n * k, n, k);  // C = A B^T
        if (ga) MMap(ga + gi * m * k, m, k).noalias() += G * B;
        if (gb) MMap(gb + gi * n * k, n, k).noalias() += G.transpose() * A;
      } else {
        CMap B(pb + gi * k * n, k, n);
        if (ga) MMap(ga + gi * m * k, m, k).noalias() += G * B.transpose();
        if (gb) MMap(gb + gi * k * n, k, n).noalias() += A.transpose() * G;
      }
    }
  });
}

Var concat(std::span<const Var> parts, std::size_t axis) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  Shape out = parts[0].shape();
  if (axis >= out.size()) shape_fail("concat", out, "has no axis " + std::to_string(axis));
  std::size_t total = 0;
  for (const Var& p : parts) {
    Shape s = p.shape();
    if (s.size() != out.size()) shape_fail("concat", out, s);
    total += s[axis];
    s[axis] = out[axis];
    if (s != out) shape_fail("concat", out, p.shape());
  }
  out[axis] = total;
  Array z(out);
  const AxisSplit whole = split_axis(out, axis);
  std::vector<std::size_t> ids, offsets, extents;
  bool needs = false;
  std::size_t offset = 0;
  for (const Var& p : parts) {
    const std::size_t e = p.shape()[axis];
    const double* src = p.value().data().data();
    for (std::size_t o = 0; o < whole.outer; ++o) {
      std::copy_n(src + o * e * whole.inner, e * whole.inner,
                  z.data().data() + (o * whole.extent + offset) * whole.inner);
    }
    ids.push_back(p.id());
    offsets.push_back(offset);
    extents.push_back(e);
    needs = needs || p.requires_grad();
    offset += e;
  }
  return parts[0].tape().record(std::move(z), needs, [ids, offsets, extents, whole](Tape& t, const Array& g) {
    for (std::size_t pi = 0; pi < ids.size(); ++pi) {
      if (!t.requires_grad(ids[pi])) continue;
      double* dst = t.grad_acc(ids[pi]).data().data();
      const std::size_t e = extents[pi];
      for (std::size_t o = 0; o < whole.outer; ++o) {
        const double* src = g.data().data() + (o * whole.extent + offsets[pi]) * whole.inner;
        double* d = dst + o * e * whole.inner;
        for (std::size_t j = 0; j < e * whole.inner; ++j) d[j] += src[j];
      }
    }
  });
}

Var slice(const Var& a, std::size_t axis, std::size_t begin, std::size_t end) {
  const Shape& s = a.shape();
  if (axis >= s.size() || begin > end || end > s[axis]) {
    shape_fail("slice", s, "cannot take [" + std::to_string(begin) + "," + std::to_string(end) +
                               ") on axis " + std::to_string(axis));
  }
  const AxisSplit sp = split_axis(s, axis);
  Shape out = s;
  out[axis] = end - begin;
  Array z(out);
  const std::size_t e = end - begin;
  const double* src = a.value().data().data();
  for (std::size_t o = 0; o < sp.outer; ++o) {
    std::copy_n(src + (o * sp.extent + begin) * sp.inner, e * sp.inner, z.data().data() + o * e * sp.inner);
  }
  const std::size_t ia = a.id();
  return a.tape().record(std::move(z), any_grad(a), [ia, sp, begin, e](Tape& t, const Array& g) {
    double* dst = t.grad_acc(ia).data().data();
    for (std::size_t o = 0; o < sp.outer; ++o) {
      const double* gs = g.data().data() + o * e * sp.inner;
      double* d = dst + (o * sp.extent + begin) * sp.inner;
      for (std::size_t j = 0; j < e * sp.inner; ++j) d[j] += gs[j];
    }
  });
}

Var reshape(const Var& a, Shape shape) {
  if (shape_size(shape) != a.value().size()) shape_fail("reshape", a.shape(), shape);
  const std::size_t ia = a.id();
  return a.tape().record(a.value().reshaped(std::move(shape)), any_grad(a), [ia](Tape& t, const Array& g) {
    Array& ga = t.grad_acc(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
  });
}

Var flatten(const Var& a, std::size_t from_axis) {
  const Shape& s = a.shape();
  if (from_axis > s.size()) shape_fail("flatten", s, "has no axis " + std::to_string(from_axis));
  Shape out(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(from_axis));
  std::size_t tail = 1;
  for (std::size_t i = from_axis; i < s.size(); ++i) tail *= s[i];
  out.push_back(tail);
  return reshape(a, std::move(out));
}

Var swap_axes_12(const Var& a) {
  const Shape& s = a.shape();
  if (s.size() != 4) shape_fail("swap_axes_12", s, "is not rank 4");
  const std::size_t A = s[0], B = s[1], C = s[2], D = s[3];
  Array z(Shape{A, C, B, D});
  const double* x = a.value().data().data();
  double* y = z.data().data();
  for (std::size_t i = 0; i < A; ++i)
    for (std::size_t j = 0; j < B; ++j)
      for (std::size_t k = 0; k < C; ++k)
        std::copy_n(x + ((i * B + j) * C + k) * D, D, y + ((i * C + k) * B + j) * D);
  const std::size_t ia = a.id();
  return a.tape().record(std::move(z), any_grad(a), [ia, A, B, C, D](Tape& t, const Array& g) {
    double* gx = t.grad_acc(ia).data().data();
    const double* gy = g.data().data();
    for (std::size_t i = 0; i < A; ++i)
      for (std::size_t j = 0; j < B; ++j)
        for (std::size_t k = 0; k < C; ++k) {
          const double* src = gy + ((i * C + k) * B + j) * D;
          double* dst = gx + ((i * B + j) * C + k) * D;
          for (std::size_t d = 0; d < D; ++d) dst[d] += src[d];
        }
  });
}

Var gather_rows(const Var& a, std::vector<std::size_t> rows) {
  const Shape& s = a.shape();
  if (s.empty()) shape_fail("gather_rows", s, "is a scalar");
  const std::size_t width = s[0] ? a.value().size() / s[0] : 0;
  Shape out = s;
  out[0] = rows.size();
  Array z(out);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= s[0]) shape_fail("gather_rows", s, "has no row " + std::to_string(rows[r]));
    std::copy_n(a.value().data().data() + rows[r] * width, width, z.data().data() + r * width);
  }
  const std::size_t ia = a.id();
  return a.tape().record(std::move(z), any_grad(a), [ia, width, rows = std::move(rows)](Tape& t, const Array& g) {
    double* dst = t.grad_acc(ia).data().data();
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const double* src = g.data().data() + r * width;
      double* d = dst + rows[r] * width;
      for (std::size_t j = 0; j < width; ++j) d[j] += src[j];
    }
  });
}

Var repeat_rows(const Var& a, std::size_t times) {
  const Shape& s = a.shape();
  if (s.empty()) shape_fail("repeat_rows", s, "is a scalar");
  const std::size_t rows = s[0];
  const std::size_t width = rows ? a.value().size() / rows : 0;
  Shape out = s;
  out[0] = rows * times;
  Array z(out);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t k = 0; k < times; ++k)
      std::copy_n(a.value().data().data() + r * width, width, z.data().data() + (r * times + k) * width);
  const std::size_t ia = a.id();
  return a.tape().record(std::move(z), any_grad(a), [ia, rows, width, times](Tape& t, const Array& g) {
    double* dst = t.grad_acc(ia).data().data();
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t k = 0; k < times; ++k) {
        const double* src = g.data().data() + (r * times + k) * width;
        for (std::size_t j = 0; j < width; ++j) dst[r * width + j] += src[j];
      }
  });
}

Var l2_normalize(const Var& a, double eps) {
  const Shape& s = a.shape();
  if (s.empty()) shape_fail("l2_normalize", s, "is a scalar");
  const std::size_t d = s.back();
  const std::size_t rows = d ? a.value().size() / d : 0;
  Array z(s);
  std::vector<double> norms(rows);
  const double* x = a.value().data().data();
  for (std::size_t r = 0; r < rows; ++r) {
    double ss = 0.0;
    for (std::size_t j = 0; j < d; ++j) ss += x[r * d + j] * x[r * d + j];
    norms[r] = std::sqrt(ss);
    const double inv = 1.0 / (norms[r] + eps);
    for (std::size_t j = 0; j < d; ++j) z[r * d + j] = x[r * d + j] * inv;
  }
  const std::size_t ia = a.id();
  return a.tape().record(std::move(z), any_grad(a),
                         [ia, d, rows, eps, norms = std::move(norms)](Tape& t, const Array& g) {
    const double* xv = t.value(ia).data().data();
    double* gx = t.grad_acc(ia).data().data();
    for (std::size_t r = 0; r < rows; ++r) {
      const double n = norms[r];
      const double den = n + eps;
      double gdotx = 0.0;
      for (std::size_t j = 0; j < d; ++j) gdotx += g[r * d + j] * xv[r * d + j];
      const double coef = n > 0.0 ? gdotx / (den * den * n) : 0.0;
      for (std::size_t j = 0; j < d; ++j) gx[r * d + j] += g[r * d + j] / den - xv[r * d + j] * coef;
    }
  });
}

Var masked_softmax(const Var& scores, std::shared_ptr<const SoftmaxMask> mask) {
  const Shape& s = scores.shape();
  if (!mask || s.size() < 2 || s[s.size() - 2] != mask->rows || s.back() != mask->cols ||
      mask->allowed.size() != mask->rows * mask->cols) {
    throw ShapeError("masked_softmax: scores " + shape_str(s) + " vs mask [" +
                     std::to_string(mask ? mask->rows : 0) + "," + std::to_string(mask ? mask->cols : 0) + "]");
  }
  const std::size_t m = mask->rows, n = mask->cols;
  const std::size_t total_rows = n ? scores.value().size() / n : 0;
  const double* x = scores.value().data().data();
  Array y(s, 0.0);
  for (std::size_t r = 0; r < total_rows; ++r) {
    const std::uint8_t* allow = mask->allowed.data() + (r % m) * n;
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j)
      if (allow[j]) mx = std::max(mx, x[r * n + j]);
    if (mx == -std::numeric_limits<double>::infinity()) continue;
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (!allow[j]) continue;
      const double e = std::exp(x[r * n + j] - mx);
      y[r * n + j] = e;
      z += e;
    }
    for (std::size_t j = 0; j < n; ++j) y[r * n + j] /= z;
  }
  const std::size_t ia = scores.id();
  Tape& tp = scores.tape();
  const std::size_t io = tp.size();  // id this node will receive
  return tp.record(std::move(y), any_grad(scores), [ia, io, n, total_rows](Tape& t, const Array& g) {
    const Array& yv = t.value(io);
    double* gx = t.grad_acc(ia).data().data();
    for (std::size_t r = 0; r < total_rows; ++r) {
      double dot = 0.0;
      for (std::size_t j = 0; j < n; ++j) dot += yv[r * n + j] * g[r * n + j];
      for (std::size_t j = 0; j < n; ++j) gx[r * n + j] += yv[r * n + j] * (g[r * n + j] - dot);
    }
  });
}

}  // namespace rieif::nd

namespace rieif::nd {

Var masked_attention(const Var& q, const Var& k, const Var& v, std::size_t nodes, std::size_t heads, double scale,
                     std::shared_ptr<const SoftmaxMask> mask, Array* weights) {
  const Shape& s = q.shape();
  if (s.size() != 2 || k.shape() != s || v.shape() != s) shape_fail("masked_attention", s, k.shape());
  if (!mask || mask->rows != nodes || mask->cols != nodes || nodes == 0 || s[0] % nodes != 0) {
    shape_fail("masked_attention", s, "does not match the mask");
  }
  if (heads == 0 || s[1] % heads != 0) shape_fail("masked_attention", s, "width is not a multiple of the head count");
  const std::size_t n = nodes, groups = s[0] / n, width = s[1], dk = width / heads;

  // CSR of admissible keys per query node
  auto ptr = std::make_shared<std::vector<std::size_t>>(n + 1, 0);
  auto idx = std::make_shared<std::vector<std::size_t>>();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j)
      if (mask->allowed[i * n + j]) idx->push_back(j);
    (*ptr)[i + 1] = idx->size();
  }
  const std::size_t nnz = idx->size();
  auto alpha = std::make_shared<std::vector<double>>(groups * heads * nnz, 0.0);

  const double* qv = q.value().data().data();
  const double* kv = k.value().data().data();
  const double* vv = v.value().data().data();
  Array out(s, 0.0);
  double* ov = out.data().data();
  if (weights) *weights = Array({groups * heads, n, n}, 0.0);
  for (std::size_t g = 0; g < groups; ++g) {
    for (std::size_t h = 0; h < heads; ++h) {
      double* a = alpha->data() + (g * heads + h) * nnz;
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t b = (*ptr)[i], e = (*ptr)[i + 1];
        if (b == e) continue;
        const double* qi = qv + (g * n + i) * width + h * dk;
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t p = b; p < e; ++p) {
          const double* kj = kv + (g * n + (*idx)[p]) * width + h * dk;
          double d = 0.0;
          for (std::size_t c = 0; c < dk; ++c) d += qi[c] * kj[c];
          a[p] = scale * d;
          mx = std::max(mx, a[p]);
        }
        double z = 0.0;
        for (std::size_t p = b; p < e; ++p) z += (a[p] = std::exp(a[p] - mx));
        double* oi = ov + (g * n + i) * width + h * dk;
        for (std::size_t p = b; p < e; ++p) {
          a[p] /= z;
          const double* vj = vv + (g * n + (*idx)[p]) * width + h * dk;
          for (std::size_t c = 0; c < dk; ++c) oi[c] += a[p] * vj[c];
          if (weights) (*weights)[((g * heads + h) * n + i) * n + (*idx)[p]] = a[p];
        }
      }
    }
  }

  const std::size_t iq = q.id(), ik = k.id(), iv = v.id();
  Tape& tp = q.tape();
  const bool rg = q.requires_grad() || k.requires_grad() || v.requires_grad();
  return tp.record(std::move(out), rg, [=](Tape& t, const Array& go) {
    const double* qd = t.value(iq).data().data();
    const double* kd = t.value(ik).data().data();
    const double* vd = t.value(iv).data().data();
    double* gq = t.requires_grad(iq) ? t.grad_acc(iq).data().data() : nullptr;
    double* gk = t.requires_grad(ik) ? t.grad_acc(ik).data().data() : nullptr;
    double* gv = t.requires_grad(iv) ? t.grad_acc(iv).data().data() : nullptr;
    const double* god = go.data().data();
    std::vector<double> da(n);
    for (std::size_t g = 0; g < groups; ++g) {
      for (std::size_t h = 0; h < heads; ++h) {
        const double* a = alpha->data() + (g * heads + h) * nnz;
        for (std::size_t i = 0; i < n; ++i) {
          const std::size_t b = (*ptr)[i], e = (*ptr)[i + 1];
          const std::size_t row_i = (g * n + i) * width + h * dk;
          const double* goi = god + row_i;
          double dot = 0.0;
          for (std::size_t p = b; p < e; ++p) {
            const std::size_t row_j = (g * n + (*idx)[p]) * width + h * dk;
            double d = 0.0;
            for (std::size_t c = 0; c < dk; ++c) d += goi[c] * vd[row_j + c];
            da[p - b] = d;
            dot += a[p] * d;
            if (gv)
              for (std::size_t c = 0; c < dk; ++c) gv[row_j + c] += a[p] * goi[c];
          }
          for (std::size_t p = b; p < e; ++p) {
            const double ds = scale * a[p] * (da[p - b] - dot);
            const std::size_t row_j = (g * n + (*idx)[p]) * width + h * dk;
            if (gq)
              for (std::size_t c = 0; c < dk; ++c) gq[row_i + c] += ds * kd[row_j + c];
            if (gk)
              for (std::size_t c = 0; c < dk; ++c) gk[row_j + c] += ds * qd[row_i + c];
          }
        }
      }
    }
  });
}

}  // namespace rieif::nd
