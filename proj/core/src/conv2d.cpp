#include <algorithm>
#include <vector>

#include "advd/gemm.hpp"
#include "advd/ops.hpp"

namespace advd {
namespace {

struct ConvGeom {
  int c_in, h, w;
  int c_out, kh, kw;
  int stride, pad_h, pad_w;
  int h_out, w_out;

  std::int64_t patch() const {
    return static_cast<std::int64_t>(c_in) * kh * kw;
  }
  std::int64_t cols() const {
    return static_cast<std::int64_t>(h_out) * w_out;
  }
};

// Lowered patch matrix: row ((c*kH)+ky)*kW+kx, column oy*W_out+ox. Matches
// the row-major [C_out, C_in, kH, kW] weight layout, so the forward pass is
// a single weight x patch-matrix product.
template <typename T>
void im2col(const T* src, const ConvGeom& g, T* col) {
  const std::int64_t cols = g.cols();
  for (int c = 0; c < g.c_in; ++c) {
    const T* plane = src + static_cast<std::int64_t>(c) * g.h * g.w;
    for (int ky = 0; ky < g.kh; ++ky) {
      for (int kx = 0; kx < g.kw; ++kx) {
        T* row = col + (((static_cast<std::int64_t>(c) * g.kh) + ky) * g.kw + kx) * cols;
        for (int oy = 0; oy < g.h_out; ++oy) {
          const int iy = oy * g.stride + ky - g.pad_h;
          T* dst = row + static_cast<std::int64_t>(oy) * g.w_out;
          if (iy < 0 || iy >= g.h) {
            std::fill(dst, dst + g.w_out, T(0));
            continue;
          }
          const T* srow = plane + static_cast<std::int64_t>(iy) * g.w;
          for (int ox = 0; ox < g.w_out; ++ox) {
            const int ix = ox * g.stride + kx - g.pad_w;
            dst[ox] = (ix >= 0 && ix < g.w) ? srow[ix] : T(0);
          }
        }
      }
    }
  }
}

template <typename T>
void col2im_add(const T* col, const ConvGeom& g, T* dst) {
  const std::int64_t cols = g.cols();
  for (int c = 0; c < g.c_in; ++c) {
    T* plane = dst + static_cast<std::int64_t>(c) * g.h * g.w;
    for (int ky = 0; ky < g.kh; ++ky) {
      for (int kx = 0; kx < g.kw; ++kx) {
        const T* row =
            col + (((static_cast<std::int64_t>(c) * g.kh) + ky) * g.kw + kx) * cols;
        for (int oy = 0; oy < g.h_out; ++oy) {
          const int iy = oy * g.stride + ky - g.pad_h;
          if (iy < 0 || iy >= g.h) continue;
          T* drow = plane + static_cast<std::int64_t>(iy) * g.w;
          const T* srow = row + static_cast<std::int64_t>(oy) * g.w_out;
          for (int ox = 0; ox < g.w_out; ++ox) {
            const int ix = ox * g.stride + kx - g.pad_w;
            if (ix >= 0 && ix < g.w) drow[ix] += srow[ox];
          }
        }
      }
    }
  }
}

ConvGeom make_geom(const std::vector<int>& xs, const std::vector<int>& ws,
                   const std::vector<int>& bs, int stride) {
  if (xs.size() != 3)
    throw ShapeError("conv2d: input must be [C,H,W], got " + shape_str(xs));
  if (ws.size() != 4)
    throw ShapeError("conv2d: weight must be [C_out,C_in,kH,kW], got " +
                     shape_str(ws));
  if (bs.size() != 1 || bs[0] != ws[0])
    throw ShapeError("conv2d: bias must be [C_out]=[" + std::to_string(ws[0]) +
                     "], got " + shape_str(bs));
  if (ws[1] != xs[0])
    throw ShapeError("conv2d: input has " + std::to_string(xs[0]) +
                     " channels but weight expects " + std::to_string(ws[1]));
  if (ws[2] % 2 == 0 || ws[3] % 2 == 0)
    throw ShapeError("conv2d: kernel extents must be odd, got " +
                     shape_str(ws));
  if (stride < 1) throw ConfigError("conv2d: stride must be >= 1");

  ConvGeom g;
  g.c_in = xs[0];
  g.h = xs[1];
  g.w = xs[2];
  g.c_out = ws[0];
  g.kh = ws[2];
  g.kw = ws[3];
  g.stride = stride;
  g.pad_h = g.kh / 2;
  g.pad_w = g.kw / 2;
  g.h_out = (g.h + 2 * g.pad_h - g.kh) / stride + 1;
  g.w_out = (g.w + 2 * g.pad_w - g.kw) / stride + 1;
  if (g.h_out < 1 || g.w_out < 1)
    throw ShapeError("conv2d: empty output for input " + shape_str(xs));
  return g;
}

}  // namespace

template <typename T>
TensorPtr<T> conv2d(const TensorPtr<T>& input, const TensorPtr<T>& weight,
                    const TensorPtr<T>& bias, int stride) {
  const ConvGeom g = make_geom(input->shape, weight->shape, bias->shape, stride);
  const std::int64_t cols = g.cols();
  const bool pointwise = g.kh == 1 && g.kw == 1 && g.stride == 1;

  auto out = Tensor<T>::zeros({g.c_out, g.h_out, g.w_out},
                              input->requires_grad || weight->requires_grad ||
                                  bias->requires_grad);

  std::vector<T> col;
  const T* patches = input->data.data();
  if (!pointwise) {
    col.resize(static_cast<std::size_t>(g.patch() * cols));
    im2col(input->data.data(), g, col.data());
    patches = col.data();
  }
  gemm<T>(false, false, g.c_out, cols, g.patch(), T(1), weight->data.data(),
          g.patch(), patches, cols, T(0), out->data.data(), cols);
  for (int o = 0; o < g.c_out; ++o) {
    const T b = bias->data[o];
    T* row = out->data.data() + static_cast<std::int64_t>(o) * cols;
    for (std::int64_t i = 0; i < cols; ++i) row[i] += b;
  }

  if (out->requires_grad) {
    out->parents = {input, weight, bias};
    Tensor<T>* xp = input.get();
    Tensor<T>* wp = weight.get();
    Tensor<T>* bp = bias.get();
    out->backward_op = [xp, wp, bp, g, cols, pointwise](Tensor<T>& self) {
      const T* dy = self.grad.data();

      if (bp->requires_grad) {
        bp->ensure_grad();
        for (int o = 0; o < g.c_out; ++o) {
          double acc = 0.0;
          const T* row = dy + static_cast<std::int64_t>(o) * cols;
          for (std::int64_t i = 0; i < cols; ++i)
            acc += static_cast<double>(row[i]);
          bp->grad[o] += static_cast<T>(acc);
        }
      }

      std::vector<T> col;
      const T* patches = xp->data.data();
      if (!pointwise && (wp->requires_grad || xp->requires_grad)) {
        col.resize(static_cast<std::size_t>(g.patch() * cols));
        im2col(xp->data.data(), g, col.data());
        patches = col.data();
      }

      if (wp->requires_grad) {
        wp->ensure_grad();
        // dW += dY * patches^T
        gemm<T>(false, true, g.c_out, g.patch(), cols, T(1), dy, cols, patches,
                cols, T(1), wp->grad.data(), g.patch());
      }

      if (xp->requires_grad) {
        xp->ensure_grad();
        if (pointwise) {
          // dX += W^T * dY
          gemm<T>(true, false, g.patch(), cols, g.c_out, T(1),
                  wp->data.data(), g.patch(), dy, cols, T(1), xp->grad.data(),
                  cols);
        } else {
          std::vector<T> dcol(static_cast<std::size_t>(g.patch() * cols));
          gemm<T>(true, false, g.patch(), cols, g.c_out, T(1),
                  wp->data.data(), g.patch(), dy, cols, T(0), dcol.data(),
                  cols);
          col2im_add(dcol.data(), g, xp->grad.data());
        }
      }
    };
  }
  return out;
}

template TensorPtr<float> conv2d<float>(const TensorPtr<float>&,
                                        const TensorPtr<float>&,
                                        const TensorPtr<float>&, int);
template TensorPtr<double> conv2d<double>(const TensorPtr<double>&,
                                          const TensorPtr<double>&,
                                          const TensorPtr<double>&, int);

}  // namespace advd
