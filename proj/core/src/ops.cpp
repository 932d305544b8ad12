#include "advd/ops.hpp"

#include <algorithm>
#include <cmath>

namespace advd {
namespace {

template <typename T>
void accumulate(Tensor<T>* t, std::int64_t i, T v) {
  t->grad[static_cast<std::size_t>(i)] += v;
}

}  // namespace

template <typename T>
TensorPtr<T> relu(const TensorPtr<T>& x) {
  auto out = Tensor<T>::zeros(x->shape, x->requires_grad);
  const std::int64_t n = x->size();
  for (std::int64_t i = 0; i < n; ++i)
    out->data[i] = x->data[i] > T(0) ? x->data[i] : T(0);
  if (out->requires_grad) {
    out->parents = {x};
    Tensor<T>* xp = x.get();
    out->backward_op = [xp, n](Tensor<T>& self) {
      xp->ensure_grad();
      // Subgradient at 0 is 0.
      for (std::int64_t i = 0; i < n; ++i)
        if (xp->data[i] > T(0)) accumulate(xp, i, self.grad[i]);
    };
  }
  return out;
}

template <typename T>
TensorPtr<T> sigmoid(const TensorPtr<T>& x) {
  auto out = Tensor<T>::zeros(x->shape, x->requires_grad);
  const std::int64_t n = x->size();
  for (std::int64_t i = 0; i < n; ++i)
    out->data[i] = T(1) / (T(1) + std::exp(-x->data[i]));
  if (out->requires_grad) {
    out->parents = {x};
    Tensor<T>* xp = x.get();
    out->backward_op = [xp, n](Tensor<T>& self) {
      xp->ensure_grad();
      for (std::int64_t i = 0; i < n; ++i) {
        const T s = self.data[i];
        accumulate(xp, i, self.grad[i] * s * (T(1) - s));
      }
    };
  }
  return out;
}

template <typename T>
TensorPtr<T> dropout(const TensorPtr<T>& x, double drop_prob, bool training,
                     Rng& rng) {
  if (drop_prob < 0.0 || drop_prob >= 1.0) {
    throw ConfigError("dropout: drop_prob must be in [0,1), got " +
                      std::to_string(drop_prob));
  }
  if (!training || drop_prob == 0.0) {
    // Eval mode is an exact identity.
    auto out = Tensor<T>::from(x->shape, x->data, x->requires_grad);
    if (out->requires_grad) {
      out->parents = {x};
      Tensor<T>* xp = x.get();
      out->backward_op = [xp](Tensor<T>& self) {
        xp->ensure_grad();
        for (std::int64_t i = 0; i < self.size(); ++i)
          accumulate(xp, i, self.grad[i]);
      };
    }
    return out;
  }

  const std::int64_t n = x->size();
  const T keep_scale = static_cast<T>(1.0 / (1.0 - drop_prob));
  std::vector<T> mask(static_cast<std::size_t>(n));
  for (auto& m : mask) m = rng.uniform() < drop_prob ? T(0) : keep_scale;

  auto out = Tensor<T>::zeros(x->shape, x->requires_grad);
  for (std::int64_t i = 0; i < n; ++i) out->data[i] = x->data[i] * mask[i];
  if (out->requires_grad) {
    out->parents = {x};
    Tensor<T>* xp = x.get();
    out->backward_op = [xp, n, mask = std::move(mask)](Tensor<T>& self) {
      xp->ensure_grad();
      for (std::int64_t i = 0; i < n; ++i)
        accumulate(xp, i, self.grad[i] * mask[i]);
    };
  }
  return out;
}

template <typename T>
TensorPtr<T> hadamard(const TensorPtr<T>& a, const TensorPtr<T>& b) {
  check_same_shape(a->shape, b->shape, "hadamard");
  auto out = Tensor<T>::zeros(a->shape, a->requires_grad || b->requires_grad);
  const std::int64_t n = a->size();
  for (std::int64_t i = 0; i < n; ++i) out->data[i] = a->data[i] * b->data[i];
  if (out->requires_grad) {
    out->parents = {a, b};
    Tensor<T>* ap = a.get();
    Tensor<T>* bp = b.get();
    out->backward_op = [ap, bp, n](Tensor<T>& self) {
      if (ap->requires_grad) {
        ap->ensure_grad();
        for (std::int64_t i = 0; i < n; ++i)
          accumulate(ap, i, self.grad[i] * bp->data[i]);
      }
      if (bp->requires_grad) {
        bp->ensure_grad();
        for (std::int64_t i = 0; i < n; ++i)
          accumulate(bp, i, self.grad[i] * ap->data[i]);
      }
    };
  }
  return out;
}

template <typename T>
TensorPtr<T> add(const TensorPtr<T>& a, const TensorPtr<T>& b) {
  check_same_shape(a->shape, b->shape, "add");
  auto out = Tensor<T>::zeros(a->shape, a->requires_grad || b->requires_grad);
  const std::int64_t n = a->size();
  for (std::int64_t i = 0; i < n; ++i) out->data[i] = a->data[i] + b->data[i];
  if (out->requires_grad) {
    out->parents = {a, b};
    Tensor<T>* ap = a.get();
    Tensor<T>* bp = b.get();
    out->backward_op = [ap, bp, n](Tensor<T>& self) {
      if (ap->requires_grad) {
        ap->ensure_grad();
        for (std::int64_t i = 0; i < n; ++i) accumulate(ap, i, self.grad[i]);
      }
      if (bp->requires_grad) {
        bp->ensure_grad();
        for (std::int64_t i = 0; i < n; ++i) accumulate(bp, i, self.grad[i]);
      }
    };
  }
  return out;
}

template <typename T>
TensorPtr<T> sub(const TensorPtr<T>& a, const TensorPtr<T>& b) {
  check_same_shape(a->shape, b->shape, "sub");
  auto out = Tensor<T>::zeros(a->shape, a->requires_grad || b->requires_grad);
  const std::int64_t n = a->size();
  for (std::int64_t i = 0; i < n; ++i) out->data[i] = a->data[i] - b->data[i];
  if (out->requires_grad) {
    out->parents = {a, b};
    Tensor<T>* ap = a.get();
    Tensor<T>* bp = b.get();
    out->backward_op = [ap, bp, n](Tensor<T>& self) {
      if (ap->requires_grad) {
        ap->ensure_grad();
        for (std::int64_t i = 0; i < n; ++i) accumulate(ap, i, self.grad[i]);
      }
      if (bp->requires_grad) {
        bp->ensure_grad();
        for (std::int64_t i = 0; i < n; ++i) accumulate(bp, i, -self.grad[i]);
      }
    };
  }
  return out;
}

template <typename T>
TensorPtr<T> scale(const TensorPtr<T>& x, T factor) {
  auto out = Tensor<T>::zeros(x->shape, x->requires_grad);
  const std::int64_t n = x->size();
  for (std::int64_t i = 0; i < n; ++i) out->data[i] = x->data[i] * factor;
  if (out->requires_grad) {
    out->parents = {x};
    Tensor<T>* xp = x.get();
    out->backward_op = [xp, n, factor](Tensor<T>& self) {
      xp->ensure_grad();
      for (std::int64_t i = 0; i < n; ++i)
        accumulate(xp, i, self.grad[i] * factor);
    };
  }
  return out;
}

template <typename T>
TensorPtr<T> sum(const TensorPtr<T>& x) {
  double acc = 0.0;
  for (T v : x->data) acc += static_cast<double>(v);
  auto out = Tensor<T>::scalar(static_cast<T>(acc), x->requires_grad);
  if (out->requires_grad) {
    out->parents = {x};
    Tensor<T>* xp = x.get();
    out->backward_op = [xp](Tensor<T>& self) {
      xp->ensure_grad();
      const T g = self.grad[0];
      for (auto& gv : xp->grad) gv += g;
    };
  }
  return out;
}

template <typename T>
TensorPtr<T> mean(const TensorPtr<T>& x) {
  const std::int64_t n = x->size();
  if (n == 0) throw ShapeError("mean of empty tensor");
  double acc = 0.0;
  for (T v : x->data) acc += static_cast<double>(v);
  auto out =
      Tensor<T>::scalar(static_cast<T>(acc / static_cast<double>(n)),
                        x->requires_grad);
  if (out->requires_grad) {
    out->parents = {x};
    Tensor<T>* xp = x.get();
    out->backward_op = [xp, n](Tensor<T>& self) {
      xp->ensure_grad();
      const T g = self.grad[0] / static_cast<T>(n);
      for (auto& gv : xp->grad) gv += g;
    };
  }
  return out;
}

template <typename T>
TensorPtr<T> mse_loss(const TensorPtr<T>& pred, const TensorPtr<T>& target) {
  check_same_shape(pred->shape, target->shape, "mse_loss");
  const std::int64_t n = pred->size();
  if (n == 0) throw ShapeError("mse_loss of empty tensors");
  double acc = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(pred->data[i]) -
                     static_cast<double>(target->data[i]);
    acc += d * d;
  }
  auto out = Tensor<T>::scalar(static_cast<T>(acc / static_cast<double>(n)),
                               pred->requires_grad || target->requires_grad);
  if (out->requires_grad) {
    out->parents = {pred, target};
    Tensor<T>* pp = pred.get();
    Tensor<T>* tp = target.get();
    out->backward_op = [pp, tp, n](Tensor<T>& self) {
      const T g = self.grad[0] * T(2) / static_cast<T>(n);
      if (pp->requires_grad) {
        pp->ensure_grad();
        for (std::int64_t i = 0; i < n; ++i)
          accumulate(pp, i, g * (pp->data[i] - tp->data[i]));
      }
      if (tp->requires_grad) {
        tp->ensure_grad();
        for (std::int64_t i = 0; i < n; ++i)
          accumulate(tp, i, -g * (pp->data[i] - tp->data[i]));
      }
    };
  }
  return out;
}

template <typename T>
TensorPtr<T> bce_loss(const TensorPtr<T>& prob, int label) {
  if (prob->size() != 1)
    throw ShapeError("bce_loss expects a single probability, got " +
                     shape_str(prob->shape));
  if (label != 0 && label != 1)
    throw ConfigError("bce_loss: label must be 0 or 1");

  constexpr double kEps = 1e-7;
  const double raw = static_cast<double>(prob->data[0]);
  const double p = std::clamp(raw, kEps, 1.0 - kEps);
  const double loss = label ? -std::log(p) : -std::log(1.0 - p);
  auto out = Tensor<T>::scalar(static_cast<T>(loss), prob->requires_grad);
  if (out->requires_grad) {
    out->parents = {prob};
    Tensor<T>* pp = prob.get();
    const bool saturated = raw < kEps || raw > 1.0 - kEps;
    out->backward_op = [pp, label, p, saturated](Tensor<T>& self) {
      pp->ensure_grad();
      if (saturated) return;
      const double d = label ? -1.0 / p : 1.0 / (1.0 - p);
      pp->grad[0] += self.grad[0] * static_cast<T>(d);
    };
  }
  return out;
}

template <typename T>
TensorPtr<T> lp_penalty(const TensorPtr<T>& w, double p, double eps) {
  if (p <= 0.0 || p >= 1.0)
    throw ConfigError("lp_penalty: p must lie in (0,1), got " +
                      std::to_string(p));
  if (eps <= 0.0) throw ConfigError("lp_penalty: eps must be positive");

  const std::int64_t n = w->size();
  const double anchor = std::pow(eps, p / 2.0);
  double acc = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const double v = static_cast<double>(w->data[i]);
    acc += std::pow(v * v + eps, p / 2.0) - anchor;
  }
  auto out = Tensor<T>::scalar(static_cast<T>(acc), w->requires_grad);
  if (out->requires_grad) {
    out->parents = {w};
    Tensor<T>* wp = w.get();
    out->backward_op = [wp, n, p, eps](Tensor<T>& self) {
      wp->ensure_grad();
      const double g = static_cast<double>(self.grad[0]);
      for (std::int64_t i = 0; i < n; ++i) {
        const double v = static_cast<double>(wp->data[i]);
        const double d = p * v * std::pow(v * v + eps, p / 2.0 - 1.0);
        accumulate(wp, i, static_cast<T>(g * d));
      }
    };
  }
  return out;
}

template <typename T>
TensorPtr<T> concat_channels(const std::vector<TensorPtr<T>>& parts) {
  if (parts.empty()) throw ShapeError("concat_channels: no inputs");
  for (const auto& t : parts) {
    if (t->shape.size() != 3)
      throw ShapeError("concat_channels expects [C,H,W] tensors, got " +
                       shape_str(t->shape));
  }
  const int h = parts[0]->dim(1);
  const int w = parts[0]->dim(2);
  int channels = 0;
  bool rg = false;
  for (const auto& t : parts) {
    if (t->dim(1) != h || t->dim(2) != w)
      throw ShapeError("concat_channels: spatial mismatch " +
                       shape_str(t->shape));
    channels += t->dim(0);
    rg = rg || t->requires_grad;
  }

  auto out = Tensor<T>::zeros({channels, h, w}, rg);
  std::size_t offset = 0;
  for (const auto& t : parts) {
    std::copy(t->data.begin(), t->data.end(), out->data.begin() + offset);
    offset += t->data.size();
  }
  if (out->requires_grad) {
    out->parents = parts;
    out->backward_op = [](Tensor<T>& self) {
      std::size_t off = 0;
      for (auto& parent : self.parents) {
        const std::size_t len = parent->data.size();
        if (parent->requires_grad) {
          parent->ensure_grad();
          for (std::size_t i = 0; i < len; ++i)
            parent->grad[i] += self.grad[off + i];
        }
        off += len;
      }
    };
  }
  return out;
}

template <typename T>
TensorPtr<T> clamp01(const TensorPtr<T>& x) {
  auto out = Tensor<T>::zeros(x->shape, x->requires_grad);
  const std::int64_t n = x->size();
  for (std::int64_t i = 0; i < n; ++i)
    out->data[i] = std::clamp(x->data[i], T(0), T(1));
  if (out->requires_grad) {
    out->parents = {x};
    Tensor<T>* xp = x.get();
    out->backward_op = [xp, n](Tensor<T>& self) {
      xp->ensure_grad();
      for (std::int64_t i = 0; i < n; ++i)
        if (xp->data[i] >= T(0) && xp->data[i] <= T(1))
          accumulate(xp, i, self.grad[i]);
    };
  }
  return out;
}

template <typename T>
TensorPtr<T> global_avg_pool(const TensorPtr<T>& x) {
  if (x->shape.size() != 3)
    throw ShapeError("global_avg_pool expects [C,H,W], got " +
                     shape_str(x->shape));
  const int c = x->dim(0);
  const std::int64_t hw = static_cast<std::int64_t>(x->dim(1)) * x->dim(2);
  if (hw == 0) throw ShapeError("global_avg_pool: empty spatial extent");
  auto out = Tensor<T>::zeros({c}, x->requires_grad);
  for (int ch = 0; ch < c; ++ch) {
    double acc = 0.0;
    const T* base = x->data.data() + static_cast<std::int64_t>(ch) * hw;
    for (std::int64_t i = 0; i < hw; ++i) acc += static_cast<double>(base[i]);
    out->data[ch] = static_cast<T>(acc / static_cast<double>(hw));
  }
  if (out->requires_grad) {
    out->parents = {x};
    Tensor<T>* xp = x.get();
    out->backward_op = [xp, c, hw](Tensor<T>& self) {
      xp->ensure_grad();
      for (int ch = 0; ch < c; ++ch) {
        const T g = self.grad[ch] / static_cast<T>(hw);
        T* base = xp->grad.data() + static_cast<std::int64_t>(ch) * hw;
        for (std::int64_t i = 0; i < hw; ++i) base[i] += g;
      }
    };
  }
  return out;
}

template <typename T>
TensorPtr<T> linear(const TensorPtr<T>& x, const TensorPtr<T>& weight,
                    const TensorPtr<T>& bias) {
  if (x->shape.size() != 1 || weight->shape.size() != 2 ||
      bias->shape.size() != 1)
    throw ShapeError("linear expects x[in], weight[out,in], bias[out]");
  const int in = x->dim(0);
  const int outn = weight->dim(0);
  if (weight->dim(1) != in)
    throw ShapeError("linear: weight " + shape_str(weight->shape) +
                     " incompatible with input " + shape_str(x->shape));
  if (bias->dim(0) != outn)
    throw ShapeError("linear: bias " + shape_str(bias->shape) +
                     " incompatible with weight " + shape_str(weight->shape));

  auto out = Tensor<T>::zeros({outn}, x->requires_grad ||
                                          weight->requires_grad ||
                                          bias->requires_grad);
  for (int o = 0; o < outn; ++o) {
    double acc = static_cast<double>(bias->data[o]);
    const T* wrow = weight->data.data() + static_cast<std::int64_t>(o) * in;
    for (int i = 0; i < in; ++i)
      acc += static_cast<double>(wrow[i]) * static_cast<double>(x->data[i]);
    out->data[o] = static_cast<T>(acc);
  }
  if (out->requires_grad) {
    out->parents = {x, weight, bias};
    Tensor<T>* xp = x.get();
    Tensor<T>* wp = weight.get();
    Tensor<T>* bp = bias.get();
    out->backward_op = [xp, wp, bp, in, outn](Tensor<T>& self) {
      if (xp->requires_grad) {
        xp->ensure_grad();
        for (int o = 0; o < outn; ++o) {
          const T g = self.grad[o];
          const T* wrow = wp->data.data() + static_cast<std::int64_t>(o) * in;
          for (int i = 0; i < in; ++i) xp->grad[i] += g * wrow[i];
        }
      }
      if (wp->requires_grad) {
        wp->ensure_grad();
        for (int o = 0; o < outn; ++o) {
          const T g = self.grad[o];
          T* grow = wp->grad.data() + static_cast<std::int64_t>(o) * in;
          for (int i = 0; i < in; ++i) grow[i] += g * xp->data[i];
        }
      }
      if (bp->requires_grad) {
        bp->ensure_grad();
        for (int o = 0; o < outn; ++o) bp->grad[o] += self.grad[o];
      }
    };
  }
  return out;
}

template <typename T>
TensorPtr<T> softmax(const TensorPtr<T>& logits) {
  if (logits->shape.size() != 1 || logits->size() == 0)
    throw ShapeError("softmax expects a non-empty vector, got " +
                     shape_str(logits->shape));
  const std::int64_t n = logits->size();
  auto out = Tensor<T>::zeros(logits->shape, logits->requires_grad);
  T mx = logits->data[0];
  for (T v : logits->data) mx = std::max(mx, v);
  double denom = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const double e = std::exp(static_cast<double>(logits->data[i] - mx));
    out->data[i] = static_cast<T>(e);
    denom += e;
  }
  for (std::int64_t i = 0; i < n; ++i)
    out->data[i] = static_cast<T>(static_cast<double>(out->data[i]) / denom);
  if (out->requires_grad) {
    out->parents = {logits};
    Tensor<T>* lp = logits.get();
    out->backward_op = [lp, n](Tensor<T>& self) {
      lp->ensure_grad();
      double dot = 0.0;
      for (std::int64_t i = 0; i < n; ++i)
        dot += static_cast<double>(self.grad[i]) *
               static_cast<double>(self.data[i]);
      for (std::int64_t i = 0; i < n; ++i)
        accumulate(lp, i,
                   self.data[i] * (self.grad[i] - static_cast<T>(dot)));
    };
  }
  return out;
}

template <typename T>
TensorPtr<T> select(const TensorPtr<T>& x, std::int64_t index) {
  if (index < 0 || index >= x->size())
    throw ShapeError("select: index " + std::to_string(index) +
                     " out of range for " + shape_str(x->shape));
  auto out = Tensor<T>::scalar(x->data[static_cast<std::size_t>(index)],
                               x->requires_grad);
  if (out->requires_grad) {
    out->parents = {x};
    Tensor<T>* xp = x.get();
    out->backward_op = [xp, index](Tensor<T>& self) {
      xp->ensure_grad();
      xp->grad[static_cast<std::size_t>(index)] += self.grad[0];
    };
  }
  return out;
}

#define ADVD_INSTANTIATE_OPS(T)                                               \
  template TensorPtr<T> relu<T>(const TensorPtr<T>&);                         \
  template TensorPtr<T> sigmoid<T>(const TensorPtr<T>&);                      \
  template TensorPtr<T> dropout<T>(const TensorPtr<T>&, double, bool, Rng&);  \
  template TensorPtr<T> hadamard<T>(const TensorPtr<T>&, const TensorPtr<T>&);\
  template TensorPtr<T> add<T>(const TensorPtr<T>&, const TensorPtr<T>&);     \
  template TensorPtr<T> sub<T>(const TensorPtr<T>&, const TensorPtr<T>&);     \
  template TensorPtr<T> scale<T>(const TensorPtr<T>&, T);                     \
  template TensorPtr<T> sum<T>(const TensorPtr<T>&);                          \
  template TensorPtr<T> mean<T>(const TensorPtr<T>&);                         \
  template TensorPtr<T> mse_loss<T>(const TensorPtr<T>&, const TensorPtr<T>&);\
  template TensorPtr<T> bce_loss<T>(const TensorPtr<T>&, int);                \
  template TensorPtr<T> lp_penalty<T>(const TensorPtr<T>&, double, double);   \
  template TensorPtr<T> concat_channels<T>(const std::vector<TensorPtr<T>>&); \
  template TensorPtr<T> clamp01<T>(const TensorPtr<T>&);                      \
  template TensorPtr<T> global_avg_pool<T>(const TensorPtr<T>&);              \
  template TensorPtr<T> linear<T>(const TensorPtr<T>&, const TensorPtr<T>&,   \
                                  const TensorPtr<T>&);                       \
  template TensorPtr<T> softmax<T>(const TensorPtr<T>&);                      \
  template TensorPtr<T> select<T>(const TensorPtr<T>&, std::int64_t);

ADVD_INSTANTIATE_OPS(float)
ADVD_INSTANTIATE_OPS(double)

#undef ADVD_INSTANTIATE_OPS

}  // namespace advd
