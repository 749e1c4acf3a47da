#include "maga/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "maga/errors.hpp"

namespace maga::oracle {

Grid Grid::from(const Tensor& t) {
  if (t.rank() != 3) throw DimensionError("oracle grids are h x w x c");
  Grid g(t.dim(0), t.dim(1), t.dim(2));
  std::copy(t.values().begin(), t.values().end(), g.v.begin());
  return g;
}

Tensor Grid::to_tensor() const { return Tensor({h, w, c}, v); }

double kernel_at(const Tensor& kernel, std::size_t ky, std::size_t kx, std::size_t ci, std::size_t co) {
  const std::size_t k = kernel.dim(0), cin = kernel.dim(2), cout = kernel.dim(3);
  return kernel.values()[((ky * k + kx) * cin + ci) * cout + co];
}

namespace {

double bias_at(const Tensor& bias, std::size_t o) { return bias.defined() ? bias.values()[o] : 0.0; }

bool inside(long y, long x, const Grid& g) {
  return y >= 0 && x >= 0 && y < static_cast<long>(g.h) && x < static_cast<long>(g.w);
}

}  // namespace

Grid conv2d(const Grid& in, const Tensor& kernel, const Tensor& bias, std::size_t stride, bool same) {
  const std::size_t k = kernel.dim(0), cout = kernel.dim(3);
  const long pad = same ? static_cast<long>((k - 1) / 2) : 0;
  const std::size_t oh = same ? (in.h + stride - 1) / stride : (in.h - k) / stride + 1;
  const std::size_t ow = same ? (in.w + stride - 1) / stride : (in.w - k) / stride + 1;
  Grid out(oh, ow, cout);
  for (std::size_t oy = 0; oy < oh; ++oy) {
    for (std::size_t ox = 0; ox < ow; ++ox) {
      for (std::size_t o = 0; o < cout; ++o) {
        double acc = bias_at(bias, o);
        for (std::size_t ky = 0; ky < k; ++ky) {
          for (std::size_t kx = 0; kx < k; ++kx) {
            const long y = static_cast<long>(oy * stride + ky) - pad;
            const long x = static_cast<long>(ox * stride + kx) - pad;
            if (!inside(y, x, in)) continue;
            for (std::size_t c = 0; c < in.c; ++c) {
              acc += in.at(static_cast<std::size_t>(y), static_cast<std::size_t>(x), c) * kernel_at(kernel, ky, kx, c, o);
            }
          }
        }
        out.at(oy, ox, o) = acc;
      }
    }
  }
  return out;
}

Grid conv_transpose2d(const Grid& in, const Tensor& kernel, const Tensor& bias, std::size_t stride) {
  const std::size_t k = kernel.dim(0), a = kernel.dim(2);
  const long pad = static_cast<long>((k - 1) / 2);
  Grid out(in.h * stride, in.w * stride, a);
  for (std::size_t iy = 0; iy < in.h; ++iy) {
    for (std::size_t ix = 0; ix < in.w; ++ix) {
      for (std::size_t c = 0; c < in.c; ++c) {
        const double v = in.at(iy, ix, c);
        for (std::size_t ky = 0; ky < k; ++ky) {
          for (std::size_t kx = 0; kx < k; ++kx) {
            const long y = static_cast<long>(iy * stride + ky) - pad;
            const long x = static_cast<long>(ix * stride + kx) - pad;
            if (!inside(y, x, out)) continue;
            for (std::size_t o = 0; o < a; ++o) {
              out.at(static_cast<std::size_t>(y), static_cast<std::size_t>(x), o) += v * kernel_at(kernel, ky, kx, o, c);
            }
          }
        }
      }
    }
  }
  for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] += bias_at(bias, i % a);
  return out;
}

Grid min_pool(const Grid& in, std::size_t window, std::size_t stride) {
  const std::size_t oh = (in.h + stride - 1) / stride, ow = (in.w + stride - 1) / stride;
  const std::size_t pad_h = std::max<long>(0, static_cast<long>((oh - 1) * stride + window) - static_cast<long>(in.h));
  const std::size_t pad_w = std::max<long>(0, static_cast<long>((ow - 1) * stride + window) - static_cast<long>(in.w));
  const long top = static_cast<long>(pad_h / 2), left = static_cast<long>(pad_w / 2);
  Grid out(oh, ow, in.c);
  for (std::size_t oy = 0; oy < oh; ++oy) {
    for (std::size_t ox = 0; ox < ow; ++ox) {
      for (std::size_t c = 0; c < in.c; ++c) {
        double m = std::numeric_limits<double>::infinity();
        for (std::size_t dy = 0; dy < window; ++dy) {
          for (std::size_t dx = 0; dx < window; ++dx) {
            const long y = static_cast<long>(oy * stride + dy) - top;
            const long x = static_cast<long>(ox * stride + dx) - left;
            const double v = inside(y, x, in) ? in.at(static_cast<std::size_t>(y), static_cast<std::size_t>(x), c) : 1.0;
            m = std::min(m, v);
          }
        }
        out.at(oy, ox, c) = m;
      }
    }
  }
  return out;
}

double rnc(double x) {
  const double v = std::exp(-x) - 0.5;
  return v > 0.0 ? 2.0 * v : 0.0;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Grid maga_conv(const Grid& features, const Grid& mask, const Tensor& kernel, const Tensor& bias,
               double epsilon_raw, std::size_t stride) {
  const std::size_t k = kernel.dim(0), cout = kernel.dim(3);
  const long pad = static_cast<long>((k - 1) / 2);
  const double eps = sigmoid(epsilon_raw);
  const Grid conv = conv2d(features, kernel, bias, stride, true);
  Grid out(conv.h, conv.w, cout);
  for (std::size_t oy = 0; oy < conv.h; ++oy) {
    for (std::size_t ox = 0; ox < conv.w; ++ox) {
      for (std::size_t o = 0; o < cout; ++o) {
        double cover = 0.0;
        for (std::size_t ky = 0; ky < k; ++ky) {
          for (std::size_t kx = 0; kx < k; ++kx) {
            const long y = static_cast<long>(oy * stride + ky) - pad;
            const long x = static_cast<long>(ox * stride + kx) - pad;
            if (!inside(y, x, mask)) continue;
            const double m = mask.at(static_cast<std::size_t>(y), static_cast<std::size_t>(x), 0);
            for (std::size_t c = 0; c < features.c; ++c) cover += m * std::fabs(kernel_at(kernel, ky, kx, c, o));
          }
        }
        out.at(oy, ox, o) = rnc(eps * cover) * conv.at(oy, ox, o);
      }
    }
  }
  return out;
}

Grid maga_layer(const MagaConvLayer& layer, const Grid& features, const Grid& mask) {
  std::vector<Grid> parts;
  for (const MagaConvHead& head : layer.heads()) {
    parts.push_back(maga_conv(features, mask, head.kernel, head.bias, head.epsilon_raw.item(), layer.stride()));
  }
  Grid cat(parts[0].h, parts[0].w, 0);
  for (const Grid& p : parts) cat.c += p.c;
  cat.v.assign(cat.h * cat.w * cat.c, 0.0);
  for (std::size_t y = 0; y < cat.h; ++y) {
    for (std::size_t x = 0; x < cat.w; ++x) {
      std::size_t off = 0;
      for (const Grid& p : parts) {
        for (std::size_t c = 0; c < p.c; ++c) cat.at(y, x, off + c) = p.at(y, x, c);
        off += p.c;
      }
    }
  }
  Grid out = conv2d(cat, layer.fuse_kernel(), layer.fuse_bias(), 1, true);
  for (double& v : out.v) v = std::max(v, 0.0);
  return out;
}

Grid cmf(const CmfModule& m, const Grid& target, const Grid& query) {
  const std::size_t wide = m.channels * m.heads;
  const std::size_t hidden = m.hidden;
  // (1) expansion
  const Grid t = conv2d(target, m.expand_t_kernel, m.expand_t_bias, 1, true);
  const Grid q = conv2d(query, m.expand_q_kernel, m.expand_q_bias, 1, true);
  const auto w1 = m.hidden1_weight.values(), b1 = m.hidden1_bias.values();
  const auto w2 = m.hidden2_weight.values(), b2 = m.hidden2_bias.values();
  const auto wc = m.correction_weight.values(), wg = m.gate_weight.values();
  const double bc = m.correction_bias.item(), bg = m.gate_bias.item();
  Grid restored(target.h, target.w, wide);
  // (2) one slice per expanded channel, (3)-(5) pixel rows through the MLP
  for (std::size_t s = 0; s < wide; ++s) {
    for (std::size_t y = 0; y < target.h; ++y) {
      for (std::size_t x = 0; x < target.w; ++x) {
        const double tv = t.at(y, x, s), qv = q.at(y, x, s);
        std::vector<double> a1(hidden), a2(hidden);
        for (std::size_t j = 0; j < hidden; ++j) {
          a1[j] = std::max(0.0, tv * w1[0 * hidden + j] + qv * w1[1 * hidden + j] + b1[j]);
        }
        for (std::size_t j = 0; j < hidden; ++j) {
          double acc = b2[j];
          for (std::size_t i = 0; i < hidden; ++i) acc += a1[i] * w2[i * hidden + j];
          a2[j] = std::max(0.0, acc);
        }
        double corr = bc, gate = bg;
        for (std::size_t i = 0; i < hidden; ++i) {
          corr += a2[i] * wc[i];
          gate += a2[i] * wg[i];
        }
        // (6) restore the slice into its channel
        restored.at(y, x, s) = std::max(0.0, corr + tv) * sigmoid(gate);
      }
    }
  }
  return conv2d(restored, m.fuse_kernel, m.fuse_bias, 1, true);
}

Metrics metrics(const Grid& pred, const Grid& gt, const Grid& mask) {
  Metrics r;
  double sq = 0.0, ab = 0.0, rel = 0.0;
  std::array<std::size_t, 4> hits{};
  for (std::size_t i = 0; i < gt.v.size(); ++i) {
    const double g = gt.v[i], p = pred.v[i];
    if (!(g > 0.0)) continue;
    if (!mask.v.empty() && mask.v[i] != 0.0) continue;
    sq += (p - g) * (p - g);
    ab += std::fabs(p - g);
    rel += std::fabs(p - g) / g;
    for (std::size_t t = 0; t < 4; ++t) {
      if (p > 0.0 && p / g < kDeltaThresholds[t] && g / p < kDeltaThresholds[t]) ++hits[t];
    }
    ++r.count;
  }
  if (r.count == 0) return r;
  const double n = static_cast<double>(r.count);
  r.rmse = std::sqrt(sq / n);
  r.mae = ab / n;
  r.rel = rel / n;
  for (std::size_t t = 0; t < 4; ++t) r.delta[t] = 100.0 * static_cast<double>(hits[t]) / n;
  return r;
}

Grid laplacian(const Grid& x, bool full) {
  auto val = [&](long y, long xx) {
    return inside(y, xx, x) ? x.at(static_cast<std::size_t>(y), static_cast<std::size_t>(xx), 0) : 0.0;
  };
  const std::size_t off = full ? 0 : 1;
  Grid out(full ? x.h : x.h - 2, full ? x.w : x.w - 2, 1);
  for (std::size_t oy = 0; oy < out.h; ++oy) {
    for (std::size_t ox = 0; ox < out.w; ++ox) {
      const long y = static_cast<long>(oy + off), xx = static_cast<long>(ox + off);
      out.at(oy, ox, 0) = val(y - 1, xx) + val(y + 1, xx) + val(y, xx - 1) + val(y, xx + 1) - 4.0 * val(y, xx);
    }
  }
  return out;
}

double mse(const Grid& a, const Grid& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.v.size(); ++i) s += (a.v[i] - b.v[i]) * (a.v[i] - b.v[i]);
  return s / static_cast<double>(a.v.size());
}

double sc(const Grid& pred, const Grid& gt, bool full) { return mse(laplacian(pred, full), laplacian(gt, full)); }

double central_difference(const std::function<double()>& f, Tensor& param, std::size_t index, double step) {
  auto values = param.mutable_values();
  const double original = values[index];
  values[index] = original + step;
  const double plus = f();
  values[index] = original - step;
  const double minus = f();
  values[index] = original;
  return (plus - minus) / (2.0 * step);
}

double relative_error(double a, double b, double floor) {
  return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), floor});
}

}  // namespace maga::oracle
