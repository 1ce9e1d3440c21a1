#include "scarecrow/tensor.hpp"

#include <algorithm>
#include <string>

namespace scarecrow {

Tensor3::Tensor3(int h, int w, int c, float fill) : height(h), width(w), channels(c) {
  if (h < 1 || w < 1 || c < 1) {
    throw ShapeError("tensor dimensions must be >= 1, got " + std::to_string(h) + "x" +
                     std::to_string(w) + "x" + std::to_string(c));
  }
  data.assign(static_cast<std::size_t>(h) * w * c, fill);
}

namespace {

void check_kernel(int k, int stride) {
  if (k < 1 || k % 2 == 0) throw ShapeError("kernel size must be odd, got " + std::to_string(k));
  if (stride < 1) throw ShapeError("stride must be >= 1");
}

void check_bias(const std::vector<float>& bias, int n, const char* what) {
  if (!bias.empty() && static_cast<int>(bias.size()) != n) {
    throw ShapeError(std::string(what) + ": bias length does not match output channels");
  }
}

}  // namespace

Tensor3 conv2d(const Tensor3& x, const ConvKernel& kernel, int stride) {
  check_kernel(kernel.k, stride);
  if (kernel.in_ch != x.channels) {
    throw ShapeError("conv2d: kernel expects " + std::to_string(kernel.in_ch) +
                     " input channels, tensor has " + std::to_string(x.channels));
  }
  if (kernel.weights.size() !=
      static_cast<std::size_t>(kernel.k) * kernel.k * kernel.in_ch * kernel.out_ch) {
    throw ShapeError("conv2d: weight count does not match kernel shape");
  }
  check_bias(kernel.bias, kernel.out_ch, "conv2d");

  const int k = kernel.k;
  const int pad = k / 2;
  const int oh = conv_output_size(x.height, stride);
  const int ow = conv_output_size(x.width, stride);
  const int in_ch = kernel.in_ch;
  const int out_ch = kernel.out_ch;
  Tensor3 y(oh, ow, out_ch);

  for (int oy = 0; oy < oh; ++oy) {
    for (int ox = 0; ox < ow; ++ox) {
      float* out = &y.at(oy, ox, 0);
      if (!kernel.bias.empty()) std::copy(kernel.bias.begin(), kernel.bias.end(), out);
      for (int ky = 0; ky < k; ++ky) {
        const int iy = oy * stride + ky - pad;
        if (iy < 0 || iy >= x.height) continue;
        for (int kx = 0; kx < k; ++kx) {
          const int ix = ox * stride + kx - pad;
          if (ix < 0 || ix >= x.width) continue;
          const float* in = x.pixel(iy, ix);
          const float* wrow =
              &kernel.weights[(static_cast<std::size_t>(ky) * k + kx) * in_ch * out_ch];
          for (int i = 0; i < in_ch; ++i) {
            const float v = in[i];
            const float* wi = wrow + static_cast<std::size_t>(i) * out_ch;
            for (int o = 0; o < out_ch; ++o) out[o] += v * wi[o];
          }
        }
      }
    }
  }
  return y;
}

Tensor3 depthwise_conv2d(const Tensor3& x, const DepthwiseKernel& kernel, int stride) {
  check_kernel(kernel.k, stride);
  if (kernel.channels != x.channels) {
    throw ShapeError("depthwise_conv2d: kernel has " + std::to_string(kernel.channels) +
                     " channels, tensor has " + std::to_string(x.channels));
  }
  if (kernel.weights.size() != static_cast<std::size_t>(kernel.k) * kernel.k * kernel.channels) {
    throw ShapeError("depthwise_conv2d: weight count does not match kernel shape");
  }
  check_bias(kernel.bias, kernel.channels, "depthwise_conv2d");

  const int k = kernel.k;
  const int pad = k / 2;
  const int ch = kernel.channels;
  Tensor3 y(conv_output_size(x.height, stride), conv_output_size(x.width, stride), ch);
  for (int oy = 0; oy < y.height; ++oy) {
    for (int ox = 0; ox < y.width; ++ox) {
      float* out = &y.at(oy, ox, 0);
      if (!kernel.bias.empty()) std::copy(kernel.bias.begin(), kernel.bias.end(), out);
      for (int ky = 0; ky < k; ++ky) {
        const int iy = oy * stride + ky - pad;
        if (iy < 0 || iy >= x.height) continue;
        for (int kx = 0; kx < k; ++kx) {
          const int ix = ox * stride + kx - pad;
          if (ix < 0 || ix >= x.width) continue;
          const float* in = x.pixel(iy, ix);
          const float* wk = &kernel.weights[(static_cast<std::size_t>(ky) * k + kx) * ch];
          for (int c = 0; c < ch; ++c) out[c] += in[c] * wk[c];
        }
      }
    }
  }
  return y;
}

Tensor3 pointwise_conv(const Tensor3& x, const PointwiseWeights& w) {
  if (w.in_ch != x.channels) {
    throw ShapeError("pointwise_conv: weights expect " + std::to_string(w.in_ch) +
                     " input channels, tensor has " + std::to_string(x.channels));
  }
  if (w.weights.size() != static_cast<std::size_t>(w.in_ch) * w.out_ch) {
    throw ShapeError("pointwise_conv: weight count does not match [in][out]");
  }
  check_bias(w.bias, w.out_ch, "pointwise_conv");

  Tensor3 y(x.height, x.width, w.out_ch);
  const std::size_t pixels = static_cast<std::size_t>(x.height) * x.width;
  for (std::size_t p = 0; p < pixels; ++p) {
    const float* in = &x.data[p * x.channels];
    float* out = &y.data[p * w.out_ch];
    if (!w.bias.empty()) std::copy(w.bias.begin(), w.bias.end(), out);
    for (int i = 0; i < w.in_ch; ++i) {
      const float v = in[i];
      const float* wi = &w.weights[static_cast<std::size_t>(i) * w.out_ch];
      for (int o = 0; o < w.out_ch; ++o) out[o] += v * wi[o];
    }
  }
  return y;
}

Tensor3 relu(Tensor3 x) {
  for (float& v : x.data) v = std::max(v, 0.0f);
  return x;
}

}  // namespace scarecrow
