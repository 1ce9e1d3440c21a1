#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace scarecrow {

class ShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense height x width x channels tensor, row-major, channel-minor.
struct Tensor3 {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<float> data;

  Tensor3() = default;
  Tensor3(int h, int w, int c, float fill = 0.0f);

  float& at(int y, int x, int c) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  float at(int y, int x, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  /// First channel of pixel (y, x).
  const float* pixel(int y, int x) const {
    return data.data() + (static_cast<std::size_t>(y) * width + x) * channels;
  }
  std::size_t size() const { return data.size(); }

  bool operator==(const Tensor3&) const = default;
};

/// Full convolution kernel, weights laid out [k][k][in][out].
struct ConvKernel {
  int k = 1;
  int in_ch = 0;
  int out_ch = 0;
  std::vector<float> weights;
  std::vector<float> bias;  // empty or out_ch

  float w(int ky, int kx, int i, int o) const {
    return weights[((static_cast<std::size_t>(ky) * k + kx) * in_ch + i) * out_ch + o];
  }
};

/// Per-channel spatial kernel, weights laid out [k][k][ch].
struct DepthwiseKernel {
  int k = 1;
  int channels = 0;
  std::vector<float> weights;
  std::vector<float> bias;  // empty or channels

  float w(int ky, int kx, int c) const {
    return weights[(static_cast<std::size_t>(ky) * k + kx) * channels + c];
  }
};

/// 1x1 channel mixing, weights laid out [in][out].
struct PointwiseWeights {
  int in_ch = 0;
  int out_ch = 0;
  std::vector<float> weights;
  std::vector<float> bias;  // empty or out_ch
};

/// Spatial output size of a padded convolution.
inline int conv_output_size(int in, int stride) { return (in + stride - 1) / stride; }

/// Cross-correlation with symmetric zero padding k/2; output is ceil(in/stride).
Tensor3 conv2d(const Tensor3& x, const ConvKernel& kernel, int stride);
Tensor3 depthwise_conv2d(const Tensor3& x, const DepthwiseKernel& kernel, int stride);
Tensor3 pointwise_conv(const Tensor3& x, const PointwiseWeights& w);
Tensor3 relu(Tensor3 x);

}  // namespace scarecrow
