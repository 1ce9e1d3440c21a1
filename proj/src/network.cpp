#include <cmath>
#include <random>

#include "scarecrow/network.hpp"

namespace scarecrow {

const char* to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::conv: return "conv";
    case LayerKind::depthwise: return "depthwise";
    case LayerKind::pointwise: return "pointwise";
    case LayerKind::relu: return "relu";
    case LayerKind::head: return "head";
  }
  return "unknown";
}

std::size_t Layer::weight_count() const {
  const auto kk = static_cast<std::size_t>(k) * static_cast<std::size_t>(k);
  switch (kind) {
    case LayerKind::conv:
    case LayerKind::head: return kk * in_ch * out_ch;
    case LayerKind::depthwise: return kk * in_ch;
    case LayerKind::pointwise: return static_cast<std::size_t>(in_ch) * out_ch;
    case LayerKind::relu: return 0;
  }
  return 0;
}

std::size_t Layer::bias_count() const {
  switch (kind) {
    case LayerKind::conv:
    case LayerKind::head:
    case LayerKind::pointwise: return static_cast<std::size_t>(out_ch);
    case LayerKind::depthwise:
    case LayerKind::relu: return 0;
  }
  return 0;
}

namespace {

[[noreturn]] void bad_layer(std::size_t i, const std::string& why) {
  throw WeightsError(WeightsError::Code::bad_layer,
                     "weights: layer " + std::to_string(i) + ": " + why, static_cast<int>(i));
}

ConvKernel as_conv(const Layer& l) { return {l.k, l.in_ch, l.out_ch, l.weights, l.bias}; }

}  // namespace

Network::Network(std::vector<Layer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) {
    throw WeightsError(WeightsError::Code::empty_network, "weights: network has no layers");
  }
  int channels = layers_.front().in_ch;
  if (channels < 1) bad_layer(0, "input channels must be >= 1");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const Layer& l = layers_[i];
    if (l.in_ch < 1 || l.out_ch < 1) bad_layer(i, "channel counts must be >= 1");
    if (l.k < 1 || l.k % 2 == 0) bad_layer(i, "kernel size must be odd");
    if (l.stride < 1) bad_layer(i, "stride must be >= 1");
    switch (l.kind) {
      case LayerKind::depthwise:
        if (l.in_ch != l.out_ch) bad_layer(i, "depthwise layer must keep its channel count");
        break;
      case LayerKind::pointwise:
        if (l.k != 1 || l.stride != 1) bad_layer(i, "pointwise layer needs k=1, stride=1");
        break;
      case LayerKind::relu:
        if (l.k != 1 || l.stride != 1 || l.in_ch != l.out_ch) {
          bad_layer(i, "relu layer needs k=1, stride=1, in_ch == out_ch");
        }
        break;
      case LayerKind::head:
        if (l.stride != 1) bad_layer(i, "head layer needs stride 1");
        break;
      case LayerKind::conv: break;
    }
    if (l.weights.size() != l.weight_count() || l.bias.size() != l.bias_count()) {
      bad_layer(i, "parameter count does not match the declared shape");
    }
    if (l.in_ch != channels) {
      throw WeightsError(WeightsError::Code::channel_mismatch,
                         "weights: layer " + std::to_string(i) + " (" + to_string(l.kind) +
                             ") expects " + std::to_string(l.in_ch) + " channels but receives " +
                             std::to_string(channels),
                         static_cast<int>(i));
    }
    if (l.kind != LayerKind::head) channels = l.out_ch;
  }
}

std::size_t Network::head_count() const {
  std::size_t n = 0;
  for (const Layer& l : layers_) n += l.kind == LayerKind::head;
  return n;
}

std::vector<Tensor3> Network::run(const Tensor3& input) const {
  if (input.channels != input_channels()) {
    throw ShapeError("network expects " + std::to_string(input_channels()) +
                     " input channels, got " + std::to_string(input.channels));
  }
  std::vector<Tensor3> heads;
  Tensor3 x = input;
  for (const Layer& l : layers_) {
    switch (l.kind) {
      case LayerKind::conv: x = conv2d(x, as_conv(l), l.stride); break;
      case LayerKind::depthwise:
        x = depthwise_conv2d(x, DepthwiseKernel{l.k, l.in_ch, l.weights, l.bias}, l.stride);
        break;
      case LayerKind::pointwise:
        x = pointwise_conv(x, PointwiseWeights{l.in_ch, l.out_ch, l.weights, l.bias});
        break;
      case LayerKind::relu: x = relu(std::move(x)); break;
      case LayerKind::head: heads.push_back(conv2d(x, as_conv(l), 1)); break;
    }
  }
  return heads;
}

std::vector<int> Network::head_grid_sizes(int input_size) const {
  std::vector<int> sizes;
  int s = input_size;
  for (const Layer& l : layers_) {
    if (l.kind == LayerKind::head) {
      sizes.push_back(s);
    } else {
      s = conv_output_size(s, l.stride);
    }
  }
  return sizes;
}

Network synthesize_network(std::uint64_t seed, int num_classes, const AnchorConfig& anchors) {
  std::mt19937_64 gen(seed);
  // Top 24 bits of each draw, mapped to [-1, 1).
  auto uniform = [&gen]() {
    return static_cast<float>(static_cast<double>(gen() >> 40) * 0x1.0p-23 - 1.0);
  };
  auto fill = [&](Layer& l, double fan_in, double gain) {
    const auto amp = static_cast<float>(gain * std::sqrt(6.0 / fan_in));
    l.weights.resize(l.weight_count());
    for (float& w : l.weights) w = amp * uniform();
    l.bias.resize(l.bias_count());
    for (float& b : l.bias) b = 0.01f * uniform();
  };

  std::vector<Layer> layers;
  int ch = 3;
  auto add_relu = [&] { layers.push_back({LayerKind::relu, 1, 1, ch, ch, {}, {}}); };
  auto add_conv = [&](int k, int stride, int out) {
    Layer l{LayerKind::conv, k, stride, ch, out, {}, {}};
    fill(l, k * k * ch, 1.0);
    layers.push_back(std::move(l));
    ch = out;
    add_relu();
  };
  auto add_block = [&](int stride, int out) {
    Layer dw{LayerKind::depthwise, 3, stride, ch, ch, {}, {}};
    fill(dw, 9, 1.0);
    layers.push_back(std::move(dw));
    add_relu();
    Layer pw{LayerKind::pointwise, 1, 1, ch, out, {}, {}};
    fill(pw, ch, 1.0);
    layers.push_back(std::move(pw));
    ch = out;
    add_relu();
  };
  const int head_out = static_cast<int>(anchors.boxes_per_cell()) * (5 + num_classes);
  auto add_head = [&] {
    Layer h{LayerKind::head, 3, 1, ch, head_out, {}, {}};
    fill(h, 9 * ch, 0.25);
    layers.push_back(std::move(h));
  };

  add_conv(3, 2, 16);   // 160 -> 80
  add_block(2, 32);     // 40
  add_block(1, 32);     // 40
  add_block(2, 64);     // 20
  add_block(2, 64);     // 10
  add_head();
  add_block(2, 64);     // 5
  add_head();
  return Network(std::move(layers));
}

TinyDetectorNet::TinyDetectorNet(Network net, AnchorConfig anchors)
    : net_(std::move(net)), anchors_(std::move(anchors)) {
  using Code = WeightsError::Code;
  anchors_.validate();
  if (net_.input_channels() != 3) {
    throw WeightsError(Code::channel_mismatch, "weights: network must take 3 input channels");
  }
  const std::vector<int> grids = net_.head_grid_sizes(anchors_.image_size);
  if (grids != anchors_.feature_map_sizes) {
    throw WeightsError(Code::bad_layer,
                       "weights: head grid sizes do not match the anchor feature maps");
  }
  const auto b = static_cast<int>(anchors_.boxes_per_cell());
  for (const Layer& l : net_.layers()) {
    if (l.kind != LayerKind::head) continue;
    if (l.out_ch % b != 0 || l.out_ch / b < 6) {
      throw WeightsError(Code::bad_layer, "weights: head width " + std::to_string(l.out_ch) +
                                              " is not a multiple of (5 + classes) * " +
                                              std::to_string(b));
    }
    const int c = l.out_ch / b - 5;
    if (num_classes_ != 0 && c != num_classes_) {
      throw WeightsError(Code::bad_layer, "weights: heads disagree on the class count");
    }
    num_classes_ = c;
  }
  anchor_set_ = generate_anchors(anchors_);
}

RawPredictions TinyDetectorNet::forward(const Image& img) const {
  if (img.width != anchors_.image_size || img.height != anchors_.image_size) {
    throw ShapeError("forward: image must be " + std::to_string(anchors_.image_size) + "x" +
                     std::to_string(anchors_.image_size));
  }
  const std::vector<Tensor3> heads = net_.run(to_tensor(img));
  const int b = static_cast<int>(anchors_.boxes_per_cell());
  const int per_box = 5 + num_classes_;

  RawPredictions raw = RawPredictions::zeros(anchor_set_.size(), num_classes_);
  std::size_t a = 0;
  for (const Tensor3& h : heads) {
    for (int i = 0; i < h.height; ++i) {
      for (int j = 0; j < h.width; ++j) {
        for (int r = 0; r < b; ++r, ++a) {
          const float* v = h.pixel(i, j) + r * per_box;
          raw.offsets[a] = {v[0], v[1], v[2], v[3]};
          auto logits = raw.logits(a);
          for (int c = 0; c <= num_classes_; ++c) logits[c] = v[4 + c];
        }
      }
    }
  }
  return raw;
}

}  // namespace scarecrow
