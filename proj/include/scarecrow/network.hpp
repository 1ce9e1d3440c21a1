#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "scarecrow/geometry.hpp"
#include "scarecrow/image.hpp"
#include "scarecrow/multibox.hpp"
#include "scarecrow/tensor.hpp"

namespace scarecrow {

inline constexpr std::uint32_t kWeightsFormatVersion = 1;

enum class LayerKind : std::uint8_t {
  conv = 1,
  depthwise = 2,
  pointwise = 3,
  relu = 4,
  head = 5,
};

const char* to_string(LayerKind kind);

/// One entry of the layer chain. A head is a convolution whose output is
/// tapped as a prediction map; the chain continues from the head's input.
struct Layer {
  LayerKind kind = LayerKind::relu;
  int k = 1;
  int stride = 1;
  int in_ch = 0;
  int out_ch = 0;
  std::vector<float> weights;
  std::vector<float> bias;

  std::size_t weight_count() const;
  std::size_t bias_count() const;
};

class WeightsError : public std::runtime_error {
 public:
  enum class Code {
    io,
    bad_magic,
    version_mismatch,
    empty_network,
    truncated,
    bad_layer,
    channel_mismatch,
    trailing_bytes,
  };

  WeightsError(Code code, const std::string& msg, int layer = -1)
      : std::runtime_error(msg), code_(code), layer_(layer) {}
  Code code() const { return code_; }
  /// Offending layer index, or -1 when the error is not layer-specific.
  int layer() const { return layer_; }

 private:
  Code code_;
  int layer_;
};

/// An immutable layer chain with its weights.
class Network {
 public:
  /// Validates kinds, shapes and channel chaining; throws WeightsError.
  explicit Network(std::vector<Layer> layers);

  const std::vector<Layer>& layers() const { return layers_; }
  int input_channels() const { return layers_.front().in_ch; }
  std::size_t head_count() const;

  /// Runs the chain and returns each head's output in declaration order.
  std::vector<Tensor3> run(const Tensor3& input) const;

  /// Spatial size of each head's output for a square input.
  std::vector<int> head_grid_sizes(int input_size) const;

 private:
  std::vector<Layer> layers_;
};

Network parse_weights(std::span<const std::uint8_t> bytes);
Network load_weights(const std::string& path);
std::vector<std::uint8_t> serialize_weights(const Network& net);
void save_weights(const std::string& path, const Network& net);

/// The default desk-scale MobileNet-style layout with deterministic
/// pseudo-random weights drawn from `seed`.
Network synthesize_network(std::uint64_t seed, int num_classes,
                           const AnchorConfig& anchors = {});

/// A network bound to an anchor layout: heads become RawPredictions.
class TinyDetectorNet {
 public:
  /// Throws WeightsError if the heads do not line up with the anchor grids.
  TinyDetectorNet(Network net, AnchorConfig anchors);

  RawPredictions forward(const Image& img) const;

  const Network& network() const { return net_; }
  const AnchorConfig& anchor_config() const { return anchors_; }
  const AnchorSet& anchors() const { return anchor_set_; }
  int num_classes() const { return num_classes_; }
  int input_size() const { return anchors_.image_size; }

 private:
  Network net_;
  AnchorConfig anchors_;
  AnchorSet anchor_set_;
  int num_classes_ = 0;
};

}  // namespace scarecrow
