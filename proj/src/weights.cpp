// SCRW1 weights file reader/writer. Layout is documented in docs/weights-format.md.

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "scarecrow/network.hpp"

namespace scarecrow {

namespace {

constexpr char kMagic[4] = {'S', 'C', 'R', 'W'};
constexpr std::size_t kHeaderBytes = 12;
constexpr std::size_t kLayerHeaderBytes = 9;

static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559);

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  bool has(std::size_t n) const { return bytes_.size() - pos_ >= n; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

  std::uint8_t u8() { return bytes_[pos_++]; }
  std::uint16_t u16() {
    std::uint16_t v = static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | bytes_[pos_ + i];
    pos_ += 4;
    return v;
  }
  void floats(std::vector<float>& out, std::size_t n) {
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = std::bit_cast<float>(u32());
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

std::uint16_t narrow16(int v, const char* field) {
  if (v < 0 || v > 0xffff) {
    throw WeightsError(WeightsError::Code::bad_layer, std::string(field) + " does not fit in u16");
  }
  return static_cast<std::uint16_t>(v);
}

}  // namespace

Network parse_weights(std::span<const std::uint8_t> bytes) {
  using Code = WeightsError::Code;
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw WeightsError(Code::bad_magic, "weights: missing SCRW magic");
  }
  Reader rd(bytes.subspan(4));
  if (!rd.has(kHeaderBytes - 4)) throw WeightsError(Code::truncated, "weights: truncated header");
  const std::uint32_t version = rd.u32();
  if (version != kWeightsFormatVersion) {
    throw WeightsError(Code::version_mismatch,
                       "weights: format version " + std::to_string(version) + ", expected " +
                           std::to_string(kWeightsFormatVersion));
  }
  const std::uint32_t count = rd.u32();
  if (count == 0) throw WeightsError(Code::empty_network, "weights: network has no layers");

  std::vector<Layer> layers;
  for (std::uint32_t i = 0; i < count; ++i) {
    const int idx = static_cast<int>(i);
    if (!rd.has(kLayerHeaderBytes)) {
      throw WeightsError(Code::truncated,
                         "weights: truncated header of layer " + std::to_string(i), idx);
    }
    Layer layer;
    const std::uint8_t kind = rd.u8();
    if (kind < 1 || kind > 5) {
      throw WeightsError(Code::bad_layer,
                         "weights: layer " + std::to_string(i) + " has unknown kind " +
                             std::to_string(kind),
                         idx);
    }
    layer.kind = static_cast<LayerKind>(kind);
    layer.k = rd.u16();
    layer.stride = rd.u16();
    layer.in_ch = rd.u16();
    layer.out_ch = rd.u16();
    const std::size_t nw = layer.weight_count();
    const std::size_t nb = layer.bias_count();
    if (rd.remaining() / 4 < nw + nb) {
      throw WeightsError(Code::truncated,
                         "weights: payload of layer " + std::to_string(i) + " (" +
                             to_string(layer.kind) + ") is truncated",
                         idx);
    }
    rd.floats(layer.weights, nw);
    rd.floats(layer.bias, nb);
    layers.push_back(std::move(layer));
  }
  if (rd.remaining() != 0) {
    throw WeightsError(Code::trailing_bytes, "weights: " + std::to_string(rd.remaining()) +
                                                 " unexpected bytes after the last layer");
  }
  return Network(std::move(layers));
}

Network load_weights(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw WeightsError(WeightsError::Code::io, "weights: cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return parse_weights(bytes);
}

std::vector<std::uint8_t> serialize_weights(const Network& net) {
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put_u32(out, kWeightsFormatVersion);
  put_u32(out, static_cast<std::uint32_t>(net.layers().size()));
  for (const Layer& l : net.layers()) {
    out.push_back(static_cast<std::uint8_t>(l.kind));
    put_u16(out, narrow16(l.k, "k"));
    put_u16(out, narrow16(l.stride, "stride"));
    put_u16(out, narrow16(l.in_ch, "in_ch"));
    put_u16(out, narrow16(l.out_ch, "out_ch"));
    for (float w : l.weights) put_u32(out, std::bit_cast<std::uint32_t>(w));
    for (float b : l.bias) put_u32(out, std::bit_cast<std::uint32_t>(b));
  }
  return out;
}

void save_weights(const std::string& path, const Network& net) {
  const auto bytes = serialize_weights(net);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw WeightsError(WeightsError::Code::io, "weights: cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace scarecrow
