#pragma once

#include <cstdint>
#include <vector>

#include "scarecrow/multibox.hpp"

namespace fixture {

inline constexpr std::uint64_t kGoldenSeed = 42;
inline constexpr int kGoldenImageSize = 160;

/// Offsets (tx,ty,tw,th per anchor) followed by the score table, as doubles.
inline std::vector<double> flatten(const scarecrow::RawPredictions& p) {
  std::vector<double> v;
  v.reserve(p.offsets.size() * 4 + p.scores.size());
  for (const auto& o : p.offsets) {
    v.push_back(o.tx);
    v.push_back(o.ty);
    v.push_back(o.tw);
    v.push_back(o.th);
  }
  v.insert(v.end(), p.scores.begin(), p.scores.end());
  return v;
}

}  // namespace fixture
