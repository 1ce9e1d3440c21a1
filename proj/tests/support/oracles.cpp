#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

using scarecrow::BoundingBox;
using scarecrow::Detection;

namespace oracle {

long long covered_cells(double lo, double hi, int grid) {
  // centre (i + 0.5) / grid in [lo, hi)  <=>  lo*grid - 0.5 <= i < hi*grid - 0.5
  long long n = 0;
  const long long first = std::max<long long>(0, static_cast<long long>(std::ceil(lo * grid - 0.5)));
  for (long long i = std::max<long long>(0, first - 1); i < grid; ++i) {
    const double c = (i + 0.5) / grid;
    if (c >= hi) break;
    if (c >= lo) ++n;
  }
  return n;
}

double raster_iou(const BoundingBox& a, const BoundingBox& b, int grid) {
  const long long ax = covered_cells(a.xmin, a.xmax, grid), ay = covered_cells(a.ymin, a.ymax, grid);
  const long long bx = covered_cells(b.xmin, b.xmax, grid), by = covered_cells(b.ymin, b.ymax, grid);
  const double ilo_x = std::max(a.xmin, b.xmin), ihi_x = std::min(a.xmax, b.xmax);
  const double ilo_y = std::max(a.ymin, b.ymin), ihi_y = std::min(a.ymax, b.ymax);
  const long long ix = ihi_x > ilo_x ? covered_cells(ilo_x, ihi_x, grid) : 0;
  const long long iy = ihi_y > ilo_y ? covered_cells(ilo_y, ihi_y, grid) : 0;
  const long long inter = ix * iy;
  const long long uni = ax * ay + bx * by - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

double raster_iou_2d(const BoundingBox& a, const BoundingBox& b, int grid) {
  auto inside = [](const BoundingBox& r, double x, double y) {
    return x >= r.xmin && x < r.xmax && y >= r.ymin && y < r.ymax;
  };
  long long inter = 0, uni = 0;
  for (int j = 0; j < grid; ++j) {
    const double y = (j + 0.5) / grid;
    for (int i = 0; i < grid; ++i) {
      const double x = (i + 0.5) / grid;
      const bool ia = inside(a, x, y), ib = inside(b, x, y);
      inter += ia && ib;
      uni += ia || ib;
    }
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

double iou(const BoundingBox& a, const BoundingBox& b) {
  const double w = std::min(a.xmax, b.xmax) - std::max(a.xmin, b.xmin);
  const double h = std::min(a.ymax, b.ymax) - std::max(a.ymin, b.ymin);
  if (w <= 0 || h <= 0) return 0.0;
  const double i = w * h;
  return i / ((a.xmax - a.xmin) * (a.ymax - a.ymin) + (b.xmax - b.xmin) * (b.ymax - b.ymin) - i);
}

double raster_error_bound(const BoundingBox& a, const BoundingBox& b, int grid) {
  // Each axis count is within one cell of length*grid.
  const double g = grid;
  auto span = [&](double lo, double hi) {
    const double n = std::max(0.0, hi - lo) * g;
    return std::pair{std::max(0.0, n - 1.0), n + 1.0};
  };
  const auto [ax0, ax1] = span(a.xmin, a.xmax);
  const auto [ay0, ay1] = span(a.ymin, a.ymax);
  const auto [bx0, bx1] = span(b.xmin, b.xmax);
  const auto [by0, by1] = span(b.ymin, b.ymax);
  const double iw = std::min(a.xmax, b.xmax) - std::max(a.xmin, b.xmin);
  const double ih = std::min(a.ymax, b.ymax) - std::max(a.ymin, b.ymin);
  auto [ix0, ix1] = span(0.0, std::max(0.0, iw));
  auto [iy0, iy1] = span(0.0, std::max(0.0, ih));
  if (iw <= 0) ix0 = ix1 = 0;
  if (ih <= 0) iy0 = iy1 = 0;
  const double imin = ix0 * iy0, imax = ix1 * iy1;
  const double amin = ax0 * ay0, amax = ax1 * ay1, bmin = bx0 * by0, bmax = bx1 * by1;
  const double lo_den = amax + bmax - imin;
  const double hi_den = std::max(amin + bmin - imax, imax);
  const double lo = lo_den > 0 ? imin / lo_den : 0.0;
  const double hi = hi_den > 0 ? std::min(1.0, imax / hi_den) : 1.0;
  const double exact = oracle::iou(a, b);
  return std::max(exact - lo, hi - exact);
}

std::vector<Detection> nms(const std::vector<Detection>& dets, double thr, std::size_t top_k) {
  const std::size_t n = dets.size();
  // rank[i] = number of detections that outrank i
  std::vector<std::size_t> rank(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (dets[j].score > dets[i].score || (dets[j].score == dets[i].score && j < i)) ++rank[i];
    }
  }
  std::vector<std::size_t> by_rank(n);
  for (std::size_t i = 0; i < n; ++i) by_rank[rank[i]] = i;

  std::vector<char> alive(n, 0);
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t i = by_rank[r];
    bool ok = true;
    for (std::size_t q = 0; q < r && ok; ++q) {
      const std::size_t j = by_rank[q];
      if (alive[j] && dets[j].class_id == dets[i].class_id && oracle::iou(dets[i].box, dets[j].box) >= thr) {
        ok = false;
      }
    }
    alive[i] = ok;
  }
  std::vector<Detection> out;
  for (std::size_t r = 0; r < n && out.size() < top_k; ++r) {
    if (alive[by_rank[r]]) out.push_back(dets[by_rank[r]]);
  }
  return out;
}

std::vector<int> match_bruteforce(const std::vector<BoundingBox>& anchors,
                                  const std::vector<BoundingBox>& gts, double thr) {
  const int na = static_cast<int>(anchors.size());
  const int ng = static_cast<int>(gts.size());
  std::vector<int> result(na, -1);
  if (ng == 0) return result;

  using Triple = std::tuple<double, int, int>;  // (-iou, gt, anchor)
  std::vector<Triple> best;
  std::vector<int> best_assign;
  std::vector<int> assign(ng, -1);
  std::vector<char> used(na, 0);

  auto consider = [&] {
    std::vector<Triple> t;
    for (int g = 0; g < ng; ++g) t.emplace_back(-oracle::iou(gts[g], anchors[assign[g]]), g, assign[g]);
    std::sort(t.begin(), t.end());
    if (best.empty() || t < best) {
      best = t;
      best_assign = assign;
    }
  };
  auto recurse = [&](auto&& self, int g) -> void {
    if (g == ng) {
      consider();
      return;
    }
    for (int a = 0; a < na; ++a) {
      if (used[a]) continue;
      used[a] = 1;
      assign[g] = a;
      self(self, g + 1);
      used[a] = 0;
    }
  };
  recurse(recurse, 0);

  for (int g = 0; g < ng; ++g) result[best_assign[g]] = g;
  for (int a = 0; a < na; ++a) {
    if (result[a] >= 0) continue;
    int bg = -1;
    double bv = -1.0;
    for (int g = 0; g < ng; ++g) {
      const double v = oracle::iou(gts[g], anchors[a]);
      if (v > bv) {
        bv = v;
        bg = g;
      }
    }
    if (bv >= thr) result[a] = bg;
  }
  return result;
}

namespace {

int out_size(int in, int stride) { return (in + stride - 1) / stride; }

}  // namespace

std::vector<double> conv2d(const scarecrow::Tensor3& x, const std::vector<float>& w,
                           const std::vector<float>& bias, int k, int out_ch, int stride, int* oh,
                           int* ow) {
  const int H = out_size(x.height, stride), W = out_size(x.width, stride), C = x.channels;
  *oh = H;
  *ow = W;
  std::vector<double> y(static_cast<std::size_t>(H) * W * out_ch, 0.0);
  for (int o = 0; o < out_ch; ++o)
    for (int r = 0; r < H; ++r)
      for (int c = 0; c < W; ++c) {
        double s = bias.empty() ? 0.0 : bias[o];
        for (int ky = 0; ky < k; ++ky)
          for (int kx = 0; kx < k; ++kx)
            for (int i = 0; i < C; ++i) {
              const int yy = r * stride + ky - k / 2, xx = c * stride + kx - k / 2;
              if (yy < 0 || yy >= x.height || xx < 0 || xx >= x.width) continue;
              s += static_cast<double>(x.at(yy, xx, i)) *
                   w[((static_cast<std::size_t>(ky) * k + kx) * C + i) * out_ch + o];
            }
        y[(static_cast<std::size_t>(r) * W + c) * out_ch + o] = s;
      }
  return y;
}

std::vector<double> depthwise(const scarecrow::Tensor3& x, const std::vector<float>& w,
                              const std::vector<float>& bias, int k, int stride, int* oh, int* ow) {
  const int H = out_size(x.height, stride), W = out_size(x.width, stride), C = x.channels;
  *oh = H;
  *ow = W;
  std::vector<double> y(static_cast<std::size_t>(H) * W * C, 0.0);
  for (int ch = 0; ch < C; ++ch)
    for (int r = 0; r < H; ++r)
      for (int c = 0; c < W; ++c) {
        double s = bias.empty() ? 0.0 : bias[ch];
        for (int ky = 0; ky < k; ++ky)
          for (int kx = 0; kx < k; ++kx) {
            const int yy = r * stride + ky - k / 2, xx = c * stride + kx - k / 2;
            if (yy < 0 || yy >= x.height || xx < 0 || xx >= x.width) continue;
            s += static_cast<double>(x.at(yy, xx, ch)) *
                 w[(static_cast<std::size_t>(ky) * k + kx) * C + ch];
          }
        y[(static_cast<std::size_t>(r) * W + c) * C + ch] = s;
      }
  return y;
}

std::vector<double> pointwise(const scarecrow::Tensor3& x, const std::vector<float>& w,
                              const std::vector<float>& bias, int out_ch) {
  const int C = x.channels;
  std::vector<double> y(static_cast<std::size_t>(x.height) * x.width * out_ch);
  for (int r = 0; r < x.height; ++r)
    for (int c = 0; c < x.width; ++c)
      for (int o = 0; o < out_ch; ++o) {
        double s = bias.empty() ? 0.0 : bias[o];
        for (int i = 0; i < C; ++i) {
          s += static_cast<double>(x.at(r, c, i)) * w[static_cast<std::size_t>(i) * out_ch + o];
        }
        y[(static_cast<std::size_t>(r) * x.width + c) * out_ch + o] = s;
      }
  return y;
}

double average_precision(std::vector<std::pair<double, bool>> hits, std::size_t n_gt) {
  if (n_gt == 0) return 0.0;
  // (recall, precision) at every threshold equal to some observed score
  std::vector<double> thresholds;
  for (const auto& h : hits) thresholds.push_back(h.first);
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  std::vector<std::pair<double, double>> pr;
  for (double t : thresholds) {
    double tp = 0, n = 0;
    for (const auto& h : hits) {
      if (h.first >= t) {
        ++n;
        tp += h.second;
      }
    }
    pr.emplace_back(tp / n_gt, tp / n);
  }
  // area under the running-max precision envelope
  std::sort(pr.begin(), pr.end());
  double ap = 0.0, prev_r = 0.0;
  for (std::size_t i = 0; i < pr.size(); ++i) {
    double p_env = 0.0;
    for (std::size_t j = i; j < pr.size(); ++j) p_env = std::max(p_env, pr[j].second);
    ap += (pr[i].first - prev_r) * p_env;
    prev_r = pr[i].first;
  }
  return ap;
}

double cross_entropy(const std::vector<double>& logits, std::size_t k) {
  long double z = 0;
  for (double v : logits) z += std::exp(static_cast<long double>(v));
  return static_cast<double>(std::log(z) - logits[k]);
}

}  // namespace oracle
