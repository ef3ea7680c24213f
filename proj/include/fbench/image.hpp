#pragma once
// RGB byte images, area resampling and the 224x224 policy preprocessing.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace fbench {

struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  // row-major RGB

  Image() = default;
  Image(int w, int h, std::uint8_t fill = 0) : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, fill) {}

  std::uint8_t& at(int x, int y, int c) { return data[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
  std::uint8_t at(int x, int y, int c) const { return data[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }

  bool operator==(const Image&) const = default;
};

namespace detail {

// Source-pixel coverage of each destination pixel along one axis.
struct Span {
  int first = 0;
  std::vector<double> weights;
};

inline std::vector<Span> area_spans(int src, int dst) {
  std::vector<Span> spans(dst);
  const double scale = static_cast<double>(src) / dst;
  for (int i = 0; i < dst; ++i) {
    const double lo = i * scale, hi = (i + 1) * scale;
    const int a = static_cast<int>(std::floor(lo));
    const int b = std::min(src, static_cast<int>(std::ceil(hi)));
    spans[i].first = a;
    for (int s = a; s < b; ++s) spans[i].weights.push_back(std::min<double>(hi, s + 1) - std::max<double>(lo, s));
  }
  return spans;
}

}  // namespace detail

/// Box-filter (area-averaging) resize with fractional pixel overlap.
inline Image resize_area(const Image& src, int w, int h) {
  if (w <= 0 || h <= 0) throw std::invalid_argument("resize target must be positive");
  if (w == src.width && h == src.height) return src;
  const auto xs = detail::area_spans(src.width, w);
  const auto ys = detail::area_spans(src.height, h);
  Image out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc[3] = {0, 0, 0}, total = 0;
      for (std::size_t j = 0; j < ys[y].weights.size(); ++j) {
        for (std::size_t i = 0; i < xs[x].weights.size(); ++i) {
          const double wgt = ys[y].weights[j] * xs[x].weights[i];
          const int sx = xs[x].first + static_cast<int>(i), sy = ys[y].first + static_cast<int>(j);
          for (int c = 0; c < 3; ++c) acc[c] += wgt * src.at(sx, sy, c);
          total += wgt;
        }
      }
      for (int c = 0; c < 3; ++c)
        out.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(std::lround(acc[c] / total), 0L, 255L));
    }
  }
  return out;
}

inline Image center_crop(const Image& src, int w, int h) {
  if (w > src.width || h > src.height) throw std::invalid_argument("crop larger than image");
  const int x0 = (src.width - w) / 2, y0 = (src.height - h) / 2;
  Image out(w, h);
  for (int y = 0; y < h; ++y)
    std::copy_n(&src.data[(static_cast<std::size_t>(y0 + y) * src.width + x0) * 3], static_cast<std::size_t>(w) * 3,
                &out.data[static_cast<std::size_t>(y) * w * 3]);
  return out;
}

enum class ImageRole { Front, Wrist };

inline constexpr int kPolicyImageSize = 224;
inline constexpr int kFrontShortEdge = 256;

/// Size after the aspect-preserving resize that makes the short edge 256.
inline std::pair<int, int> front_intermediate_size(int w, int h) {
  if (w >= h) return {static_cast<int>(std::lround(static_cast<double>(w) * kFrontShortEdge / h)), kFrontShortEdge};
  return {kFrontShortEdge, static_cast<int>(std::lround(static_cast<double>(h) * kFrontShortEdge / w))};
}

inline Image preprocess_image(const Image& img, ImageRole role) {
  if (img.width < kPolicyImageSize || img.height < kPolicyImageSize)
    throw std::invalid_argument("image smaller than 224x224: " + std::to_string(img.width) + "x" +
                                std::to_string(img.height));
  if (img.data.size() != static_cast<std::size_t>(img.width) * img.height * 3)
    throw std::invalid_argument("image buffer does not match its dimensions");
  if (role == ImageRole::Wrist) return resize_area(img, kPolicyImageSize, kPolicyImageSize);
  const auto [w, h] = front_intermediate_size(img.width, img.height);
  return center_crop(resize_area(img, w, h), kPolicyImageSize, kPolicyImageSize);
}

}  // namespace fbench
