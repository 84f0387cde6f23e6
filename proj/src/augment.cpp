#include <cmath>

#include "smiley/model.hpp"

namespace smiley {
namespace {

void require_image(const Tensor& image, const char* op) {
  if (image.rank() != 3) {
    throw Error(ErrorCode::ShapeError, std::string(op) + ": expected h x w x c, got " +
                                           shape_string(image.shape()));
  }
}

}  // namespace

Tensor hflip(const Tensor& image) {
  require_image(image, "hflip");
  const std::size_t h = image.dim(0), w = image.dim(1), c = image.dim(2);
  Tensor out(image.shape());
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t col = 0; col < w; ++col) {
      for (std::size_t ch = 0; ch < c; ++ch) {
        out[(r * w + col) * c + ch] = image[(r * w + (w - 1 - col)) * c + ch];
      }
    }
  }
  return out;
}

Tensor resize_nearest(const Tensor& image, std::size_t out_h, std::size_t out_w) {
  require_image(image, "resize_nearest");
  const std::size_t h = image.dim(0), w = image.dim(1), c = image.dim(2);
  if (out_h == h && out_w == w) return image;
  Tensor out({out_h, out_w, c});
  for (std::size_t r = 0; r < out_h; ++r) {
    std::size_t sr = std::min(h - 1, static_cast<std::size_t>((r + 0.5) * h / out_h));
    for (std::size_t col = 0; col < out_w; ++col) {
      std::size_t sc = std::min(w - 1, static_cast<std::size_t>((col + 0.5) * w / out_w));
      for (std::size_t ch = 0; ch < c; ++ch) out[(r * out_w + col) * c + ch] = image[(sr * w + sc) * c + ch];
    }
  }
  return out;
}

Tensor crop(const Tensor& image, std::size_t top, std::size_t left, std::size_t out_h, std::size_t out_w) {
  require_image(image, "crop");
  const std::size_t h = image.dim(0), w = image.dim(1), c = image.dim(2);
  if (out_h == 0 || out_w == 0 || top + out_h > h || left + out_w > w) {
    throw Error(ErrorCode::AugmentError, "crop window exceeds " + shape_string(image.shape()));
  }
  Tensor out({out_h, out_w, c});
  for (std::size_t r = 0; r < out_h; ++r) {
    for (std::size_t col = 0; col < out_w; ++col) {
      for (std::size_t ch = 0; ch < c; ++ch) {
        out[(r * out_w + col) * c + ch] = image[((top + r) * w + left + col) * c + ch];
      }
    }
  }
  return out;
}

Tensor center_crop(const Tensor& image, std::size_t out_h, std::size_t out_w) {
  require_image(image, "center_crop");
  if (out_h > image.dim(0) || out_w > image.dim(1)) {
    throw Error(ErrorCode::AugmentError, "center crop larger than image");
  }
  return crop(image, (image.dim(0) - out_h) / 2, (image.dim(1) - out_w) / 2, out_h, out_w);
}

Tensor augment(const Tensor& image, const AugmentConfig& cfg, Pcg32& rng) {
  require_image(image, "augment");
  Tensor out = image;
  if (cfg.hflip && rng.uniform() < 0.5) out = hflip(out);
  if (cfg.crop) {
    const auto& cc = *cfg.crop;
    if (cc.out_height > image.dim(0) || cc.out_width > image.dim(1)) {
      throw Error(ErrorCode::AugmentError, "crop larger than input image");
    }
    if (!(cc.scale_min > 0.0) || cc.scale_max < cc.scale_min) {
      throw Error(ErrorCode::AugmentError, "invalid scale range");
    }
    const double scale = cc.scale_min == cc.scale_max ? cc.scale_min : rng.uniform(cc.scale_min, cc.scale_max);
    const auto nh = static_cast<std::size_t>(std::lround(image.dim(0) * scale));
    const auto nw = static_cast<std::size_t>(std::lround(image.dim(1) * scale));
    if (cc.out_height > nh || cc.out_width > nw) {
      throw Error(ErrorCode::AugmentError, "crop larger than scaled image");
    }
    out = resize_nearest(out, nh, nw);
    const std::size_t top = rng.bounded(static_cast<std::uint32_t>(nh - cc.out_height + 1));
    const std::size_t left = rng.bounded(static_cast<std::uint32_t>(nw - cc.out_width + 1));
    out = crop(out, top, left, cc.out_height, cc.out_width);
  }
  return out;
}

}  // namespace smiley
