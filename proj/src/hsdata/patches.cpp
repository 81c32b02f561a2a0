#include <algorithm>

#include "s5dscr/hsdata.hpp"

namespace s5dscr::hsdata {

std::vector<std::size_t> window_offsets(std::size_t extent, std::size_t size, std::size_t stride) {
  S5DSCR_CHECK(size >= 1 && size <= extent, ErrorCode::InvalidArgument, "window larger than extent");
  S5DSCR_CHECK(stride >= 1, ErrorCode::InvalidArgument, "stride must be >= 1");
  std::vector<std::size_t> offs;
  std::size_t p = 0;
  for (; p + size <= extent; p += stride) offs.push_back(p);
  if (offs.back() + size < extent) offs.push_back(extent - size);
  return offs;
}

std::vector<PatchPair> patchify(const Cube& hr, const Cube& lr, const PatchOptions& opt, std::size_t tile_id) {
  S5DSCR_CHECK(hr.channels == lr.channels, ErrorCode::ShapeMismatch, "HR and LR channel counts differ");
  S5DSCR_CHECK(lr.height > 0 && lr.width > 0 && hr.height % lr.height == 0, ErrorCode::ShapeMismatch,
               "HR height is not a multiple of LR height");
  const std::size_t s = hr.height / lr.height;
  S5DSCR_CHECK(s >= 1 && hr.width == s * lr.width, ErrorCode::ShapeMismatch,
               "HR dims are not a uniform multiple of LR dims");
  S5DSCR_CHECK(opt.hr_size == s * opt.lr_size, ErrorCode::InvalidArgument,
               "hr_size must equal scale * lr_size");
  S5DSCR_CHECK(opt.lr_stride >= 1 && opt.lr_stride <= opt.lr_size, ErrorCode::InvalidArgument,
               "lr_stride must be in [1, lr_size] so windows cover the tile");

  const std::size_t ph = std::min(opt.lr_size, lr.height);
  const std::size_t pw = std::min(opt.lr_size, lr.width);
  const auto rows = window_offsets(lr.height, ph, opt.lr_stride);
  const auto cols = window_offsets(lr.width, pw, opt.lr_stride);

  std::vector<PatchPair> out;
  out.reserve(rows.size() * cols.size());
  for (std::size_t r : rows)
    for (std::size_t c : cols)
      out.push_back({lr.crop(r, c, ph, pw), hr.crop(r * s, c * s, ph * s, pw * s), tile_id, r, c});
  return out;
}

}  // namespace s5dscr::hsdata
