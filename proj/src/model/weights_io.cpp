#include <algorithm>
#include <array>
#include <cmath>

#include "weights_codec.hpp"

namespace s5dscr::model {
namespace {

constexpr std::array<char, 4> kMagic{'D', 'S', 'C', 'W'};
constexpr std::uint32_t kShareFlag = 1u << 0;
constexpr std::uint32_t kFinalLinearFlag = 1u << 1;

}  // namespace

namespace detail {

void encode_weights(const ModelWeights& weights, s5dscr::detail::ByteWriter& out) {
  const ModelConfig& c = weights.config;
  c.validate();
  S5DSCR_CHECK(weights.numel() == param_count(c), ErrorCode::ShapeMismatch, "weights do not match their config");
  out.reserve(out.bytes().size() + 32 + 4 * weights.numel());
  out.put_bytes(kMagic.data(), kMagic.size());
  out.put<std::uint16_t>(kWeightFormatVersion);
  for (std::size_t v : {c.channels, c.n_modules, c.dw_kernel, c.pointwise_per_module, c.scale})
    out.put<std::uint32_t>(static_cast<std::uint32_t>(v));
  out.put<std::uint32_t>((c.share_module_weights ? kShareFlag : 0u) | (c.final_linear ? kFinalLinearFlag : 0u));
  for (const auto* t : weights.parameters())
    for (float v : t->span()) out.put<float>(v);
}

ModelWeights decode_weights(s5dscr::detail::ByteReader& in, std::optional<std::size_t> expected_channels) {
  S5DSCR_CHECK(in.remaining() >= 4 && std::equal(kMagic.begin(), kMagic.end(), in.cursor()), ErrorCode::Corrupt,
               "not a DSCW weight record");
  in.skip(4);
  const auto version = in.get<std::uint16_t>();
  S5DSCR_CHECK(version == kWeightFormatVersion, ErrorCode::VersionMismatch,
               "unsupported weight file version " + std::to_string(version));
  ModelConfig c;
  c.channels = in.get<std::uint32_t>();
  c.n_modules = in.get<std::uint32_t>();
  c.dw_kernel = in.get<std::uint32_t>();
  c.pointwise_per_module = in.get<std::uint32_t>();
  c.scale = in.get<std::uint32_t>();
  const auto flags = in.get<std::uint32_t>();
  S5DSCR_CHECK((flags & ~(kShareFlag | kFinalLinearFlag)) == 0, ErrorCode::Corrupt, "unknown flag bits");
  c.share_module_weights = (flags & kShareFlag) != 0;
  c.final_linear = (flags & kFinalLinearFlag) != 0;
  try {
    c.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::Corrupt, std::string("invalid config block: ") + e.what());
  }
  if (expected_channels)
    S5DSCR_CHECK(*expected_channels == c.channels, ErrorCode::ShapeMismatch,
                 "weights are for " + std::to_string(c.channels) + " channels, pipeline has " +
                     std::to_string(*expected_channels));

  S5DSCR_CHECK(in.remaining() >= 4 * param_count(c), ErrorCode::Corrupt,
               "payload holds " + std::to_string(in.remaining()) + " bytes, config needs " +
                   std::to_string(4 * param_count(c)));
  auto w = zero_weights<float>(c);
  for (auto* t : w.parameters())
    for (auto& v : t->span()) {
      v = in.get<float>();
      S5DSCR_CHECK(std::isfinite(v), ErrorCode::Corrupt, "non-finite weight");
    }
  return w;
}

}  // namespace detail

void save_weights(const ModelWeights& weights, const std::filesystem::path& path) {
  s5dscr::detail::ByteWriter out;
  detail::encode_weights(weights, out);
  out.write_file(path);
}

ModelWeights load_weights(const std::filesystem::path& path, std::optional<std::size_t> expected_channels) {
  s5dscr::detail::ByteReader in(s5dscr::detail::ByteReader::slurp(path), ErrorCode::Corrupt);
  auto w = detail::decode_weights(in, expected_channels);
  S5DSCR_CHECK(in.remaining() == 0, ErrorCode::Corrupt, "trailing bytes after weights in " + path.string());
  return w;
}

}  // namespace s5dscr::model
