#pragma once

#include "../binio.hpp"
#include "s5dscr/model.hpp"

namespace s5dscr::model::detail {

void encode_weights(const ModelWeights& weights, s5dscr::detail::ByteWriter& out);

/// Reads a full DSCW record, leaving the reader after the last tensor.
ModelWeights decode_weights(s5dscr::detail::ByteReader& in, std::optional<std::size_t> expected_channels);

}  // namespace s5dscr::model::detail
