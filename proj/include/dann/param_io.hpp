#pragma once

#include <filesystem>

#include "dann/network.hpp"

namespace dann {

inline constexpr int kParamLayoutVersion = 1;

/// Writes `params` to `path`.
///
/// Default mode: `path` holds a JSON header (spec, layout version, count,
/// sidecar name) and `<path>.bin` holds the values as little-endian IEEE-754
/// doubles in layout order. Portable mode: a single JSON document with the
/// values inline.
void save_params(const std::filesystem::path& path, const ParamStore& params,
                 bool portable = false);

/// Reads either format. Throws DataError on malformed input or count
/// mismatch.
[[nodiscard]] ParamStore load_params(const std::filesystem::path& path);

}  // namespace dann
