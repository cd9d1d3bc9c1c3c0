#include "dann/param_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <fmt/format.h>

#include "dann/errors.hpp"

namespace dann {

namespace {

constexpr const char* kFormatName = "dann-params";

std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t out = 0;
    for (int i = 0; i < 8; ++i) out |= ((v >> (8 * i)) & 0xffU) << (8 * (7 - i));
    return out;
  }
  return v;
}

}  // namespace

void save_params(const std::filesystem::path& path, const ParamStore& params, bool portable) {
  nlohmann::json header;
  header["format"] = kFormatName;
  header["layout_version"] = kParamLayoutVersion;
  header["spec"] = params.spec();
  header["count"] = params.size();

  if (portable) {
    header["encoding"] = "json";
    header["values"] = std::vector<double>(params.values().begin(), params.values().end());
  } else {
    auto sidecar = path;
    sidecar += ".bin";
    header["encoding"] = "f64le";
    header["data_file"] = sidecar.filename().string();

    std::ofstream bin(sidecar, std::ios::binary);
    if (!bin) throw DataError(fmt::format("cannot write {}", sidecar.string()));
    for (const double v : params.values()) {
      const auto bits = to_little_endian(std::bit_cast<std::uint64_t>(v));
      bin.write(reinterpret_cast<const char*>(&bits), sizeof bits);
    }
    if (!bin) throw DataError(fmt::format("write failed for {}", sidecar.string()));
  }

  std::ofstream out(path);
  if (!out) throw DataError(fmt::format("cannot write {}", path.string()));
  out << header.dump(2) << '\n';
}

ParamStore load_params(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open {}", path.string()));
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(fmt::format("{}: {}", path.string(), e.what()));
  }

  try {
    if (header.at("format") != kFormatName)
      throw DataError(fmt::format("{}: not a parameter file", path.string()));
    if (header.at("layout_version").get<int>() != kParamLayoutVersion)
      throw DataError(fmt::format("{}: unsupported layout version", path.string()));
    const auto spec = header.at("spec").get<NetworkSpec>();
    const auto count = header.at("count").get<std::size_t>();
    if (count != param_count(spec))
      throw DataError(fmt::format("{}: count {} does not match spec ({})", path.string(), count,
                                  param_count(spec)));

    std::vector<double> values;
    const auto encoding = header.at("encoding").get<std::string>();
    if (encoding == "json") {
      values = header.at("values").get<std::vector<double>>();
    } else if (encoding == "f64le") {
      const auto sidecar = path.parent_path() / header.at("data_file").get<std::string>();
      std::ifstream bin(sidecar, std::ios::binary);
      if (!bin) throw DataError(fmt::format("cannot open {}", sidecar.string()));
      values.resize(count);
      for (auto& v : values) {
        std::uint64_t bits = 0;
        if (!bin.read(reinterpret_cast<char*>(&bits), sizeof bits))
          throw DataError(fmt::format("{}: truncated sidecar", sidecar.string()));
        v = std::bit_cast<double>(to_little_endian(bits));
      }
      if (bin.peek() != std::char_traits<char>::eof())
        throw DataError(fmt::format("{}: trailing bytes in sidecar", sidecar.string()));
    } else {
      throw DataError(fmt::format("{}: unknown encoding '{}'", path.string(), encoding));
    }
    if (values.size() != count)
      throw DataError(fmt::format("{}: expected {} values, found {}", path.string(), count,
                                  values.size()));
    return ParamStore(spec, std::move(values));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(fmt::format("{}: {}", path.string(), e.what()));
  } catch (const ConfigError& e) {
    throw DataError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

}  // namespace dann
