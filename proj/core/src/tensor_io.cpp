#include "finrot/tensor_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

static_assert(std::endian::native == std::endian::little,
              "tensor container assumes a little-endian host");

namespace finrot {

void write_tensor(const std::string& path, const Tensor& t, Dtype dtype) {
  nlohmann::json h;
  h["dtype"] = dtype == Dtype::F32 ? "f32" : "f64";
  h["shape"] = t.shape;
  h["offset"] = 0;
  std::string j = h.dump();
  // Pad to a 64-byte multiple; the offset field may grow the string once.
  for (int pass = 0; pass < 2; ++pass) {
    size_t padded = (j.size() + 63) / 64 * 64;
    h["offset"] = 4 + padded;
    j = h.dump();
    if (j.size() <= padded) {
      j.resize(padded, ' ');
      break;
    }
  }
  std::uint32_t header_len = static_cast<std::uint32_t>(j.size());

  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for write: " + path);
  f.write(reinterpret_cast<const char*>(&header_len), 4);
  f.write(j.data(), static_cast<std::streamsize>(j.size()));
  if (dtype == Dtype::F64) {
    f.write(reinterpret_cast<const char*>(t.data.data()),
            static_cast<std::streamsize>(t.data.size() * 8));
  } else {
    std::vector<float> narrow(t.data.begin(), t.data.end());
    f.write(reinterpret_cast<const char*>(narrow.data()),
            static_cast<std::streamsize>(narrow.size() * 4));
  }
  if (!f) throw std::runtime_error("write failed: " + path);
}

Tensor read_tensor(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for read: " + path);
  std::uint32_t header_len = 0;
  f.read(reinterpret_cast<char*>(&header_len), 4);
  if (!f || header_len == 0 || header_len > (1u << 20))
    throw std::runtime_error("tensor container: bad header length in " + path);
  std::string j(header_len, '\0');
  f.read(j.data(), header_len);
  if (!f) throw std::runtime_error("tensor container: truncated header in " + path);

  nlohmann::json h = nlohmann::json::parse(j, nullptr, false);
  if (h.is_discarded() || !h.contains("dtype") || !h.contains("shape") || !h.contains("offset"))
    throw std::runtime_error("tensor container: malformed header in " + path);
  std::string dt = h["dtype"];
  if (dt != "f32" && dt != "f64")
    throw std::runtime_error("tensor container: unknown dtype in " + path);

  Tensor t(h["shape"].get<std::vector<int>>());
  f.seekg(h["offset"].get<std::int64_t>());
  if (dt == "f64") {
    f.read(reinterpret_cast<char*>(t.data.data()), static_cast<std::streamsize>(t.data.size() * 8));
  } else {
    std::vector<float> narrow(t.data.size());
    f.read(reinterpret_cast<char*>(narrow.data()), static_cast<std::streamsize>(narrow.size() * 4));
    for (size_t i = 0; i < narrow.size(); ++i) t.data[i] = narrow[i];
  }
  if (!f) throw std::runtime_error("tensor container: truncated data in " + path);
  return t;
}

} // namespace finrot
