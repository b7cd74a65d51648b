#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <finrot/rng.hpp>
#include <finrot/tensor.hpp>
#include <finrot/tensor_io.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

using namespace finrot;

namespace {

std::string tmp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

Tensor random_tensor(std::vector<int> shape, std::uint64_t seed) {
  Tensor t(std::move(shape));
  Rng rng(seed);
  for (double& v : t.data) v = rng.normal();
  return t;
}

} // namespace

TEST_CASE("f64 write/read round trips exactly") {
  const Tensor t = random_tensor({3, 5, 2}, 42);
  const std::string path = tmp_path("tio_f64.ft");
  write_tensor(path, t, Dtype::F64);
  const Tensor back = read_tensor(path);
  CHECK(back.shape == t.shape);
  CHECK(max_abs_diff(back, t) == 0.0);
  std::remove(path.c_str());
}

TEST_CASE("f32 storage quantizes to float precision") {
  const Tensor t = random_tensor({4, 4}, 43);
  const std::string path = tmp_path("tio_f32.ft");
  write_tensor(path, t, Dtype::F32);
  const Tensor back = read_tensor(path);
  CHECK(back.shape == t.shape);
  for (std::int64_t i = 0; i < t.numel(); ++i) CHECK(back[i] == double(float(t[i])));
  std::remove(path.c_str());
}

TEST_CASE("values exactly representable in f32 survive an f32 round trip") {
  Tensor t({2, 3});
  for (std::int64_t i = 0; i < t.numel(); ++i) t[i] = double(i) / 512.0;
  const std::string path = tmp_path("tio_f32exact.ft");
  write_tensor(path, t, Dtype::F32);
  CHECK(max_abs_diff(read_tensor(path), t) == 0.0);
  std::remove(path.c_str());
}

TEST_CASE("writing the same tensor twice produces identical bytes") {
  const Tensor t = random_tensor({7, 3}, 44);
  const std::string p1 = tmp_path("tio_a.ft"), p2 = tmp_path("tio_b.ft");
  write_tensor(p1, t);
  write_tensor(p2, t);
  CHECK(slurp(p1) == slurp(p2));
  std::remove(p1.c_str());
  std::remove(p2.c_str());
}

TEST_CASE("header layout: length prefix, JSON, 64-byte alignment") {
  const Tensor t = random_tensor({2, 2}, 45);
  const std::string path = tmp_path("tio_hdr.ft");
  write_tensor(path, t, Dtype::F64);
  const std::string bytes = slurp(path);
  REQUIRE(bytes.size() > 8);
  const std::uint32_t header_len = std::uint32_t(std::uint8_t(bytes[0])) |
                                   std::uint32_t(std::uint8_t(bytes[1])) << 8 |
                                   std::uint32_t(std::uint8_t(bytes[2])) << 16 |
                                   std::uint32_t(std::uint8_t(bytes[3])) << 24;
  CHECK(header_len % 64 == 0);
  const std::string header = bytes.substr(4, header_len);
  CHECK(header.find("\"dtype\"") != std::string::npos);
  CHECK(header.find("f64") != std::string::npos);
  CHECK(header.find("\"shape\"") != std::string::npos);
  // padded with spaces
  CHECK(header.back() == ' ');
  // payload size matches numel
  CHECK(bytes.size() == 4 + header_len + 8 * size_t(t.numel()));
  std::remove(path.c_str());
}

TEST_CASE("scalar-shaped and empty-dimension tensors round trip") {
  Tensor scalar({1});
  scalar[0] = -2.5;
  const std::string path = tmp_path("tio_scalar.ft");
  write_tensor(path, scalar);
  CHECK(read_tensor(path)[0] == -2.5);

  Tensor empty({0, 4});
  write_tensor(path, empty);
  const Tensor back = read_tensor(path);
  CHECK(back.shape == std::vector<int>{0, 4});
  CHECK(back.numel() == 0);
  std::remove(path.c_str());
}

TEST_CASE("garbage input is rejected") {
  const std::string path = tmp_path("tio_bad.ft");
  {
    std::ofstream out(path, std::ios::binary);
    out << "this is not a tensor container";
  }
  CHECK_THROWS(read_tensor(path));
  CHECK_THROWS(read_tensor(tmp_path("tio_missing_file.ft")));
  std::remove(path.c_str());
}

TEST_CASE("truncated payload is rejected") {
  const Tensor t = random_tensor({8, 8}, 46);
  const std::string path = tmp_path("tio_trunc.ft");
  write_tensor(path, t);
  const std::string bytes = slurp(path);
  {
    std::ofstream out(path, std::ios::binary);
    out.write(bytes.data(), std::streamsize(bytes.size() - 16));
  }
  CHECK_THROWS(read_tensor(path));
  std::remove(path.c_str());
}
