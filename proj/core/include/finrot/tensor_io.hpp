#pragma once

#include <string>

#include "finrot/tensor.hpp"

namespace finrot {

enum class Dtype { F32, F64 };

// Tensor container file, byte layout (all integers little-endian):
//   [0..3]              uint32 header_len
//   [4..4+header_len)   UTF-8 JSON {"dtype":"f32"|"f64","offset":O,"shape":[...]}
//                       right-padded with 0x20 so header_len is a multiple of 64
//   [O..)               numel * sizeof(dtype) bytes of IEEE-754 floats,
//                       little-endian, row-major; O = 4 + header_len
// Writing the same tensor twice produces byte-identical files.
void write_tensor(const std::string& path, const Tensor& t, Dtype dtype = Dtype::F64);
Tensor read_tensor(const std::string& path);

} // namespace finrot
