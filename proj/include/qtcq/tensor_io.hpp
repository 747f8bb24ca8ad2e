#pragma once

// QTSR binary tensor format, the only interchange format the toolkit accepts.
//
// Layout (all multi-byte fields little-endian):
//   magic      4 bytes   "QTSR"
//   version    u32       1
//   dtype_code u8        0 = float32, 1 = float64
//   ndim       u8        2
//   shape      ndim x u64
//   payload    rows*cols values, row-major, little-endian
//
// Header is 26 bytes for a 2-D tensor; a float64 file is 26 + 8*rows*cols
// bytes. Values are widened to double on read; float32 is a storage option
// only. Non-finite payload values are rejected at load time.

#include "qtcq/types.hpp"

#include <cstdint>
#include <string>

namespace qtcq {

enum class TensorDType : std::uint8_t {
    Float32 = 0,
    Float64 = 1,
};

inline constexpr std::size_t kTensorHeaderBytes = 26;

Matrix read_tensor(const std::string& path);

void write_tensor(const std::string& path, const Matrix& t,
                  TensorDType dtype = TensorDType::Float64);

} // namespace qtcq
