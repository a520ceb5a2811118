// SPDX-License-Identifier: Apache-2.0
//
// "NFCM" binary measurement files. All fields little-endian:
//
//   char[4]  magic "NFCM"
//   u32      version (1)
//   u32      K, M, N, F
//   f64[2]   tx reference, f64[2] rx reference
//   per k:   N x f64[2] tx positions, then M x f64[2] rx positions
//   f64      grid center, f64 grid bandwidth
//   u8       has_snr, f64 snr_db (0 when absent)
//   u64      seed
//   u8       coherent
//   payload  K*M*N*F complex values as (re, im) f64 pairs, (k, m, n, f) row-major
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nfrm/aperture.hpp"

namespace nfrm {

inline constexpr std::uint32_t kDatasetVersion = 1;

std::vector<std::uint8_t> encode_dataset(const MeasurementSet& set);
MeasurementSet decode_dataset(const std::vector<std::uint8_t>& bytes);

void write_dataset(const MeasurementSet& set, const std::string& path);
MeasurementSet read_dataset(const std::string& path);

} // namespace nfrm
