#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "maga/tensor.hpp"

namespace maga {

/// Depth maps are binary PGM ("P5", maxval 65535, big-endian samples) holding
/// round(metres * 1000); 0 marks a missing pixel. Colour images are binary
/// PPM ("P6", maxval 255) holding round(value * 255).
///
/// Readers accept at most one '#' comment line in the header and reject
/// anything else malformed (magic, header tokens, maxval, truncated or
/// oversized payload) with a FormatError carrying the byte offset.

std::vector<std::uint8_t> encode_depth_pgm(const Tensor& depth);
Tensor decode_depth_pgm(const std::vector<std::uint8_t>& bytes);

std::vector<std::uint8_t> encode_color_ppm(const Tensor& color);
Tensor decode_color_ppm(const std::vector<std::uint8_t>& bytes);

void write_depth_pgm(const std::string& path, const Tensor& depth);
Tensor read_depth_pgm(const std::string& path);

void write_color_ppm(const std::string& path, const Tensor& color);
Tensor read_color_ppm(const std::string& path);

/// Depth after a write/read cycle: round(m * 1000) / 1000.
Tensor quantize_depth(const Tensor& depth);

/// Colour after a write/read cycle: round(c * 255) / 255.
Tensor quantize_color(const Tensor& color);

}  // namespace maga
