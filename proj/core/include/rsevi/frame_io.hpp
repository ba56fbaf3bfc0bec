#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rsevi/frame.hpp"

namespace rsevi {

/// FRM1: "FRM1", u32 height, u32 width, u32 channels, f64 timestamp, then f32
/// row-major interleaved data. Little-endian.
std::vector<std::uint8_t> encode_frm(const Frame& frame);
Frame decode_frm(std::vector<std::uint8_t> bytes, const std::string& origin = "<memory>");
void write_frm(const Frame& frame, const std::string& path);
Frame read_frm(const std::string& path);

/// 8-bit binary PGM (P5, 1 channel) or PPM (P6, 3 channels). Values are
/// scaled by 1/maxval on read and rounded from [0,1] to 0..255 on write.
void write_pnm(const Frame& frame, const std::string& path);
Frame read_pnm(const std::string& path);

/// Dispatches on the file's magic bytes (FRM1, P5, P6).
Frame read_frame(const std::string& path);

}  // namespace rsevi
