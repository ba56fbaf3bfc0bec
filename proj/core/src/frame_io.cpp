#include "rsevi/frame_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "binary_io.hpp"
#include "rsevi/error.hpp"

namespace rsevi {

std::vector<std::uint8_t> encode_frm(const Frame& frame) {
  detail::ByteWriter w;
  w.magic("FRM1");
  w.put(static_cast<std::uint32_t>(frame.height));
  w.put(static_cast<std::uint32_t>(frame.width));
  w.put(static_cast<std::uint32_t>(frame.channels));
  w.put(frame.timestamp);
  for (double v : frame.data) w.put(static_cast<float>(v));
  return w.bytes();
}

Frame decode_frm(std::vector<std::uint8_t> bytes, const std::string& origin) {
  detail::ByteReader r(std::move(bytes), origin);
  r.expect_magic("FRM1");
  const auto h = r.get<std::uint32_t>();
  const auto w = r.get<std::uint32_t>();
  const auto c = r.get<std::uint32_t>();
  if (h == 0 || w == 0 || (c != 1 && c != 3)) fail_input("invalid FRM1 header in " + origin);
  Frame f(static_cast<int>(h), static_cast<int>(w), static_cast<int>(c));
  f.timestamp = r.get<double>();
  if (r.remaining() != f.data.size() * sizeof(float))
    fail_input("FRM1 payload size mismatch in " + origin);
  for (double& v : f.data) v = r.get<float>();
  validate_frame(f);
  return f;
}

void write_frm(const Frame& frame, const std::string& path) {
  detail::save_bytes(encode_frm(frame), path);
}

Frame read_frm(const std::string& path) {
  return decode_frm(detail::load_bytes(path), path);
}

void write_pnm(const Frame& frame, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail_input("cannot open for writing: " + path);
  out << (frame.channels == 1 ? "P5" : "P6") << '\n'
      << frame.width << ' ' << frame.height << "\n255\n";
  std::vector<char> buf(frame.data.size());
  for (std::size_t i = 0; i < frame.data.size(); ++i) {
    const double v = std::clamp(frame.data[i], 0.0, 1.0);
    buf[i] = static_cast<char>(static_cast<std::uint8_t>(std::lround(v * 255.0)));
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) fail_input("write failed: " + path);
}

namespace {

// Reads the next whitespace-delimited header token, skipping '#' comments.
std::string header_token(std::istream& in) {
  std::string tok;
  char ch;
  while (in.get(ch)) {
    if (ch == '#') {
      std::string discard;
      std::getline(in, discard);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(ch);
  }
  return tok;
}

int header_int(std::istream& in, const std::string& path) {
  const std::string tok = header_token(in);
  try {
    std::size_t used = 0;
    const int v = std::stoi(tok, &used);
    if (used != tok.size() || v <= 0) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    fail_input("malformed PNM header in " + path);
  }
}

}  // namespace

Frame read_pnm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail_input("cannot open: " + path);
  const std::string magic = header_token(in);
  if (magic != "P5" && magic != "P6") fail_input("not a binary PGM/PPM: " + path);
  const int w = header_int(in, path);
  const int h = header_int(in, path);
  const int maxval = header_int(in, path);
  if (maxval > 255) fail_input("only 8-bit PNM is supported: " + path);
  Frame f(h, w, magic == "P5" ? 1 : 3);
  std::vector<unsigned char> buf(f.data.size());
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (in.gcount() != static_cast<std::streamsize>(buf.size()))
    fail_input("truncated PNM payload: " + path);
  for (std::size_t i = 0; i < buf.size(); ++i)
    f.data[i] = std::min(1.0, buf[i] / static_cast<double>(maxval));
  return f;
}

Frame read_frame(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail_input("cannot open: " + path);
  char magic[4] = {0, 0, 0, 0};
  in.read(magic, 4);
  if (in.gcount() >= 2 && magic[0] == 'P' && (magic[1] == '5' || magic[1] == '6'))
    return read_pnm(path);
  if (in.gcount() == 4 && std::string_view(magic, 4) == "FRM1") return read_frm(path);
  fail_input("unrecognized frame format: " + path);
}

}  // namespace rsevi
