#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "rsevi/displacement_field.hpp"
#include "rsevi/error.hpp"
#include "rsevi/events.hpp"
#include "rsevi/exposure.hpp"
#include "rsevi/frame_io.hpp"
#include "test_util.hpp"

using namespace rsevi;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::kNumeric;
}

EventStream sample_stream() {
  EventStream s;
  s.width = 7;
  s.height = 5;
  s.t_begin = 0.0;
  s.t_end = 1.0;
  s.events = {{0.125, 1, 2, 1}, {0.25, 6, 4, -1}, {0.25, 0, 0, 1}};
  std::sort(s.events.begin(), s.events.end(), event_before);
  return s;
}

}  // namespace

TEST(FrmFormat, RoundTripIsFloat32Exact) {
  std::mt19937_64 rng(71);
  Frame f = test::random_frame(5, 6, rng, 3);
  f.timestamp = 0.3125;
  const Frame g = decode_frm(encode_frm(f));
  ASSERT_TRUE(g.same_shape(f));
  EXPECT_EQ(g.timestamp, f.timestamp);
  for (std::size_t i = 0; i < f.data.size(); ++i)
    EXPECT_EQ(g.data[i], static_cast<double>(static_cast<float>(f.data[i])));
}

TEST(FrmFormat, HeaderLayout) {
  const auto bytes = encode_frm(Frame(2, 3, 1, 0.5));
  ASSERT_EQ(bytes.size(), 4u + 12 + 8 + 2 * 3 * 4);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "FRM1");
  EXPECT_EQ(bytes[4], 2);
  EXPECT_EQ(bytes[8], 3);
  EXPECT_EQ(bytes[12], 1);
}

TEST(FrmFormat, CorruptInputIsInputError) {
  auto bytes = encode_frm(Frame(2, 2, 1, 0.5));
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_EQ(kind_of([&] { decode_frm(bad_magic); }), ErrorKind::kInput);
  bytes.resize(bytes.size() - 1);
  EXPECT_EQ(kind_of([&] { decode_frm(bytes); }), ErrorKind::kInput);
}

TEST(PnmFormat, EightBitRoundTrip) {
  test::TempDir dir("pnm");
  Frame f(3, 4);
  for (int i = 0; i < 12; ++i) f.data[i] = i / 11.0;
  write_pnm(f, dir.file("a.pgm"));
  const Frame g = read_frame(dir.file("a.pgm"));
  ASSERT_TRUE(g.same_shape(f));
  for (int i = 0; i < 12; ++i) EXPECT_EQ(g.data[i], std::lround(f.data[i] * 255) / 255.0);
  std::mt19937_64 rng(72);
  const Frame rgb = test::random_frame(2, 2, rng, 3);
  write_pnm(rgb, dir.file("b.ppm"));
  EXPECT_EQ(read_frame(dir.file("b.ppm")).channels, 3);
}

TEST(PnmFormat, UnknownMagicRejected) {
  test::TempDir dir("magic");
  std::ofstream(dir.file("x.pgm")) << "P2\n1 1\n255\n0\n";
  EXPECT_EQ(kind_of([&] { read_frame(dir.file("x.pgm")); }), ErrorKind::kInput);
  EXPECT_EQ(kind_of([&] { read_frame(dir.file("missing.frm")); }), ErrorKind::kInput);
}

TEST(WmpFormat, RoundTrip) {
  const WeightMap m = weight_map_analytic(ExposureModel::rolling(0.0, 1.0, 4),
                                          ExposureModel::global(0.3, 4), TimeBins(0, 1, 3), 2);
  const WeightMap g = decode_wmp(encode_wmp(m));
  EXPECT_EQ(g.bins, 3);
  EXPECT_EQ(g.height, 4);
  EXPECT_EQ(g.source, m.source);
  EXPECT_EQ(g.target, m.target);
  for (std::size_t i = 0; i < m.weights.size(); ++i)
    EXPECT_EQ(g.weights[i], static_cast<double>(static_cast<float>(m.weights[i])));
}

TEST(EvsFormat, RoundTripIsExact) {
  const EventStream s = sample_stream();
  const auto bytes = encode_evs(s);
  EXPECT_EQ(bytes.size(), 4u + 4 + 4 + 4 + 8 + 8 + 8 + 16 * s.events.size());
  const EventStream g = decode_evs(bytes);
  EXPECT_EQ(g.events, s.events);
  EXPECT_EQ(g.width, 7);
  EXPECT_EQ(g.height, 5);
}

TEST(EvsFormat, TruncatedRecordRejected) {
  auto bytes = encode_evs(sample_stream());
  bytes.resize(bytes.size() - 3);
  EXPECT_EQ(kind_of([&] { decode_evs(bytes); }), ErrorKind::kInput);
}

TEST(EventsCsv, RoundTrip) {
  test::TempDir dir("csv");
  const EventStream s = sample_stream();
  write_events_csv(s, dir.file("e.csv"));
  const EventStream g = read_events_csv(dir.file("e.csv"), 7, 5, 0.0, 1.0);
  EXPECT_EQ(g.events, s.events);
}

TEST(DfbFormat, RoundTrip) {
  std::mt19937_64 rng(73);
  std::normal_distribution<double> n(0, 2);
  DisplacementField f(TimeBins(0.5, 1.25, 3), 4, 5);
  for (double& v : f.values) v = n(rng);
  test::TempDir dir("dfb");
  write_dfb(f, dir.file("f.dfb"));
  const DisplacementField g = read_dfb(dir.file("f.dfb"));
  EXPECT_EQ(g.bins, f.bins);
  for (std::size_t i = 0; i < f.values.size(); ++i)
    EXPECT_EQ(g.values[i], static_cast<double>(static_cast<float>(f.values[i])));
}
