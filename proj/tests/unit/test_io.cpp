#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "oracles.hpp"
#include "sawlab/acoustic.hpp"
#include "sawlab/errors.hpp"
#include "sawlab/io.hpp"

using namespace sawlab;

TEST(FormatNumber, ShortestRoundTrip) {
  EXPECT_EQ(io::format_number(0.1), "0.1");
  EXPECT_EQ(io::format_number(3.5e9), "3500000000");
  EXPECT_EQ(io::format_number(-0.0), "-0");
  EXPECT_EQ(io::format_number(-std::numeric_limits<double>::infinity()), "-inf");
  prop::Gen g(101);
  for (int i = 0; i < 2000; ++i) {
    const double v = (g.coin() ? -1 : 1) * g.log_uniform(1e-300, 1e300);
    const auto s = io::format_number(v);
    EXPECT_EQ(std::stod(s), v) << s;
  }
}

TEST(SParamCsv, RoundTripIsExact) {
  acoustic::ResonatorParams p{3.5e9, 125e3, 110e3, {0.01, -0.003}};
  const auto t = acoustic::s11_resonator_trace(linspace(3.499e9, 3.501e9, 101), p);
  const auto csv = io::sparam_to_csv(t);
  EXPECT_EQ(csv.substr(0, 18), "f_hz,re,im,mag_db\n");
  EXPECT_EQ(csv.find('\r'), std::string::npos);
  const auto back = io::sparam_from_csv(csv);
  ASSERT_EQ(back.size(), t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_EQ(back.f()[i], t.f()[i]);
    EXPECT_EQ(back.s()[i], t.s()[i]);
  }
  EXPECT_EQ(io::sparam_to_csv(back), csv);
}

TEST(SParamCsv, CriticalDipWritesMinusInfinity) {
  const acoustic::ResonatorParams p{3.5e9, 125e3, 125e3, {}};
  const std::vector<double> f{3.4999e9, 3.5e9, 3.5001e9};
  const auto csv = io::sparam_to_csv(acoustic::s11_resonator_trace(f, p));
  EXPECT_NE(csv.find("3500000000,0,0,-inf\n"), std::string::npos);
  EXPECT_EQ(io::sparam_from_csv(csv).s()[1], std::complex<double>(0.0, 0.0));
}

TEST(TraceCsv, RoundTripWithErrors) {
  const Trace t({1.0, 2.0, 3.5}, {0.5, -1e-300, 7.0}, {0.1, 0.2, 0.0});
  const auto csv = io::trace_to_csv(t, "x_hz", "counts");
  EXPECT_EQ(csv, "x_hz,counts,y_err\n1,0.5,0.1\n2,-1e-300,0.2\n3.5,7,0\n");
  const auto back = io::trace_from_csv(csv);
  EXPECT_EQ(std::vector<double>(back.y().begin(), back.y().end()), std::vector<double>(t.y().begin(), t.y().end()));
  EXPECT_EQ(*back.y_err(), *t.y_err());
  EXPECT_EQ(back.meta().x_label, "x_hz");
}

TEST(TraceCsv, AcceptsSParamFormatAsPower) {
  const SParamTrace s({1.0, 2.0}, {{3.0, 4.0}, {1.0, 0.0}});
  const auto t = io::trace_from_csv(io::sparam_to_csv(s));
  EXPECT_EQ(t.y()[0], 25.0);
  EXPECT_EQ(t.y()[1], 1.0);
}

TEST(TraceCsv, ToleratesCrlfAndBlankLines) {
  const auto t = io::trace_from_csv("x,y\r\n1,2\r\n\r\n3,4\r\n");
  EXPECT_EQ(t.size(), 2u);
  EXPECT_EQ(t.y()[1], 4.0);
}

TEST(TraceCsv, Errors) {
  EXPECT_THROW(io::trace_from_csv(""), FormatError);
  EXPECT_THROW(io::trace_from_csv("x,y\n1,2,3\n"), FormatError);
  EXPECT_THROW(io::trace_from_csv("x,y\n1,abc\n"), FormatError);
  EXPECT_THROW(io::trace_from_csv("x,y\n2,1\n1,1\n"), FormatError);
  EXPECT_THROW(io::trace_from_csv("x\n1\n"), FormatError);
  EXPECT_THROW(io::sparam_from_csv("a,b,c\n1,2,3\n"), FormatError);
  try {
    io::trace_from_csv("x,y\n1,2\n3,oops\n", "t.csv");
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("t.csv:3"), std::string::npos);
  }
}

TEST(TraceJson, RoundTrip) {
  const Trace t({1.0, 2.0}, {0.25, std::numeric_limits<double>::infinity()}, {0.0, 1.0},
                AxisMeta{"frequency", "Hz", "counts", "arb.", "model"});
  const auto text = io::trace_to_json(t);
  EXPECT_NE(text.find("\"type\": \"trace\""), std::string::npos);
  const auto back = io::trace_from_json(text);
  EXPECT_EQ(back, t);
  EXPECT_EQ(io::trace_to_json(back), text);
}

TEST(SParamJson, RoundTrip) {
  const SParamTrace s({1.0, 2.0}, {{0.1, -0.2}, {1e-17, 3.0}}, AxisMeta{"frequency", "Hz", "S21", "", "m"});
  const auto back = io::sparam_from_json(io::sparam_to_json(s));
  EXPECT_EQ(back, s);
  EXPECT_THROW(io::sparam_from_json(io::trace_to_json(Trace({1.0}, {1.0}))), FormatError);
  EXPECT_THROW(io::trace_from_json("[1,2]"), FormatError);
  EXPECT_THROW(io::trace_from_json("{\"type\":\"trace\",\"x\":[1,2],\"y\":[1]}"), FormatError);
}

TEST(MapCsv, LongFormatAndPlateauSidecar) {
  qd::BiasMap m;
  m.bias = {-0.01, 0.0};
  m.frequency = {1.0, 2.0, 3.0};
  m.counts = {{0.0, 0.0, 0.0}, {1.0, 2.0, 1.5}};
  m.row_plateau = {std::nullopt, 0u};
  m.plateaus = {{0.0, 0.02, -4e9}};
  m.stark_slope = 0.13e12;
  EXPECT_EQ(io::map_to_csv(m), "bias_v,x_hz,counts\n-0.01,1,0\n-0.01,2,0\n-0.01,3,0\n0,1,1\n0,2,2\n0,3,1.5\n");
  const auto j = io::map_plateaus_json(m);
  EXPECT_NE(j.find("\"row_plateau\""), std::string::npos);
  EXPECT_NE(j.find("null"), std::string::npos);
  EXPECT_NE(j.find("\"offset_hz\": -4000000000.0"), std::string::npos);
}

TEST(Files, WriteThenReadIsByteExact) {
  const auto dir = std::filesystem::temp_directory_path() / "sawlab_io_test";
  std::filesystem::remove_all(dir);
  const std::string content = "a,b\n1,2\n\x01\xff";
  io::write_file(dir / "nested" / "f.csv", content);
  EXPECT_EQ(io::read_file(dir / "nested" / "f.csv"), content);
  EXPECT_THROW(io::read_file(dir / "missing.csv"), FormatError);
  std::filesystem::remove_all(dir);
}
