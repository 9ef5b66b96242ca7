#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "vofdm/modem.hpp"
#include "vofdm/rng.hpp"

using namespace vofdm;
using Catch::Matchers::ContainsSubstring;

namespace {

SymbolGrid random_grid(RngStream& rng, const ModemConfig& cfg) {
  return qam_map(random_payload(rng, cfg.bits_per_frame()), cfg);
}

}  // namespace

TEST_CASE("4-qam map hits the unit-per-dimension corners") {
  QamMap qam(4);
  std::uint8_t b00[2] = {0, 0};
  std::uint8_t b01[2] = {0, 1};
  std::uint8_t b10[2] = {1, 0};
  std::uint8_t b11[2] = {1, 1};
  REQUIRE(qam.map_symbol(b00) == cpx{1.0, 1.0});
  REQUIRE(qam.map_symbol(b01) == cpx{1.0, -1.0});
  REQUIRE(qam.map_symbol(b10) == cpx{-1.0, 1.0});
  REQUIRE(qam.map_symbol(b11) == cpx{-1.0, -1.0});
}

TEST_CASE("16-qam separates in-phase and quadrature bit halves") {
  QamMap qam(16);
  std::uint8_t a[4] = {0, 0, 0, 0};
  std::uint8_t b[4] = {1, 0, 0, 0};
  cpx sa = qam.map_symbol(a);
  cpx sb = qam.map_symbol(b);
  REQUIRE(sa.imag() == sb.imag());
  REQUIRE(sa.real() != sb.real());
}

TEST_CASE("gray mapping: adjacent levels differ in exactly one bit") {
  for (int order : {4, 16, 64}) {
    QamMap qam(order);
    auto bits_of_level = [&](int i) {
      int g = i ^ (i >> 1);
      return g;
    };
    for (int i = 0; i + 1 < qam.levels; ++i) {
      int diff = bits_of_level(i) ^ bits_of_level(i + 1);
      REQUIRE((diff & (diff - 1)) == 0);
      REQUIRE(diff != 0);
    }
    // map/demap agree on every level for each dimension
    for (int g = 0; g < qam.levels; ++g) {
      std::uint8_t in[3], out[3];
      for (int b = 0; b < qam.bits_per_dim; ++b)
        in[b] = static_cast<std::uint8_t>((g >> (qam.bits_per_dim - 1 - b)) & 1);
      double x = qam.map_dim(in);
      qam.demap_dim(x, out);
      for (int b = 0; b < qam.bits_per_dim; ++b) REQUIRE(in[b] == out[b]);
    }
  }
}

TEST_CASE("constellation power is 2 for every supported order") {
  RngStream rng(3, 0);
  for (int order : {4, 16, 64}) {
    ModemConfig cfg{256, 1, order, 1};
    double acc = 0.0;
    std::size_t n = 0;
    for (int f = 0; f < 400; ++f) {
      SymbolGrid g = random_grid(rng, cfg);
      for (const cpx& s : g.data) acc += std::norm(s);
      n += g.data.size();
    }
    REQUIRE(acc / static_cast<double>(n) == Catch::Approx(2.0).epsilon(0.01));
  }
}

TEST_CASE("qam_map validates bit count and order") {
  ModemConfig cfg{8, 2, 4, 1};
  std::vector<std::uint8_t> bits(15, 0);
  REQUIRE_THROWS_AS(qam_map(bits, cfg), std::invalid_argument);
  ModemConfig bad{8, 2, 32, 1};
  bits.assign(8 * 5, 0);
  REQUIRE_THROWS_AS(qam_map(bits, bad), std::invalid_argument);
}

TEST_CASE("all-zero bits give identical symbols") {
  ModemConfig cfg{16, 4, 16, 1};
  std::vector<std::uint8_t> bits(cfg.bits_per_frame(), 0);
  SymbolGrid g = qam_map(bits, cfg);
  for (const cpx& s : g.data) REQUIRE(s == g.data[0]);
}

TEST_CASE("single-carrier configuration passes symbols through") {
  ModemConfig cfg{16, 16, 4, 1};
  RngStream rng(4, 0);
  SymbolGrid g = random_grid(rng, cfg);
  TimeFrame f = vofdm_modulate(g, cfg);
  for (std::size_t k = 0; k < 16; ++k)
    REQUIRE(std::abs(f.samples[k] - g.data[k]) < 1e-14);
}

TEST_CASE("vb_size 1 equals the conventional full-length inverse transform") {
  ModemConfig cfg{64, 1, 4, 1};
  RngStream rng(5, 0);
  SymbolGrid g = random_grid(rng, cfg);
  TimeFrame f = vofdm_modulate(g, cfg);
  std::vector<cpx> direct = idft(g.data);
  for (std::size_t k = 0; k < 64; ++k)
    REQUIRE(std::abs(f.samples[k] - direct[k]) < 1e-12);
}

TEST_CASE("two-row delta grid spreads evenly over its row positions") {
  ModemConfig cfg{8, 2, 4, 1};
  SymbolGrid g{2, 4, std::vector<cpx>(8, cpx{0.0, 0.0})};
  g.at(0, 0) = cpx{1.0, 0.0};
  TimeFrame f = vofdm_modulate(g, cfg);
  for (std::size_t k = 0; k < 8; ++k) {
    if (k % 2 == 0) {
      REQUIRE(std::abs(f.samples[k] - cpx{0.5, 0.0}) < 1e-12);
    } else {
      REQUIRE(std::abs(f.samples[k]) < 1e-12);
    }
  }
}

TEST_CASE("modulate and demodulate validate shapes") {
  ModemConfig cfg{16, 4, 4, 1};
  SymbolGrid wrong{2, 8, std::vector<cpx>(16)};
  REQUIRE_THROWS_AS(vofdm_modulate(wrong, cfg), std::invalid_argument);
  std::vector<cpx> short_frame(8);
  REQUIRE_THROWS_AS(vofdm_demodulate(short_frame, cfg), std::invalid_argument);
  ModemConfig nondiv{16, 3, 4, 1};
  SymbolGrid any{3, 5, std::vector<cpx>(15)};
  REQUIRE_THROWS_AS(vofdm_modulate(any, nondiv), std::invalid_argument);
}

TEST_CASE("round trip holds for every divisor block size of 256") {
  RngStream rng(6, 0);
  for (std::size_t m : {1u, 2u, 4u, 8u, 16u, 32u, 64u, 128u, 256u}) {
    ModemConfig cfg{256, m, 4, 1};
    SymbolGrid g = random_grid(rng, cfg);
    TimeFrame f = vofdm_modulate(g, cfg);

    double p_grid = 0.0, p_frame = 0.0;
    for (const cpx& s : g.data) p_grid += std::norm(s);
    for (const cpx& s : f.samples) p_frame += std::norm(s);
    REQUIRE(p_frame == Catch::Approx(p_grid).epsilon(1e-10));

    SymbolGrid back = vofdm_demodulate(f, cfg);
    double err = 0.0;
    for (std::size_t k = 0; k < g.data.size(); ++k)
      err = std::max(err, std::abs(back.data[k] - g.data[k]));
    REQUIRE(err < 1e-10);
  }
}

TEST_CASE("all-zero frame demodulates to the all-zero grid") {
  ModemConfig cfg{16, 4, 4, 1};
  std::vector<cpx> zeros(16, cpx{0.0, 0.0});
  SymbolGrid g = vofdm_demodulate(zeros, cfg);
  for (const cpx& s : g.data) REQUIRE(s == cpx{0.0, 0.0});
}

TEST_CASE("demap inverts map on random frames") {
  RngStream rng(7, 0);
  for (int order : {4, 16, 64}) {
    ModemConfig cfg{256, 4, order, 1};
    for (int f = 0; f < 200; ++f) {
      std::vector<std::uint8_t> bits = random_payload(rng, cfg.bits_per_frame());
      SymbolGrid g = qam_map(bits, cfg);
      SymbolGrid rx = vofdm_demodulate(vofdm_modulate(g, cfg), cfg);
      REQUIRE(qam_demap(rx, cfg) == bits);
    }
  }
}

TEST_CASE("perturbations below half the minimum distance decode cleanly") {
  RngStream rng(8, 0);
  for (int order : {4, 16, 64}) {
    QamMap qam(order);
    ModemConfig cfg{64, 1, order, 1};
    std::vector<std::uint8_t> bits = random_payload(rng, cfg.bits_per_frame());
    SymbolGrid g = qam_map(bits, cfg);
    for (cpx& s : g.data) {
      double dx = (2.0 * rng.uniform01() - 1.0) * 0.98 * qam.scale;
      double dy = (2.0 * rng.uniform01() - 1.0) * 0.98 * qam.scale;
      s += cpx{dx, dy};
    }
    REQUIRE(qam_demap(g, cfg) == bits);
  }
}

TEST_CASE("hard-decision bit error rate matches the gaussian tail oracle") {
  // Per-dimension noise with sigma chosen so the expected BER is about 1e-2.
  const double sigma = 1.0 / 2.3263478740408408;
  const double expected = q_function(1.0 / sigma);
  RngStream rng(9, 0);
  QamMap qam(4);
  std::uint64_t errors = 0, bits_total = 0;
  std::uint8_t in[2], out[2];
  for (int i = 0; i < 1000000; ++i) {
    std::uint32_t w = rng.next_u32();
    in[0] = w & 1;
    in[1] = (w >> 1) & 1;
    cpx s = qam.map_symbol(in) + rng.gaussian_pair(sigma * sigma);
    qam.demap_symbol(s, out);
    errors += (in[0] != out[0]) + (in[1] != out[1]);
    bits_total += 2;
  }
  double ber = static_cast<double>(errors) / static_cast<double>(bits_total);
  REQUIRE(ber == Catch::Approx(expected).epsilon(0.05));
}

TEST_CASE("papr fixed points") {
  TimeFrame spike{{cpx{2.0, 0.0}, cpx{0.0, 0.0}, cpx{0.0, 0.0}, cpx{0.0, 0.0}}};
  REQUIRE(papr(spike) == Catch::Approx(4.0).margin(1e-12));

  ModemConfig sc{16, 16, 4, 1};
  RngStream rng(10, 0);
  TimeFrame flat = random_frame(rng, sc);
  REQUIRE(papr(flat) == Catch::Approx(1.0).margin(1e-12));

  TimeFrame zero{std::vector<cpx>(8, cpx{0.0, 0.0})};
  REQUIRE_THROWS_WITH(papr(zero), ContainsSubstring("undefined PAPR"));
  TimeFrame empty{};
  REQUIRE_THROWS_WITH(papr(empty), ContainsSubstring("undefined PAPR"));
}

TEST_CASE("papr is never below one and oversampling never lowers it") {
  RngStream rng(11, 0);
  ModemConfig cfg{64, 4, 16, 1};
  for (int f = 0; f < 50; ++f) {
    TimeFrame frame = random_frame(rng, cfg);
    double p1 = papr(frame);
    REQUIRE(p1 >= 1.0);
    REQUIRE(papr(frame, 4) >= p1 - 1e-9);
  }
}

TEST_CASE("median conventional-ofdm papr matches the order-statistic model") {
  RngStream rng(12, 0);
  ModemConfig cfg{256, 1, 4, 1};
  std::vector<double> samples;
  samples.reserve(10000);
  for (int f = 0; f < 10000; ++f) samples.push_back(papr(random_frame(rng, cfg)));
  std::nth_element(samples.begin(), samples.begin() + samples.size() / 2,
                   samples.end());
  double median_db = to_db(samples[samples.size() / 2]);
  // CCDF(g) = 1 - (1 - exp(-g))^256 crosses 0.5 at 7.718 dB.
  REQUIRE(median_db == Catch::Approx(7.718111).margin(0.5));
}

TEST_CASE("blocked transmission improves the papr tail") {
  RngStream rng(13, 0);
  ModemConfig c1{256, 1, 4, 1};
  ModemConfig c16{256, 16, 4, 1};
  const int n_frames = 10000;
  std::vector<double> p1, p16;
  p1.reserve(n_frames);
  p16.reserve(n_frames);
  for (int f = 0; f < n_frames; ++f) {
    p1.push_back(to_db(papr(random_frame(rng, c1))));
    p16.push_back(to_db(papr(random_frame(rng, c16))));
  }
  for (double t = 4.0; t <= 11.0; t += 0.25) {
    auto exceed = [&](const std::vector<double>& v) {
      return std::count_if(v.begin(), v.end(), [&](double x) { return x > t; });
    };
    long e1 = exceed(p1);
    long e16 = exceed(p16);
    if (e1 >= 100 && e16 >= 100) REQUIRE(e16 <= e1);
  }
}
