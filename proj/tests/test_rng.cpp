#include <doctest.h>

#include "rdiff/rng.hpp"

#include <cmath>
#include <vector>

using rdiff::NormalStream;
using rdiff::Philox4x64;

// Known-answer vectors generated with an independent reference
// implementation of Philox 4x64-10 (numpy.random.Philox random_raw).
TEST_CASE("philox 4x64-10 known answers") {
  struct Kat {
    std::uint64_t key0, key1;
    std::uint64_t expect[8];
  };
  const std::vector<Kat> kats = {
      {0x0, 0x0,
       {0x02f4ba6408e4d89bULL, 0x3dd62b0b9ca8c5b2ULL, 0x1c8667a55d902e79ULL,
        0x907d7a052fd5b4dcULL, 0x809bf322883987c3ULL, 0x471128b9e807f7ddULL,
        0xf250ba0dbec065b7ULL, 0xfc6ed66767a457bcULL}},
      {0x1, 0x0,
       {0x4db6a27b756282dfULL, 0xd944fa03babe0e2fULL, 0x27f872e577060d32ULL,
        0x07f697696a0482a2ULL, 0xe677fe4bbd0452ecULL, 0x0d543dba56d1e799ULL,
        0xbebe12cad0eb4d9eULL, 0x3f0b4abd55f61f3dULL}},
      {0xdeadbeef, 0x0,
       {0xa4e930dc738acaf1ULL, 0xb1c7ecc6484e9cf0ULL, 0x6b88a411909298aaULL,
        0x66f3c896201f7262ULL, 0x8217df84a2c417d2ULL, 0x6545baef6469464dULL,
        0xcb729362b22b9981ULL, 0x8455360174d010a1ULL}},
      {0x0000000700000003ULL, 0x0,
       {0x9dd0ba1b84f41ce9ULL, 0x833b56afaa5ed288ULL, 0x45bf74a84737e6aeULL,
        0xfbcaf3e87121c246ULL, 0x4ba8158f01da01f5ULL, 0xa4284e8e7d781c0cULL,
        0x0358f12933331615ULL, 0x466f806201012f8fULL}},
      {0x0fedcba987654321ULL, 0x123456789abcdef0ULL,
       {0xf395d3499d886185ULL, 0x51d86f3bb67162d5ULL, 0x58f786c8a8ff603cULL,
        0x82e4005eec9d431dULL, 0x09b016e8060e2e0aULL, 0x36700750af1fdc10ULL,
        0xbd1031489adc2fd2ULL, 0x3afdbab692406eccULL}},
  };
  for (const auto& kat : kats) {
    Philox4x64 rng(kat.key0, kat.key1);
    for (int i = 0; i < 8; ++i) CHECK(rng.next_u64() == kat.expect[i]);
  }
}

TEST_CASE("philox counter carries across word boundaries") {
  // Blocks must differ when the counter increments.
  const auto b0 = Philox4x64::generate({0, 0, 0, 0}, {42, 7});
  const auto b1 = Philox4x64::generate({1, 0, 0, 0}, {42, 7});
  CHECK(b0 != b1);
}

TEST_CASE("normal stream moments and determinism") {
  NormalStream a(1234, 5);
  NormalStream b(1234, 5);
  NormalStream c(1234, 6);
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0;
  bool differs = false;
  for (int i = 0; i < n; ++i) {
    const double x = a.next();
    CHECK(x == b.next());
    if (x != c.next()) differs = true;
    sum += x;
    sum2 += x * x;
  }
  CHECK(differs);
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  CHECK(std::abs(mean) < 4.0 / std::sqrt(double(n)));
  CHECK(std::abs(var - 1.0) < 6.0 / std::sqrt(double(n)));
}

TEST_CASE("normal stream scaled fill") {
  NormalStream a(9, 0);
  NormalStream b(9, 0);
  std::vector<double> buf(4);
  a.fill(buf, 4, 0.25);
  for (double x : buf) CHECK(x == 0.5 * b.next());
}
