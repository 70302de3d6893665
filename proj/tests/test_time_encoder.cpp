#include <doctest.h>

#include <cmath>

#include "tbdfs/errors.hpp"
#include "tbdfs/time_encoder.hpp"
#include "testutil.hpp"

using namespace tbdfs;

TEST_CASE("zero time difference gives the cos/sin pattern") {
  Tensor freqs = init_time_frequencies(4);
  Tensor enc = encode_time_plain(freqs, 0.0);
  const double s = std::sqrt(2.0 / 4.0);
  REQUIRE(enc.numel() == 4);
  CHECK(enc.values[0] == doctest::Approx(s));
  CHECK(enc.values[1] == doctest::Approx(0.0));
  CHECK(enc.values[2] == doctest::Approx(s));
  CHECK(enc.values[3] == doctest::Approx(0.0));
}

TEST_CASE("encoding has unit norm for any time difference") {
  Rng rng(21);
  for (int d : {2, 4, 8, 16}) {
    Tensor freqs = init_time_frequencies(d);
    for (int trial = 0; trial < 10; ++trial) {
      const double dt = rng.uniform(0.0, 1e6);
      Tensor enc = encode_time_plain(freqs, dt);
      double norm2 = 0.0;
      for (double v : enc.values) norm2 += v * v;
      CHECK(std::fabs(std::sqrt(norm2) - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("scalar trig evaluation at d=2") {
  Tensor freqs({1, 1}, {3.14159265358979323846});
  Tensor enc = encode_time_plain(freqs, 0.5);
  REQUIRE(enc.numel() == 2);
  CHECK(std::fabs(enc.values[0] - 0.0) < 1e-12);
  CHECK(std::fabs(enc.values[1] - 1.0) < 1e-12);
}

TEST_CASE("odd dimension is rejected at construction") {
  CHECK_THROWS_AS(init_time_frequencies(5), ConfigError);
  CHECK_THROWS_AS(init_time_frequencies(0), ConfigError);
}

TEST_CASE("frequencies span the geometric ladder") {
  Tensor freqs = init_time_frequencies(8);
  REQUIRE(freqs.numel() == 4);
  CHECK(freqs.values[0] == doctest::Approx(1.0));
  for (std::size_t k = 1; k < 4; ++k) {
    CHECK(freqs.values[k] < freqs.values[k - 1]);
  }
}

TEST_CASE("on-tape encoding matches the plain evaluation and is trainable") {
  Tensor freqs = init_time_frequencies(6);
  Tape tape;
  Var fv = tape.param(freqs);
  Var enc = encode_time(tape, fv, 12.5, 6);
  CHECK(tape.value(enc).values == encode_time_plain(freqs, 12.5).values);

  tape.backward(tape.sum_all(enc));
  bool any_nonzero = false;
  for (double g : tape.grad(fv).values) any_nonzero |= g != 0.0;
  CHECK(any_nonzero);
}

TEST_CASE("disabled encoder returns a zero vector") {
  Tensor freqs = init_time_frequencies(6);
  Tape tape;
  Var fv = tape.param(freqs);
  Var enc = encode_time(tape, fv, 12.5, 6, /*enabled=*/false);
  for (double v : tape.value(enc).values) CHECK(v == 0.0);
  CHECK(tape.value(enc).numel() == 6);
}

TEST_CASE("encoding is continuous in the time difference") {
  Tensor freqs = init_time_frequencies(8);
  const double t0 = 1234.5;
  Tensor a = encode_time_plain(freqs, t0);
  Tensor b = encode_time_plain(freqs, t0 + 1e-9 * t0);
  double diff = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) {
    diff = std::max(diff, std::fabs(a.values[i] - b.values[i]));
  }
  CHECK(diff < 1e-5);
}
