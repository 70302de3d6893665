#include "tbdfs/time_encoder.hpp"

#include <cmath>

#include "tbdfs/errors.hpp"

namespace tbdfs {

Tensor init_time_frequencies(int d) {
  if (d <= 0 || d % 2 != 0) {
    throw ConfigError("time encoder: dimension must be a positive even "
                      "number, got " + std::to_string(d));
  }
  const int half = d / 2;
  Tensor freqs = Tensor::zeros({1, static_cast<std::size_t>(half)});
  for (int k = 0; k < half; ++k) {
    freqs.values[k] = 1.0 / std::pow(10.0, k * 9.0 / half);
  }
  return freqs;
}

Var encode_time(Tape& tape, Var freqs, double dt, int d, bool enabled) {
  if (!enabled) {
    return tape.constant(Tensor::zeros({1, static_cast<std::size_t>(d)}));
  }
  return tape.time_encode(freqs, dt);
}

Tensor encode_time_plain(const Tensor& freqs, double dt) {
  const std::size_t half = freqs.numel();
  const double s = std::sqrt(1.0 / static_cast<double>(half));
  Tensor out = Tensor::zeros({1, 2 * half});
  for (std::size_t k = 0; k < half; ++k) {
    out.values[2 * k] = s * std::cos(freqs.values[k] * dt);
    out.values[2 * k + 1] = s * std::sin(freqs.values[k] * dt);
  }
  return out;
}

}  // namespace tbdfs
