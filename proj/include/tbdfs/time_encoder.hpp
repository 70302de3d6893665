#pragma once

#include "tbdfs/tape.hpp"
#include "tbdfs/tensor.hpp"

namespace tbdfs {

// Trainable functional time encoder mapping a time difference to a
// unit-norm d-vector of interleaved cos/sin terms.

// Geometric frequency ladder over [1, ~1e-9] per raw time unit; d must be
// even. Returned tensor has shape {1, d/2}.
Tensor init_time_frequencies(int d);

// On-tape encoding; returns {1, d} differentiable w.r.t. freqs. When
// `enabled` is false returns a zero constant (the -time ablation).
Var encode_time(Tape& tape, Var freqs, double dt, int d, bool enabled = true);

// Plain evaluation without a tape (oracles, debugging).
Tensor encode_time_plain(const Tensor& freqs, double dt);

}  // namespace tbdfs
