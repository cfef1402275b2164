#pragma once

#include <cstdint>
#include <functional>
#include <random>

#include "g2f/exterior.hpp"

namespace g2f {

/// Generator for sample `index` of a run seeded with `seed`.
///
/// Streams are derived by SplitMix64 mixing of (seed, index), so samples are
/// reproducible independently of evaluation order and thread count.
std::mt19937_64 sample_rng(std::uint64_t seed, std::uint64_t index);

Vec gaussian_vector(std::mt19937_64& rng, int n);
Mat gaussian_matrix(std::mt19937_64& rng, int rows, int cols);
/// Random form with independent standard normal coefficients.
Form gaussian_form(std::mt19937_64& rng, int dim, int degree);

/// Runs body(i) for i in [0, n) on up to `threads` workers (0 = hardware).
/// The body must write only to slot i of its outputs.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                  unsigned threads = 0);

}  // namespace g2f
