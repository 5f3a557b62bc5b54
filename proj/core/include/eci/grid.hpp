#pragma once

#include <cstddef>
#include <cmath>

#include "eci/errors.hpp"

namespace eci {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Uniform periodic grid on [0,2pi)^3, N nodes per axis, x index fastest.
struct Grid3 {
  int n = 0;

  Grid3() = default;
  explicit Grid3(int n_) : n(n_) {
    if (n < 2 || n % 2 != 0) throw InvalidInput("Grid3: N must be a positive even integer");
  }

  double spacing() const { return kTwoPi / n; }
  std::size_t node_count() const { return std::size_t(n) * n * n; }
  int nyquist() const { return n / 2; }

  double coord(int i) const { return kTwoPi * i / n; }

  std::size_t index(int ix, int iy, int iz) const {
    return std::size_t(ix) + std::size_t(n) * (std::size_t(iy) + std::size_t(n) * iz);
  }

  bool operator==(const Grid3& o) const { return n == o.n; }
  bool operator!=(const Grid3& o) const { return n != o.n; }
};

// Smallest even 7-smooth integer >= m (sizes FFTW handles at full speed).
int next_fft_size(int m);

}  // namespace eci
