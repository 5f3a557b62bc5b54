#pragma once

#include <array>
#include <complex>
#include <string>
#include <vector>

#include "eci/field.hpp"

namespace eci {

using Ivec3 = std::array<int, 3>;

/// One Beltrami mode: integer frequency k on the sphere |k|^2 = lambda_bar^2,
/// real A_k orthogonal to k with |A_k| = 1/sqrt(2) and A_{-k} = A_k, and the
/// complex polarisation B_k = A_k + i (k/|k|) x A_k.
struct BeltramiMode {
  Ivec3 k;
  std::array<double, 3> A;
  std::array<std::complex<double>, 3> B;
};

/// All integer points with |k|^2 = lambda_bar_sq, deterministic order.
std::vector<Ivec3> sphere_frequencies(int lambda_bar_sq);

/// Deterministic A_k construction (see module notes): the larger of
/// k_hat x e1, k_hat x e2, normalised to 1/sqrt(2), sign fixed from the
/// lexicographically larger of {k, -k} so that A_{-k} = A_k exactly.
std::vector<BeltramiMode> build_modes(int lambda_bar_sq, const std::vector<Ivec3>& freqs);

/// W(x) = sum_k a_k B_k e^{i lambda k.x}, real by conjugate symmetry of the
/// amplitudes (a_{-k} = conj(a_k), rejected otherwise). Exact spectral
/// assembly; requires lambda*|k|_inf below Nyquist.
PeriodicField evaluate_beltrami(const std::vector<BeltramiMode>& modes,
                                const std::vector<std::complex<double>>& amplitudes,
                                Grid3 grid, int lambda);

/// <W x W> predicted by the mean formula: (1/2) sum_k |a_k|^2 (Id - khat x khat).
Sym3 beltrami_mean_outer(const std::vector<BeltramiMode>& modes,
                         const std::vector<std::complex<double>>& amplitudes);

/// Max over mode pairs of |(B_k x B_k' + B_k' x B_k)(k+k') - (B_k.B_k')(k+k')|.
double check_bk_identity(const std::vector<BeltramiMode>& modes);

/// The two disjoint negation-closed frequency families sharing one sphere,
/// with their Beltrami modes. gamma solvers attach in the geometry module.
struct ModeFamily {
  int lambda_bar_sq = 5;
  std::vector<Ivec3> even_set, odd_set;   // each closed under negation
  std::vector<BeltramiMode> even_modes, odd_modes;

  const std::vector<Ivec3>& set(bool even) const { return even ? even_set : odd_set; }
  const std::vector<BeltramiMode>& modes(bool even) const {
    return even ? even_modes : odd_modes;
  }

  std::string to_json() const;
  static ModeFamily from_json(const std::string& text);
};

}  // namespace eci
