#include "eci/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include <json.hpp>

#include "eci/errors.hpp"

namespace eci {

namespace {

Ivec3 neg(const Ivec3& k) { return {-k[0], -k[1], -k[2]}; }

bool lex_less(const Ivec3& a, const Ivec3& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

// Component weights turning the 6-vector of a Sym3 into the full 3x3 row sum:
// off-diagonal components appear twice in sum_{ij} L_ij R_ij.
constexpr double kW[6] = {1, 2, 2, 1, 2, 1};

// vec of Id - khat x khat for a pair representative.
std::array<double, 6> projector_vec(const Ivec3& k) {
  const double k2 = double(k[0]) * k[0] + double(k[1]) * k[1] + double(k[2]) * k[2];
  std::array<double, 6> v;
  v[Sym3::comp(0, 0)] = 1.0 - k[0] * k[0] / k2;
  v[Sym3::comp(0, 1)] = -k[0] * k[1] / k2;
  v[Sym3::comp(0, 2)] = -k[0] * k[2] / k2;
  v[Sym3::comp(1, 1)] = 1.0 - k[1] * k[1] / k2;
  v[Sym3::comp(1, 2)] = -k[1] * k[2] / k2;
  v[Sym3::comp(2, 2)] = 1.0 - k[2] * k[2] / k2;
  return v;
}

// Gaussian elimination with partial pivoting; A is row-major m x m.
bool solve_dense(std::vector<double>& A, std::vector<double>& b, int m) {
  for (int col = 0; col < m; ++col) {
    int piv = col;
    for (int r = col + 1; r < m; ++r)
      if (std::abs(A[r * m + col]) > std::abs(A[piv * m + col])) piv = r;
    if (std::abs(A[piv * m + col]) < 1e-12) return false;
    if (piv != col) {
      for (int c = 0; c < m; ++c) std::swap(A[col * m + c], A[piv * m + c]);
      std::swap(b[col], b[piv]);
    }
    const double d = A[col * m + col];
    for (int r = col + 1; r < m; ++r) {
      const double f = A[r * m + col] / d;
      if (f == 0.0) continue;
      for (int c = col; c < m; ++c) A[r * m + c] -= f * A[col * m + c];
      b[r] -= f * b[col];
    }
  }
  for (int r = m - 1; r >= 0; --r) {
    double s = b[r];
    for (int c = r + 1; c < m; ++c) s -= A[r * m + c] * b[c];
    b[r] = s / A[r * m + r];
  }
  return true;
}

}  // namespace

// ---------------------------------------------------------------------------
// Sobol (first six dimensions, classic Joe-Kuo direction numbers)

Sobol::Sobol(int dim) : dim_(dim), dirs_(dim), state_(dim, 0) {
  if (dim < 1 || dim > 6) throw InvalidInput("Sobol: 1..6 dimensions supported");
  struct Param { int s; unsigned a; unsigned m[4]; };
  static const Param table[5] = {
      {1, 0, {1, 0, 0, 0}},
      {2, 1, {1, 3, 0, 0}},
      {3, 1, {1, 3, 1, 0}},
      {3, 2, {1, 1, 1, 0}},
      {4, 1, {1, 1, 3, 3}},
  };
  const int bits = 32;
  for (int d = 0; d < dim_; ++d) {
    auto& v = dirs_[d];
    v.assign(bits, 0);
    if (d == 0) {
      for (int i = 0; i < bits; ++i) v[i] = 1u << (31 - i);
      continue;
    }
    const Param& p = table[d - 1];
    for (int i = 0; i < p.s; ++i) v[i] = p.m[i] << (31 - i);
    for (int i = p.s; i < bits; ++i) {
      v[i] = v[i - p.s] ^ (v[i - p.s] >> p.s);
      for (int k = 1; k < p.s; ++k) v[i] ^= ((p.a >> (p.s - 1 - k)) & 1u) * v[i - k];
    }
  }
}

std::vector<double> Sobol::next() {
  // Gray-code increment
  unsigned long long c = count_++;
  int rz = 0;
  while (c & 1ull) {
    ++rz;
    c >>= 1;
  }
  std::vector<double> out(dim_);
  for (int d = 0; d < dim_; ++d) {
    state_[d] ^= dirs_[d][rz];
    out[d] = state_[d] * (1.0 / 4294967296.0);
  }
  return out;
}

Sym3 unit_sym3_direction(const std::vector<double>& u) {
  Sym3 e;
  for (int c = 0; c < 6; ++c) e.v[c] = 2.0 * u[c] - 1.0;
  const double nrm = sym3_opnorm(e);
  if (nrm < 1e-12) {
    Sym3 id = Sym3::identity();
    return id;
  }
  for (int c = 0; c < 6; ++c) e.v[c] /= nrm;
  return e;
}

// ---------------------------------------------------------------------------

std::vector<double> GammaSolver::coefficients(const Sym3& R) const {
  std::vector<double> c(pair_reps_.size(), 0.0);
  for (std::size_t p = 0; p < pair_reps_.size(); ++p)
    for (int j = 0; j < 6; ++j) c[p] += lin_[p][j] * kW[j] * R.v[j];
  return c;
}

std::vector<double> GammaSolver::gamma(const Sym3& R) const {
  const double dist = sym3_opnorm(R - Sym3::identity());
  if (dist > r0_ * (1.0 + 1e-12))
    throw OutOfBallError(dist, r0_);
  auto c = coefficients(R);
  for (auto& x : c) {
    if (x <= 0.0)
      throw OutOfBallError(dist, r0_);  // certification violated; treat as out of ball
    x = std::sqrt(x);
  }
  return c;
}

double GammaSolver::gamma_for(std::size_t signed_index, const std::vector<double>& gammas) const {
  return gammas[pair_of_signed_[signed_index]];
}

Sym3 GammaSolver::reconstruct(const std::vector<double>& coeffs) const {
  Sym3 acc;
  for (std::size_t p = 0; p < pair_reps_.size(); ++p) {
    const auto proj = projector_vec(pair_reps_[p]);
    // the pair contributes k and -k, each with weight 1/2
    for (int c = 0; c < 6; ++c) acc.v[c] += coeffs[p] * proj[c];
  }
  return acc;
}

double GammaSolver::reconstruction_residual(const Sym3& R) const {
  return sym3_opnorm(reconstruct(coefficients(R)) - R);
}

std::array<double, 6> GammaSolver::weighted_row(std::size_t pair) const {
  std::array<double, 6> r;
  for (int j = 0; j < 6; ++j) r[std::size_t(j)] = lin_[pair][std::size_t(j)] * kW[j];
  return r;
}

double GammaSolver::c_at_identity(std::size_t pair) const {
  return coefficients(Sym3::identity())[pair];
}

double GammaSolver::linear_norm_estimate(std::size_t pair) const {
  Sobol sob(6);
  double best = 0.0;
  for (int i = 0; i < 4096; ++i) {
    const Sym3 e = unit_sym3_direction(sob.next());
    double v = 0.0;
    for (int j = 0; j < 6; ++j) v += lin_[pair][j] * kW[j] * e.v[j];
    best = std::max(best, std::abs(v));
  }
  return best;
}

GammaSolver build_gamma_solver(const std::vector<Ivec3>& family, double m0, int cert_samples) {
  GammaSolver g;
  g.m0_ = m0;
  g.freqs_ = family;
  // canonical pair representatives, preserving input order
  for (const auto& k : family) {
    const Ivec3 rep = lex_less(k, neg(k)) ? neg(k) : k;
    if (std::find(g.pair_reps_.begin(), g.pair_reps_.end(), rep) == g.pair_reps_.end())
      g.pair_reps_.push_back(rep);
  }
  for (const auto& k : family) {
    const Ivec3 rep = lex_less(k, neg(k)) ? neg(k) : k;
    const auto it = std::find(g.pair_reps_.begin(), g.pair_reps_.end(), rep);
    g.pair_of_signed_.push_back(std::size_t(it - g.pair_reps_.begin()));
    if (std::find(family.begin(), family.end(), neg(k)) == family.end())
      throw InvalidInput("build_gamma_solver: family not closed under negation");
  }
  const int P = int(g.pair_reps_.size());
  if (P < 6) throw InvalidInput("build_gamma_solver: family too small to span");

  // Solve for the minimum-norm affine maps: c(R) = G^T (G G^T)^{-1} vec(R),
  // where G is 6 x P with columns vec(Id - khat x khat). We build the maps
  // row by row: lin_[p] are the coefficients of R -> c_p(R).
  std::vector<std::array<double, 6>> cols(P);
  for (int p = 0; p < P; ++p) cols[p] = projector_vec(g.pair_reps_[p]);

  // GG^T (6x6)
  std::vector<double> GGt(36, 0.0);
  for (int r = 0; r < 6; ++r)
    for (int c = 0; c < 6; ++c) {
      double s = 0.0;
      for (int p = 0; p < P; ++p) s += cols[p][r] * cols[p][c];
      GGt[r * 6 + c] = s;
    }
  // For each elementary symmetric matrix E_j (dual basis with the kW weights),
  // solve (G G^T) y = vec(E_j) and set lin_[p][j] = (G^T y)_p adjusted so that
  // c_p(R) = sum_j lin_[p][j] * kW[j] * R_j reproduces the linear map.
  g.lin_.assign(P, {0, 0, 0, 0, 0, 0});
  for (int j = 0; j < 6; ++j) {
    std::vector<double> A = GGt;
    std::vector<double> b(6, 0.0);
    b[j] = 1.0 / kW[j];
    if (!solve_dense(A, b, 6))
      throw InvalidInput("build_gamma_solver: family does not span the symmetric matrices");
    for (int p = 0; p < P; ++p) {
      double s = 0.0;
      for (int r = 0; r < 6; ++r) s += cols[p][r] * b[r];
      g.lin_[p][j] = s;
    }
  }

  // sanity: exact reconstruction of Id
  {
    const Sym3 id = Sym3::identity();
    if (g.reconstruction_residual(id) > 1e-10)
      throw InvalidInput("build_gamma_solver: reconstruction identity failed");
  }

  // Certify r0: per Sobol direction E, c_p(Id + r E) = c_p(Id) + r * c_p(E).
  Sobol sob(6);
  std::vector<double> base = g.coefficients(Sym3::identity());
  double min_base = *std::min_element(base.begin(), base.end());
  if (min_base <= m0)
    throw InvalidInput("build_gamma_solver: coefficients at Id not positive");
  std::vector<double> worst_r(static_cast<std::size_t>(cert_samples));
  for (int i = 0; i < cert_samples; ++i) {
    const Sym3 e = unit_sym3_direction(sob.next());
    const auto ce = g.coefficients(e);
    double rbound = 1e9;
    for (int p = 0; p < P; ++p)
      if (ce[p] < 0.0) rbound = std::min(rbound, (base[p] - m0) / (-ce[p]));
    worst_r[std::size_t(i)] = rbound;
  }
  double rmax = *std::min_element(worst_r.begin(), worst_r.end());
  // dense-sampling certificate refined by bisection against the sample set
  double lo = 0.0, hi = std::min(rmax * 1.5 + 1e-6, 2.0);
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    bool ok = true;
    for (double rb : worst_r)
      if (mid > rb) {
        ok = false;
        break;
      }
    (ok ? lo : hi) = mid;
  }
  g.r0_ = lo;
  if (g.r0_ < 0.01)
    throw InvalidInput("build_gamma_solver: certified r0 below 0.01");
  return g;
}

// ---------------------------------------------------------------------------

std::string GammaSolver::to_json() const {
  nlohmann::json j;
  nlohmann::json freqs = nlohmann::json::array();
  for (const auto& k : freqs_) freqs.push_back({k[0], k[1], k[2]});
  j["frequencies"] = freqs;
  nlohmann::json lin = nlohmann::json::array();
  for (const auto& row : lin_) lin.push_back(std::vector<double>(row.begin(), row.end()));
  j["affine_coefficients"] = lin;
  j["r0"] = r0_;
  j["m0"] = m0_;
  return j.dump(2);
}

GammaSolver GammaSolver::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  std::vector<Ivec3> freqs;
  for (const auto& e : j.at("frequencies"))
    freqs.push_back({e[0].get<int>(), e[1].get<int>(), e[2].get<int>()});
  GammaSolver g = build_gamma_solver(freqs, j.at("m0").get<double>(), 4096);
  // keep the freshly certified r0 unless the stored one is smaller
  g.r0_ = std::min(g.r0_, j.at("r0").get<double>());
  return g;
}

// ---------------------------------------------------------------------------

namespace {

StandardFamily build_standard_family() {
  const int lb2 = 5;
  const auto all = sphere_frequencies(lb2);  // 24 signed, 12 pairs
  std::vector<Ivec3> reps;
  for (const auto& k : all) {
    const Ivec3 rep = lex_less(k, neg(k)) ? neg(k) : k;
    if (std::find(reps.begin(), reps.end(), rep) == reps.end()) reps.push_back(rep);
  }
  const int npairs = int(reps.size());
  if (npairs != 12) throw EciError("standard_family: expected 12 pairs on |k|^2 = 5");

  auto signed_set = [&](unsigned mask, bool in) {
    std::vector<Ivec3> s;
    for (int p = 0; p < npairs; ++p)
      if (bool((mask >> p) & 1u) == in) {
        s.push_back(reps[std::size_t(p)]);
        s.push_back(neg(reps[std::size_t(p)]));
      }
    std::sort(s.begin(), s.end(), lex_less);
    return s;
  };

  // Deterministic search: pair 0 pinned to the even family, rank the 6+6
  // splits by the smaller coarsely-certified radius.
  double best_score = -1.0;
  unsigned best_mask = 0;
  for (unsigned mask = 0; mask < (1u << npairs); ++mask) {
    if (!(mask & 1u)) continue;
    if (__builtin_popcount(mask) != 6) continue;
    double score;
    try {
      GammaSolver ge = build_gamma_solver(signed_set(mask, true), 1e-3, 2048);
      GammaSolver go = build_gamma_solver(signed_set(mask, false), 1e-3, 2048);
      score = std::min(ge.r0(), go.r0());
    } catch (const EciError&) {
      continue;
    }
    if (score > best_score + 1e-12) {
      best_score = score;
      best_mask = mask;
    }
  }
  if (best_mask == 0) throw EciError("standard_family: no admissible 6+6 split found");

  StandardFamily out;
  out.family.lambda_bar_sq = lb2;
  out.family.even_set = signed_set(best_mask, true);
  out.family.odd_set = signed_set(best_mask, false);
  out.family.even_modes = build_modes(lb2, out.family.even_set);
  out.family.odd_modes = build_modes(lb2, out.family.odd_set);
  out.even_solver = build_gamma_solver(out.family.even_set, 1e-3, 100000);
  out.odd_solver = build_gamma_solver(out.family.odd_set, 1e-3, 100000);
  return out;
}

}  // namespace

const StandardFamily& standard_family() {
  static const StandardFamily fam = build_standard_family();
  return fam;
}

}  // namespace eci
