#include "eci/beltrami.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "eci/fft.hpp"

namespace eci {

namespace {

bool lex_less(const Ivec3& a, const Ivec3& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

Ivec3 neg(const Ivec3& k) { return {-k[0], -k[1], -k[2]}; }

std::array<double, 3> cross(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

}  // namespace

std::vector<Ivec3> sphere_frequencies(int lambda_bar_sq) {
  std::vector<Ivec3> out;
  const int r = int(std::floor(std::sqrt(double(lambda_bar_sq)))) + 1;
  for (int kx = -r; kx <= r; ++kx)
    for (int ky = -r; ky <= r; ++ky)
      for (int kz = -r; kz <= r; ++kz)
        if (kx * kx + ky * ky + kz * kz == lambda_bar_sq) out.push_back({kx, ky, kz});
  std::sort(out.begin(), out.end(), lex_less);
  return out;
}

std::vector<BeltramiMode> build_modes(int lambda_bar_sq, const std::vector<Ivec3>& freqs) {
  for (const auto& k : freqs) {
    if (k[0] * k[0] + k[1] * k[1] + k[2] * k[2] != lambda_bar_sq)
      throw InvalidInput("build_modes: frequency off the sphere |k|^2 = lambda_bar^2");
    if (std::find(freqs.begin(), freqs.end(), neg(k)) == freqs.end())
      throw InvalidInput("build_modes: set not closed under negation");
  }
  const double norm_k = std::sqrt(double(lambda_bar_sq));
  std::vector<BeltramiMode> out;
  out.reserve(freqs.size());
  for (const auto& k : freqs) {
    const Ivec3 rep = lex_less(k, neg(k)) ? neg(k) : k;  // A computed for lexmax(k,-k)
    const std::array<double, 3> khat_rep = {rep[0] / norm_k, rep[1] / norm_k, rep[2] / norm_k};
    const auto c1 = cross(khat_rep, {0, 0, 1});
    const auto c2 = cross(khat_rep, {0, 1, 0});
    const double n1 = c1[0] * c1[0] + c1[1] * c1[1] + c1[2] * c1[2];
    const double n2 = c2[0] * c2[0] + c2[1] * c2[1] + c2[2] * c2[2];
    auto base = (n1 >= n2) ? c1 : c2;
    const double nb = std::sqrt(std::max(n1, n2));
    for (auto& v : base) v /= nb * std::sqrt(2.0);
    for (double v : base) {  // sign: first nonzero component positive
      if (v > 1e-14) break;
      if (v < -1e-14) {
        for (auto& w : base) w = -w;
        break;
      }
    }
    BeltramiMode m;
    m.k = k;
    m.A = base;
    const std::array<double, 3> khat = {k[0] / norm_k, k[1] / norm_k, k[2] / norm_k};
    const auto kxA = cross(khat, m.A);
    for (int i = 0; i < 3; ++i) m.B[i] = std::complex<double>(m.A[i], kxA[i]);
    out.push_back(m);
  }
  return out;
}

PeriodicField evaluate_beltrami(const std::vector<BeltramiMode>& modes,
                                const std::vector<std::complex<double>>& amplitudes,
                                Grid3 grid, int lambda) {
  if (modes.size() != amplitudes.size())
    throw InvalidInput("evaluate_beltrami: one amplitude per mode expected");
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const Ivec3 nk = neg(modes[i].k);
    bool found = false;
    for (std::size_t j = 0; j < modes.size(); ++j) {
      if (modes[j].k == nk) {
        found = true;
        if (std::abs(amplitudes[j] - std::conj(amplitudes[i])) >
            1e-14 * (1.0 + std::abs(amplitudes[i])))
          throw InvalidInput("evaluate_beltrami: conjugate symmetry of amplitudes broken");
      }
    }
    if (!found) throw InvalidInput("evaluate_beltrami: mode set not closed under negation");
  }
  int kmax = 0;
  for (const auto& m : modes)
    kmax = std::max({kmax, std::abs(m.k[0]), std::abs(m.k[1]), std::abs(m.k[2])});
  if (lambda < 1 || lambda * kmax >= grid.nyquist())
    throw AliasingError("evaluate_beltrami: lambda*|k| at or above Nyquist");

  Spectrum s(grid, 3);
  const int n = grid.n;
  auto idx_of = [&](int k) { return k >= 0 ? k : k + n; };
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const auto& m = modes[i];
    const int kx = lambda * m.k[0], ky = lambda * m.k[1], kz = lambda * m.k[2];
    // kx > 0: the conjugate partner is implicit in the r2c layout.
    // kx = 0: both members of the pair live in the stored plane, place each.
    if (kx < 0) continue;
    for (int c = 0; c < 3; ++c)
      s.comp(c)[s.index(kx, idx_of(ky), idx_of(kz))] += amplitudes[i] * m.B[c];
  }
  PeriodicField out(grid, 1);
  fft_inverse(s, out);
  out.set_band(lambda * kmax);
  return out;
}

Sym3 beltrami_mean_outer(const std::vector<BeltramiMode>& modes,
                         const std::vector<std::complex<double>>& amplitudes) {
  Sym3 acc;
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const auto& k = modes[i].k;
    const double k2 = double(k[0]) * k[0] + double(k[1]) * k[1] + double(k[2]) * k[2];
    const double a2 = std::norm(amplitudes[i]);
    for (int r = 0; r < 3; ++r)
      for (int c = r; c < 3; ++c) {
        const double id = (r == c) ? 1.0 : 0.0;
        acc.at(r, c) += 0.5 * a2 * (id - k[r] * k[c] / k2);
      }
  }
  return acc;
}

double check_bk_identity(const std::vector<BeltramiMode>& modes) {
  double worst = 0.0;
  for (const auto& m1 : modes) {
    for (const auto& m2 : modes) {
      std::complex<double> dot = 0.0;
      for (int i = 0; i < 3; ++i) dot += m1.B[i] * m2.B[i];
      const std::array<double, 3> ks = {double(m1.k[0] + m2.k[0]), double(m1.k[1] + m2.k[1]),
                                        double(m1.k[2] + m2.k[2])};
      for (int i = 0; i < 3; ++i) {
        std::complex<double> lhs = 0.0;
        for (int j = 0; j < 3; ++j) lhs += (m1.B[i] * m2.B[j] + m2.B[i] * m1.B[j]) * ks[j];
        const std::complex<double> rhs = dot * ks[i];
        worst = std::max(worst, std::abs(lhs - rhs));
      }
    }
  }
  return worst;
}

std::string ModeFamily::to_json() const {
  nlohmann::json j;
  j["lambda_bar_sq"] = lambda_bar_sq;
  auto dump_set = [](const std::vector<Ivec3>& s) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& k : s) arr.push_back({k[0], k[1], k[2]});
    return arr;
  };
  auto dump_modes = [](const std::vector<BeltramiMode>& ms) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& m : ms) {
      nlohmann::json e;
      e["k"] = {m.k[0], m.k[1], m.k[2]};
      e["A"] = {m.A[0], m.A[1], m.A[2]};
      arr.push_back(e);
    }
    return arr;
  };
  j["even"] = dump_set(even_set);
  j["odd"] = dump_set(odd_set);
  j["even_modes"] = dump_modes(even_modes);
  j["odd_modes"] = dump_modes(odd_modes);
  return j.dump(2);
}

ModeFamily ModeFamily::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  ModeFamily f;
  f.lambda_bar_sq = j.at("lambda_bar_sq").get<int>();
  auto load_set = [](const nlohmann::json& arr) {
    std::vector<Ivec3> out;
    for (const auto& e : arr) out.push_back({e[0].get<int>(), e[1].get<int>(), e[2].get<int>()});
    return out;
  };
  f.even_set = load_set(j.at("even"));
  f.odd_set = load_set(j.at("odd"));
  f.even_modes = build_modes(f.lambda_bar_sq, f.even_set);
  f.odd_modes = build_modes(f.lambda_bar_sq, f.odd_set);
  return f;
}

}  // namespace eci
