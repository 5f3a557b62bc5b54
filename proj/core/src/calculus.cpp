#include "eci/calculus.hpp"

#include <cmath>

#include "eci/fft.hpp"
#include "eci/field_ops.hpp"
#include "eci/holder.hpp"
#include "eci/random_fields.hpp"

namespace eci {

namespace {

struct Freq {
  double kx, ky, kz, k2;
};

template <typename Fn>
void for_each_mode(Spectrum& s, Fn&& fn) {
  const int n = s.grid().n;
  const int nyq = n / 2;
  for (int kzi = 0; kzi < n; ++kzi) {
    const int kz = s.freq_of(kzi);
    for (int kyi = 0; kyi < n; ++kyi) {
      const int ky = s.freq_of(kyi);
      const std::size_t o = s.index(0, kyi, kzi);
      for (int kxi = 0; kxi <= nyq; ++kxi) {
        Freq f;
        // derivatives at the Nyquist planes are zeroed by convention
        f.kx = (kxi == nyq) ? 0.0 : double(kxi);
        f.ky = (std::abs(ky) == nyq) ? 0.0 : double(ky);
        f.kz = (std::abs(kz) == nyq) ? 0.0 : double(kz);
        f.k2 = f.kx * f.kx + f.ky * f.ky + f.kz * f.kz;
        fn(f, o + kxi);
      }
    }
  }
}

}  // namespace

PeriodicField inverse_divergence(const PeriodicField& v) {
  if (v.rank() != 1) throw InvalidInput("inverse_divergence: vector input expected");
  const Grid3 g = v.grid();
  Spectrum vs = fft_forward(v);
  Spectrum out(g, 6);
  const std::complex<double> I(0.0, 1.0);

  // u = Laplace^{-1}(v - mean v); P u = u - k (k.u)/|k|^2; assemble
  // (1/4)(d_i Pu_j + d_j Pu_i) + (3/4)(d_i u_j + d_j u_i) - (1/2)(div u) delta_ij
  for_each_mode(vs, [&](const Freq& f, std::size_t i) {
    if (f.k2 == 0.0) {
      for (int c = 0; c < 6; ++c) out.comp(c)[i] = 0.0;
      return;
    }
    const double k[3] = {f.kx, f.ky, f.kz};
    std::complex<double> u[3], pu[3];
    for (int c = 0; c < 3; ++c) u[c] = vs.comp(c)[i] / (-f.k2);
    const std::complex<double> kdotu = k[0] * u[0] + k[1] * u[1] + k[2] * u[2];
    for (int c = 0; c < 3; ++c) pu[c] = u[c] - k[c] * kdotu / f.k2;
    const std::complex<double> divu = I * kdotu;
    for (int a = 0; a < 3; ++a)
      for (int b = a; b < 3; ++b) {
        std::complex<double> val = 0.25 * I * (k[a] * pu[b] + k[b] * pu[a]) +
                                   0.75 * I * (k[a] * u[b] + k[b] * u[a]);
        if (a == b) val -= 0.5 * divu;
        out.comp(Sym3::comp(a, b))[i] = val;
      }
  });

  PeriodicField res(g, 2, v.time());
  fft_inverse(out, res);
  res.set_band(v.band());
  res.set_trace_free(true);
  return res;
}

PeriodicField leray_project(const PeriodicField& v) {
  if (v.rank() != 1) throw InvalidInput("leray_project: vector input expected");
  Spectrum vs = fft_forward(v);
  for_each_mode(vs, [&](const Freq& f, std::size_t i) {
    if (f.k2 == 0.0) {
      for (int c = 0; c < 3; ++c) vs.comp(c)[i] = 0.0;
      return;
    }
    const double k[3] = {f.kx, f.ky, f.kz};
    const std::complex<double> kdotv =
        (k[0] * vs.comp(0)[i] + k[1] * vs.comp(1)[i] + k[2] * vs.comp(2)[i]) / f.k2;
    for (int c = 0; c < 3; ++c) vs.comp(c)[i] -= k[c] * kdotv;
  });
  PeriodicField out(v.grid(), 1, v.time());
  fft_inverse(vs, out);
  out.set_band(v.band());
  return out;
}

PeriodicField mollify(const PeriodicField& f, const Mollifier& m) { return m.apply(f); }

PeriodicField cet_commutator_defect(const PeriodicField& f, const PeriodicField& g,
                                    const Mollifier& m) {
  PeriodicField fl = m.apply(f);
  PeriodicField gl = m.apply(g);
  PeriodicField lhs = mult_ss(fl, gl);
  PeriodicField fg = mult_ss(f, g);
  PeriodicField rhs = m.apply(fg);
  lhs -= rhs;
  return lhs;
}

PeriodicField s_operator(const PeriodicField& v) {
  if (v.rank() != 1) throw InvalidInput("s_operator: vector input expected");
  Spectrum vs = fft_forward(v);
  Spectrum out(v.grid(), 6);
  const std::complex<double> I(0.0, 1.0);
  for_each_mode(vs, [&](const Freq& f, std::size_t i) {
    const double k[3] = {f.kx, f.ky, f.kz};
    const std::complex<double> divv =
        I * (k[0] * vs.comp(0)[i] + k[1] * vs.comp(1)[i] + k[2] * vs.comp(2)[i]);
    for (int a = 0; a < 3; ++a)
      for (int b = a; b < 3; ++b) {
        std::complex<double> val = I * (k[a] * vs.comp(b)[i] + k[b] * vs.comp(a)[i]);
        if (a == b) val -= (2.0 / 3.0) * divv;
        out.comp(Sym3::comp(a, b))[i] = val;
      }
  });
  PeriodicField res(v.grid(), 2, v.time());
  fft_inverse(out, res);
  res.set_band(v.band());
  return res;
}

double almost_inverse_defect(const PeriodicField& v) {
  PeriodicField rv = inverse_divergence(v);
  PeriodicField sv = s_operator(v);
  PeriodicField rem = v;
  rem -= divergence(sv);
  PeriodicField rhs = inverse_divergence(rem);
  rhs += sv;
  rhs -= rv;
  return rhs.sup_norm();
}

SchauderRatioReport schauder_ratio_report(Grid3 g, double alpha, int samples,
                                          std::uint64_t seed) {
  SchauderRatioReport rep;
  RandomFieldGen gen(seed);
  for (int i = 0; i < samples; ++i) {
    PeriodicField f = gen.scalar(g, 6);
    const double fn = holder_norm(f, 0, alpha).value;
    if (fn > 0.0) {
      PeriodicField phi = laplace_inverse(f);
      const double pn = holder_norm(phi, 2, alpha).value;
      rep.laplace_ratios.push_back(pn / fn);
      rep.max_laplace_ratio = std::max(rep.max_laplace_ratio, pn / fn);
    }
    PeriodicField w = gen.vector(g, 6);
    const double wn = holder_norm(w, 0, alpha).value;
    if (wn > 0.0) {
      PeriodicField rw = inverse_divergence(w);
      const double rn = holder_norm(rw, 1, alpha).value;
      rep.r_ratios.push_back(rn / wn);
      rep.max_r_ratio = std::max(rep.max_r_ratio, rn / wn);
    }
  }
  return rep;
}

}  // namespace eci
