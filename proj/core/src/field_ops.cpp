#include "eci/field_ops.hpp"

#include <algorithm>
#include <cmath>

namespace eci {

namespace {

// precondition of the public derivative: band-limited below Nyquist
void check_resolved(const PeriodicField& f, const char* what) {
  if (high_band_energy_fraction(f, f.grid().nyquist()) > 1e-12)
    throw AliasingError(std::string(what) + ": field carries energy at the Nyquist band");
}

// Smallest grid on which the product of band-b1 and band-b2 operands has its
// retained modes (|k| <= keep) alias-free: M >= b1 + b2 + keep + 2.
Grid3 product_grid(const PeriodicField& a, const PeriodicField& b) {
  const int n = a.grid().n;
  const int b1 = a.band(), b2 = b.band();
  if (b1 + b2 <= n / 2) return a.grid();
  const int keep = std::min(b1 + b2, n / 2);
  return Grid3(std::max(n, next_fft_size(b1 + b2 + keep + 2)));
}

struct ProductOperands {
  PeriodicField ua, ub;
  Grid3 work;
  Grid3 home;
};

ProductOperands lift(const PeriodicField& a, const PeriodicField& b) {
  if (a.grid() != b.grid()) throw InvalidInput("product: grid mismatch");
  ProductOperands ops;
  ops.home = a.grid();
  ops.work = product_grid(a, b);
  if (ops.work == ops.home) {
    ops.ua = a;
    ops.ub = b;
  } else {
    ops.ua = regrid(a, ops.work);
    ops.ub = regrid(b, ops.work);
  }
  return ops;
}

PeriodicField settle(PeriodicField prod, const ProductOperands& ops, int band_sum) {
  prod.set_band(std::min(band_sum, ops.home.nyquist()));
  if (ops.work == ops.home) return prod;
  PeriodicField out = regrid(prod, ops.home);
  out.set_band(std::min(band_sum, ops.home.nyquist()));
  return out;
}

}  // namespace

PeriodicField regrid(const PeriodicField& f, Grid3 to) {
  if (f.grid() == to) return f;
  Spectrum s = fft_forward(f);
  Spectrum r = resample(s, to);
  PeriodicField out(to, f.rank(), f.time());
  fft_inverse(r, out);
  out.set_band(std::min(f.band(), to.nyquist()));
  out.set_trace_free(f.trace_free());
  return out;
}

PeriodicField spectral_derivative(const PeriodicField& f, int axis) {
  if (axis < 1 || axis > 3) throw InvalidInput("spectral_derivative: axis must be 1..3");
  check_resolved(f, "spectral_derivative");
  Spectrum s = fft_forward(f);
  derivative_inplace(s, axis - 1);
  PeriodicField out(f.grid(), f.rank(), f.time());
  fft_inverse(s, out);
  out.set_band(f.band());
  return out;
}

PeriodicField gradient(const PeriodicField& f) {
  if (f.rank() != 0) throw InvalidInput("gradient: scalar input expected");
  Spectrum s = fft_forward(f);
  PeriodicField out(f.grid(), 1, f.time());
  PeriodicField tmp(f.grid(), 0);
  for (int ax = 0; ax < 3; ++ax) {
    Spectrum d = s;
    derivative_inplace(d, ax);
    fft_inverse(d, tmp);
    std::copy(tmp.comp(0), tmp.comp(0) + tmp.nodes(), out.comp(ax));
  }
  out.set_band(f.band());
  return out;
}

PeriodicField divergence(const PeriodicField& f) {
  const Grid3 g = f.grid();
  if (f.rank() == 1) {
    Spectrum s = fft_forward(f);
    Spectrum acc(g, 1);
    for (int ax = 0; ax < 3; ++ax) {
      Spectrum d(g, 1);
      std::copy(s.comp(ax), s.comp(ax) + s.comp_size(), d.comp(0));
      derivative_inplace(d, ax);
      auto* a = acc.comp(0);
      const auto* dd = d.comp(0);
      for (std::size_t i = 0; i < acc.comp_size(); ++i) a[i] += dd[i];
    }
    PeriodicField out(g, 0, f.time());
    fft_inverse(acc, out);
    out.set_band(f.band());
    return out;
  }
  if (f.rank() == 2) {
    Spectrum s = fft_forward(f);
    Spectrum acc(g, 3);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        Spectrum d(g, 1);
        const int c = Sym3::comp(i, j);
        std::copy(s.comp(c), s.comp(c) + s.comp_size(), d.comp(0));
        derivative_inplace(d, j);
        auto* a = acc.comp(i);
        const auto* dd = d.comp(0);
        for (std::size_t m = 0; m < acc.comp_size(); ++m) a[m] += dd[m];
      }
    }
    PeriodicField out(g, 1, f.time());
    fft_inverse(acc, out);
    out.set_band(f.band());
    return out;
  }
  throw InvalidInput("divergence: rank 1 or 2 expected");
}

PeriodicField curl(const PeriodicField& v) {
  if (v.rank() != 1) throw InvalidInput("curl: vector input expected");
  const Grid3 g = v.grid();
  Spectrum s = fft_forward(v);
  // (curl v)_i = eps_ijk d_j v_k
  Spectrum acc(g, 3);
  auto add_term = [&](int out_c, int d_axis, int src_c, double sign) {
    Spectrum d(g, 1);
    std::copy(s.comp(src_c), s.comp(src_c) + s.comp_size(), d.comp(0));
    derivative_inplace(d, d_axis);
    auto* a = acc.comp(out_c);
    const auto* dd = d.comp(0);
    for (std::size_t m = 0; m < acc.comp_size(); ++m) a[m] += sign * dd[m];
  };
  add_term(0, 1, 2, 1.0);
  add_term(0, 2, 1, -1.0);
  add_term(1, 2, 0, 1.0);
  add_term(1, 0, 2, -1.0);
  add_term(2, 0, 1, 1.0);
  add_term(2, 1, 0, -1.0);
  PeriodicField out(g, 1, v.time());
  fft_inverse(acc, out);
  out.set_band(v.band());
  return out;
}

std::array<PeriodicField, 3> jacobian_rows(const PeriodicField& v) {
  if (v.rank() != 1) throw InvalidInput("jacobian_rows: vector input expected");
  const Grid3 g = v.grid();
  Spectrum s = fft_forward(v);
  std::array<PeriodicField, 3> rows = {PeriodicField(g, 1, v.time()),
                                       PeriodicField(g, 1, v.time()),
                                       PeriodicField(g, 1, v.time())};
  PeriodicField tmp(g, 0);
  for (int i = 0; i < 3; ++i) {
    for (int ax = 0; ax < 3; ++ax) {
      Spectrum d(g, 1);
      std::copy(s.comp(i), s.comp(i) + s.comp_size(), d.comp(0));
      derivative_inplace(d, ax);
      fft_inverse(d, tmp);
      std::copy(tmp.comp(0), tmp.comp(0) + tmp.nodes(), rows[i].comp(ax));
    }
    rows[i].set_band(v.band());
  }
  return rows;
}

PeriodicField laplace_inverse(const PeriodicField& f) {
  const Grid3 g = f.grid();
  Spectrum s = fft_forward(f);
  const int n = g.n, nyq = g.nyquist();
  for (int c = 0; c < s.ncomp(); ++c) {
    auto* d = s.comp(c);
    for (int kzi = 0; kzi < n; ++kzi) {
      const int kz = s.freq_of(kzi);
      for (int kyi = 0; kyi < n; ++kyi) {
        const int ky = s.freq_of(kyi);
        const std::size_t o = s.index(0, kyi, kzi);
        for (int kxi = 0; kxi <= nyq; ++kxi) {
          const double k2 = double(kxi) * kxi + double(ky) * ky + double(kz) * kz;
          d[o + kxi] = (k2 == 0.0) ? 0.0 : d[o + kxi] / (-k2);
        }
      }
    }
  }
  PeriodicField out(g, f.rank(), f.time());
  fft_inverse(s, out);
  out.set_band(f.band());
  return out;
}

double high_band_energy_fraction(const PeriodicField& f, int threshold_band) {
  Spectrum s = fft_forward(f);
  double total = 0.0, high = 0.0;
  const int n = f.grid().n;
  for (int c = 0; c < s.ncomp(); ++c) {
    const auto* d = s.comp(c);
    for (int kzi = 0; kzi < n; ++kzi) {
      const int kz = std::abs(s.freq_of(kzi));
      for (int kyi = 0; kyi < n; ++kyi) {
        const int ky = std::abs(s.freq_of(kyi));
        const std::size_t o = s.index(0, kyi, kzi);
        for (int kxi = 0; kxi < s.nx_half(); ++kxi) {
          // r2c stores half the modes; weight interior kx twice.
          const double w = (kxi == 0 || kxi == n / 2) ? 1.0 : 2.0;
          const double e = w * std::norm(d[o + kxi]);
          total += e;
          if (std::max(kxi, std::max(ky, kz)) >= threshold_band) high += e;
        }
      }
    }
  }
  return total == 0.0 ? 0.0 : high / total;
}

namespace {

PeriodicField pointwise_binary(const PeriodicField& a, const PeriodicField& b,
                               int out_rank,
                               void (*op)(const PeriodicField&, const PeriodicField&,
                                          PeriodicField&)) {
  ProductOperands ops = lift(a, b);
  PeriodicField prod(ops.work, out_rank, a.time());
  op(ops.ua, ops.ub, prod);
  return settle(std::move(prod), ops, a.band() + b.band());
}

}  // namespace

PeriodicField mult_ss(const PeriodicField& a, const PeriodicField& b) {
  return pointwise_binary(a, b, 0, [](const PeriodicField& x, const PeriodicField& y,
                                      PeriodicField& out) {
    const double *p = x.comp(0), *q = y.comp(0);
    double* o = out.comp(0);
    for (std::size_t i = 0; i < out.nodes(); ++i) o[i] = p[i] * q[i];
  });
}

PeriodicField mult_sv(const PeriodicField& s, const PeriodicField& v) {
  return pointwise_binary(s, v, 1, [](const PeriodicField& x, const PeriodicField& y,
                                      PeriodicField& out) {
    const double* p = x.comp(0);
    for (int c = 0; c < 3; ++c) {
      const double* q = y.comp(c);
      double* o = out.comp(c);
      for (std::size_t i = 0; i < out.nodes(); ++i) o[i] = p[i] * q[i];
    }
  });
}

PeriodicField dot_vv(const PeriodicField& a, const PeriodicField& b) {
  return pointwise_binary(a, b, 0, [](const PeriodicField& x, const PeriodicField& y,
                                      PeriodicField& out) {
    double* o = out.comp(0);
    const double *x0 = x.comp(0), *x1 = x.comp(1), *x2 = x.comp(2);
    const double *y0 = y.comp(0), *y1 = y.comp(1), *y2 = y.comp(2);
    for (std::size_t i = 0; i < out.nodes(); ++i)
      o[i] = x0[i] * y0[i] + x1[i] * y1[i] + x2[i] * y2[i];
  });
}

PeriodicField outer_sym(const PeriodicField& a, const PeriodicField& b) {
  return pointwise_binary(a, b, 2, [](const PeriodicField& x, const PeriodicField& y,
                                      PeriodicField& out) {
    for (int i = 0; i < 3; ++i) {
      for (int j = i; j < 3; ++j) {
        const double *xi = x.comp(i), *xj = x.comp(j);
        const double *yi = y.comp(i), *yj = y.comp(j);
        double* o = out.comp(Sym3::comp(i, j));
        for (std::size_t m = 0; m < out.nodes(); ++m)
          o[m] = 0.5 * (xi[m] * yj[m] + xj[m] * yi[m]);
      }
    }
  });
}

PeriodicField advect(const PeriodicField& f, const PeriodicField& v) {
  // (v . grad) f, one de-aliased product per component of f.
  PeriodicField out(f.grid(), f.rank(), f.time());
  PeriodicField scal(f.grid(), 0, f.time());
  for (int c = 0; c < f.ncomp(); ++c) {
    std::copy(f.comp(c), f.comp(c) + f.nodes(), scal.comp(0));
    scal.set_band(f.band());
    PeriodicField g = gradient(scal);
    PeriodicField res = dot_vv(v, g);
    std::copy(res.comp(0), res.comp(0) + res.nodes(), out.comp(c));
  }
  out.set_band(std::min(f.band() + v.band(), f.grid().nyquist()));
  return out;
}

double mean_dot(const PeriodicField& a, const PeriodicField& b) {
  double sum = 0.0, comp_err = 0.0;
  for (std::size_t i = 0; i < a.raw().size(); ++i) {
    const double y = a.raw()[i] * b.raw()[i] - comp_err;
    const double t = sum + y;
    comp_err = (t - sum) - y;
    sum = t;
  }
  return sum / double(a.nodes());
}

double mean_square(const PeriodicField& v) { return mean_dot(v, v); }

double integral_square(const PeriodicField& v) {
  return mean_square(v) * kTwoPi * kTwoPi * kTwoPi;
}

std::array<double, 6> component_means(const PeriodicField& f) {
  std::array<double, 6> m = {0, 0, 0, 0, 0, 0};
  for (int c = 0; c < f.ncomp(); ++c) m[c] = f.mean(c);
  return m;
}

}  // namespace eci
