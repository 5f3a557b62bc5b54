#pragma once

#include "eci/field.hpp"
#include "eci/mollifier.hpp"

namespace eci {

/// The order -1 inverse divergence: R v = (1/4)(grad P u + (grad P u)^T)
/// + (3/4)(grad u + (grad u)^T) - (1/2)(div u) Id with Laplace u = v - mean v,
/// mean u = 0. Output symmetric trace-free; div(R v) = v - mean(v).
PeriodicField inverse_divergence(const PeriodicField& v);

/// Leray projection onto divergence-free fields with zero average.
PeriodicField leray_project(const PeriodicField& v);

/// Convolution in space only (see Mollifier); mean preserved.
PeriodicField mollify(const PeriodicField& f, const Mollifier& m);

/// (f * psi_ell)(g * psi_ell) - (fg) * psi_ell, de-aliased.
PeriodicField cet_commutator_defect(const PeriodicField& f, const PeriodicField& g,
                                    const Mollifier& m);

/// S(v) = grad v + (grad v)^T - (2/3)(div v) Id.
PeriodicField s_operator(const PeriodicField& v);

/// || R(v) - S(v) - R(v - div S(v)) ||_0  (the almost-inverse identity).
double almost_inverse_defect(const PeriodicField& v);

struct SchauderRatioReport {
  std::vector<double> laplace_ratios;  // ||phi||_{2+a} / ||f||_a, Laplace phi = f
  std::vector<double> r_ratios;        // ||R v||_{1+a} / ||v||_a
  double max_laplace_ratio = 0.0;
  double max_r_ratio = 0.0;
};

/// Measured Schauder-type ratios on seeded random band-limited fields;
/// diagnostics only, nothing asserted against a closed-form constant.
SchauderRatioReport schauder_ratio_report(Grid3 g, double alpha, int samples,
                                          std::uint64_t seed);

}  // namespace eci
