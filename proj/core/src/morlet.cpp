// SPDX-FileCopyrightText: © 2026 pscat authors
//
// SPDX-License-Identifier: Apache-2.0

#include "pscat/morlet.hpp"

#include <cmath>
#include <string>

namespace pscat {
namespace {

// Per-pixel quantities shared by every routine below.
struct Point {
  double u1, u2;
  double a;  // u1 cos + u2 sin (the rotated coordinate u')
  double b;  // -u1 sin + u2 cos
  double q;  // |D_gamma R_theta u|^2
  double envelope;
  cplx phase;
};

template <class Fn>
void for_each_point(const MorletParams& p, const GridSpec& g, Fn&& fn) {
  const double c = std::cos(p.theta);
  const double s = std::sin(p.theta);
  const double g2 = p.gamma * p.gamma;
  const double inv2s2 = 1.0 / (2.0 * p.sigma * p.sigma);
  for (int i = 0; i < g.n; ++i) {
    const double u1 = g.coord(i);
    for (int j = 0; j < g.n; ++j) {
      const double u2 = g.coord(j);
      Point pt{u1, u2, c * u1 + s * u2, -s * u1 + c * u2, 0.0, 0.0, {}};
      pt.q = pt.a * pt.a + g2 * pt.b * pt.b;
      pt.envelope = std::exp(-pt.q * inv2s2);
      pt.phase = std::polar(1.0, p.xi * pt.a);
      fn(i, j, pt);
    }
  }
}

void check_envelope(double sum) {
  if (!(sum >= 1e-300)) {
    throw DegenerateEnvelope("Morlet envelope sums to " + std::to_string(sum) + " on the grid");
  }
}

}  // namespace

ComplexField gabor_sample(const MorletParams& p, const GridSpec& g) {
  ComplexField out(g.n);
  for_each_point(p, g, [&](int i, int j, const Point& pt) { out(i, j) = pt.envelope * pt.phase; });
  return out;
}

cplx morlet_beta(const MorletParams& p, const GridSpec& g) {
  cplx num = 0.0;
  double den = 0.0;
  for_each_point(p, g, [&](int, int, const Point& pt) {
    num += pt.envelope * pt.phase;
    den += pt.envelope;
  });
  check_envelope(den);
  return num / den;
}

ComplexField morlet_sample(const MorletParams& p, const GridSpec& g) {
  const cplx beta = morlet_beta(p, g);
  ComplexField out(g.n);
  for_each_point(p, g,
                 [&](int i, int j, const Point& pt) { out(i, j) = pt.envelope * (pt.phase - beta); });
  return out;
}

MorletGrads gabor_param_grads(const MorletParams& p, const GridSpec& g) {
  const double c = std::cos(p.theta);
  const double s = std::sin(p.theta);
  const double g2 = p.gamma * p.gamma;
  const double s2 = p.sigma * p.sigma;
  const double s3 = s2 * p.sigma;
  const cplx i_unit(0.0, 1.0);
  MorletGrads d{ComplexField(g.n), ComplexField(g.n), ComplexField(g.n), ComplexField(g.n)};
  for_each_point(p, g, [&](int i, int j, const Point& pt) {
    const double u1 = pt.u1, u2 = pt.u2;
    const cplx phi = pt.envelope * pt.phase;
    d.theta(i, j) = (1.0 / s2) * (u2 * c - u1 * s) *
                    (i_unit * p.xi * s2 + u1 * (g2 - 1.0) * c + u2 * (g2 - 1.0) * s) * phi;
    d.sigma(i, j) = (1.0 / s3) *
                    (u1 * u1 * (c * c + g2 * s * s) + u2 * u2 * (g2 * c * c + s * s) +
                     2.0 * u1 * u2 * c * s * (1.0 - g2)) *
                    phi;
    d.xi(i, j) = i_unit * (u1 * c + u2 * s) * phi;
    d.gamma(i, j) = -(1.0 / s2) *
                    (u1 * u1 * p.gamma * s * s + u2 * u2 * p.gamma * c * c -
                     2.0 * u1 * u2 * p.gamma * c * s) *
                    phi;
  });
  return d;
}

MorletGrads morlet_param_grads(const MorletParams& p, const GridSpec& g) {
  // psi = gabor - beta * env, beta = N / D with N = sum gabor, D = sum env.
  // d psi = d gabor - (d beta) env - beta d env, d beta = (dN - beta dD) / D.
  const double g2 = p.gamma * p.gamma;
  const double s2 = p.sigma * p.sigma;
  const double s3 = s2 * p.sigma;

  MorletGrads d = gabor_param_grads(p, g);
  RealField env(g.n);
  RealField env_theta(g.n), env_sigma(g.n), env_gamma(g.n);

  cplx num = 0.0;
  double den = 0.0;
  cplx dnum_theta = 0.0, dnum_sigma = 0.0, dnum_xi = 0.0, dnum_gamma = 0.0;
  double dden_theta = 0.0, dden_sigma = 0.0, dden_gamma = 0.0;

  for_each_point(p, g, [&](int i, int j, const Point& pt) {
    env(i, j) = pt.envelope;
    env_theta(i, j) = pt.a * pt.b * (g2 - 1.0) / s2 * pt.envelope;
    env_sigma(i, j) = pt.q / s3 * pt.envelope;
    env_gamma(i, j) = -p.gamma * pt.b * pt.b / s2 * pt.envelope;

    num += pt.envelope * pt.phase;
    den += pt.envelope;
    dnum_theta += d.theta(i, j);
    dnum_sigma += d.sigma(i, j);
    dnum_xi += d.xi(i, j);
    dnum_gamma += d.gamma(i, j);
    dden_theta += env_theta(i, j);
    dden_sigma += env_sigma(i, j);
    dden_gamma += env_gamma(i, j);
  });
  check_envelope(den);

  const cplx beta = num / den;
  const cplx dbeta_theta = (dnum_theta - beta * dden_theta) / den;
  const cplx dbeta_sigma = (dnum_sigma - beta * dden_sigma) / den;
  const cplx dbeta_xi = dnum_xi / den;
  const cplx dbeta_gamma = (dnum_gamma - beta * dden_gamma) / den;

  for (std::size_t k = 0; k < env.size(); ++k) {
    d.theta[k] -= dbeta_theta * env[k] + beta * env_theta[k];
    d.sigma[k] -= dbeta_sigma * env[k] + beta * env_sigma[k];
    d.xi[k] -= dbeta_xi * env[k];
    d.gamma[k] -= dbeta_gamma * env[k] + beta * env_gamma[k];
  }
  return d;
}

}  // namespace pscat
