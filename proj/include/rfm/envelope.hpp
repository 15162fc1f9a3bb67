#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rfm {

/// Certificate |f^(n)(x)| <= M C^n (n!)^s for all x in [-R, R].
struct GevreyEnvelope {
  double M = 1.0;
  double C = 0.0;
  double s = 0.0;

  /// Right-hand side of the certificate at derivative order n.
  double bound(int n) const {
    return M * std::pow(C, n) * std::pow(std::tgamma(n + 1.0), s);
  }
};

enum class PrimitiveKind { cos, sin, exp, monomial, bandlimited };

inline PrimitiveKind primitive_kind_from(std::string_view name) {
  if (name == "cos") return PrimitiveKind::cos;
  if (name == "sin") return PrimitiveKind::sin;
  if (name == "exp") return PrimitiveKind::exp;
  if (name == "monomial") return PrimitiveKind::monomial;
  if (name == "bandlimited") return PrimitiveKind::bandlimited;
  throw std::invalid_argument("unknown primitive kind: " + std::string(name));
}

struct PrimitiveParams {
  double w = 0.0;           // frequency / rate for cos, sin, exp
  int degree = 0;           // monomial x^degree
  double band = 0.0;        // bandlimited: supp f^ in [-band, band]
  double fourier_mass = 0;  // bandlimited: (2 pi)^{-1/2} * int |f^|, supplied by caller
};

/// Envelopes of the G^0 primitives on [-R, R].
inline GevreyEnvelope envelope_primitive(PrimitiveKind kind, const PrimitiveParams& p, double R) {
  if (!(R > 0.0)) throw std::invalid_argument("envelope_primitive: R must be positive");
  switch (kind) {
    case PrimitiveKind::cos:
    case PrimitiveKind::sin:
      return {1.0, std::abs(p.w), 0.0};
    case PrimitiveKind::exp:
      return {std::exp(std::abs(p.w) * R), std::abs(p.w), 0.0};
    case PrimitiveKind::monomial:
      if (p.degree < 0) throw std::invalid_argument("envelope_primitive: negative degree");
      return {std::pow(R, p.degree), p.degree / R, 0.0};
    case PrimitiveKind::bandlimited:
      if (!(p.fourier_mass > 0.0) || !(p.band > 0.0))
        throw std::invalid_argument("envelope_primitive: bandlimited needs band and mass");
      return {p.fourier_mass, p.band, 0.0};
  }
  throw std::invalid_argument("envelope_primitive: unknown kind");
}

inline GevreyEnvelope envelope_primitive(std::string_view kind, const PrimitiveParams& p, double R) {
  return envelope_primitive(primitive_kind_from(kind), p, R);
}

// Closure rules. Mixed indices take s = max(s1, s2) since G^s is contained in G^t for s <= t.

inline GevreyEnvelope envelope_scale(double a, const GevreyEnvelope& e) {
  return {std::abs(a) * e.M, e.C, e.s};
}

inline GevreyEnvelope envelope_sum(const GevreyEnvelope& e1, const GevreyEnvelope& e2) {
  return {e1.M + e2.M, std::max(e1.C, e2.C), std::max(e1.s, e2.s)};
}

inline GevreyEnvelope envelope_product(const GevreyEnvelope& e1, const GevreyEnvelope& e2) {
  return {e1.M * e2.M, e1.C + e2.C, std::max(e1.s, e2.s)};
}

inline GevreyEnvelope envelope_derivative(const GevreyEnvelope& e) {
  return {e.M * e.C, std::pow(2.0, e.s) * e.C, e.s};
}

enum class EnvelopeOp { scale, sum, product, derivative };

inline GevreyEnvelope envelope_combine(EnvelopeOp op, const GevreyEnvelope& e1,
                                       const std::optional<GevreyEnvelope>& e2 = std::nullopt,
                                       double factor = 1.0) {
  switch (op) {
    case EnvelopeOp::scale:
      return envelope_scale(factor, e1);
    case EnvelopeOp::derivative:
      return envelope_derivative(e1);
    case EnvelopeOp::sum:
    case EnvelopeOp::product:
      if (!e2) throw std::invalid_argument("envelope_combine: binary op needs two envelopes");
      return op == EnvelopeOp::sum ? envelope_sum(e1, *e2) : envelope_product(e1, *e2);
  }
  throw std::invalid_argument("envelope_combine: unknown op");
}

}  // namespace rfm
