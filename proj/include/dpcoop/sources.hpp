#ifndef DPCOOP_SOURCES_HPP
#define DPCOOP_SOURCES_HPP

#include <stdexcept>
#include <string>

#include "dpcoop/game.hpp"

namespace dpcoop::sources {

// Two states of the world shared by both partners; intuition probability
// depends on the state.
struct StateBasedParams {
  double pA = 0.5;
  double kA = 0.5;
  double kB = 0.5;

  void validate() const {
    if (!(pA > 0.0 && pA < 1.0)) throw ConfigError("pA", "must lie in (0,1)");
    if (!is_probability(kA)) throw ConfigError("kA", "must lie in [0,1]");
    if (!is_probability(kB)) throw ConfigError("kB", "must lie in [0,1]");
  }
};

// Two agent types with a Bergstrom assortativity index a_types:
// p(X|X) = a + (1-a) q and p(X|Y) = (1-a) q.
struct TypeBasedParams {
  double q = 0.5;
  double a_types = 0.0;
  double kX = 0.5;
  double kY = 0.5;

  double p_x_given_x() const { return a_types + (1.0 - a_types) * q; }
  double p_x_given_y() const { return (1.0 - a_types) * q; }

  void validate() const {
    if (!(q > 0.0 && q < 1.0)) throw ConfigError("q", "must lie in (0,1)");
    if (!is_probability(a_types)) throw ConfigError("a_types", "must lie in [0,1]");
    if (!is_probability(kX)) throw ConfigError("kX", "must lie in [0,1]");
    if (!is_probability(kY)) throw ConfigError("kY", "must lie in [0,1]");
  }
};

struct CognitionAssortReport {
  double pD = 0.0;
  double pI = 0.0;
  double pDD = 0.0;  // P(focal D and partner D)
  double pDI = 0.0;  // P(focal I and partner D)
  double pD_given_D = 0.0;
  double pD_given_I = 0.0;
  double delta = 0.0;
};

class UndefinedConditional : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

namespace detail {
// delta = (pDD pI - pDI pD) / (pD pI). The numerator is evaluated in its
// factored form so that delta is exactly zero when it should be.
inline CognitionAssortReport finish(double pD, double pI, double pDD, double pDI, double numerator) {
  if (!(pD > 0.0)) throw UndefinedConditional("p(D) = 0: no deliberating agents, p(D|D) undefined");
  if (!(pI > 0.0)) throw UndefinedConditional("p(I) = 0: no intuitive agents, p(D|I) undefined");
  CognitionAssortReport r;
  r.pD = pD;
  r.pI = pI;
  r.pDD = pDD;
  r.pDI = pDI;
  r.pD_given_D = pDD / pD;
  r.pD_given_I = pDI / pI;
  r.delta = numerator / (pD * pI);
  return r;
}
}  // namespace detail

inline CognitionAssortReport state_based_report(const StateBasedParams& s) {
  s.validate();
  const double pB = 1.0 - s.pA;
  const double dA = 1.0 - s.kA, dB = 1.0 - s.kB;
  const double pD = s.pA * dA + pB * dB;
  const double pI = s.pA * s.kA + pB * s.kB;
  const double pDD = s.pA * dA * dA + pB * dB * dB;
  const double pDI = s.pA * dA * s.kA + pB * dB * s.kB;
  const double gap = s.kA - s.kB;
  return detail::finish(pD, pI, pDD, pDI, s.pA * pB * gap * gap);
}

inline CognitionAssortReport type_based_report(const TypeBasedParams& t) {
  t.validate();
  const double q = t.q, r = 1.0 - q;
  const double xx = t.p_x_given_x(), yx = 1.0 - xx;
  const double xy = t.p_x_given_y(), yy = 1.0 - xy;
  const double dX = 1.0 - t.kX, dY = 1.0 - t.kY;
  const double pD = q * dX + r * dY;
  const double pI = q * t.kX + r * t.kY;
  const double pDD = q * xx * dX * dX + q * yx * dX * dY + r * xy * dY * dX + r * yy * dY * dY;
  const double pDI = q * xx * dX * t.kX + q * yx * dY * t.kX + r * xy * dX * t.kY + r * yy * dY * t.kY;
  const double gap = t.kX - t.kY;
  return detail::finish(pD, pI, pDD, pDI, t.a_types * q * r * gap * gap);
}

}  // namespace dpcoop::sources

#endif  // DPCOOP_SOURCES_HPP
