#include <algorithm>

#include "segstitch/objective.hpp"

namespace segstitch {

std::string_view constraint_name(Constraint c) {
  switch (c) {
    case Constraint::rec: return "rec";
    case Constraint::density: return "density";
    case Constraint::area: return "area";
  }
  return "unknown";
}

void SaprState::validate() const {
  for (auto c : kConstraints) {
    const auto& s = (*this)[c];
    if (!(s.lambda_lo > 0.0 && s.lambda_lo <= s.lambda_hi))
      throw ParameterError("SaprState: need 0 < lambda_lo <= lambda_hi");
    if (!(s.q_lo <= s.q_hi)) throw ParameterError("SaprState: need q_lo <= q_hi");
    if (!(s.lambda >= s.lambda_lo && s.lambda <= s.lambda_hi))
      throw ParameterError("SaprState: lambda outside [lambda_lo, lambda_hi]");
    if (!(s.step > 0.0)) throw ParameterError("SaprState: step must be positive");
  }
}

double sapr_u(double q, double q_lo) {
  const double d = q - q_lo;
  const double sign = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
  return q * sign;
}

double sapr_v(double q, double q_lo, double q_hi) { return std::min(q - q_lo, q_hi - q); }

SaprStep sapr_step(const QValues& q, const SaprState& state, double kl) {
  state.validate();
  const std::array<double, 3> qv{q.rec, q.density, q.area};

  SaprStep out{kl, state};
  for (auto c : kConstraints) {
    const auto& s = state[c];
    const double qb = qv[static_cast<std::size_t>(c)];
    const double u = sapr_u(qb, s.q_lo);
    const double v = sapr_v(qb, s.q_lo, s.q_hi);
    out.loss += s.lambda * u + s.lambda * v;
    // d(loss)/d(lambda) with u detached is v.
    out.state[c].lambda = std::clamp(s.lambda - s.step * v, s.lambda_lo, s.lambda_hi);
  }
  return out;
}

}  // namespace segstitch
