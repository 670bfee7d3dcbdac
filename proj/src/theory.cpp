#include "dpfed/theory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace dpfed {

double rate_from_D(double D, double gamma) {
  if (!(D >= 0.0)) throw std::invalid_argument("rate_from_D: D must be >= 0");
  if (D == 0.0) return 1.0;
  return std::min(std::pow(D, -2.0 * gamma), 1.0);
}

double rate_global_hom(double m, double n, double eps, double alpha) {
  if (!(m >= 1.0 && n >= 1.0)) throw std::invalid_argument("rate: m and n must be >= 1");
  if (!(eps > 0.0)) throw std::invalid_argument("rate: eps must be positive");
  if (!(alpha > 0.0)) throw std::invalid_argument("rate: smoothness must be positive");
  const double privacy = std::pow(m * n * n * eps * eps, -2.0 * alpha / (2.0 * alpha + 2.0));
  const double sampling = std::pow(m * n, -2.0 * alpha / (2.0 * alpha + 1.0));
  return std::min(1.0, privacy + sampling);
}

double rate_point_hom(double m, double n, double eps, double alpha, double p) {
  const double nu = alpha - (std::isinf(p) ? 0.0 : 1.0 / p);
  if (nu < 0.5) throw std::invalid_argument(fmt::format("rate: nu = {} below 1/2", nu));
  return rate_global_hom(m, n, eps, nu);
}

std::string to_string(Regime r) {
  switch (r) {
    case Regime::no_dominant: return "no-dominant";
    case Regime::dominant: return "dominant";
    case Regime::mixed: return "mixed";
  }
  return "?";
}

double no_dominant_rate(std::span<const ServerSpec> servers, double gamma) {
  double s = 0.0;
  for (const auto& srv : servers) {
    const double n = static_cast<double>(srv.n);
    s += n * n * srv.budget.eps * srv.budget.eps;
  }
  return std::pow(s, -2.0 * gamma / (2.0 * gamma + 2.0));
}

double dominant_rate(const ServerSpec& server, double gamma) {
  const double n = static_cast<double>(server.n);
  const double e = server.budget.eps;
  return std::pow(n * n * e * e, -2.0 * gamma / (2.0 * gamma + 2.0)) +
         std::pow(n, -2.0 * gamma / (2.0 * gamma + 1.0));
}

RegimeReport classify_regime(std::span<const ServerSpec> servers, double gamma, double kappa) {
  if (servers.empty()) throw std::invalid_argument("classify_regime: empty server list");
  if (!(kappa > 0.0)) throw std::invalid_argument("classify_regime: kappa must be positive");
  RegimeReport rep;
  rep.gamma = gamma;
  rep.kappa = kappa;
  rep.D = solve_resolution(gamma, servers);
  rep.rate = rate_from_D(rep.D, gamma);

  const double m = static_cast<double>(servers.size());
  double total = 0.0, max_ne2 = 0.0, N = 0.0, min_delta = 1.0;
  for (const auto& s : servers) {
    const double n = static_cast<double>(s.n);
    total += n * n * s.budget.eps * s.budget.eps;
    max_ne2 = std::max(max_ne2, n * s.budget.eps * s.budget.eps);
    N += n;
    min_delta = std::min(min_delta, s.budget.delta);
  }

  // Dominant budget: some j* whose three-way minimum covers all other servers.
  for (std::size_t j = 0; j < servers.size(); ++j) {
    const double n = static_cast<double>(servers[j].n);
    const double e = servers[j].budget.eps;
    const double a = n * n * e * e;
    const double b = std::pow(n, (2.0 * gamma + 4.0) / (2.0 * gamma + 2.0)) *
                     std::pow(e, 2.0 / (2.0 * gamma + 2.0));
    const double c = std::pow(n, (2.0 * gamma + 2.0) / (2.0 * gamma + 1.0));
    if (std::min({a, b, c}) >= total - a) {
      rep.regime = Regime::dominant;
      rep.dominant_server = j;
      break;
    }
  }
  if (rep.regime != Regime::dominant && std::pow(total, 1.0 / (2.0 * gamma + 2.0)) >= max_ne2)
    rep.regime = Regime::no_dominant;

  switch (rep.regime) {
    case Regime::no_dominant: {
      rep.delta_condition_ok = std::all_of(servers.begin(), servers.end(), [&](const ServerSpec& s) {
        return s.budget.delta <= std::pow(s.budget.eps * s.budget.eps / std::sqrt(m), 1.0 + kappa);
      });
      break;
    }
    case Regime::dominant: {
      const auto& star = servers[*rep.dominant_server];
      const double ns = static_cast<double>(star.n);
      const double es = star.budget.eps;
      const double denom = std::pow(ns, 2.0 / 3.0) * std::pow(es, 2.0 / 3.0);
      const bool deltas = std::all_of(servers.begin(), servers.end(), [&](const ServerSpec& s) {
        const double base = std::sqrt(static_cast<double>(s.n)) * s.budget.eps * s.budget.eps / denom;
        return s.budget.delta <= std::pow(base, 1.0 + kappa);
      });
      rep.delta_condition_ok = deltas && es > 1.0 / ns;
      break;
    }
    case Regime::mixed: rep.delta_condition_ok = min_delta <= 1.0 / (N * N); break;
  }
  return rep;
}

}  // namespace dpfed
