#pragma once

#include <optional>
#include <span>
#include <string>

#include "dpfed/federation.hpp"

namespace dpfed {

/// Minimax rates without logarithmic factors.

/// min(D^{-2 gamma}, 1); 1 when D = 0.
double rate_from_D(double D, double gamma);

/// min(1, (m n^2 eps^2)^{-2a/(2a+2)} + (m n)^{-2a/(2a+1)}).
double rate_global_hom(double m, double n, double eps, double alpha);

/// As rate_global_hom with nu = alpha - 1/p in place of alpha; requires nu >= 1/2.
double rate_point_hom(double m, double n, double eps, double alpha, double p);

enum class Regime { no_dominant, dominant, mixed };
std::string to_string(Regime r);

struct RegimeReport {
  Regime regime = Regime::mixed;
  std::optional<std::size_t> dominant_server;
  double gamma = 0.0;
  double D = 0.0;
  double rate = 1.0;
  bool delta_condition_ok = false;
  double kappa = 0.05;
};

/// (sum_j n_j^2 eps_j^2)^{-2 gamma/(2 gamma + 2)}, the no-dominant rate.
double no_dominant_rate(std::span<const ServerSpec> servers, double gamma);
/// (n*^2 eps*^2)^{-2 gamma/(2 gamma + 2)} + n*^{-2 gamma/(2 gamma + 1)}.
double dominant_rate(const ServerSpec& server, double gamma);

/// Dominant-budget regime is tested first (a lone server is always
/// dominant), then the no-dominant condition; otherwise mixed.  The matching
/// delta side condition is evaluated with slack exponent kappa; for the mixed
/// regime min_j delta_j <= N^{-2} is required.
RegimeReport classify_regime(std::span<const ServerSpec> servers, double gamma, double kappa = 0.05);

}  // namespace dpfed
