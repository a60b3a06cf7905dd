#pragma once

// Residuals by inverse filtering in the frequency domain: the DFT of the
// data divided by the transfer function, transformed back. No observations
// are lost at the sample edges.

#include <vector>

#include "core.hpp"
#include "spectral.hpp"

namespace marma {

struct ResidualSeries {
  std::vector<double> values;
  ParamVector theta_used;
  ModelOrder order_used;
};

[[nodiscard]] inline ResidualSeries extract_residuals(const SpectralData& spec, const ModelOrder& order,
                                                      const ParamVector& theta) {
  const auto psi = transfer_function(order, theta, spec.grid());
  std::vector<cplx> d(spec.dft());
  for (std::size_t j = 0; j < d.size(); ++j) d[j] /= psi[j];
  auto e = inverse_dft(d, spec.grid());
  double mean = 0.0;
  for (double v : e) mean += v;
  mean /= static_cast<double>(e.size());
  for (double& v : e) v -= mean;
  return {std::move(e), theta, order};
}

}  // namespace marma
