#include "qhd/residual.hpp"

#include <algorithm>

#include "qhd/error.hpp"

namespace qhd {

double Residual::term(const std::string& name) const {
  for (const auto& [key, value] : terms)
    if (key == name) return value;
  throw Error("residual has no term '" + name + "'");
}

void finalize(Residual& r, double cell_volume, double reference_scale) {
  VectorField v{r.components};
  r.absolute_norm = l2_norm(v, cell_volume, r.mask);
  r.denominator = 0.0;
  for (const auto& [name, value] : r.terms) r.denominator = std::max(r.denominator, value);
  r.absolute = r.denominator < absolute_fallback_floor * reference_scale;
  r.norm = r.absolute ? r.absolute_norm : r.absolute_norm / r.denominator;
  r.coverage = coverage_percent(r.mask);
}

Mask node_mask(std::span<const double> density, double fraction) {
  double peak = 0.0;
  for (double x : density) peak = std::max(peak, x);
  const double eps = fraction * peak;
  Mask m(density.size());
  for (std::size_t i = 0; i < density.size(); ++i) m[i] = density[i] < eps ? 1 : 0;
  return m;
}

Mask merge_masks(std::span<const Mask> masks) {
  if (masks.empty()) return {};
  Mask out = masks[0];
  for (std::size_t k = 1; k < masks.size(); ++k)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] |= masks[k][i];
  return out;
}

double coverage_percent(const Mask& mask) {
  if (mask.empty()) return 100.0;
  std::size_t kept = 0;
  for (auto m : mask) kept += m ? 0 : 1;
  return 100.0 * static_cast<double>(kept) / static_cast<double>(mask.size());
}

}  // namespace qhd
