#ifndef LSHMM_MODEL_HPP
#define LSHMM_MODEL_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include "lshmm/error.hpp"

namespace lshmm {

using Allele = std::uint8_t;

// Model constants shared by both backends. All functions here are pure;
// they may be called concurrently from any number of threads.
struct ModelParams {
  double effective_population_size = 20000.0;  // N_e, user-overridable
  double error_rate = 1e-4;                    // e
  std::size_t haplotype_count = 0;             // |H|

  void check() const {
    if (!(effective_population_size > 0.0))
      throw InputError("effective_population_size must be > 0");
    if (!(error_rate > 0.0 && error_rate < 0.5))
      throw InputError("error_rate must lie in (0, 0.5)");
    if (haplotype_count < 2)
      throw InputError("haplotype_count must be >= 2");
  }
};

// Per-column transition row: probability of staying on the sending haplotype
// versus moving to any one other haplotype. stay + (|H|-1)*move == 1.
struct TransitionKernel {
  double tau = 0.0;
  double stay = 1.0;
  double move = 0.0;

  double weight(bool same_haplotype) const { return same_haplotype ? stay : move; }
};

// Recombination factor for a single inter-marker distance.
inline double tau(double genetic_distance, const ModelParams& params) {
  params.check();
  if (genetic_distance < 0.0 || !std::isfinite(genetic_distance))
    throw InputError("genetic distance must be finite and >= 0");
  const double exponent = 4.0 * params.effective_population_size * genetic_distance /
                          static_cast<double>(params.haplotype_count);
  return 1.0 - std::exp(-exponent);
}

inline TransitionKernel transition_kernel(double genetic_distance, const ModelParams& params) {
  TransitionKernel k;
  k.tau = tau(genetic_distance, params);
  const double uniform = k.tau / static_cast<double>(params.haplotype_count);
  k.stay = (1.0 - k.tau) + uniform;
  k.move = uniform;
  return k;
}

// Emission probability of the observed allele given the state's allele.
// No observation at the marker means the term drops out (probability 1).
inline double emission(Allele state_allele, std::optional<Allele> observed,
                       const ModelParams& params) {
  if (!observed.has_value()) return 1.0;
  return *observed == state_allele ? 1.0 - params.error_rate : params.error_rate;
}

// Distance-proportional blend between two endpoint values.
// cum_distance is the accumulated distance from the left endpoint to the
// interior point; total_distance is the full accumulated span.
inline double interpolate(double p_left, double p_right, double cum_distance,
                          double total_distance) {
  if (!(total_distance > 0.0))
    throw InputError("interpolation span has zero accumulated distance");
  if (cum_distance < 0.0 || cum_distance > total_distance)
    throw InputError("interpolation point lies outside the span");
  if (cum_distance == 0.0) return p_left;
  if (cum_distance == total_distance) return p_right;
  return p_left + (cum_distance / total_distance) * (p_right - p_left);
}

}  // namespace lshmm

#endif  // LSHMM_MODEL_HPP
