#ifndef LSHMM_ORACLE_HPP
#define LSHMM_ORACLE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "lshmm/common.hpp"
#include "lshmm/model.hpp"
#include "lshmm/panel.hpp"

namespace lshmm {
namespace oracle {

// Forward/backward working matrices over the columns the HMM actually ran on
// (all markers in raw mode, observed columns in interp mode). Stored
// column-major: column m occupies [m*states, (m+1)*states).
struct DPMatrices {
  std::uint32_t states = 0;
  std::uint32_t columns = 0;
  std::vector<double> alpha;
  std::vector<double> beta;
  std::vector<double> posterior;     // alpha*beta per state, before normalization
  std::vector<double> alpha_scale;   // per column, 1 when scaling disabled
  std::vector<double> beta_scale;

  double alpha_at(std::uint32_t i, std::uint32_t m) const {
    return alpha[static_cast<std::size_t>(m) * states + i];
  }
  double beta_at(std::uint32_t i, std::uint32_t m) const {
    return beta[static_cast<std::size_t>(m) * states + i];
  }
  double posterior_at(std::uint32_t i, std::uint32_t m) const {
    return posterior[static_cast<std::size_t>(m) * states + i];
  }
};

// Forward pass per the alpha recursion: column 0 holds 1/|H| per state, each
// later column applies the transition row then its own emission. With
// scaling on, every column is rescaled to sum 1 and the factor recorded.
DPMatrices forward(const ReferencePanel& panel, const TargetHaplotype& target,
                   const ModelParams& params, Scaling scaling);

// Backward pass: final column holds 1 per state; the recursion applies the
// next column's emission inside the sum.
DPMatrices backward(const ReferencePanel& panel, const TargetHaplotype& target,
                    const ModelParams& params, Scaling scaling);

// Both passes into one matrix set.
DPMatrices forward_backward(const ReferencePanel& panel, const TargetHaplotype& target,
                            const ModelParams& params, Scaling scaling);

// Sum_i alpha_m(i)*beta_m(i) per column; constant over columns when scaling
// is off (the forward/backward identity).
std::vector<double> alpha_beta_column_products(const DPMatrices& dp);

// Per-marker allele probabilities from alpha*beta products, bucketed by the
// panel's allele labels in ascending haplotype order, then normalized.
// Fills dp.posterior. Throws UnderflowError on an all-zero column.
ImputationResult posteriors_and_calls(const ReferencePanel& panel, DPMatrices& dp,
                                      const std::string& target_id);

// Full imputation for a batch of targets. Raw mode runs the HMM over all
// columns; interp mode runs it over each target's observed columns and
// linearly interpolates per-state posteriors at the interior markers.
std::vector<ImputationResult> impute(const ReferencePanel& panel,
                                     const std::vector<TargetHaplotype>& targets,
                                     const ModelParams& params, Mode mode, Scaling scaling);

}  // namespace oracle
}  // namespace lshmm

#endif  // LSHMM_ORACLE_HPP
