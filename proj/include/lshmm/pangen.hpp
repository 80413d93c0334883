#ifndef LSHMM_PANGEN_HPP
#define LSHMM_PANGEN_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "lshmm/model.hpp"
#include "lshmm/panel.hpp"

namespace lshmm {

// Observed-to-reference marker ratio kept as an exact rational so marker
// counts like ceil(M/100) never suffer floating-point drift.
struct Ratio {
  std::uint64_t num = 1;
  std::uint64_t den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool operator==(const Ratio&) const = default;
};

// Parses "1/100", "3/4" or a bare integer "1".
Ratio parse_ratio(const std::string& text);

struct GenSpec {
  std::uint32_t haplotypes = 0;
  std::uint32_t markers = 0;
  std::uint64_t seed = 0;
  double distance_lo = 1e-8;
  double distance_hi = 1e-6;
  double minor_allele_frequency = 0.05;
  Ratio target_ratio{1, 1};
  std::uint32_t target_count = 0;

  void check() const;
};

// Evenly spaced observed marker positions, always including 0 and M-1.
std::vector<std::uint32_t> observed_positions(std::uint32_t markers, Ratio ratio);

// Deterministic panel: uniform distances in [distance_lo, distance_hi], and
// per column exactly round(maf * H) minor alleles at shuffled positions.
ReferencePanel generate_panel(const GenSpec& spec);

struct GeneratedTargets {
  std::vector<TargetHaplotype> targets;  // sparse, evenly spaced observations
  std::vector<TargetHaplotype> truth;    // same ids, every marker observed
};

// Mosaic ground truth: copy panel rows switching with probability tau_m,
// flip each allele with probability params.error_rate, then expose the
// evenly spaced subset as the target. Deterministic per spec.seed.
GeneratedTargets generate_targets(const ReferencePanel& panel, const GenSpec& spec,
                                  const ModelParams& params);

}  // namespace lshmm

#endif  // LSHMM_PANGEN_HPP
