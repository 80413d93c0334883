#ifndef LSHMM_PANEL_HPP
#define LSHMM_PANEL_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lshmm/common.hpp"
#include "lshmm/model.hpp"

namespace lshmm {

// Number of allele codes in the diallelic alphabet used throughout the file
// formats and the generator. The data model keeps codes as integers so a
// wider alphabet stays representable.
inline constexpr std::size_t kAlleleCount = 2;

// Optional display mapping from allele codes to base letters.
inline char display_allele(Allele code, const char* map = "01") { return map[code]; }

// H x M allele matrix with per-column genetic distances. distances[0] is 0 by
// convention; distances[m] is the distance between markers m-1 and m.
// Immutable after construction/load; shared read access is safe.
struct ReferencePanel {
  std::uint32_t haplotypes = 0;  // H
  std::uint32_t markers = 0;     // M
  std::vector<Allele> alleles;   // row-major, haplotypes * markers
  std::vector<double> distances; // size markers

  Allele allele(std::uint32_t h, std::uint32_t m) const {
    return alleles[static_cast<std::size_t>(h) * markers + m];
  }
  Allele& allele(std::uint32_t h, std::uint32_t m) {
    return alleles[static_cast<std::size_t>(h) * markers + m];
  }

  bool operator==(const ReferencePanel&) const = default;
};

struct Observation {
  std::uint32_t marker = 0;
  Allele allele = 0;

  bool operator==(const Observation&) const = default;
};

// Sparse observed alleles of one target over the reference markers.
// Observations are sorted by strictly increasing marker index.
struct TargetHaplotype {
  std::string id;
  std::vector<Observation> observations;

  std::optional<Allele> observed_at(std::uint32_t marker) const;

  bool operator==(const TargetHaplotype&) const = default;
};

// One span between two adjacent observed columns. `components` lists the
// per-marker distances d_{left+1} .. d_{right}; it is empty when the span has
// no interior markers. `cum` holds the running prefix sums of `components`,
// so cum[i] is the accumulated distance from `left` to interior marker
// left+1+i. accumulated == sum(components) when components is non-empty.
struct CollapsedSection {
  std::uint32_t left = 0;   // panel column index
  std::uint32_t right = 0;  // panel column index, > left
  double accumulated = 0.0;
  std::vector<double> components;
  std::vector<double> cum;

  std::uint32_t interior_count() const { return right - left - 1; }
};

// Panel reduced to its observed columns for linear interpolation. The first
// and last markers are always present so every interior marker is bracketed.
struct CollapsedPanel {
  const ReferencePanel* base = nullptr;
  std::vector<std::uint32_t> observed_cols;  // strictly increasing, front 0, back M-1
  std::vector<CollapsedSection> sections;    // observed_cols.size() - 1 entries

  // Distances of the collapsed column sequence: entry 0 is 0, entry k is the
  // accumulated distance of section k-1.
  std::vector<double> collapsed_distances() const;
};

enum class CallSource : std::uint8_t { hmm, interpolated };

inline const char* to_string(CallSource s) {
  return s == CallSource::hmm ? "hmm" : "interpolated";
}

// Per-target imputation output: normalized allele probabilities and the
// called allele at every reference marker.
struct ImputationResult {
  struct Row {
    std::uint32_t marker = 0;
    std::array<double, kAlleleCount> probs{};  // sums to 1
    Allele call = 0;                           // argmax, lower code wins ties
    CallSource source = CallSource::hmm;

    bool operator==(const Row&) const = default;
  };

  std::string target_id;
  std::vector<Row> rows;  // ascending marker

  bool operator==(const ImputationResult&) const = default;
};

struct ValidateOptions {
  bool allow_monomorphic = false;  // flag monomorphic columns as intentional
};

// Returns one human-readable diagnostic per violated panel invariant, naming
// the invariant and its location. Empty means the panel is well-formed.
std::vector<std::string> validate(const ReferencePanel& panel, const ValidateOptions& opts = {});

// Same shape of diagnostics for a target against a panel.
std::vector<std::string> validate(const ReferencePanel& panel, const TargetHaplotype& target);

// Throws InputError if a result row's probabilities are negative or do not
// sum to 1 within 1e-9, or markers are not strictly increasing.
void check_result(const ImputationResult& result);

// Builds the observed-column view used by interpolation: observed columns
// plus both endpoint markers, with accumulated and component distances per
// section. Throws InputError when the target has no observations or when it
// is inconsistent with the panel.
CollapsedPanel collapse_for_interp(const ReferencePanel& panel, const TargetHaplotype& target);

// Shared-mask variant: the mask is the sorted set of observed marker indices.
CollapsedPanel collapse_for_interp(const ReferencePanel& panel,
                                   const std::vector<std::uint32_t>& observed_markers);

}  // namespace lshmm

#endif  // LSHMM_PANEL_HPP
