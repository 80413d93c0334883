#include "lshmm/panel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lshmm {

std::optional<Allele> TargetHaplotype::observed_at(std::uint32_t marker) const {
  auto it = std::lower_bound(observations.begin(), observations.end(), marker,
                             [](const Observation& o, std::uint32_t m) { return o.marker < m; });
  if (it != observations.end() && it->marker == marker) return it->allele;
  return std::nullopt;
}

std::vector<double> CollapsedPanel::collapsed_distances() const {
  std::vector<double> d(observed_cols.size(), 0.0);
  for (std::size_t k = 0; k < sections.size(); ++k) d[k + 1] = sections[k].accumulated;
  return d;
}

std::vector<std::string> validate(const ReferencePanel& panel, const ValidateOptions& opts) {
  std::vector<std::string> diags;
  auto add = [&](const std::string& msg) { diags.push_back(msg); };

  if (panel.haplotypes < 2) add("haplotypes: must be >= 2, got " + std::to_string(panel.haplotypes));
  if (panel.markers < 1) add("markers: must be >= 1, got " + std::to_string(panel.markers));

  const std::size_t expected = static_cast<std::size_t>(panel.haplotypes) * panel.markers;
  if (panel.alleles.size() != expected) {
    add("alleles: dimension mismatch, expected " + std::to_string(panel.haplotypes) + "x" +
        std::to_string(panel.markers) + " = " + std::to_string(expected) + " entries, got " +
        std::to_string(panel.alleles.size()));
    return diags;  // indexing below would be unsafe
  }
  if (panel.distances.size() != panel.markers) {
    add("distances: dimension mismatch, expected " + std::to_string(panel.markers) +
        " entries, got " + std::to_string(panel.distances.size()));
    return diags;
  }

  for (const Allele a : panel.alleles) {
    if (a >= kAlleleCount) {
      add("alleles: code " + std::to_string(a) + " outside the diallelic alphabet");
      break;
    }
  }

  if (!panel.distances.empty() && panel.distances[0] != 0.0)
    add("distances[0]: must be 0, got " + std::to_string(panel.distances[0]));
  for (std::uint32_t m = 1; m < panel.distances.size(); ++m) {
    if (!(panel.distances[m] > 0.0) || !std::isfinite(panel.distances[m]))
      add("distances[" + std::to_string(m) + "]: must be a positive finite distance");
  }

  if (!opts.allow_monomorphic) {
    for (std::uint32_t m = 0; m < panel.markers; ++m) {
      const Allele first = panel.allele(0, m);
      bool poly = false;
      for (std::uint32_t h = 1; h < panel.haplotypes && !poly; ++h)
        poly = panel.allele(h, m) != first;
      if (!poly)
        add("column " + std::to_string(m) + ": monomorphic (every haplotype carries allele " +
            std::to_string(first) + ") and not flagged as such");
    }
  }
  return diags;
}

std::vector<std::string> validate(const ReferencePanel& panel, const TargetHaplotype& target) {
  std::vector<std::string> diags;
  std::uint32_t prev = 0;
  bool have_prev = false;
  for (const Observation& o : target.observations) {
    if (o.marker >= panel.markers)
      diags.push_back("target " + target.id + ": marker " + std::to_string(o.marker) +
                      " outside panel range [0, " + std::to_string(panel.markers) + ")");
    if (o.allele >= kAlleleCount)
      diags.push_back("target " + target.id + ": allele code " + std::to_string(o.allele) +
                      " outside the alphabet");
    if (have_prev && o.marker <= prev)
      diags.push_back("target " + target.id + ": markers not strictly increasing at " +
                      std::to_string(o.marker));
    prev = o.marker;
    have_prev = true;
  }
  return diags;
}

void check_result(const ImputationResult& result) {
  std::uint32_t prev = 0;
  bool have_prev = false;
  for (const auto& row : result.rows) {
    double sum = 0.0;
    for (double p : row.probs) {
      if (!(p >= 0.0))
        throw InputError("result " + result.target_id + " marker " + std::to_string(row.marker) +
                         ": negative probability");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw InputError("result " + result.target_id + " marker " + std::to_string(row.marker) +
                       ": probabilities sum to " + std::to_string(sum));
    if (have_prev && row.marker <= prev)
      throw InputError("result " + result.target_id + ": markers not strictly increasing");
    prev = row.marker;
    have_prev = true;
  }
}

CollapsedPanel collapse_for_interp(const ReferencePanel& panel,
                                   const std::vector<std::uint32_t>& observed_markers) {
  if (observed_markers.empty())
    throw InputError("interp mode requires at least one observed marker");
  if (panel.markers == 0) throw InputError("panel has no markers");

  CollapsedPanel cp;
  cp.base = &panel;
  cp.observed_cols.reserve(observed_markers.size() + 2);
  cp.observed_cols.push_back(0);
  for (std::uint32_t m : observed_markers) {
    if (m >= panel.markers)
      throw InputError("observed marker " + std::to_string(m) + " outside panel range");
    if (m != cp.observed_cols.back()) {
      if (m < cp.observed_cols.back())
        throw InputError("observed markers must be sorted strictly increasing");
      cp.observed_cols.push_back(m);
    }
  }
  if (cp.observed_cols.back() != panel.markers - 1)
    cp.observed_cols.push_back(panel.markers - 1);

  cp.sections.reserve(cp.observed_cols.size() - 1);
  for (std::size_t k = 0; k + 1 < cp.observed_cols.size(); ++k) {
    CollapsedSection s;
    s.left = cp.observed_cols[k];
    s.right = cp.observed_cols[k + 1];
    double acc = 0.0;
    for (std::uint32_t m = s.left + 1; m <= s.right; ++m) acc += panel.distances[m];
    s.accumulated = acc;
    if (s.right - s.left > 1) {
      s.components.reserve(s.right - s.left);
      s.cum.reserve(s.right - s.left);
      double run = 0.0;
      for (std::uint32_t m = s.left + 1; m <= s.right; ++m) {
        s.components.push_back(panel.distances[m]);
        run += panel.distances[m];
        s.cum.push_back(run);
      }
    }
    cp.sections.push_back(std::move(s));
  }
  return cp;
}

CollapsedPanel collapse_for_interp(const ReferencePanel& panel, const TargetHaplotype& target) {
  if (target.observations.empty())
    throw InputError("target " + target.id + " has no observations; interp mode requires >= 1");
  std::vector<std::uint32_t> markers;
  markers.reserve(target.observations.size());
  for (const Observation& o : target.observations) markers.push_back(o.marker);
  return collapse_for_interp(panel, markers);
}

}  // namespace lshmm
