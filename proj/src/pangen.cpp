#include "lshmm/pangen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <random>

namespace lshmm {

namespace {

// All sampling below derives from raw mt19937_64 output so generated data is
// identical across standard library implementations.

double uniform_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;  // [0, 1)
}

std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n) {
  // rejection sampling over the top multiple of n
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

template <typename T>
void shuffle_vec(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i)
    std::swap(v[i - 1], v[uniform_index(rng, i)]);
}

constexpr std::uint64_t kTargetStream = 0x9E3779B97F4A7C15ULL;

}  // namespace

Ratio parse_ratio(const std::string& text) {
  Ratio r;
  const std::size_t slash = text.find('/');
  auto parse_part = [&](const std::string& part, std::uint64_t& out) {
    auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), out);
    if (ec != std::errc() || p != part.data() + part.size() || out == 0)
      throw InputError("bad ratio component '" + part + "'");
  };
  if (slash == std::string::npos) {
    parse_part(text, r.num);
    r.den = 1;
  } else {
    parse_part(text.substr(0, slash), r.num);
    parse_part(text.substr(slash + 1), r.den);
  }
  return r;
}

void GenSpec::check() const {
  if (haplotypes < 2) throw InputError("gen spec: haplotypes must be >= 2");
  if (markers < 1) throw InputError("gen spec: markers must be >= 1");
  if (!(distance_lo > 0.0) || !(distance_lo <= distance_hi))
    throw InputError("gen spec: need 0 < distance_lo <= distance_hi");
  if (!(minor_allele_frequency > 0.0) || minor_allele_frequency > 0.5)
    throw InputError("gen spec: minor allele frequency must lie in (0, 0.5]");
  if (target_ratio.num == 0 || target_ratio.den == 0 || target_ratio.num > target_ratio.den)
    throw InputError("gen spec: target ratio must lie in (0, 1]");
}

std::vector<std::uint32_t> observed_positions(std::uint32_t markers, Ratio ratio) {
  if (markers == 1) return {0};
  // ceil(ratio * markers) in exact integer arithmetic
  std::uint64_t count = (ratio.num * markers + ratio.den - 1) / ratio.den;
  count = std::max<std::uint64_t>(count, 2);  // endpoints are always observed
  count = std::min<std::uint64_t>(count, markers);
  std::vector<std::uint32_t> pos(count);
  for (std::uint64_t i = 0; i < count; ++i)
    pos[i] = static_cast<std::uint32_t>(i * (markers - 1) / (count - 1));
  return pos;
}

ReferencePanel generate_panel(const GenSpec& spec) {
  spec.check();
  const std::uint64_t minor_count =
      static_cast<std::uint64_t>(std::llround(spec.minor_allele_frequency * spec.haplotypes));
  if (minor_count == 0)
    throw InputError("gen spec: round(maf * H) = 0 would generate monomorphic columns");

  std::mt19937_64 rng(spec.seed);

  ReferencePanel panel;
  panel.haplotypes = spec.haplotypes;
  panel.markers = spec.markers;
  panel.distances.resize(spec.markers, 0.0);
  for (std::uint32_t m = 1; m < spec.markers; ++m)
    panel.distances[m] =
        spec.distance_lo + uniform_unit(rng) * (spec.distance_hi - spec.distance_lo);

  panel.alleles.assign(static_cast<std::size_t>(spec.haplotypes) * spec.markers, 0);
  std::vector<std::uint32_t> rows(spec.haplotypes);
  for (std::uint32_t m = 0; m < spec.markers; ++m) {
    std::iota(rows.begin(), rows.end(), 0u);
    shuffle_vec(rows, rng);
    for (std::uint64_t k = 0; k < minor_count; ++k) panel.allele(rows[k], m) = 1;
  }
  return panel;
}

GeneratedTargets generate_targets(const ReferencePanel& panel, const GenSpec& spec,
                                  const ModelParams& params) {
  spec.check();
  ModelParams p = params;
  p.haplotype_count = panel.haplotypes;

  std::vector<double> switch_prob(panel.markers, 0.0);
  for (std::uint32_t m = 1; m < panel.markers; ++m)
    switch_prob[m] = tau(panel.distances[m], p);

  const auto positions = observed_positions(panel.markers, spec.target_ratio);

  std::mt19937_64 rng(spec.seed ^ kTargetStream);
  GeneratedTargets out;
  out.targets.reserve(spec.target_count);
  out.truth.reserve(spec.target_count);

  for (std::uint32_t t = 0; t < spec.target_count; ++t) {
    const std::string id = "t" + std::to_string(t);
    TargetHaplotype truth;
    truth.id = id;
    truth.observations.reserve(panel.markers);

    std::uint32_t row = static_cast<std::uint32_t>(uniform_index(rng, panel.haplotypes));
    for (std::uint32_t m = 0; m < panel.markers; ++m) {
      if (m > 0 && uniform_unit(rng) < switch_prob[m])
        row = static_cast<std::uint32_t>(uniform_index(rng, panel.haplotypes));
      Allele a = panel.allele(row, m);
      if (uniform_unit(rng) < p.error_rate) a = static_cast<Allele>(1 - a);
      truth.observations.push_back({m, a});
    }

    TargetHaplotype target;
    target.id = id;
    target.observations.reserve(positions.size());
    for (std::uint32_t pos : positions)
      target.observations.push_back({pos, truth.observations[pos].allele});

    out.targets.push_back(std::move(target));
    out.truth.push_back(std::move(truth));
  }
  return out;
}

}  // namespace lshmm
