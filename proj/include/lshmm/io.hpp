#ifndef LSHMM_IO_HPP
#define LSHMM_IO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "lshmm/common.hpp"
#include "lshmm/panel.hpp"

namespace lshmm {

// Run parameters recorded in every result file so a run can be reproduced
// from the file alone.
struct ResultFileHeader {
  double effective_population_size = 20000.0;
  double error_rate = 1e-4;
  Mode mode = Mode::raw;
  Scaling scaling = Scaling::on;
  Backend backend = Backend::oracle;
  std::uint64_t seed = 0;

  bool operator==(const ResultFileHeader&) const = default;
};

struct ResultFile {
  ResultFileHeader header;
  std::vector<ImputationResult> results;

  bool operator==(const ResultFile&) const = default;
};

// Shortest decimal that round-trips the exact double value.
std::string format_double(double v);
// Scientific form with 17 significant digits; also round-trips exactly.
std::string format_double_full(double v);

// Panel file (.refp): header line, distance line, one {0,1} row per haplotype.
ReferencePanel load_panel(const std::string& path);
void save_panel(const ReferencePanel& panel, const std::string& path);

// Target file (.targ): one target per line, "id marker:allele ...".
std::vector<TargetHaplotype> load_targets(const std::string& path);
void save_targets(const std::vector<TargetHaplotype>& targets, const std::string& path);

// Result file (.iout): parameter header, then one block per target.
ResultFile load_results(const std::string& path);
void save_results(const ResultFile& file, const std::string& path);

}  // namespace lshmm

#endif  // LSHMM_IO_HPP
