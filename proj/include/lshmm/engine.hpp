#ifndef LSHMM_ENGINE_HPP
#define LSHMM_ENGINE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "lshmm/common.hpp"
#include "lshmm/model.hpp"
#include "lshmm/panel.hpp"

namespace lshmm {
namespace engine {

enum class MsgKind : std::uint8_t { alpha = 0, beta = 1, posterior = 2 };

// Sender-column emission outcome carried by beta messages so the multicast
// payload stays receiver-independent.
enum class MatchFlag : std::uint8_t { unobserved = 0, match = 1, mismatch = 2 };

struct Message {
  std::uint32_t target_id = 0;
  std::uint32_t sender_haplotype = 0;              // h
  std::uint32_t marker = 0;                        // panel marker the payload refers to
  MsgKind kind = MsgKind::alpha;
  MatchFlag match = MatchFlag::unobserved;         // beta only
  Allele allele = 0;                               // posterior contributions only
  double value = 0.0;                              // alpha, beta or posterior payload
};

// Static topology: one vertex per (haplotype, column) where columns are all
// markers in raw mode and the shared observed columns in interp mode. Each
// inter-column transition carries a precomputed kernel; interp sections keep
// the component-distance prefix sums for interior interpolation.
struct Graph {
  const ReferencePanel* panel = nullptr;
  ModelParams params;
  Mode mode = Mode::raw;
  std::vector<std::uint32_t> cols;            // panel column per graph column
  std::vector<TransitionKernel> kernels;      // kernels[k] spans cols k-1 -> k
  std::vector<CollapsedSection> sections;     // cols.size()-1 entries

  std::uint32_t haplotypes() const { return panel->haplotypes; }
  std::uint32_t columns() const { return static_cast<std::uint32_t>(cols.size()); }
  std::uint64_t vertex_count() const {
    return static_cast<std::uint64_t>(haplotypes()) * columns();
  }
  bool section_has_interior(std::uint32_t k) const {
    return k < sections.size() && sections[k].interior_count() > 0;
  }
};

// target_mask lists the observed marker indices shared by every target in
// the batch (interp mode); build_graph adds the endpoint markers itself.
// Raw mode ignores the mask and uses every column.
Graph build_graph(const ReferencePanel& panel, const ModelParams& params, Mode mode,
                  const std::vector<std::uint32_t>& target_mask = {});

// Contiguous column-major vertex ranges, one per worker. soft_ratio is the
// requested vertices-per-worker target; 0 means spread evenly over all
// workers. The achieved ratio is reported back.
struct Partition {
  struct Range {
    std::uint32_t begin = 0;
    std::uint32_t end = 0;  // half-open
    std::uint32_t size() const { return end - begin; }
  };
  std::vector<Range> ranges;          // one per worker, idle workers empty
  std::uint32_t workers = 0;          // as requested
  std::uint32_t workers_used = 0;
  std::uint32_t idle_workers = 0;
  std::uint32_t achieved_ratio = 0;   // max vertices on any worker
};

Partition partition(const Graph& graph, std::uint32_t workers, std::uint32_t soft_ratio = 0);

struct Metrics {
  std::uint64_t steps = 0;
  std::uint64_t alpha_deliveries = 0;
  std::uint64_t beta_deliveries = 0;
  std::uint64_t posterior_deliveries = 0;
  std::uint64_t posterior_self = 0;      // accumulator self-deliveries, no network hop
  std::uint64_t alpha_sends = 0;
  std::uint64_t beta_sends = 0;
  std::uint64_t posterior_sends = 0;
  std::uint64_t alpha_fanout = 0;        // deliveries implied by send requests
  std::uint64_t beta_fanout = 0;
  std::uint64_t posterior_fanout = 0;
  std::vector<std::uint32_t> worker_vertex_counts;
  double wall_ms = 0.0;
  // optional trace (RunOptions::record_emission_steps): step at which each
  // (target, marker) result row was emitted, indexed target*markers+marker
  std::vector<std::uint32_t> emission_steps;

  std::uint64_t total_deliveries() const {
    return alpha_deliveries + beta_deliveries + posterior_deliveries;
  }
};

std::string metrics_csv_header();
std::string metrics_csv_row(const Metrics& metrics, std::uint32_t workers,
                            std::uint32_t soft_ratio);

struct RunOptions {
  std::uint32_t inject_every = 1;       // steps between target injections
  bool record_emission_steps = false;
};

struct RunOutput {
  std::vector<ImputationResult> results;
  Metrics metrics;
};

// Bulk-synchronous execution: messages sent during one step are delivered at
// the next, one fresh target is injected per injection step, and the run
// ends when no sends remain. Results are deterministic for fixed inputs
// regardless of the worker count.
RunOutput run(const Graph& graph, const Partition& partition,
              const std::vector<TargetHaplotype>& targets, const ModelParams& params,
              const RunOptions& options = {});

}  // namespace engine
}  // namespace lshmm

#endif  // LSHMM_ENGINE_HPP
