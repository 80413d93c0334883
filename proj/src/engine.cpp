#include "lshmm/engine.hpp"

#include <algorithm>
#include <atomic>
#include <barrier>
#include <cassert>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <thread>
#include <tuple>

namespace lshmm {
namespace engine {

namespace {

double flag_emission(MatchFlag flag, double error_rate) {
  switch (flag) {
    case MatchFlag::match: return 1.0 - error_rate;
    case MatchFlag::mismatch: return error_rate;
    default: return 1.0;
  }
}

struct SenderSet {
  std::vector<std::uint64_t> bits;

  void reset(std::uint32_t n) { bits.assign((n + 63) / 64, 0); }
  bool test_and_set(std::uint32_t i) {
    std::uint64_t& word = bits[i >> 6];
    const std::uint64_t mask = 1ull << (i & 63);
    const bool was = word & mask;
    word |= mask;
    return was;
  }
};

// Per-target wavefront accumulation state at one vertex.
struct Pending {
  std::uint32_t target = 0;
  double alpha = 0.0;
  double beta = 0.0;
  double own_post = 0.0;
  double right_post = 0.0;
  std::uint32_t alpha_cnt = 0;
  std::uint32_t beta_cnt = 0;
  bool alpha_done = false;
  bool beta_done = false;
  bool post_done = false;
  bool right_seen = false;
  bool interior_done = false;
  SenderSet alpha_seen;
  SenderSet beta_seen;
};

// Accumulator-side allele sums for one (target, marker).
struct AccumEntry {
  std::uint32_t target = 0;
  std::uint32_t marker = 0;
  std::uint32_t count = 0;
  std::array<double, kAlleleCount> bins{};
  SenderSet seen;
};

struct Vertex {
  std::vector<Message> inbox;
  std::vector<Message> self_next;  // own-accumulator deliveries for the next step
  std::vector<Pending> pending;
  std::vector<AccumEntry> accum;
};

enum class Route : std::uint8_t { multicast_fwd, multicast_bwd, unicast };

struct Send {
  Message msg;
  Route route = Route::unicast;
  std::uint32_t dest_col = 0;
  std::uint32_t dest_row = 0;  // unicast only
};

struct RowOut {
  std::uint32_t target = 0;
  ImputationResult::Row row;
};

struct WorkerCtx {
  std::vector<Send> outbox_next;
  std::vector<Send> outbox_prev;
  std::vector<RowOut> rows;
  std::uint64_t alpha_deliveries = 0, beta_deliveries = 0, posterior_deliveries = 0;
  std::uint64_t posterior_self = 0;
  std::uint64_t alpha_sends = 0, beta_sends = 0, posterior_sends = 0;
  std::uint64_t alpha_fanout = 0, beta_fanout = 0, posterior_fanout = 0;
  std::uint64_t self_pushed = 0;  // self-queue entries produced this step
  std::exception_ptr error;
};

bool message_order(const Message& a, const Message& b) {
  return std::tie(a.sender_haplotype, a.kind, a.marker, a.target_id) <
         std::tie(b.sender_haplotype, b.kind, b.marker, b.target_id);
}

class Runtime {
public:
  Runtime(const Graph& g, const Partition& part, const std::vector<TargetHaplotype>& targets,
          const RunOptions& opt)
      : g_(g), part_(part), targets_(targets), opt_(opt),
        H_(g.haplotypes()), K_(g.columns()), M_(g.panel->markers),
        T_(static_cast<std::uint32_t>(targets.size())) {
    vertices_.resize(g.vertex_count());
    ctx_.resize(part.ranges.size());
    obs_.assign(static_cast<std::size_t>(T_) * M_, -1);
    for (std::uint32_t t = 0; t < T_; ++t)
      for (const Observation& o : targets[t].observations)
        obs_[static_cast<std::size_t>(t) * M_ + o.marker] = static_cast<std::int8_t>(o.allele);
    if (opt.record_emission_steps)
      emission_steps_.assign(static_cast<std::size_t>(T_) * M_, 0);
  }

  void execute(Metrics& metrics) {
    if (T_ == 0) {
      metrics.steps = 0;
      return;
    }
    const std::uint32_t W = std::max<std::uint32_t>(part_.workers_used, 1);

    std::barrier<std::function<void()>> bar(W, [this] { complete_step(); });
    std::vector<std::thread> threads;
    threads.reserve(W);
    for (std::uint32_t w = 0; w < W; ++w)
      threads.emplace_back([this, w, &bar] { worker_loop(w, bar); });
    for (auto& th : threads) th.join();

    for (std::uint32_t w = 0; w < part_.ranges.size(); ++w) {
      if (ctx_[w].error) std::rethrow_exception(ctx_[w].error);
    }

    metrics.steps = step_;
    for (const WorkerCtx& c : ctx_) {
      metrics.alpha_deliveries += c.alpha_deliveries;
      metrics.beta_deliveries += c.beta_deliveries;
      metrics.posterior_deliveries += c.posterior_deliveries;
      metrics.posterior_self += c.posterior_self;
      metrics.alpha_sends += c.alpha_sends;
      metrics.beta_sends += c.beta_sends;
      metrics.posterior_sends += c.posterior_sends;
      metrics.alpha_fanout += c.alpha_fanout;
      metrics.beta_fanout += c.beta_fanout;
      metrics.posterior_fanout += c.posterior_fanout;
    }
    metrics.emission_steps = std::move(emission_steps_);
  }

  std::vector<ImputationResult> collect_results() {
    std::vector<std::vector<ImputationResult::Row>> per_target(T_);
    for (std::uint32_t t = 0; t < T_; ++t) per_target[t].reserve(M_);
    std::uint64_t total = 0;
    for (const WorkerCtx& c : ctx_) {
      for (const RowOut& r : c.rows) per_target[r.target].push_back(r.row);
      total += c.rows.size();
    }
    if (total != static_cast<std::uint64_t>(T_) * M_)
      throw ProtocolError("run ended with " + std::to_string(total) + " result rows, expected " +
                          std::to_string(static_cast<std::uint64_t>(T_) * M_));
    std::vector<ImputationResult> out(T_);
    for (std::uint32_t t = 0; t < T_; ++t) {
      auto& rows = per_target[t];
      std::sort(rows.begin(), rows.end(),
                [](const auto& a, const auto& b) { return a.marker < b.marker; });
      out[t].target_id = targets_[t].id;
      out[t].rows = std::move(rows);
    }
    return out;
  }

private:
  std::uint32_t col_of(std::uint32_t vid) const { return vid / H_; }
  std::uint32_t row_of(std::uint32_t vid) const { return vid % H_; }
  std::uint32_t vid_of(std::uint32_t col, std::uint32_t row) const { return col * H_ + row; }

  std::int8_t observed(std::uint32_t target, std::uint32_t panel_marker) const {
    return obs_[static_cast<std::size_t>(target) * M_ + panel_marker];
  }
  std::optional<Allele> observed_opt(std::uint32_t target, std::uint32_t panel_marker) const {
    const std::int8_t o = observed(target, panel_marker);
    if (o < 0) return std::nullopt;
    return static_cast<Allele>(o);
  }

  MatchFlag match_flag(std::uint32_t target, std::uint32_t h, std::uint32_t col) const {
    const std::int8_t o = observed(target, g_.cols[col]);
    if (o < 0) return MatchFlag::unobserved;
    return static_cast<Allele>(o) == g_.panel->allele(h, g_.cols[col]) ? MatchFlag::match
                                                                       : MatchFlag::mismatch;
  }

  bool injection_due(std::uint64_t step, std::uint32_t& target) const {
    if (step % opt_.inject_every != 0) return false;
    const std::uint64_t t = step / opt_.inject_every;
    if (t >= T_) return false;
    target = static_cast<std::uint32_t>(t);
    return true;
  }

  Pending& find_or_create(Vertex& v, std::uint32_t vid, std::uint32_t target) {
    for (Pending& p : v.pending)
      if (p.target == target) return p;
    const std::uint32_t k = col_of(vid);
    // wavefront skew bound on concurrent per-target entries; the endpoint
    // hand-off can keep an entry alive for two extra steps
    const std::int64_t skew = std::llabs(static_cast<std::int64_t>(K_) - 1 - 2ll * k);
    std::uint64_t bound = 1 + static_cast<std::uint64_t>(skew);
    if (g_.section_has_interior(k)) bound += 2;
    if (v.pending.size() >= bound)
      throw ProtocolError("pending store at vertex (" + std::to_string(row_of(vid)) + "," +
                          std::to_string(k) + ") exceeded its wavefront bound of " +
                          std::to_string(bound));
    Pending p;
    p.target = target;
    p.alpha_seen.reset(H_);
    p.beta_seen.reset(H_);
    v.pending.push_back(std::move(p));
    return v.pending.back();
  }

  void free_if_done(Vertex& v, std::uint32_t target) {
    for (std::size_t i = 0; i < v.pending.size(); ++i) {
      Pending& p = v.pending[i];
      if (p.target != target) continue;
      if (p.post_done && p.interior_done) {
        v.pending[i] = std::move(v.pending.back());
        v.pending.pop_back();
      }
      return;
    }
  }

  void send_multicast(WorkerCtx& ctx, Route route, std::uint32_t dest_col, const Message& msg) {
    assert(std::isfinite(msg.value) && msg.value >= 0.0);
    ctx.outbox_next.push_back({msg, route, dest_col, 0});
    if (msg.kind == MsgKind::alpha) {
      ++ctx.alpha_sends;
      ctx.alpha_fanout += H_;
    } else {
      ++ctx.beta_sends;
      ctx.beta_fanout += H_;
    }
  }

  void send_unicast(WorkerCtx& ctx, std::uint32_t dest_col, std::uint32_t dest_row,
                    const Message& msg) {
    assert(std::isfinite(msg.value) && msg.value >= 0.0);
    ctx.outbox_next.push_back({msg, Route::unicast, dest_col, dest_row});
    ++ctx.posterior_sends;
    ++ctx.posterior_fanout;
  }

  void self_deliver(WorkerCtx& ctx, Vertex& v, const Message& msg) {
    v.self_next.push_back(msg);
    ++ctx.self_pushed;
  }

  // Posterior product, downward unicast, interp hand-off and interior
  // interpolation once both wavefronts have completed at this vertex.
  void after_value_complete(WorkerCtx& ctx, Vertex& v, std::uint32_t vid, Pending& p) {
    const std::uint32_t h = row_of(vid);
    const std::uint32_t k = col_of(vid);
    if (p.alpha_done && p.beta_done && !p.post_done) {
      p.own_post = p.alpha * p.beta;
      p.post_done = true;

      Message pm;
      pm.target_id = p.target;
      pm.sender_haplotype = h;
      pm.marker = g_.cols[k];
      pm.kind = MsgKind::posterior;
      pm.allele = g_.panel->allele(h, g_.cols[k]);
      pm.value = p.own_post;
      if (h != H_ - 1)
        send_unicast(ctx, k, H_ - 1, pm);
      else
        self_deliver(ctx, v, pm);

      if (k > 0 && g_.section_has_interior(k - 1)) {
        Message hm = pm;
        hm.allele = 0;
        send_unicast(ctx, k - 1, h, hm);
      }
    }
    try_interior(ctx, v, vid, p);
  }

  void try_interior(WorkerCtx& ctx, Vertex& v, std::uint32_t vid, Pending& p) {
    if (!p.post_done || p.interior_done) return;
    const std::uint32_t k = col_of(vid);
    if (!g_.section_has_interior(k)) {
      p.interior_done = true;
      return;
    }
    if (!p.right_seen) return;
    const std::uint32_t h = row_of(vid);
    const CollapsedSection& sec = g_.sections[k];
    for (std::uint32_t idx = 0; idx < sec.interior_count(); ++idx) {
      const std::uint32_t marker = sec.left + 1 + idx;
      Message im;
      im.target_id = p.target;
      im.sender_haplotype = h;
      im.marker = marker;
      im.kind = MsgKind::posterior;
      im.allele = g_.panel->allele(h, marker);
      im.value = interpolate(p.own_post, p.right_post, sec.cum[idx], sec.accumulated);
      if (h != H_ - 1)
        send_unicast(ctx, k, H_ - 1, im);
      else
        self_deliver(ctx, v, im);
    }
    p.interior_done = true;
  }

  void on_alpha(WorkerCtx& ctx, Vertex& v, std::uint32_t vid, const Message& msg) {
    const std::uint32_t k = col_of(vid);
    const std::uint32_t h = row_of(vid);
    if (k == 0) throw ProtocolError("alpha message delivered to column 0");
    Pending& p = find_or_create(v, vid, msg.target_id);
    if (p.alpha_seen.test_and_set(msg.sender_haplotype))
      throw ProtocolError("duplicate alpha from haplotype " +
                          std::to_string(msg.sender_haplotype) + " for target " +
                          std::to_string(msg.target_id));
    if (++p.alpha_cnt > H_) throw ProtocolError("alpha message count exceeded |H|");

    p.alpha += msg.value * g_.kernels[k].weight(msg.sender_haplotype == h);

    if (p.alpha_cnt == H_) {
      const double emis =
          emission(g_.panel->allele(h, g_.cols[k]), observed_opt(msg.target_id, g_.cols[k]),
                   g_.params);
      p.alpha *= emis;
      if (p.alpha == 0.0)
        throw UnderflowError("target " + std::to_string(msg.target_id) +
                             ": alpha underflowed to zero at column " +
                             std::to_string(g_.cols[k]));
      p.alpha_done = true;
      if (k + 1 < K_) {
        Message out;
        out.target_id = msg.target_id;
        out.sender_haplotype = h;
        out.marker = g_.cols[k];
        out.kind = MsgKind::alpha;
        out.value = p.alpha;
        send_multicast(ctx, Route::multicast_fwd, k + 1, out);
      }
      after_value_complete(ctx, v, vid, p);
      free_if_done(v, msg.target_id);
    }
  }

  void on_beta(WorkerCtx& ctx, Vertex& v, std::uint32_t vid, const Message& msg) {
    const std::uint32_t k = col_of(vid);
    const std::uint32_t h = row_of(vid);
    if (k == K_ - 1) throw ProtocolError("beta message delivered to the last column");
    Pending& p = find_or_create(v, vid, msg.target_id);
    if (p.beta_seen.test_and_set(msg.sender_haplotype))
      throw ProtocolError("duplicate beta from haplotype " +
                          std::to_string(msg.sender_haplotype) + " for target " +
                          std::to_string(msg.target_id));
    if (++p.beta_cnt > H_) throw ProtocolError("beta message count exceeded |H|");

    // sender's emission travels as the match flag
    p.beta += g_.kernels[k + 1].weight(msg.sender_haplotype == h) * msg.value *
              flag_emission(msg.match, g_.params.error_rate);

    if (p.beta_cnt == H_) {
      if (p.beta == 0.0)
        throw UnderflowError("target " + std::to_string(msg.target_id) +
                             ": beta underflowed to zero at column " +
                             std::to_string(g_.cols[k]));
      p.beta_done = true;
      if (k > 0) {
        Message out;
        out.target_id = msg.target_id;
        out.sender_haplotype = h;
        out.marker = g_.cols[k];
        out.kind = MsgKind::beta;
        out.match = match_flag(msg.target_id, h, k);
        out.value = p.beta;
        send_multicast(ctx, Route::multicast_bwd, k - 1, out);
      }
      after_value_complete(ctx, v, vid, p);
      free_if_done(v, msg.target_id);
    }
  }

  void on_posterior(WorkerCtx& ctx, Vertex& v, std::uint32_t vid, std::uint64_t step,
                    const Message& msg) {
    const std::uint32_t k = col_of(vid);
    const std::uint32_t h = row_of(vid);

    if (k + 1 < K_ && msg.sender_haplotype == h && msg.marker == g_.cols[k + 1]) {
      // endpoint posterior handed back from the next section
      Pending& p = find_or_create(v, vid, msg.target_id);
      if (p.right_seen)
        throw ProtocolError("duplicate endpoint hand-off for target " +
                            std::to_string(msg.target_id));
      p.right_post = msg.value;
      p.right_seen = true;
      try_interior(ctx, v, vid, p);
      free_if_done(v, msg.target_id);
      return;
    }

    if (h != H_ - 1)
      throw ProtocolError("posterior contribution delivered to non-accumulator vertex");

    AccumEntry* entry = nullptr;
    for (AccumEntry& e : v.accum)
      if (e.target == msg.target_id && e.marker == msg.marker) {
        entry = &e;
        break;
      }
    if (!entry) {
      AccumEntry e;
      e.target = msg.target_id;
      e.marker = msg.marker;
      e.seen.reset(H_);
      v.accum.push_back(std::move(e));
      entry = &v.accum.back();
    }
    if (entry->seen.test_and_set(msg.sender_haplotype))
      throw ProtocolError("duplicate posterior contribution from haplotype " +
                          std::to_string(msg.sender_haplotype));
    if (++entry->count > H_) throw ProtocolError("posterior contributions exceeded |H|");
    entry->bins[msg.allele] += msg.value;

    if (entry->count == H_) {
      double total = 0.0;
      for (double b : entry->bins) total += b;
      if (total == 0.0)
        throw UnderflowError("target " + std::to_string(msg.target_id) +
                             ": posterior total underflowed to zero at marker " +
                             std::to_string(msg.marker));
      RowOut out;
      out.target = msg.target_id;
      out.row.marker = msg.marker;
      for (std::size_t a = 0; a < kAlleleCount; ++a) out.row.probs[a] = entry->bins[a] / total;
      out.row.call = entry->bins[1] > entry->bins[0] ? 1 : 0;
      out.row.source = msg.marker == g_.cols[k] ? CallSource::hmm : CallSource::interpolated;
      ctx.rows.push_back(out);
      if (!emission_steps_.empty())
        emission_steps_[static_cast<std::size_t>(msg.target_id) * M_ + msg.marker] =
            static_cast<std::uint32_t>(step);

      for (std::size_t i = 0; i < v.accum.size(); ++i)
        if (&v.accum[i] == entry) {
          v.accum[i] = std::move(v.accum.back());
          v.accum.pop_back();
          break;
        }
    }
  }

  void inject(WorkerCtx& ctx, std::uint32_t vid, std::uint32_t target) {
    Vertex& v = vertices_[vid];
    const std::uint32_t k = col_of(vid);
    const std::uint32_t h = row_of(vid);
    Pending& p = find_or_create(v, vid, target);
    if (k == 0) {
      p.alpha = 1.0 / static_cast<double>(H_);
      p.alpha_done = true;
      if (K_ > 1) {
        Message out;
        out.target_id = target;
        out.sender_haplotype = h;
        out.marker = g_.cols[0];
        out.kind = MsgKind::alpha;
        out.value = p.alpha;
        send_multicast(ctx, Route::multicast_fwd, 1, out);
      }
    }
    if (k == K_ - 1) {
      p.beta = 1.0;
      p.beta_done = true;
      if (K_ > 1) {
        Message out;
        out.target_id = target;
        out.sender_haplotype = h;
        out.marker = g_.cols[K_ - 1];
        out.kind = MsgKind::beta;
        out.match = match_flag(target, h, K_ - 1);
        out.value = p.beta;
        send_multicast(ctx, Route::multicast_bwd, K_ - 2, out);
      }
    }
    after_value_complete(ctx, v, vid, p);
    free_if_done(v, target);
  }

  void merge_phase(std::uint32_t w) {
    const Partition::Range mine = part_.ranges[w];
    WorkerCtx& ctx = ctx_[w];
    for (const WorkerCtx& src : ctx_) {
      for (const Send& s : src.outbox_prev) {
        if (s.route == Route::unicast) {
          const std::uint32_t vid = vid_of(s.dest_col, s.dest_row);
          if (vid >= mine.begin && vid < mine.end) {
            vertices_[vid].inbox.push_back(s.msg);
            ++ctx.posterior_deliveries;
          }
        } else {
          const std::uint32_t lo = std::max(mine.begin, s.dest_col * H_);
          const std::uint32_t hi = std::min(mine.end, s.dest_col * H_ + H_);
          for (std::uint32_t vid = lo; vid < hi; ++vid) {
            vertices_[vid].inbox.push_back(s.msg);
            if (s.msg.kind == MsgKind::alpha)
              ++ctx.alpha_deliveries;
            else
              ++ctx.beta_deliveries;
          }
        }
      }
    }
    for (std::uint32_t vid = mine.begin; vid < mine.end; ++vid) {
      Vertex& v = vertices_[vid];
      if (v.self_next.empty()) continue;
      for (const Message& m : v.self_next) {
        v.inbox.push_back(m);
        ++ctx.posterior_self;
      }
      v.self_next.clear();
    }
  }

  void process_phase(std::uint32_t w) {
    const Partition::Range mine = part_.ranges[w];
    WorkerCtx& ctx = ctx_[w];
    ctx.self_pushed = 0;

    std::uint32_t inject_target = 0;
    if (injection_due(step_, inject_target)) {
      for (std::uint32_t vid = mine.begin; vid < mine.end; ++vid) {
        const std::uint32_t k = col_of(vid);
        if (k == 0 || k == K_ - 1) inject(ctx, vid, inject_target);
      }
    }

    for (std::uint32_t vid = mine.begin; vid < mine.end; ++vid) {
      Vertex& v = vertices_[vid];
      if (v.inbox.empty()) continue;
      std::sort(v.inbox.begin(), v.inbox.end(), message_order);
      for (const Message& msg : v.inbox) {
        switch (msg.kind) {
          case MsgKind::alpha: on_alpha(ctx, v, vid, msg); break;
          case MsgKind::beta: on_beta(ctx, v, vid, msg); break;
          case MsgKind::posterior: on_posterior(ctx, v, vid, step_, msg); break;
        }
      }
      v.inbox.clear();
    }
  }

  void complete_step() {
    std::uint32_t dummy = 0;
    const bool injected_this_step = injection_due(step_, dummy);
    if (injected_this_step) ++injected_;
    ++step_;

    std::uint64_t queued = 0;
    for (WorkerCtx& c : ctx_) {
      queued += c.outbox_next.size() + c.self_pushed;
      c.outbox_prev.swap(c.outbox_next);
      c.outbox_next.clear();
    }
    const bool injections_left = injected_ < T_;
    if ((queued == 0 && !injections_left) || failed_.load(std::memory_order_relaxed))
      done_.store(true, std::memory_order_relaxed);
  }

  void worker_loop(std::uint32_t w, std::barrier<std::function<void()>>& bar) {
    while (!done_.load(std::memory_order_relaxed)) {
      if (!failed_.load(std::memory_order_relaxed)) {
        try {
          merge_phase(w);
          process_phase(w);
        } catch (...) {
          ctx_[w].error = std::current_exception();
          failed_.store(true, std::memory_order_relaxed);
        }
      }
      bar.arrive_and_wait();
    }
  }

  const Graph& g_;
  const Partition& part_;
  const std::vector<TargetHaplotype>& targets_;
  const RunOptions& opt_;
  const std::uint32_t H_, K_, M_, T_;

  std::vector<Vertex> vertices_;
  std::vector<WorkerCtx> ctx_;
  std::vector<std::int8_t> obs_;
  std::vector<std::uint32_t> emission_steps_;

  std::uint64_t step_ = 0;
  std::uint32_t injected_ = 0;
  std::atomic<bool> done_{false};
  std::atomic<bool> failed_{false};
};

}  // namespace

Graph build_graph(const ReferencePanel& panel, const ModelParams& params, Mode mode,
                  const std::vector<std::uint32_t>& target_mask) {
  ValidateOptions vopts;
  vopts.allow_monomorphic = true;
  const auto diags = validate(panel, vopts);
  if (!diags.empty()) throw InputError("invalid panel: " + diags.front());

  Graph g;
  g.panel = &panel;
  g.params = params;
  g.params.haplotype_count = panel.haplotypes;
  g.params.check();
  g.mode = mode;

  CollapsedPanel cp;
  if (mode == Mode::raw) {
    std::vector<std::uint32_t> all(panel.markers);
    for (std::uint32_t m = 0; m < panel.markers; ++m) all[m] = m;
    cp = collapse_for_interp(panel, all);
  } else {
    cp = collapse_for_interp(panel, target_mask);
  }
  g.cols = cp.observed_cols;
  g.sections = std::move(cp.sections);

  g.kernels.resize(g.cols.size());
  for (std::size_t k = 1; k < g.cols.size(); ++k)
    g.kernels[k] = transition_kernel(g.sections[k - 1].accumulated, g.params);
  return g;
}

Partition partition(const Graph& graph, std::uint32_t workers, std::uint32_t soft_ratio) {
  if (workers < 1) throw InputError("partition requires at least one worker");
  const std::uint64_t V = graph.vertex_count();

  std::uint64_t block = (V + workers - 1) / workers;
  if (soft_ratio > 0) block = std::max<std::uint64_t>(block, soft_ratio);

  Partition p;
  p.workers = workers;
  p.ranges.resize(workers);
  std::uint64_t begin = 0;
  for (std::uint32_t w = 0; w < workers; ++w) {
    const std::uint64_t end = std::min<std::uint64_t>(V, begin + block);
    p.ranges[w] = {static_cast<std::uint32_t>(begin), static_cast<std::uint32_t>(end)};
    if (end > begin) ++p.workers_used;
    begin = end;
  }
  p.idle_workers = p.workers - p.workers_used;
  p.achieved_ratio = p.workers_used ? static_cast<std::uint32_t>(
                                          std::min<std::uint64_t>(block, V))
                                    : 0;
  return p;
}

std::string metrics_csv_header() {
  return "step_count,alpha_deliveries,beta_deliveries,posterior_deliveries,workers,"
         "soft_ratio,wall_ms";
}

std::string metrics_csv_row(const Metrics& m, std::uint32_t workers, std::uint32_t soft_ratio) {
  char wall[32];
  std::snprintf(wall, sizeof wall, "%.3f", m.wall_ms);
  return std::to_string(m.steps) + "," + std::to_string(m.alpha_deliveries) + "," +
         std::to_string(m.beta_deliveries) + "," + std::to_string(m.posterior_deliveries) + "," +
         std::to_string(workers) + "," + std::to_string(soft_ratio) + "," + wall;
}

RunOutput run(const Graph& graph, const Partition& partition,
              const std::vector<TargetHaplotype>& targets, const ModelParams& params,
              const RunOptions& options) {
  if (options.inject_every < 1) throw InputError("inject_every must be >= 1");
  if (partition.ranges.empty() || partition.ranges.size() != partition.workers)
    throw ConfigError("partition does not match its worker count");
  std::uint64_t covered = 0;
  for (const auto& r : partition.ranges) covered += r.size();
  if (covered != graph.vertex_count())
    throw ConfigError("partition does not cover the graph exactly");

  ModelParams p = params;
  p.haplotype_count = graph.haplotypes();
  p.check();
  if (p.effective_population_size != graph.params.effective_population_size ||
      p.error_rate != graph.params.error_rate)
    throw ConfigError("run parameters differ from the parameters the graph was built with");

  const std::uint32_t M = graph.panel->markers;
  for (const TargetHaplotype& t : targets) {
    const auto tdiags = validate(*graph.panel, t);
    if (!tdiags.empty()) throw InputError("invalid target: " + tdiags.front());
    if (graph.mode == Mode::interp) {
      // every target must share the mask the graph was built from
      std::uint64_t unioned = t.observations.size();
      bool saw_first = false, saw_last = false;
      for (const Observation& o : t.observations) {
        if (!std::binary_search(graph.cols.begin(), graph.cols.end(), o.marker))
          throw ConfigError("target " + t.id + " observes marker " + std::to_string(o.marker) +
                            " outside the graph's observation mask");
        if (o.marker == 0) saw_first = true;
        if (o.marker == M - 1) saw_last = true;
      }
      if (!saw_first) ++unioned;
      if (M > 1 && !saw_last) ++unioned;
      if (unioned != graph.columns())
        throw ConfigError("target " + t.id + " does not match the graph's observation mask");
    }
  }

  RunOutput out;
  out.metrics.worker_vertex_counts.reserve(partition.ranges.size());
  for (const auto& r : partition.ranges) out.metrics.worker_vertex_counts.push_back(r.size());

  const auto t0 = std::chrono::steady_clock::now();
  Runtime rt(graph, partition, targets, options);
  rt.execute(out.metrics);
  out.results = rt.collect_results();
  const auto t1 = std::chrono::steady_clock::now();
  out.metrics.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  return out;
}

}  // namespace engine
}  // namespace lshmm
