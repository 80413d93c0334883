#include "lshmm/oracle.hpp"

#include <cmath>

namespace lshmm {
namespace oracle {

namespace {

// Column view the recursions run over: identity in raw mode, the observed
// columns with accumulated distances in interp mode.
struct View {
  const ReferencePanel* panel = nullptr;
  std::vector<std::uint32_t> cols;
  std::vector<double> dist;  // dist[0] == 0

  std::uint32_t states() const { return panel->haplotypes; }
  std::uint32_t columns() const { return static_cast<std::uint32_t>(cols.size()); }
  Allele allele(std::uint32_t h, std::uint32_t k) const { return panel->allele(h, cols[k]); }
};

View identity_view(const ReferencePanel& panel) {
  View v;
  v.panel = &panel;
  v.cols.resize(panel.markers);
  for (std::uint32_t m = 0; m < panel.markers; ++m) v.cols[m] = m;
  v.dist = panel.distances;
  return v;
}

View collapsed_view(const CollapsedPanel& cp) {
  View v;
  v.panel = cp.base;
  v.cols = cp.observed_cols;
  v.dist = cp.collapsed_distances();
  return v;
}

void check_inputs(const ReferencePanel& panel, const TargetHaplotype& target) {
  ValidateOptions opts;
  opts.allow_monomorphic = true;  // monomorphic columns are numerically fine here
  auto diags = validate(panel, opts);
  auto tdiags = validate(panel, target);
  diags.insert(diags.end(), tdiags.begin(), tdiags.end());
  if (!diags.empty()) throw InputError("invalid input: " + diags.front());
}

void scale_column(std::vector<double>& mat, std::uint32_t states, std::uint32_t m,
                  std::vector<double>& scales, Scaling scaling) {
  if (scaling != Scaling::on) return;
  double* col = mat.data() + static_cast<std::size_t>(m) * states;
  double sum = 0.0;
  for (std::uint32_t i = 0; i < states; ++i) sum += col[i];
  if (sum > 0.0) {
    for (std::uint32_t i = 0; i < states; ++i) col[i] /= sum;
    scales[m] = sum;
  }
}

void forward_into(const View& view, const TargetHaplotype& target, const ModelParams& params,
                  Scaling scaling, DPMatrices& dp) {
  const std::uint32_t H = view.states();
  const std::uint32_t K = view.columns();
  dp.states = H;
  dp.columns = K;
  dp.alpha.assign(static_cast<std::size_t>(H) * K, 0.0);
  dp.alpha_scale.assign(K, 1.0);

  const double init = 1.0 / static_cast<double>(H);
  for (std::uint32_t i = 0; i < H; ++i) dp.alpha[i] = init;
  scale_column(dp.alpha, H, 0, dp.alpha_scale, scaling);

  for (std::uint32_t k = 1; k < K; ++k) {
    const TransitionKernel kern = transition_kernel(view.dist[k], params);
    const auto obs = target.observed_at(view.cols[k]);
    const double* prev = dp.alpha.data() + static_cast<std::size_t>(k - 1) * H;
    double* cur = dp.alpha.data() + static_cast<std::size_t>(k) * H;
    for (std::uint32_t j = 0; j < H; ++j) {
      double acc = 0.0;
      for (std::uint32_t i = 0; i < H; ++i) acc += prev[i] * kern.weight(i == j);
      cur[j] = acc * emission(view.allele(j, k), obs, params);
    }
    scale_column(dp.alpha, H, k, dp.alpha_scale, scaling);
  }
}

void backward_into(const View& view, const TargetHaplotype& target, const ModelParams& params,
                   Scaling scaling, DPMatrices& dp) {
  const std::uint32_t H = view.states();
  const std::uint32_t K = view.columns();
  dp.states = H;
  dp.columns = K;
  dp.beta.assign(static_cast<std::size_t>(H) * K, 0.0);
  dp.beta_scale.assign(K, 1.0);

  double* last = dp.beta.data() + static_cast<std::size_t>(K - 1) * H;
  for (std::uint32_t i = 0; i < H; ++i) last[i] = 1.0;
  scale_column(dp.beta, H, K - 1, dp.beta_scale, scaling);

  for (std::uint32_t k = K - 1; k-- > 0;) {
    const TransitionKernel kern = transition_kernel(view.dist[k + 1], params);
    const auto obs = target.observed_at(view.cols[k + 1]);
    const double* next = dp.beta.data() + static_cast<std::size_t>(k + 1) * H;
    double* cur = dp.beta.data() + static_cast<std::size_t>(k) * H;
    for (std::uint32_t i = 0; i < H; ++i) {
      double acc = 0.0;
      for (std::uint32_t j = 0; j < H; ++j) {
        const double emis = emission(view.allele(j, k + 1), obs, params);
        acc += kern.weight(i == j) * next[j] * emis;
      }
      cur[i] = acc;
    }
    scale_column(dp.beta, H, k, dp.beta_scale, scaling);
  }
}

// Per-view-column result rows (probabilities, call) plus the raw bucket
// totals needed by the interpolation stage.
struct ColumnPosteriors {
  std::vector<ImputationResult::Row> rows;  // one per view column
  std::vector<double> totals;               // unnormalized per-column bucket sums
};

ColumnPosteriors posterior_rows(const View& view, DPMatrices& dp, const std::string& target_id) {
  const std::uint32_t H = dp.states;
  const std::uint32_t K = dp.columns;
  dp.posterior.assign(static_cast<std::size_t>(H) * K, 0.0);

  ColumnPosteriors out;
  out.rows.resize(K);
  out.totals.resize(K);
  for (std::uint32_t k = 0; k < K; ++k) {
    std::array<double, kAlleleCount> bins{};
    double* post = dp.posterior.data() + static_cast<std::size_t>(k) * H;
    for (std::uint32_t i = 0; i < H; ++i) {
      const double p = dp.alpha_at(i, k) * dp.beta_at(i, k);
      post[i] = p;
      bins[view.allele(i, k)] += p;
    }
    double total = 0.0;
    for (double b : bins) total += b;
    if (total == 0.0)
      throw UnderflowError("target " + target_id + ": posterior column " +
                           std::to_string(view.cols[k]) + " underflowed to zero");
    ImputationResult::Row row;
    row.marker = view.cols[k];
    for (std::size_t a = 0; a < kAlleleCount; ++a) row.probs[a] = bins[a] / total;
    row.call = bins[1] > bins[0] ? 1 : 0;
    row.source = CallSource::hmm;
    out.rows[k] = row;
    out.totals[k] = total;
  }
  return out;
}

ImputationResult impute_one_raw(const View& view, const TargetHaplotype& target,
                                const ModelParams& params, Scaling scaling) {
  DPMatrices dp;
  forward_into(view, target, params, scaling, dp);
  DPMatrices bdp;
  backward_into(view, target, params, scaling, bdp);
  dp.beta = std::move(bdp.beta);
  dp.beta_scale = std::move(bdp.beta_scale);

  ImputationResult res;
  res.target_id = target.id;
  res.rows = posterior_rows(view, dp, target.id).rows;
  return res;
}

ImputationResult impute_one_interp(const ReferencePanel& panel, const TargetHaplotype& target,
                                   const ModelParams& params, Scaling scaling) {
  const CollapsedPanel cp = collapse_for_interp(panel, target);
  const View view = collapsed_view(cp);

  DPMatrices dp;
  forward_into(view, target, params, scaling, dp);
  DPMatrices bdp;
  backward_into(view, target, params, scaling, bdp);
  dp.beta = std::move(bdp.beta);
  dp.beta_scale = std::move(bdp.beta_scale);

  const ColumnPosteriors cols = posterior_rows(view, dp, target.id);
  const std::uint32_t H = dp.states;

  ImputationResult res;
  res.target_id = target.id;
  res.rows.reserve(panel.markers);

  for (std::size_t k = 0; k < cp.sections.size(); ++k) {
    const CollapsedSection& sec = cp.sections[k];
    res.rows.push_back(cols.rows[k]);
    for (std::uint32_t idx = 0; idx < sec.interior_count(); ++idx) {
      const std::uint32_t marker = sec.left + 1 + idx;
      std::array<double, kAlleleCount> bins{};
      for (std::uint32_t h = 0; h < H; ++h) {
        double pl = dp.posterior_at(h, static_cast<std::uint32_t>(k));
        double pr = dp.posterior_at(h, static_cast<std::uint32_t>(k) + 1);
        if (scaling == Scaling::on) {
          // per-column scale factors differ, so endpoints must be normalized
          // before blending; with scaling off the raw products already share
          // one scale and blending them matches the engine bit for bit
          pl /= cols.totals[k];
          pr /= cols.totals[k + 1];
        }
        const double px = interpolate(pl, pr, sec.cum[idx], sec.accumulated);
        bins[panel.allele(h, marker)] += px;
      }
      double total = 0.0;
      for (double b : bins) total += b;
      if (total == 0.0)
        throw UnderflowError("target " + target.id + ": interpolated column " +
                             std::to_string(marker) + " underflowed to zero");
      ImputationResult::Row row;
      row.marker = marker;
      for (std::size_t a = 0; a < kAlleleCount; ++a) row.probs[a] = bins[a] / total;
      row.call = bins[1] > bins[0] ? 1 : 0;
      row.source = CallSource::interpolated;
      res.rows.push_back(row);
    }
  }
  res.rows.push_back(cols.rows.back());
  return res;
}

}  // namespace

DPMatrices forward(const ReferencePanel& panel, const TargetHaplotype& target,
                   const ModelParams& params, Scaling scaling) {
  check_inputs(panel, target);
  ModelParams p = params;
  p.haplotype_count = panel.haplotypes;
  DPMatrices dp;
  forward_into(identity_view(panel), target, p, scaling, dp);
  return dp;
}

DPMatrices backward(const ReferencePanel& panel, const TargetHaplotype& target,
                    const ModelParams& params, Scaling scaling) {
  check_inputs(panel, target);
  ModelParams p = params;
  p.haplotype_count = panel.haplotypes;
  DPMatrices dp;
  backward_into(identity_view(panel), target, p, scaling, dp);
  return dp;
}

DPMatrices forward_backward(const ReferencePanel& panel, const TargetHaplotype& target,
                            const ModelParams& params, Scaling scaling) {
  check_inputs(panel, target);
  ModelParams p = params;
  p.haplotype_count = panel.haplotypes;
  const View view = identity_view(panel);
  DPMatrices dp;
  forward_into(view, target, p, scaling, dp);
  DPMatrices bdp;
  backward_into(view, target, p, scaling, bdp);
  dp.beta = std::move(bdp.beta);
  dp.beta_scale = std::move(bdp.beta_scale);
  return dp;
}

std::vector<double> alpha_beta_column_products(const DPMatrices& dp) {
  std::vector<double> prods(dp.columns, 0.0);
  for (std::uint32_t m = 0; m < dp.columns; ++m) {
    double s = 0.0;
    for (std::uint32_t i = 0; i < dp.states; ++i) s += dp.alpha_at(i, m) * dp.beta_at(i, m);
    prods[m] = s;
  }
  return prods;
}

ImputationResult posteriors_and_calls(const ReferencePanel& panel, DPMatrices& dp,
                                      const std::string& target_id) {
  if (dp.columns != panel.markers || dp.states != panel.haplotypes)
    throw InputError("DP matrices do not match the panel dimensions");
  ImputationResult res;
  res.target_id = target_id;
  res.rows = posterior_rows(identity_view(panel), dp, target_id).rows;
  return res;
}

std::vector<ImputationResult> impute(const ReferencePanel& panel,
                                     const std::vector<TargetHaplotype>& targets,
                                     const ModelParams& params, Mode mode, Scaling scaling) {
  ModelParams p = params;
  p.haplotype_count = panel.haplotypes;

  std::vector<ImputationResult> out;
  out.reserve(targets.size());
  for (const TargetHaplotype& t : targets) {
    check_inputs(panel, t);
    if (mode == Mode::raw) {
      out.push_back(impute_one_raw(identity_view(panel), t, p, scaling));
    } else {
      out.push_back(impute_one_interp(panel, t, p, scaling));
    }
  }
  return out;
}

}  // namespace oracle
}  // namespace lshmm
