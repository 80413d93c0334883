#include "lshmm/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "lshmm/engine.hpp"
#include "lshmm/io.hpp"
#include "lshmm/oracle.hpp"
#include "lshmm/pangen.hpp"

namespace lshmm {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitMismatch = 1;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(text);
  while (std::getline(ss, cur, ',')) {
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

struct GenArgs {
  GenSpec spec;
  double ne = 20000.0;
  double err = 1e-4;
  std::string ratio = "1/1";
  std::string out_prefix = "panel";
};

int cmd_gen(const GenArgs& args) {
  GenSpec spec = args.spec;
  spec.target_ratio = parse_ratio(args.ratio);
  spec.check();

  ModelParams params;
  params.effective_population_size = args.ne;
  params.error_rate = args.err;
  params.haplotype_count = spec.haplotypes;

  const ReferencePanel panel = generate_panel(spec);
  const GeneratedTargets gen = generate_targets(panel, spec, params);

  save_panel(panel, args.out_prefix + ".refp");
  save_targets(gen.targets, args.out_prefix + ".targ");
  save_targets(gen.truth, args.out_prefix + ".truth");

  std::cout << "generated " << panel.haplotypes << "x" << panel.markers << " panel, "
            << gen.targets.size() << " targets ("
            << (gen.targets.empty() ? 0 : gen.targets[0].observations.size())
            << " observed markers each), seed " << spec.seed << " -> " << args.out_prefix
            << ".{refp,targ,truth}" << std::endl;
  return kExitOk;
}

struct ImputeArgs {
  std::string panel_path;
  std::string targets_path;
  std::string out_path = "results.iout";
  std::string metrics_path;  // engine only; default derived from out_path
  std::string backend = "oracle";
  std::string mode = "raw";
  std::string scaling;  // empty = backend default
  std::uint32_t workers = 1;
  std::uint32_t soft_ratio = 0;
  std::uint32_t inject_every = 1;
  double ne = 20000.0;
  double err = 1e-4;
  std::uint64_t seed = 0;
};

// Engine batches must share one observation mask; split mixed batches into
// per-mask sub-batches and stitch the results back in input order.
std::vector<std::vector<std::size_t>> group_by_mask(const std::vector<TargetHaplotype>& targets) {
  std::map<std::vector<std::uint32_t>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    std::vector<std::uint32_t> mask;
    mask.reserve(targets[i].observations.size());
    for (const Observation& o : targets[i].observations) mask.push_back(o.marker);
    groups[mask].push_back(i);
  }
  std::vector<std::vector<std::size_t>> out;
  out.reserve(groups.size());
  for (auto& [mask, idx] : groups) out.push_back(std::move(idx));
  return out;
}

int cmd_impute(const ImputeArgs& args) {
  const Backend backend = parse_backend(args.backend);
  const Mode mode = parse_mode(args.mode);
  Scaling scaling = backend == Backend::oracle ? Scaling::on : Scaling::off;
  if (!args.scaling.empty()) {
    scaling = parse_scaling(args.scaling);
    if (backend == Backend::engine && scaling == Scaling::on)
      throw InputError("the engine backend computes unscaled; --scaling on is oracle-only");
  }

  const ReferencePanel panel = load_panel(args.panel_path);
  const std::vector<TargetHaplotype> targets = load_targets(args.targets_path);

  ModelParams params;
  params.effective_population_size = args.ne;
  params.error_rate = args.err;
  params.haplotype_count = panel.haplotypes;

  ResultFile file;
  file.header.effective_population_size = args.ne;
  file.header.error_rate = args.err;
  file.header.mode = mode;
  file.header.scaling = scaling;
  file.header.backend = backend;
  file.header.seed = args.seed;

  if (backend == Backend::oracle) {
    file.results = oracle::impute(panel, targets, params, mode, scaling);
  } else {
    engine::Metrics total;
    file.results.resize(targets.size());
    std::vector<std::vector<std::size_t>> batches;
    if (mode == Mode::interp)
      batches = group_by_mask(targets);
    else
      batches.push_back([&] {
        std::vector<std::size_t> all(targets.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        return all;
      }());

    std::uint32_t achieved_ratio = 0;
    for (const auto& batch : batches) {
      std::vector<TargetHaplotype> sub;
      sub.reserve(batch.size());
      for (std::size_t i : batch) sub.push_back(targets[i]);
      std::vector<std::uint32_t> mask;
      if (mode == Mode::interp)
        for (const Observation& o : sub.front().observations) mask.push_back(o.marker);

      const engine::Graph graph = engine::build_graph(panel, params, mode, mask);
      const engine::Partition part = engine::partition(graph, args.workers, args.soft_ratio);
      engine::RunOptions opts;
      opts.inject_every = args.inject_every;
      engine::RunOutput run_out = engine::run(graph, part, sub, params, opts);

      for (std::size_t j = 0; j < batch.size(); ++j)
        file.results[batch[j]] = std::move(run_out.results[j]);
      total.steps += run_out.metrics.steps;
      total.alpha_deliveries += run_out.metrics.alpha_deliveries;
      total.beta_deliveries += run_out.metrics.beta_deliveries;
      total.posterior_deliveries += run_out.metrics.posterior_deliveries;
      total.posterior_self += run_out.metrics.posterior_self;
      total.wall_ms += run_out.metrics.wall_ms;
      achieved_ratio = std::max(achieved_ratio, part.achieved_ratio);
    }

    const std::string metrics_path =
        args.metrics_path.empty() ? args.out_path + ".metrics.csv" : args.metrics_path;
    std::ofstream mf(metrics_path, std::ios::trunc);
    if (!mf) throw InputError("cannot open '" + metrics_path + "' for writing");
    mf << engine::metrics_csv_header() << "\n"
       << engine::metrics_csv_row(total, args.workers, achieved_ratio) << "\n";
  }

  save_results(file, args.out_path);
  std::cout << "imputed " << targets.size() << " targets over " << panel.haplotypes << "x"
            << panel.markers << " panel (" << args.backend << ", " << args.mode << ") -> "
            << args.out_path << std::endl;
  return kExitOk;
}

struct CompareArgs {
  std::string file_a;
  std::string file_b;
  double tolerance = 1e-6;
  std::string truth_path;
  std::string targets_path;
};

double relative_deviation(double a, double b) {
  if (a == b) return 0.0;
  const double scale = std::max(std::abs(a), std::abs(b));
  return std::abs(a - b) / scale;
}

int cmd_compare(const CompareArgs& args) {
  if (!(args.tolerance > 0.0)) throw InputError("tolerance must be > 0");
  const ResultFile fa = load_results(args.file_a);
  const ResultFile fb = load_results(args.file_b);

  if (fa.results.size() != fb.results.size()) {
    std::cout << "structural mismatch: " << fa.results.size() << " vs " << fb.results.size()
              << " targets" << std::endl;
    return kExitRuntime;
  }
  for (std::size_t t = 0; t < fa.results.size(); ++t) {
    if (fa.results[t].target_id != fb.results[t].target_id ||
        fa.results[t].rows.size() != fb.results[t].rows.size()) {
      std::cout << "structural mismatch in target block " << t << std::endl;
      return kExitRuntime;
    }
    for (std::size_t r = 0; r < fa.results[t].rows.size(); ++r)
      if (fa.results[t].rows[r].marker != fb.results[t].rows[r].marker) {
        std::cout << "structural mismatch: marker sets differ in target "
                  << fa.results[t].target_id << std::endl;
        return kExitRuntime;
      }
  }

  double max_dev = 0.0;
  std::string worst = "-";
  std::size_t call_mismatches = 0;
  std::string first_call_mismatch;
  for (std::size_t t = 0; t < fa.results.size(); ++t) {
    for (std::size_t r = 0; r < fa.results[t].rows.size(); ++r) {
      const auto& ra = fa.results[t].rows[r];
      const auto& rb = fb.results[t].rows[r];
      for (std::size_t a = 0; a < kAlleleCount; ++a) {
        const double dev = relative_deviation(ra.probs[a], rb.probs[a]);
        if (dev > max_dev) {
          max_dev = dev;
          worst = fa.results[t].target_id + " marker " + std::to_string(ra.marker);
        }
      }
      if (ra.call != rb.call) {
        ++call_mismatches;
        if (first_call_mismatch.empty())
          first_call_mismatch = fa.results[t].target_id + " marker " + std::to_string(ra.marker);
      }
    }
  }

  const bool match = max_dev <= args.tolerance && call_mismatches == 0;
  std::cout << "max deviation " << format_double(max_dev) << " at " << worst << "; "
            << call_mismatches << " call mismatches";
  if (!first_call_mismatch.empty()) std::cout << " (first at " << first_call_mismatch << ")";
  std::cout << "; tolerance " << format_double(args.tolerance) << " -> "
            << (match ? "MATCH" : "MISMATCH") << std::endl;

  if (!args.truth_path.empty()) {
    const std::vector<TargetHaplotype> truth = load_targets(args.truth_path);
    std::vector<TargetHaplotype> observed;
    if (!args.targets_path.empty()) observed = load_targets(args.targets_path);
    for (const auto* file : {&fa, &fb}) {
      std::uint64_t scored = 0, agreed = 0;
      for (const ImputationResult& res : file->results) {
        const TargetHaplotype* tr = nullptr;
        for (const TargetHaplotype& t : truth)
          if (t.id == res.target_id) {
            tr = &t;
            break;
          }
        if (!tr) continue;
        const TargetHaplotype* obs = nullptr;
        for (const TargetHaplotype& t : observed)
          if (t.id == res.target_id) {
            obs = &t;
            break;
          }
        for (const auto& row : res.rows) {
          if (obs && obs->observed_at(row.marker).has_value()) continue;  // unobserved only
          const auto truth_allele = tr->observed_at(row.marker);
          if (!truth_allele.has_value()) continue;
          ++scored;
          if (*truth_allele == row.call) ++agreed;
        }
      }
      std::cout << "concordance " << (file == &fa ? args.file_a : args.file_b) << ": "
                << agreed << "/" << scored;
      if (scored) {
        char buf[32];
        std::snprintf(buf, sizeof buf, " = %.6f", static_cast<double>(agreed) / scored);
        std::cout << buf;
      }
      std::cout << std::endl;
    }
  }
  return match ? kExitOk : kExitMismatch;
}

struct BenchArgs {
  std::string sizes = "32x128";
  std::string modes = "raw";
  std::string workers = "1";
  std::string soft_ratios = "0";
  std::string obs_ratio = "1/10";
  std::uint32_t targets = 4;
  double maf = 0.05;
  double dlo = 1e-8;
  double dhi = 1e-6;
  double ne = 20000.0;
  double err = 1e-4;
  std::uint64_t seed = 1;
  std::string out_path;
};

int cmd_bench(const BenchArgs& args) {
  const auto sizes = split_list(args.sizes);
  const auto modes = split_list(args.modes);
  const auto workers_list = split_list(args.workers);
  const auto ratio_list = split_list(args.soft_ratios);
  if (sizes.empty() || modes.empty() || workers_list.empty() || ratio_list.empty())
    throw InputError("bench sweep lists must be non-empty");

  std::ostringstream csv;
  csv << "H,M,targets,mode,workers,soft_ratio,achieved_ratio,steps,alpha_deliveries,"
         "beta_deliveries,posterior_deliveries,posterior_self,engine_wall_ms,oracle_wall_ms\n";

  for (const std::string& size : sizes) {
    const std::size_t x = size.find('x');
    if (x == std::string::npos) throw InputError("bad size '" + size + "', expected HxM");
    GenSpec spec;
    spec.haplotypes = static_cast<std::uint32_t>(std::stoul(size.substr(0, x)));
    spec.markers = static_cast<std::uint32_t>(std::stoul(size.substr(x + 1)));
    spec.seed = args.seed;
    spec.distance_lo = args.dlo;
    spec.distance_hi = args.dhi;
    spec.minor_allele_frequency = args.maf;
    spec.target_ratio = parse_ratio(args.obs_ratio);
    spec.target_count = args.targets;

    ModelParams params;
    params.effective_population_size = args.ne;
    params.error_rate = args.err;
    params.haplotype_count = spec.haplotypes;

    const ReferencePanel panel = generate_panel(spec);
    const GeneratedTargets gen = generate_targets(panel, spec, params);
    std::vector<std::uint32_t> mask;
    for (const Observation& o : gen.targets.front().observations) mask.push_back(o.marker);

    for (const std::string& mode_str : modes) {
      const Mode mode = parse_mode(mode_str);
      const engine::Graph graph = engine::build_graph(panel, params, mode, mask);

      const auto o0 = std::chrono::steady_clock::now();
      const auto oracle_results = oracle::impute(panel, gen.targets, params, mode, Scaling::off);
      const auto o1 = std::chrono::steady_clock::now();
      const double oracle_ms = std::chrono::duration<double, std::milli>(o1 - o0).count();
      (void)oracle_results;

      for (const std::string& w_str : workers_list) {
        const auto w = static_cast<std::uint32_t>(std::stoul(w_str));
        for (const std::string& r_str : ratio_list) {
          const auto r = static_cast<std::uint32_t>(std::stoul(r_str));
          const engine::Partition part = engine::partition(graph, w, r);
          const engine::RunOutput out = engine::run(graph, part, gen.targets, params);
          char wall[64];
          std::snprintf(wall, sizeof wall, "%.3f,%.3f", out.metrics.wall_ms, oracle_ms);
          csv << spec.haplotypes << ',' << spec.markers << ',' << args.targets << ','
              << mode_str << ',' << w << ',' << r << ',' << part.achieved_ratio << ','
              << out.metrics.steps << ',' << out.metrics.alpha_deliveries << ','
              << out.metrics.beta_deliveries << ',' << out.metrics.posterior_deliveries << ','
              << out.metrics.posterior_self << ',' << wall << '\n';
        }
      }
    }
  }

  std::cout << csv.str();
  if (!args.out_path.empty()) {
    std::ofstream f(args.out_path, std::ios::trunc);
    if (!f) throw InputError("cannot open '" + args.out_path + "' for writing");
    f << csv.str();
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Li-Stephens genotype imputation: sequential oracle and event-driven engine"};
  app.require_subcommand(1);

  GenArgs gen_args;
  CLI::App* gen = app.add_subcommand("gen", "generate a synthetic panel, targets and truth");
  gen->add_option("--hap", gen_args.spec.haplotypes, "reference haplotypes H")->required();
  gen->add_option("--mark", gen_args.spec.markers, "reference markers M")->required();
  gen->add_option("--maf", gen_args.spec.minor_allele_frequency,
                  "per-column minor allele frequency");
  gen->add_option("--ratio", gen_args.ratio, "observed-to-reference marker ratio, e.g. 1/100");
  gen->add_option("--targets", gen_args.spec.target_count, "number of target haplotypes");
  gen->add_option("--seed", gen_args.spec.seed, "generator seed");
  gen->add_option("--dlo", gen_args.spec.distance_lo, "minimum inter-marker distance");
  gen->add_option("--dhi", gen_args.spec.distance_hi, "maximum inter-marker distance");
  gen->add_option("--ne", gen_args.ne, "effective population size for the mosaic");
  gen->add_option("--err", gen_args.err, "error rate for the mosaic");
  gen->add_option("--out", gen_args.out_prefix, "output path prefix");

  ImputeArgs imp_args;
  CLI::App* imp = app.add_subcommand("impute", "impute targets against a reference panel");
  imp->add_option("--panel", imp_args.panel_path, "reference panel (.refp)")->required();
  imp->add_option("--targets", imp_args.targets_path, "target haplotypes (.targ)")->required();
  imp->add_option("--out", imp_args.out_path, "result file (.iout)");
  imp->add_option("--metrics", imp_args.metrics_path, "metrics CSV path (engine)");
  imp->add_option("--backend", imp_args.backend, "oracle|engine");
  imp->add_option("--mode", imp_args.mode, "raw|interp");
  imp->add_option("--scaling", imp_args.scaling, "on|off (oracle; default on)");
  imp->add_option("--workers", imp_args.workers, "engine worker count");
  imp->add_option("--soft-ratio", imp_args.soft_ratio, "vertices per worker target (0 = even)");
  imp->add_option("--inject-every", imp_args.inject_every, "steps between target injections");
  imp->add_option("--ne", imp_args.ne, "effective population size");
  imp->add_option("--err", imp_args.err, "error rate");
  imp->add_option("--seed", imp_args.seed, "seed recorded in the result header");

  CompareArgs cmp_args;
  CLI::App* cmp = app.add_subcommand("compare", "compare two result files");
  cmp->add_option("file_a", cmp_args.file_a, "first result file")->required();
  cmp->add_option("file_b", cmp_args.file_b, "second result file")->required();
  cmp->add_option("--tol", cmp_args.tolerance, "relative probability tolerance");
  cmp->add_option("--truth", cmp_args.truth_path, "truth file for concordance scoring");
  cmp->add_option("--targets", cmp_args.targets_path,
                  "targets file; concordance then scores unobserved markers only");

  BenchArgs bench_args;
  CLI::App* bench = app.add_subcommand("bench", "sweep engine configurations, emit CSV");
  bench->add_option("--sizes", bench_args.sizes, "panel sizes, e.g. 32x128,64x256");
  bench->add_option("--modes", bench_args.modes, "modes to sweep, e.g. raw,interp");
  bench->add_option("--workers", bench_args.workers, "worker counts, e.g. 1,2,8");
  bench->add_option("--soft-ratios", bench_args.soft_ratios, "soft-scheduling ratios, e.g. 1,5,10");
  bench->add_option("--obs-ratio", bench_args.obs_ratio, "observed marker ratio for targets");
  bench->add_option("--targets", bench_args.targets, "targets per cell");
  bench->add_option("--maf", bench_args.maf, "minor allele frequency");
  bench->add_option("--dlo", bench_args.dlo, "minimum inter-marker distance");
  bench->add_option("--dhi", bench_args.dhi, "maximum inter-marker distance");
  bench->add_option("--ne", bench_args.ne, "effective population size");
  bench->add_option("--err", bench_args.err, "error rate");
  bench->add_option("--seed", bench_args.seed, "generator seed");
  bench->add_option("--out", bench_args.out_path, "also write the CSV to this path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gen->parsed()) return cmd_gen(gen_args);
    if (imp->parsed()) return cmd_impute(imp_args);
    if (cmp->parsed()) return cmd_compare(cmp_args);
    if (bench->parsed()) return cmd_bench(bench_args);
  } catch (const UnderflowError& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kExitRuntime;
  } catch (const ProtocolError& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kExitRuntime;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kExitRuntime;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kExitRuntime;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace lshmm
