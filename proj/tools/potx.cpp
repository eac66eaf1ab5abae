#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "potx/betting.hpp"
#include "potx/csv.hpp"
#include "potx/error.hpp"
#include "potx/estimate.hpp"
#include "potx/ingest.hpp"
#include "potx/pipeline.hpp"
#include "potx/potmodel.hpp"
#include "potx/reduce.hpp"
#include "potx/stats.hpp"

namespace fs = std::filesystem;

namespace {

class UsageError : public potx::Error {
 public:
  using potx::Error::Error;
};

// Options shared by every subcommand. Flags given on the command line
// override values from --config.
struct Common {
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out;
  std::vector<std::string> data;
  bool synth = false;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* out_opt = nullptr;
};

void add_common(CLI::App& cmd, Common& c, bool with_input) {
  cmd.add_option("--config", c.config_path, "JSON configuration file")->check(CLI::ExistingFile);
  c.seed_opt = cmd.add_option("--seed", c.seed, "Global seed");
  c.out_opt = cmd.add_option("--out", c.out, "Output file or directory");
  if (with_input) {
    cmd.add_option("--data", c.data, "Run CSV files")->check(CLI::ExistingFile);
    cmd.add_flag("--synth", c.synth, "Use the synthetic generator (config synth block or defaults)");
  }
}

potx::PipelineConfig base_config(const Common& c) {
  potx::PipelineConfig cfg = c.config_path.empty() ? potx::PipelineConfig{}
                                                   : potx::load_config(c.config_path);
  if (*c.seed_opt) cfg.seed = c.seed;
  if (!c.data.empty()) {
    cfg.data_paths = c.data;
    cfg.synth.reset();
  } else if (c.synth) {
    cfg.data_paths.clear();
    if (!cfg.synth) cfg.synth = potx::SynthSpec{};
  }
  return cfg;
}

potx::Dataset load_input(const potx::PipelineConfig& cfg) {
  if (!cfg.data_paths.empty()) {
    std::vector<fs::path> paths(cfg.data_paths.begin(), cfg.data_paths.end());
    return potx::load_dataset(paths);
  }
  if (cfg.synth) return potx::generate_synthetic(*cfg.synth);
  throw UsageError("no input data: pass --data <files>, --synth or a config with data/synth");
}

potx::TargetId single_target(const std::string& text, const potx::PipelineConfig& cfg) {
  if (!text.empty()) return potx::parse_target_id(text);
  if (cfg.targets.size() == 1) return cfg.targets.front();
  throw UsageError("--target is required");
}

std::vector<potx::TargetId> target_list(const std::vector<std::string>& names,
                                        const potx::PipelineConfig& cfg) {
  if (names.empty()) return cfg.targets;
  std::vector<potx::TargetId> ids;
  for (const auto& n : names) ids.push_back(potx::parse_target_id(n));
  return ids;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw potx::Error("cannot write " + path.string());
  return out;
}

std::string fmt(double v) { return potx::csv::format_double(v); }

// synth ---------------------------------------------------------------

struct SynthArgs {
  Common common;
  std::optional<int> runs, years;
  std::optional<double> amplitude, tail_scale, loading;
};

int cmd_synth(SynthArgs& a) {
  potx::PipelineConfig cfg = base_config(a.common);
  potx::SynthSpec spec = cfg.synth.value_or(potx::SynthSpec{});
  if (*a.common.seed_opt) spec.seed = a.common.seed;
  if (a.runs) spec.n_runs = *a.runs;
  if (a.years) spec.years_per_run = *a.years;
  if (a.amplitude) spec.seasonal_amplitude = *a.amplitude;
  if (a.tail_scale) spec.tail_scale = *a.tail_scale;
  if (a.loading) spec.spatial_loading = potx::SynthSpec::filled_loading(*a.loading);
  spec.validate();
  cfg.synth = spec;
  cfg.data_paths.clear();

  const fs::path dir = a.common.out.empty() ? fs::path("potx_data") : fs::path(a.common.out);
  fs::create_directories(dir);
  const std::uint64_t hash = potx::config_hash(cfg);
  const potx::Dataset data = potx::generate_synthetic(spec);
  for (const auto& run : data.runs) {
    char name[32];
    std::snprintf(name, sizeof name, "run_%03d.csv", run.run_id);
    auto out = open_out(dir / name);
    out << potx::csv::provenance_line(spec.seed, hash) << '\n';
    potx::write_run(out, run);
    std::cout << (dir / name).string() << '\n';
  }
  return 0;
}

// reduce --------------------------------------------------------------

struct ReduceArgs {
  Common common;
  std::vector<std::string> targets;
};

int cmd_reduce(ReduceArgs& a) {
  const potx::PipelineConfig cfg = base_config(a.common);
  const potx::Dataset data = load_input(cfg);
  const fs::path dir = a.common.out.empty() ? fs::path("potx_out") : fs::path(a.common.out);
  const std::uint64_t hash = potx::config_hash(cfg);
  for (potx::TargetId id : target_list(a.targets, cfg)) {
    const auto r = potx::resolve_target(cfg, id);
    const auto target = potx::reduce_target(data, r.spec);
    const fs::path path = dir / ("target_" + std::string(potx::to_string(id)) + ".csv");
    auto out = open_out(path);
    out << potx::csv::provenance_line(cfg.seed, hash) << '\n';
    potx::write_target_csv(out, target);
    std::cout << path.string() << " rows=" << target.size()
              << " events=" << potx::count_events(target, r.spec) << '\n';
  }
  return 0;
}

// fit -----------------------------------------------------------------

struct FitArgs {
  Common common;
  std::string target;
  std::optional<double> p;
  std::optional<int> n_basis;
};

int cmd_fit(FitArgs& a) {
  const potx::PipelineConfig cfg = base_config(a.common);
  const potx::TargetId id = single_target(a.target, cfg);
  auto r = potx::resolve_target(cfg, id);
  const std::optional<double> level = a.p ? a.p : r.fixed_level;
  if (!level) throw UsageError("--p is required");
  if (a.n_basis) r.game.fit.n_basis = static_cast<std::size_t>(*a.n_basis);
  if (*level > r.game.max_level) {
    std::cerr << "warning: level " << fmt(*level) << " exceeds the largest selectable level "
              << fmt(r.game.max_level) << "; the fit rests on few exceedances\n";
  }
  const potx::Dataset data = load_input(cfg);
  const auto target = potx::reduce_target(data, r.spec);
  const potx::PotFit fit = potx::fit_pot_model(target, *level, r.game.fit);

  const fs::path path = a.common.out.empty()
                            ? fs::path("model_" + std::string(potx::to_string(id)) + ".json")
                            : fs::path(a.common.out);
  auto out = open_out(path);
  out << potx::model_to_json(fit.model) << '\n';
  std::cout << "target=" << potx::to_string(id) << " p=" << fmt(*level)
            << " q=" << fmt(fit.model.threshold)
            << " exceedances=" << fit.exceedances.records.size() << " model=" << path.string()
            << '\n';
  return 0;
}

// select --------------------------------------------------------------

struct SelectArgs {
  Common common;
  std::string target;
  std::vector<int> ks;
  std::optional<double> alpha, max_level;
  std::vector<double> grid;
  int repeat = 1;
};

int cmd_select(SelectArgs& a) {
  const potx::PipelineConfig cfg = base_config(a.common);
  const potx::TargetId id = single_target(a.target, cfg);
  auto r = potx::resolve_target(cfg, id);
  if (a.alpha) r.game.alpha = *a.alpha;
  if (a.max_level) r.game.max_level = *a.max_level;
  if (!a.grid.empty()) r.game.level_grid = a.grid;
  const std::vector<int> ks = a.ks.empty() ? std::vector<int>{r.game.K} : a.ks;

  const potx::Dataset data = load_input(cfg);
  const auto target = potx::reduce_target(data, r.spec);

  std::map<int, potx::LevelSelection> by_k;
  for (int k : ks) {
    potx::GameConfig g = r.game;
    g.K = k;
    g.validate();
    by_k[k] = potx::select_level(target, g);
    std::cout << "K=" << k << " p* = " << fmt(by_k[k].best_level) << '\n';
    if (a.repeat > 1) {
      std::cout << "p,median,min,max\n";
      for (double p : g.level_grid) {
        try {
          auto w = potx::score_distribution(target, g, p, static_cast<std::size_t>(a.repeat));
          std::sort(w.begin(), w.end());
          std::cout << fmt(p) << ',' << fmt(w[(w.size() - 1) / 2]) << ',' << fmt(w.front())
                    << ',' << fmt(w.back()) << '\n';
        } catch (const potx::Error& e) {
          std::cout << fmt(p) << ",nan,nan,nan\n";
        }
      }
    }
  }
  const fs::path path = a.common.out.empty()
                            ? fs::path("scores_" + std::string(potx::to_string(id)) + ".csv")
                            : fs::path(a.common.out);
  auto out = open_out(path);
  potx::write_scores_csv(out, id, by_k, cfg.seed, potx::config_hash(cfg));
  return 0;
}

// estimate ------------------------------------------------------------

struct EstimateArgs {
  Common common;
  std::string model_path;
  std::string target;
  std::optional<long> observed;
  std::optional<double> p, confidence, threshold;
  std::optional<int> replications;
};

int cmd_estimate(EstimateArgs& a) {
  const potx::PipelineConfig cfg = base_config(a.common);
  std::ifstream in(a.model_path);
  if (!in) throw UsageError("cannot read model " + a.model_path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  const potx::PotModel model = potx::model_from_json(buffer.str());

  const potx::TargetId id = a.target.empty() ? model.target : potx::parse_target_id(a.target);
  auto r = potx::resolve_target(cfg, id);
  if (a.threshold) r.spec.event_threshold = *a.threshold;
  if (a.confidence) r.estimate.confidence = *a.confidence;
  if (a.replications) r.estimate.replications = *a.replications;
  if (a.p) r.estimate.expected_level = *a.p;
  else if (r.fixed_level) r.estimate.expected_level = r.fixed_level;

  long observed = 0;
  if (a.observed) {
    observed = *a.observed;
  } else if (!cfg.data_paths.empty() || cfg.synth) {
    const auto target = potx::reduce_target(load_input(cfg), r.spec);
    observed = static_cast<long>(potx::count_events(target, r.spec));
  } else {
    throw UsageError("pass --observed <count> or input data to count observed events");
  }

  const auto est = potx::estimate_frequency(model, r.spec, observed, r.estimate);
  const fs::path path = a.common.out.empty() ? fs::path("answers.csv") : fs::path(a.common.out);
  auto out = open_out(path);
  potx::write_answer_header(out, cfg.seed, potx::config_hash(cfg));
  potx::write_answer_row(out, id, est, r.estimate.seed);
  potx::write_answer_header(std::cout, cfg.seed, potx::config_hash(cfg));
  potx::write_answer_row(std::cout, id, est, r.estimate.seed);
  return 0;
}

// report --------------------------------------------------------------

struct ReportArgs {
  Common common;
  std::vector<std::string> targets;
  std::optional<double> p;
};

int cmd_report(ReportArgs& a) {
  const potx::PipelineConfig cfg = base_config(a.common);
  const potx::Dataset data = load_input(cfg);
  const fs::path dir = a.common.out.empty() ? fs::path("potx_out") : fs::path(a.common.out);
  const std::uint64_t hash = potx::config_hash(cfg);
  for (potx::TargetId id : target_list(a.targets, cfg)) {
    const auto r = potx::resolve_target(cfg, id);
    const std::optional<double> level = a.p ? a.p : r.fixed_level;
    if (!level) throw UsageError("--p is required (or a fixed level override in the config)");
    const std::string tag(potx::to_string(id));
    const auto target = potx::reduce_target(data, r.spec);
    const auto fit = potx::fit_pot_model(target, *level, r.game.fit);
    const auto put = [&](const std::string& name, auto&& writer) {
      auto out = open_out(dir / name);
      writer(out);
      std::cout << (dir / name).string() << '\n';
    };
    put("series_" + tag + ".csv", [&](std::ostream& o) { potx::write_series_csv(o, target, cfg.seed, hash); });
    put("seasonal_" + tag + ".csv", [&](std::ostream& o) { potx::write_seasonal_csv(o, fit.model, cfg.seed, hash); });
    put("exceedances_" + tag + ".csv", [&](std::ostream& o) { potx::write_exceedance_csv(o, fit, cfg.seed, hash); });
    if (fit.adjusted.values.size() >= 20) {
      const auto qq = potx::qq_exponential(fit.adjusted);
      put("qq_" + tag + ".csv", [&](std::ostream& o) { potx::write_qq_csv(o, qq, cfg.seed, hash); });
    }
    if (target.has_aux()) {
      const auto angular = potx::angular_diagnostic(target, 0.99);
      put("angular_" + tag + ".csv", [&](std::ostream& o) { potx::write_angular_csv(o, angular, cfg.seed, hash); });
    }
  }
  return 0;
}

// run -----------------------------------------------------------------

struct RunArgs {
  Common common;
  std::vector<std::string> targets;
  std::vector<int> ks;
  std::optional<int> replications;
  bool no_plots = false;
};

int cmd_run(RunArgs& a) {
  potx::PipelineConfig cfg = base_config(a.common);
  if (!a.common.out.empty()) cfg.output_dir = a.common.out;
  if (!a.targets.empty()) cfg.targets = target_list(a.targets, cfg);
  if (!a.ks.empty()) cfg.k_list = a.ks;
  if (a.replications) cfg.estimate.replications = *a.replications;
  if (a.no_plots) cfg.emit_plot_data = false;
  if (cfg.data_paths.empty() && !cfg.synth) {
    throw UsageError("no input data: pass --data <files>, --synth or a config with data/synth");
  }

  const potx::PipelineReport report = potx::run_pipeline(cfg);
  for (const auto& t : report.targets) {
    std::cout << potx::to_string(t.id) << ": ";
    if (t.ok) {
      std::cout << "p*=" << fmt(*t.selected_level) << " point=" << fmt(t.estimate->point)
                << " ci=[" << fmt(t.estimate->ci_lo) << ", " << fmt(t.estimate->ci_hi) << "]\n";
    } else {
      std::cout << "failed at " << t.failed_stage << ": " << t.error << '\n';
    }
    for (const auto& w : t.warnings) std::cerr << "warning: " << potx::to_string(t.id) << ": " << w << '\n';
  }
  std::cout << "output: " << cfg.output_dir << '\n';
  return report.all_ok() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rare compound precipitation event frequencies from peaks-over-threshold models"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate synthetic run files");
  add_common(*s, synth.common, false);
  s->add_option("--runs", synth.runs, "Number of runs");
  s->add_option("--years", synth.years, "Years per run");
  s->add_option("--amplitude", synth.amplitude, "Seasonal amplitude in [0, 1)");
  s->add_option("--tail-scale", synth.tail_scale, "Latent tail scale");
  s->add_option("--loading", synth.loading, "Spatial loading applied to every location");

  ReduceArgs reduce;
  auto* r = app.add_subcommand("reduce", "Reduce runs to univariate target series");
  add_common(*r, reduce.common, true);
  r->add_option("--target", reduce.targets, "Targets (default: all configured)");

  FitArgs fit;
  auto* f = app.add_subcommand("fit", "Fit a seasonal POT model at level p");
  add_common(*f, fit.common, true);
  f->add_option("--target", fit.target, "Target id");
  f->add_option("--p", fit.p, "Quantile level")->check(CLI::Range(0.0, 1.0));
  f->add_option("--n-basis", fit.n_basis, "Number of spline knots");

  SelectArgs select;
  auto* sel = app.add_subcommand("select", "Score the level grid and pick p*");
  add_common(*sel, select.common, true);
  sel->add_option("--target", select.target, "Target id");
  sel->add_option("--K", select.ks, "Order statistics compared (repeatable)");
  sel->add_option("--alpha", select.alpha, "Ville level");
  sel->add_option("--grid", select.grid, "Level grid")->delimiter(',');
  sel->add_option("--max-level", select.max_level, "Largest selectable level");
  sel->add_option("--repeat", select.repeat, "Games per level for score spread")->check(CLI::PositiveNumber);

  EstimateArgs estimate;
  auto* e = app.add_subcommand("estimate", "Monte Carlo frequency estimate from a model file");
  add_common(*e, estimate.common, true);
  e->add_option("--model", estimate.model_path, "Model JSON")->required()->check(CLI::ExistingFile);
  e->add_option("--target", estimate.target, "Target id (default: the model's)");
  e->add_option("--observed", estimate.observed, "Observed event count");
  e->add_option("--p", estimate.p, "Level the model must have been fitted at");
  e->add_option("--confidence", estimate.confidence, "Interval confidence");
  e->add_option("--threshold", estimate.threshold, "Event threshold override");
  e->add_option("--replications", estimate.replications, "Monte Carlo replications");

  ReportArgs report;
  auto* rep = app.add_subcommand("report", "Write plot data for a fit at level p");
  add_common(*rep, report.common, true);
  rep->add_option("--target", report.targets, "Targets (default: all configured)");
  rep->add_option("--p", report.p, "Quantile level")->check(CLI::Range(0.0, 1.0));

  RunArgs run;
  auto* ru = app.add_subcommand("run", "Full pipeline");
  add_common(*ru, run.common, true);
  ru->add_option("--target", run.targets, "Targets (default: all configured)");
  ru->add_option("--K", run.ks, "K values to report scores for");
  ru->add_option("--replications", run.replications, "Monte Carlo replications");
  ru->add_flag("--no-plots", run.no_plots, "Skip plot data");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    return app.exit(err);
  }

  try {
    if (*s) return cmd_synth(synth);
    if (*r) return cmd_reduce(reduce);
    if (*f) return cmd_fit(fit);
    if (*sel) return cmd_select(select);
    if (*e) return cmd_estimate(estimate);
    if (*rep) return cmd_report(report);
    if (*ru) return cmd_run(run);
  } catch (const UsageError& err) {
    std::cerr << "usage error: " << err.what() << '\n';
    return 64;
  } catch (const potx::Error& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  }
  return 0;
}
