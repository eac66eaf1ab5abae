#include "potx/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "potx/csv.hpp"
#include "potx/error.hpp"
#include "potx/rng.hpp"

namespace potx {
namespace {

using nlohmann::json;

constexpr double kAngularPlotLevel = 0.99;

std::uint64_t target_tag(TargetId id) { return static_cast<std::uint64_t>(id) + 1; }

json synth_to_json(const SynthSpec& s) {
  return json{{"n_runs", s.n_runs},
              {"years_per_run", s.years_per_run},
              {"seed", s.seed},
              {"seasonal_amplitude", s.seasonal_amplitude},
              {"tail_scale", s.tail_scale},
              {"spatial_loading", s.spatial_loading}};
}

SynthSpec synth_from_json(const json& j) {
  SynthSpec s;
  s.n_runs = j.value("n_runs", s.n_runs);
  s.years_per_run = j.value("years_per_run", s.years_per_run);
  s.seed = j.value("seed", s.seed);
  s.seasonal_amplitude = j.value("seasonal_amplitude", s.seasonal_amplitude);
  s.tail_scale = j.value("tail_scale", s.tail_scale);
  if (j.contains("spatial_loading")) {
    const auto& w = j.at("spatial_loading");
    if (w.is_number()) {
      s.spatial_loading.fill(w.get<double>());
    } else {
      const auto values = w.get<std::vector<double>>();
      if (values.size() != kLocations) {
        throw ValidationError("config: spatial_loading needs 25 entries");
      }
      std::copy(values.begin(), values.end(), s.spatial_loading.begin());
    }
  }
  return s;
}

json overrides_to_json(const TargetOverrides& o) {
  json j = json::object();
  if (o.level) j["level"] = *o.level;
  if (o.K) j["K"] = *o.K;
  if (o.max_level) j["max_level"] = *o.max_level;
  if (o.level_grid) j["level_grid"] = *o.level_grid;
  if (o.confidence) j["confidence"] = *o.confidence;
  if (o.replications) j["replications"] = *o.replications;
  if (o.event_threshold) j["event_threshold"] = *o.event_threshold;
  return j;
}

template <typename T>
void read_optional(const json& j, const char* key, std::optional<T>& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

TargetOverrides overrides_from_json(const json& j) {
  TargetOverrides o;
  read_optional(j, "level", o.level);
  read_optional(j, "K", o.K);
  read_optional(j, "max_level", o.max_level);
  read_optional(j, "level_grid", o.level_grid);
  read_optional(j, "confidence", o.confidence);
  read_optional(j, "replications", o.replications);
  read_optional(j, "event_threshold", o.event_threshold);
  return o;
}

json config_document(const PipelineConfig& c, bool with_output_dir) {
  json j;
  j["data"] = c.data_paths;
  if (c.synth) j["synth"] = synth_to_json(*c.synth);
  std::vector<std::string> targets;
  for (TargetId id : c.targets) targets.emplace_back(to_string(id));
  j["targets"] = targets;
  j["seed"] = c.seed;
  if (with_output_dir) j["output_dir"] = c.output_dir;
  j["k_list"] = c.k_list;
  j["emit_plot_data"] = c.emit_plot_data;
  j["game"] = json{{"K", c.game.K},
                   {"alpha", c.game.alpha},
                   {"clip", c.game.clip},
                   {"level_grid", c.game.level_grid},
                   {"max_level", c.game.max_level},
                   {"n_basis", c.game.fit.n_basis}};
  j["estimate"] = json{{"replications", c.estimate.replications},
                       {"total_runs", c.estimate.total_runs},
                       {"given_runs", c.estimate.given_runs},
                       {"years", c.estimate.years},
                       {"confidence", c.estimate.confidence}};
  json overrides = json::object();
  for (const auto& [id, o] : c.overrides) overrides[std::string(to_string(id))] = overrides_to_json(o);
  j["overrides"] = overrides;
  return j;
}

void write_header(std::ostream& out, std::uint64_t seed, std::uint64_t hash,
                  std::string_view columns) {
  out << csv::provenance_line(seed, hash) << '\n' << columns << '\n';
}

std::string fmt(double v) { return csv::format_double(v); }

}  // namespace

ResolvedTarget resolve_target(const PipelineConfig& config, TargetId id) {
  ResolvedTarget r;
  r.spec = TargetSpec::canonical(id);
  r.game = config.game;
  r.game.seed = game_seed(config.seed, id);
  r.estimate = config.estimate;
  r.estimate.seed = estimate_seed(config.seed, id);
  if (auto it = config.overrides.find(id); it != config.overrides.end()) {
    const TargetOverrides& o = it->second;
    if (o.event_threshold) r.spec.event_threshold = *o.event_threshold;
    if (o.K) r.game.K = *o.K;
    if (o.max_level) r.game.max_level = *o.max_level;
    if (o.level_grid) r.game.level_grid = *o.level_grid;
    if (o.confidence) r.estimate.confidence = *o.confidence;
    if (o.replications) r.estimate.replications = *o.replications;
    r.fixed_level = o.level;
  }
  r.game.fit.aux_limit = std::sqrt(2.0) * r.spec.event_threshold;
  return r;
}

namespace {

template <typename Writer>
std::filesystem::path write_file(const std::filesystem::path& dir, const std::string& name,
                                 Writer&& writer) {
  const auto path = dir / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(path.string() + ": cannot open for writing");
  writer(out);
  return path;
}

}  // namespace

void PipelineConfig::validate() const {
  if (data_paths.empty() && !synth) {
    throw ValidationError("config: either data paths or a synth spec is required");
  }
  if (synth) synth->validate();
  if (targets.empty()) throw ValidationError("config: no targets requested");
  if (k_list.empty()) throw ValidationError("config: K list is empty");
  try {
    game.validate();
    estimate.validate();
    for (int k : k_list) {
      GameConfig g = game;
      g.K = k;
      g.validate();
    }
    for (const auto& [id, o] : overrides) {
      ResolvedTarget r = resolve_target(*this, id);
      r.spec.validate();
      r.game.validate();
      r.estimate.validate();
      if (o.level && !(*o.level > 0.0 && *o.level < 1.0)) {
        throw PreconditionError("fixed level must lie in (0, 1)");
      }
    }
  } catch (const PreconditionError& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
}

std::string config_to_json(const PipelineConfig& config) {
  return config_document(config, true).dump(2);
}

PipelineConfig config_from_json(const std::string& text) {
  PipelineConfig c;
  try {
    const json j = json::parse(text);
    if (j.contains("data")) c.data_paths = j.at("data").get<std::vector<std::string>>();
    if (j.contains("synth")) c.synth = synth_from_json(j.at("synth"));
    if (j.contains("targets")) {
      c.targets.clear();
      for (const auto& t : j.at("targets")) c.targets.push_back(parse_target_id(t.get<std::string>()));
    }
    c.seed = j.value("seed", c.seed);
    c.output_dir = j.value("output_dir", c.output_dir);
    if (j.contains("k_list")) c.k_list = j.at("k_list").get<std::vector<int>>();
    c.emit_plot_data = j.value("emit_plot_data", c.emit_plot_data);
    if (j.contains("game")) {
      const json& g = j.at("game");
      c.game.K = g.value("K", c.game.K);
      c.game.alpha = g.value("alpha", c.game.alpha);
      c.game.clip = g.value("clip", c.game.clip);
      if (g.contains("level_grid")) c.game.level_grid = g.at("level_grid").get<std::vector<double>>();
      c.game.max_level = g.value("max_level", c.game.max_level);
      c.game.fit.n_basis = g.value("n_basis", c.game.fit.n_basis);
    }
    if (j.contains("estimate")) {
      const json& e = j.at("estimate");
      c.estimate.replications = e.value("replications", c.estimate.replications);
      c.estimate.total_runs = e.value("total_runs", c.estimate.total_runs);
      c.estimate.given_runs = e.value("given_runs", c.estimate.given_runs);
      c.estimate.years = e.value("years", c.estimate.years);
      c.estimate.confidence = e.value("confidence", c.estimate.confidence);
    }
    if (j.contains("overrides")) {
      for (const auto& [key, value] : j.at("overrides").items()) {
        c.overrides[parse_target_id(key)] = overrides_from_json(value);
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("config JSON: ") + e.what());
  }
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string() + ": cannot open config");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return config_from_json(buffer.str());
}

std::uint64_t config_hash(const PipelineConfig& config) {
  const std::string text = config_document(config, false).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t game_seed(std::uint64_t global, TargetId id) {
  return derive_seed(derive_seed(global, target_tag(id)), 0x6a3e);
}

std::uint64_t estimate_seed(std::uint64_t global, TargetId id) {
  return derive_seed(derive_seed(global, target_tag(id)), 0xe571);
}

bool PipelineReport::all_ok() const {
  for (const auto& t : targets) {
    if (!t.ok) return false;
  }
  return !targets.empty();
}

void write_scores_csv(std::ostream& out, TargetId id, const std::map<int, LevelSelection>& by_k,
                      std::uint64_t seed, std::uint64_t hash) {
  write_header(out, seed, hash, "target_id,K,p,terminal_wealth,rejected,rejection_round,seed");
  for (const auto& [k, selection] : by_k) {
    for (const auto& s : selection.scores) {
      out << to_string(id) << ',' << k << ',' << fmt(s.level) << ','
          << (s.terminal_wealth ? fmt(*s.terminal_wealth) : "nan") << ','
          << (s.rejection_round ? 1 : 0) << ','
          << (s.rejection_round ? *s.rejection_round : -1) << ',' << s.seed << '\n';
    }
  }
}

void write_answer_header(std::ostream& out, std::uint64_t seed, std::uint64_t hash) {
  write_header(out, seed, hash, "target_id,point,ci_lo,ci_hi,confidence_achieved,lambda,N,seed");
}

void write_answer_row(std::ostream& out, TargetId id, const FrequencyEstimate& e,
                      std::uint64_t seed) {
  out << to_string(id) << ',' << fmt(e.point) << ',' << fmt(e.ci_lo) << ',' << fmt(e.ci_hi)
      << ',' << fmt(e.achieved_coverage) << ',' << fmt(e.lambda) << ',' << e.counts.size()
      << ',' << seed << '\n';
}

void write_seasonal_csv(std::ostream& out, const PotModel& model, std::uint64_t seed,
                        std::uint64_t hash) {
  write_header(out, seed, hash, "day,f");
  for (int d = 1; d <= kDaysPerYear; ++d) out << d << ',' << fmt(model.scale(d)) << '\n';
}

void write_exceedance_csv(std::ostream& out, const PotFit& fit, std::uint64_t seed,
                          std::uint64_t hash) {
  write_header(out, seed, hash, "t,day,excess,adjusted");
  const auto& records = fit.exceedances.records;
  for (std::size_t i = 0; i < records.size(); ++i) {
    out << records[i].position + 1 << ',' << records[i].day << ',' << fmt(records[i].excess)
        << ',' << fmt(fit.adjusted.values[i]) << '\n';
  }
}

void write_qq_csv(std::ostream& out, const QQReport& qq, std::uint64_t seed, std::uint64_t hash) {
  write_header(out, seed, hash, "theoretical,empirical");
  for (const auto& [theory, observed] : qq.points) out << fmt(theory) << ',' << fmt(observed) << '\n';
}

void write_angular_csv(std::ostream& out, const AngularReport& report, std::uint64_t seed,
                       std::uint64_t hash) {
  write_header(out, seed, hash, "bin_lo,bin_hi,count");
  const double width = std::acos(0.0) / 20.0;
  for (std::size_t b = 0; b < report.histogram.size(); ++b) {
    out << fmt(width * static_cast<double>(b)) << ',' << fmt(width * static_cast<double>(b + 1))
        << ',' << report.histogram[b] << '\n';
  }
}

void write_poisson_csv(std::ostream& out, const FrequencyEstimate& estimate, std::uint64_t seed,
                       std::uint64_t hash) {
  write_header(out, seed, hash, "count,poisson_prob,empirical_freq");
  for (const auto& row : poisson_histogram(estimate)) {
    out << row.count << ',' << fmt(row.poisson_prob) << ',' << fmt(row.empirical_freq) << '\n';
  }
}

void write_series_csv(std::ostream& out, const UnivariateTarget& target, std::uint64_t seed,
                      std::uint64_t hash) {
  write_header(out, seed, hash,
               target.has_aux() ? "t,day_of_year,y,y31,y32,ybar" : "t,day_of_year,y");
  for (std::size_t i = 0; i < target.size(); ++i) {
    out << target.index[i] << ',' << target.day_of_year[i] << ',' << fmt(target.y[i]);
    if (target.has_aux()) {
      out << ',' << fmt(target.aux_pair[i][0]) << ',' << fmt(target.aux_pair[i][1]) << ','
          << fmt(target.aux_norm[i]);
    }
    out << '\n';
  }
}

PipelineReport run_pipeline(const PipelineConfig& config) {
  config.validate();
  const std::uint64_t hash = config_hash(config);
  const std::filesystem::path dir(config.output_dir);
  std::filesystem::create_directories(dir);

  Dataset data;
  if (!config.data_paths.empty()) {
    std::vector<std::filesystem::path> paths(config.data_paths.begin(), config.data_paths.end());
    data = load_dataset(paths);
  } else {
    data = generate_synthetic(*config.synth);
  }

  PipelineReport report;
  std::ostringstream scores, answers;
  write_answer_header(answers, config.seed, hash);
  bool scores_header = false;

  for (TargetId id : config.targets) {
    TargetReport tr;
    tr.id = id;
    const std::string tag(to_string(id));
    std::string stage = "configure";
    try {
      const ResolvedTarget r = resolve_target(config, id);
      tr.spec = r.spec;

      stage = "reduce";
      const UnivariateTarget target = reduce_target(data, r.spec);
      tr.observed_count = count_events(target, r.spec);

      stage = "select";
      std::vector<int> ks = config.k_list;
      if (std::find(ks.begin(), ks.end(), r.game.K) == ks.end()) ks.push_back(r.game.K);
      for (int k : ks) {
        GameConfig g = r.game;
        g.K = k;
        try {
          tr.selections[k] = select_level(target, g);
        } catch (const Error& e) {
          if (k == r.game.K && !r.fixed_level) throw;
          tr.selection_errors[k] = e.what();
        }
      }
      tr.selected_level = r.fixed_level ? *r.fixed_level : tr.selections.at(r.game.K).best_level;

      stage = "fit";
      const PotFit fit = fit_pot_model(target, *tr.selected_level, r.game.fit);
      report.files.push_back(write_file(dir, "model_" + tag + ".json", [&](std::ostream& out) {
        out << model_to_json(fit.model) << '\n';
      }));

      stage = "estimate";
      EstimateConfig ecfg = r.estimate;
      ecfg.expected_level = *tr.selected_level;
      tr.estimate = estimate_frequency(fit.model, r.spec, static_cast<long>(tr.observed_count), ecfg);
      write_answer_row(answers, id, *tr.estimate, ecfg.seed);

      tr.ok = true;
      if (config.emit_plot_data) {
        stage = "plot";
        const auto put = [&](const std::string& name, auto&& writer) {
          report.files.push_back(write_file(dir, name, writer));
        };
        put("series_" + tag + ".csv", [&](std::ostream& o) { write_series_csv(o, target, config.seed, hash); });
        put("seasonal_" + tag + ".csv", [&](std::ostream& o) { write_seasonal_csv(o, fit.model, config.seed, hash); });
        put("exceedances_" + tag + ".csv", [&](std::ostream& o) { write_exceedance_csv(o, fit, config.seed, hash); });
        if (fit.adjusted.values.size() >= 20) {
          const QQReport qq = qq_exponential(fit.adjusted);
          put("qq_" + tag + ".csv", [&](std::ostream& o) { write_qq_csv(o, qq, config.seed, hash); });
        }
        if (target.has_aux()) {
          const AngularReport angular = angular_diagnostic(target, kAngularPlotLevel);
          put("angular_" + tag + ".csv", [&](std::ostream& o) { write_angular_csv(o, angular, config.seed, hash); });
        }
        put("poisson_" + tag + ".csv", [&](std::ostream& o) { write_poisson_csv(o, *tr.estimate, config.seed, hash); });
      }
    } catch (const Error& e) {
      if (tr.ok) {
        tr.warnings.push_back(stage + ": " + e.what());
      } else {
        tr.failed_stage = stage;
        tr.error = e.what();
      }
    }
    if (!tr.selections.empty()) {
      std::ostringstream block;
      write_scores_csv(block, id, tr.selections, config.seed, hash);
      std::string text = block.str();
      if (scores_header) text = text.substr(text.find('\n', text.find('\n') + 1) + 1);
      scores << text;
      scores_header = true;
    }
    report.targets.push_back(std::move(tr));
  }

  report.files.push_back(write_file(dir, "scores.csv", [&](std::ostream& out) {
    if (!scores_header) write_scores_csv(out, TargetId::T1, {}, config.seed, hash);
    out << scores.str();
  }));
  report.files.push_back(write_file(dir, "answers.csv", [&](std::ostream& out) { out << answers.str(); }));
  report.files.push_back(write_file(dir, "config.json", [&](std::ostream& out) {
    PipelineConfig copy = config;
    copy.output_dir.clear();
    out << config_document(copy, false).dump(2) << '\n';
  }));
  return report;
}

}  // namespace potx
