#include "potx/betting.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "potx/error.hpp"
#include "potx/parallel.hpp"
#include "potx/rng.hpp"
#include "potx/stats.hpp"

namespace potx {
namespace {

std::vector<double> top_k(std::span<const double> sample, std::size_t k) {
  std::vector<double> work(sample.begin(), sample.end());
  std::partial_sort(work.begin(), work.begin() + static_cast<std::ptrdiff_t>(k),
                    work.end(), std::greater<>());
  work.resize(k);
  return work;
}

}  // namespace

void GameConfig::validate() const {
  if (K < 2) throw PreconditionError("game: K must be >= 2");
  if (!(alpha > 0.0 && alpha < 1.0)) throw PreconditionError("game: alpha must be in (0, 1)");
  if (!(clip > 0.0 && clip < 2.0)) throw PreconditionError("game: clip must be in (0, 2)");
  if (level_grid.empty()) throw PreconditionError("game: level grid is empty");
  for (std::size_t i = 0; i < level_grid.size(); ++i) {
    if (!(level_grid[i] > 0.0 && level_grid[i] < 1.0)) {
      throw PreconditionError("game: grid levels must lie in (0, 1)");
    }
    if (i > 0 && !(level_grid[i] > level_grid[i - 1])) {
      throw PreconditionError("game: level grid must be strictly increasing");
    }
  }
  if (!(max_level > 0.0 && max_level < 1.0)) {
    throw PreconditionError("game: max_level must be in (0, 1)");
  }
}

BettingState::BettingState(double clip) : clip_(clip) {
  if (!(clip > 0.0 && clip < 2.0)) {
    throw PreconditionError("BettingState: clip must be in (0, 2)");
  }
}

double BettingState::update(double raw_diff, double observed, double simulated) {
  const double diff = std::clamp(raw_diff, -clip_, clip_);
  const double factor = 1.0 + (bet_ - 0.5) * diff;
  if (!(factor > 0.0)) throw Error("BettingState: non-positive wealth factor");
  history_.push_back({observed, simulated, raw_diff, diff, bet_, factor});
  capital_zero_ *= 1.0 - 0.5 * diff;
  capital_one_ *= 1.0 + 0.5 * diff;
  wealth_ *= factor;
  bet_ = capital_one_ / (capital_one_ + capital_zero_);
  return diff;
}

std::optional<int> first_crossing(std::span<const double> wealth_path, double alpha) {
  const double target = 1.0 / alpha;
  for (std::size_t k = 0; k < wealth_path.size(); ++k) {
    if (wealth_path[k] >= target) return static_cast<int>(k);
  }
  return std::nullopt;
}

GameResult play_order_statistic_game(std::span<const double> observed,
                                     std::span<const double> simulated,
                                     const GameConfig& cfg) {
  const auto k = static_cast<std::size_t>(cfg.K);
  if (cfg.K < 2) throw PreconditionError("game: K must be >= 2");
  if (observed.size() < k || simulated.size() < k) {
    throw GameInfeasibleError("game: " + std::to_string(observed.size()) +
                              " observations for K = " + std::to_string(cfg.K));
  }
  const auto obs_top = top_k(observed, k);
  const auto sim_top = top_k(simulated, k);

  BettingState state(cfg.clip);
  GameResult result;
  result.wealth_path.reserve(k);
  for (std::size_t round = 0; round < k; ++round) {
    const std::size_t i = k - 1 - round;
    state.update(sim_top[i] - obs_top[i], obs_top[i], sim_top[i]);
    result.wealth_path.push_back(state.wealth());
  }
  result.terminal_wealth = state.wealth();
  result.rejection_round = first_crossing(result.wealth_path, cfg.alpha);
  result.rounds = state.history();
  return result;
}

GameResult play_game(std::span<const double> y_obs, const PotModel& model,
                     const GameConfig& cfg) {
  if (y_obs.size() < static_cast<std::size_t>(std::max(cfg.K, 0))) {
    throw GameInfeasibleError("game: " + std::to_string(y_obs.size()) +
                              " observations for K = " + std::to_string(cfg.K));
  }
  const auto simulated = sample_model(model, y_obs.size(), cfg.seed);
  return play_order_statistic_game(y_obs, simulated, cfg);
}

bool ville_rejects(const GameResult& result, double alpha) {
  return first_crossing(result.wealth_path, alpha).has_value();
}

std::optional<double> choose_level(std::span<const LevelScore> scores, double max_level) {
  const LevelScore* best = nullptr;
  for (const auto& score : scores) {
    if (!score.terminal_wealth || score.level > max_level) continue;
    if (best == nullptr || *score.terminal_wealth < *best->terminal_wealth ||
        (*score.terminal_wealth == *best->terminal_wealth && score.level > best->level)) {
      best = &score;
    }
  }
  if (best == nullptr) return std::nullopt;
  return best->level;
}

LevelSelection select_level(const UnivariateTarget& target, const GameConfig& cfg) {
  cfg.validate();
  LevelSelection selection;
  selection.scores.resize(cfg.level_grid.size());
  parallel_for(cfg.level_grid.size(), [&](std::size_t i) {
    LevelScore& score = selection.scores[i];
    score.level = cfg.level_grid[i];
    score.seed = derive_seed_for_level(cfg.seed, score.level);
    try {
      const PotFit fit = fit_pot_model(target, score.level, cfg.fit);
      score.exceedances = fit.exceedances.records.size();
      const double expected = (1.0 - score.level) * static_cast<double>(target.size());
      if (!(static_cast<double>(cfg.K) < expected)) {
        throw GameInfeasibleError("K = " + std::to_string(cfg.K) +
                                  " is not below (1 - p) n = " + std::to_string(expected));
      }
      GameConfig level_cfg = cfg;
      level_cfg.seed = score.seed;
      const GameResult game =
          play_game(exceedance_observations(target, fit.exceedances), fit.model, level_cfg);
      score.terminal_wealth = game.terminal_wealth;
      score.rejection_round = game.rejection_round;
      score.selectable = score.level <= cfg.max_level;
    } catch (const Error& e) {
      score.failure = e.what();
    }
  });

  const auto best = choose_level(selection.scores, cfg.max_level);
  if (!best) {
    std::string message = "select_level: no selectable level";
    for (const auto& score : selection.scores) {
      message += "\n  p=" + std::to_string(score.level) + ": " +
                 (score.failure.empty() ? "above max_level" : score.failure);
    }
    throw InsufficientDataError(message);
  }
  selection.best_level = *best;
  return selection;
}

std::vector<double> score_distribution(const UnivariateTarget& target,
                                       const GameConfig& cfg, double level,
                                       std::size_t repeats) {
  cfg.validate();
  const PotFit fit = fit_pot_model(target, level, cfg.fit);
  const auto observations = exceedance_observations(target, fit.exceedances);
  const std::uint64_t base = derive_seed_for_level(cfg.seed, level);
  std::vector<double> out(repeats);
  parallel_for(repeats, [&](std::size_t r) {
    GameConfig game_cfg = cfg;
    game_cfg.seed = r == 0 ? base : derive_seed(base, r);
    out[r] = play_game(observations, fit.model, game_cfg).terminal_wealth;
  });
  return out;
}

CalibrationReport null_calibration(const PotModel& model, const GameConfig& cfg,
                                   std::size_t trials) {
  if (trials < 100) throw PreconditionError("null_calibration: trials must be >= 100");
  const std::size_t n = model.day_pool.size();
  if (n < static_cast<std::size_t>(cfg.K)) {
    throw GameInfeasibleError("null_calibration: model has fewer exceedances than K");
  }
  std::vector<double> terminal(trials);
  std::vector<char> rejected(trials);
  parallel_for(trials, [&](std::size_t i) {
    const auto observed = sample_model(model, n, derive_seed(cfg.seed, 2 * i));
    const auto simulated = sample_model(model, n, derive_seed(cfg.seed, 2 * i + 1));
    const GameResult game = play_order_statistic_game(observed, simulated, cfg);
    terminal[i] = game.terminal_wealth;
    rejected[i] = game.rejection_round.has_value();
  });

  CalibrationReport report;
  report.trials = trials;
  report.rejections = static_cast<std::size_t>(std::count(rejected.begin(), rejected.end(), 1));
  report.rejection_fraction =
      static_cast<double>(report.rejections) / static_cast<double>(trials);
  report.mean_terminal_wealth = stats::mean(terminal);
  report.sd_terminal_wealth = stats::stddev(terminal);
  return report;
}

}  // namespace potx
