#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "potx/potmodel.hpp"

namespace potx {

struct GameConfig {
  int K = 3;             // top order statistics compared
  double alpha = 0.05;   // Ville level
  double clip = 1.0;     // |model - observed| is clipped to this bound
  std::vector<double> level_grid{0.9,    0.99,   0.995,  0.999,
                                 0.9992, 0.9995, 0.9997, 0.9999};
  double max_level = 0.9997;  // larger levels are scored but never selected
  std::uint64_t seed = 0;
  FitOptions fit;

  void validate() const;
};

struct RoundRecord {
  double observed = 0.0;
  double simulated = 0.0;
  double raw_diff = 0.0;   // simulated - observed
  double diff = 0.0;       // clipped
  double bet = 0.5;        // bet on the model side being larger, before update
  double factor = 1.0;     // wealth multiplier of the round
};

// Capital processes of the constant bets 0 and 1 and the EWA wealth that
// bets their normalized capital. All three start at 1 with bet 1/2.
class BettingState {
 public:
  explicit BettingState(double clip = 1.0);

  // One round with raw difference (simulated - observed). Returns the
  // clipped difference.
  double update(double raw_diff, double observed = 0.0, double simulated = 0.0);

  std::size_t rounds() const noexcept { return history_.size(); }
  double capital_zero() const noexcept { return capital_zero_; }
  double capital_one() const noexcept { return capital_one_; }
  double wealth() const noexcept { return wealth_; }
  double bet() const noexcept { return bet_; }
  double clip() const noexcept { return clip_; }
  const std::vector<RoundRecord>& history() const noexcept { return history_; }

 private:
  double clip_;
  double capital_zero_ = 1.0;
  double capital_one_ = 1.0;
  double wealth_ = 1.0;
  double bet_ = 0.5;
  std::vector<RoundRecord> history_;
};

struct GameResult {
  double terminal_wealth = 1.0;
  std::vector<double> wealth_path;       // W_0 .. W_{K-1}
  std::optional<int> rejection_round;    // first k with W_k >= 1/alpha
  std::vector<RoundRecord> rounds;       // visiting order: K-th largest first
};

// First index whose wealth reaches 1/alpha.
std::optional<int> first_crossing(std::span<const double> wealth_path, double alpha);

// Plays K rounds on the K largest values of each sample, from the K-th
// largest up to the maximum. Samples need not be sorted.
GameResult play_order_statistic_game(std::span<const double> observed,
                                     std::span<const double> simulated,
                                     const GameConfig& cfg);

// Draws one model sample of the same size as y_obs (seed cfg.seed) and
// plays the game against it.
GameResult play_game(std::span<const double> y_obs, const PotModel& model,
                     const GameConfig& cfg);

bool ville_rejects(const GameResult& result, double alpha);

struct LevelScore {
  double level = 0.0;
  std::uint64_t seed = 0;
  bool selectable = false;                // feasible and <= max_level
  std::size_t exceedances = 0;
  std::optional<double> terminal_wealth;  // empty when the level failed
  std::optional<int> rejection_round;
  std::string failure;
};

struct LevelSelection {
  double best_level = 0.0;
  std::vector<LevelScore> scores;  // grid order
};

// Smallest terminal wealth among scored levels <= max_level; ties go to
// the larger level. Empty when nothing is selectable.
std::optional<double> choose_level(std::span<const LevelScore> scores, double max_level);

// Fits the model at every grid level, plays one game each (seed derived
// from cfg.seed and the level) and picks the smallest terminal wealth among
// levels <= max_level, ties going to the larger level.
LevelSelection select_level(const UnivariateTarget& target, const GameConfig& cfg);

// Terminal wealth of `repeats` games at one level with independent seeds;
// entry 0 reproduces the select_level score.
std::vector<double> score_distribution(const UnivariateTarget& target,
                                       const GameConfig& cfg, double level,
                                       std::size_t repeats);

struct CalibrationReport {
  std::size_t trials = 0;
  std::size_t rejections = 0;
  double rejection_fraction = 0.0;
  double mean_terminal_wealth = 0.0;
  double sd_terminal_wealth = 0.0;
};

// Games where both samples come from `model`, each of the model's
// exceedance count.
CalibrationReport null_calibration(const PotModel& model, const GameConfig& cfg,
                                   std::size_t trials);

}  // namespace potx
