#pragma once

#include "edrelax/relax/lmp.hpp"
#include "edrelax/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace edrelax::relax {

enum class ConditionGroup { A, B, C };
enum class CheckMode { a_priori, a_posteriori };

const char* condition_group_name(ConditionGroup g);

struct ConditionSettings {
  /// Strict inequalities hold only when the margin exceeds this epsilon;
  /// non-strict comparisons use plain >= 0.
  double strict_eps = 1e-9;
};

/// One (storage, step) verdict. price_margin carries the group's price-side
/// comparison, lmp_margin the LMP-side one; the *_strict flags record which
/// threshold class applies.
struct ConditionEntry {
  int storage = 0;
  int t = 0;
  double price_margin = 0.0;
  double lmp_margin = 0.0;
  bool price_ok = false;
  bool lmp_ok = false;
};

struct ConditionReport {
  ConditionGroup group = ConditionGroup::A;
  CheckMode mode = CheckMode::a_priori;
  bool satisfied = false;
  double min_price_margin = 0.0;
  double min_lmp_margin = 0.0;
  bool price_strict = false;
  bool lmp_strict = false;
  std::vector<ConditionEntry> entries;
};

/// lmp_ref is buses x steps: either realized LMPs (a-posteriori) or a
/// forecast lower bound (a-priori). Each storage is checked against its own
/// bus. In a-posteriori mode the discharging price derivative is additionally
/// evaluated at the realized p_dc; a-priori uses its infimum g_lin.
///
/// Group A: g' >= f' (non-strict) and f' < LMP (strict).
ConditionReport check_conditions_a(const PriceModel& prices,
                                   const std::vector<StorageDevice>& storages,
                                   const Eigen::MatrixXd& lmp_ref, CheckMode mode,
                                   const Eigen::MatrixXd* realized_p_dc = nullptr,
                                   const ConditionSettings& settings = {});

/// Group B: g' > f' (strict) and f' <= LMP (non-strict).
ConditionReport check_conditions_b(const PriceModel& prices,
                                   const std::vector<StorageDevice>& storages,
                                   const Eigen::MatrixXd& lmp_ref, CheckMode mode,
                                   const Eigen::MatrixXd* realized_p_dc = nullptr,
                                   const ConditionSettings& settings = {});

/// Group C: g' > f'/eta_cycle (strict) and LMP >= 0 (non-strict).
ConditionReport check_conditions_c(const PriceModel& prices,
                                   const std::vector<StorageDevice>& storages,
                                   const Eigen::MatrixXd& lmp_ref, CheckMode mode,
                                   const Eigen::MatrixXd* realized_p_dc = nullptr,
                                   const ConditionSettings& settings = {});

struct Recommendation {
  std::optional<ConditionGroup> group;
  std::string rationale;
  ConditionReport report_a, report_b, report_c;
};

/// Applies the recommendation rule on the forecast lower bound: C when the
/// bound is non-negative everywhere and C-1 holds; otherwise A, falling back
/// to B when A fails only at near-equality LMP entries that B's non-strict
/// comparison tolerates; none when no group certifies.
Recommendation recommend_group(const LmpForecast& forecast, const PriceModel& prices,
                               const std::vector<StorageDevice>& storages,
                               const ConditionSettings& settings = {});

}  // namespace edrelax::relax
