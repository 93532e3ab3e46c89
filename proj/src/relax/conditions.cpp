#include "edrelax/relax/conditions.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace edrelax::relax {

const char* condition_group_name(ConditionGroup g) {
  switch (g) {
    case ConditionGroup::A: return "A";
    case ConditionGroup::B: return "B";
    case ConditionGroup::C: return "C";
  }
  return "?";
}

namespace {

struct GroupRules {
  ConditionGroup group;
  bool price_strict;
  bool lmp_strict;
};

ConditionReport run_check(const GroupRules& rules, const PriceModel& prices,
                          const std::vector<StorageDevice>& storages,
                          const Eigen::MatrixXd& lmp_ref, CheckMode mode,
                          const Eigen::MatrixXd* realized_p_dc,
                          const ConditionSettings& settings) {
  if (prices.storages.size() != storages.size())
    throw std::invalid_argument("condition check: price entries do not match storages");
  const int T = static_cast<int>(lmp_ref.cols());

  ConditionReport rep;
  rep.group = rules.group;
  rep.mode = mode;
  rep.price_strict = rules.price_strict;
  rep.lmp_strict = rules.lmp_strict;
  rep.min_price_margin = std::numeric_limits<double>::infinity();
  rep.min_lmp_margin = std::numeric_limits<double>::infinity();
  rep.satisfied = true;
  rep.entries.reserve(storages.size() * static_cast<size_t>(T));

  auto holds = [&](double margin, bool strict) {
    return strict ? margin > settings.strict_eps : margin >= 0.0;
  };

  for (size_t i = 0; i < storages.size(); ++i) {
    const StorageDevice& s = storages[i];
    const StoragePrice& p = prices.storages[i];
    if (s.bus < 0 || s.bus >= lmp_ref.rows())
      throw std::invalid_argument("condition check: storage bus outside the lmp reference");
    for (int t = 0; t < T; ++t) {
      // g' is non-decreasing, so its infimum over feasible discharge is g_lin
      // (the conservative a-priori check). A-posteriori the derivative is
      // evaluated at the realized p_dc(t), which can only widen the margin.
      double g_inf = p.g_lin;
      if (mode == CheckMode::a_posteriori && realized_p_dc != nullptr)
        g_inf = p.g_prime((*realized_p_dc)(static_cast<Eigen::Index>(i), t));

      ConditionEntry e;
      e.storage = static_cast<int>(i);
      e.t = t;
      const double lmp = lmp_ref(s.bus, t);
      switch (rules.group) {
        case ConditionGroup::A:
          e.price_margin = g_inf - p.f_slope;
          e.lmp_margin = lmp - p.f_slope;
          break;
        case ConditionGroup::B:
          e.price_margin = g_inf - p.f_slope;
          e.lmp_margin = lmp - p.f_slope;
          break;
        case ConditionGroup::C:
          e.price_margin = g_inf - p.f_slope / s.eta_cycle();
          e.lmp_margin = lmp;
          break;
      }
      e.price_ok = holds(e.price_margin, rules.price_strict);
      e.lmp_ok = holds(e.lmp_margin, rules.lmp_strict);
      rep.min_price_margin = std::min(rep.min_price_margin, e.price_margin);
      rep.min_lmp_margin = std::min(rep.min_lmp_margin, e.lmp_margin);
      rep.satisfied = rep.satisfied && e.price_ok && e.lmp_ok;
      rep.entries.push_back(e);
    }
  }
  if (rep.entries.empty()) {
    // no storage: the conditions quantify over an empty set
    rep.min_price_margin = 0.0;
    rep.min_lmp_margin = 0.0;
    rep.satisfied = true;
  }
  return rep;
}

}  // namespace

ConditionReport check_conditions_a(const PriceModel& prices,
                                   const std::vector<StorageDevice>& storages,
                                   const Eigen::MatrixXd& lmp_ref, CheckMode mode,
                                   const Eigen::MatrixXd* realized_p_dc,
                                   const ConditionSettings& settings) {
  return run_check({ConditionGroup::A, /*price_strict=*/false, /*lmp_strict=*/true}, prices,
                   storages, lmp_ref, mode, realized_p_dc, settings);
}

ConditionReport check_conditions_b(const PriceModel& prices,
                                   const std::vector<StorageDevice>& storages,
                                   const Eigen::MatrixXd& lmp_ref, CheckMode mode,
                                   const Eigen::MatrixXd* realized_p_dc,
                                   const ConditionSettings& settings) {
  return run_check({ConditionGroup::B, /*price_strict=*/true, /*lmp_strict=*/false}, prices,
                   storages, lmp_ref, mode, realized_p_dc, settings);
}

ConditionReport check_conditions_c(const PriceModel& prices,
                                   const std::vector<StorageDevice>& storages,
                                   const Eigen::MatrixXd& lmp_ref, CheckMode mode,
                                   const Eigen::MatrixXd* realized_p_dc,
                                   const ConditionSettings& settings) {
  for (const StorageDevice& s : storages)
    if (!(s.eta_cycle() < 1.0))
      throw std::invalid_argument("check_conditions_c: requires eta_ch*eta_dc < 1");
  return run_check({ConditionGroup::C, /*price_strict=*/true, /*lmp_strict=*/false}, prices,
                   storages, lmp_ref, mode, realized_p_dc, settings);
}

Recommendation recommend_group(const LmpForecast& forecast, const PriceModel& prices,
                               const std::vector<StorageDevice>& storages,
                               const ConditionSettings& settings) {
  const Eigen::MatrixXd bound = lmp_lower_bound(forecast);
  Recommendation rec;
  rec.report_a = check_conditions_a(prices, storages, bound, CheckMode::a_priori, nullptr, settings);
  rec.report_b = check_conditions_b(prices, storages, bound, CheckMode::a_priori, nullptr, settings);
  rec.report_c = check_conditions_c(prices, storages, bound, CheckMode::a_priori, nullptr, settings);

  std::ostringstream why;
  if (rec.report_c.satisfied) {
    rec.group = ConditionGroup::C;
    why << "forecast LMP lower bound is non-negative everywhere (min " << rec.report_c.min_lmp_margin
        << ") and the discharging price clears f'/eta_cycle by " << rec.report_c.min_price_margin
        << "; group C needs no price/LMP comparison";
  } else if (rec.report_a.satisfied) {
    rec.group = ConditionGroup::A;
    why << "charging price sits below the forecast LMP lower bound (min margin "
        << rec.report_a.min_lmp_margin << "); group C is unavailable (min margins "
        << rec.report_c.min_price_margin << ", " << rec.report_c.min_lmp_margin << ")";
  } else if (rec.report_b.satisfied) {
    rec.group = ConditionGroup::B;
    why << "A fails only where the charging price touches the LMP bound (min margin "
        << rec.report_a.min_lmp_margin << "); B tolerates equality since g' > f' by "
        << rec.report_b.min_price_margin;
  } else {
    rec.group = std::nullopt;
    why << "no group certifies on the forecast bound (A margins " << rec.report_a.min_price_margin
        << "/" << rec.report_a.min_lmp_margin << ", B " << rec.report_b.min_price_margin << "/"
        << rec.report_b.min_lmp_margin << ", C " << rec.report_c.min_price_margin << "/"
        << rec.report_c.min_lmp_margin
        << "); exactness must be verified a-posteriori on the solved dispatch";
  }
  rec.rationale = why.str();
  return rec;
}

}  // namespace edrelax::relax
