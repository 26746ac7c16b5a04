#pragma once

#include <string>
#include <vector>

#include "stratcheck/conditions.hpp"
#include "stratcheck/family.hpp"
#include "stratcheck/kuo.hpp"
#include "stratcheck/report.hpp"

namespace stratcheck::regularity {

/// Strata of the deformation space: X = complement of F^{-1}(0), Y = zero set
/// off the axis, Z = the axis {0} x J. empty_Y is detected heuristically:
/// no Y point found on any shell for any target t0.
struct StratificationSpec {
  int nvars = 0;
  int ncomps = 0;
  bool empty_Y = false;
  std::string note;
};

struct PipelineConfig {
  horn::HornSpec spec{};  // degree must equal the family's jet order
  ScanConfig scan{};
  std::vector<double> t0_list{0.0, 0.5, 1.0};
  Thresholds thresholds{};
};

struct PipelineReport {
  KuoReport kuo;
  StratificationSpec strata;
  std::vector<SequenceSpec> sequences;       // one per t0
  std::vector<ConditionReport> a, m, c, cd;  // one per t0, same order
  Verdict a_verdict = Verdict::inconclusive;
  Verdict m_verdict = Verdict::inconclusive;
  Verdict c_verdict = Verdict::inconclusive;
  Verdict cd_verdict = Verdict::inconclusive;
  bool implication_applicable = false;  // (a) and (m) and (c_d) all hold
  bool implication_ok = true;           // then (c) must hold as well
  bool kuo_c_applicable = false;        // Kuo verdict holds
  bool kuo_c_ok = true;                 // then (c) must hold as well
  Verdict overall = Verdict::inconclusive;
  std::string note;
};

namespace detail {

inline Verdict aggregate(const std::vector<ConditionReport>& reports) {
  bool all_hold = !reports.empty();
  for (const auto& r : reports) {
    if (r.verdict == Verdict::fails) return Verdict::fails;
    if (r.verdict != Verdict::holds) all_hold = false;
  }
  return all_hold ? Verdict::holds : Verdict::inconclusive;
}

inline ConditionReport vacuous_report(const std::string& condition, double t0, const std::string& note) {
  ConditionReport rep;
  rep.condition = condition;
  rep.t0 = t0;
  rep.verdict = Verdict::holds;
  rep.vacuous = true;
  rep.note = note;
  return rep;
}

}  // namespace detail

/// Kuo scan, stratum detection, then the (a)/(m)/(c_d) tests and the
/// independent (c) test for every target (0, t0). Records the empirical
/// implication flags: (a and m and c_d) => c, and Kuo => c.
inline PipelineReport full_pipeline(const DeformationFamily& fam, const PipelineConfig& config) {
  PipelineReport rep;
  const Thresholds& thr = config.thresholds;

  try {
    ScanConfig kuo_scan = config.scan;
    kuo_scan.seed = derive_seed(config.scan.seed, 0x4bULL);
    rep.kuo = kuo_check(fam.f(), fam.r(), config.spec, kuo_scan, thr);
  } catch (const EmptyHornError& e) {
    rep.kuo.condition = "kuo";
    rep.kuo.r = fam.r();
    rep.kuo.spec = config.spec;
    rep.kuo.verdict = Verdict::inconclusive;
    rep.kuo.note = e.what();
  }

  rep.strata.nvars = fam.nvars();
  rep.strata.ncomps = fam.ncomps();
  for (std::size_t i = 0; i < config.t0_list.size(); ++i)
    rep.sequences.push_back(sample_y_sequence(fam, config.t0_list[i], config.scan.schedule,
                                              derive_seed(config.scan.seed, 0x100ULL + i), thr.feas_rel));
  rep.strata.empty_Y = true;
  for (const auto& seq : rep.sequences)
    if (!seq.empty()) rep.strata.empty_Y = false;

  if (rep.strata.empty_Y) {
    rep.strata.note =
        "no Y point found on any shell for any t0 (heuristic): two-stratum case, conditions pass trivially";
    for (const auto& seq : rep.sequences) {
      const std::string note = "empty_Y: two-stratum stratification, trivial pass";
      rep.a.push_back(detail::vacuous_report("a", seq.t0, note));
      rep.m.push_back(detail::vacuous_report("m", seq.t0, note));
      rep.c.push_back(detail::vacuous_report("c", seq.t0, note));
      rep.cd.push_back(detail::vacuous_report("c_d", seq.t0, note));
    }
  } else {
    for (const auto& seq : rep.sequences) {
      rep.a.push_back(a_regularity_test(fam, seq, thr));
      rep.m.push_back(condition_m_check(fam, seq, thr));
      rep.c.push_back(c_regularity_test(fam, seq, thr));
      rep.cd.push_back(cd_condition_test(fam, seq, thr));
    }
  }

  rep.a_verdict = detail::aggregate(rep.a);
  rep.m_verdict = detail::aggregate(rep.m);
  rep.c_verdict = detail::aggregate(rep.c);
  rep.cd_verdict = detail::aggregate(rep.cd);

  rep.implication_applicable =
      rep.a_verdict == Verdict::holds && rep.m_verdict == Verdict::holds && rep.cd_verdict == Verdict::holds;
  rep.implication_ok = !rep.implication_applicable || rep.c_verdict == Verdict::holds;
  rep.kuo_c_applicable = rep.kuo.verdict == Verdict::holds;
  rep.kuo_c_ok = !rep.kuo_c_applicable || rep.c_verdict == Verdict::holds;

  const bool any_fails = rep.kuo.verdict == Verdict::fails || rep.a_verdict == Verdict::fails ||
                         rep.m_verdict == Verdict::fails || rep.c_verdict == Verdict::fails ||
                         rep.cd_verdict == Verdict::fails;
  const bool all_hold = rep.kuo.verdict == Verdict::holds && rep.a_verdict == Verdict::holds &&
                        rep.m_verdict == Verdict::holds && rep.c_verdict == Verdict::holds &&
                        rep.cd_verdict == Verdict::holds;
  rep.overall = all_hold ? Verdict::holds : (any_fails ? Verdict::fails : Verdict::inconclusive);
  if (!rep.implication_ok) rep.note = "implication violated: (a), (m), (c_d) hold but (c) does not";
  return rep;
}

}  // namespace stratcheck::regularity
