#pragma once

// Learning-gain analytics: scores, pretest time apportionment, timed scores,
// improvement percentages, exact Sign and Wilcoxon signed-rank tests, and the
// NASA TLX workload index.

#include "poche/error.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace poche {

// --- scores and times --------------------------------------------------------

/// 100 * correct / total. Throws `DegenerateTest` for total = 0 and
/// `RangeError` unless 0 <= correct <= total.
double score_percent(int correct, int total);

/// Minutes the pretest session spends on non-test paperwork.
inline constexpr double kPretestOverheadMin = 5.0;

struct PretestTimes {
  double sbst = 0.0;
  double art = 0.0;
};

/// Splits (total - 5 min) between the two tests in the posttest time ratio.
/// Throws `InvalidDuration` when the budget or a posttest time is not positive.
PretestTimes derive_pretest_times(double pretest_total_min, double sbst_post_min, double art_post_min);

/// score / time. Throws `InvalidDuration` for time <= 0.
double timed_score(double score, double time_min);

/// 100 (post - pre) / pre. Throws `DegenerateBaseline` for pre <= 0.
double improvement_percent(double pre, double post);

// --- nonparametric tests -----------------------------------------------------

enum class TestMethod { Exact, Approximation };

std::string_view to_string(TestMethod method);

struct TestReport {
  std::size_t n_effective = 0;
  double statistic = 0.0;
  double two_sided_p = 1.0;
  TestMethod method = TestMethod::Exact;
};

/// Exact binomial sign test on paired differences, zeros dropped.
/// `statistic` is the number of positive differences. Throws `AllTies`.
TestReport sign_test(std::span<const double> diffs);

/// Largest sample for which the Wilcoxon p-value is computed exactly.
inline constexpr std::size_t kWilcoxonExactMaxN = 25;

/// Wilcoxon matched-pairs signed-rank test on post - pre. Zero differences
/// are dropped, tied magnitudes get average ranks, `statistic` is
/// min(W+, W-). Exact null distribution for n <= 25, normal approximation
/// with tie and continuity correction above. Throws `ArityError` for unequal
/// or short inputs and `AllTies` when every difference is zero.
TestReport wilcoxon_signed_rank(std::span<const double> pre, std::span<const double> post);

/// Flags values outside [Q1 - k IQR, Q3 + k IQR] (linear-interpolated
/// quartiles). Offered to callers; cohort_summary never applies it.
std::vector<bool> iqr_outliers(std::span<const double> values, double k = 1.5);

// --- cohort ------------------------------------------------------------------

struct ParticipantRecord {
  std::string participant_id;
  double sbst_pre = 0.0;
  double sbst_post = 0.0;
  double art_pre = 0.0;
  double art_post = 0.0;
  std::optional<double> pretest_total_min;
  std::optional<double> sbst_post_min;
  std::optional<double> art_post_min;
  /// Filled by derive_pretest_times.
  std::optional<double> sbst_pre_min;
  std::optional<double> art_pre_min;
  bool excluded = false;
};

enum class Measure { SbstScore, ArtScore, SbstTime, ArtTime, SbstTimedScore, ArtTimedScore };

inline constexpr Measure kAllMeasures[] = {Measure::SbstScore, Measure::ArtScore,       Measure::SbstTime,
                                           Measure::ArtTime,   Measure::SbstTimedScore, Measure::ArtTimedScore};

std::string_view to_string(Measure measure);
/// Completion times and timed scores; excluded participants are left out of these.
bool is_time_derived(Measure measure);

struct Stats {
  std::size_t n = 0;
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
};

Stats describe(std::span<const double> values);

struct MeasureSummary {
  Measure measure = Measure::SbstScore;
  std::vector<std::string> participants;
  std::vector<double> pre;
  std::vector<double> post;
  Stats pre_stats;
  Stats post_stats;
  /// Improvement of the means.
  double mean_improvement = 0.0;
  /// Improvement pairing the pretest min (max) with the posttest min (max).
  double min_improvement_by_rank = 0.0;
  double max_improvement_by_rank = 0.0;
  /// Improvement of the participant holding the pretest min (max).
  double min_improvement_by_participant = 0.0;
  double max_improvement_by_participant = 0.0;
  /// Empty when every difference is zero or fewer than two participants remain.
  std::optional<TestReport> sign;
  std::optional<TestReport> wilcoxon;
  /// Completion time improvements are reductions and print negated.
  bool negated_display = false;
};

struct CohortSummary {
  std::vector<MeasureSummary> measures;
  std::size_t participants = 0;
  std::size_t timed_participants = 0;

  const MeasureSummary* find(Measure measure) const;
};

/// Fills missing pretest times with derive_pretest_times and summarizes
/// every measure. Participants without complete timing data are left out of
/// time-derived measures. Throws `EmptyCohort` when no participant is
/// included.
CohortSummary cohort_summary(std::vector<ParticipantRecord> records);

// --- NASA TLX ----------------------------------------------------------------

enum class TlxFactor { Mental, Physical, Temporal, Effort, Frustration, Performance };

inline constexpr TlxFactor kTlxFactors[] = {TlxFactor::Mental, TlxFactor::Physical,    TlxFactor::Temporal,
                                            TlxFactor::Effort, TlxFactor::Frustration, TlxFactor::Performance};
inline constexpr int kTlxPairs = 15;
inline constexpr double kTlxMaxAdjusted = 100.0 * 5.0 / 15.0;

std::string_view to_string(TlxFactor factor);
std::optional<TlxFactor> parse_tlx_factor(std::string_view name);

struct PairChoice {
  TlxFactor first;
  TlxFactor second;
  TlxFactor chosen;
};

struct TlxResponse {
  std::string participant_id;
  /// Indexed by TlxFactor, each in [0, 100].
  std::array<double, 6> rates{};
  std::vector<PairChoice> pairwise;
};

/// Wins per factor. Throws `PairSetError` unless every unordered pair of
/// distinct factors appears exactly once with a choice from that pair.
std::array<int, 6> tlx_weights(std::span<const PairChoice> pairwise);
/// rate * weight / 15. Throws `RangeError` for rate outside [0,100] or weight outside [0,5].
double tlx_adjusted(double rate, double weight);
/// Sum of six adjusted ratings. Throws `ArityError` for any other count.
double tlx_overall(std::span<const double> adjusted);

struct TlxScore {
  std::string participant_id;
  std::array<int, 6> weights{};
  std::array<double, 6> adjusted{};
  double overall = 0.0;
};

TlxScore tlx_score(const TlxResponse& response);

struct TlxSummary {
  std::vector<TlxScore> scores;
  /// Indexed by TlxFactor.
  std::array<Stats, 6> adjusted;
  Stats overall;
};

/// Throws `EmptyCohort` for no responses.
TlxSummary tlx_summary(const std::vector<TlxResponse>& responses);

// --- files and reports -------------------------------------------------------

/// Header `participant_id,sbst_pre,sbst_post,art_pre,art_post,pretest_total_min,
/// sbst_post_min,art_post_min,excluded`; time cells may be empty. Throws
/// `HeaderError`/`ParseError`.
std::vector<ParticipantRecord> parse_study_csv(std::string_view text);
/// `participant_id` and the six factor rates, plus 15 `pair_<a>_<b>` columns
/// naming the chosen factor. Throws `HeaderError`/`ParseError`/`PairSetError`.
std::vector<TlxResponse> parse_tlx_csv(std::string_view text);

/// Aligned text tables, values to 2 decimals and p-values to 4.
std::string format_cohort_text(const CohortSummary& summary);
nlohmann::json cohort_json(const CohortSummary& summary);
/// The performance column is labelled "[Value Negated]" because it scores
/// inversely to workload; its values print as stored.
std::string format_tlx_text(const TlxSummary& summary);
nlohmann::json tlx_json(const TlxSummary& summary);

} // namespace poche
