#include "poche/study.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

namespace poche {

double score_percent(int correct, int total) {
  if (total <= 0) {
    throw Error(ErrorCode::DegenerateTest, "test has no questions");
  }
  if (correct < 0 || correct > total) {
    throw Error(ErrorCode::RangeError, "correct count outside [0, total]");
  }
  return 100.0 * correct / total;
}

PretestTimes derive_pretest_times(double pretest_total_min, double sbst_post_min, double art_post_min) {
  const double budget = pretest_total_min - kPretestOverheadMin;
  if (!(budget > 0.0)) {
    throw Error(ErrorCode::InvalidDuration, "pretest duration leaves no test time after the overhead");
  }
  if (!(sbst_post_min > 0.0) || !(art_post_min > 0.0)) {
    throw Error(ErrorCode::InvalidDuration, "posttest times must be positive");
  }
  // The larger share is at least budget / 2, so budget - larger is exact and
  // the two shares add back to the budget without rounding.
  const double total_post = sbst_post_min + art_post_min;
  PretestTimes t;
  if (sbst_post_min >= art_post_min) {
    t.sbst = budget * sbst_post_min / total_post;
    t.art = budget - t.sbst;
  } else {
    t.art = budget * art_post_min / total_post;
    t.sbst = budget - t.art;
  }
  return t;
}

double timed_score(double score, double time_min) {
  if (!(time_min > 0.0)) {
    throw Error(ErrorCode::InvalidDuration, "completion time must be positive");
  }
  return score / time_min;
}

double improvement_percent(double pre, double post) {
  if (!(pre > 0.0)) {
    throw Error(ErrorCode::DegenerateBaseline, "baseline must be positive");
  }
  return 100.0 * (post - pre) / pre;
}

std::string_view to_string(TestMethod method) { return method == TestMethod::Exact ? "exact" : "approximation"; }

namespace {

bool is_zero(double d, double scale) { return std::abs(d) <= 1e-12 * std::max(1.0, scale); }

// P(X <= k) for X ~ Binomial(n, 1/2).
double binomial_lower_tail(std::size_t n, std::size_t k) {
  if (n <= 62) {
    std::vector<std::uint64_t> row{1};
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::uint64_t> next(row.size() + 1, 0);
      for (std::size_t j = 0; j < row.size(); ++j) {
        next[j] += row[j];
        next[j + 1] += row[j];
      }
      row = std::move(next);
    }
    long double sum = 0;
    for (std::size_t j = 0; j <= k; ++j) {
      sum += static_cast<long double>(row[j]);
    }
    return static_cast<double>(std::ldexp(sum, -static_cast<int>(n)));
  }
  double sum = 0;
  for (std::size_t j = 0; j <= k; ++j) {
    sum += std::exp(std::lgamma(n + 1.0) - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0) - n * std::log(2.0));
  }
  return std::min(1.0, sum);
}

} // namespace

TestReport sign_test(std::span<const double> diffs) {
  std::size_t pos = 0;
  std::size_t neg = 0;
  for (double d : diffs) {
    if (d > 0) {
      ++pos;
    } else if (d < 0) {
      ++neg;
    }
  }
  const std::size_t n = pos + neg;
  if (n == 0) {
    throw Error(ErrorCode::AllTies, "every difference is zero");
  }
  TestReport r;
  r.n_effective = n;
  r.statistic = static_cast<double>(pos);
  r.method = TestMethod::Exact;
  const double lower = binomial_lower_tail(n, pos);
  const double upper = binomial_lower_tail(n, neg);  // P(X >= pos) by symmetry
  r.two_sided_p = std::min(1.0, 2.0 * std::min(lower, upper));
  return r;
}

TestReport wilcoxon_signed_rank(std::span<const double> pre, std::span<const double> post) {
  if (pre.size() != post.size() || pre.size() < 2) {
    throw Error(ErrorCode::ArityError, "paired samples need equal lengths of at least 2");
  }
  struct Diff {
    double magnitude;
    bool positive;
  };
  std::vector<Diff> diffs;
  for (std::size_t i = 0; i < pre.size(); ++i) {
    const double d = post[i] - pre[i];
    if (!is_zero(d, std::max(std::abs(pre[i]), std::abs(post[i])))) {
      diffs.push_back({std::abs(d), d > 0});
    }
  }
  const std::size_t n = diffs.size();
  if (n == 0) {
    throw Error(ErrorCode::AllTies, "every difference is zero");
  }
  std::sort(diffs.begin(), diffs.end(), [](const Diff& a, const Diff& b) { return a.magnitude < b.magnitude; });

  // Doubled average ranks stay integral: a tie block over ranks i+1..j has
  // doubled rank i + j + 1.
  std::vector<long> rank2(n);
  double tie_term = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && is_zero(diffs[j].magnitude - diffs[i].magnitude, diffs[j].magnitude)) {
      ++j;
    }
    for (std::size_t k = i; k < j; ++k) {
      rank2[k] = static_cast<long>(i + j + 1);
    }
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    i = j;
  }
  long w_plus2 = 0;
  long total2 = 0;
  for (std::size_t k = 0; k < n; ++k) {
    total2 += rank2[k];
    if (diffs[k].positive) {
      w_plus2 += rank2[k];
    }
  }
  const long w_min2 = std::min(w_plus2, total2 - w_plus2);

  TestReport r;
  r.n_effective = n;
  r.statistic = w_min2 / 2.0;
  if (n <= kWilcoxonExactMaxN) {
    // counts[s] = number of sign assignments whose doubled W+ equals s.
    std::vector<double> counts(static_cast<std::size_t>(total2) + 1, 0.0);
    counts[0] = 1.0;
    long reach = 0;
    for (std::size_t k = 0; k < n; ++k) {
      reach += rank2[k];
      for (long s = reach; s >= rank2[k]; --s) {
        counts[s] += counts[s - rank2[k]];
      }
    }
    double tail = 0.0;
    for (long s = 0; s <= w_min2; ++s) {
      tail += counts[s];
    }
    r.two_sided_p = std::min(1.0, 2.0 * std::ldexp(tail, -static_cast<int>(n)));
    r.method = TestMethod::Exact;
  } else {
    const double nn = static_cast<double>(n);
    const double mean = nn * (nn + 1) / 4.0;
    const double var = nn * (nn + 1) * (2 * nn + 1) / 24.0 - tie_term / 48.0;
    const double z = std::max(0.0, std::abs(r.statistic - mean) - 0.5) / std::sqrt(var);
    r.two_sided_p = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
    r.method = TestMethod::Approximation;
  }
  return r;
}

std::vector<bool> iqr_outliers(std::span<const double> values, double k) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<bool> out(values.size(), false);
  if (sorted.size() < 2) {
    return out;
  }
  auto quantile = [&](double q) {
    const double h = (sorted.size() - 1) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - lo) * (sorted[hi] - sorted[lo]);
  };
  const double q1 = quantile(0.25);
  const double q3 = quantile(0.75);
  const double iqr = q3 - q1;
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = values[i] < q1 - k * iqr || values[i] > q3 + k * iqr;
  }
  return out;
}

// --- cohort ------------------------------------------------------------------

std::string_view to_string(Measure measure) {
  switch (measure) {
    case Measure::SbstScore: return "sbst_score";
    case Measure::ArtScore: return "art_score";
    case Measure::SbstTime: return "sbst_time";
    case Measure::ArtTime: return "art_time";
    case Measure::SbstTimedScore: return "sbst_timed_score";
    case Measure::ArtTimedScore: return "art_timed_score";
  }
  return "sbst_score";
}

bool is_time_derived(Measure measure) { return measure != Measure::SbstScore && measure != Measure::ArtScore; }

Stats describe(std::span<const double> values) {
  Stats s;
  s.n = values.size();
  if (values.empty()) {
    return s;
  }
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  s.min = *lo;
  s.max = *hi;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  return s;
}

const MeasureSummary* CohortSummary::find(Measure measure) const {
  for (const auto& m : measures) {
    if (m.measure == measure) {
      return &m;
    }
  }
  return nullptr;
}

namespace {

bool has_times(const ParticipantRecord& r) { return r.sbst_pre_min && r.art_pre_min && r.sbst_post_min && r.art_post_min; }

std::optional<std::pair<double, double>> values_for(const ParticipantRecord& r, Measure m) {
  switch (m) {
    case Measure::SbstScore: return std::pair{r.sbst_pre, r.sbst_post};
    case Measure::ArtScore: return std::pair{r.art_pre, r.art_post};
    default: break;
  }
  if (r.excluded || !has_times(r)) {
    return std::nullopt;
  }
  switch (m) {
    case Measure::SbstTime: return std::pair{*r.sbst_pre_min, *r.sbst_post_min};
    case Measure::ArtTime: return std::pair{*r.art_pre_min, *r.art_post_min};
    case Measure::SbstTimedScore:
      return std::pair{timed_score(r.sbst_pre, *r.sbst_pre_min), timed_score(r.sbst_post, *r.sbst_post_min)};
    case Measure::ArtTimedScore:
      return std::pair{timed_score(r.art_pre, *r.art_pre_min), timed_score(r.art_post, *r.art_post_min)};
    default: return std::nullopt;
  }
}

// Improvement, or NaN when the baseline is not positive (a zero score).
double improvement_or_nan(double pre, double post) {
  return pre > 0.0 ? improvement_percent(pre, post) : std::numeric_limits<double>::quiet_NaN();
}

} // namespace

CohortSummary cohort_summary(std::vector<ParticipantRecord> records) {
  for (auto& r : records) {
    if ((!r.sbst_pre_min || !r.art_pre_min) && r.pretest_total_min && r.sbst_post_min && r.art_post_min) {
      const auto t = derive_pretest_times(*r.pretest_total_min, *r.sbst_post_min, *r.art_post_min);
      r.sbst_pre_min = t.sbst;
      r.art_pre_min = t.art;
    }
  }
  CohortSummary out;
  out.participants = records.size();
  out.timed_participants = static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [](const auto& r) { return !r.excluded && has_times(r); }));
  if (std::all_of(records.begin(), records.end(), [](const auto& r) { return r.excluded; })) {
    throw Error(ErrorCode::EmptyCohort, "no included participants");
  }
  for (Measure m : kAllMeasures) {
    MeasureSummary s;
    s.measure = m;
    s.negated_display = m == Measure::SbstTime || m == Measure::ArtTime;
    for (const auto& r : records) {
      if (auto v = values_for(r, m)) {
        s.participants.push_back(r.participant_id);
        s.pre.push_back(v->first);
        s.post.push_back(v->second);
      }
    }
    if (s.pre.empty()) {
      continue;
    }
    s.pre_stats = describe(s.pre);
    s.post_stats = describe(s.post);
    s.mean_improvement = improvement_or_nan(s.pre_stats.mean, s.post_stats.mean);
    s.min_improvement_by_rank = improvement_or_nan(s.pre_stats.min, s.post_stats.min);
    s.max_improvement_by_rank = improvement_or_nan(s.pre_stats.max, s.post_stats.max);
    const auto imin = static_cast<std::size_t>(std::min_element(s.pre.begin(), s.pre.end()) - s.pre.begin());
    const auto imax = static_cast<std::size_t>(std::max_element(s.pre.begin(), s.pre.end()) - s.pre.begin());
    s.min_improvement_by_participant = improvement_or_nan(s.pre[imin], s.post[imin]);
    s.max_improvement_by_participant = improvement_or_nan(s.pre[imax], s.post[imax]);
    std::vector<double> diffs(s.pre.size());
    for (std::size_t i = 0; i < diffs.size(); ++i) {
      diffs[i] = s.post[i] - s.pre[i];
    }
    try {
      s.sign = sign_test(diffs);
    } catch (const Error&) {
    }
    if (s.pre.size() >= 2) {
      try {
        s.wilcoxon = wilcoxon_signed_rank(s.pre, s.post);
      } catch (const Error&) {
      }
    }
    out.measures.push_back(std::move(s));
  }
  return out;
}

} // namespace poche
