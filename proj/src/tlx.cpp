#include "poche/study.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

namespace poche {

std::string_view to_string(TlxFactor factor) {
  switch (factor) {
    case TlxFactor::Mental: return "mental";
    case TlxFactor::Physical: return "physical";
    case TlxFactor::Temporal: return "temporal";
    case TlxFactor::Effort: return "effort";
    case TlxFactor::Frustration: return "frustration";
    case TlxFactor::Performance: return "performance";
  }
  return "mental";
}

std::optional<TlxFactor> parse_tlx_factor(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  for (TlxFactor f : kTlxFactors) {
    if (to_string(f) == lower) {
      return f;
    }
  }
  return std::nullopt;
}

std::array<int, 6> tlx_weights(std::span<const PairChoice> pairwise) {
  if (pairwise.size() != static_cast<std::size_t>(kTlxPairs)) {
    throw Error(ErrorCode::PairSetError, "expected 15 pairwise choices, got " + std::to_string(pairwise.size()));
  }
  std::set<std::pair<int, int>> seen;
  std::array<int, 6> weights{};
  for (const auto& c : pairwise) {
    const int a = static_cast<int>(c.first);
    const int b = static_cast<int>(c.second);
    if (a == b) {
      throw Error(ErrorCode::PairSetError, "pair compares " + std::string(to_string(c.first)) + " with itself");
    }
    if (!seen.insert({std::min(a, b), std::max(a, b)}).second) {
      throw Error(ErrorCode::PairSetError, "pair " + std::string(to_string(c.first)) + "/" +
                                               std::string(to_string(c.second)) + " appears twice");
    }
    if (c.chosen != c.first && c.chosen != c.second) {
      throw Error(ErrorCode::PairSetError, "choice " + std::string(to_string(c.chosen)) + " is not in its pair");
    }
    ++weights[static_cast<int>(c.chosen)];
  }
  return weights;
}

double tlx_adjusted(double rate, double weight) {
  if (!(rate >= 0.0 && rate <= 100.0)) {
    throw Error(ErrorCode::RangeError, "rate must lie in [0, 100]");
  }
  if (!(weight >= 0.0 && weight <= 5.0)) {
    throw Error(ErrorCode::RangeError, "weight must lie in [0, 5]");
  }
  return rate * weight / 15.0;
}

double tlx_overall(std::span<const double> adjusted) {
  if (adjusted.size() != 6) {
    throw Error(ErrorCode::ArityError, "overall workload needs six adjusted ratings");
  }
  double sum = 0.0;
  for (double a : adjusted) {
    sum += a;
  }
  return sum;
}

TlxScore tlx_score(const TlxResponse& response) {
  TlxScore s;
  s.participant_id = response.participant_id;
  s.weights = tlx_weights(response.pairwise);
  for (int f = 0; f < 6; ++f) {
    s.adjusted[f] = tlx_adjusted(response.rates[f], s.weights[f]);
  }
  // One division at the end keeps the all-max response at exactly 100.
  double weighted = 0.0;
  for (int f = 0; f < 6; ++f) {
    weighted += response.rates[f] * s.weights[f];
  }
  s.overall = weighted / kTlxPairs;
  return s;
}

TlxSummary tlx_summary(const std::vector<TlxResponse>& responses) {
  if (responses.empty()) {
    throw Error(ErrorCode::EmptyCohort, "no TLX responses");
  }
  TlxSummary out;
  for (const auto& r : responses) {
    out.scores.push_back(tlx_score(r));
  }
  for (int f = 0; f < 6; ++f) {
    std::vector<double> column;
    for (const auto& s : out.scores) {
      column.push_back(s.adjusted[f]);
    }
    out.adjusted[f] = describe(column);
  }
  std::vector<double> overall;
  for (const auto& s : out.scores) {
    overall.push_back(s.overall);
  }
  out.overall = describe(overall);
  return out;
}

} // namespace poche
