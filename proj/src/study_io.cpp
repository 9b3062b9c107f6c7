#include "poche/ingest.hpp"
#include "poche/study.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>

namespace poche {
namespace {

const std::vector<std::string> kStudyHeader{"participant_id", "sbst_pre",      "sbst_post",
                                            "art_pre",        "art_post",      "pretest_total_min",
                                            "sbst_post_min",  "art_post_min",  "excluded"};

double number(const std::string& cell, std::size_t line, const char* column) {
  double v = 0.0;
  const auto* end = cell.data() + cell.size();
  const auto res = std::from_chars(cell.data(), end, v);
  if (cell.empty() || res.ec != std::errc() || res.ptr != end || !std::isfinite(v)) {
    throw Error(ErrorCode::ParseError, std::string("column ") + column + ": '" + cell + "' is not a number", line);
  }
  return v;
}

std::optional<double> optional_number(const std::string& cell, std::size_t line, const char* column) {
  if (cell.empty()) {
    return std::nullopt;
  }
  return number(cell, line, column);
}

bool flag(const std::string& cell, std::size_t line) {
  if (cell.empty() || cell == "0" || cell == "false" || cell == "no") {
    return false;
  }
  if (cell == "1" || cell == "true" || cell == "yes") {
    return true;
  }
  throw Error(ErrorCode::ParseError, "excluded must be true/false, got '" + cell + "'", line);
}

std::string fmt(double v, int decimals) {
  if (std::isnan(v)) {
    return "n/a";
  }
  // Half away from zero, as the tables are read by eye: 0.03125 -> 0.0313.
  const double scale = std::pow(10.0, decimals);
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, std::round(v * scale) / scale);
  std::string s(buf);
  if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') {
    s.erase(0, 1);
  }
  return s;
}

std::string pad_left(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

nlohmann::json stats_json(const Stats& s) { return {{"n", s.n}, {"min", s.min}, {"max", s.max}, {"mean", s.mean}}; }

nlohmann::json test_json(const std::optional<TestReport>& t) {
  if (!t) {
    return nullptr;
  }
  return {{"n_effective", t->n_effective},
          {"statistic", t->statistic},
          {"two_sided_p", t->two_sided_p},
          {"method", std::string(to_string(t->method))}};
}

} // namespace

std::vector<ParticipantRecord> parse_study_csv(std::string_view text) {
  const auto records = parse_csv(text);
  if (records.empty() || records.front().fields != kStudyHeader) {
    throw Error(ErrorCode::HeaderError, "study CSV needs the participant_id,...,excluded header", 1);
  }
  std::vector<ParticipantRecord> out;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& f = records[i].fields;
    const std::size_t line = records[i].line;
    if (f.size() != kStudyHeader.size()) {
      throw Error(ErrorCode::ParseError, "expected 9 fields, got " + std::to_string(f.size()), line);
    }
    if (f[0].empty()) {
      throw Error(ErrorCode::ParseError, "participant_id must be nonempty", line);
    }
    ParticipantRecord r;
    r.participant_id = f[0];
    r.sbst_pre = number(f[1], line, "sbst_pre");
    r.sbst_post = number(f[2], line, "sbst_post");
    r.art_pre = number(f[3], line, "art_pre");
    r.art_post = number(f[4], line, "art_post");
    for (double s : {r.sbst_pre, r.sbst_post, r.art_pre, r.art_post}) {
      if (s < 0.0 || s > 100.0) {
        throw Error(ErrorCode::ParseError, "scores must lie in [0, 100]", line);
      }
    }
    r.pretest_total_min = optional_number(f[5], line, "pretest_total_min");
    r.sbst_post_min = optional_number(f[6], line, "sbst_post_min");
    r.art_post_min = optional_number(f[7], line, "art_post_min");
    r.excluded = flag(f[8], line);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<TlxResponse> parse_tlx_csv(std::string_view text) {
  const auto records = parse_csv(text);
  if (records.empty()) {
    throw Error(ErrorCode::HeaderError, "missing TLX header");
  }
  const auto& header = records.front().fields;
  const std::vector<std::string> fixed{"participant_id", "mental", "physical", "temporal",
                                       "effort",         "frustration", "performance"};
  if (header.size() != fixed.size() + kTlxPairs || !std::equal(fixed.begin(), fixed.end(), header.begin())) {
    throw Error(ErrorCode::HeaderError, "TLX CSV needs participant_id, six rates and 15 pair_<a>_<b> columns", 1);
  }
  std::vector<std::pair<TlxFactor, TlxFactor>> pairs;
  for (std::size_t c = fixed.size(); c < header.size(); ++c) {
    const std::string& name = header[c];
    const auto sep = name.find('_', 5);
    std::optional<TlxFactor> a;
    std::optional<TlxFactor> b;
    if (name.starts_with("pair_") && sep != std::string::npos) {
      a = parse_tlx_factor(std::string_view(name).substr(5, sep - 5));
      b = parse_tlx_factor(std::string_view(name).substr(sep + 1));
    }
    if (!a || !b) {
      throw Error(ErrorCode::HeaderError, "bad pair column '" + name + "'", 1);
    }
    pairs.emplace_back(*a, *b);
  }
  std::vector<TlxResponse> out;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& f = records[i].fields;
    const std::size_t line = records[i].line;
    if (f.size() != header.size()) {
      throw Error(ErrorCode::ParseError,
                  "expected " + std::to_string(header.size()) + " fields, got " + std::to_string(f.size()), line);
    }
    TlxResponse r;
    r.participant_id = f[0];
    for (int k = 0; k < 6; ++k) {
      r.rates[k] = number(f[1 + k], line, fixed[1 + k].c_str());
    }
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const auto chosen = parse_tlx_factor(f[fixed.size() + p]);
      if (!chosen) {
        throw Error(ErrorCode::ParseError, "'" + f[fixed.size() + p] + "' is not a TLX factor", line);
      }
      if (*chosen != pairs[p].first && *chosen != pairs[p].second) {
        throw Error(ErrorCode::PairSetError,
                    "'" + f[fixed.size() + p] + "' is not one of " + header[fixed.size() + p].substr(5), line);
      }
      r.pairwise.push_back({pairs[p].first, pairs[p].second, *chosen});
    }
    try {
      (void)tlx_weights(r.pairwise);
    } catch (const Error&) {
      throw Error(ErrorCode::PairSetError, "header pair columns do not cover each factor pair once", 1);
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string format_cohort_text(const CohortSummary& summary) {
  struct Table {
    const char* title;
    Measure sbst;
    Measure art;
    const char* pre;
    const char* post;
  };
  const Table tables[] = {
      {"Scores (%)", Measure::SbstScore, Measure::ArtScore, "Pretest Score", "Posttest Score"},
      {"Completion time (min)", Measure::SbstTime, Measure::ArtTime, "Pretest", "Posttest"},
      {"Timed scores (%/min)", Measure::SbstTimedScore, Measure::ArtTimedScore, "Pretest", "Posttest"},
  };
  constexpr std::size_t label_w = 14;
  constexpr std::size_t col_w = 16;
  std::string out;
  for (const auto& t : tables) {
    const MeasureSummary* s = summary.find(t.sbst);
    const MeasureSummary* a = summary.find(t.art);
    if (s == nullptr && a == nullptr) {
      continue;
    }
    const MeasureSummary* cols[] = {s, a};
    const std::size_t n = s != nullptr ? s->pre.size() : a->pre.size();
    out += std::string(t.title) + "  (n = " + std::to_string(n) + ")\n";
    out += pad_right("", label_w);
    for (const char* test : {"SBST", "ART"}) {
      out += pad_right(std::string(test), 3 * col_w);
    }
    out += "\n";
    const bool negated = (s != nullptr && s->negated_display) || (a != nullptr && a->negated_display);
    const std::string imp = negated ? "Impr. (%) [neg]" : "Improvement (%)";
    out += pad_right("", label_w);
    for (int k = 0; k < 2; ++k) {
      out += pad_left(t.pre, col_w) + pad_left(t.post, col_w) + pad_left(imp, col_w);
    }
    out += "\n";
    auto sign = [](const MeasureSummary* m) { return m->negated_display ? -1.0 : 1.0; };
    auto row = [&](const char* label, auto pre, auto post, auto improvement) {
      out += pad_right(label, label_w);
      for (const MeasureSummary* m : cols) {
        if (m == nullptr) {
          out += pad_left("n/a", col_w) + pad_left("n/a", col_w) + pad_left("n/a", col_w);
          continue;
        }
        out += pad_left(fmt(pre(*m), 2), col_w) + pad_left(fmt(post(*m), 2), col_w) +
               pad_left(fmt(sign(m) * improvement(*m), 2), col_w);
      }
      out += "\n";
    };
    row("Min.", [](const auto& m) { return m.pre_stats.min; }, [](const auto& m) { return m.post_stats.min; },
        [](const auto& m) { return m.min_improvement_by_rank; });
    row("Max.", [](const auto& m) { return m.pre_stats.max; }, [](const auto& m) { return m.post_stats.max; },
        [](const auto& m) { return m.max_improvement_by_rank; });
    row("Mean", [](const auto& m) { return m.pre_stats.mean; }, [](const auto& m) { return m.post_stats.mean; },
        [](const auto& m) { return m.mean_improvement; });
    auto paired = [&](const char* label, auto improvement) {
      out += pad_right(label, label_w);
      for (const MeasureSummary* m : cols) {
        out += pad_left("", 2 * col_w) + pad_left(m == nullptr ? "n/a" : fmt(sign(m) * improvement(*m), 2), col_w);
      }
      out += "\n";
    };
    paired("Min. (paired)", [](const auto& m) { return m.min_improvement_by_participant; });
    paired("Max. (paired)", [](const auto& m) { return m.max_improvement_by_participant; });
    auto test_row = [&](const char* label, auto get) {
      out += pad_right(label, label_w);
      for (const MeasureSummary* m : cols) {
        const std::optional<TestReport>* r = m == nullptr ? nullptr : &get(*m);
        std::string cell = "n/a";
        if (r != nullptr && r->has_value()) {
          cell = "p = " + fmt((*r)->two_sided_p, 4) + " (n = " + std::to_string((*r)->n_effective) + ", " +
                 std::string(to_string((*r)->method)) + ")";
        }
        out += pad_left(cell, 3 * col_w);
      }
      out += "\n";
    };
    test_row("Sign test", [](const MeasureSummary& m) -> const std::optional<TestReport>& { return m.sign; });
    test_row("Wilcoxon", [](const MeasureSummary& m) -> const std::optional<TestReport>& { return m.wilcoxon; });
    out += "\n";
  }
  return out;
}

nlohmann::json cohort_json(const CohortSummary& summary) {
  nlohmann::json measures = nlohmann::json::object();
  for (const auto& m : summary.measures) {
    nlohmann::json j;
    j["participants"] = m.participants;
    j["pre"] = stats_json(m.pre_stats);
    j["post"] = stats_json(m.post_stats);
    j["improvement_percent"] = {{"mean", m.mean_improvement},
                                {"min_by_rank", m.min_improvement_by_rank},
                                {"max_by_rank", m.max_improvement_by_rank},
                                {"min_by_participant", m.min_improvement_by_participant},
                                {"max_by_participant", m.max_improvement_by_participant}};
    j["negated_display"] = m.negated_display;
    j["sign_test"] = test_json(m.sign);
    j["wilcoxon"] = test_json(m.wilcoxon);
    measures[std::string(to_string(m.measure))] = std::move(j);
  }
  return {{"participants", summary.participants},
          {"timed_participants", summary.timed_participants},
          {"measures", std::move(measures)}};
}

std::string format_tlx_text(const TlxSummary& summary) {
  const std::string headers[] = {"Mental", "Physical", "Temporal", "Effort", "Frustration",
                                 "Performance [Value Negated]"};
  std::size_t widths[6];
  std::string out = "Adjusted ratings (out of " + fmt(kTlxMaxAdjusted, 2) + ")  (n = " +
                    std::to_string(summary.scores.size()) + ")\n";
  out += pad_right("", 6);
  for (int f = 0; f < 6; ++f) {
    widths[f] = std::max<std::size_t>(headers[f].size(), 8) + 2;
    out += pad_left(headers[f], widths[f]);
  }
  out += "\n";
  auto row = [&](const char* label, double Stats::*field) {
    out += pad_right(label, 6);
    for (int f = 0; f < 6; ++f) {
      out += pad_left(fmt(summary.adjusted[f].*field, 2), widths[f]);
    }
    out += "\n";
  };
  row("Max.", &Stats::max);
  row("Min.", &Stats::min);
  row("Mean", &Stats::mean);
  out += "\nOverall workload (out of 100)\n";
  out += "Max. " + fmt(summary.overall.max, 2) + "  Min. " + fmt(summary.overall.min, 2) + "  Mean " +
         fmt(summary.overall.mean, 2) + "\n";
  for (const auto& s : summary.scores) {
    out += "  " + pad_right(s.participant_id, 12) + pad_left(fmt(s.overall, 2), 8) + "\n";
  }
  return out;
}

nlohmann::json tlx_json(const TlxSummary& summary) {
  nlohmann::json factors = nlohmann::json::object();
  for (TlxFactor f : kTlxFactors) {
    factors[std::string(to_string(f))] = stats_json(summary.adjusted[static_cast<int>(f)]);
  }
  nlohmann::json people = nlohmann::json::array();
  for (const auto& s : summary.scores) {
    nlohmann::json weights = nlohmann::json::object();
    nlohmann::json adjusted = nlohmann::json::object();
    for (TlxFactor f : kTlxFactors) {
      weights[std::string(to_string(f))] = s.weights[static_cast<int>(f)];
      adjusted[std::string(to_string(f))] = s.adjusted[static_cast<int>(f)];
    }
    people.push_back({{"participant_id", s.participant_id},
                      {"weights", std::move(weights)},
                      {"adjusted", std::move(adjusted)},
                      {"overall", s.overall}});
  }
  return {{"adjusted", std::move(factors)}, {"overall", stats_json(summary.overall)}, {"participants", people}};
}

} // namespace poche
