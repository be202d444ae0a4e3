#include "aquah/gauge.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "aquah/common.hpp"
#include "aquah/error.hpp"

namespace aquah {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool parse_bool(const std::string& s, bool& out) {
  const std::string v = text::lower(s);
  if (v == "true" || v == "1" || v == "yes") {
    out = true;
    return true;
  }
  if (v == "false" || v == "0" || v == "no") {
    out = false;
    return true;
  }
  return false;
}

double elevation_key(const GaugeCandidate& g) {
  return std::isnan(g.elevation_m) ? std::numeric_limits<double>::infinity() : g.elevation_m;
}

double fam_key(const GaugeCandidate& g) { return std::isnan(g.fam_value) ? 0.0 : g.fam_value; }

/// Keep the candidates that maximise `key`.
template <class Key>
std::vector<const GaugeCandidate*> keep_best(const std::vector<const GaugeCandidate*>& pool, Key key) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto* g : pool) best = std::max(best, key(*g));
  std::vector<const GaugeCandidate*> out;
  for (const auto* g : pool)
    if (key(*g) == best) out.push_back(g);
  return out;
}

std::string num(double v, int decimals) { return text::fixed(v, decimals); }

}  // namespace

double GaugeCandidate::record_span_days() const {
  return static_cast<double>((record_end - record_start).count()) / 86400.0;
}

std::vector<GaugeCandidate> parse_gauges(const std::string& csv, const std::string& origin) {
  std::istringstream in(csv);
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::vector<GaugeCandidate> out;
  auto fail = [&](const std::string& msg) {
    throw ParseError(origin + ": row " + std::to_string(line_no) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const auto f = text::split_csv(line);
    if (!have_header) {
      std::string joined;
      for (std::size_t i = 0; i < f.size(); ++i) joined += (i ? "," : "") + f[i];
      if (joined != kGaugeCsvHeader) fail(std::string("expected header '") + kGaugeCsvHeader + "'");
      have_header = true;
      continue;
    }
    if (f.size() != 12) fail("expected 12 fields, found " + std::to_string(f.size()));
    GaugeCandidate g;
    g.id = f[0];
    if (g.id.empty()) fail("empty gauge id");
    g.name = f[1];
    const auto row = text::to_double(f[2]), col = text::to_double(f[3]);
    if (!row || !col || *row < 0 || *col < 0 || *row != std::floor(*row) || *col != std::floor(*col))
      fail("row/col must be non-negative integers");
    g.row = static_cast<std::size_t>(*row);
    g.col = static_cast<std::size_t>(*col);
    auto optional_number = [&](const std::string& s, const char* what) {
      if (text::trim(s).empty()) return kNaN;
      const auto v = text::to_double(s);
      if (!v) fail(std::string(what) + " '" + s + "' is not a number");
      return *v;
    };
    g.elevation_m = optional_number(f[4], "elevation_m");
    const auto area = text::to_double(f[5]);
    if (!area) fail("drainage_area_km2 '" + f[5] + "' is not a number");
    g.drainage_area_km2 = *area;
    g.fam_value = optional_number(f[6], "fam_value");
    try {
      g.record_start = parse_instant(f[7]);
      g.record_end = parse_instant(f[8]);
    } catch (const ParseError& e) {
      fail(e.what());
    }
    const auto completeness = text::to_double(f[9]);
    if (!completeness) fail("completeness '" + f[9] + "' is not a number");
    g.record_completeness = *completeness;
    if (!parse_bool(f[10], g.on_or_below_reservoir)) fail("on_or_below_reservoir must be true/false");
    if (!parse_bool(f[11], g.upstream_reservoir_free)) fail("upstream_reservoir_free must be true/false");

    const std::string where = origin + ": row " + std::to_string(line_no) + ": ";
    if (g.record_completeness < 0 || g.record_completeness > 1)
      throw DataRangeError(where + "completeness " + f[9] + " outside [0,1]");
    if (g.record_start > g.record_end)
      throw DataRangeError(where + "record_start is after record_end");
    if (g.drainage_area_km2 < 0) throw DataRangeError(where + "negative drainage area");
    out.push_back(std::move(g));
  }
  if (!have_header) {
    line_no = 1;
    fail("empty inventory without header");
  }
  return out;
}

std::vector<GaugeCandidate> load_gauges(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw MissingDataError("missing gauge inventory " + path.string());
  return parse_gauges(text::read_file(path), path.string());
}

SelectionResult select_outlet(const std::vector<GaugeCandidate>& input,
                              const std::optional<std::string>& user_hint,
                              const TerrainContext& context) {
  if (input.empty()) throw EmptyInputError("no gauge candidates");

  std::vector<GaugeCandidate> candidates = input;
  for (auto& g : candidates) {
    const long r = static_cast<long>(g.row), c = static_cast<long>(g.col);
    if (std::isnan(g.elevation_m) && context.dem && context.dem->spec().in_bounds(r, c) &&
        context.dem->valid(context.dem->spec().index(g.row, g.col)))
      g.elevation_m = (*context.dem)(g.row, g.col);
    if (std::isnan(g.fam_value) && context.fam && context.fam->spec().in_bounds(r, c) &&
        context.fam->valid(context.fam->spec().index(g.row, g.col)))
      g.fam_value = (*context.fam)(g.row, g.col);
  }

  SelectionResult res;

  // Rule 0: user hint.
  const std::string hint = user_hint ? text::trim(*user_hint) : std::string();
  if (!hint.empty()) {
    const GaugeCandidate* hit = nullptr;
    const auto tokens = text::split_ws(hint);
    for (const auto& g : candidates) {
      if (g.id == hint || std::find(tokens.begin(), tokens.end(), g.id) != tokens.end()) {
        hit = &g;
        break;
      }
    }
    std::string how = "user request names gauge ";
    if (!hit) {
      const std::string h = text::lower(hint);
      std::vector<const GaugeCandidate*> named;
      for (const auto& g : candidates)
        if (!g.name.empty() && text::lower(g.name).find(h) != std::string::npos) named.push_back(&g);
      if (named.size() > 1) {
        std::string ids;
        for (const auto* g : named) ids += (ids.empty() ? "" : ", ") + g->id;
        throw AmbiguousHintError("hint '" + hint + "' matches several gauges: " + ids);
      }
      if (named.size() == 1) {
        hit = named.front();
        how = "user hint '" + hint + "' matches the name of gauge ";
      }
    }
    if (hit) {
      res.gauge_id = hit->id;
      res.decisive_rule = SelectionRule::UserHint;
      res.explanation = "Rule 0: " + how + hit->id + "; user intent overrides the ranking rules.";
      res.rule_trace.push_back({SelectionRule::UserHint, 1});
      for (auto r : {SelectionRule::ReservoirExclusion, SelectionRule::LowestElevation,
                     SelectionRule::LargestDrainage, SelectionRule::RecordQuality,
                     SelectionRule::SecondVerification})
        res.rule_trace.push_back({r, 1});
      return res;
    }
  }
  res.rule_trace.push_back({SelectionRule::UserHint, candidates.size()});

  // Rule 1: reservoir exclusion.
  std::vector<const GaugeCandidate*> pool;
  for (const auto& g : candidates)
    if (!g.on_or_below_reservoir) pool.push_back(&g);
  res.rule_trace.push_back({SelectionRule::ReservoirExclusion, pool.size()});
  if (pool.empty())
    throw NoViableGaugeError("every candidate sits on or below a reservoir");
  const bool rule1_decisive = pool.size() == 1 && candidates.size() > 1;

  std::vector<std::string> rejected;
  while (true) {
    const std::size_t eligible = pool.size();
    auto tied = keep_best(pool, [](const GaugeCandidate& g) { return -elevation_key(g); });
    res.rule_trace.push_back({SelectionRule::LowestElevation, tied.size()});
    SelectionRule decisive = SelectionRule::IdTieBreak;
    if (tied.size() == 1 && eligible > 1) decisive = SelectionRule::LowestElevation;

    const std::size_t before3 = tied.size();
    tied = keep_best(tied, [](const GaugeCandidate& g) { return g.drainage_area_km2; });
    tied = keep_best(tied, fam_key);
    res.rule_trace.push_back({SelectionRule::LargestDrainage, tied.size()});
    if (decisive == SelectionRule::IdTieBreak && tied.size() == 1 && before3 > 1)
      decisive = SelectionRule::LargestDrainage;

    const std::size_t before4 = tied.size();
    tied = keep_best(tied, [](const GaugeCandidate& g) { return g.record_completeness; });
    tied = keep_best(tied, [](const GaugeCandidate& g) { return g.record_span_days(); });
    res.rule_trace.push_back({SelectionRule::RecordQuality, tied.size()});
    if (decisive == SelectionRule::IdTieBreak && tied.size() == 1 && before4 > 1)
      decisive = SelectionRule::RecordQuality;

    const GaugeCandidate* winner =
        *std::min_element(tied.begin(), tied.end(),
                          [](const GaugeCandidate* a, const GaugeCandidate* b) { return a->id < b->id; });
    if (eligible == 1) {
      if (!rejected.empty())
        decisive = SelectionRule::SecondVerification;
      else if (rule1_decisive)
        decisive = SelectionRule::ReservoirExclusion;
    }

    // Rule 5: second verification.
    const bool ok = winner->upstream_reservoir_free;
    res.rule_trace.push_back({SelectionRule::SecondVerification, ok ? std::size_t{1} : std::size_t{0}});
    if (!ok) {
      rejected.push_back(winner->id);
      pool.erase(std::find(pool.begin(), pool.end(), winner));
      if (pool.empty())
        throw NoViableGaugeError("every eligible candidate has a reservoir upstream");
      continue;
    }

    res.gauge_id = winner->id;
    res.decisive_rule = decisive;
    switch (decisive) {
      case SelectionRule::ReservoirExclusion:
        res.explanation = "Rule 1: the only gauge not located on or below a reservoir.";
        break;
      case SelectionRule::LowestElevation:
        res.explanation = "Rule 2: lowest elevation (" + num(winner->elevation_m, 1) + " m) among " +
                          std::to_string(eligible) + " eligible gauges, the natural pour point.";
        break;
      case SelectionRule::LargestDrainage:
        res.explanation = "Rule 3: largest drainage area (" + num(winner->drainage_area_km2, 1) +
                          " km2) among gauges tied at the lowest elevation.";
        break;
      case SelectionRule::RecordQuality:
        res.explanation = "Rule 4: most complete discharge record (" +
                          num(100.0 * winner->record_completeness, 1) +
                          "%) among otherwise equivalent gauges.";
        break;
      case SelectionRule::SecondVerification:
        res.explanation = "Rule 5: the only remaining gauge with no reservoir upstream.";
        break;
      default:
        res.explanation = eligible == 1 && candidates.size() == 1
                              ? "Only candidate gauge; selected by default."
                              : "Tied on every rule; lowest gauge id chosen.";
        break;
    }
    if (!rejected.empty()) {
      std::string ids;
      for (const auto& id : rejected) ids += (ids.empty() ? "" : ", ") + id;
      res.explanation += " Rule 5 rejected " + ids + " (reservoir upstream) and re-evaluated.";
    }
    return res;
  }
}

std::string render_selection(const SelectionResult& result) {
  const std::string expl = text::trim(result.explanation);
  return "Selected gauge: " + result.gauge_id + "\nExplanation: " +
         (expl.empty() ? std::string("rule-based selection") : expl) + "\n";
}

std::pair<std::string, std::string> parse_selection(const std::string& body) {
  std::istringstream in(body);
  std::string l1, l2;
  std::getline(in, l1);
  std::getline(in, l2);
  const std::string p1 = "Selected gauge:", p2 = "Explanation:";
  if (l1.rfind(p1, 0) != 0 || l2.rfind(p2, 0) != 0)
    throw ParseError("expected 'Selected gauge:' and 'Explanation:' lines");
  const std::string id = text::trim(l1.substr(p1.size()));
  if (id.empty()) throw ParseError("empty gauge id");
  return {id, text::trim(l2.substr(p2.size()))};
}

std::size_t DischargeSeries::valid_count() const {
  return static_cast<std::size_t>(
      std::count_if(q_m3s.begin(), q_m3s.end(), [](double q) { return !std::isnan(q); }));
}

DischargeSeries load_discharge(const std::filesystem::path& dir, const std::string& gauge_id,
                               const TimeWindow& window) {
  const auto path = dir / (gauge_id + ".csv");
  if (!std::filesystem::exists(path))
    throw MissingDataError("no discharge record for gauge " + gauge_id + " (" + path.string() + ")");
  window.validate();
  DischargeSeries s;
  s.gauge_id = gauge_id;
  s.timestamps = window.timestamps();
  s.q_m3s.assign(s.timestamps.size(), kNaN);

  std::istringstream in(text::read_file(path));
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const auto f = text::split_csv(line);
    if (!header) {
      if (f.size() != 2 || f[0] != "timestamp" || f[1] != "q_m3s")
        throw ParseError(path.string() + ": row " + std::to_string(line_no) +
                         ": expected header 'timestamp,q_m3s'");
      header = true;
      continue;
    }
    if (f.size() != 2)
      throw ParseError(path.string() + ": row " + std::to_string(line_no) + ": expected 2 fields");
    Instant t;
    try {
      t = parse_instant(f[0]);
    } catch (const ParseError& e) {
      throw ParseError(path.string() + ": row " + std::to_string(line_no) + ": " + e.what());
    }
    if (t < window.start || t >= window.end) continue;
    const auto offset = (t - window.start).count();
    if (offset % window.dt != 0) continue;
    const auto q = text::to_double(f[1]);
    if (q && std::isfinite(*q) && *q >= 0)
      s.q_m3s[static_cast<std::size_t>(offset / window.dt)] = *q;
  }
  return s;
}

}  // namespace aquah
