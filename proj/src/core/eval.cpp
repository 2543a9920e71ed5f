// Copyright 2026 The beatvox Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "eval.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "error.hpp"

namespace beatvox {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

int class_rank(std::string_view label) {
  if (label == "kick") return 0;
  if (label == "snare") return 1;
  if (label == "hihat") return 2;
  return 3;
}

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

}  // namespace

std::vector<DrumEvent> parse_annotations(std::string_view text) {
  std::vector<DrumEvent> events;
  std::size_t line_no = 0;
  for (std::size_t start = 0; start <= text.size();) {
    const auto nl = text.find('\n', start);
    const std::string_view line =
        trim(text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start));
    start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto sep = line.find_first_of("\t,");
    const std::string_view time_tok = trim(line.substr(0, sep));
    const std::string_view label_tok =
        sep == std::string_view::npos ? std::string_view{} : trim(line.substr(sep + 1));
    double t = 0.0;
    auto [ptr, ec] = std::from_chars(time_tok.data(), time_tok.data() + time_tok.size(), t);
    if (time_tok.empty() || ec != std::errc() || ptr != time_tok.data() + time_tok.size() ||
        !std::isfinite(t))
      throw Error(ErrorKind::kFormat, "line " + std::to_string(line_no) + ": cannot parse time '" +
                                          std::string(time_tok) + "'");
    if (label_tok.empty())
      throw Error(ErrorKind::kFormat, "line " + std::to_string(line_no) + ": missing label");
    std::string label(label_tok);
    std::transform(label.begin(), label.end(), label.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    events.push_back({t, std::move(label), 100});
  }
  if (events.empty()) throw Error(ErrorKind::kFormat, "annotation file holds no events");
  std::stable_sort(events.begin(), events.end(),
                   [](const DrumEvent& a, const DrumEvent& b) { return a.time < b.time; });
  return events;
}

std::string format_annotations(const std::vector<DrumEvent>& events) {
  std::string out;
  char buf[64];
  for (const auto& e : events) {
    std::snprintf(buf, sizeof buf, "%.6f", e.time);
    out += buf;
    out += ',';
    out += e.label;
    out += '\n';
  }
  return out;
}

Matching match_events(const std::vector<DrumEvent>& pred, const std::vector<DrumEvent>& ref,
                      double tolerance) {
  if (!(tolerance >= 0.0)) throw Error(ErrorKind::kInvalidArgument, "tolerance must be >= 0");
  struct Candidate {
    long long dt_ns;
    std::size_t ref, pred;
  };
  const long long tol_ns = std::llround(tolerance * 1e9);
  std::vector<Candidate> cands;
  for (std::size_t r = 0; r < ref.size(); ++r) {
    // Predictions are time-sorted; start at the first one inside the window.
    auto lo = std::lower_bound(pred.begin(), pred.end(), ref[r].time - tolerance - 1e-9,
                               [](const DrumEvent& e, double t) { return e.time < t; });
    for (auto it = lo; it != pred.end(); ++it) {
      const long long dt = std::llround(std::abs(it->time - ref[r].time) * 1e9);
      if (it->time > ref[r].time && dt > tol_ns) break;
      if (dt <= tol_ns)
        cands.push_back({dt, r, static_cast<std::size_t>(it - pred.begin())});
    }
  }
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    if (a.dt_ns != b.dt_ns) return a.dt_ns < b.dt_ns;
    if (a.ref != b.ref) return a.ref < b.ref;
    return a.pred < b.pred;
  });

  Matching m;
  m.tolerance = tolerance;
  std::vector<bool> used_pred(pred.size(), false), used_ref(ref.size(), false);
  for (const auto& c : cands) {
    if (used_pred[c.pred] || used_ref[c.ref]) continue;
    used_pred[c.pred] = used_ref[c.ref] = true;
    m.pairs.emplace_back(c.pred, c.ref);
  }
  std::sort(m.pairs.begin(), m.pairs.end());
  for (std::size_t i = 0; i < pred.size(); ++i)
    if (!used_pred[i]) m.unmatched_pred.push_back(i);
  for (std::size_t i = 0; i < ref.size(); ++i)
    if (!used_ref[i]) m.unmatched_ref.push_back(i);
  return m;
}

std::vector<ClassScore> f_measures(const Matching& matching, const std::vector<DrumEvent>& pred,
                                   const std::vector<DrumEvent>& ref) {
  std::map<std::string, ClassScore> by_label;
  for (const auto& e : pred) ++by_label[e.label].predicted;
  for (const auto& e : ref) ++by_label[e.label].reference;
  for (const auto& [p, r] : matching.pairs)
    if (pred.at(p).label == ref.at(r).label) ++by_label[pred[p].label].true_positives;

  std::vector<ClassScore> out;
  for (auto& [label, s] : by_label) {
    s.label = label;
    s.precision = s.predicted ? double(s.true_positives) / double(s.predicted) : 0.0;
    s.recall = s.reference ? double(s.true_positives) / double(s.reference) : 0.0;
    const double denom = s.precision + s.recall;
    s.f_measure = denom > 0.0 ? 2.0 * s.precision * s.recall / denom : 0.0;
    out.push_back(s);
  }
  std::stable_sort(out.begin(), out.end(), [](const ClassScore& a, const ClassScore& b) {
    return class_rank(a.label) < class_rank(b.label);
  });
  return out;
}

EditOperations edit_operations(const Matching& matching, const std::vector<DrumEvent>& pred,
                               const std::vector<DrumEvent>& ref) {
  EditOperations ops;
  for (const auto& [p, r] : matching.pairs)
    if (pred.at(p).label != ref.at(r).label) ++ops.modify;
  ops.add = matching.unmatched_ref.size();
  ops.remove = matching.unmatched_pred.size();
  return ops;
}

const ClassScore* EvalReport::find(std::string_view label) const {
  for (const auto& c : classes)
    if (c.label == label) return &c;
  return nullptr;
}

EvalReport evaluate(const std::vector<DrumEvent>& pred, const std::vector<DrumEvent>& ref,
                    double tolerance) {
  const Matching m = match_events(pred, ref, tolerance);
  EvalReport r;
  r.classes = f_measures(m, pred, ref);
  r.edits = edit_operations(m, pred, ref);
  r.predicted = pred.size();
  r.reference = ref.size();
  r.matched = m.pairs.size();
  return r;
}

std::string display_name(std::string_view label) {
  if (label == "hihat") return "Hi-hat";
  std::string s(label);
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

std::string render_report(const EvalReport& report, ReportFormat format) {
  std::ostringstream out;
  if (format == ReportFormat::kCsv) {
    out << "modify,add,remove";
    for (const auto& c : report.classes) out << ',' << c.label << "_P," << c.label << "_R," << c.label << "_F";
    out << '\n';
    if (report.classes.empty()) return out.str();
    out << report.edits.modify << ',' << report.edits.add << ',' << report.edits.remove;
    for (const auto& c : report.classes)
      out << ',' << fixed3(c.precision) << ',' << fixed3(c.recall) << ',' << fixed3(c.f_measure);
    out << '\n';
    return out.str();
  }

  // Edit operations then per-class F, one row; details below.
  char buf[64];
  std::string header = "Modify  Add  Remove";
  std::snprintf(buf, sizeof buf, "%6zu %4zu %7zu", report.edits.modify, report.edits.add,
                report.edits.remove);
  std::string row = buf;
  for (const auto& c : report.classes) {
    const std::string name = display_name(c.label);
    const std::size_t width = std::max<std::size_t>(name.size(), 5);
    std::snprintf(buf, sizeof buf, "  %*s", static_cast<int>(width), name.c_str());
    header += buf;
    std::snprintf(buf, sizeof buf, "  %*s", static_cast<int>(width), fixed3(c.f_measure).c_str());
    row += buf;
  }
  out << header << '\n' << row << '\n';
  if (!report.classes.empty()) {
    out << '\n' << "class        P      R      F   (tp/pred/ref)\n";
    for (const auto& c : report.classes) {
      std::snprintf(buf, sizeof buf, "%-8s %6s %6s %6s", display_name(c.label).c_str(),
                    fixed3(c.precision).c_str(), fixed3(c.recall).c_str(),
                    fixed3(c.f_measure).c_str());
      out << buf << "   (" << c.true_positives << '/' << c.predicted << '/' << c.reference << ")\n";
    }
  }
  return out.str();
}

}  // namespace beatvox
