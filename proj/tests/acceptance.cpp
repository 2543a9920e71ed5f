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

// Acceptance run: one PASS or FAIL line per criterion, exit status 0 only if
// every criterion passes. Product behaviour is exercised through the C API
// and the HTTP service; the oracle suites call the core routines directly.

#include <beatvox/beatvox.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "eval.hpp"
#include "eval_oracle.hpp"
#include "feature_oracle.hpp"
#include "features.hpp"
#include "learn.hpp"
#include "learn_oracle.hpp"
#include "service_support.hpp"
#include "synth.hpp"
#include "test_support.hpp"

using namespace beatvox;
using namespace beatvox::testing;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Collects failed sub-checks; a criterion passes when none failed.
struct Checker {
  std::vector<std::string> failures;
  void expect(bool ok, const std::string& what) {
    if (!ok && failures.size() < 5) failures.push_back(what);
    if (!ok) ++failed;
  }
  std::size_t failed = 0;
};

struct Outcome {
  bool pass;
  std::string detail;
};

Outcome finish(const Checker& c, const std::string& summary) {
  if (c.failed == 0) return {true, summary};
  std::string d = summary + "; " + std::to_string(c.failed) + " failed check(s):";
  for (const auto& f : c.failures) d += " [" + f + "]";
  return {false, d};
}

bool close_rel(double a, double b, double rel = 1e-6, double abs_floor = 1e-9) {
  return std::abs(a - b) <= std::max(abs_floor, rel * std::max(std::abs(a), std::abs(b)));
}

// RAII wrappers for C handles.
template <typename T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  explicit Handle(T* q) : p(q) {}
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(p); }
};
using ClipH = Handle<bv_clip, bv_clip_free>;
using ModelH = Handle<bv_model, bv_model_free>;
using TransH = Handle<bv_transcription, bv_transcription_free>;
using ReportH = Handle<bv_report, bv_report_free>;

void ok(bv_status s) {
  if (s != BV_OK) throw std::runtime_error(std::string(bv_status_name(s)) + ": " + bv_last_error());
}

bv_clip* synth_clip(const SynthSpec& spec) {
  bv_clip* c = nullptr;
  ok(bv_clip_synth(synth_text(spec).c_str(), &c));
  return c;
}

bv_model* train_voice(const Voice& v, std::uint64_t seed) {
  ClipH clip(synth_clip(training_spec(v, 5, seed)));
  bv_train_options opts;
  bv_train_options_default(&opts);
  const std::string classes = training_class_spec(5);
  opts.class_spec = classes.c_str();
  bv_model* m = nullptr;
  ok(bv_model_train(clip.p, &opts, &m, nullptr, nullptr));
  return m;
}

bv_transcription* truth_of(const Performance& p) {
  std::vector<bv_event> ev;
  for (const auto& e : p.truth) ev.push_back({e.time, e.label.c_str(), e.velocity});
  bv_transcription* t = nullptr;
  ok(bv_transcription_from_events(ev.data(), ev.size(), p.spec.min_duration, &t));
  return t;
}

// Per-class F over the three drums plus the edit count.
struct Score {
  std::map<std::string, double> f;
  std::size_t edits = 0;
  double mean_f() const {
    double s = 0;
    for (const auto& d : kDrums) s += f.count(d) ? f.at(d) : 0.0;
    return s / double(kDrums.size());
  }
};

Score score(const bv_transcription* pred, const bv_transcription* ref) {
  ReportH r;
  ok(bv_evaluate(pred, ref, 0.05, &r.p));
  Score s;
  s.edits = bv_report_modify(r.p) + bv_report_add(r.p) + bv_report_remove(r.p);
  for (size_t i = 0; i < bv_report_class_count(r.p); ++i) {
    double p, rc, f;
    ok(bv_report_class_scores(r.p, i, &p, &rc, &f));
    s.f[bv_report_class_name(r.p, i)] = f;
  }
  return s;
}

// ---------------------------------------------------------------------------

Outcome onset_suite() {
  Checker c;
  std::mt19937_64 rng(5150);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_f = 1.0, worst_runtime = 0.0;
  std::size_t events_total = 0;
  for (int track = 0; track < 50; ++track) {
    SynthSpec spec;
    spec.noise_floor_rms = 0.0003;  // about -70 dBFS, at least 40 dB under every hit
    spec.noise_floor_seed = 900 + track;
    std::vector<double> truth;
    for (double t = 0.2 + 0.2 * u(rng); t < 9.7; t += 0.1 + 0.3 * u(rng)) {
      if (u(rng) < 0.5) {
        SynthSource s;
        s.kind = SourceKind::kClick;
        s.time = t;
        s.amplitude = 0.3 + 0.7 * u(rng);
        spec.sources.push_back(s);
      } else {
        auto s = noise_burst(t, 0.03 + 0.03 * u(rng), 0.3 + 0.6 * u(rng), rng());
        s.envelope.attack = 0.001;
        s.envelope.decay = 0.015;
        s.envelope.release = 0.005;
        spec.sources.push_back(s);
      }
      truth.push_back(t);
    }
    spec.min_duration = 10.0;
    ClipH clip(synth_clip(spec));
    std::vector<double> first(truth.size() * 2 + 16), second(first.size());
    size_t n1 = 0, n2 = 0;
    const auto t0 = Clock::now();
    ok(bv_detect_onsets(clip.p, nullptr, nullptr, first.data(), first.size(), &n1));
    const double runtime = seconds_since(t0) * 10.0 / bv_clip_duration(clip.p);
    ok(bv_detect_onsets(clip.p, nullptr, nullptr, second.data(), second.size(), &n2));
    worst_runtime = std::max(worst_runtime, runtime);
    c.expect(n1 == n2 && std::equal(first.begin(), first.begin() + n1, second.begin()),
             "track " + std::to_string(track) + " not deterministic");
    c.expect(runtime < 1.0, "track " + std::to_string(track) + " took " + std::to_string(runtime) + " s");

    std::vector<DrumEvent> pred, ref;
    for (size_t i = 0; i < std::min(n1, first.size()); ++i) pred.push_back({first[i], "onset", 100});
    for (double t : truth) ref.push_back({t, "onset", 100});
    const auto report = beatvox::evaluate(pred, ref, 0.020);
    const double f = report.classes.empty() ? 0.0 : report.classes.front().f_measure;
    worst_f = std::min(worst_f, f);
    events_total += truth.size();
    c.expect(f == 1.0, "track " + std::to_string(track) + " F=" + std::to_string(f));
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "50 tracks, %zu onsets, min F %.4f at 20 ms, worst %.3f s per 10 s", events_total,
                worst_f, worst_runtime);
  return finish(c, buf);
}

Outcome feature_suite() {
  Checker c;
  const MelFilterbank fb(44100, 513, 40);
  const auto bins = bin_frequencies(1024, 44100);
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  auto track = [&](double a, double b, const char* what) {
    const double d = std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
    if (std::abs(a - b) > 1e-12) worst = std::max(worst, d);
    c.expect(close_rel(a, b), what);
  };
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> p(513), m(513);
    const double scale = std::pow(10.0, 6.0 * u(rng) - 3.0);
    for (auto& v : p) v = u(rng) < 0.1 ? 0.0 : scale * u(rng);
    for (std::size_t b = 0; b < m.size(); ++b) m[b] = std::sqrt(p[b]);
    const auto got = mfcc(p, fb, 13);
    const auto want = oracle::mfcc(p, 44100, 1024, 40, 13);
    for (std::size_t k = 0; k < 13; ++k) track(got[k], want[k], "mfcc");
    const auto d = spectral_descriptors(m, bins, 0.95);
    const auto o = oracle::descriptors(m, bins, 0.95);
    track(d.centroid_hz, o.centroid_hz, "centroid");
    track(d.spread_hz, o.spread_hz, "spread");
    c.expect(close_rel(d.slope, o.slope, 1e-6, 1e-15), "slope");
    track(d.decrease, o.decrease, "decrease");
    c.expect(d.rolloff_hz == o.rolloff_hz, "rolloff");
  }

  // Delta spectrum: a single unit bin at 1000 Hz.
  const std::vector<double> freqs = {0, 500, 1000, 1500, 2000};
  auto d = spectral_descriptors(std::vector<double>{0, 0, 1, 0, 0}, freqs);
  c.expect(d.centroid_hz == 1000.0 && d.spread_hz == 0.0 && d.rolloff_hz == 1000.0, "delta spectrum");
  d = spectral_descriptors(std::vector<double>{0, 1, 0, 1, 0}, freqs);
  c.expect(d.centroid_hz == 1000.0 && d.spread_hz == 500.0, "two equal bins");
  // Flat spectrum: slope and decrease vanish, rolloff within one bin of 0.95 Nyquist.
  d = spectral_descriptors(std::vector<double>(513, 0.3), bins);
  c.expect(std::abs(d.slope) <= 1e-15, "flat slope");
  c.expect(d.decrease == 0.0, "flat decrease");
  c.expect(std::abs(d.rolloff_hz - 0.95 * 22050.0) <= bins[1], "flat rolloff");
  // Constant log-energy and all-zero spectra.
  const auto z = mfcc(std::vector<double>(513, 0.0), fb, 13);
  c.expect(close_rel(z[0], std::log(1e-10) * std::sqrt(40.0), 1e-12), "zero spectrum c0");
  for (std::size_t k = 1; k < 13; ++k) c.expect(std::abs(z[k]) <= 1e-9, "zero spectrum ck");

  char buf[128];
  std::snprintf(buf, sizeof buf, "100 spectra, 13 mfcc + 5 descriptors each, worst relative error %.2e; analytic cases",
                worst);
  return finish(c, buf);
}

// Gaussian blobs; every feature is informative to a random degree.
LabeledDataset blob_dataset(std::mt19937_64& rng, std::size_t per_class, std::size_t classes) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::vector<FeatureArray> centres(classes);
  for (auto& ctr : centres)
    for (auto& x : ctr) x = u(rng);
  LabeledDataset d;
  for (std::size_t k = 0; k < classes; ++k) d.class_names.push_back("c" + std::to_string(k));
  for (std::size_t i = 0; i < per_class * classes; ++i) {
    FeatureVector v;
    for (std::size_t j = 0; j < kFeatureCount; ++j) v.values[j] = centres[i % classes][j] + 1.5 * g(rng) * (1.0 + j);
    d.vectors.push_back(v);
    d.labels.push_back(i % classes);
  }
  return d;
}

std::vector<oracle::Row> rows_of(const LabeledDataset& d) {
  std::vector<oracle::Row> r;
  for (const auto& v : d.vectors) r.push_back(v.values);
  return r;
}

Outcome learn_suite() {
  Checker c;
  std::mt19937_64 rng(31337);
  std::normal_distribution<double> g(0.0, 2.0);
  std::size_t queries = 0;
  for (int set = 0; set < 10; ++set) {
    const auto d = blob_dataset(rng, 5 + set % 6, 2 + set % 3);
    const auto n = fit_normalizer(d);
    const auto stats = oracle::fit(rows_of(d));
    std::vector<oracle::Row> zs;
    for (const auto& r : rows_of(d)) zs.push_back(oracle::z(r, stats));
    for (int q = 0; q < 100; ++q, ++queries) {
      FeatureVector v;
      for (auto& x : v.values) x = g(rng);
      FeatureMask mask;
      for (std::size_t j = 0; j < kFeatureCount; ++j)
        if (rng() % 3 == 0) mask.push_back(j);
      if (mask.empty()) mask.push_back(q % kFeatureCount);
      const std::size_t k = 1 + 2 * (q % 3);
      const auto got = knn_classify(d, n, mask, k, v);
      c.expect(got.label == oracle::classify(zs, d.labels, d.class_names.size(), mask, k, oracle::z(v.values, stats)),
               "knn query " + std::to_string(queries));
    }
  }

  // Planted dataset: only feature 7 separates the classes.
  std::uniform_real_distribution<double> u(0.0, 1.0);
  LabeledDataset planted;
  planted.class_names = {"A", "B"};
  for (int i = 0; i < 20; ++i) {
    FeatureVector v;
    for (auto& x : v.values) x = u(rng);
    v.values[7] = (i % 2 ? 10.0 : 0.0) + u(rng);
    planted.vectors.push_back(v);
    planted.labels.push_back(i % 2);
  }
  const auto p = sfs_select(planted, 1);
  c.expect(p.selected == FeatureMask{7}, "planted index");
  c.expect(p.accuracy_trace == std::vector<double>{1.0}, "planted trace");

  std::size_t datasets = 0;
  for (int trial = 0; trial < 30; ++trial, ++datasets) {
    const auto d = blob_dataset(rng, 5 + trial % 4, 2 + trial % 2);
    const auto r = sfs_select(d, trial % 2 ? 3 : 1);
    for (std::size_t i = 1; i < r.accuracy_trace.size(); ++i)
      c.expect(r.accuracy_trace[i] > r.accuracy_trace[i - 1], "trace not increasing on dataset " + std::to_string(trial));
  }
  return finish(c, std::to_string(queries) + " kNN queries vs oracle; planted -> [" +
                       (p.selected.empty() ? std::string("-") : std::to_string(p.selected[0])) + "]; " +
                       std::to_string(datasets) + " SFS traces");
}

Outcome end_to_end() {
  Checker c;
  const auto t0 = Clock::now();
  ModelH model(train_voice(user_a(), 1));
  const auto perf = performance(user_a(), 32, 2024);
  ClipH clip(synth_clip(perf.spec));
  TransH pred;
  ok(bv_transcribe(model.p, clip.p, &pred.p));
  TransH ref(truth_of(perf));
  const auto s = score(pred.p, ref.p);
  const double runtime = seconds_since(t0);
  for (const auto& d : kDrums) c.expect(s.f.count(d) && s.f.at(d) >= 0.95, d + " F below 0.95");
  c.expect(s.edits <= 2, "edits " + std::to_string(s.edits));
  c.expect(runtime < 5.0, "runtime " + std::to_string(runtime));
  char buf[160];
  std::snprintf(buf, sizeof buf, "F kick %.3f snare %.3f hihat %.3f, edits %zu, %.2f s",
                s.f.count("kick") ? s.f.at("kick") : 0.0, s.f.count("snare") ? s.f.at("snare") : 0.0,
                s.f.count("hihat") ? s.f.at("hihat") : 0.0, s.edits, runtime);
  return finish(c, buf);
}

Outcome cross_user() {
  Checker c;
  ModelH a(train_voice(user_a(), 1)), b(train_voice(user_b(), 2));
  double matched = 0, swapped = 0;
  const int takes = 5;
  for (int i = 0; i < takes; ++i) {
    const auto pa = performance(user_a(), 32, 500 + i);
    const auto pb = performance(user_b(), 32, 500 + i);  // same pattern, other voice
    ClipH ca(synth_clip(pa.spec)), cb(synth_clip(pb.spec));
    TransH ra(truth_of(pa)), rb(truth_of(pb));
    TransH aa, bb, ab, ba;
    ok(bv_transcribe(a.p, ca.p, &aa.p));
    ok(bv_transcribe(b.p, cb.p, &bb.p));
    ok(bv_transcribe(a.p, cb.p, &ab.p));
    ok(bv_transcribe(b.p, ca.p, &ba.p));
    matched += (score(aa.p, ra.p).mean_f() + score(bb.p, rb.p).mean_f()) / 2;
    swapped += (score(ab.p, rb.p).mean_f() + score(ba.p, ra.p).mean_f()) / 2;
  }
  matched /= takes;
  swapped /= takes;
  c.expect(matched - swapped >= 0.3, "gap below 0.3");
  char buf[128];
  std::snprintf(buf, sizeof buf, "matched mean F %.3f, swapped %.3f, gap %.3f over %d takes", matched, swapped,
                matched - swapped, takes);
  return finish(c, buf);
}

Outcome eval_suite() {
  Checker c;
  using Ev = std::vector<DrumEvent>;
  auto ev = [](std::initializer_list<std::pair<double, const char*>> items) {
    Ev out;
    for (const auto& [t, l] : items) out.push_back({t, l, 100});
    return out;
  };
  auto edits_are = [](const EvalReport& r, std::size_t m, std::size_t a, std::size_t d) {
    return r.edits.modify == m && r.edits.add == a && r.edits.remove == d;
  };
  auto f_of = [](const EvalReport& r, const char* l) {
    const auto* s = r.find(l);
    return s ? s->f_measure : -1.0;
  };
  int cases = 0;

  // 1. identical lists
  {
    const auto a = ev({{0.5, "kick"}, {1.0, "snare"}, {1.5, "hihat"}});
    const auto r = evaluate(a, a);
    c.expect(edits_are(r, 0, 0, 0) && f_of(r, "kick") == 1 && f_of(r, "snare") == 1 && f_of(r, "hihat") == 1,
             "case 1");
    ++cases;
  }
  // 2. tolerance boundary: 50 ms matches, 51 ms does not
  {
    c.expect(match_events(ev({{0.550, "kick"}}), ev({{0.500, "kick"}})).pairs.size() == 1 &&
                 match_events(ev({{0.551, "kick"}}), ev({{0.500, "kick"}})).pairs.empty(),
             "case 2");
    ++cases;
  }
  // 3. equal-distance tie goes to the earlier prediction
  {
    const auto m = match_events(ev({{0.49, "kick"}, {0.51, "kick"}}), ev({{0.50, "kick"}}));
    c.expect(m.pairs.size() == 1 && m.pairs[0].first == 0, "case 3");
    ++cases;
  }
  // 4. wrong label on a matched pair: one modify, both classes F 0
  {
    const auto r = evaluate(ev({{0.5, "snare"}}), ev({{0.5, "kick"}}));
    c.expect(edits_are(r, 1, 0, 0) && f_of(r, "kick") == 0 && f_of(r, "snare") == 0, "case 4");
    ++cases;
  }
  // 5. P = 8/9 worked example
  {
    Ev ref, pred;
    for (int i = 1; i <= 10; ++i) ref.push_back({double(i), "kick", 100});
    for (int i = 1; i <= 8; ++i) pred.push_back({double(i), "kick", 100});
    pred.push_back({9.0, "snare", 100});
    pred.push_back({20.0, "kick", 100});
    const auto r = evaluate(pred, ref);
    const auto* k = r.find("kick");
    const double p = 8.0 / 9.0, rc = 0.8;
    c.expect(k && k->true_positives == 8 && close_rel(k->precision, p, 1e-12) && close_rel(k->recall, rc, 1e-12) &&
                 close_rel(k->f_measure, 2 * p * rc / (p + rc), 1e-12) && edits_are(r, 1, 1, 1),
             "case 5");
    ++cases;
  }
  // 6. empty prediction: every reference is an addition
  {
    const auto r = evaluate({}, ev({{0.5, "kick"}, {1.0, "snare"}, {1.5, "kick"}}));
    c.expect(edits_are(r, 0, 3, 0) && f_of(r, "kick") == 0 && f_of(r, "snare") == 0, "case 6");
    ++cases;
  }
  // 7. spurious predictions: removals, precision halves
  {
    const auto r = evaluate(ev({{0.5, "kick"}, {0.75, "hihat"}, {1.0, "snare"}, {1.25, "kick"}}),
                            ev({{0.5, "kick"}, {1.0, "snare"}}));
    c.expect(edits_are(r, 0, 0, 2) && r.find("kick")->precision == 0.5 && f_of(r, "snare") == 1 &&
                 f_of(r, "hihat") == 0,
             "case 7");
    ++cases;
  }
  // 8. one miss per class: P 1, R 1/2, F 2/3
  {
    const auto r = evaluate(ev({{1, "kick"}, {2, "snare"}, {3, "hihat"}}),
                            ev({{1, "kick"}, {2, "snare"}, {3, "hihat"}, {4, "kick"}, {5, "snare"}, {6, "hihat"}}));
    bool good = edits_are(r, 0, 3, 0);
    for (const auto& s : r.classes) good = good && s.precision == 1.0 && s.recall == 0.5 && close_rel(s.f_measure, 2.0 / 3.0, 1e-12);
    c.expect(good, "case 8");
    ++cases;
  }
  // 9. a shifted and relabelled pair plus a far-off prediction
  {
    const auto r = evaluate(ev({{1.03, "hihat"}, {3.0, "kick"}}), ev({{1.0, "kick"}, {2.0, "snare"}}));
    c.expect(edits_are(r, 1, 1, 1) && f_of(r, "kick") == 0 && f_of(r, "snare") == 0 && f_of(r, "hihat") == 0,
             "case 9");
    ++cases;
  }
  // 10. two predictions competing for one reference; the closer wins
  {
    const auto m = match_events(ev({{0.47, "kick"}, {0.52, "snare"}}), ev({{0.50, "snare"}}));
    const auto r = evaluate(ev({{0.47, "kick"}, {0.52, "snare"}}), ev({{0.50, "snare"}}));
    c.expect(m.pairs.size() == 1 && m.pairs[0].first == 1 && edits_are(r, 0, 0, 1) && f_of(r, "snare") == 1,
             "case 10");
    ++cases;
  }

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const char* labels[] = {"kick", "snare", "hihat"};
  int instances = 0;
  for (int trial = 0; trial < 1000; ++trial, ++instances) {
    Ev pred, ref;
    const int np = int(rng() % 30), nr = int(rng() % 30);
    for (int i = 0; i < np; ++i) pred.push_back({u(rng) * 5, labels[rng() % 3], 100});
    for (int i = 0; i < nr; ++i) ref.push_back({u(rng) * 5, labels[rng() % 3], 100});
    auto by_time = [](const DrumEvent& a, const DrumEvent& b) { return a.time < b.time; };
    std::sort(pred.begin(), pred.end(), by_time);
    std::sort(ref.begin(), ref.end(), by_time);
    const double tol = 0.01 + 0.09 * u(rng);
    const auto m = match_events(pred, ref, tol);
    const auto scores = f_measures(m, pred, ref);
    const auto ops = edit_operations(m, pred, ref);
    std::size_t tp = 0;
    for (const auto& s : scores) tp += s.true_positives;
    c.expect(ops.modify + tp == m.pairs.size(), "modify + TP != pairs");
    c.expect(ops.add + m.pairs.size() == ref.size(), "add complement");
    c.expect(ops.remove + m.pairs.size() == pred.size(), "remove complement");
  }
  return finish(c, std::to_string(cases) + " hand cases, " + std::to_string(instances) + " conservation instances");
}

Outcome midi_suite() {
  Checker c;
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const char* labels[] = {"kick", "snare", "hihat"};
  const fs::path dir = fs::temp_directory_path() / ("beatvox_acceptance_midi_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  json manifest = json::array();
  double worst_ratio = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    bv_midi_options opts;
    bv_midi_options_default(&opts);
    opts.tempo_bpm = 60.0 + 120.0 * u(rng);
    opts.ppq = 96 + int(rng() % 900);
    std::vector<bv_event> events;
    double time = u(rng) * 0.5;
    const int n = 1 + int(rng() % 40);
    for (int i = 0; i < n; ++i) {
      events.push_back({time, labels[rng() % 3], 1 + int(rng() % 127)});
      time += 0.03 + u(rng) * 0.5;
    }
    TransH t;
    ok(bv_transcription_from_events(events.data(), events.size(), time, &t.p));
    std::uint8_t* bytes = nullptr;
    size_t size = 0;
    ok(bv_transcription_to_smf(t.p, &opts, &bytes, &size));
    TransH back;
    const bv_status st = bv_transcription_from_smf(bytes, size, nullptr, &back.p);
    const fs::path file = dir / ("t" + std::to_string(trial) + ".mid");
    std::ofstream(file, std::ios::binary).write(reinterpret_cast<const char*>(bytes), std::streamsize(size));
    bv_bytes_free(bytes);
    manifest.push_back({{"path", file.string()}, {"notes", n}});
    if (st != BV_OK || bv_transcription_size(back.p) != events.size()) {
      c.expect(false, "trial " + std::to_string(trial) + " lost events");
      continue;
    }
    const double half_tick = 60.0 / (opts.tempo_bpm * opts.ppq) / 2.0;
    for (std::size_t i = 0; i < events.size(); ++i) {
      bv_event e;
      ok(bv_transcription_event(back.p, i, &e));
      worst_ratio = std::max(worst_ratio, std::abs(e.time - events[i].time) / half_tick);
      c.expect(std::abs(e.time - events[i].time) <= half_tick + 1e-9, "time beyond half a tick");
      c.expect(std::string(e.label) == events[i].label, "label changed");
    }
  }

  // Third-party import: every file must parse in mido with the expected note count.
  const fs::path list = dir / "manifest.json";
  std::ofstream(list) << manifest.dump();
  const fs::path script = dir / "check.py";
  std::ofstream(script) << "import json, sys\n"
                           "import mido\n"
                           "bad = 0\n"
                           "for item in json.load(open(sys.argv[1])):\n"
                           "    try:\n"
                           "        f = mido.MidiFile(item['path'])\n"
                           "        ons = sum(1 for tr in f.tracks for m in tr\n"
                           "                  if m.type == 'note_on' and m.velocity > 0 and m.channel == 9)\n"
                           "        if ons != item['notes']:\n"
                           "            bad += 1\n"
                           "    except Exception as e:\n"
                           "        print('mido error', item['path'], e)\n"
                           "        bad += 1\n"
                           "print('mido_bad', bad)\n";
  const std::string cmd = "python3 " + script.string() + " " + list.string() + " 2>&1";
  std::string out;
  if (FILE* p = ::popen(cmd.c_str(), "r")) {
    char buf[512];
    for (size_t k; (k = std::fread(buf, 1, sizeof buf, p)) > 0;) out.append(buf, k);
    const int status = ::pclose(p);
    c.expect(status == 0 && out.find("mido_bad 0") != std::string::npos, "mido import: " + out);
  } else {
    c.expect(false, "cannot run python3");
  }
  fs::remove_all(dir);
  char buf[160];
  std::snprintf(buf, sizeof buf, "100 round trips, worst error %.3f of half a tick; mido imported all files",
                worst_ratio);
  return finish(c, buf);
}

Outcome service_suite() {
  Checker c;
  ServiceHarness h;
  auto cli = h.client();
  const std::string id = json::parse(cli.Post("/api/sessions")->body).at("id");
  const std::string base = "/api/sessions/" + id;

  // Workflow order before training.
  const std::string probe = wav_bytes(performance(user_a(), 8, 1).spec);
  c.expect(cli.Post(base + "/transcribe", probe, "audio/wav")->status == 409, "transcribe before train");
  c.expect(cli.Get(base + "/midi")->status == 409, "midi before train");
  c.expect(cli.Post(base + "/live", "x", "application/octet-stream")->status == 409, "live before train");
  c.expect(train_session(cli, id, wav_bytes(training_spec(user_a(), 5, 1)), training_class_spec(5))->status == 200,
           "train");
  c.expect(cli.Get(base + "/midi")->status == 409, "midi before transcription");

  const double hop_s = 512.0 / 44100.0;
  std::mt19937_64 rng(8);
  std::size_t events = 0;
  for (int take = 0; take < 20; ++take) {
    const auto perf = performance(user_a(), 16, 7000 + take);
    const std::string wav = wav_bytes(perf.spec);
    auto off = cli.Post(base + "/transcribe", wav, "audio/wav");
    if (!off || off->status != 200) {
      c.expect(false, "offline take " + std::to_string(take));
      continue;
    }
    const auto offline = json::parse(off->body).at("events");
    const auto pcm = pcm_of_wav(wav);

    std::vector<json> runs;
    for (std::size_t per_chunk : {std::size_t(1024), std::size_t(4410 + 37 * take)}) {
      const std::string wire = wire_stream(pcm, per_chunk);
      json got = json::array();
      for (std::size_t pos = 0; pos < wire.size();) {
        const std::size_t n = std::min(wire.size() - pos, std::size_t(1 + rng() % 80000));
        auto r = cli.Post(base + "/live", wire.substr(pos, n), "application/octet-stream");
        if (!r || r->status != 200) {
          c.expect(false, "live post");
          break;
        }
        const auto body = json::parse(r->body);
        for (const auto& e : body.at("events")) got.push_back(e);
        pos += n;
      }
      runs.push_back(got);
    }
    c.expect(runs[0] == runs[1], "rechunking changed take " + std::to_string(take));
    const auto& live = runs[0];
    if (live.size() != offline.size()) {
      c.expect(false, "take " + std::to_string(take) + " event count " + std::to_string(live.size()) + " vs " +
                          std::to_string(offline.size()));
      continue;
    }
    for (std::size_t i = 0; i < live.size(); ++i, ++events) {
      c.expect(live[i].at("label") == offline[i].at("label"), "label");
      c.expect(std::abs(live[i].at("time").get<double>() - offline[i].at("time").get<double>()) <= hop_s, "time");
    }
  }
  return finish(c, "20 streamed takes, " + std::to_string(events) +
                       " events equal to offline, 2 chunkings each; 409 workflow order enforced");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"onset suite", onset_suite},
      {"feature oracle suite", feature_suite},
      {"kNN/SFS suite", learn_suite},
      {"end-to-end synthetic user", end_to_end},
      {"cross-user degradation", cross_user},
      {"eval-metric suite", eval_suite},
      {"MIDI round trip", midi_suite},
      {"service streaming", service_suite},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", int(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
