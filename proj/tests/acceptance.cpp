// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <opencv2/core.hpp>
#include <spdlog/spdlog.h>

#include "brute_force.hpp"
#include "criteria_cases.hpp"
#include "pipeline_oracle.hpp"
#include "skelanon/anonymizer.hpp"
#include "skelanon/assignment.hpp"
#include "skelanon/pipeline.hpp"
#include "support.hpp"

using namespace skelanon;
using skelanon::fixtures::det;
using Clock = std::chrono::steady_clock;

namespace
{

struct Outcome
{
  bool pass{false};
  std::string detail;
};

double seconds_since(Clock::time_point t0)
{
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// ---------------------------------------------------------------------------

Outcome assignment_oracle()
{
  std::mt19937_64 rng(1001);
  int mismatches = 0;
  const auto t0 = Clock::now();
  for (int i = 0; i < 500; ++i) {
    const CostMatrix m = fixtures::random_cost_matrix(rng, 7, 0.2);
    const Matching got = solve_assignment(m);
    const fixtures::BruteResult want = fixtures::brute_force_assignment(m);
    if (!fixtures::is_valid_matching(m, got) || got.size() != want.cardinality ||
        matching_cost(m, got) != want.cost) {
      ++mismatches;
    }
  }
  const double secs = seconds_since(t0);
  std::ostringstream d;
  d << "500 matrices, " << mismatches << " mismatches, " << secs << " s";
  return {mismatches == 0 && secs < 10.0, d.str()};
}

Outcome criteria_suite()
{
  const auto cases = fixtures::criteria_cases();
  std::vector<std::string> failed;
  for (const auto& c : cases) {
    if (evaluate_frame(fixtures::detections(c), fixtures::labeled_frame(c), c.cfg) != c.expected) {
      failed.push_back(c.name);
    }
  }
  std::ostringstream d;
  d << cases.size() << " cases, " << failed.size() << " wrong";
  for (const auto& n : failed) {
    d << " [" << n << "]";
  }
  return {failed.empty() && cases.size() >= 30, d.str()};
}

ScenarioConfig noisy_scene(std::uint64_t seed)
{
  ScenarioConfig sc;
  sc.seed = seed;
  sc.pedestrians = 12;
  sc.frames = 40;
  sc.face.jitter_px = 3.0;
  sc.pose.keypoint_noise_px = 2.0;
  sc.pose.back_facial_dropout = 0.6;
  sc.pose.miss_probability = 0.05;
  sc.bob_amplitude_px = 3.0;
  return sc;
}

Outcome sweep_monotonicity()
{
  int violations = 0;
  const auto values = default_sweep_values();
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const SyntheticScene scene = generate(noisy_scene(seed));
    const DetectionFile dets = fixtures::compose_detections(scene, {});
    const auto labels = to_labeled_frames(scene.labels);
    const auto alpha = threshold_sweep(dets, labels, SweepParameter::Alpha, values);
    const auto beta = threshold_sweep(dets, labels, SweepParameter::Beta, values);
    for (std::size_t k = 1; k < values.size(); ++k) {
      violations += alpha[k].both + alpha[k].face > alpha[k - 1].both + alpha[k - 1].face;
      violations += beta[k].both + beta[k].head > beta[k - 1].both + beta[k - 1].head;
    }
  }
  std::ostringstream d;
  d << "10 seeds, " << violations << " violations";
  return {violations == 0, d.str()};
}

// Integer boxes on a 100x100 canvas, faces mostly placed inside heads.
std::pair<std::vector<Detection>, std::vector<Detection>> random_fusion_frame(std::mt19937_64& rng)
{
  std::uniform_int_distribution<int> count(0, 5);
  std::uniform_real_distribution<double> conf(0.0, 1.0);
  std::bernoulli_distribution inside(0.7);
  std::vector<Detection> heads;
  std::vector<Detection> faces;
  for (int i = count(rng); i > 0; --i) {
    heads.push_back(det(fixtures::random_int_box(rng, 0, 60, 30), Source::Head, conf(rng)));
  }
  for (int i = count(rng); i > 0; --i) {
    BBox b = fixtures::random_int_box(rng, 0, 60, 30);
    if (!heads.empty() && inside(rng)) {
      const BBox& h =
          heads[std::uniform_int_distribution<std::size_t>(0, heads.size() - 1)(rng)].box;
      const int x0 = std::uniform_int_distribution<int>(int(h.x_min), int(h.x_max) - 1)(rng);
      const int y0 = std::uniform_int_distribution<int>(int(h.y_min), int(h.y_max) - 1)(rng);
      const int x1 = std::uniform_int_distribution<int>(x0 + 1, int(h.x_max) + 1)(rng);
      const int y1 = std::uniform_int_distribution<int>(y0 + 1, int(h.y_max) + 1)(rng);
      b = {double(x0), double(y0), double(x1), double(y1)};
    }
    faces.push_back(det(b, Source::Face, conf(rng)));
  }
  return {heads, faces};
}

std::vector<bool> paint(const std::vector<Detection>& dets)
{
  constexpr int kSize = 100;
  std::vector<bool> mask(kSize * kSize, false);
  for (const Detection& d : dets) {
    for (int y = int(d.box.y_min); y < int(d.box.y_max); ++y) {
      for (int x = int(d.box.x_min); x < int(d.box.x_max); ++x) {
        mask[y * kSize + x] = true;
      }
    }
  }
  return mask;
}

Outcome fusion_coverage()
{
  std::mt19937_64 rng(1004);
  int coverage_diffs = 0;
  int size_violations = 0;
  const FusionConfig keep_head{FusionStrategy::KeepHead, 1.0};
  const FusionConfig keep_both{FusionStrategy::KeepBoth, 1.0};
  for (int i = 0; i < 1000; ++i) {
    const auto [heads, faces] = random_fusion_frame(rng);
    coverage_diffs += paint(fuse(heads, faces, keep_head)) != paint(fuse(heads, faces, keep_both));
    FusionConfig both_default;
    both_default.strategy = FusionStrategy::KeepBoth;
    size_violations += fuse(heads, faces, {}).size() > fuse(heads, faces, both_default).size();
  }
  std::ostringstream d;
  d << "1000 frames, " << coverage_diffs << " coverage differences, " << size_violations
    << " frames with |ByConfidence| > |KeepBoth|";
  return {coverage_diffs == 0 && size_violations == 0, d.str()};
}

Outcome missing_rate_analogue()
{
  ScenarioConfig sc;
  sc.seed = 1005;
  sc.pedestrians = 40;
  sc.frames = 60;
  sc.head_px_min = 20.0;
  sc.head_px_max = 90.0;
  sc.front_facing_fraction = 1.0;
  sc.face.drop_below_px = 40.0;
  sc.face.jitter_px = 1.0;
  const SyntheticScene scene = generate(sc);
  const auto labels = to_labeled_frames(scene.labels);

  DetectionFile heads;
  DetectionFile fused;
  for (std::size_t f = 0; f < scene.poses.size(); ++f) {
    const int frame = scene.poses[f].frame;
    heads.push_back({frame, infer_heads(scene.poses[f].poses, {}, frame)});
    fused.push_back({frame, fuse(heads.back().boxes, scene.faces[f].boxes, {})});
  }
  std::vector<double> thresholds;
  for (double t = 20.0; t <= 80.0; t += 5.0) {
    thresholds.push_back(t);
  }
  const auto face_curve = missing_rate_curve(scene.faces, labels, {}, thresholds);
  const auto head_curve = missing_rate_curve(heads, labels, {}, thresholds);
  const auto fused_curve = missing_rate_curve(fused, labels, {}, thresholds);

  bool ok = true;
  std::ostringstream d;
  d << "threshold face/head/fused %:";
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    const double t = thresholds[i];
    if (!fused_curve[i].percent || !face_curve[i].percent || !head_curve[i].percent) {
      ok = false;
      d << " " << t << ":empty";
      continue;
    }
    const double fa = *face_curve[i].percent;
    const double he = *head_curve[i].percent;
    const double fu = *fused_curve[i].percent;
    d << " " << t << ":" << fa << "/" << he << "/" << fu;
    ok = ok && fu <= std::min(fa, he);
    if (t >= 40.0) {
      ok = ok && fu == 0.0;
    } else {
      ok = ok && fa > 0.0;
    }
  }
  return {ok, d.str()};
}

Outcome size_filter_effect()
{
  ScenarioConfig sc;
  sc.seed = 1006;
  sc.pedestrians = 40;
  sc.frames = 60;
  sc.head_px_min = 4.0;
  sc.head_px_max = 80.0;
  sc.label_min_px = 14.0;
  sc.face.jitter_px = 1.0;
  sc.pose.keypoint_noise_px = 0.5;
  const SyntheticScene scene = generate(sc);
  const DetectionFile dets = fixtures::compose_detections(scene, {});
  const auto labels = to_labeled_frames(scene.labels);
  EvalConfig filtered;
  filtered.size_filter = 15.0;
  const EvalCounts a = evaluate_sequence(dets, labels, {}).counts;
  const EvalCounts b = evaluate_sequence(dets, labels, filtered).counts;
  const double fp_drop = a.fp_count > 0 ? 1.0 - double(b.fp_count) / a.fp_count : 0.0;
  const double both_drop = a.both > 0 ? 1.0 - double(b.both) / a.both : 1.0;
  std::ostringstream d;
  d << "FP " << a.fp_count << " -> " << b.fp_count << " (-" << 100.0 * fp_drop << "%), Both "
    << a.both << " -> " << b.both << " (-" << 100.0 * both_drop << "%)";
  return {a.fp_count > 0 && fp_drop >= 0.5 && both_drop <= 0.05, d.str()};
}

bool symmetric_psd(const StateCovariance& p)
{
  if (!p.isApprox(p.transpose(), 1e-12)) {
    return false;
  }
  Eigen::SelfAdjointEigenSolver<StateCovariance> es(p);
  return es.eigenvalues().minCoeff() >= -1e-9;
}

Outcome tracker_physics()
{
  std::ostringstream d;
  bool ok = true;

  // constant velocity, noise-free measurements
  TrackerConfig exact;
  exact.measurement_noise = 1e-8;
  Tracker cv_tracker(exact);
  double worst = 0.0;
  for (int f = 0; f < 15; ++f) {
    const Point c{200.0 + 6.0 * f, 120.0 - 3.5 * f};
    const auto out = cv_tracker.step(f, {det(BBox::from_center(c, 24, 30))});
    if (f >= 5) {
      if (out.size() != 1) {
        ok = false;
        continue;
      }
      worst = std::max(worst, std::hypot(out[0].box.center().x - c.x,
                                         out[0].box.center().y - c.y));
    }
  }
  ok = ok && worst < 1e-6;
  d << "center error after 5 frames " << worst;

  // covariance over a noisy multi-target run
  std::mt19937_64 rng(1007);
  std::normal_distribution<double> noise(0.0, 3.0);
  std::bernoulli_distribution drop(0.2);
  int bad_cov = 0;
  Tracker busy;
  for (int f = 0; f < 200; ++f) {
    std::vector<Detection> dets;
    for (int k = 0; k < 5; ++k) {
      if (!drop(rng)) {
        dets.push_back(det(BBox::from_center({120.0 * k + 2.0 * f + noise(rng), 300 + noise(rng)},
                                             20 + noise(rng), 26 + noise(rng))));
      }
    }
    busy.step(f, dets);
    for (const Track& t : busy.tracks()) {
      bad_cov += !symmetric_psd(t.covariance);
    }
  }
  ok = ok && bad_cov == 0;
  d << "; non-PSD covariances " << bad_cov;

  // small fast box: consecutive boxes never overlap
  Tracker fast;
  std::set<int> ids;
  int overlapping = 0;
  std::size_t max_tracks = 0;
  BBox prev;
  for (int f = 0; f < 30; ++f) {
    const BBox b = BBox::from_center({100.0 + 15.0 * f, 200.0}, 10, 10);
    overlapping += f > 0 && iou(prev, b) != 0.0;
    prev = b;
    for (const Detection& e : fast.step(f, {det(b)})) {
      ids.insert(*e.track_id);
    }
    max_tracks = std::max(max_tracks, fast.tracks().size());
  }
  ok = ok && overlapping == 0 && ids.size() == 1 && max_tracks == 1;
  d << "; small fast box: " << ids.size() << " emitted id(s), " << max_tracks
    << " live track(s) max";
  return {ok, d.str()};
}

cv::Mat random_image(std::mt19937_64& rng, int w, int h)
{
  cv::Mat img(h, w, CV_8UC3);
  std::uniform_int_distribution<int> v(0, 255);
  for (int y = 0; y < h; ++y) {
    auto* row = img.ptr<std::uint8_t>(y);
    for (int x = 0; x < 3 * w; ++x) {
      row[x] = static_cast<std::uint8_t>(v(rng));
    }
  }
  return img;
}

// Outward-rounded inflated box, computed independently of the library.
cv::Rect inflated(const BBox& b, double margin, int w, int h)
{
  const double gx = 0.5 * margin * b.width();
  const double gy = 0.5 * margin * b.height();
  const int x0 = std::clamp(int(std::floor(b.x_min - gx)), 0, w);
  const int y0 = std::clamp(int(std::floor(b.y_min - gy)), 0, h);
  const int x1 = std::clamp(int(std::ceil(b.x_max + gx)), 0, w);
  const int y1 = std::clamp(int(std::ceil(b.y_max + gy)), 0, h);
  return {x0, y0, std::max(0, x1 - x0), std::max(0, y1 - y0)};
}

Outcome anonymizer_locality()
{
  std::mt19937_64 rng(1008);
  std::uniform_int_distribution<int> dim(32, 200);
  std::uniform_int_distribution<int> nboxes(0, 5);
  int leaks = 0;
  int not_idempotent = 0;
  for (int i = 0; i < 100; ++i) {
    const int w = dim(rng);
    const int h = dim(rng);
    const cv::Mat img = random_image(rng, w, h);
    std::vector<Detection> dets;
    for (int k = nboxes(rng); k > 0; --k) {
      dets.push_back(det(fixtures::random_box(rng, -20.0, w + 10.0, 60.0)));
    }
    for (auto method : {AnonymizeMethod::GaussianBlur, AnonymizeMethod::Pixelate}) {
      AnonymizeConfig cfg;
      cfg.method = method;
      const cv::Mat out = anonymize_frame(img, dets, cfg);
      cv::Mat mask(h, w, CV_8U, cv::Scalar(255));
      for (const Detection& d : dets) {
        const cv::Rect r = inflated(d.box, cfg.margin_ratio, w, h);
        if (r.area() > 0) {
          mask(r).setTo(0);
        }
      }
      cv::Mat diff;
      cv::absdiff(img, out, diff);
      leaks += cv::norm(diff, cv::NORM_INF, mask) != 0.0;
    }
    AnonymizeConfig pix;
    pix.method = AnonymizeMethod::Pixelate;
    const std::vector<Detection> one{det(fixtures::random_box(rng, -10.0, w - 5.0, 80.0))};
    const cv::Mat once = anonymize_frame(img, one, pix);
    not_idempotent += cv::norm(anonymize_frame(once, one, pix), once, cv::NORM_INF) != 0.0;
  }
  std::ostringstream d;
  d << "100 images, " << leaks << " with changes outside the regions, " << not_idempotent
    << " non-idempotent pixelations";
  return {leaks == 0 && not_idempotent == 0, d.str()};
}

Outcome pipeline_equivalence()
{
  int mismatches = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    fixtures::TempDir dir("accept");
    const SyntheticScene scene = generate(noisy_scene(100 + seed));
    write_scene(dir.path(), scene);
    nlohmann::json cfg_json = {
        {"stages", {"infer-heads", "fuse", "evaluate"}},
        {"inputs",
         {{"poses", "poses.json"}, {"faces", "faces.json"}, {"labels", "labels.json"}}},
        {"output", "out"},
        {"jobs", 2}};
    // alternate tracked and untracked chains
    if (seed % 2 == 0) {
      cfg_json["stages"] = {"infer-heads", "fuse", "track", "evaluate"};
    }
    const PipelineConfig cfg = pipeline_from_json(cfg_json, dir.path());
    const PipelineResult r = run_pipeline(cfg);
    fixtures::Composition c;
    if (seed % 2 == 0) {
      c.tracker = cfg.tracker;
    }
    const EvalReport want = fixtures::compose_report(scene, c);
    mismatches += !r.report || r.report->counts != want.counts || r.report->frames != want.frames;
  }
  std::ostringstream d;
  d << "5 scenarios, " << mismatches << " mismatching reports";
  return {mismatches == 0, d.str()};
}

}  // namespace

int main()
{
  spdlog::set_level(spdlog::level::err);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"assignment-oracle", assignment_oracle},
      {"criteria-correctness", criteria_suite},
      {"sweep-monotonicity", sweep_monotonicity},
      {"fusion-coverage", fusion_coverage},
      {"synthetic-missing-rate", missing_rate_analogue},
      {"size-filter", size_filter_effect},
      {"tracker-physics", tracker_physics},
      {"anonymizer-locality", anonymizer_locality},
      {"pipeline-equivalence", pipeline_equivalence},
  };
  const auto t0 = Clock::now();
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  const double total = seconds_since(t0);
  const bool fast = total < 300.0;
  failures += !fast;
  std::cout << (fast ? "PASS " : "FAIL ") << "runtime: " << total << " s" << std::endl;
  return failures == 0 ? 0 : 1;
}
