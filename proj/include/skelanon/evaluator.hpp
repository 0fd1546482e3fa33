///////////////////////////////////////////////////////////////////////////////
// evaluator.hpp: two-label (face + head) evaluation of anonymization boxes
//
// A detection D is scored against a face label F and a head label H with
//   face criterion:  |D ∩ F| / |F| > alpha   (the face is mostly covered)
//   head criterion:  |D ∩ H| / |D| > beta    (the box is mostly on the head)
// Detections are matched one-to-one to head labels by the Hungarian
// algorithm on 1 - IoU, pairs without overlap being infeasible. Each
// face-bearing head label is then counted as Both / Face / Head / None and
// each head-only label as Head / None. Detections left unmatched, or matched
// but failing every applicable criterion, are false positives.
///////////////////////////////////////////////////////////////////////////////

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "skelanon/geometry.hpp"

namespace skelanon
{

struct EvalConfig
{
  double alpha{0.5};
  double beta{0.5};
  /// Head labels and Head-source detections with max_dim below this are dropped.
  std::optional<double> size_filter;

  void validate() const;
};

struct LabeledFrame
{
  int frame{0};
  std::vector<BBox> faces;
  std::vector<BBox> heads;
  /// face_to_head[i] is the head label owning face label i.
  std::vector<std::size_t> face_to_head;
};

struct EvalCounts
{
  long both{0};
  long face_only{0};
  long head_only_of_pair{0};
  long none_of_pair{0};
  long head_match{0};
  long head_none{0};
  long fp_count{0};

  EvalCounts& operator+=(const EvalCounts& o);
  friend bool operator==(const EvalCounts&, const EvalCounts&) = default;

  [[nodiscard]] long face_bearing_labels() const { return both + face_only + head_only_of_pair + none_of_pair; }
  [[nodiscard]] long head_only_labels() const { return head_match + head_none; }
};

struct EvalReport
{
  EvalCounts counts;
  std::size_t frames{0};
  double seconds{0.0};
  double throughput_fps{0.0};
};

bool face_criterion(const BBox& det, const BBox& face, double alpha);
bool head_criterion(const BBox& det, const BBox& head, double beta);

/// Maps each face label to the head label that contains it most. Throws
/// ValidationError for a face touching no head or two faces on one head.
std::vector<std::size_t> associate_labels(const std::vector<BBox>& faces,
                                          const std::vector<BBox>& heads, int frame = 0);

/// Builds a validated LabeledFrame. Explicit (face, head) links take
/// precedence; unlinked faces are associated by containment.
LabeledFrame make_labeled_frame(int frame, std::vector<BBox> faces, std::vector<BBox> heads,
                                const std::vector<std::pair<std::size_t, std::size_t>>& links = {});

/// Checks the LabeledFrame invariants; throws ValidationError.
void validate(const LabeledFrame& labels);

/// Result of size filtering and Hungarian matching for one frame; criteria
/// can be re-applied at other thresholds without re-matching.
struct FrameMatch
{
  std::vector<BBox> heads;                        // after size filtering
  std::vector<std::optional<BBox>> face_of_head;  // per kept head
  std::vector<BBox> dets;                         // after size filtering
  std::vector<std::optional<std::size_t>> det_of_head;
  std::vector<bool> det_matched;
};

FrameMatch match_frame(const std::vector<Detection>& dets, const LabeledFrame& labels,
                       const std::optional<double>& size_filter);

EvalCounts classify(const FrameMatch& match, double alpha, double beta);

EvalCounts evaluate_frame(const std::vector<Detection>& dets, const LabeledFrame& labels,
                          const EvalConfig& cfg);

/// Sums evaluate_frame over the labeled frames. Label frames without a
/// detection record count as frames with no detections; a detection record
/// for an unlabeled frame is an error.
EvalReport evaluate_sequence(const std::vector<DetectionFrame>& dets,
                             const std::vector<LabeledFrame>& labels, const EvalConfig& cfg,
                             unsigned jobs = 1);

struct MissingRatePoint
{
  double threshold{0.0};
  long total{0};
  long missed{0};
  std::optional<double> percent;  // absent when no face qualifies
};

/// Percent of face labels (whose head label has max_dim >= threshold) not
/// covered by any detection under the face criterion.
std::vector<MissingRatePoint> missing_rate_curve(const std::vector<DetectionFrame>& dets,
                                                 const std::vector<LabeledFrame>& labels,
                                                 const EvalConfig& cfg,
                                                 const std::vector<double>& thresholds);

enum class SweepParameter
{
  Alpha,
  Beta,
};

struct SweepRow
{
  double value{0.0};
  long both{0};
  long face{0};
  long head{0};
  long none{0};
};

/// Re-classifies the face-bearing labels at each value of the swept
/// threshold, the other one held at its value in `base`.
std::vector<SweepRow> threshold_sweep(const std::vector<DetectionFrame>& dets,
                                      const std::vector<LabeledFrame>& labels,
                                      SweepParameter which, const std::vector<double>& values,
                                      const EvalConfig& base = {});

/// 0.1, 0.2, ..., 0.9
std::vector<double> default_sweep_values();

/// Aligned text table with the columns
/// Match | Both Face Head None | Head None | FP count | FPS
std::string format_report_table(const std::vector<std::pair<std::string, EvalReport>>& rows);

std::string format_sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace skelanon
