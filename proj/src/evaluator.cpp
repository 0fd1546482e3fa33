#include "skelanon/evaluator.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <set>

#include <fmt/format.h>

#include "skelanon/assignment.hpp"
#include "skelanon/parallel.hpp"

namespace skelanon
{

void EvalConfig::validate() const
{
  if (!(alpha > 0.0 && alpha < 1.0) || !(beta > 0.0 && beta < 1.0)) {
    throw ConfigError(fmt::format("evaluation: alpha ({}) and beta ({}) must be in (0,1)",
                                  alpha, beta));
  }
  if (size_filter && !(*size_filter >= 0.0)) {
    throw ConfigError("evaluation: size_filter must be >= 0");
  }
}

EvalCounts& EvalCounts::operator+=(const EvalCounts& o)
{
  both += o.both;
  face_only += o.face_only;
  head_only_of_pair += o.head_only_of_pair;
  none_of_pair += o.none_of_pair;
  head_match += o.head_match;
  head_none += o.head_none;
  fp_count += o.fp_count;
  return *this;
}

bool face_criterion(const BBox& det, const BBox& face, double alpha)
{
  const double area = face.area();
  if (!(area > 0.0)) {
    throw GeometryError("face criterion: face label has zero area");
  }
  return intersect_area(det, face) / area > alpha;
}

bool head_criterion(const BBox& det, const BBox& head, double beta)
{
  const double area = det.area();
  if (!(area > 0.0)) {
    throw GeometryError("head criterion: detection has zero area");
  }
  return intersect_area(det, head) / area > beta;
}

namespace
{

std::string box_str(const BBox& b)
{
  return fmt::format("[{}, {}, {}, {}]", b.x_min, b.y_min, b.x_max, b.y_max);
}

}  // namespace

std::vector<std::size_t> associate_labels(const std::vector<BBox>& faces,
                                          const std::vector<BBox>& heads, int frame)
{
  std::vector<std::size_t> out(faces.size());
  for (std::size_t f = 0; f < faces.size(); ++f) {
    if (!(faces[f].area() > 0.0)) {
      throw ValidationError(
          fmt::format("frame {}: face label {} {} has zero area", frame, f, box_str(faces[f])));
    }
    double best = 0.0;
    std::optional<std::size_t> best_head;
    for (std::size_t h = 0; h < heads.size(); ++h) {
      const double r = containment_ratio(faces[f], heads[h]);
      if (r > best) {
        best = r;
        best_head = h;
      }
    }
    if (!best_head) {
      throw ValidationError(fmt::format("frame {}: face label {} {} is not inside any head label",
                                        frame, f, box_str(faces[f])));
    }
    out[f] = *best_head;
  }
  return out;
}

void validate(const LabeledFrame& labels)
{
  if (labels.face_to_head.size() != labels.faces.size()) {
    throw ValidationError(fmt::format("frame {}: {} faces but {} face-to-head entries",
                                      labels.frame, labels.faces.size(),
                                      labels.face_to_head.size()));
  }
  for (const BBox& b : labels.faces) {
    if (!b.valid() || !(b.area() > 0.0)) {
      throw ValidationError(
          fmt::format("frame {}: degenerate face label {}", labels.frame, box_str(b)));
    }
  }
  for (const BBox& b : labels.heads) {
    if (!b.valid() || !(b.area() > 0.0)) {
      throw ValidationError(
          fmt::format("frame {}: degenerate head label {}", labels.frame, box_str(b)));
    }
  }
  std::vector<int> owner(labels.heads.size(), -1);
  for (std::size_t f = 0; f < labels.faces.size(); ++f) {
    const std::size_t h = labels.face_to_head[f];
    if (h >= labels.heads.size()) {
      throw ValidationError(fmt::format("frame {}: face {} linked to missing head {}",
                                        labels.frame, f, h));
    }
    if (owner[h] >= 0) {
      throw ValidationError(fmt::format("frame {}: head label {} has two face labels ({}, {})",
                                        labels.frame, h, owner[h], f));
    }
    owner[h] = static_cast<int>(f);
  }
}

LabeledFrame make_labeled_frame(int frame, std::vector<BBox> faces, std::vector<BBox> heads,
                                const std::vector<std::pair<std::size_t, std::size_t>>& links)
{
  LabeledFrame lf;
  lf.frame = frame;
  lf.faces = std::move(faces);
  lf.heads = std::move(heads);

  std::vector<std::optional<std::size_t>> linked(lf.faces.size());
  for (const auto& [f, h] : links) {
    if (f >= lf.faces.size() || h >= lf.heads.size()) {
      throw ValidationError(
          fmt::format("frame {}: link [{}, {}] out of range", frame, f, h));
    }
    if (linked[f]) {
      throw ValidationError(fmt::format("frame {}: face {} linked twice", frame, f));
    }
    linked[f] = h;
  }

  std::vector<BBox> unlinked;
  std::vector<std::size_t> unlinked_idx;
  for (std::size_t f = 0; f < lf.faces.size(); ++f) {
    if (!linked[f]) {
      unlinked.push_back(lf.faces[f]);
      unlinked_idx.push_back(f);
    }
  }
  const auto assoc = associate_labels(unlinked, lf.heads, frame);
  lf.face_to_head.resize(lf.faces.size());
  for (std::size_t f = 0; f < lf.faces.size(); ++f) {
    if (linked[f]) {
      lf.face_to_head[f] = *linked[f];
    }
  }
  for (std::size_t i = 0; i < unlinked_idx.size(); ++i) {
    lf.face_to_head[unlinked_idx[i]] = assoc[i];
  }
  validate(lf);
  return lf;
}

FrameMatch match_frame(const std::vector<Detection>& dets, const LabeledFrame& labels,
                       const std::optional<double>& size_filter)
{
  FrameMatch m;
  std::vector<std::optional<std::size_t>> kept_index(labels.heads.size());
  for (std::size_t h = 0; h < labels.heads.size(); ++h) {
    if (!size_filter || labels.heads[h].max_dim() >= *size_filter) {
      kept_index[h] = m.heads.size();
      m.heads.push_back(labels.heads[h]);
    }
  }
  m.face_of_head.resize(m.heads.size());
  for (std::size_t f = 0; f < labels.faces.size(); ++f) {
    if (const auto k = kept_index[labels.face_to_head[f]]) {
      m.face_of_head[*k] = labels.faces[f];
    }
  }
  for (const Detection& d : dets) {
    if (size_filter && d.source == Source::Head && d.box.max_dim() < *size_filter) {
      continue;
    }
    m.dets.push_back(d.box);
  }

  CostMatrix cost(m.dets.size(), m.heads.size());
  for (std::size_t i = 0; i < m.dets.size(); ++i) {
    for (std::size_t h = 0; h < m.heads.size(); ++h) {
      const double overlap = iou(m.dets[i], m.heads[h]);
      if (overlap > 0.0) {
        cost(i, h) = 1.0 - overlap;
      }
    }
  }
  m.det_of_head.assign(m.heads.size(), std::nullopt);
  m.det_matched.assign(m.dets.size(), false);
  for (const auto& [d, h] : solve_assignment(cost)) {
    m.det_of_head[h] = d;
    m.det_matched[d] = true;
  }
  return m;
}

EvalCounts classify(const FrameMatch& m, double alpha, double beta)
{
  EvalCounts c;
  for (std::size_t h = 0; h < m.heads.size(); ++h) {
    const auto& det_idx = m.det_of_head[h];
    const auto& face = m.face_of_head[h];
    if (face) {
      if (!det_idx) {
        ++c.none_of_pair;
        continue;
      }
      const BBox& d = m.dets[*det_idx];
      const bool fc = face_criterion(d, *face, alpha);
      const bool hc = head_criterion(d, m.heads[h], beta);
      if (fc && hc) {
        ++c.both;
      } else if (fc) {
        ++c.face_only;
      } else if (hc) {
        ++c.head_only_of_pair;
      } else {
        ++c.none_of_pair;
        ++c.fp_count;
      }
    } else {
      if (det_idx && head_criterion(m.dets[*det_idx], m.heads[h], beta)) {
        ++c.head_match;
      } else {
        ++c.head_none;
        if (det_idx) {
          ++c.fp_count;
        }
      }
    }
  }
  c.fp_count += std::count(m.det_matched.begin(), m.det_matched.end(), false);
  return c;
}

EvalCounts evaluate_frame(const std::vector<Detection>& dets, const LabeledFrame& labels,
                          const EvalConfig& cfg)
{
  cfg.validate();
  return classify(match_frame(dets, labels, cfg.size_filter), cfg.alpha, cfg.beta);
}

namespace
{

// Detections for each labeled frame, in label order.
std::vector<const std::vector<Detection>*> align(const std::vector<DetectionFrame>& dets,
                                                 const std::vector<LabeledFrame>& labels)
{
  std::map<int, std::size_t> label_pos;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!label_pos.emplace(labels[i].frame, i).second) {
      throw ValidationError(fmt::format("duplicate label frame {}", labels[i].frame));
    }
  }
  static const std::vector<Detection> kEmpty;
  std::vector<const std::vector<Detection>*> out(labels.size(), &kEmpty);
  std::set<int> seen;
  for (const DetectionFrame& df : dets) {
    auto it = label_pos.find(df.frame);
    if (it == label_pos.end()) {
      throw ValidationError(fmt::format("detections for frame {} have no labels", df.frame));
    }
    if (!seen.insert(df.frame).second) {
      throw ValidationError(fmt::format("duplicate detection frame {}", df.frame));
    }
    out[it->second] = &df.boxes;
  }
  return out;
}

}  // namespace

EvalReport evaluate_sequence(const std::vector<DetectionFrame>& dets,
                             const std::vector<LabeledFrame>& labels, const EvalConfig& cfg,
                             unsigned jobs)
{
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const auto aligned = align(dets, labels);
  std::vector<EvalCounts> per_frame(labels.size());
  parallel_for(labels.size(), jobs,
               [&](std::size_t i) { per_frame[i] = evaluate_frame(*aligned[i], labels[i], cfg); });

  EvalReport r;
  for (const EvalCounts& c : per_frame) {
    r.counts += c;
  }
  r.frames = labels.size();
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  r.throughput_fps = r.seconds > 0.0 ? static_cast<double>(r.frames) / r.seconds : 0.0;
  return r;
}

std::vector<MissingRatePoint> missing_rate_curve(const std::vector<DetectionFrame>& dets,
                                                 const std::vector<LabeledFrame>& labels,
                                                 const EvalConfig& cfg,
                                                 const std::vector<double>& thresholds)
{
  cfg.validate();
  if (!std::is_sorted(thresholds.begin(), thresholds.end())) {
    throw ConfigError("missing-rate thresholds must be ascending");
  }
  const auto aligned = align(dets, labels);

  // (head max_dim, covered) for every face label
  std::vector<std::pair<double, bool>> faces;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const LabeledFrame& lf = labels[i];
    for (std::size_t f = 0; f < lf.faces.size(); ++f) {
      const bool covered =
          std::any_of(aligned[i]->begin(), aligned[i]->end(), [&](const Detection& d) {
            return face_criterion(d.box, lf.faces[f], cfg.alpha);
          });
      faces.emplace_back(lf.heads[lf.face_to_head[f]].max_dim(), covered);
    }
  }

  std::vector<MissingRatePoint> curve;
  for (double t : thresholds) {
    MissingRatePoint p;
    p.threshold = t;
    for (const auto& [size, covered] : faces) {
      if (size >= t) {
        ++p.total;
        p.missed += covered ? 0 : 1;
      }
    }
    if (p.total > 0) {
      p.percent = 100.0 * static_cast<double>(p.missed) / static_cast<double>(p.total);
    }
    curve.push_back(p);
  }
  return curve;
}

std::vector<SweepRow> threshold_sweep(const std::vector<DetectionFrame>& dets,
                                      const std::vector<LabeledFrame>& labels,
                                      SweepParameter which, const std::vector<double>& values,
                                      const EvalConfig& base)
{
  base.validate();
  const auto aligned = align(dets, labels);
  std::vector<FrameMatch> matches;
  matches.reserve(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    matches.push_back(match_frame(*aligned[i], labels[i], base.size_filter));
  }

  std::vector<SweepRow> rows;
  for (double v : values) {
    if (!(v > 0.0 && v < 1.0)) {
      throw ConfigError(fmt::format("sweep value {} not in (0,1)", v));
    }
    const double alpha = which == SweepParameter::Alpha ? v : base.alpha;
    const double beta = which == SweepParameter::Beta ? v : base.beta;
    EvalCounts total;
    for (const FrameMatch& m : matches) {
      total += classify(m, alpha, beta);
    }
    rows.push_back({v, total.both, total.face_only, total.head_only_of_pair, total.none_of_pair});
  }
  return rows;
}

std::vector<double> default_sweep_values()
{
  std::vector<double> v;
  for (int i = 1; i <= 9; ++i) {
    v.push_back(i / 10.0);
  }
  return v;
}

std::string format_report_table(const std::vector<std::pair<std::string, EvalReport>>& rows)
{
  std::size_t name_w = 5;
  for (const auto& [name, r] : rows) {
    name_w = std::max(name_w, name.size());
  }
  std::string out;
  out += fmt::format("{:<{}} | {:^27} | {:^13} | {:>8} | {:>8}\n", "Label", name_w,
                     "Face and Head", "Head", "", "");
  out += fmt::format("{:<{}} | {:>6}{:>7}{:>7}{:>7} | {:>6}{:>7} | {:>8} | {:>8}\n", "Match",
                     name_w, "Both", "Face", "Head", "None", "Head", "None", "FP count", "FPS");
  out += fmt::format("{:-<{}}-+-{:-<27}-+-{:-<13}-+-{:-<8}-+-{:-<8}\n", "", name_w, "", "", "", "");
  for (const auto& [name, r] : rows) {
    const EvalCounts& c = r.counts;
    out += fmt::format("{:<{}} | {:>6}{:>7}{:>7}{:>7} | {:>6}{:>7} | {:>8} | {:>8.2f}\n", name,
                       name_w, c.both, c.face_only, c.head_only_of_pair, c.none_of_pair,
                       c.head_match, c.head_none, c.fp_count, r.throughput_fps);
  }
  return out;
}

std::string format_sweep_csv(const std::vector<SweepRow>& rows)
{
  std::string out = "value,both,face,head,none\n";
  for (const SweepRow& r : rows) {
    out += fmt::format("{:.2f},{},{},{},{}\n", r.value, r.both, r.face, r.head, r.none);
  }
  return out;
}

}  // namespace skelanon
