#include "skelanon/tracker.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace skelanon
{

namespace
{

constexpr double kMinEmittedSize = 1e-3;

using MeasurementVector = Eigen::Matrix<double, 4, 1>;
using ObservationMatrix = Eigen::Matrix<double, 4, 8>;

StateCovariance transition()
{
  StateCovariance f = StateCovariance::Identity();
  f.topRightCorner<4, 4>() = Eigen::Matrix4d::Identity();
  return f;
}

// Piecewise-constant acceleration noise per component, dt = 1.
StateCovariance process_covariance(double q)
{
  StateCovariance m = StateCovariance::Zero();
  for (int i = 0; i < 4; ++i) {
    m(i, i) = 0.25 * q;
    m(i, i + 4) = 0.5 * q;
    m(i + 4, i) = 0.5 * q;
    m(i + 4, i + 4) = q;
  }
  return m;
}

ObservationMatrix observation()
{
  ObservationMatrix h = ObservationMatrix::Zero();
  h.leftCols<4>() = Eigen::Matrix4d::Identity();
  return h;
}

MeasurementVector measure(const BBox& b)
{
  const Point c = b.center();
  return {c.x, c.y, b.width(), b.height()};
}

}  // namespace

void TrackerConfig::validate() const
{
  if (max_age < 1 || min_hits < 1) {
    throw ConfigError(fmt::format("tracker: max_age ({}) and min_hits ({}) must be >= 1",
                                  max_age, min_hits));
  }
  if (!(gate_dist > 0.0)) {
    throw ConfigError("tracker: gate_dist must be > 0");
  }
  if (!(process_noise > 0.0) || !(measurement_noise > 0.0) ||
      !(initial_velocity_variance > 0.0)) {
    throw ConfigError("tracker: noise variances must be > 0");
  }
}

BBox Track::box() const
{
  const double w = std::max(state(2), kMinEmittedSize);
  const double h = std::max(state(3), kMinEmittedSize);
  return BBox::from_center({state(0), state(1)}, w, h);
}

Source Track::source() const
{
  return face_updates > head_updates ? Source::Face : Source::Head;
}

Track make_track(int id, const Detection& det, const TrackerConfig& cfg)
{
  Track t;
  t.id = id;
  t.state.head<4>() = measure(det.box);
  t.covariance = StateCovariance::Zero();
  t.covariance.topLeftCorner<4, 4>().diagonal().setConstant(cfg.measurement_noise);
  t.covariance.bottomRightCorner<4, 4>().diagonal().setConstant(cfg.initial_velocity_variance);
  t.hits = 1;
  (det.source == Source::Face ? t.face_updates : t.head_updates) = 1;
  t.last_confidence = det.confidence;
  return t;
}

Track predict(const Track& track, const TrackerConfig& cfg)
{
  static const StateCovariance f = transition();
  Track t = track;
  t.state = f * track.state;
  StateCovariance p = f * track.covariance * f.transpose() + process_covariance(cfg.process_noise);
  t.covariance = 0.5 * (p + p.transpose());
  ++t.age;
  ++t.time_since_update;
  return t;
}

Track update(const Track& track, const Detection& det, const TrackerConfig& cfg)
{
  static const ObservationMatrix h = observation();
  const Eigen::Matrix4d r = Eigen::Matrix4d::Identity() * cfg.measurement_noise;

  Track t = track;
  const MeasurementVector innovation = measure(det.box) - h * track.state;
  const Eigen::Matrix4d s = h * track.covariance * h.transpose() + r;
  // K = P H^T S^-1, solved rather than inverted
  const Eigen::Matrix<double, 8, 4> gain =
      s.ldlt().solve(h * track.covariance.transpose()).transpose();
  t.state = track.state + gain * innovation;

  // Joseph form keeps the covariance symmetric PSD
  const StateCovariance i_kh = StateCovariance::Identity() - gain * h;
  StateCovariance p = i_kh * track.covariance * i_kh.transpose() + gain * r * gain.transpose();
  t.covariance = 0.5 * (p + p.transpose());

  t.time_since_update = 0;
  ++t.hits;
  (det.source == Source::Face ? t.face_updates : t.head_updates) += 1;
  t.last_confidence = det.confidence;
  return t;
}

Association associate(const std::vector<Track>& tracks, const std::vector<Detection>& dets,
                      const TrackerConfig& cfg)
{
  CostMatrix cost(tracks.size(), dets.size());
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    const BBox predicted = tracks[i].box();
    for (std::size_t j = 0; j < dets.size(); ++j) {
      const double d = center_distance(predicted, dets[j].box);
      if (d <= cfg.gate_dist) {
        cost(i, j) = d;
      }
    }
  }

  Association a;
  a.matches = solve_assignment(cost);
  std::vector<bool> track_used(tracks.size(), false), det_used(dets.size(), false);
  for (const auto& [t, d] : a.matches) {
    track_used[t] = true;
    det_used[d] = true;
  }
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    if (!track_used[i]) {
      a.unmatched_tracks.push_back(i);
    }
  }
  for (std::size_t j = 0; j < dets.size(); ++j) {
    if (!det_used[j]) {
      a.unmatched_detections.push_back(j);
    }
  }
  return a;
}

Tracker::Tracker(TrackerConfig cfg) : cfg_(cfg)
{
  cfg_.validate();
}

std::vector<Detection> Tracker::step(int frame, const std::vector<Detection>& dets)
{
  if (last_frame_ && frame <= *last_frame_) {
    throw Error(fmt::format("tracker: frame {} does not follow frame {}", frame, *last_frame_));
  }
  const int elapsed = last_frame_ ? frame - *last_frame_ : 1;
  last_frame_ = frame;

  for (Track& t : tracks_) {
    for (int k = 0; k < elapsed; ++k) {
      t = predict(t, cfg_);
    }
  }
  std::erase_if(tracks_, [](const Track& t) { return !t.state.allFinite(); });

  const Association assoc = associate(tracks_, dets, cfg_);
  for (const auto& [ti, di] : assoc.matches) {
    tracks_[ti] = update(tracks_[ti], dets[di], cfg_);
  }
  for (std::size_t ti : assoc.unmatched_tracks) {
    tracks_[ti].hits = 0;
  }
  for (std::size_t di : assoc.unmatched_detections) {
    tracks_.push_back(make_track(next_id_++, dets[di], cfg_));
  }
  std::erase_if(tracks_, [this](const Track& t) { return t.time_since_update > cfg_.max_age; });

  std::vector<Detection> emitted;
  for (const Track& t : tracks_) {
    if (t.time_since_update == 0 && t.hits >= cfg_.min_hits) {
      Detection d;
      d.box = t.box();
      d.confidence = t.last_confidence;
      d.source = t.source();
      d.frame = frame;
      d.track_id = t.id;
      emitted.push_back(d);
    }
  }
  return emitted;
}

}  // namespace skelanon
