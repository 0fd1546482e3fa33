///////////////////////////////////////////////////////////////////////////////
// tracker.hpp: SORT-style multi-object tracking of head/face boxes
//
// Constant-velocity Kalman filter over
//   [cx, cy, w, h, vcx, vcy, vw, vh]
// with detections associated to predicted tracks by Euclidean center
// distance. Small boxes moving fast often do not overlap between frames, so
// IoU-based association is not used.
///////////////////////////////////////////////////////////////////////////////

#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "skelanon/assignment.hpp"
#include "skelanon/geometry.hpp"

namespace skelanon
{

struct TrackerConfig
{
  int max_age{3};                 // frames a track survives without an update
  int min_hits{2};                // consecutive updates before a track is emitted
  double gate_dist{100.0};        // max center distance for association, px
  double process_noise{1.0};      // variance scale of the acceleration noise
  double measurement_noise{1.0};  // variance of each measured box component
  double initial_velocity_variance{1.0e4};

  void validate() const;
};

using StateVector = Eigen::Matrix<double, 8, 1>;
using StateCovariance = Eigen::Matrix<double, 8, 8>;

struct Track
{
  int id{0};
  StateVector state{StateVector::Zero()};
  StateCovariance covariance{StateCovariance::Identity()};
  int hits{0};  // consecutive updates
  int age{0};   // frames since creation
  int time_since_update{0};
  int face_updates{0};
  int head_updates{0};
  double last_confidence{0.0};

  [[nodiscard]] BBox box() const;
  /// Source seen most often among the associated detections (Head on ties).
  [[nodiscard]] Source source() const;
};

/// Starts a track at the detection box with zero velocity.
Track make_track(int id, const Detection& det, const TrackerConfig& cfg);

/// Advances one frame under constant velocity.
Track predict(const Track& track, const TrackerConfig& cfg);

/// Kalman update with an observed box.
Track update(const Track& track, const Detection& det, const TrackerConfig& cfg);

struct Association
{
  Matching matches;  // (track index, detection index)
  std::vector<std::size_t> unmatched_tracks;
  std::vector<std::size_t> unmatched_detections;
};

/// Center-distance association; pairs farther than gate_dist are never matched.
Association associate(const std::vector<Track>& tracks, const std::vector<Detection>& dets,
                      const TrackerConfig& cfg);

/// Tracker over one sequence. Not thread-safe; may be moved between threads.
class Tracker
{
public:
  explicit Tracker(TrackerConfig cfg = {});

  /// Processes one frame and returns the emitted boxes (with track_id set).
  /// Frames must arrive in strictly increasing order; gaps advance the filter
  /// once per missing frame.
  std::vector<Detection> step(int frame, const std::vector<Detection>& dets);

  [[nodiscard]] const std::vector<Track>& tracks() const noexcept { return tracks_; }
  [[nodiscard]] const TrackerConfig& config() const noexcept { return cfg_; }

private:
  TrackerConfig cfg_;
  std::vector<Track> tracks_;
  int next_id_{1};
  std::optional<int> last_frame_;
};

}  // namespace skelanon
