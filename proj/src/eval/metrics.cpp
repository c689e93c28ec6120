#include "affordfit/eval/metrics.hpp"

#include "affordfit/error.hpp"

#include <cmath>

namespace affordfit::eval {

namespace {

// Flattened joint tracks: tracks[j][t].
using Tracks = std::vector<std::vector<Vec3>>;

Tracks human_tracks(const InteractionSample& s, int T) {
  Tracks tracks;
  for (const auto& h : s.humans) {
    const std::size_t joints = h.frames.empty() ? 0 : h.frames.front().joints.size();
    for (std::size_t j = 0; j < joints; ++j) {
      std::vector<Vec3> track(T);
      for (int t = 0; t < T; ++t) {
        if (h.frames[t].joints.size() != joints) {
          throw Error(ErrorCode::SchemaError, "human '" + h.id + "' joint count changes between frames");
        }
        track[t] = h.frames[t].joints[j];
      }
      tracks.push_back(std::move(track));
    }
  }
  return tracks;
}

Tracks corner_tracks(const InteractionSample& s, int T) {
  Tracks tracks;
  for (const auto& o : s.objects) {
    for (const auto& c : o.corners) {
      std::vector<Vec3> track(T);
      for (int t = 0; t < T; ++t) track[t] = o.trajectory[t] * c;
      tracks.push_back(std::move(track));
    }
  }
  return tracks;
}

double smoothness(const Tracks& tracks, int T, kernels::Exec exec) {
  if (tracks.empty()) return 0.0;
  std::vector<double> per_frame(T, 0.0);
  const bool parallel = exec == kernels::Exec::parallel;
#pragma omp parallel for schedule(static) if (parallel)
  for (int t = 1; t < T - 1; ++t) {
    double s = 0.0;
    for (const auto& track : tracks) s += (track[t] - 0.5 * (track[t - 1] + track[t + 1])).norm();
    per_frame[t] = s;
  }
  double total = 0.0;
  for (double v : per_frame) total += v;
  return total / (static_cast<double>(tracks.size()) * (T - 2));
}

double diversity(const std::vector<Tracks>& samples, int T, kernels::Exec exec) {
  const std::size_t joints = samples.front().size();
  if (joints == 0) return 0.0;
  std::vector<std::pair<int, int>> pairs;
  for (int a = 0; a < static_cast<int>(samples.size()); ++a)
    for (int b = a + 1; b < static_cast<int>(samples.size()); ++b) pairs.emplace_back(a, b);
  std::vector<double> per_pair(pairs.size(), 0.0);
  const bool parallel = exec == kernels::Exec::parallel;
  const int np = static_cast<int>(pairs.size());
#pragma omp parallel for schedule(static) if (parallel)
  for (int p = 0; p < np; ++p) {
    const Tracks& a = samples[pairs[p].first];
    const Tracks& b = samples[pairs[p].second];
    double s = 0.0;
    for (std::size_t j = 0; j < joints; ++j)
      for (int t = 0; t < T; ++t) s += (a[j][t] - b[j][t]).norm();
    per_pair[p] = s / (static_cast<double>(joints) * T);
  }
  double total = 0.0;
  for (double v : per_pair) total += v;
  return total / static_cast<double>(pairs.size());
}

}  // namespace

BoxCorners bounding_box_corners(const std::vector<Vec3>& points) {
  if (points.empty()) throw Error(ErrorCode::EmptyCloud, "bounding box of an empty cloud");
  Vec3 lo = points.front();
  Vec3 hi = lo;
  for (const auto& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  BoxCorners c;
  for (int i = 0; i < 8; ++i) c[i] = Vec3(i & 1 ? hi.x() : lo.x(), i & 2 ? hi.y() : lo.y(), i & 4 ? hi.z() : lo.z());
  return c;
}

int InteractionSample::frame_count() const {
  int T = -1;
  auto check = [&](int n, const std::string& who) {
    if (T < 0) T = n;
    else if (T != n) throw Error(ErrorCode::FrameCountMismatch, who + " has " + std::to_string(n) + " frames, expected " +
                                                                    std::to_string(T));
  };
  for (const auto& h : humans) check(h.frame_count(), "human '" + h.id + "'");
  for (const auto& o : objects) check(static_cast<int>(o.trajectory.size()), "object '" + o.id + "'");
  return std::max(T, 0);
}

Score temporal_smoothness(const InteractionSample& sample, kernels::Exec exec) {
  const int T = sample.frame_count();
  if (T < 3) throw Error(ErrorCode::TooFewFrames, "temporal smoothness needs at least 3 frames");
  return {smoothness(human_tracks(sample, T), T, exec), smoothness(corner_tracks(sample, T), T, exec)};
}

Score motion_diversity(const std::vector<InteractionSample>& samples, kernels::Exec exec) {
  if (samples.size() < 2) throw Error(ErrorCode::TooFewSamples, "motion diversity needs at least 2 samples");
  const int T = samples.front().frame_count();
  std::vector<Tracks> humans;
  std::vector<Tracks> objects;
  for (const auto& s : samples) {
    if (s.frame_count() != T) throw Error(ErrorCode::FrameCountMismatch, "samples have different frame counts");
    humans.push_back(human_tracks(s, T));
    objects.push_back(corner_tracks(s, T));
    if (humans.back().size() != humans.front().size() || objects.back().size() != objects.front().size()) {
      throw Error(ErrorCode::SchemaError, "samples have different joint counts or object sets");
    }
  }
  return {diversity(humans, T, exec), diversity(objects, T, exec)};
}

Plausibility physical_plausibility(const InteractionSample& sample, double tolerance, kernels::Exec exec) {
  const int T = sample.frame_count();
  Plausibility out;
  if (T == 0) return out;
  std::vector<double> ratio(T, 1.0);
  std::vector<char> touched(T, 0);
  const bool parallel = exec == kernels::Exec::parallel;
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (int t = 0; t < T; ++t) {
    std::size_t total = 0;
    std::size_t colliding = 0;
    for (const auto& h : sample.humans) {
      for (const Vec3& v : h.frames[t].vertices) {
        ++total;
        for (const auto& o : sample.objects) {
          if (!o.sdf) continue;
          const RigidPose& pose = o.trajectory[t];
          if (query_sdf(*o.sdf, pose.rotation.transpose() * (v - pose.translation)) < tolerance) {
            ++colliding;
            break;
          }
        }
      }
    }
    if (total > 0) ratio[t] = 1.0 - static_cast<double>(colliding) / static_cast<double>(total);
    touched[t] = colliding > 0;
  }
  double sum = 0.0;
  int frames_with_contact = 0;
  for (int t = 0; t < T; ++t) {
    sum += ratio[t];
    frames_with_contact += touched[t];
  }
  out.non_collision = sum / T;
  out.contact = static_cast<double>(frames_with_contact) / T;
  return out;
}

InteractionSample make_sample(const hoiopt::Scene& scene, const std::vector<PoseTrajectory>& trajectories) {
  if (trajectories.size() != scene.objects.size()) {
    throw Error(ErrorCode::FrameCountMismatch, "one trajectory per scene object is required");
  }
  InteractionSample s;
  s.humans = scene.humans;
  for (std::size_t o = 0; o < scene.objects.size(); ++o) {
    const auto& model = scene.objects[o];
    ObjectTrack track;
    track.id = model.id;
    track.corners = bounding_box_corners(model.cloud.points);
    track.trajectory = trajectories[o];
    if (model.sdf) track.sdf = std::make_shared<const SdfGrid>(*model.sdf);
    s.objects.push_back(std::move(track));
  }
  s.frame_count();
  return s;
}

}  // namespace affordfit::eval
