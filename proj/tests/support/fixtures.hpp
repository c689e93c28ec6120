#pragma once

#include "affordfit/hoiopt/align.hpp"
#include "affordfit/hoiopt/loss.hpp"
#include "affordfit/hoiopt/scene.hpp"
#include "affordfit/synth/synth.hpp"

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace affordfit::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Small random scene: 3..max_frames frames, one object (sometimes a second
/// one attached to it), a random trajectory family, optional human contacts
/// and random noise. At most ~500 points per object.
synth::ScenarioSpec random_scenario(std::uint64_t seed, int max_frames = 10);

/// Ground truth rotated by up to `max_angle` radians about random axes and
/// shifted by up to `max_shift` per axis, independently per frame.
std::vector<PoseTrajectory> perturb(const std::vector<PoseTrajectory>& poses, double max_angle, double max_shift,
                                    std::uint64_t seed);

/// |a - b| / max(|a|, |b|, floor).
double relative_error(double a, double b, double floor = 1e-6);

std::vector<std::string> object_ids(const hoiopt::Scene& scene);
double bbox_diagonal(const std::vector<Vec3>& points);

std::string read_file(const std::filesystem::path& path);

/// Largest relative error between the evaluator (exact contact, no
/// subsampling) and the brute-force oracle over every loss component.
struct OracleComparison {
  double worst = 0.0;
  std::string worst_term;
};
OracleComparison compare_with_oracle(const hoiopt::Scene& scene, const std::vector<PoseTrajectory>& trajectories,
                                     const hoiopt::LossWeights& weights = {});

/// Central differences against the evaluator's gradient. Parameters whose
/// evaluations at +-h or +-exclusion change any discrete choice (signature)
/// are skipped.
struct GradientCheck {
  int checked = 0;
  int skipped = 0;
  double worst = 0.0;
  std::size_t worst_index = 0;
};
GradientCheck check_gradient(const hoiopt::LossEvaluator& evaluator, const hoiopt::TrajectoryParams& params,
                             double h = 1e-5, double floor = 1e-6, double exclusion = 1e-4);

/// Depth point maps whose human points are the body vertices pulled back
/// through `truth` (so aligning them should recover `truth`), plus the
/// projected body as the human mask.
struct AlignFixture {
  std::vector<PointCloud> point_maps;
  std::vector<std::vector<Vec2>> pixels;
};
AlignFixture align_fixture(const hoiopt::HumanMotionSequence& motion, const CameraIntrinsics& intrinsics,
                           const std::vector<hoiopt::Similarity>& truth);

/// Random similarity with scale in [0.5, 2], rotation up to `max_angle` and
/// translation of norm up to `max_shift`.
hoiopt::Similarity random_similarity(std::mt19937_64& rng, double max_angle, double max_shift);

}  // namespace affordfit::testing
