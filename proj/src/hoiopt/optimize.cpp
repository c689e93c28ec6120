#include "affordfit/hoiopt/optimize.hpp"

#include "affordfit/error.hpp"

#include <cmath>
#include <numbers>
#include <optional>

namespace affordfit::hoiopt {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

double restart_yaw(const OptimizeConfig& config, std::uint64_t seed, int r) {
  if (!config.random_yaw) return 2.0 * std::numbers::pi * r / config.restarts;
  const std::uint64_t bits = splitmix(splitmix(seed) ^ static_cast<std::uint64_t>(r + 1));
  return 2.0 * std::numbers::pi * static_cast<double>(bits >> 11) * 0x1.0p-53;
}

struct Adam {
  std::vector<double> m;
  std::vector<double> v;
  int step = 0;

  explicit Adam(std::size_t n) : m(n, 0.0), v(n, 0.0) {}

  void update(std::vector<double>& x, const std::vector<double>& g, double lr) {
    constexpr double b1 = 0.9;
    constexpr double b2 = 0.999;
    constexpr double eps = 1e-8;
    ++step;
    const double c1 = 1.0 - std::pow(b1, step);
    const double c2 = 1.0 - std::pow(b2, step);
    for (std::size_t i = 0; i < x.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      x[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
    }
  }
};

}  // namespace

void OptimizeConfig::validate() const {
  if (steps < 1) throw Error(ErrorCode::ValidationError, "steps must be >= 1");
  if (restarts < 1) throw Error(ErrorCode::ValidationError, "restarts must be >= 1");
  if (!(learning_rate > 0.0)) throw Error(ErrorCode::ValidationError, "learning rate must be positive");
  if (max_points < 0) throw Error(ErrorCode::ValidationError, "max_points must be >= 0");
  if (!(softmin_temperature > 0.0)) throw Error(ErrorCode::ValidationError, "softmin temperature must be positive");
  if (trace_every < 1) throw Error(ErrorCode::ValidationError, "trace interval must be >= 1");
  weights.validate();
}

TrajectoryParams initial_params(const Scene& scene, double yaw) {
  std::vector<std::string> ids;
  for (const auto& o : scene.objects) ids.push_back(o.id);
  const int T = scene.frame_count();
  TrajectoryParams params(ids, T);
  const Mat3 r = axis_angle(kUpAxis, yaw);
  for (int o = 0; o < params.object_count(); ++o) {
    const ObjectModel& model = scene.objects[o];
    const Vec3 model_center = r * centroid(model.cloud.points);
    std::vector<std::optional<Vec3>> t_obs(T);
    const auto it = scene.observations.objects.find(model.id);
    if (it != scene.observations.objects.end()) {
      for (int t = 0; t < T && t < static_cast<int>(it->second.size()); ++t) {
        const FrameObservation& f = it->second[t];
        if (!f.cloud.empty()) {
          t_obs[t] = centroid(f.cloud) - model_center;
        } else if (!f.part_clouds.empty()) {
          std::vector<Vec3> all;
          for (const auto& [label, pts] : f.part_clouds) all.insert(all.end(), pts.begin(), pts.end());
          if (!all.empty()) t_obs[t] = centroid(all) - model_center;
        }
      }
    }
    std::optional<Vec3> first;
    for (const auto& v : t_obs)
      if (v && !first) first = v;
    Vec3 current = first.value_or(Vec3::Zero());
    for (int t = 0; t < T; ++t) {
      if (t_obs[t]) current = *t_obs[t];
      params.set_pose(o, t, {r, current});
    }
  }
  return params;
}

OptimizeResult optimize(const Scene& scene, const OptimizeConfig& config, std::uint64_t seed) {
  config.validate();
  const pag::ConstraintSet constraints = scene.validate();

  LossOptions exact;
  exact.soft_contact = false;
  exact.max_points = 0;
  exact.pixel_scale = config.pixel_scale;
  exact.exec = config.exec;
  const LossEvaluator reporter(scene, constraints, config.weights, exact);

  OptimizeResult result;
  result.objects = reporter.object_ids();
  std::vector<TrajectoryParams> finals;
  for (int r = 0; r < config.restarts; ++r) {
    RestartReport report;
    report.index = r;
    report.yaw = restart_yaw(config, seed, r);

    LossOptions soft;
    soft.soft_contact = true;
    soft.softmin_temperature = config.softmin_temperature;
    soft.max_points = config.max_points;
    soft.seed = splitmix(seed ^ (0x5eedull + static_cast<std::uint64_t>(r)));
    soft.pixel_scale = config.pixel_scale;
    soft.skip_unweighted = true;
    soft.exec = config.exec;

    TrajectoryParams params = initial_params(scene, report.yaw);
    try {
      const LossEvaluator evaluator(scene, constraints, config.weights, soft);
      Adam adam(params.values.size());
      std::vector<double> gradient;
      for (int step = 0; step < config.steps; ++step) {
        const double lr =
            config.learning_rate * 0.5 * (1.0 + std::cos(std::numbers::pi * step / static_cast<double>(config.steps)));
        const LossBreakdown loss = evaluator.evaluate(params, &gradient);
        if (step % config.trace_every == 0) result.trace.push_back({r, step, lr, false, loss});
        adam.update(params.values, gradient, lr);
      }
      report.final_loss = reporter.evaluate(params);
      report.completed = true;
      result.trace.push_back({r, config.steps, 0.0, true, report.final_loss});
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NonFiniteLoss && e.code() != ErrorCode::NonPositiveDepth) throw;
      report.error = std::string(to_string(e.code())) + ": " + e.what();
    }
    if (report.completed && (result.best_restart < 0 ||
                             report.final_loss.total < result.restarts[result.best_restart].final_loss.total)) {
      result.best_restart = r;
    }
    result.restarts.push_back(report);
    finals.push_back(std::move(params));
  }
  if (result.best_restart < 0) {
    throw Error(ErrorCode::NonFiniteLoss, "every restart failed; first failure: " + result.restarts.front().error);
  }
  result.trajectories = finals[result.best_restart].decode();
  result.final_loss = result.restarts[result.best_restart].final_loss;
  return result;
}

}  // namespace affordfit::hoiopt
