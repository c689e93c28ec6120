#include "affordfit/error.hpp"
#include "loss_internal.hpp"

#include <ceres/jet.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace affordfit::hoiopt {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t mix(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) {
  std::uint64_t h = splitmix(seed);
  for (std::uint64_t v : {a, b, c, d}) h = splitmix(h ^ v);
  return h;
}

// Uniform subset of at most `cap` elements, kept in original order.
template <typename P>
std::vector<P> subsample(const std::vector<P>& points, int cap, std::uint64_t seed) {
  const std::size_t n = points.size();
  if (cap <= 0 || n <= static_cast<std::size_t>(cap)) return points;
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::uint64_t state = seed;
  for (std::size_t i = 0; i < static_cast<std::size_t>(cap); ++i) {
    state = splitmix(state);
    const std::size_t j = i + state % (n - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(cap);
  std::sort(idx.begin(), idx.end());
  std::vector<P> out;
  out.reserve(cap);
  for (std::size_t i : idx) out.push_back(points[i]);
  return out;
}

std::vector<Vec3> points_with_label(const std::vector<Vec3>& points, const std::vector<int>& labels, int label) {
  std::vector<Vec3> out;
  for (std::size_t i = 0; i < points.size(); ++i)
    if (labels[i] == label) out.push_back(points[i]);
  return out;
}

enum Kind : std::uint64_t { kCloud = 1, kPartCloud, kMask, kPartMask, kModel };

void build_object(LossEvaluator::Impl& impl, ObjectData& data, const ObjectModel& model, int object_index) {
  data.id = model.id;
  data.all_points = model.cloud.points;
  data.all_labels = model.cloud.labels;
  data.sdf = model.sdf ? &*model.sdf : nullptr;

  // Fit-term model points, subsampled per part when the cloud exceeds the cap.
  const int cap = impl.options.max_points;
  const int n = static_cast<int>(model.cloud.size());
  const int np = static_cast<int>(model.parts.size());
  data.parts.assign(np, {});
  std::vector<std::vector<int>> members(np);
  for (int i = 0; i < n; ++i) members[model.cloud.labels[i]].push_back(i);
  std::vector<int> keep;
  for (int p = 0; p < np; ++p) {
    std::vector<int> chosen = members[p];
    if (cap > 0 && n > cap) {
      const int part_cap = std::max(16, static_cast<int>(static_cast<long long>(cap) * members[p].size() / n));
      chosen = subsample(members[p], part_cap, mix(impl.options.seed, object_index, 0, kModel, p));
    }
    keep.insert(keep.end(), chosen.begin(), chosen.end());
  }
  std::sort(keep.begin(), keep.end());
  data.points.reserve(keep.size());
  for (int i : keep) {
    const int label = model.cloud.labels[i];
    data.parts[label].indices.push_back(static_cast<int>(data.points.size()));
    data.parts[label].points.push_back(model.cloud.points[i]);
    data.points.push_back(model.cloud.points[i]);
  }
  data.tree = KdTree3(data.points);
  for (auto& part : data.parts) part.tree = KdTree3(part.points);
}

void build_targets(LossEvaluator::Impl& impl, ObjectData& data, const ObjectModel& model,
                   const std::vector<FrameObservation>& frames, int object_index) {
  const int cap = impl.options.max_points;
  const std::uint64_t seed = impl.options.seed;
  data.frames.resize(frames.size());
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const FrameObservation& f = frames[t];
    FrameTargets& target = data.frames[t];
    auto cloud = [&](const std::vector<Vec3>& pts, std::uint64_t kind, std::uint64_t part) {
      Cloud3 c;
      c.points = subsample(pts, cap, mix(seed, object_index, t, kind, part));
      c.tree = KdTree3(c.points);
      return c;
    };
    auto pixels = [&](const std::vector<Vec2>& pts, std::uint64_t kind, std::uint64_t part) {
      Pixels c;
      c.points = subsample(pts, cap, mix(seed, object_index, t, kind, part));
      c.tree = KdTree2(c.points);
      return c;
    };
    auto part_index = [&](const std::string& label) {
      const int p = model.part_index(label);
      if (p < 0) {
        throw Error(ErrorCode::ReferenceError, "observation part '" + label + "' is not a part of '" + model.id + "'");
      }
      return p;
    };
    if (!f.cloud.empty()) target.cloud = cloud(f.cloud, kCloud, 0);
    if (!f.mask.empty()) target.mask = pixels(f.mask, kMask, 0);
    for (const auto& [label, pts] : f.part_clouds) {
      const int p = part_index(label);
      if (!pts.empty() && !data.parts[p].points.empty()) target.part_clouds.emplace_back(p, cloud(pts, kPartCloud, p));
    }
    for (const auto& [label, px] : f.part_masks) {
      const int p = part_index(label);
      if (!px.empty() && !data.parts[p].points.empty()) target.part_masks.emplace_back(p, pixels(px, kPartMask, p));
    }
  }
}

int object_slot(const std::vector<std::string>& ids, const std::string& id) {
  const auto it = std::find(ids.begin(), ids.end(), id);
  if (it == ids.end()) throw Error(ErrorCode::BindingError, id);
  return static_cast<int>(it - ids.begin());
}

std::vector<Vec3> part_points(const ObjectData& o, const std::vector<std::string>& parts, const std::string& label) {
  const auto it = std::find(parts.begin(), parts.end(), label);
  std::vector<Vec3> pts;
  if (it != parts.end()) pts = points_with_label(o.all_points, o.all_labels, static_cast<int>(it - parts.begin()));
  if (pts.empty()) throw Error(ErrorCode::BindingError, label);
  return pts;
}

}  // namespace

LossEvaluator::LossEvaluator(const LossInputs& in, const LossWeights& weights, const LossOptions& options)
    : impl_(std::make_unique<Impl>()) {
  Impl& impl = *impl_;
  impl.frame_count = in.frame_count;
  impl.weights = weights;
  impl.options = options;
  weights.validate();
  if (impl.frame_count < 1) throw Error(ErrorCode::TooFewFrames, "scene needs at least one frame");

  static const std::vector<ObjectModel> kNoObjects;
  const auto& models = in.objects ? *in.objects : kNoObjects;
  impl.objects.resize(models.size());
  for (std::size_t o = 0; o < models.size(); ++o) {
    check_cloud(models[o].cloud);
    if (!models[o].cloud.labeled()) {
      throw Error(ErrorCode::SchemaError, "object '" + models[o].id + "' cloud has no part labels");
    }
    for (int label : models[o].cloud.labels) {
      if (label < 0 || label >= static_cast<int>(models[o].parts.size()))
        throw Error(ErrorCode::SchemaError, "object '" + models[o].id + "' has a label outside its part list");
    }
    impl.ids.push_back(models[o].id);
    build_object(impl, impl.objects[o], models[o], static_cast<int>(o));
  }

  if (in.observations && !in.observations->objects.empty()) {
    const ObservationBundle& obs = *in.observations;
    obs.intrinsics.validate();
    impl.intrinsics = obs.intrinsics;
    impl.pixel_scale = options.pixel_scale > 0.0 ? options.pixel_scale : 1.0 / obs.intrinsics.fx;
    impl.has_observations = true;
    for (const auto& [id, frames] : obs.objects) {
      const int o = object_slot(impl.ids, id);
      if (static_cast<int>(frames.size()) != impl.frame_count) {
        throw Error(ErrorCode::FrameCountMismatch, "observations for '" + id + "' do not cover every frame");
      }
      build_targets(impl, impl.objects[o], models[o], frames, o);
    }
  }

  if (in.humans) {
    for (const auto& h : *in.humans) {
      if (h.frame_count() != impl.frame_count) {
        throw Error(ErrorCode::FrameCountMismatch, "human '" + h.id + "' frame count differs from the scene");
      }
      HumanData d;
      d.id = h.id;
      for (const auto& f : h.frames) {
        d.parts.push_back(f.parts);
        d.vertices.push_back(f.vertices);
      }
      impl.humans.push_back(std::move(d));
    }
  }

  if (in.constraints) {
    impl.has_motion = true;
    for (const auto& m : in.constraints->motion) {
      const auto it = std::find(impl.ids.begin(), impl.ids.end(), m.object);
      if (it == impl.ids.end()) continue;
      impl.objects[it - impl.ids.begin()].rotates = m.rotates;
      impl.objects[it - impl.ids.begin()].translates = m.translates;
    }
    for (const auto& c : in.constraints->contacts) {
      if (c.first.entity != pag::EntityKind::object) {
        throw Error(ErrorCode::BindingError, c.first.label);
      }
      EdgeData e;
      e.first_object = object_slot(impl.ids, c.first.owner);
      e.first_points = part_points(impl.objects[e.first_object], models[e.first_object].parts, c.first.label);
      if (c.second.entity == pag::EntityKind::object) {
        e.second_object = object_slot(impl.ids, c.second.owner);
        e.second_points = part_points(impl.objects[e.second_object], models[e.second_object].parts, c.second.label);
      } else {
        const auto it = std::find_if(impl.humans.begin(), impl.humans.end(),
                                     [&](const HumanData& h) { return h.id == c.second.owner; });
        if (it == impl.humans.end()) throw Error(ErrorCode::BindingError, c.second.owner);
        e.human = static_cast<int>(it - impl.humans.begin());
        e.human_label = c.second.label;
        for (const auto& frame : it->parts) {
          const auto pit = frame.find(e.human_label);
          if (pit == frame.end() || pit->second.empty()) throw Error(ErrorCode::BindingError, e.human_label);
        }
      }
      e.continuous = c.continuous;
      e.static_contact = c.static_contact;
      impl.edges.push_back(std::move(e));
    }
  }
}

LossEvaluator::LossEvaluator(const Scene& scene, const pag::ConstraintSet& constraints, const LossWeights& weights,
                             const LossOptions& options)
    : LossEvaluator(LossInputs{scene.frame_count(), &scene.objects, &scene.observations, &scene.humans, &constraints},
                    weights, options) {}

LossEvaluator::~LossEvaluator() = default;
LossEvaluator::LossEvaluator(LossEvaluator&&) noexcept = default;
LossEvaluator& LossEvaluator::operator=(LossEvaluator&&) noexcept = default;

const std::vector<std::string>& LossEvaluator::object_ids() const { return impl_->ids; }
int LossEvaluator::frame_count() const { return impl_->frame_count; }
const LossWeights& LossEvaluator::weights() const { return impl_->weights; }
const LossOptions& LossEvaluator::options() const { return impl_->options; }

namespace {

int smooth_min_frames(const LossEvaluator::Impl& impl) {
  int need = 0;
  for (const auto& o : impl.objects) need = std::max(need, (o.rotates || o.translates) ? 3 : 2);
  return need;
}

}  // namespace

LossBreakdown LossEvaluator::evaluate(const TrajectoryParams& params, std::vector<double>* gradient,
                                      std::uint64_t* signature) const {
  const Impl& impl = *impl_;
  const int T = impl.frame_count;
  const int O = static_cast<int>(impl.objects.size());
  if (params.frame_count != T || params.objects != impl.ids) {
    throw Error(ErrorCode::FrameCountMismatch, "parameters do not match the scene's objects and frames");
  }
  for (double v : params.values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteLoss, "non-finite trajectory parameter");
  }

  PoseTable poses;
  poses.frames = T;
  poses.poses.resize(static_cast<std::size_t>(O) * T);
  for (int o = 0; o < O; ++o)
    for (int t = 0; t < T; ++t) poses.poses[static_cast<std::size_t>(o) * T + t] = params.pose(o, t);

  std::vector<PoseGrad> grads;
  if (gradient) grads.assign(poses.poses.size(), PoseGrad{});
  std::vector<PoseGrad>* g = gradient ? &grads : nullptr;
  Hasher hasher;
  Hasher* h = signature ? &hasher : nullptr;

  const LossWeights& w = impl.weights;
  auto wanted = [&](double weight) { return weight > 0.0 || !impl.options.skip_unweighted; };

  LossBreakdown out;
  if (wanted(w.fit)) fit_terms(impl, poses, w.fit, g, h, out);
  if (wanted(w.contact)) {
    const TermResult c = contact_terms(impl, poses, w.contact, g, h);
    out.contact_continuity = c.value;
    out.contact_dynamics = c.second;
  }
  if (wanted(w.penetration)) out.penetration = penetration_term(impl, poses, w.penetration, g, h);

  if (gradient) {
    gradient->assign(params.values.size(), 0.0);
    using Jet6 = ceres::Jet<double, 6>;
    for (int o = 0; o < O; ++o) {
      for (int t = 0; t < T; ++t) {
        const PoseGrad& pg = grads[static_cast<std::size_t>(o) * T + t];
        const double* b = params.block(o, t);
        Jet6 a[6];
        for (int k = 0; k < 6; ++k) a[k] = Jet6(b[k], k);
        const Eigen::Matrix<Jet6, 3, 3> r = decode_rotation_6d<Jet6>(a);
        double* gb = gradient->data() + params.offset(o, t);
        for (int i = 0; i < 3; ++i) {
          for (int j = 0; j < 3; ++j) {
            if (pg.rotation(i, j) == 0.0) continue;
            for (int k = 0; k < 6; ++k) gb[k] += pg.rotation(i, j) * r(i, j).v[k];
          }
        }
        for (int k = 0; k < 3; ++k) gb[6 + k] += pg.translation[k];
      }
    }
  }

  if (wanted(w.smooth) && O > 0) {
    if (T >= smooth_min_frames(impl)) {
      const TermResult s = smooth_terms(impl, params, w.smooth, gradient, h);
      out.smooth_rotation = s.value;
      out.smooth_translation = s.second;
    } else if (w.smooth > 0.0) {
      throw Error(ErrorCode::TooFewFrames, "smoothness needs at least " + std::to_string(smooth_min_frames(impl)) +
                                               " frames");
    }
  }

  out.total = out.weighted(w);
  if (!std::isfinite(out.total)) throw Error(ErrorCode::NonFiniteLoss, "loss evaluated to a non-finite value");
  if (gradient) {
    for (double v : *gradient)
      if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteLoss, "gradient has non-finite entries");
  }
  if (signature) *signature = hasher.state;
  return out;
}

LossBreakdown loss_fit(const TrajectoryParams& params, const ObservationBundle& observations,
                       const std::vector<ObjectModel>& objects, const LossOptions& options) {
  LossInputs in;
  in.frame_count = params.frame_count;
  in.objects = &objects;
  in.observations = &observations;
  LossOptions o = options;
  o.skip_unweighted = true;
  return LossEvaluator(in, LossWeights{1.0, 0.0, 0.0, 0.0}, o).evaluate(params);
}

LossBreakdown loss_contact(const TrajectoryParams& params, const pag::ConstraintSet& constraints,
                           const std::vector<HumanMotionSequence>& humans, const std::vector<ObjectModel>& objects,
                           const LossOptions& options) {
  LossInputs in;
  in.frame_count = params.frame_count;
  in.objects = &objects;
  in.humans = &humans;
  in.constraints = &constraints;
  LossOptions o = options;
  o.skip_unweighted = true;
  return LossEvaluator(in, LossWeights{0.0, 1.0, 0.0, 0.0}, o).evaluate(params);
}

double loss_penetration(const TrajectoryParams& params, const std::vector<ObjectModel>& objects,
                        const std::vector<HumanMotionSequence>& humans) {
  LossInputs in;
  in.frame_count = params.frame_count;
  in.objects = &objects;
  in.humans = &humans;
  LossOptions o;
  o.skip_unweighted = true;
  return LossEvaluator(in, LossWeights{0.0, 0.0, 1.0, 0.0}, o).evaluate(params).penetration;
}

LossBreakdown loss_smooth(const TrajectoryParams& params, const std::vector<pag::MotionState>& motion) {
  // Smoothness only reads poses, so stand-in single-point objects suffice.
  std::vector<ObjectModel> objects;
  for (const auto& id : params.objects) {
    ObjectModel m;
    m.id = id;
    m.parts = {"body"};
    m.cloud.points = {Vec3::Zero()};
    m.cloud.labels = {0};
    objects.push_back(std::move(m));
  }
  pag::ConstraintSet constraints;
  constraints.motion = motion;
  LossInputs in;
  in.frame_count = params.frame_count;
  in.objects = &objects;
  in.constraints = &constraints;
  LossOptions o;
  o.skip_unweighted = true;
  return LossEvaluator(in, LossWeights{0.0, 0.0, 0.0, 1.0}, o).evaluate(params);
}

LossBreakdown total_loss(const TrajectoryParams& params, const Scene& scene, const LossWeights& weights,
                         const LossOptions& options) {
  const pag::ConstraintSet constraints = scene.validate();
  return LossEvaluator(scene, constraints, weights, options).evaluate(params);
}

}  // namespace affordfit::hoiopt
