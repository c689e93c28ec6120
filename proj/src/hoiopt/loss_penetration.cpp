#include "loss_internal.hpp"

namespace affordfit::hoiopt {

double penetration_term(const LossEvaluator::Impl& impl, const PoseTable& poses, double scale,
                        std::vector<PoseGrad>* grads, Hasher* hash) {
  const int T = impl.frame_count;
  double total = 0.0;
  for (int o = 0; o < static_cast<int>(impl.objects.size()); ++o) {
    const SdfGrid* sdf = impl.objects[o].sdf;
    if (!sdf) continue;
    for (const HumanData& human : impl.humans) {
      std::vector<double> depth(T, 0.0);
      std::vector<PoseGrad> g(grads ? T : 0);
      std::vector<Hasher> h(hash ? T : 0);
      for_each_index(T, impl.options.exec, [&](int t) {
        const RigidPose& pose = poses.at(o, t);
        const Mat3 rt = pose.rotation.transpose();
        for (const Vec3& v : human.vertices[t]) {
          const Vec3 u = v - pose.translation;
          const SdfSample s = sample_sdf(*sdf, rt * u);
          const bool inside = s.value < 0.0;
          if (hash) {
            h[t].add(static_cast<std::int64_t>(s.cell));
            h[t].add(inside ? 1 : 0);
          }
          if (!inside) continue;
          depth[t] -= s.value;
          if (grads) {
            const Vec3 d = -(scale / T) * s.gradient;  // dL/d(canonical point)
            g[t].rotation.noalias() += u * d.transpose();
            g[t].translation -= pose.rotation * d;
          }
        }
      });
      for (int t = 0; t < T; ++t) {
        total += depth[t] / T;
        if (grads) (*grads)[static_cast<std::size_t>(o) * T + t] += g[t];
        if (hash) hash->add(h[t].state);
      }
    }
  }
  return total;
}

}  // namespace affordfit::hoiopt
