#include "affordfit/error.hpp"
#include "affordfit/synth/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace affordfit::synth {
namespace {

double box_sdf(const Vec3& p, const Vec3& center, const Vec3& size) {
  const Vec3 q = (p - center).cwiseAbs() - 0.5 * size;
  return q.cwiseMax(0.0).norm() + std::min(q.maxCoeff(), 0.0);
}

double cylinder_sdf(const Vec3& p, const Vec3& center, double radius, double height) {
  const Vec3 d = p - center;
  const Vec2 q(std::hypot(d.x(), d.z()) - radius, std::abs(d.y()) - 0.5 * height);
  return q.cwiseMax(0.0).norm() + std::min(q.maxCoeff(), 0.0);
}

double sdf_of(const Primitive& s, const Vec3& p) {
  switch (s.shape) {
    case Shape::box: return box_sdf(p, s.center, s.size);
    case Shape::cylinder: return cylinder_sdf(p, s.center, s.radius, s.height);
    case Shape::sphere: return (p - s.center).norm() - s.radius;
  }
  return 0.0;
}

int cells(double extent, double spacing) { return std::max(1, static_cast<int>(std::lround(extent / spacing))); }

// Cell-centred grid on one face of a box: axes (u, v) span the face, w is the normal.
void sample_face(const Primitive& s, int u, int v, int w, double side, double spacing, std::vector<Vec3>& out) {
  const int nu = cells(s.size[u], spacing);
  const int nv = cells(s.size[v], spacing);
  for (int i = 0; i < nu; ++i) {
    for (int j = 0; j < nv; ++j) {
      Vec3 p = s.center;
      p[u] += s.size[u] * ((i + 0.5) / nu - 0.5);
      p[v] += s.size[v] * ((j + 0.5) / nv - 0.5);
      p[w] += side * 0.5 * s.size[w];
      out.push_back(p);
    }
  }
}

void sample_disc(const Primitive& s, double y, double spacing, std::vector<Vec3>& out) {
  const int rings = cells(s.radius, spacing);
  for (int k = 0; k < rings; ++k) {
    const double r = s.radius * (k + 0.5) / rings;
    const int n = std::max(3, cells(2.0 * std::numbers::pi * r, spacing));
    for (int i = 0; i < n; ++i) {
      const double a = 2.0 * std::numbers::pi * (i + 0.5 * (k % 2)) / n;
      out.push_back(s.center + Vec3(r * std::cos(a), y, r * std::sin(a)));
    }
  }
}

std::vector<Vec3> sample_surface(const Primitive& s, double spacing) {
  std::vector<Vec3> out;
  switch (s.shape) {
    case Shape::box:
      for (double side : {-1.0, 1.0}) {
        sample_face(s, 1, 2, 0, side, spacing, out);
        sample_face(s, 0, 2, 1, side, spacing, out);
        sample_face(s, 0, 1, 2, side, spacing, out);
      }
      break;
    case Shape::cylinder: {
      const int na = std::max(3, cells(2.0 * std::numbers::pi * s.radius, spacing));
      const int nh = cells(s.height, spacing);
      for (int j = 0; j < nh; ++j) {
        const double y = s.height * ((j + 0.5) / nh - 0.5);
        for (int i = 0; i < na; ++i) {
          const double a = 2.0 * std::numbers::pi * (i + 0.5) / na;
          out.push_back(s.center + Vec3(s.radius * std::cos(a), y, s.radius * std::sin(a)));
        }
      }
      sample_disc(s, -0.5 * s.height, spacing, out);
      sample_disc(s, 0.5 * s.height, spacing, out);
      break;
    }
    case Shape::sphere: {
      const int n = std::max(8, static_cast<int>(std::lround(4.0 * std::numbers::pi * s.radius * s.radius /
                                                             (spacing * spacing))));
      const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
      for (int i = 0; i < n; ++i) {
        const double y = 1.0 - 2.0 * (i + 0.5) / n;
        const double r = std::sqrt(std::max(0.0, 1.0 - y * y));
        const double a = golden * i;
        out.push_back(s.center + s.radius * Vec3(r * std::cos(a), y, r * std::sin(a)));
      }
      break;
    }
  }
  return out;
}

void check_primitive(const ObjectSpec& o, const Primitive& s) {
  const std::string where = "object '" + o.id + "' part '" + s.part + "'";
  if (s.part.empty()) throw Error(ErrorCode::SchemaError, "object '" + o.id + "': primitive without a part name");
  const bool ok = s.shape == Shape::box ? (s.size.array() > 0.0).all()
                  : s.shape == Shape::cylinder ? s.radius > 0.0 && s.height > 0.0
                                               : s.radius > 0.0;
  if (!ok || !s.center.allFinite()) throw Error(ErrorCode::SchemaError, where + ": non-positive dimensions");
  if (s.spacing < 0.0) throw Error(ErrorCode::SchemaError, where + ": negative spacing");
}

}  // namespace

double primitive_sdf(const ObjectSpec& spec, const Vec3& p) {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& s : spec.primitives) d = std::min(d, sdf_of(s, p));
  return d;
}

hoiopt::ObjectModel build_object(const ObjectSpec& spec) {
  if (spec.primitives.empty()) throw Error(ErrorCode::SchemaError, "object '" + spec.id + "' has no primitives");
  if (!(spec.spacing > 0.0)) throw Error(ErrorCode::SchemaError, "object '" + spec.id + "': spacing must be positive");
  hoiopt::ObjectModel model;
  model.id = spec.id;
  for (std::size_t k = 0; k < spec.primitives.size(); ++k) {
    const auto& s = spec.primitives[k];
    check_primitive(spec, s);
    auto it = std::find(model.parts.begin(), model.parts.end(), s.part);
    const int label = static_cast<int>(it - model.parts.begin());
    if (it == model.parts.end()) model.parts.push_back(s.part);
    for (const Vec3& p : sample_surface(s, s.spacing > 0.0 ? s.spacing : spec.spacing)) {
      // Drop samples inside another primitive of the union or on a face it covers.
      bool buried = false;
      for (std::size_t m = 0; m < spec.primitives.size() && !buried; ++m)
        buried = m != k && sdf_of(spec.primitives[m], p) < 1e-9;
      if (buried) continue;
      model.cloud.points.push_back(p);
      model.cloud.labels.push_back(label);
    }
  }
  return model;
}

}  // namespace affordfit::synth
