#pragma once

#include "affordfit/io/ply.hpp"
#include "affordfit/types.hpp"

namespace affordfit {

/// Geodesic sphere from a subdivided icosahedron; vertices lie on the sphere.
TriangleMesh make_icosphere(double radius, int subdivisions, const Vec3& center = Vec3::Zero());

/// Axis-aligned box with outward-facing triangles.
TriangleMesh make_box_mesh(const Vec3& size, const Vec3& center = Vec3::Zero());

/// Every undirected edge is shared by exactly two faces.
bool is_watertight(const TriangleMesh& mesh);

double triangle_area(const TriangleMesh& mesh, int face);

/// Closest point on triangle (a, b, c) to p.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

}  // namespace affordfit
