#include "hamplug/integrator.hpp"

#include <cmath>

namespace hamplug {

BoxRegion::BoxRegion(int dim, double radius, double z_lo, double z_hi)
    : dim_(dim), radius_(radius), z_lo_(z_lo), z_hi_(z_hi) {
  if (!(radius > 0.0) || !(z_hi > z_lo)) throw PreconditionError("degenerate box");
}

double BoxRegion::face_distance(const Vec& p) const {
  if (p.size() != dim_) throw DimensionMismatch("box point has wrong dimension");
  const double z = p[dim_ - 1];
  return std::max({transverse_norm(p) - radius_, z - z_hi_, z_lo_ - z});
}

ExitRegion::Face BoxRegion::classify(const Vec& p) const {
  const double z = p[dim_ - 1];
  const double side = transverse_norm(p) - radius_;
  const double top = z - z_hi_;
  const double bottom = z_lo_ - z;
  if (top >= side && top >= bottom) return Face::Top;
  if (bottom >= side) return Face::Bottom;
  return Face::Side;
}

double BoxRegion::face_residual(const Vec& p, Face face) const {
  switch (face) {
    case Face::Top: return p[dim_ - 1] - z_hi_;
    case Face::Bottom: return z_lo_ - p[dim_ - 1];
    case Face::Side: return transverse_norm(p) - radius_;
    case Face::None: break;
  }
  return face_distance(p);
}

std::string to_string(TraverseStatus s) {
  switch (s) {
    case TraverseStatus::Traversed: return "Traversed";
    case TraverseStatus::Trapped: return "Trapped";
    case TraverseStatus::SideExit: return "SideExit";
    case TraverseStatus::BottomExit: return "BottomExit";
    case TraverseStatus::Grazing: return "Grazing";
    case TraverseStatus::Failed: return "Failed";
  }
  return "Failed";
}

TraverseStatus traverse_status_from_string(const std::string& s) {
  for (auto st : {TraverseStatus::Traversed, TraverseStatus::Trapped, TraverseStatus::SideExit,
                  TraverseStatus::BottomExit, TraverseStatus::Grazing, TraverseStatus::Failed}) {
    if (to_string(st) == s) return st;
  }
  throw PreconditionError("unknown traverse status '" + s + "'");
}

}  // namespace hamplug
