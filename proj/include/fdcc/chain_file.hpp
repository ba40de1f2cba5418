#pragma once

#include "fdcc/kinematics.hpp"

#include <string>

namespace fdcc {

/// Reads the declarative chain format (see docs/chain_format.md):
///
///   [link <name>]          one section per joint, base to tip
///   offset  = x y z roll pitch yaw   parent → joint frame (m, rad)
///   axis    = ax ay az               joint axis in the joint frame
///   mass    = kg
///   com     = x y z                  centre of mass in the joint frame
///   inertia = ixx iyy izz            diagonal inertia about the com
///
///   [tip]
///   offset  = x y z roll pitch yaw   last joint → flange
///
/// Throws ini::ParseError with the offending line.
KinematicChain parse_chain(const std::string& text, const std::string& source);
KinematicChain load_chain(const std::string& path);

/// Isometry from a translation and fixed-axis roll/pitch/yaw.
Eigen::Isometry3d make_transform(const Vector3d& xyz, const Vector3d& rpy);

}  // namespace fdcc
