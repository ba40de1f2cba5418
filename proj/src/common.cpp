#include "fdcc/common.hpp"

namespace fdcc {

std::string to_string(Mode mode) { return mode == Mode::Position ? "position" : "velocity"; }

Mode mode_from_string(const std::string& text) {
  if (text == "position" || text == "Position" || text == "pos") return Mode::Position;
  if (text == "velocity" || text == "Velocity" || text == "vel") return Mode::Velocity;
  throw ContractError("unknown mode '" + text + "'");
}

Pose Pose::from_isometry(const Eigen::Isometry3d& t) {
  Pose p;
  p.position = t.translation();
  p.orientation = Eigen::Quaterniond(t.rotation()).normalized();
  return p;
}

Eigen::Isometry3d Pose::to_isometry() const {
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  t.linear() = orientation.toRotationMatrix();
  t.translation() = position;
  return t;
}

void require(bool condition, const std::string& message) {
  if (!condition) throw ContractError(message);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view text, std::uint64_t basis) {
  std::uint64_t h = basis;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace fdcc
