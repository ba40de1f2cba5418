#include "fdcc/chain_file.hpp"

#include "fdcc/ini.hpp"

#include <map>

namespace fdcc {

Eigen::Isometry3d make_transform(const Vector3d& xyz, const Vector3d& rpy) {
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  t.linear() = rpy_to_matrix(rpy.x(), rpy.y(), rpy.z());
  t.translation() = xyz;
  return t;
}

namespace {

std::vector<double> numbers(const ini::Entry& e, std::size_t count, const std::string& source) {
  std::vector<double> v;
  try {
    v = ini::parse_numbers(e.value);
  } catch (const std::invalid_argument& ex) {
    throw ini::ParseError(source, e.line, e.key + ": " + ex.what());
  }
  if (v.size() != count) {
    throw ini::ParseError(source, e.line,
                          e.key + ": expected " + std::to_string(count) + " numbers, got " + std::to_string(v.size()));
  }
  return v;
}

}  // namespace

KinematicChain parse_chain(const std::string& text, const std::string& source) {
  const std::vector<ini::Section> sections = ini::parse(text, source);
  std::vector<Link> links;
  Eigen::Isometry3d tip = Eigen::Isometry3d::Identity();
  bool have_tip = false;

  for (const ini::Entry& e : sections.front().entries) {
    if (e.key != "schema_version" && e.key != "name") {
      throw ini::ParseError(source, e.line, "unknown top-level key '" + e.key + "'");
    }
    if (e.key == "schema_version" && e.value != "1") {
      throw ini::ParseError(source, e.line, "unsupported schema_version '" + e.value + "'");
    }
  }

  for (std::size_t s = 1; s < sections.size(); ++s) {
    const ini::Section& sec = sections[s];
    if (sec.kind == "link") {
      Link l;
      std::map<std::string, int> seen;
      for (const ini::Entry& e : sec.entries) {
        seen[e.key] = e.line;
        if (e.key == "offset") {
          const auto v = numbers(e, 6, source);
          l.parent_offset = make_transform({v[0], v[1], v[2]}, {v[3], v[4], v[5]});
        } else if (e.key == "axis") {
          const auto v = numbers(e, 3, source);
          const Vector3d a(v[0], v[1], v[2]);
          if (a.norm() == 0.0) throw ini::ParseError(source, e.line, "axis must be non-zero");
          l.joint_axis = a.normalized();
        } else if (e.key == "mass") {
          l.mass = numbers(e, 1, source)[0];
          if (l.mass < 0.0) throw ini::ParseError(source, e.line, "mass must be non-negative");
        } else if (e.key == "com") {
          const auto v = numbers(e, 3, source);
          l.com_offset = Vector3d(v[0], v[1], v[2]);
        } else if (e.key == "inertia") {
          const auto v = numbers(e, 3, source);
          if (v[0] < 0.0 || v[1] < 0.0 || v[2] < 0.0) {
            throw ini::ParseError(source, e.line, "inertia diagonal must be non-negative");
          }
          l.inertia = Vector3d(v[0], v[1], v[2]).asDiagonal();
        } else {
          throw ini::ParseError(source, e.line, "unknown link key '" + e.key + "'");
        }
      }
      if (!seen.count("offset")) throw ini::ParseError(source, sec.line, "link '" + sec.name + "' has no offset");
      links.push_back(l);
    } else if (sec.kind == "tip") {
      for (const ini::Entry& e : sec.entries) {
        if (e.key != "offset") throw ini::ParseError(source, e.line, "unknown tip key '" + e.key + "'");
        const auto v = numbers(e, 6, source);
        tip = make_transform({v[0], v[1], v[2]}, {v[3], v[4], v[5]});
        have_tip = true;
      }
    } else {
      throw ini::ParseError(source, sec.line, "unknown section '" + sec.kind + "'");
    }
  }
  if (links.empty()) throw ini::ParseError(source, 1, "chain defines no links");
  if (!have_tip) throw ini::ParseError(source, 1, "chain has no [tip] section");
  try {
    return KinematicChain(std::move(links), tip);
  } catch (const ContractError& e) {
    throw ini::ParseError(source, 1, e.what());
  }
}

KinematicChain load_chain(const std::string& path) { return parse_chain(ini::read_file(path), path); }

}  // namespace fdcc
