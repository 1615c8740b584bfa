#include "hdys/rbd/tree_io.hpp"

#include <json.hpp>

#include "hdys/common/error.hpp"
#include "hdys/common/util.hpp"

namespace hdys::rbd {
namespace {

using nlohmann::json;

json vec(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json mat(const Mat3& m) {
  std::vector<double> out;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out.push_back(m(r, c));
  return out;
}

std::vector<double> numbers(const json& j, const char* key, std::size_t expected) {
  if (!j.contains(key)) throw FormatError(std::string("tree file: missing '") + key + "'");
  auto v = j.at(key).get<std::vector<double>>();
  if (expected != 0 && v.size() != expected)
    throw FormatError(std::string("tree file: '") + key + "' must have " + std::to_string(expected) + " entries");
  return v;
}

Vec3 vec3(const json& j, const char* key, const Vec3& fallback) {
  if (!j.contains(key)) return fallback;
  const auto v = numbers(j, key, 3);
  return Vec3(v[0], v[1], v[2]);
}

Mat3 mat3(const json& j, const char* key, const Mat3& fallback) {
  if (!j.contains(key)) return fallback;
  const auto v = numbers(j, key, 9);
  Mat3 m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m(r, c) = v[3 * r + c];
  return m;
}

}  // namespace

std::string tree_to_json(const KinematicTree& tree, const MuscleSet* muscles) {
  json doc;
  doc["schema"] = kTreeSchema;
  doc["name"] = tree.name();
  doc["gravity"] = vec(tree.gravity());
  json links = json::array();
  for (const auto& l : tree.links()) {
    json j;
    j["name"] = l.name;
    j["parent"] = l.parent;
    j["joint"] = joint_name(l.joint);
    j["axis"] = vec(l.axis);
    j["origin"] = vec(l.origin);
    j["rotation"] = mat(l.rotation);
    j["mass"] = l.mass;
    j["com"] = vec(l.com);
    j["inertia"] = mat(l.inertia);
    links.push_back(j);
  }
  doc["links"] = links;
  json markers = json::array();
  for (const auto& m : tree.markers()) markers.push_back({{"name", m.name}, {"link", m.link}, {"offset", vec(m.offset)}});
  doc["markers"] = markers;
  if (muscles) {
    json ms = json::array();
    for (const auto& m : muscles->muscles())
      ms.push_back({{"name", m.name}, {"moment_arm", vec(m.moment_arm)}, {"max_force", m.max_force}});
    doc["muscles"] = ms;
  }
  return doc.dump(1);
}

TreeDescription tree_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("tree file: ") + e.what());
  }
  try {
    if (doc.value("schema", std::string()) != kTreeSchema)
      throw FormatError(std::string("tree file: expected schema '") + kTreeSchema + "'");
    std::vector<Link> links;
    for (const auto& j : doc.at("links")) {
      Link l;
      l.name = j.value("name", std::string());
      l.parent = j.value("parent", -1);
      l.joint = parse_joint(j.at("joint").get<std::string>());
      l.axis = vec3(j, "axis", l.axis);
      l.origin = vec3(j, "origin", l.origin);
      l.rotation = mat3(j, "rotation", l.rotation);
      l.mass = j.at("mass").get<double>();
      l.com = vec3(j, "com", l.com);
      l.inertia = mat3(j, "inertia", l.inertia);
      links.push_back(std::move(l));
    }
    std::vector<MarkerSite> markers;
    if (doc.contains("markers"))
      for (const auto& j : doc.at("markers"))
        markers.push_back({j.value("name", std::string()), j.at("link").get<int>(), vec3(j, "offset", Vec3::Zero())});
    const auto g = numbers(doc, "gravity", 3);
    TreeDescription out{KinematicTree(doc.value("name", std::string("tree")), std::move(links), Vec3(g[0], g[1], g[2]),
                                      std::move(markers)),
                        std::nullopt};
    if (doc.contains("muscles")) {
      std::vector<Muscle> ms;
      for (const auto& j : doc.at("muscles")) {
        const auto arm = numbers(j, "moment_arm", 0);
        ms.push_back({j.value("name", std::string()), Eigen::Map<const VecX>(arm.data(), static_cast<Eigen::Index>(arm.size())),
                      j.at("max_force").get<double>()});
      }
      out.muscles = MuscleSet(std::move(ms), out.tree.actuated_dof());
    }
    return out;
  } catch (const json::exception& e) {
    throw FormatError(std::string("tree file: ") + e.what());
  }
}

void save_tree(const std::filesystem::path& path, const KinematicTree& tree, const MuscleSet* muscles) {
  write_file_atomic(path, tree_to_json(tree, muscles));
}

TreeDescription load_tree(const std::filesystem::path& path) { return tree_from_json(read_file(path)); }

}  // namespace hdys::rbd
