#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "hdys/rbd/muscle.hpp"
#include "hdys/rbd/tree.hpp"

namespace hdys::rbd {

inline constexpr const char* kTreeSchema = "rbd-tree/1";

struct TreeDescription {
  KinematicTree tree;
  std::optional<MuscleSet> muscles;
};

std::string tree_to_json(const KinematicTree& tree, const MuscleSet* muscles = nullptr);
/// Throws FormatError on malformed JSON or a wrong schema tag, ConfigError
/// on an invalid tree.
TreeDescription tree_from_json(const std::string& text);

void save_tree(const std::filesystem::path& path, const KinematicTree& tree, const MuscleSet* muscles = nullptr);
TreeDescription load_tree(const std::filesystem::path& path);

}  // namespace hdys::rbd
