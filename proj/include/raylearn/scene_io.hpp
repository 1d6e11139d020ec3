#pragma once

#include <string>

#include "raylearn/scene.hpp"

namespace raylearn {

// JSON scene description: camera, named materials, primitives referencing
// materials by name. See README for the schema. Parse or validation problems
// raise IoError.
Scene load_scene_file(const std::string& path);
void save_scene_file(const Scene& scene, const std::string& path);

// Built-in id, or a path to a scene file when `spec` names an existing file.
Scene resolve_scene(const std::string& spec);

}  // namespace raylearn
