#pragma once

#include <string>
#include <vector>

#include "raylearn/scene.hpp"

namespace raylearn {

// Unit box open toward the camera, two spheres, one ceiling light.
// `glossy_sphere` swaps the larger sphere's material for a mirror-like lobe.
Scene make_cornell_scene(bool glossy_sphere);

// Four sealed rooms in a 2x2 facade, each lit by one bright and one dim
// ceiling light; the camera sees all four through the open front.
Scene make_split_room_scene();

// Enclosing emissive sphere with uniform albedo: every view direction
// converges to emission / (1 - albedo).
Scene make_furnace_scene(double albedo, double emission);

// One diffuse receiver under two symmetric lights whose emissions are 1:3,
// so ideal light-selection probabilities are (0.25, 0.75).
Scene make_bandit2_scene();

// ids: cornell-diffuse, cornell-glossy, split-room, furnace, bandit-2.
Scene scenes_builtin(const std::string& id);

std::vector<std::string> builtin_scene_ids();

// Room index (0..3) of a point in the split-room scene, nudged off shared
// walls along the viewing direction.
int split_room_index(const Vec3& position, const Vec3& toward_viewer);

}  // namespace raylearn
