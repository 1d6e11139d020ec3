#include "raylearn/scenes.hpp"

#include "raylearn/common.hpp"

namespace raylearn {

namespace {

Material diffuse(const std::string& name, Rgb albedo) {
  Material m;
  m.name = name;
  m.kind = Material::Kind::kDiffuse;
  m.albedo = albedo;
  return m;
}

Material emitter(const std::string& name, Rgb emission) {
  Material m;
  m.name = name;
  m.emission = emission;
  return m;
}

}  // namespace

Scene make_cornell_scene(bool glossy_sphere) {
  std::vector<Material> mats;
  mats.push_back(diffuse("white", {0.73, 0.73, 0.73}));       // 0
  mats.push_back(diffuse("red", {0.61, 0.062, 0.062}));       // 1
  mats.push_back(diffuse("green", {0.12, 0.45, 0.091}));      // 2
  mats.push_back(emitter("lamp", {15, 15, 15}));              // 3
  if (glossy_sphere) {
    Material g;
    g.name = "mirrorish";
    g.kind = Material::Kind::kGlossy;
    g.albedo = Rgb{0.85, 0.85, 0.85};
    g.exponent = 32;
    mats.push_back(g);                                        // 4
  } else {
    mats.push_back(diffuse("sphere-grey", {0.65, 0.65, 0.65}));
  }
  mats.push_back(diffuse("sphere-white", {0.78, 0.78, 0.78}));  // 5

  std::vector<Primitive> prims;
  // Quad extents run over axes (axis+1)%3 then (axis+2)%3.
  prims.push_back({AxisQuad{1, 0.0, 0.0, 1.0, 0.0, 1.0, +1}, 0});  // floor y=0, u=z v=x
  prims.push_back({AxisQuad{1, 1.0, 0.0, 1.0, 0.0, 1.0, -1}, 0});  // ceiling
  prims.push_back({AxisQuad{2, 1.0, 0.0, 1.0, 0.0, 1.0, -1}, 0});  // back wall z=1
  prims.push_back({AxisQuad{0, 0.0, 0.0, 1.0, 0.0, 1.0, +1}, 1});  // left wall, red
  prims.push_back({AxisQuad{0, 1.0, 0.0, 1.0, 0.0, 1.0, -1}, 2});  // right wall, green
  prims.push_back({AxisQuad{1, 0.999, 0.35, 0.65, 0.35, 0.65, -1}, 3});  // lamp
  prims.push_back({Sphere{{0.3, 0.16, 0.55}, 0.16}, 5});
  prims.push_back({Sphere{{0.68, 0.22, 0.7}, 0.22}, 4});

  Camera cam;
  cam.position = {0.5, 0.5, -1.35};
  cam.look_at = {0.5, 0.5, 0.5};
  cam.vfov_degrees = 36;
  return make_scene(std::move(mats), std::move(prims), cam,
                    glossy_sphere ? "cornell-glossy" : "cornell-diffuse");
}

Scene make_split_room_scene() {
  std::vector<Material> mats;
  mats.push_back(diffuse("white", {0.7, 0.7, 0.7}));    // 0
  mats.push_back(emitter("bright", {14, 14, 14}));      // 1
  mats.push_back(emitter("dim", {1.4, 1.4, 1.4}));      // 2

  std::vector<Primitive> prims;
  prims.push_back({AxisQuad{1, 0.0, 0.0, 1.0, 0.0, 2.0, +1}, 0});  // floor y=0
  prims.push_back({AxisQuad{1, 2.0, 0.0, 1.0, 0.0, 2.0, -1}, 0});  // ceiling y=2
  prims.push_back({AxisQuad{0, 0.0, 0.0, 2.0, 0.0, 1.0, +1}, 0});  // outer left x=0
  prims.push_back({AxisQuad{0, 2.0, 0.0, 2.0, 0.0, 1.0, -1}, 0});  // outer right x=2
  prims.push_back({AxisQuad{2, 1.0, 0.0, 2.0, 0.0, 2.0, -1}, 0});  // back z=1
  // Shared dividers; plain walls shade both faces, so one quad seals a pair
  // of rooms.
  prims.push_back({AxisQuad{0, 1.0, 0.0, 2.0, 0.0, 1.0, +1}, 0});  // divider x=1
  prims.push_back({AxisQuad{1, 1.0, 0.0, 1.0, 0.0, 2.0, +1}, 0});  // divider y=1

  // Two lights per room just under its ceiling: bright left, dim right.
  for (int ry = 0; ry < 2; ++ry)
    for (int rx = 0; rx < 2; ++rx) {
      double cy = (ry == 0 ? 1.0 : 2.0) - 1e-3;
      double x_a = rx + 0.30, x_b = rx + 0.70, z_c = 0.45;
      double h = 0.09;  // half size
      prims.push_back({AxisQuad{1, cy, z_c - h, z_c + h, x_a - h, x_a + h, -1}, 1});
      prims.push_back({AxisQuad{1, cy, z_c - h, z_c + h, x_b - h, x_b + h, -1}, 2});
    }

  Camera cam;
  cam.position = {1.0, 1.0, -3.0};
  cam.look_at = {1.0, 1.0, 0.5};
  cam.vfov_degrees = 36;
  return make_scene(std::move(mats), std::move(prims), cam, "split-room");
}

Scene make_furnace_scene(double albedo, double emission) {
  require(albedo >= 0 && albedo < 1, "furnace: albedo must be in [0,1)");
  require(emission >= 0, "furnace: emission must be nonnegative");
  Material shell;
  shell.name = "shell";
  shell.albedo = Rgb{albedo, albedo, albedo};
  shell.emission = Rgb{emission, emission, emission};

  Camera cam;
  cam.position = {0, 0, 0};
  cam.look_at = {0, 0, 1};
  cam.vfov_degrees = 60;
  return make_scene({shell}, {Primitive{Sphere{{0, 0, 0}, 1.0, true}, 0}}, cam, "furnace");
}

Scene make_bandit2_scene() {
  std::vector<Material> mats;
  mats.push_back(diffuse("floor", {0.62, 0.62, 0.62}));  // 0
  mats.push_back(emitter("lamp-a", {2, 2, 2}));          // 1
  mats.push_back(emitter("lamp-b", {6, 6, 6}));          // 2

  std::vector<Primitive> prims;
  prims.push_back({AxisQuad{1, 0.0, -0.5, 0.5, -0.5, 0.5, +1}, 0});  // receiver
  // Mirror-symmetric lights about x=0: total geometric coupling to the
  // receiver is identical, so contributions scale exactly with emission.
  prims.push_back({AxisQuad{1, 2.0, -0.1, 0.1, -0.5, -0.3, -1}, 1});
  prims.push_back({AxisQuad{1, 2.0, -0.1, 0.1, 0.3, 0.5, -1}, 2});

  Camera cam;
  cam.position = {0, 1.2, -1.8};
  cam.look_at = {0, 0, 0};
  cam.vfov_degrees = 50;
  return make_scene(std::move(mats), std::move(prims), cam, "bandit-2");
}

Scene scenes_builtin(const std::string& id) {
  if (id == "cornell-diffuse") return make_cornell_scene(false);
  if (id == "cornell-glossy") return make_cornell_scene(true);
  if (id == "split-room") return make_split_room_scene();
  if (id == "furnace") return make_furnace_scene(0.5, 1.0);
  if (id == "bandit-2") return make_bandit2_scene();
  throw ContractViolation("unknown scene id: " + id);
}

std::vector<std::string> builtin_scene_ids() {
  return {"cornell-diffuse", "cornell-glossy", "split-room", "furnace", "bandit-2"};
}

int split_room_index(const Vec3& position, const Vec3& toward_viewer) {
  Vec3 p = position + 1e-4 * toward_viewer;
  return (p.x < 1.0 ? 0 : 1) + 2 * (p.y < 1.0 ? 0 : 1);
}

}  // namespace raylearn
