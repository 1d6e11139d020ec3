#include "raylearn/scene_io.hpp"

#include <filesystem>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "raylearn/common.hpp"
#include "raylearn/scenes.hpp"

namespace raylearn {

namespace {

using nlohmann::json;

Vec3 vec_from(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw IoError(std::string("scene: ") + what + " needs 3 numbers");
  return Vec3{j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json vec_to(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

int axis_from(const json& j) {
  std::string s = j.get<std::string>();
  if (s == "x") return 0;
  if (s == "y") return 1;
  if (s == "z") return 2;
  throw IoError("scene: axis must be x, y, or z");
}

const char* axis_names[3] = {"x", "y", "z"};

}  // namespace

Scene load_scene_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open scene file: " + path);
  json root;
  try {
    is >> root;
  } catch (const json::exception& e) {
    throw IoError("scene parse error in " + path + ": " + e.what());
  }

  try {
    std::vector<Material> materials;
    std::map<std::string, int> material_index;
    for (const json& jm : root.at("materials")) {
      Material m;
      m.name = jm.at("name").get<std::string>();
      std::string kind = jm.value("kind", "diffuse");
      if (kind == "diffuse")
        m.kind = Material::Kind::kDiffuse;
      else if (kind == "glossy")
        m.kind = Material::Kind::kGlossy;
      else
        throw IoError("scene: material kind must be diffuse or glossy");
      if (jm.contains("albedo")) m.albedo = vec_from(jm["albedo"], "albedo");
      if (jm.contains("emission")) m.emission = vec_from(jm["emission"], "emission");
      m.exponent = jm.value("exponent", 0.0);
      if (material_index.count(m.name)) throw IoError("scene: duplicate material " + m.name);
      material_index[m.name] = int(materials.size());
      materials.push_back(m);
    }

    std::vector<Primitive> primitives;
    for (const json& jp : root.at("primitives")) {
      Primitive prim;
      std::string mat = jp.at("material").get<std::string>();
      auto it = material_index.find(mat);
      if (it == material_index.end()) throw IoError("scene: unknown material " + mat);
      prim.material = it->second;

      std::string shape = jp.at("shape").get<std::string>();
      if (shape == "sphere") {
        Sphere s;
        s.center = vec_from(jp.at("center"), "center");
        s.radius = jp.at("radius").get<double>();
        s.inward = jp.value("inward", false);
        if (s.radius <= 0) throw IoError("scene: sphere radius must be positive");
        prim.shape = s;
      } else if (shape == "quad") {
        AxisQuad q;
        q.axis = axis_from(jp.at("axis"));
        q.coord = jp.at("coord").get<double>();
        const json& ju = jp.at("u_range");
        const json& jv = jp.at("v_range");
        q.u_min = ju.at(0).get<double>();
        q.u_max = ju.at(1).get<double>();
        q.v_min = jv.at(0).get<double>();
        q.v_max = jv.at(1).get<double>();
        q.normal_sign = jp.at("normal_sign").get<double>();
        prim.shape = q;
      } else if (shape == "triangle") {
        Triangle t;
        t.a = vec_from(jp.at("a"), "a");
        t.b = vec_from(jp.at("b"), "b");
        t.c = vec_from(jp.at("c"), "c");
        prim.shape = t;
      } else {
        throw IoError("scene: unknown shape " + shape);
      }
      primitives.push_back(prim);
    }

    Camera cam;
    if (root.contains("camera")) {
      const json& jc = root["camera"];
      if (jc.contains("position")) cam.position = vec_from(jc["position"], "camera position");
      if (jc.contains("look_at")) cam.look_at = vec_from(jc["look_at"], "camera look_at");
      if (jc.contains("up")) cam.up = vec_from(jc["up"], "camera up");
      cam.vfov_degrees = jc.value("vfov_degrees", 40.0);
    }

    std::string name = root.value("name", std::filesystem::path(path).stem().string());
    return make_scene(std::move(materials), std::move(primitives), cam, name);
  } catch (const json::exception& e) {
    throw IoError("scene schema error in " + path + ": " + e.what());
  } catch (const ContractViolation& e) {
    throw IoError("invalid scene in " + path + ": " + e.what());
  }
}

void save_scene_file(const Scene& scene, const std::string& path) {
  json root;
  root["name"] = scene.name;
  root["camera"] = {{"position", vec_to(scene.camera.position)},
                    {"look_at", vec_to(scene.camera.look_at)},
                    {"up", vec_to(scene.camera.up)},
                    {"vfov_degrees", scene.camera.vfov_degrees}};

  json jmats = json::array();
  for (size_t i = 0; i < scene.materials.size(); ++i) {
    const Material& m = scene.materials[i];
    json jm;
    jm["name"] = m.name.empty() ? "material-" + std::to_string(i) : m.name;
    jm["kind"] = m.kind == Material::Kind::kDiffuse ? "diffuse" : "glossy";
    jm["albedo"] = vec_to(m.albedo);
    jm["emission"] = vec_to(m.emission);
    jm["exponent"] = m.exponent;
    jmats.push_back(jm);
  }
  root["materials"] = jmats;

  json jprims = json::array();
  for (const Primitive& prim : scene.primitives) {
    json jp;
    const Material& m = scene.materials[prim.material];
    jp["material"] = m.name.empty() ? "material-" + std::to_string(prim.material) : m.name;
    if (const Sphere* s = std::get_if<Sphere>(&prim.shape)) {
      jp["shape"] = "sphere";
      jp["center"] = vec_to(s->center);
      jp["radius"] = s->radius;
      jp["inward"] = s->inward;
    } else if (const AxisQuad* q = std::get_if<AxisQuad>(&prim.shape)) {
      jp["shape"] = "quad";
      jp["axis"] = axis_names[q->axis];
      jp["coord"] = q->coord;
      jp["u_range"] = json::array({q->u_min, q->u_max});
      jp["v_range"] = json::array({q->v_min, q->v_max});
      jp["normal_sign"] = q->normal_sign;
    } else {
      const Triangle& t = std::get<Triangle>(prim.shape);
      jp["shape"] = "triangle";
      jp["a"] = vec_to(t.a);
      jp["b"] = vec_to(t.b);
      jp["c"] = vec_to(t.c);
    }
    jprims.push_back(jp);
  }
  root["primitives"] = jprims;

  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path);
  os << root.dump(2) << "\n";
  if (!os) throw IoError("write failed: " + path);
}

Scene resolve_scene(const std::string& spec) {
  for (const std::string& id : builtin_scene_ids())
    if (spec == id) return scenes_builtin(spec);
  if (std::filesystem::exists(spec)) return load_scene_file(spec);
  throw IoError("not a built-in scene or scene file: " + spec);
}

}  // namespace raylearn
