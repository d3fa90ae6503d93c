#include "gcg/sim/world.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "gcg/errors.hpp"

namespace gcg {

using json = nlohmann::json;

double segment_distance(const Segment& s, double px, double py) {
  double dx = s.x2 - s.x1;
  double dy = s.y2 - s.y1;
  double len2 = dx * dx + dy * dy;
  double t = 0.0;
  if (len2 > 0.0) {
    t = ((px - s.x1) * dx + (py - s.y1) * dy) / len2;
    t = std::clamp(t, 0.0, 1.0);
  }
  double cx = s.x1 + t * dx;
  double cy = s.y1 + t * dy;
  return std::hypot(px - cx, py - cy);
}

bool World::collides(double x, double y, double r) const {
  for (const Segment& s : walls) {
    if (segment_distance(s, x, y) <= r) return true;
  }
  for (const Circle& c : obstacles) {
    if (std::hypot(x - c.x, y - c.y) <= r + c.r) return true;
  }
  return false;
}

namespace {

std::optional<double> ray_segment(double ox, double oy, double dx, double dy, const Segment& s) {
  // o + t*d = p1 + u*(p2-p1)
  double ex = s.x2 - s.x1;
  double ey = s.y2 - s.y1;
  double denom = dx * ey - dy * ex;
  if (std::abs(denom) < 1e-12) return std::nullopt;
  double px = s.x1 - ox;
  double py = s.y1 - oy;
  double t = (px * ey - py * ex) / denom;
  double u = (px * dy - py * dx) / denom;
  if (t > 1e-9 && u >= 0.0 && u <= 1.0) return t;
  return std::nullopt;
}

std::optional<double> ray_circle(double ox, double oy, double dx, double dy, const Circle& c) {
  double fx = ox - c.x;
  double fy = oy - c.y;
  double b = fx * dx + fy * dy;
  double q = fx * fx + fy * fy - c.r * c.r;
  double disc = b * b - q;
  if (disc < 0.0) return std::nullopt;
  double root = std::sqrt(disc);
  double t1 = -b - root;
  double t2 = -b + root;
  if (t1 > 1e-9) return t1;
  if (t2 > 1e-9) return t2;
  return std::nullopt;
}

}  // namespace

std::optional<double> World::raycast(double x, double y, double angle) const {
  double dx = std::cos(angle);
  double dy = std::sin(angle);
  double best = std::numeric_limits<double>::infinity();
  for (const Segment& s : walls) {
    if (auto t = ray_segment(x, y, dx, dy, s)) best = std::min(best, *t);
  }
  for (const Circle& c : obstacles) {
    if (auto t = ray_circle(x, y, dx, dy, c)) best = std::min(best, *t);
  }
  if (std::isinf(best)) return std::nullopt;
  return best;
}

void World::validate(double car_radius) const {
  if (walls.empty()) throw ConfigError("world '" + name + "' has no walls");
  if (collides(spawn.x, spawn.y, car_radius)) {
    throw ConfigError("world '" + name + "' spawn pose is inside an obstacle or wall");
  }
}

namespace {

int line_of_byte(const std::string& text, size_t byte) {
  int line = 1;
  for (size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

}  // namespace

World load_world(const std::filesystem::path& path, double car_radius) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open world file: " + path.string());
  std::stringstream buf;
  buf << is.rdbuf();
  std::string text = buf.str();

  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("world file " + path.string() + " line " + std::to_string(line_of_byte(text, e.byte)) +
                     ": " + e.what());
  }

  World w;
  try {
    for (const auto& key : doc.items()) {
      const std::string& k = key.key();
      if (k != "walls" && k != "obstacles" && k != "spawn" && k != "name") {
        throw ParseError("world file " + path.string() + ": unknown key '" + k + "'");
      }
    }
    for (const auto& arr : doc.at("walls")) {
      if (arr.size() != 4) throw ParseError("world file " + path.string() + ": wall needs 4 numbers");
      w.walls.push_back(Segment{arr[0].get<double>(), arr[1].get<double>(), arr[2].get<double>(),
                                arr[3].get<double>()});
    }
    if (doc.contains("obstacles")) {
      for (const auto& arr : doc.at("obstacles")) {
        if (arr.size() != 3) throw ParseError("world file " + path.string() + ": obstacle needs 3 numbers");
        w.obstacles.push_back(Circle{arr[0].get<double>(), arr[1].get<double>(), arr[2].get<double>()});
      }
    }
    const auto& sp = doc.at("spawn");
    if (sp.size() != 3) throw ParseError("world file " + path.string() + ": spawn needs 3 numbers");
    w.spawn = Pose{sp[0].get<double>(), sp[1].get<double>(), sp[2].get<double>()};
    w.name = doc.value("name", std::string{});
  } catch (const json::exception& e) {
    throw ParseError("world file " + path.string() + ": " + e.what());
  }
  w.validate(car_radius);
  return w;
}

}  // namespace gcg
