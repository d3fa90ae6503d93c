#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace gcg {

struct Segment {
  double x1, y1, x2, y2;
};

struct Circle {
  double x, y, r;
};

struct Pose {
  double x = 0, y = 0, heading = 0;
};

// Static 2D environment: wall segments, circular obstacles, spawn pose.
struct World {
  std::vector<Segment> walls;
  std::vector<Circle> obstacles;
  Pose spawn;
  std::string name;

  // True if a disc of radius r at (x, y) touches any wall or obstacle.
  bool collides(double x, double y, double r) const;

  // Distance along the ray from (x, y) at `angle` to the nearest wall or
  // obstacle boundary, if any.
  std::optional<double> raycast(double x, double y, double angle) const;

  void validate(double car_radius) const;
};

// Parses a world JSON file: {"walls":[[x1,y1,x2,y2],...],
// "obstacles":[[cx,cy,r],...], "spawn":[x,y,theta], "name":"..."}.
// Throws ParseError with line info on malformed input, ConfigError on
// invariant violations.
World load_world(const std::filesystem::path& path, double car_radius = 0.15);

double segment_distance(const Segment& s, double px, double py);

}  // namespace gcg
