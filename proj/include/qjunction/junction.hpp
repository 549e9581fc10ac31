#pragma once
// Problem definition for a star-shaped junction: a rectangular well
// [0,a]x[0,b] with straight semi-infinite wires glued orthogonally onto
// segments of its sides. Lengths are in scaled (dimensionless) units.

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "qjunction/error.hpp"

namespace qjunction {

enum class Side { left, right, top, bottom };

inline std::string_view to_string(Side s) {
  switch (s) {
    case Side::left: return "left";
    case Side::right: return "right";
    case Side::top: return "top";
    case Side::bottom: return "bottom";
  }
  return "?";
}

inline std::optional<Side> side_from_string(std::string_view s) {
  if (s == "left") return Side::left;
  if (s == "right") return Side::right;
  if (s == "top") return Side::top;
  if (s == "bottom") return Side::bottom;
  return std::nullopt;
}

struct WellSpec {
  double width_a = std::numbers::pi;
  double height_b = std::numbers::pi;
  // Scaled field: interior potential q(x) = field[0]*x1 + field[1]*x2.
  std::array<double, 2> field{0.0, 0.0};

  bool has_field() const { return field[0] != 0.0 || field[1] != 0.0; }
  double potential(double x1, double x2) const { return field[0] * x1 + field[1] * x2; }
  double diameter() const { return std::hypot(width_a, height_b); }
  bool operator==(const WellSpec&) const = default;
};

struct WireSpec {
  int index = 1;  // 1-based, consecutive
  Side side = Side::left;
  double offset = 0.0;  // segment start along the side (x1 for top/bottom, x2 for left/right)
  double width = 1.0;
  double q_inf = 0.0;

  double segment_end() const { return offset + width; }
  bool operator==(const WireSpec&) const = default;
};

struct SolverConfig {
  int closed_modes = 8;      // L_max: highest transverse mode kept per wire
  int interior_modes = 60;   // N: eigenpairs kept in the DN series
  std::optional<double> grid;  // finite-difference step; nullopt = analytic
  int quadrature_points = 256;
  bool operator==(const SolverConfig&) const = default;
};

struct JunctionSpec {
  WellSpec well;
  std::vector<WireSpec> wires;
  SolverConfig solver;

  int wire_count() const { return static_cast<int>(wires.size()); }
  bool operator==(const JunctionSpec&) const = default;
};

inline double side_length(const WellSpec& w, Side s) {
  return (s == Side::left || s == Side::right) ? w.height_b : w.width_a;
}

struct Violation {
  std::string code;     // machine-readable, e.g. "wire.width.nonpositive"
  std::string subject;  // "well", "wire 2", "solver", ...
  std::string message;
  bool operator==(const Violation&) const = default;
};

/// Checks every structural invariant; an empty result means the spec is valid.
inline std::vector<Violation> validate(const JunctionSpec& spec) {
  std::vector<Violation> out;
  auto add = [&](std::string code, std::string subject, std::string msg) {
    out.push_back({std::move(code), std::move(subject), std::move(msg)});
  };
  const auto& w = spec.well;
  if (!(w.width_a > 0.0) || !std::isfinite(w.width_a))
    add("well.width.nonpositive", "well", "well width a must be positive");
  if (!(w.height_b > 0.0) || !std::isfinite(w.height_b))
    add("well.height.nonpositive", "well", "well height b must be positive");
  if (!std::isfinite(w.field[0]) || !std::isfinite(w.field[1]))
    add("well.field.nonfinite", "well", "field components must be finite");

  if (spec.wires.empty()) add("junction.no_wires", "junction", "at least one wire is required");

  constexpr double kSlack = 1e-12;
  for (std::size_t i = 0; i < spec.wires.size(); ++i) {
    const auto& wire = spec.wires[i];
    const std::string subject = "wire " + std::to_string(i + 1);
    if (wire.index != static_cast<int>(i) + 1)
      add("wire.index.nonconsecutive", subject, "wire indices must run 1..n in order");
    if (!(wire.width > 0.0) || !std::isfinite(wire.width))
      add("wire.width.nonpositive", subject, "wire width must be positive");
    if (!(wire.offset >= 0.0) || !std::isfinite(wire.offset))
      add("wire.offset.negative", subject, "wire offset must be non-negative");
    if (!std::isfinite(wire.q_inf))
      add("wire.q_inf.nonfinite", subject, "wire potential must be finite");
    const double len = side_length(w, wire.side);
    if (wire.width > 0.0 && wire.offset >= 0.0 && wire.segment_end() > len * (1.0 + kSlack))
      add("wire.segment.out_of_bounds", subject,
          "segment [offset, offset+width] exceeds the length of the " +
              std::string(to_string(wire.side)) + " side");
  }
  for (std::size_t i = 0; i < spec.wires.size(); ++i) {
    for (std::size_t j = i + 1; j < spec.wires.size(); ++j) {
      const auto& p = spec.wires[i];
      const auto& q = spec.wires[j];
      if (p.side != q.side) continue;
      const double lo = std::max(p.offset, q.offset);
      const double hi = std::min(p.segment_end(), q.segment_end());
      if (hi - lo > kSlack * side_length(w, p.side))
        add("wire.segment.overlap", "wire " + std::to_string(j + 1),
            "segment overlaps wire " + std::to_string(i + 1) + " on the same side");
    }
  }

  const auto& s = spec.solver;
  if (s.closed_modes < 2)
    add("solver.closed_modes.too_small", "solver", "closed_modes must be >= 2");
  if (s.interior_modes < 1)
    add("solver.interior_modes.too_small", "solver", "interior_modes must be >= 1");
  if (s.quadrature_points < 16)
    add("solver.quadrature_points.too_small", "solver", "quadrature_points must be >= 16");
  if (s.grid) {
    if (!(*s.grid > 0.0)) {
      add("solver.grid.nonpositive", "solver", "grid step must be positive");
    } else if (w.width_a / *s.grid < 16.0 - 1e-9 || w.height_b / *s.grid < 16.0 - 1e-9) {
      add("solver.grid.too_coarse", "solver", "grid must split both sides into >= 16 intervals");
    }
  } else if (w.has_field()) {
    add("solver.grid.analytic_with_field", "solver",
        "a nonzero field requires a finite-difference grid");
  }
  return out;
}

/// Asymmetric T-junction on the pi x pi well: three wires of width pi/2 on the
/// left side (upper half), top side (middle) and right side (middle).
inline JunctionSpec builtin_example() {
  constexpr double pi = std::numbers::pi;
  JunctionSpec spec;
  spec.well = WellSpec{pi, pi, {0.0, 0.0}};
  spec.wires = {
      WireSpec{1, Side::left, pi / 2, pi / 2, 0.0},
      WireSpec{2, Side::top, pi / 4, pi / 2, 0.0},
      WireSpec{3, Side::right, pi / 4, pi / 2, 0.0},
  };
  return spec;
}

// ---------------------------------------------------------------------------
// Configuration document (JSON).

inline nlohmann::json to_json(const JunctionSpec& spec) {
  nlohmann::json j;
  j["well"] = {{"a", spec.well.width_a},
               {"b", spec.well.height_b},
               {"field", {spec.well.field[0], spec.well.field[1]}}};
  j["wires"] = nlohmann::json::array();
  for (const auto& w : spec.wires) {
    j["wires"].push_back({{"side", std::string(to_string(w.side))},
                          {"offset", w.offset},
                          {"width", w.width},
                          {"q_inf", w.q_inf}});
  }
  nlohmann::json solver = {{"closed_modes", spec.solver.closed_modes},
                           {"interior_modes", spec.solver.interior_modes},
                           {"quadrature_points", spec.solver.quadrature_points}};
  if (spec.solver.grid)
    solver["grid"] = *spec.solver.grid;
  else
    solver["grid"] = "analytic";
  j["solver"] = solver;
  return j;
}

inline std::string serialize(const JunctionSpec& spec) { return to_json(spec).dump(2) + "\n"; }

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj, std::string_view where,
                                std::initializer_list<std::string_view> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (auto a : allowed) ok = ok || it.key() == a;
    if (!ok) {
      std::string key = std::string(where) + "." + it.key();
      throw ConfigError(key, "unknown key '" + key + "'");
    }
  }
}

inline double get_number(const nlohmann::json& obj, const std::string& name, const std::string& path,
                         std::optional<double> fallback = std::nullopt) {
  if (!obj.contains(name)) {
    if (fallback) return *fallback;
    throw ConfigError(path, "missing required key '" + path + "'");
  }
  const auto& v = obj.at(name);
  if (!v.is_number()) throw ConfigError(path, "key '" + path + "' must be a number");
  return v.get<double>();
}

inline int get_int(const nlohmann::json& obj, const std::string& name, const std::string& path,
                   int fallback) {
  if (!obj.contains(name)) return fallback;
  const auto& v = obj.at(name);
  if (!v.is_number_integer()) throw ConfigError(path, "key '" + path + "' must be an integer");
  return v.get<int>();
}

}  // namespace detail

/// Parses a configuration document and validates it. Missing solver keys get
/// defaults (closed_modes 8, interior_modes 60, analytic grid, 256 points).
inline JunctionSpec parse_junction(std::string_view text) {
  using detail::get_int;
  using detail::get_number;
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("<document>", std::string("malformed document: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("<document>", "top level must be an object");
  detail::reject_unknown_keys(doc, "", {"well", "wires", "solver"});

  JunctionSpec spec;
  if (!doc.contains("well") || !doc["well"].is_object())
    throw ConfigError("well", "missing required object 'well'");
  const auto& well = doc["well"];
  detail::reject_unknown_keys(well, "well", {"a", "b", "field"});
  spec.well.width_a = get_number(well, "a", "well.a");
  spec.well.height_b = get_number(well, "b", "well.b");
  if (well.contains("field")) {
    const auto& f = well["field"];
    if (!f.is_array() || f.size() != 2 || !f[0].is_number() || !f[1].is_number())
      throw ConfigError("well.field", "key 'well.field' must be [fx, fy]");
    spec.well.field = {f[0].get<double>(), f[1].get<double>()};
  }

  if (!doc.contains("wires") || !doc["wires"].is_array())
    throw ConfigError("wires", "missing required array 'wires'");
  int index = 1;
  for (const auto& w : doc["wires"]) {
    const std::string base = "wires[" + std::to_string(index - 1) + "]";
    if (!w.is_object()) throw ConfigError(base, "each wire must be an object");
    detail::reject_unknown_keys(w, base, {"side", "offset", "width", "q_inf"});
    WireSpec wire;
    wire.index = index++;
    if (!w.contains("side") || !w["side"].is_string())
      throw ConfigError(base + ".side", "missing or non-string '" + base + ".side'");
    auto side = side_from_string(w["side"].get<std::string>());
    if (!side)
      throw ConfigError(base + ".side", "side must be one of left, right, top, bottom");
    wire.side = *side;
    wire.offset = get_number(w, "offset", base + ".offset");
    wire.width = get_number(w, "width", base + ".width");
    wire.q_inf = get_number(w, "q_inf", base + ".q_inf", 0.0);
    spec.wires.push_back(wire);
  }

  if (doc.contains("solver")) {
    const auto& s = doc["solver"];
    if (!s.is_object()) throw ConfigError("solver", "'solver' must be an object");
    detail::reject_unknown_keys(s, "solver",
                                {"closed_modes", "interior_modes", "grid", "quadrature_points"});
    spec.solver.closed_modes = get_int(s, "closed_modes", "solver.closed_modes", 8);
    spec.solver.interior_modes = get_int(s, "interior_modes", "solver.interior_modes", 60);
    spec.solver.quadrature_points =
        get_int(s, "quadrature_points", "solver.quadrature_points", 256);
    if (s.contains("grid")) {
      const auto& g = s["grid"];
      if (g.is_string() && g.get<std::string>() == "analytic") {
        spec.solver.grid.reset();
      } else if (g.is_number()) {
        spec.solver.grid = g.get<double>();
      } else {
        throw ConfigError("solver.grid", "'solver.grid' must be \"analytic\" or a number");
      }
    }
  }

  auto violations = validate(spec);
  if (!violations.empty()) {
    std::ostringstream msg;
    msg << violations.front().subject << ": " << violations.front().message << " ["
        << violations.front().code << "]";
    throw ConfigError(violations.front().subject, msg.str());
  }
  return spec;
}

}  // namespace qjunction
