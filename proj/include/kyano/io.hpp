// File formats: manifold and field specs, deterministic JSON output,
// trajectory export and atomic writes.

#pragma once

#include <string>

#include <json.hpp>

#include "kyano/dynamics.hpp"
#include "kyano/error.hpp"
#include "kyano/field.hpp"
#include "kyano/geometry.hpp"
#include "kyano/kysym.hpp"
#include "kyano/multipole.hpp"

namespace kyano::io {

inline constexpr const char* kSchema = "kyano/1";

// Bad input file or selector (not a parse of malformed text).
class InputError : public Error {
public:
    using Error::Error;
};

// Manifold spec JSON, e.g.
//   {"schema": "kyano/1", "kind": "const-curvature", "dim": 3, "params": {"K": 1, "chart": "spherical"}}
geometry::MetricSpec parse_manifold(const std::string& text);
// A file path, or a catalog selector: flat:N, const-curvature:K, const-curvature-spherical:K,
// taub-nut:M, taub-nut-16:M.
geometry::MetricSpec load_manifold(const std::string& path_or_name);

// Field JSON {"dim": n, "rank": r, "components": {"12": "x3", ...}}, expressions in the
// manifold's coordinate names.
AntisymTensorField parse_field(const std::string& text, const geometry::MetricSpec& spec);
// A file path, or one of flat-eps, taub-nut-1, taub-nut-2, taub-nut-3, constcurv-printed,
// constcurv-printed-dual.
AntisymTensorField load_field(const std::string& path_or_name, const geometry::MetricSpec& spec);

std::string read_file(const std::string& path);
// Writes to a sibling temporary file and renames it over path.
void write_file_atomic(const std::string& path, const std::string& content);

// Two-space indented JSON with every double printed as %.17g; non-finite numbers become null.
std::string dump_json(const nlohmann::json& value);

nlohmann::json to_json(const kysym::KYReport& report);
nlohmann::json to_json(const multipole::IdentityReport& report);
nlohmann::json to_json(const multipole::QuadrupoleFit& fit);

// Header t,x1..xn,p1..pn, one row per sample.
std::string trajectory_csv(const dynamics::Trajectory& traj);

}  // namespace kyano::io
