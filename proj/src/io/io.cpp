#include "kyano/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace kyano::io {

using nlohmann::json;

namespace {

json parse_text(const std::string& text, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        // nlohmann reports the 1-based position of the offending byte
        const std::size_t offset = e.byte > 0 ? e.byte - 1 : 0;
        throw ParseError(std::string("malformed ") + what + " JSON", offset);
    }
}

void check_schema(const json& j, const char* what) {
    if (!j.is_object()) throw InputError(std::string(what) + " must be a JSON object");
    if (j.contains("schema") && j["schema"] != kSchema) {
        throw InputError(std::string(what) + ": unsupported schema tag (expected \"" + kSchema + "\")");
    }
}

double number_param(const json& params, const char* key, const char* kind) {
    if (!params.is_object() || !params.contains(key) || !params[key].is_number()) {
        throw InputError(std::string(kind) + " manifold needs numeric params." + key);
    }
    return params[key].get<double>();
}

std::size_t require_dim(const json& j, const char* what) {
    if (!j.contains("dim") || !j["dim"].is_number_integer() || j["dim"].get<long long>() < 1) {
        throw InputError(std::string(what) + " needs a positive integer \"dim\"");
    }
    return j["dim"].get<std::size_t>();
}

double parse_number(const std::string& s, const std::string& what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != s.size() || !std::isfinite(v)) throw InputError("bad number in selector " + what);
    return v;
}

std::vector<std::size_t> parse_component_key(const std::string& key, std::size_t n) {
    std::vector<std::size_t> idx;
    if (key.find(',') != std::string::npos) {
        std::stringstream ss(key);
        std::string part;
        while (std::getline(ss, part, ',')) idx.push_back(static_cast<std::size_t>(parse_number(part, key)));
    } else {
        for (char c : key) {
            if (c < '1' || c > '9') throw InputError("component key '" + key + "' must list 1-based indices");
            idx.push_back(static_cast<std::size_t>(c - '0'));
        }
    }
    for (std::size_t& i : idx) {
        if (i < 1 || i > n) throw InputError("component key '" + key + "' has an index outside 1.." + std::to_string(n));
        --i;
    }
    for (std::size_t k = 1; k < idx.size(); ++k) {
        if (idx[k] <= idx[k - 1]) throw InputError("component key '" + key + "' must be strictly ascending");
    }
    return idx;
}

double metric_param(const geometry::MetricSpec& spec, bool want_taub_nut) {
    if (want_taub_nut) {
        if (const auto* t = std::get_if<geometry::TaubNUT>(&spec.kind())) return t->m;
        throw InputError("Taub-NUT fields need a taub-nut manifold");
    }
    if (const auto* c = std::get_if<geometry::ConstCurvature3>(&spec.kind())) {
        if (c->chart != geometry::Chart::Spherical) {
            throw InputError("printed constant-curvature fields live on the spherical chart "
                             "(use const-curvature-spherical:K)");
        }
        return c->K;
    }
    throw InputError("printed constant-curvature fields need a const-curvature manifold");
}

void dump(const json& v, int indent, std::string& out) {
    const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
    switch (v.type()) {
        case json::value_t::number_float: {
            const double d = v.get<double>();
            if (!std::isfinite(d)) {
                out += "null";
            } else {
                char buf[40];
                std::snprintf(buf, sizeof buf, "%.17g", d);
                out += buf;
            }
            break;
        }
        case json::value_t::array:
            if (v.empty()) {
                out += "[]";
                break;
            }
            out += "[\n";
            for (std::size_t i = 0; i < v.size(); ++i) {
                out += inner;
                dump(v[i], indent + 1, out);
                out += i + 1 < v.size() ? ",\n" : "\n";
            }
            out += pad + "]";
            break;
        case json::value_t::object: {
            if (v.empty()) {
                out += "{}";
                break;
            }
            out += "{\n";
            std::size_t i = 0;
            for (auto it = v.begin(); it != v.end(); ++it, ++i) {
                out += inner + json(it.key()).dump() + ": ";
                dump(it.value(), indent + 1, out);
                out += i + 1 < v.size() ? ",\n" : "\n";
            }
            out += pad + "}";
            break;
        }
        default:
            out += v.dump();
    }
}

}  // namespace

geometry::MetricSpec parse_manifold(const std::string& text) {
    const json j = parse_text(text, "manifold");
    check_schema(j, "manifold spec");
    if (!j.contains("kind") || !j["kind"].is_string()) throw InputError("manifold spec needs a string \"kind\"");
    const std::string kind = j["kind"];
    const json params = j.value("params", json::object());
    if (kind == "flat") {
        return geometry::MetricSpec::flat(require_dim(j, "flat manifold"));
    }
    if (kind == "const-curvature") {
        if (j.contains("dim") && require_dim(j, "const-curvature manifold") != 3) {
            throw InputError("const-curvature manifold has dim 3");
        }
        const double K = number_param(params, "K", "const-curvature");
        const std::string chart = params.value("chart", "cartesian");
        if (chart != "cartesian" && chart != "spherical") throw InputError("chart must be cartesian or spherical");
        return geometry::MetricSpec::const_curvature(
            K, chart == "spherical" ? geometry::Chart::Spherical : geometry::Chart::Cartesian);
    }
    if (kind == "taub-nut") {
        if (j.contains("dim") && require_dim(j, "taub-nut manifold") != 4) throw InputError("taub-nut manifold has dim 4");
        const double m = number_param(params, "m", "taub-nut");
        if (!(m > 0.0)) throw InputError("taub-nut mass parameter must be positive");
        const std::string norm = params.value("normalization", "4m^2");
        if (norm != "4m^2" && norm != "16m^2") throw InputError("taub-nut normalization must be 4m^2 or 16m^2");
        return geometry::MetricSpec::taub_nut(m, norm == "4m^2" ? geometry::TaubNutNormalization::FourMSquared
                                                                : geometry::TaubNutNormalization::SixteenMSquared);
    }
    if (kind == "custom") {
        const std::size_t n = require_dim(j, "custom manifold");
        std::vector<std::string> names;
        if (j.contains("names")) {
            if (!j["names"].is_array() || j["names"].size() != n) throw InputError("custom names must list dim strings");
            for (const auto& s : j["names"]) {
                if (!s.is_string()) throw InputError("custom names must be strings");
                names.push_back(s.get<std::string>());
            }
        } else {
            names = expr::default_names(n);
        }
        if (!j.contains("metric") || !j["metric"].is_array() || j["metric"].size() != n) {
            throw InputError("custom manifold needs an n x n \"metric\" array");
        }
        std::vector<std::vector<expr::Expression>> rows;
        for (std::size_t a = 0; a < n; ++a) {
            const json& row = j["metric"][a];
            if (!row.is_array() || row.size() != n) throw InputError("custom metric rows must have dim entries");
            std::vector<expr::Expression> parsed;
            for (std::size_t b = 0; b < n; ++b) {
                std::string src;
                if (row[b].is_string()) {
                    src = row[b].get<std::string>();
                } else if (row[b].is_number()) {
                    src = row[b].dump();
                } else {
                    throw InputError("custom metric entries must be expression strings");
                }
                try {
                    parsed.push_back(expr::parse_expression(src, names));
                } catch (const ParseError& e) {
                    throw InputError("metric[" + std::to_string(a) + "][" + std::to_string(b) + "]: " + e.what());
                }
            }
            rows.push_back(std::move(parsed));
        }
        try {
            return geometry::MetricSpec::custom(std::move(rows), j.contains("names") ? names : std::vector<std::string>{});
        } catch (const ShapeError& e) {
            throw InputError(e.what());
        }
    }
    throw InputError("unknown manifold kind '" + kind + "'");
}

geometry::MetricSpec load_manifold(const std::string& path_or_name) {
    const auto colon = path_or_name.find(':');
    if (colon != std::string::npos && !std::filesystem::exists(path_or_name)) {
        const std::string kind = path_or_name.substr(0, colon);
        const std::string arg = path_or_name.substr(colon + 1);
        if (kind == "flat") {
            const double n = parse_number(arg, path_or_name);
            if (n < 1 || n != std::floor(n) || n > 8) throw InputError("flat:N needs an integer N in 1..8");
            return geometry::MetricSpec::flat(static_cast<std::size_t>(n));
        }
        if (kind == "const-curvature") return geometry::MetricSpec::const_curvature(parse_number(arg, path_or_name));
        if (kind == "const-curvature-spherical") {
            return geometry::MetricSpec::const_curvature(parse_number(arg, path_or_name), geometry::Chart::Spherical);
        }
        if (kind == "taub-nut" || kind == "taub-nut-16") {
            const double m = parse_number(arg, path_or_name);
            if (!(m > 0.0)) throw InputError("taub-nut mass parameter must be positive");
            return geometry::MetricSpec::taub_nut(m, kind == "taub-nut" ? geometry::TaubNutNormalization::FourMSquared
                                                                        : geometry::TaubNutNormalization::SixteenMSquared);
        }
        throw InputError("unknown manifold selector '" + path_or_name + "'");
    }
    return parse_manifold(read_file(path_or_name));
}

AntisymTensorField parse_field(const std::string& text, const geometry::MetricSpec& spec) {
    const json j = parse_text(text, "field");
    check_schema(j, "field spec");
    const std::size_t n = require_dim(j, "field spec");
    if (n != spec.dim()) {
        throw InputError("field dim " + std::to_string(n) + " does not match manifold dim " + std::to_string(spec.dim()));
    }
    if (!j.contains("rank") || !j["rank"].is_number_integer()) throw InputError("field spec needs an integer \"rank\"");
    const long long rank = j["rank"].get<long long>();
    if (rank < 1 || (rank != 2 && static_cast<std::size_t>(rank) + 1 != n)) {
        throw InputError("field rank must be 2 or dim-1");
    }
    if (!j.contains("components") || !j["components"].is_object()) {
        throw InputError("field spec needs a \"components\" object");
    }
    const std::vector<std::string> names = spec.coordinate_names();
    std::map<std::vector<std::size_t>, expr::Expression> comps;
    for (auto it = j["components"].begin(); it != j["components"].end(); ++it) {
        const std::vector<std::size_t> idx = parse_component_key(it.key(), n);
        if (idx.size() != static_cast<std::size_t>(rank)) {
            throw InputError("component key '" + it.key() + "' does not match rank " + std::to_string(rank));
        }
        std::string src;
        if (it.value().is_string()) {
            src = it.value().get<std::string>();
        } else if (it.value().is_number()) {
            src = it.value().dump();
        } else {
            throw InputError("component '" + it.key() + "' must be an expression string");
        }
        try {
            comps.emplace(idx, expr::parse_expression(src, names));
        } catch (const ParseError& e) {
            throw InputError("component '" + it.key() + "': " + e.what());
        }
    }
    const std::string label = j.value("label", "user field");
    return AntisymTensorField::from_expressions(n, static_cast<std::size_t>(rank), comps, label);
}

AntisymTensorField load_field(const std::string& path_or_name, const geometry::MetricSpec& spec) {
    if (!std::filesystem::exists(path_or_name)) {
        if (path_or_name == "flat-eps") return kysym::flat_ky_field(spec.dim());
        if (path_or_name.rfind("taub-nut-", 0) == 0 && path_or_name.size() == 10) {
            const int idx = path_or_name.back() - '0';
            if (idx >= 1 && idx <= 3) return kysym::taubnut_ky_field(idx, metric_param(spec, true));
        }
        if (path_or_name == "constcurv-printed") {
            return kysym::constcurv_ky_field(kysym::Side::Position, metric_param(spec, false));
        }
        if (path_or_name == "constcurv-printed-dual") {
            return kysym::constcurv_ky_field(kysym::Side::Momentum, metric_param(spec, false));
        }
    }
    return parse_field(read_file(path_or_name), spec);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InputError("cannot write '" + tmp.string() + "'");
        out << content;
        out.flush();
        if (!out) throw InputError("write failed for '" + tmp.string() + "'");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw InputError("cannot move output into place at '" + path + "'");
    }
}

std::string dump_json(const json& value) {
    std::string out;
    dump(value, 0, out);
    out += "\n";
    return out;
}

json to_json(const kysym::KYReport& r) {
    json j;
    j["schema"] = kSchema;
    j["metric"] = r.metric;
    j["field"] = r.field;
    j["samples"] = r.samples;
    j["max_ky_residual"] = r.max_ky_residual;
    j["max_covariant_constancy_residual"] = r.max_covariant_constancy_residual;
    j["determinants"] = r.determinants;
    j["tolerances"] = {{"ky", r.tolerances.ky},
                       {"covariant_constancy", r.tolerances.covariant_constancy},
                       {"determinant", r.tolerances.determinant}};
    j["is_ky"] = r.is_ky;
    j["is_covariant_constant"] = r.is_covariant_constant;
    j["is_nondegenerate"] = r.is_nondegenerate;
    return j;
}

json to_json(const multipole::IdentityReport& r) {
    json j;
    j["schema"] = kSchema;
    j["samples"] = r.samples;
    j["tolerance"] = multipole::kHoldsTol;
    json ids = json::array();
    for (const auto& id : r.identities) {
        json e;
        e["identity"] = id.id;
        e["anchor"] = id.anchor;
        e["lhs"] = id.lhs;
        e["rhs"] = id.rhs;
        e["residual"] = id.residual;
        e["verdict"] = multipole::to_string(id.verdict);
        if (!id.correction.empty()) e["corrected_by"] = id.correction;
        ids.push_back(std::move(e));
    }
    j["identities"] = std::move(ids);
    j["notes"] = r.notes;
    return j;
}

json to_json(const multipole::QuadrupoleFit& fit) {
    return {{"a", fit.a}, {"b", fit.b}, {"max_residual", fit.max_residual}};
}

std::string trajectory_csv(const dynamics::Trajectory& traj) {
    std::string out = "t";
    const std::size_t n = traj.z.empty() ? 0 : traj.z.front().dim();
    for (std::size_t i = 1; i <= n; ++i) out += ",x" + std::to_string(i);
    for (std::size_t i = 1; i <= n; ++i) out += ",p" + std::to_string(i);
    out += "\n";
    char buf[40];
    for (std::size_t s = 0; s < traj.z.size(); ++s) {
        std::snprintf(buf, sizeof buf, "%.17g", traj.t[s]);
        out += buf;
        for (double v : traj.z[s].x) {
            std::snprintf(buf, sizeof buf, ",%.17g", v);
            out += buf;
        }
        for (double v : traj.z[s].p) {
            std::snprintf(buf, sizeof buf, ",%.17g", v);
            out += buf;
        }
        out += "\n";
    }
    return out;
}

}  // namespace kyano::io
