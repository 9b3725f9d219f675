#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "msubdiv/analysis.hpp"

namespace msubdiv {

using Json = nlohmann::ordered_json;

namespace detail {

[[noreturn]] inline void schema_error(const std::string& path, const std::string& what) {
    throw std::invalid_argument("scheme file: " + path + ": " + what);
}

inline Rational rational_from_json(const Json& j, const std::string& path) {
    if (j.is_number_integer()) return Rational(j.get<long long>());
    if (j.is_number_float()) return Rational::from_double(j.get<double>());
    if (j.is_string()) {
        try {
            return Rational::parse(j.get<std::string>());
        } catch (const std::exception& e) {
            schema_error(path, e.what());
        }
    }
    schema_error(path, "expected a number or a rational string like \"1/3\"");
}

inline Point point_from_json(const Json& j, int dim, const std::string& path) {
    if (!j.is_array() || int(j.size()) != dim)
        schema_error(path, "expected an integer vector of length " + std::to_string(dim));
    Point p(size_t(dim), 0);
    for (int i = 0; i < dim; ++i) {
        if (!j[size_t(i)].is_number_integer())
            schema_error(path + "[" + std::to_string(i) + "]", "expected an integer");
        p[size_t(i)] = j[size_t(i)].get<long long>();
    }
    return p;
}

inline std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return buf;
}

} // namespace detail

/// Scheme file schema: {"dimension": s, "operators": [{"label"?, "dilation":
/// [[..]..], "digits"?: [[..]..], "mask": [{"point": [..], "value": v}..]}..]}
/// where v is an integer, a float, or an exact string like "1/3".
inline SchemeSet parse_scheme_json(const Json& root) {
    if (!root.is_object()) detail::schema_error("$", "expected an object");
    if (!root.contains("dimension") || !root["dimension"].is_number_integer())
        detail::schema_error("$.dimension", "expected an integer");
    const int dim = root["dimension"].get<int>();
    if (dim < 1) detail::schema_error("$.dimension", "must be >= 1");
    if (!root.contains("operators") || !root["operators"].is_array() || root["operators"].empty())
        detail::schema_error("$.operators", "expected a non-empty array");

    std::vector<SubdivisionOp> ops;
    for (size_t k = 0; k < root["operators"].size(); ++k) {
        const Json& jop = root["operators"][k];
        const std::string base = "$.operators[" + std::to_string(k) + "]";
        if (!jop.is_object()) detail::schema_error(base, "expected an object");
        std::string label = jop.contains("label") && jop["label"].is_string()
                                ? jop["label"].get<std::string>()
                                : "S" + std::to_string(k + 1);

        if (!jop.contains("dilation") || !jop["dilation"].is_array() ||
            int(jop["dilation"].size()) != dim)
            detail::schema_error(base + ".dilation", "expected " + std::to_string(dim) + " rows");
        std::vector<Coord> entries;
        for (int r = 0; r < dim; ++r) {
            const Json& row = jop["dilation"][size_t(r)];
            Point p = detail::point_from_json(row, dim, base + ".dilation[" + std::to_string(r) + "]");
            entries.insert(entries.end(), p.begin(), p.end());
        }
        IntMatrix dilation(dim, std::move(entries));

        std::optional<LatticeSet> digits;
        if (jop.contains("digits")) {
            if (!jop["digits"].is_array()) detail::schema_error(base + ".digits", "expected an array");
            std::vector<Point> dpts;
            for (size_t i = 0; i < jop["digits"].size(); ++i)
                dpts.push_back(detail::point_from_json(jop["digits"][i], dim,
                                                       base + ".digits[" + std::to_string(i) + "]"));
            digits = LatticeSet(dim, std::move(dpts));
        }

        if (!jop.contains("mask") || !jop["mask"].is_array() || jop["mask"].empty())
            detail::schema_error(base + ".mask", "expected a non-empty array");
        std::map<Point, Rational> coef;
        for (size_t i = 0; i < jop["mask"].size(); ++i) {
            const Json& jm = jop["mask"][i];
            const std::string mp = base + ".mask[" + std::to_string(i) + "]";
            if (!jm.is_object() || !jm.contains("point") || !jm.contains("value"))
                detail::schema_error(mp, "expected {point, value}");
            Point p = detail::point_from_json(jm["point"], dim, mp + ".point");
            if (coef.count(p)) detail::schema_error(mp + ".point", "duplicate mask point");
            coef.emplace(std::move(p), detail::rational_from_json(jm["value"], mp + ".value"));
        }
        try {
            ops.emplace_back(std::move(label), Mask(dim, std::move(coef)), std::move(dilation),
                             std::move(digits));
        } catch (const std::invalid_argument& e) {
            detail::schema_error(base, e.what());
        }
    }
    return SchemeSet(std::move(ops));
}

inline SchemeSet load_scheme_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open scheme file: " + path);
    Json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw std::invalid_argument("scheme file: invalid JSON: " + std::string(e.what()));
    }
    return parse_scheme_json(j);
}

inline Json rational_to_json(const Rational& r) {
    if (r.is_integer() && r.num() <= Int128(1) << 60 && r.num() >= -(Int128(1) << 60))
        return Json(static_cast<long long>(r.num()));
    return Json(r.str());
}

inline Json scheme_to_json(const SchemeSet& s) {
    Json root;
    root["dimension"] = s.dim();
    root["operators"] = Json::array();
    for (const auto& op : s.ops) {
        Json jop;
        jop["label"] = op.label;
        jop["dilation"] = Json::array();
        for (int r = 0; r < s.dim(); ++r) {
            Json row = Json::array();
            for (int c = 0; c < s.dim(); ++c) row.push_back(op.dilation(r, c));
            jop["dilation"].push_back(std::move(row));
        }
        jop["digits"] = Json::array();
        for (const Point& d : op.digits.points()) jop["digits"].push_back(d);
        jop["mask"] = Json::array();
        for (const auto& [p, v] : op.mask.coefficients()) {
            Json jm;
            jm["point"] = p;
            jm["value"] = rational_to_json(v);
            jop["mask"].push_back(std::move(jm));
        }
        root["operators"].push_back(std::move(jop));
    }
    return root;
}

/// (operator label, digit) of one member of the restricted family, in family
/// order; used to spell out certificate words.
using FamilyKeys = std::vector<std::pair<std::string, Point>>;

inline FamilyKeys family_keys(const RestrictedFamily& rf) {
    FamilyKeys keys;
    for (const auto& m : rf.members) keys.emplace_back(m.op_label, m.digit);
    return keys;
}

inline Json estimate_to_json(const JsrEstimate& est, const FamilyKeys& keys) {
    Json j;
    j["lower"] = est.lower;
    j["upper"] = est.upper;
    j["status"] = to_string(est.status);
    j["word"] = Json::array();
    for (int w : est.word) {
        Json e;
        if (size_t(w) < keys.size()) {
            e["digit"] = keys[size_t(w)].second;
            e["op_label"] = keys[size_t(w)].first;
        } else {
            e["index"] = w;
        }
        j["word"].push_back(std::move(e));
    }
    j["depth"] = est.upper_depth;
    if (est.polytope_vertices > 0) j["vertices"] = est.polytope_vertices;
    if (est.budget_exhausted) j["budget_exhausted"] = true;
    return j;
}

inline Json report_to_json(const ConvergenceReport& rep, const FamilyKeys& keys) {
    Json j;
    j["verdict"] = to_string(rep.verdict);
    if (!rep.precondition_failure.empty()) j["precondition_failure"] = rep.precondition_failure;
    Json assumptions;
    assumptions["sum_rules"] = rep.sum_rules;
    assumptions["jointly_expanding"] =
        rep.expansion.verdict == Expansion::certified_yes
            ? "certified-yes"
            : (rep.expansion.verdict == Expansion::certified_no ? "certified-no" : "inconclusive");
    assumptions["expansion_depth"] = rep.expansion.depth;
    Json an = Json::array();
    for (const auto& e : rep.assumption_n) {
        Json row;
        row["label"] = e.label;
        row["ok"] = e.ok;
        row["norm2_inverse"] = e.norm2;
        an.push_back(std::move(row));
    }
    assumptions["assumption_n"] = std::move(an);
    assumptions["power_n"] = rep.power_n;
    j["assumptions"] = std::move(assumptions);
    if (rep.jsr_ran) {
        Json omega;
        omega["provenance"] = to_string(rep.omega.provenance);
        omega["size"] = rep.omega.points.size();
        omega["points"] = Json::array();
        for (const Point& p : rep.omega.points.points()) omega["points"].push_back(p);
        omega["dimV"] = rep.dims.dimV;
        omega["dimVtilde"] = rep.dims.dimVtilde;
        omega["components"] = rep.dims.components;
        j["omega"] = std::move(omega);
        j["jsr"] = estimate_to_json(rep.jsr, keys);
    }
    j["trail"] = rep.trail;
    return j;
}

inline Json transition_to_json(const std::vector<TransitionMatrix>& family) {
    Json j;
    j["omega"] = Json::array();
    if (!family.empty())
        for (const Point& p : family.front().omega_order) j["omega"].push_back(p);
    j["matrices"] = Json::array();
    for (const auto& t : family) {
        Json m;
        m["op_label"] = t.op_label;
        m["digit"] = t.digit;
        m["rows"] = Json::array();
        for (int r = 0; r < t.entries.rows(); ++r) {
            Json row = Json::array();
            for (int c = 0; c < t.entries.cols(); ++c) row.push_back(t.entries(r, c).str());
            m["rows"].push_back(std::move(row));
        }
        j["matrices"].push_back(std::move(m));
    }
    return j;
}

inline std::string omega_to_csv(const LatticeSet& omega) {
    std::string out;
    for (const Point& p : omega.points()) {
        for (size_t i = 0; i < p.size(); ++i) {
            if (i) out += ",";
            out += std::to_string(p[i]);
        }
        out += "\n";
    }
    return out;
}

inline std::string cloud_to_csv(const PointCloud& pc) {
    std::string out;
    for (size_t i = 0; i < pc.points.size(); ++i) {
        for (size_t c = 0; c < pc.points[i].size(); ++c) {
            if (c) out += ",";
            out += detail::fmt_double(pc.points[i][c]);
        }
        if (!pc.values.empty()) out += "," + detail::fmt_double(pc.values[i]);
        out += "\n";
    }
    return out;
}

struct RasterSpec {
    int width = 512;
    int height = 512;
    double xmin = -1, xmax = 1, ymin = -1, ymax = 1;
};

/// Binary 8-bit PGM (P5): marked pixels 255 on a 0 background, row-major from
/// the top; fixed bounding box keeps the output reproducible.
inline std::string rasterize_pgm(const PointCloud& pc, const RasterSpec& spec) {
    if (pc.dim != 1 && pc.dim != 2)
        throw std::invalid_argument("rasterize_pgm: only 1-D and 2-D clouds supported");
    if (spec.width < 1 || spec.height < 1 || spec.xmax <= spec.xmin || spec.ymax <= spec.ymin)
        throw std::invalid_argument("rasterize_pgm: bad raster spec");
    std::vector<unsigned char> img(size_t(spec.width) * size_t(spec.height), 0);
    for (const auto& p : pc.points) {
        double x = p[0];
        double y = pc.dim == 2 ? p[1] : 0.5 * (spec.ymin + spec.ymax);
        if (x < spec.xmin || x > spec.xmax || y < spec.ymin || y > spec.ymax) continue;
        int col = std::min(spec.width - 1,
                           int((x - spec.xmin) / (spec.xmax - spec.xmin) * spec.width));
        int row = std::min(spec.height - 1,
                           int((spec.ymax - y) / (spec.ymax - spec.ymin) * spec.height));
        img[size_t(row) * size_t(spec.width) + size_t(col)] = 255;
    }
    std::string out = "P5\n" + std::to_string(spec.width) + " " + std::to_string(spec.height) +
                      "\n255\n";
    out.append(reinterpret_cast<const char*>(img.data()), img.size());
    return out;
}

inline void write_file(const std::string& path, const std::string& content, bool binary = false) {
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out.write(content.data(), std::streamsize(content.size()));
    if (!out) throw std::runtime_error("failed writing output file: " + path);
}

} // namespace msubdiv
