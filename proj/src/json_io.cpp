#include "affest/json_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "affest/errors.hpp"

namespace affest {

namespace {

void write_number(std::string& out, double v) {
    if (!std::isfinite(v)) {
        out += "null";
        return;
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
}

void write_value(std::string& out, const Json& j, int indent, int depth) {
    auto newline = [&](int d) {
        if (indent < 0) return;
        out += '\n';
        out.append(static_cast<std::size_t>(indent * d), ' ');
    };
    switch (j.type()) {
        case Json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += '{';
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ',';
                first = false;
                newline(depth + 1);
                out += Json(it.key()).dump();
                out += indent < 0 ? ":" : ": ";
                write_value(out, it.value(), indent, depth + 1);
            }
            newline(depth);
            out += '}';
            return;
        }
        case Json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            // Arrays of scalars stay on one line to keep matrices readable.
            const bool flat = std::all_of(j.begin(), j.end(), [](const Json& e) { return e.is_primitive(); });
            out += '[';
            bool first = true;
            for (const auto& e : j) {
                if (!first) out += flat && indent >= 0 ? ", " : ",";
                first = false;
                if (!flat) newline(depth + 1);
                write_value(out, e, indent, depth + 1);
            }
            if (!flat) newline(depth);
            out += ']';
            return;
        }
        case Json::value_t::number_float:
            write_number(out, j.get<double>());
            return;
        default:
            out += j.dump();
    }
}

double number(const Json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_number()) {
        throw Error(ErrorCode::Config, std::string("missing numeric field '") + key + "'");
    }
    return j.at(key).get<double>();
}

Json moment_value_json(const MomentValue& v) {
    Json out = {{"value", v.value}, {"source", to_string(v.source)}};
    if (v.source == Provenance::Simulated) {
        out["std_error"] = v.std_error;
        out["closed_form"] = std::isfinite(v.reference) ? Json(v.reference) : Json(nullptr);
    }
    return out;
}

}  // namespace

std::string dump_json(const Json& j, int indent) {
    std::string out;
    write_value(out, j, indent, 0);
    return out;
}

Json to_json(const ModelParams& p) {
    return {{"a", p.a}, {"b", p.b}, {"m", p.m}, {"theta", p.theta}};
}

ModelParams params_from_json(const Json& j) {
    if (!j.is_object()) throw Error(ErrorCode::Config, "params must be an object");
    ModelParams p{number(j, "a"), number(j, "b"), number(j, "m"), number(j, "theta")};
    validate(p);
    return p;
}

Json to_json(const SufficientStats& s) {
    return {
        {"T", s.T},
        {"int_inv_y_dY", s.int_inv_y_dY},
        {"delta_y", s.delta_y},
        {"int_inv_y_dX", s.int_inv_y_dX},
        {"int_x_over_y_dX", s.int_x_over_y_dX},
        {"int_inv_y_ds", s.int_inv_y_ds},
        {"int_x_over_y_ds", s.int_x_over_y_ds},
        {"int_x2_over_y_ds", s.int_x2_over_y_ds},
        {"int_y_ds", s.int_y_ds},
        {"int_x_ds", s.int_x_ds},
        {"int_x2_ds", s.int_x2_ds},
        {"int_x_dX", s.int_x_dX},
        {"delta_x", s.delta_x},
    };
}

SufficientStats stats_from_json(const Json& j) {
    SufficientStats s;
    s.T = number(j, "T");
    s.int_inv_y_dY = number(j, "int_inv_y_dY");
    s.delta_y = number(j, "delta_y");
    s.int_inv_y_dX = number(j, "int_inv_y_dX");
    s.int_x_over_y_dX = number(j, "int_x_over_y_dX");
    s.int_inv_y_ds = number(j, "int_inv_y_ds");
    s.int_x_over_y_ds = number(j, "int_x_over_y_ds");
    s.int_x2_over_y_ds = number(j, "int_x2_over_y_ds");
    s.int_y_ds = number(j, "int_y_ds");
    s.int_x_ds = number(j, "int_x_ds");
    s.int_x2_ds = number(j, "int_x2_ds");
    s.int_x_dX = number(j, "int_x_dX");
    s.delta_x = number(j, "delta_x");
    return s;
}

Json to_json(const Estimate& e) {
    Json values = Json::object();
    for (const auto& [k, v] : e.values) values[k] = v;
    Json denoms = Json::object();
    for (const auto& [k, v] : e.denominators) denoms[k] = v;
    return {{"estimator", e.estimator}, {"values", values}, {"denominators", denoms}, {"valid", e.valid}};
}

Json to_json(const StationaryMoments& mom) {
    Json out = Json::object();
    for (const auto& f : moment_fields()) out[f.name] = moment_value_json(mom.*f.member);
    return out;
}

Json to_json(const SimulatedMoments& sm) {
    return {{"moments", to_json(sm.moments)}, {"warnings", sm.warnings}};
}

Json matrix_to_json(const Eigen::MatrixXd& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
        rows.push_back(row);
    }
    return rows;
}

namespace {

Json provenance_block(const StationaryMoments& mom, std::initializer_list<const char*> names) {
    Json out = Json::object();
    for (const auto& f : moment_fields()) {
        for (const char* n : names) {
            if (std::string(n) == f.name) out[f.name] = moment_value_json(mom.*f.member);
        }
    }
    return out;
}

}  // namespace

Json to_json(const MleCovariance& c, const StationaryMoments& mom) {
    return {{"estimator", "mle_full"},
            {"order", {"a", "b", "m", "theta"}},
            {"sigma", matrix_to_json(c.sigma)},
            {"moments", provenance_block(mom, {"ey", "e_inv_y", "ex_over_y", "ex2_over_y"})}};
}

Json to_json(const LseCovariance& c, const StationaryMoments& mom) {
    return {{"estimator", "lse_full"},
            {"order", {"m", "theta"}},
            {"sigma", matrix_to_json(c.sigma)},
            {"moments", provenance_block(mom, {"ey", "ex", "exy", "ex2", "ex2y"})}};
}

Json to_json(const OrderingReport& r) {
    Json out = Json::array();
    for (const auto& c : r.checks) {
        out.push_back({{"name", c.name},
                       {"lhs", c.lhs},
                       {"rhs", c.rhs},
                       {"strict", c.strict},
                       {"holds", c.holds},
                       {"margin", c.margin}});
    }
    return out;
}

}  // namespace affest
