#include "solvgeo/json_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace solvgeo {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw ConfigError(msg); }

Vec vec_from_json(const Json& j, const std::string& what) {
    if (!j.is_array()) fail(what + " must be an array of numbers");
    Vec v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) fail(what + " must contain only numbers");
        v[static_cast<int>(i)] = j[i].get<double>();
    }
    return v;
}

std::vector<double> list_from_json(const Json& j, const std::string& what) {
    Vec v = vec_from_json(j, what);
    return std::vector<double>(v.data(), v.data() + v.size());
}

Json vec_to_json(const Vec& v) {
    Json a = Json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

Json optional_to_json(const std::optional<int>& v) {
    return v ? Json(*v) : Json(nullptr);
}

}  // namespace

Json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open config file: " + path);
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        fail("invalid JSON in " + path + ": " + e.what());
    }
}

const Json& require_field(const Json& j, const std::string& key) {
    if (!j.is_object()) fail("expected an object with field '" + key + "'");
    auto it = j.find(key);
    if (it == j.end()) fail("missing field '" + key + "'");
    return *it;
}

double get_number(const Json& j, const std::string& key, double fallback) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    if (!j[key].is_number()) fail("field '" + key + "' must be a number");
    return j[key].get<double>();
}

int get_int(const Json& j, const std::string& key, int fallback) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    if (!j[key].is_number_integer()) fail("field '" + key + "' must be an integer");
    return j[key].get<int>();
}

bool get_bool(const Json& j, const std::string& key, bool fallback) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    if (!j[key].is_boolean()) fail("field '" + key + "' must be a boolean");
    return j[key].get<bool>();
}

std::uint64_t get_u64(const Json& j, const std::string& key, std::uint64_t fallback) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    if (!j[key].is_number_integer() || j[key].is_number_float() || j[key].get<double>() < 0)
        fail("field '" + key + "' must be a non-negative integer");
    return j[key].get<std::uint64_t>();
}

std::string get_string(const Json& j, const std::string& key, const std::string& fallback) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    if (!j[key].is_string()) fail("field '" + key + "' must be a string");
    return j[key].get<std::string>();
}

ModelSpec model_from_json(const Json& j) {
    const Json& type = require_field(j, "type");
    if (!type.is_string()) fail("model 'type' must be a string");
    std::string kind = type.get<std::string>();
    try {
        if (kind == "heintze")
            return HeintzeModel(list_from_json(require_field(j, "eigenvalues"), "eigenvalues"));
        if (kind == "soltype") {
            const Json& lam = require_field(j, "lambda");
            if (!lam.is_number()) fail("field 'lambda' must be a number");
            return SolTypeModel::make(list_from_json(require_field(j, "up"), "up"),
                                      list_from_json(require_field(j, "down"), "down"),
                                      lam.get<double>());
        }
    } catch (const std::invalid_argument& e) {
        fail(std::string("invalid model: ") + e.what());
    }
    fail("unknown model type '" + kind + "' (expected 'heintze' or 'soltype')");
}

Json model_to_json(const ModelSpec& m) {
    Json j;
    if (const auto* hm = std::get_if<HeintzeModel>(&m)) {
        j["type"] = "heintze";
        j["eigenvalues"] = hm->eigenvalues;
    } else {
        const auto& sm = std::get<SolTypeModel>(m);
        j["type"] = "soltype";
        j["up"] = sm.up.eigenvalues;
        j["down"] = sm.down.eigenvalues;
        j["lambda"] = sm.lambda;
    }
    return j;
}

Derivation model_derivation(const ModelSpec& m) {
    return std::visit([](const auto& model) { return derivation(model); }, m);
}

FrameMetric metric_from_json(const Json& j, int dim) {
    if (j.is_string()) {
        if (j.get<std::string>() == "identity") return FrameMetric::identity(dim);
        fail("metric string must be 'identity'");
    }
    if (!j.is_array()) fail("metric must be 'identity' or an array of matrix rows");
    if (static_cast<int>(j.size()) != dim)
        fail("metric must have " + std::to_string(dim) + " rows");
    Mat Q(dim, dim);
    for (int r = 0; r < dim; ++r) {
        Vec row = vec_from_json(j[r], "metric row");
        if (row.size() != dim) fail("metric rows must have " + std::to_string(dim) + " entries");
        Q.row(r) = row.transpose();
    }
    try {
        return FrameMetric(std::move(Q));
    } catch (const std::invalid_argument& e) {
        fail(std::string("invalid metric: ") + e.what());
    }
}

Json metric_to_json(const FrameMetric& Q) {
    Json rows = Json::array();
    for (int r = 0; r < Q.dim(); ++r) rows.push_back(vec_to_json(Q.Q.row(r).transpose()));
    return rows;
}

GroupPoint point_from_json(const Json& j, const Derivation& d) {
    Vec n1 = vec_from_json(require_field(j, "n1"), "point field 'n1'");
    if (n1.size() != d.k1)
        fail("point field 'n1' must have " + std::to_string(d.k1) + " entries");
    Vec n2(0);
    if (d.k2 > 0) {
        n2 = vec_from_json(require_field(j, "n2"), "point field 'n2'");
        if (n2.size() != d.k2)
            fail("point field 'n2' must have " + std::to_string(d.k2) + " entries");
    } else if (j.contains("n2") && !j["n2"].empty()) {
        fail("point field 'n2' is not allowed for a heintze model");
    }
    const Json& t = require_field(j, "t");
    if (!t.is_number()) fail("point field 't' must be a number");
    return GroupPoint(std::move(n1), std::move(n2), t.get<double>());
}

Json point_to_json(const GroupPoint& p) {
    Json j;
    j["n1"] = vec_to_json(p.n1);
    if (p.n2.size() > 0) j["n2"] = vec_to_json(p.n2);
    j["t"] = p.height;
    return j;
}

Json estimate_to_json(const DistanceEstimate& e) {
    Json j;
    j["value"] = e.value;
    j["upper_bound"] = e.upper_bound_flag;
    j["refined"] = e.refined;
    j["warning"] = e.warning;
    if (!e.path.empty()) j["path"] = path_to_json(e.path);
    return j;
}

Json path_to_json(const std::vector<GroupPoint>& path) {
    Json a = Json::array();
    for (const auto& p : path) a.push_back(point_to_json(p));
    return a;
}

Json report_to_json(const SimilarityReport& r) {
    Json j;
    j["verdict"] = to_string(r.verdict);
    j["lambda_hat"] = r.lambda_hat;
    j["trend_slope"] = r.trend_slope;
    j["residual_budget"] = r.residual_budget;
    j["empirical_constant"] = r.empirical_constant;
    j["discretization_at_far"] = r.discretization_at_far;
    j["sample_count"] = r.sample_count;
    j["note"] = r.note;
    Json buckets = Json::array();
    for (const auto& b : r.buckets) {
        Json bj;
        bj["lo"] = b.lo;
        bj["hi"] = b.hi;
        bj["max_residual"] = b.max_residual;
        bj["count"] = b.count;
        buckets.push_back(std::move(bj));
    }
    j["buckets"] = std::move(buckets);
    Json rows = Json::array();
    for (const auto& row : r.rows) {
        Json rj;
        rj["separation"] = row.separation;
        rj["d1"] = row.d1;
        rj["d2"] = row.d2;
        rows.push_back(std::move(rj));
    }
    j["rows"] = std::move(rows);
    return j;
}

std::string report_to_csv(const SimilarityReport& r) {
    std::ostringstream out;
    out << "separation,d1,d2,residual\n";
    for (const auto& row : r.rows) {
        double residual = std::abs(row.d1 - r.lambda_hat * row.d2);
        out << format_number(row.separation) << ',' << format_number(row.d1) << ','
            << format_number(row.d2) << ',' << format_number(residual) << '\n';
    }
    return out.str();
}

Json table_to_json(const std::vector<TableRow>& rows) {
    Json a = Json::array();
    for (const auto& row : rows) {
        Json j;
        j["n"] = row.n;
        j["dw_far"] = optional_to_json(row.dw_far);
        j["da_far"] = optional_to_json(row.da_far);
        j["dw_run"] = optional_to_json(row.dw_run);
        j["da_run"] = optional_to_json(row.da_run);
        a.push_back(std::move(j));
    }
    return a;
}

std::string table_to_csv(const std::vector<TableRow>& rows) {
    std::ostringstream out;
    out << "n,dw_far,da_far,dw_run,da_run\n";
    auto cell = [&](const std::optional<int>& v) {
        if (v) out << *v;
    };
    for (const auto& row : rows) {
        out << row.n << ',';
        cell(row.dw_far);
        out << ',';
        cell(row.da_far);
        out << ',';
        cell(row.dw_run);
        out << ',';
        cell(row.da_run);
        out << '\n';
    }
    return out.str();
}

Json certificate_to_json(const LampCertificate& c) {
    Json j;
    j["m"] = c.m;
    j["n_max"] = c.n_max;
    j["far_ratio"] = c.far_ratio;
    j["run_ratio"] = c.run_ratio;
    j["gap"] = c.gap;
    j["comparison"] = report_to_json(c.comparison);
    return j;
}

std::string format_number(double v) { return Json(v).dump(); }

}  // namespace solvgeo
