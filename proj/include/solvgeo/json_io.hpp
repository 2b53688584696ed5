#pragma once

// JSON config parsing and report serialization for the command-line tool.
// Configs and reports use nlohmann::ordered_json so that identical inputs
// produce identical output bytes.
//
// Schema summary:
//   model   {"type": "heintze", "eigenvalues": [..]}
//           {"type": "soltype", "up": [..], "down": [..], "lambda": x}
//   metric  "identity" | array of matrix rows (frame Gram matrix)
//   point   {"n1": [..], "n2": [..], "t": x}   (n2 only for soltype models)

#include <json.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "solvgeo/lamplighter.hpp"
#include "solvgeo/lattice.hpp"
#include "solvgeo/models.hpp"
#include "solvgeo/roughsim.hpp"

namespace solvgeo {

using Json = nlohmann::ordered_json;

// Any malformed or missing configuration input. The CLI maps this (and
// std::invalid_argument from model constructors) to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Json load_json_file(const std::string& path);

const Json& require_field(const Json& j, const std::string& key);
double get_number(const Json& j, const std::string& key, double fallback);
int get_int(const Json& j, const std::string& key, int fallback);
bool get_bool(const Json& j, const std::string& key, bool fallback);
std::uint64_t get_u64(const Json& j, const std::string& key, std::uint64_t fallback);
std::string get_string(const Json& j, const std::string& key, const std::string& fallback);

using ModelSpec = std::variant<HeintzeModel, SolTypeModel>;

ModelSpec model_from_json(const Json& j);
Json model_to_json(const ModelSpec& m);
Derivation model_derivation(const ModelSpec& m);

FrameMetric metric_from_json(const Json& j, int dim);
Json metric_to_json(const FrameMetric& Q);

GroupPoint point_from_json(const Json& j, const Derivation& d);
Json point_to_json(const GroupPoint& p);

Json estimate_to_json(const DistanceEstimate& e);
Json path_to_json(const std::vector<GroupPoint>& path);

Json report_to_json(const SimilarityReport& r);
std::string report_to_csv(const SimilarityReport& r);

Json table_to_json(const std::vector<TableRow>& rows);
std::string table_to_csv(const std::vector<TableRow>& rows);

Json certificate_to_json(const LampCertificate& c);

// Shortest-round-trip decimal form of v, identical to JSON number output.
std::string format_number(double v);

}  // namespace solvgeo
