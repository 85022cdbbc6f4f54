#include "wienerlab/report.hpp"

#include <map>
#include <sstream>

#include "wienerlab/errors.hpp"

namespace wienerlab {

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::fail: return "fail";
        case Verdict::vacuous: return "vacuous";
    }
    return "fail";
}

Verdict verdict_from_string(const std::string& s) {
    if (s == "pass") return Verdict::pass;
    if (s == "fail") return Verdict::fail;
    if (s == "vacuous") return Verdict::vacuous;
    throw SchemaError("/verdict", "unknown verdict '" + s + "'");
}

Json to_json(const DistanceEstimate& e) {
    Json j;
    j["method"] = to_string(e.method);
    j["value"] = e.value;
    j["ci"] = Json::array({e.ci_low, e.ci_high});
    if (e.n_samples.size() == 1) {
        j["n"] = e.n_samples.front();
    } else {
        j["n"] = e.n_samples;
    }
    return j;
}

DistanceEstimate distance_from_json(const Json& j) {
    DistanceEstimate e;
    e.method = distance_method_from_string(j.at("method").get<std::string>());
    e.value = j.at("value").get<double>();
    e.ci_low = j.at("ci").at(0).get<double>();
    e.ci_high = j.at("ci").at(1).get<double>();
    const auto& n = j.at("n");
    if (n.is_array()) {
        e.n_samples = n.get<std::vector<std::size_t>>();
    } else {
        e.n_samples = {n.get<std::size_t>()};
    }
    return e;
}

Json to_json(const ExperimentReport& r) {
    Json j;
    j["experiment"] = r.experiment;
    j["seed"] = r.seed;
    j["rows"] = Json::array();
    for (const auto& row : r.rows) j["rows"].push_back(row);
    j["summary"] = r.summary;
    j["verdict"] = to_string(r.verdict);
    j["notes"] = r.notes;
    return j;
}

ExperimentReport report_from_json(const Json& j) {
    if (const auto err = validate_report_json(j); !err.empty()) throw SchemaError(err, "invalid report");
    ExperimentReport r;
    r.experiment = j.at("experiment").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& row : j.at("rows")) r.rows.push_back(row);
    if (j.contains("summary")) r.summary = j.at("summary");
    r.verdict = verdict_from_string(j.at("verdict").get<std::string>());
    r.notes = j.at("notes").get<std::vector<std::string>>();
    return r;
}

namespace {

void flatten(const Json& v, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& out) {
    if (v.is_object()) {
        for (auto it = v.begin(); it != v.end(); ++it) {
            flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
        }
    } else if (v.is_array()) {
        for (std::size_t i = 0; i < v.size(); ++i) flatten(v[i], prefix + "." + std::to_string(i), out);
    } else if (v.is_string()) {
        out.emplace_back(prefix, v.get<std::string>());
    } else {
        out.emplace_back(prefix, v.dump());
    }
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

std::string rows_to_csv(const ExperimentReport& r) {
    std::vector<std::string> columns;
    std::vector<std::map<std::string, std::string>> cells;
    for (const auto& row : r.rows) {
        std::vector<std::pair<std::string, std::string>> flat;
        flatten(row, "", flat);
        std::map<std::string, std::string> m;
        for (auto& [k, v] : flat) {
            if (std::find(columns.begin(), columns.end(), k) == columns.end()) columns.push_back(k);
            m[k] = v;
        }
        cells.push_back(std::move(m));
    }
    std::ostringstream os;
    for (std::size_t c = 0; c < columns.size(); ++c) os << (c ? "," : "") << csv_escape(columns[c]);
    os << "\n";
    for (const auto& m : cells) {
        for (std::size_t c = 0; c < columns.size(); ++c) {
            const auto it = m.find(columns[c]);
            os << (c ? "," : "") << (it == m.end() ? "" : csv_escape(it->second));
        }
        os << "\n";
    }
    return os.str();
}

std::string validate_report_json(const Json& j) {
    if (!j.is_object()) return "/: report must be an object";
    if (!j.contains("experiment") || !j["experiment"].is_string()) return "/experiment: missing or not a string";
    if (!j.contains("seed") || !j["seed"].is_number_unsigned()) return "/seed: missing or not an unsigned integer";
    if (!j.contains("rows") || !j["rows"].is_array()) return "/rows: missing or not an array";
    for (std::size_t i = 0; i < j["rows"].size(); ++i) {
        if (!j["rows"][i].is_object()) return "/rows/" + std::to_string(i) + ": row must be an object";
    }
    if (j.contains("summary") && !j["summary"].is_object()) return "/summary: not an object";
    if (!j.contains("verdict") || !j["verdict"].is_string()) return "/verdict: missing or not a string";
    const auto v = j["verdict"].get<std::string>();
    if (v != "pass" && v != "fail" && v != "vacuous") return "/verdict: must be pass, fail or vacuous";
    if (!j.contains("notes") || !j["notes"].is_array()) return "/notes: missing or not an array";
    for (std::size_t i = 0; i < j["notes"].size(); ++i) {
        if (!j["notes"][i].is_string()) return "/notes/" + std::to_string(i) + ": note must be a string";
    }
    return {};
}

}  // namespace wienerlab
