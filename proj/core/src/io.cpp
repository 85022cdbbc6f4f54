#include "wienerlab/io.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <system_error>

#include <unistd.h>

#include "wienerlab/errors.hpp"

namespace wienerlab {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& msg) {
    throw SchemaError(where.empty() ? "/" : where, msg);
}

std::string at_key(const std::string& where, const std::string& key) { return where + "/" + key; }
std::string at_index(const std::string& where, std::size_t i) { return where + "/" + std::to_string(i); }

void require_object(const Json& j, const std::string& where) {
    if (!j.is_object()) fail(where, "expected an object");
}

const Json& field(const Json& j, const std::string& where, const std::string& key) {
    require_object(j, where);
    const auto it = j.find(key);
    if (it == j.end()) fail(at_key(where, key), "missing required field");
    return *it;
}

double as_number(const Json& v, const std::string& where) {
    if (!v.is_number()) fail(where, "expected a number");
    return v.get<double>();
}

std::uint64_t as_uint(const Json& v, const std::string& where) {
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) fail(where, "expected a non-negative integer");
    return v.get<std::uint64_t>();
}

int as_int(const Json& v, const std::string& where) {
    if (!v.is_number_integer()) fail(where, "expected an integer");
    return v.get<int>();
}

const Json& as_array(const Json& v, const std::string& where) {
    if (!v.is_array()) fail(where, "expected an array");
    return v;
}

std::vector<double> number_list(const Json& v, const std::string& where) {
    std::vector<double> out;
    const auto& arr = as_array(v, where);
    for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(as_number(arr[i], at_index(where, i)));
    return out;
}

std::vector<std::size_t> index_list(const Json& v, const std::string& where) {
    std::vector<std::size_t> out;
    const auto& arr = as_array(v, where);
    for (std::size_t i = 0; i < arr.size(); ++i) {
        out.push_back(static_cast<std::size_t>(as_uint(arr[i], at_index(where, i))));
    }
    return out;
}

std::vector<Label> label_list(const Json& v, const std::string& where) {
    std::vector<Label> out;
    const auto& arr = as_array(v, where);
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const auto x = as_uint(arr[i], at_index(where, i));
        if (x == 0 || x > 0xffffffffULL) fail(at_index(where, i), "labels must lie in [1, 2^32)");
        out.push_back(static_cast<Label>(x));
    }
    return out;
}

// Runs a library constructor and reports its precondition failures at `where`.
template <class Fn>
auto guarded(const std::string& where, Fn&& fn) {
    try {
        return fn();
    } catch (const SchemaError&) {
        throw;
    } catch (const std::exception& e) {
        fail(where, e.what());
    }
}

std::string file_prefix(const fs::path& path) { return path.string() + ":"; }

}  // namespace

// ---------------------------------------------------------------------------
// Serialization

Json to_json(const SymmetricKernel& f) {
    Json j;
    j["order"] = f.order();
    j["dim"] = f.dim();
    j["entries"] = Json::array();
    for (const auto& [idx, c] : f.entries()) {
        Json e;
        e["idx"] = std::vector<Label>(idx.begin(), idx.end());
        e["coef"] = c;
        j["entries"].push_back(std::move(e));
    }
    return j;
}

Json to_json(const ChaosElement& f) {
    Json j;
    j["dim"] = f.dim();
    j["constant"] = f.constant();
    j["kernels"] = Json::array();
    for (int k = 1; k <= f.max_order(); ++k) {
        if (const auto* fk = f.kernel(k)) j["kernels"].push_back(to_json(*fk));
    }
    return j;
}

Json to_json(const ChaosVector& v) {
    Json j;
    j["components"] = Json::array();
    for (const auto& c : v.components()) j["components"].push_back(to_json(c));
    return j;
}

namespace {

Json law_to_json(const InputLaw& law) {
    switch (law.kind()) {
        case InputLaw::Kind::gaussian: return "gaussian";
        case InputLaw::Kind::rademacher: return "rademacher";
        case InputLaw::Kind::discrete: break;
    }
    Json j;
    j["values"] = law.values();
    j["probs"] = law.probs();
    return j;
}

}  // namespace

Json to_json(const MultilinearSpec& spec) {
    Json j;
    j["n"] = spec.n;
    j["degree"] = spec.degree;
    j["law"] = law_to_json(spec.law);
    j["terms"] = Json::array();
    for (const auto& [s, c] : spec.coefs) {
        Json t;
        t["set"] = s;
        t["coef"] = c;
        j["terms"].push_back(std::move(t));
    }
    return j;
}

// ---------------------------------------------------------------------------
// Parsing

SymmetricKernel kernel_from_json(const Json& j, const std::string& where) {
    const int order = as_int(field(j, where, "order"), at_key(where, "order"));
    if (order < 1 || order > kMaxOrder) fail(at_key(where, "order"), "order must lie in [1, 8]");
    const auto dim = static_cast<std::size_t>(as_uint(field(j, where, "dim"), at_key(where, "dim")));
    if (dim == 0) fail(at_key(where, "dim"), "dim must be positive");
    const std::string ew = at_key(where, "entries");
    const auto& entries = as_array(field(j, where, "entries"), ew);
    std::vector<RawEntry> raw;
    std::set<std::vector<Label>> seen;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const std::string w = at_index(ew, i);
        const std::string iw = at_key(w, "idx");
        RawEntry e;
        e.idx = label_list(field(entries[i], w, "idx"), iw);
        e.coef = as_number(field(entries[i], w, "coef"), at_key(w, "coef"));
        if (static_cast<int>(e.idx.size()) != order) {
            fail(iw, "index has " + std::to_string(e.idx.size()) + " labels, order is " + std::to_string(order));
        }
        if (!std::is_sorted(e.idx.begin(), e.idx.end())) fail(iw, "index labels must be sorted ascending");
        for (Label v : e.idx) {
            if (v > dim) fail(iw, "label " + std::to_string(v) + " exceeds dim " + std::to_string(dim));
        }
        if (!seen.insert(e.idx).second) fail(iw, "duplicate index");
        raw.push_back(std::move(e));
    }
    return guarded(where, [&] { return make_kernel(order, dim, raw); });
}

ChaosElement chaos_from_json(const Json& j, const std::string& where) {
    const auto dim = static_cast<std::size_t>(as_uint(field(j, where, "dim"), at_key(where, "dim")));
    if (dim == 0) fail(at_key(where, "dim"), "dim must be positive");
    double constant = 0.0;
    if (j.contains("constant")) constant = as_number(j["constant"], at_key(where, "constant"));
    std::vector<SymmetricKernel> kernels;
    std::set<int> orders;
    if (j.contains("kernels")) {
        const std::string kw = at_key(where, "kernels");
        const auto& arr = as_array(j["kernels"], kw);
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const std::string w = at_index(kw, i);
            Json k = arr[i];
            require_object(k, w);
            if (!k.contains("dim")) k["dim"] = dim;
            auto f = kernel_from_json(k, w);
            if (f.dim() != dim) fail(at_key(w, "dim"), "kernel dim differs from element dim");
            if (!orders.insert(f.order()).second) fail(at_key(w, "order"), "repeated order");
            kernels.push_back(std::move(f));
        }
    }
    return guarded(where, [&] { return ChaosElement(dim, constant, std::move(kernels)); });
}

ChaosVector chaos_vector_from_json(const Json& j, const std::string& where) {
    const std::string cw = at_key(where, "components");
    const auto& arr = as_array(field(j, where, "components"), cw);
    if (arr.empty()) fail(cw, "need at least one component");
    std::vector<ChaosElement> comps;
    for (std::size_t i = 0; i < arr.size(); ++i) comps.push_back(chaos_from_json(arr[i], at_index(cw, i)));
    return guarded(cw, [&] { return ChaosVector(std::move(comps)); });
}

InputLaw law_from_json(const Json& j, const std::string& where) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "gaussian") return InputLaw::gaussian();
        if (s == "rademacher") return InputLaw::rademacher();
        fail(where, "unknown law '" + s + "'");
    }
    auto values = number_list(field(j, where, "values"), at_key(where, "values"));
    auto probs = number_list(field(j, where, "probs"), at_key(where, "probs"));
    return guarded(where, [&] { return InputLaw::discrete(std::move(values), std::move(probs)); });
}

MultilinearSpec multilinear_from_json(const Json& j, const std::string& where) {
    MultilinearSpec spec;
    spec.n = static_cast<std::size_t>(as_uint(field(j, where, "n"), at_key(where, "n")));
    spec.degree = as_int(field(j, where, "degree"), at_key(where, "degree"));
    spec.law = j.contains("law") ? law_from_json(j["law"], at_key(where, "law")) : InputLaw::rademacher();
    const std::string tw = at_key(where, "terms");
    const auto& terms = as_array(field(j, where, "terms"), tw);
    for (std::size_t i = 0; i < terms.size(); ++i) {
        const std::string w = at_index(tw, i);
        auto set = label_list(field(terms[i], w, "set"), at_key(w, "set"));
        const double c = as_number(field(terms[i], w, "coef"), at_key(w, "coef"));
        if (!spec.coefs.emplace(std::move(set), c).second) fail(at_key(w, "set"), "duplicate subset");
    }
    guarded(where, [&] {
        spec.validate();
        return 0;
    });
    return spec;
}

// ---------------------------------------------------------------------------
// Files

Json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError(file_prefix(path), "cannot open file");
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(file_prefix(path), std::string("malformed JSON: ") + e.what());
    }
}

SymmetricKernel load_kernel(const fs::path& path) { return kernel_from_json(read_json_file(path), file_prefix(path)); }

ChaosElement load_chaos(const fs::path& path) { return chaos_from_json(read_json_file(path), file_prefix(path)); }

ChaosVector load_chaos_vector(const fs::path& path) {
    return chaos_vector_from_json(read_json_file(path), file_prefix(path));
}

void write_file_atomic(const fs::path& path, const std::string& content) {
    const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
    const fs::path tmp = dir / ("." + path.filename().string() + ".tmp." + std::to_string(::getpid()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw std::runtime_error("cannot rename onto " + path.string() + ": " + ec.message());
    }
}

void save_kernel(const fs::path& path, const SymmetricKernel& f) { write_file_atomic(path, to_json(f).dump(2) + "\n"); }

void save_chaos(const fs::path& path, const ChaosElement& f) { write_file_atomic(path, to_json(f).dump(2) + "\n"); }

std::string report_text(const ExperimentReport& r) { return to_json(r).dump(2) + "\n"; }

void save_report(const fs::path& path, const ExperimentReport& r, ReportFormat format) {
    write_file_atomic(path, format == ReportFormat::json ? report_text(r) : rows_to_csv(r));
}

ExperimentReport load_report(const fs::path& path) {
    const auto j = read_json_file(path);
    if (const auto err = validate_report_json(j); !err.empty()) throw SchemaError(file_prefix(path) + err, "invalid report");
    return report_from_json(j);
}

std::string samples_csv(const SampleBatch& batch) {
    std::ostringstream os;
    os.precision(17);
    if (batch.width == 1) {
        os << "value\n";
    } else {
        for (std::size_t j = 0; j < batch.width; ++j) os << (j ? "," : "") << "x" << (j + 1);
        os << "\n";
    }
    for (std::size_t i = 0; i < batch.size(); ++i) {
        for (std::size_t j = 0; j < batch.width; ++j) os << (j ? "," : "") << batch.at(i, j);
        os << "\n";
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Configs

namespace {

const std::set<std::string> kExperiments = {"fourth-moment", "shigekawa", "dm", "cw", "dball", "pt", "moo", "d12"};

// Inline object or path relative to the config directory.
template <class T, class Parse>
T resolve(const Json& v, const std::string& where, const fs::path& base, Parse&& parse) {
    if (v.is_string()) {
        const fs::path p = base / v.get<std::string>();
        if (!fs::exists(p)) fail(where, "file not found: " + p.string());
        return parse(read_json_file(p), file_prefix(p));
    }
    return parse(v, where);
}

SymmetricKernel resolve_kernel(const Json& v, const std::string& where, const fs::path& base) {
    return resolve<SymmetricKernel>(v, where, base, [](const Json& j, const std::string& w) { return kernel_from_json(j, w); });
}

ChaosElement resolve_chaos(const Json& v, const std::string& where, const fs::path& base) {
    return resolve<ChaosElement>(v, where, base, [](const Json& j, const std::string& w) { return chaos_from_json(j, w); });
}

ChaosVector resolve_vector(const Json& v, const std::string& where, const fs::path& base) {
    return resolve<ChaosVector>(v, where, base,
                                [](const Json& j, const std::string& w) { return chaos_vector_from_json(j, w); });
}

MultilinearSpec resolve_multilinear(const Json& v, const std::string& where, const fs::path& base) {
    return resolve<MultilinearSpec>(v, where, base,
                                    [](const Json& j, const std::string& w) { return multilinear_from_json(j, w); });
}

std::vector<Json> labels_for(const Json& seq, const std::string& where, std::size_t count) {
    std::vector<Json> labels;
    if (seq.contains("labels")) {
        const auto& arr = as_array(seq["labels"], at_key(where, "labels"));
        if (arr.size() != count) fail(at_key(where, "labels"), "need one label per member");
        for (const auto& l : arr) labels.push_back(l);
    } else {
        for (std::size_t i = 0; i < count; ++i) labels.emplace_back(i + 1);
    }
    return labels;
}

SequenceSpec parse_sequence(const Json& seq, const std::string& where, const fs::path& base) {
    SequenceSpec spec;
    const std::string fw = at_key(where, "family");
    const auto& fam = field(seq, where, "family");
    if (!fam.is_string()) fail(fw, "expected a string");
    const auto family = fam.get<std::string>();
    if (seq.contains("dim_budget")) spec.dim_budget = as_uint(seq["dim_budget"], at_key(where, "dim_budget"));
    if (family == "pair-sum") {
        spec.family = SequenceSpec::Family::pair_sum;
        spec.indices = index_list(field(seq, where, "indices"), at_key(where, "indices"));
        for (std::size_t i = 0; i < spec.indices.size(); ++i) {
            if (spec.indices[i] == 0 || (i > 0 && spec.indices[i] <= spec.indices[i - 1])) {
                fail(at_index(at_key(where, "indices"), i), "indices must be positive and strictly increasing");
            }
        }
    } else if (family == "perturbation") {
        spec.family = SequenceSpec::Family::perturbation;
        spec.base = resolve_kernel(field(seq, where, "base"), at_key(where, "base"), base);
        spec.direction = resolve_kernel(field(seq, where, "direction"), at_key(where, "direction"), base);
        spec.t = number_list(field(seq, where, "t"), at_key(where, "t"));
    } else if (family == "custom") {
        spec.family = SequenceSpec::Family::custom;
        const std::string mw = at_key(where, "members");
        const auto& arr = as_array(field(seq, where, "members"), mw);
        const auto labels = labels_for(seq, where, arr.size());
        for (std::size_t i = 0; i < arr.size(); ++i) {
            spec.members.push_back({labels[i], resolve_chaos(arr[i], at_index(mw, i), base)});
        }
    } else {
        fail(fw, "unknown family '" + family + "'");
    }
    return guarded(where, [&] {
        build_sequence(spec);
        return spec;
    });
}

std::vector<SequenceMember> sequence_members(const Json& p, const fs::path& base) {
    const auto spec = parse_sequence(field(p, "", "sequence"), "/sequence", base);
    return build_sequence(spec);
}

std::vector<VectorMember> parse_vector_sequence(const Json& seq, const std::string& where, const fs::path& base) {
    const auto& fam = field(seq, where, "family");
    const std::string fw = at_key(where, "family");
    if (!fam.is_string()) fail(fw, "expected a string");
    std::vector<VectorMember> out;
    if (fam == "pair-sum-vector") {
        const auto idx = index_list(field(seq, where, "indices"), at_key(where, "indices"));
        for (std::size_t i = 0; i < idx.size(); ++i) {
            if (idx[i] == 0) fail(at_index(at_key(where, "indices"), i), "indices must be positive");
            out.push_back({Json(idx[i]), pair_sum_vector(idx[i])});
        }
    } else if (fam == "custom") {
        const std::string mw = at_key(where, "members");
        const auto& arr = as_array(field(seq, where, "members"), mw);
        const auto labels = labels_for(seq, where, arr.size());
        for (std::size_t i = 0; i < arr.size(); ++i) {
            out.push_back({labels[i], resolve_vector(arr[i], at_index(mw, i), base)});
        }
    } else {
        fail(fw, "unknown family '" + fam.get<std::string>() + "'");
    }
    return out;
}

Covariance2 parse_covariance(const Json& v, const std::string& where) {
    const auto& rows = as_array(v, where);
    if (rows.size() != 2) fail(where, "expected a 2x2 matrix");
    Covariance2 c{};
    for (std::size_t i = 0; i < 2; ++i) {
        const auto r = number_list(rows[i], at_index(where, i));
        if (r.size() != 2) fail(at_index(where, i), "expected 2 entries");
        c[i][0] = r[0];
        c[i][1] = r[1];
    }
    return c;
}

std::vector<MultilinearMember> parse_moo_family(const Json& v, const std::string& where, const fs::path& base) {
    std::vector<MultilinearMember> out;
    const auto& arr = as_array(v, where);
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string w = at_index(where, i);
        require_object(arr[i], w);
        MultilinearMember m;
        m.label = arr[i].contains("label") ? arr[i]["label"] : Json(i + 1);
        if (arr[i].contains("rademacher_average")) {
            const auto n = as_uint(arr[i]["rademacher_average"], at_key(w, "rademacher_average"));
            if (n == 0) fail(at_key(w, "rademacher_average"), "n must be positive");
            const auto law = arr[i].contains("law") ? law_from_json(arr[i]["law"], at_key(w, "law")) : InputLaw::rademacher();
            m.spec = rademacher_average(static_cast<std::size_t>(n), law);
        } else {
            m.spec = resolve_multilinear(field(arr[i], w, "spec"), at_key(w, "spec"), base);
        }
        out.push_back(std::move(m));
    }
    return out;
}

}  // namespace

ExperimentConfig parse_config(const Json& j, fs::path base_dir) {
    ExperimentConfig cfg;
    cfg.base_dir = std::move(base_dir);
    const auto& e = field(j, "", "experiment");
    if (!e.is_string() || !kExperiments.contains(e.get<std::string>())) {
        fail("/experiment", "expected one of fourth-moment, shigekawa, dm, cw, dball, pt, moo, d12");
    }
    cfg.experiment = e.get<std::string>();
    cfg.seed = as_uint(field(j, "", "seed"), "/seed");
    cfg.n_samples = static_cast<std::size_t>(as_uint(field(j, "", "n_samples"), "/n_samples"));
    if (cfg.n_samples < 1000) fail("/n_samples", "distance estimation needs at least 1000 samples");
    if (j.contains("output")) {
        if (!j["output"].is_string()) fail("/output", "expected a string");
        cfg.output = cfg.base_dir / j["output"].get<std::string>();
    }
    if (j.contains("format")) {
        const auto& f = j["format"];
        if (f == "json") {
            cfg.format = ReportFormat::json;
        } else if (f == "csv") {
            cfg.format = ReportFormat::csv;
        } else {
            fail("/format", "expected json or csv");
        }
    }
    cfg.params = j;
    return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
    const auto j = read_json_file(path);
    return parse_config(j, path.has_parent_path() ? path.parent_path() : fs::path("."));
}

ExperimentReport run_config(const ExperimentConfig& cfg) {
    const auto& p = cfg.params;
    const auto& base = cfg.base_dir;
    const auto n = cfg.n_samples;
    const auto seed = cfg.seed;
    const auto& e = cfg.experiment;
    if (e == "fourth-moment") {
        const int k = as_int(field(p, "", "k"), "/k");
        return fourth_moment_certificate(k, parse_sequence(field(p, "", "sequence"), "/sequence", base), n, seed);
    }
    if (e == "shigekawa") {
        const int order = as_int(field(p, "", "p"), "/p");
        return shigekawa_rate(order, sequence_members(p, base), resolve_chaos(field(p, "", "limit"), "/limit", base), n,
                              seed);
    }
    if (e == "dm") {
        const int k = as_int(field(p, "", "k"), "/k");
        const auto f_inf = resolve_kernel(field(p, "", "limit"), "/limit", base);
        const auto g = resolve_kernel(field(p, "", "direction"), "/direction", base);
        std::vector<Perturbation> perts;
        for (double t : number_list(field(p, "", "t"), "/t")) perts.push_back({t, g});
        return dm_rate(k, f_inf, perts, n, seed);
    }
    if (e == "cw") {
        return carbery_wright_probe(resolve_chaos(field(p, "", "chaos"), "/chaos", base),
                                    number_list(field(p, "", "alphas"), "/alphas"), n, seed);
    }
    if (e == "dball") {
        return df_small_ball_probe(resolve_chaos(field(p, "", "chaos"), "/chaos", base),
                                   number_list(field(p, "", "lambdas"), "/lambdas"), n, seed);
    }
    if (e == "pt") {
        std::vector<int> ks;
        const auto& karr = as_array(field(p, "", "k"), "/k");
        for (std::size_t i = 0; i < karr.size(); ++i) ks.push_back(as_int(karr[i], at_index("/k", i)));
        return peccati_tudor_run(ks, parse_vector_sequence(field(p, "", "sequence"), "/sequence", base),
                                 parse_covariance(field(p, "", "c"), "/c"), n, seed);
    }
    if (e == "moo") {
        return moo_invariance(parse_moo_family(field(p, "", "family"), "/family", base), n, seed);
    }
    const double alpha = as_number(field(p, "", "alpha"), "/alpha");
    return d12_rate_probe(sequence_members(p, base), resolve_chaos(field(p, "", "limit"), "/limit", base), alpha, n,
                          seed);
}

}  // namespace wienerlab
