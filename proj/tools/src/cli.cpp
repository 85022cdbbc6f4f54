#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "wienerlab/chaos.hpp"
#include "wienerlab/errors.hpp"
#include "wienerlab/io.hpp"
#include "wienerlab/random.hpp"
#include "wienerlab/sampling.hpp"
#include "wienerlab/theorem_lab.hpp"

namespace wienerlab {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.15g", v == 0.0 ? 0.0 : v);
    return buf;
}

std::vector<double> parse_point(const std::string& text) {
    std::vector<double> xs;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            xs.push_back(std::stod(item, &used));
            if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw InvalidArgument("--point: '" + item + "' is not a number");
        }
    }
    return xs;
}

InputLaw law_from_name(const std::string& name) {
    if (name == "gaussian") return InputLaw::gaussian();
    if (name == "rademacher") return InputLaw::rademacher();
    throw InvalidArgument("--law: expected gaussian or rademacher");
}

int finish_report(const ExperimentReport& r, const std::optional<std::filesystem::path>& out_path, ReportFormat format,
                  std::ostream& out, std::ostream& err) {
    if (out_path) {
        save_report(*out_path, r, format);
    } else {
        out << (format == ReportFormat::json ? report_text(r) : rows_to_csv(r));
    }
    err << r.experiment << ": " << to_string(r.verdict) << "\n";
    return r.verdict == Verdict::fail ? kExitFail : kExitPass;
}

ReportFormat format_from_name(const std::string& s) { return s == "csv" ? ReportFormat::csv : ReportFormat::json; }

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Exact Wiener-chaos algebra and distance experiments", "wienerlab"};
    app.require_subcommand(1);
    unsigned threads = 1;
    app.add_option("--threads", threads, "Worker threads for sampling (never changes results)")
        ->check(CLI::Range(1u, 1024u));

    std::string chaos_file;
    std::string point;
    auto* eval = app.add_subcommand("eval", "Evaluate a chaos element at a point");
    eval->add_option("--chaos", chaos_file, "Chaos element file")->required();
    eval->add_option("--point", point, "Comma-separated coordinates x1,...,xn")->required();

    int max_moment = 4;
    auto* moments = app.add_subcommand("moments", "Exact moments E[F^m], m = 1..max");
    moments->add_option("--chaos", chaos_file, "Chaos element file")->required();
    moments->add_option("--max", max_moment, "Highest moment")->check(CLI::Range(1, kMaxOrder));

    std::size_t n_samples = 0;
    std::uint64_t seed = 0;
    std::string out_file;
    std::string law_name = "gaussian";
    auto* sample_cmd = app.add_subcommand("sample", "Draw samples of a chaos element or vector to CSV");
    sample_cmd->add_option("--chaos", chaos_file, "Chaos element or vector file")->required();
    sample_cmd->add_option("-n", n_samples, "Number of samples")->required()->check(CLI::PositiveNumber);
    sample_cmd->add_option("--seed", seed, "Seed (mandatory)")->required();
    sample_cmd->add_option("--out", out_file, "Output CSV file")->required();
    sample_cmd->add_option("--law", law_name, "Input law")->check(CLI::IsMember({"gaussian", "rademacher"}));

    std::string experiment;
    std::string config_file;
    std::string format_name = "json";
    auto* verify = app.add_subcommand("verify", "Run an experiment from a config file");
    verify->add_option("experiment", experiment, "Experiment")
        ->required()
        ->check(CLI::IsMember({"fourth-moment", "shigekawa", "dm", "cw", "dball", "pt", "moo", "d12"}));
    verify->add_option("--config", config_file, "Experiment config (JSON)")->required();
    verify->add_option("--out", out_file, "Report file (overrides the config)");
    verify->add_option("--format", format_name, "Report format")->check(CLI::IsMember({"json", "csv"}));

    std::string what;
    int trials = 100;
    auto* check = app.add_subcommand("check", "Run the exact identity suite");
    check->add_option("what", what, "Suite")->required()->check(CLI::IsMember({"identities"}));
    check->add_option("--trials", trials, "Random inputs per identity")->check(CLI::PositiveNumber);
    check->add_option("--seed", seed, "Seed (mandatory)")->required();
    check->add_option("--out", out_file, "Report file");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitPass;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitPass;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    }
    set_worker_threads(threads);

    try {
        if (eval->parsed()) {
            const auto f = load_chaos(chaos_file);
            const auto x = parse_point(point);
            if (x.size() != f.dim()) {
                throw InvalidArgument("--point: expected " + std::to_string(f.dim()) + " coordinates, got " +
                                      std::to_string(x.size()));
            }
            out << fmt(evaluate(f, x)) << "\n";
            return kExitPass;
        }
        if (moments->parsed()) {
            const auto f = load_chaos(chaos_file);
            std::vector<double> ms;
            for (int m = 1; m <= max_moment; ++m) ms.push_back(moment(f, m));
            for (int m = 1; m <= max_moment; ++m) out << "m" << m << "=" << fmt(ms[static_cast<std::size_t>(m - 1)]) << "\n";
            return kExitPass;
        }
        if (sample_cmd->parsed()) {
            const auto law = law_from_name(law_name);
            const auto j = read_json_file(chaos_file);
            const std::string where = chaos_file + ":";
            const auto batch = j.is_object() && j.contains("components")
                                   ? sample(chaos_vector_from_json(j, where), n_samples, seed, law)
                                   : sample(chaos_from_json(j, where), n_samples, seed, law);
            write_file_atomic(out_file, samples_csv(batch));
            return kExitPass;
        }
        if (verify->parsed()) {
            auto cfg = load_config(config_file);
            if (cfg.experiment != experiment) {
                throw SchemaError(config_file + ":/experiment",
                                  "config is for '" + cfg.experiment + "', not '" + experiment + "'");
            }
            if (!out_file.empty()) cfg.output = out_file;
            if (verify->count("--format") > 0) cfg.format = format_from_name(format_name);
            const auto report = run_config(cfg);
            return finish_report(report, cfg.output, cfg.format, out, err);
        }
        const auto report = identity_suite(trials, seed);
        std::optional<std::filesystem::path> path;
        if (!out_file.empty()) path = out_file;
        return finish_report(report, path, ReportFormat::json, out, err);
    } catch (const SchemaError& e) {
        err << "input error: " << e.what() << "\n";
    } catch (const OrderCapExceeded& e) {
        err << "order cap exceeded: " << e.what() << "\n";
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
    }
    return kExitUsage;
}

}  // namespace wienerlab
