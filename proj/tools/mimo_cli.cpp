// Command-line front end: parses a JSON experiment config, dispatches to the
// Monte Carlo harness / state-evolution predictor / tuning routines, and
// writes schema-stable CSV files plus a run manifest.
//
// Exit codes: 0 success, 2 config error, 3 numerical failure,
// 4 completed with nonconvergence.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <omp.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "mimo/harness.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mimo;

namespace {

constexpr const char* kVersion = "1.0.0";

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitNonconverged = 4;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
}

void require_mode(const json& cfg, const std::string& mode) {
    if (!cfg.contains("mode") || !cfg["mode"].is_string()) {
        throw ConfigError("config must contain a string field \"mode\"");
    }
    if (cfg["mode"].get<std::string>() != mode) {
        throw ConfigError("config mode is \"" + cfg["mode"].get<std::string>() +
                          "\", expected \"" + mode + "\"");
    }
}

Constellation parse_constellation(const json& cfg) {
    const std::string name = cfg.value("constellation", "qpsk");
    if (name == "qpsk") return Constellation::qpsk();
    if (name == "gaussian") return Constellation::gaussian();
    throw ConfigError("unknown constellation: " + name);
}

DetectorKind parse_detector(const std::string& name) {
    if (name == "dq") return DetectorKind::DQ;
    if (name == "pdq") return DetectorKind::PDQ;
    if (name == "linear") return DetectorKind::Linear;
    throw ConfigError("unknown detector: " + name);
}

std::string detector_name(DetectorKind kind) {
    switch (kind) {
        case DetectorKind::DQ: return "dq";
        case DetectorKind::PDQ: return "pdq";
        default: return "linear";
    }
}

std::vector<double> parse_grid(const json& cfg, const char* key) {
    if (!cfg.contains(key) || !cfg[key].is_array() || cfg[key].empty()) {
        throw ConfigError(std::string("config requires a nonempty array \"") + key + "\"");
    }
    return cfg[key].get<std::vector<double>>();
}

AdcSpec parse_spec(const json& entry) {
    if (entry.value("bits", 0) == AdcSpec::kInfiniteBits ||
        entry.value("infinite", false)) {
        return AdcSpec::infinite();
    }
    const int bits = entry.value("bits", 0);
    const double step = entry.value("step", 0.0);
    if (bits < 1 || bits > 16) throw ConfigError("adc bits must be in [1, 16] or infinite");
    if (!(step > 0.0)) throw ConfigError("adc step must be > 0");
    return AdcSpec::uniform(bits, step);
}

SeConfig parse_se_config(const json& cfg) {
    SeConfig se;
    if (cfg.contains("se")) {
        const json& s = cfg["se"];
        se.gauss_hermite_nodes = s.value("nodes", se.gauss_hermite_nodes);
        se.max_iterations = s.value("max_iterations", se.max_iterations);
        se.fixed_point_tol = s.value("tol", se.fixed_point_tol);
    }
    return se;
}

GampConfig parse_gamp_config(const json& cfg) {
    GampConfig g;
    if (cfg.contains("gamp")) {
        const json& s = cfg["gamp"];
        g.max_iterations = s.value("max_iterations", g.max_iterations);
        g.damping = s.value("damping", g.damping);
        g.convergence_tol = s.value("convergence_tol", g.convergence_tol);
    }
    return g;
}

struct CsvWriter {
    std::ostringstream out;

    explicit CsvWriter(const std::string& header) { out << header << "\n"; }

    // Shortest round-trip representation keeps reruns byte-identical.
    static std::string num(double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return buf;
    }
};

void write_file(const fs::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << contents;
}

struct RunContext {
    std::string command;
    std::string config_path;
    std::string out_dir;
    json resolved;
    std::vector<std::string> outputs;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
};

void write_manifest(const RunContext& ctx) {
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - ctx.start).count();
    json manifest;
    manifest["command"] = ctx.command;
    manifest["config_path"] = ctx.config_path;
    manifest["resolved_config"] = ctx.resolved;
    manifest["outputs"] = ctx.outputs;
    manifest["code_version"] = kVersion;
    manifest["wall_time_seconds"] = wall;
    write_file(fs::path(ctx.out_dir) / (ctx.command + "_manifest.json"),
               manifest.dump(2) + "\n");
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(RunContext& ctx, const json& cfg, std::optional<std::uint64_t> seed_override) {
    require_mode(cfg, "simulate");
    const int users = cfg.value("users", 0);
    const int antennas = cfg.value("antennas", 0);
    if (users < 1 || antennas < 1) throw ConfigError("users and antennas must be >= 1");

    std::vector<DetectorKind> detectors;
    for (const auto& name : cfg.value("detectors", std::vector<std::string>{})) {
        detectors.push_back(parse_detector(name));
    }
    if (detectors.empty()) throw ConfigError("config requires a nonempty \"detectors\" array");

    // Either a list of uniform bit depths with one shared step, or an
    // explicit bank of {bits, step, count} groups (high resolution first).
    std::vector<std::pair<std::string, AdcBank>> banks;
    if (cfg.contains("bank")) {
        std::vector<AdcSpec> assignment;
        for (const json& entry : cfg["bank"]) {
            const int count = entry.value("count", 0);
            if (count < 1) throw ConfigError("bank entries need count >= 1");
            const AdcSpec spec = parse_spec(entry);
            assignment.insert(assignment.end(), count, spec);
        }
        if (static_cast<int>(assignment.size()) != antennas) {
            throw ConfigError("bank counts must sum to the antenna count");
        }
        banks.emplace_back("mixed", AdcBank(std::move(assignment)));
    } else {
        const double step = cfg.value("step", 0.0);
        if (!(step > 0.0)) throw ConfigError("config requires \"step\" > 0 or an explicit bank");
        for (const int bits : cfg.value("bits", std::vector<int>{})) {
            banks.emplace_back(std::to_string(bits),
                               AdcBank::uniform(antennas, AdcSpec::uniform(bits, step)));
        }
        if (banks.empty()) throw ConfigError("config requires a nonempty \"bits\" array");
    }

    ExperimentSpec spec;
    spec.num_users = users;
    spec.num_antennas = antennas;
    spec.constellation = parse_constellation(cfg);
    spec.gamp = parse_gamp_config(cfg);
    spec.trials = cfg.value("trials", 0);
    spec.base_seed = seed_override ? *seed_override : cfg.value("seed", std::uint64_t{1});
    spec.snr_grid_db = parse_grid(cfg, "snr_db");
    ctx.resolved["seed"] = spec.base_seed;

    CsvWriter csv(
        "snr_db,detector,bits,steps,ber,ber_stderr,mse,mse_stderr,trials,nonconverged");
    long long nonconverged_total = 0;
    for (const auto& [bank_label, bank] : banks) {
        const std::string steps_label =
            cfg.contains("bank") ? "mixed" : CsvWriter::num(cfg.value("step", 0.0));
        for (const DetectorKind detector : detectors) {
            ExperimentSpec run = spec;
            run.bank = bank;
            run.detector = detector;
            const ExperimentResult result = run_monte_carlo(run);
            for (const SnrRecord& r : result.records) {
                nonconverged_total += r.nonconverged;
                csv.out << CsvWriter::num(r.snr_db) << ',' << detector_name(detector) << ','
                        << bank_label << ',' << steps_label << ',' << CsvWriter::num(r.ber)
                        << ',' << CsvWriter::num(r.ber_stderr) << ',' << CsvWriter::num(r.mse)
                        << ',' << CsvWriter::num(r.mse_stderr) << ',' << r.trials_run << ','
                        << r.nonconverged << "\n";
            }
        }
    }
    const fs::path out = fs::path(ctx.out_dir) / "simulate.csv";
    write_file(out, csv.out.str());
    ctx.outputs.push_back(out.string());
    write_manifest(ctx);
    return nonconverged_total > 0 ? kExitNonconverged : kExitOk;
}

// --------------------------------------------------------------- se-predict

MixedProfile profile_from_config(const json& cfg, double lambda_total) {
    if (!cfg.contains("profile") || !cfg["profile"].is_array() || cfg["profile"].empty()) {
        throw ConfigError("config requires a nonempty \"profile\" array");
    }
    MixedProfile profile;
    double fraction_sum = 0.0;
    for (const json& entry : cfg["profile"]) {
        const double fraction = entry.value("fraction", 0.0);
        if (fraction < 0.0 || fraction > 1.0) {
            throw ConfigError("profile fractions must lie in [0, 1]");
        }
        fraction_sum += fraction;
        profile.entries.push_back({parse_spec(entry), lambda_total * fraction});
    }
    if (std::abs(fraction_sum - 1.0) > 1e-9) {
        throw ConfigError("profile fractions must sum to 1");
    }
    return profile;
}

int cmd_se_predict(RunContext& ctx, const json& cfg) {
    require_mode(cfg, "se-predict");
    const Constellation constellation = parse_constellation(cfg);
    const DetectorKind detector = parse_detector(cfg.value("detector", ""));
    const SeConfig se = parse_se_config(cfg);
    const std::vector<double> snrs = parse_grid(cfg, "snr_db");

    std::vector<double> lambdas;
    if (cfg.contains("lambda_grid")) {
        lambdas = parse_grid(cfg, "lambda_grid");
    } else {
        lambdas.push_back(cfg.value("lambda", 0.0));
    }
    for (double lam : lambdas) {
        if (!(lam > 0.0)) throw ConfigError("lambda values must be > 0");
    }

    const InputDenoiser denoiser = detector_denoiser(detector, constellation);
    const SeOutput output = detector_output(detector);
    const bool qpsk = constellation.kind() == ConstellationKind::Qpsk;

    CsvWriter csv("snr_db,lambda,detector,ber,mse,a,d,e,iterations,converged");
    bool all_converged = true;
    for (const double lam : lambdas) {
        const MixedProfile profile = profile_from_config(cfg, lam);
        for (const double snr_db : snrs) {
            const double nv = SystemConfig::noise_variance_from_snr_db(snr_db);
            const SeFixedPoint fp = se_fixed_point(profile, nv, output, denoiser, se);
            all_converged = all_converged && fp.converged;
            const double ber = qpsk ? ber_qpsk(fp.params) : std::nan("");
            csv.out << CsvWriter::num(snr_db) << ',' << CsvWriter::num(lam) << ','
                    << detector_name(detector) << ',' << CsvWriter::num(ber) << ','
                    << CsvWriter::num(mse_from_se(fp.moments)) << ','
                    << CsvWriter::num(fp.params.a) << ',' << CsvWriter::num(fp.params.d)
                    << ',' << CsvWriter::num(fp.params.e) << ',' << fp.iterations << ','
                    << (fp.converged ? 1 : 0) << "\n";
        }
    }
    const fs::path out = fs::path(ctx.out_dir) / "se_predict.csv";
    write_file(out, csv.out.str());
    ctx.outputs.push_back(out.string());
    write_manifest(ctx);
    return all_converged ? kExitOk : kExitNonconverged;
}

// ---------------------------------------------------------------- tune-step

int cmd_tune_step(RunContext& ctx, const json& cfg) {
    require_mode(cfg, "tune-step");
    const Constellation constellation = parse_constellation(cfg);
    const std::string metric_name = cfg.value("metric", "ber");
    const Metric metric = metric_name == "ber"   ? Metric::BER
                        : metric_name == "mse" ? Metric::MSE
                                                : throw ConfigError("unknown metric: " + metric_name);
    const double lambda = cfg.value("lambda", 0.0);
    if (!(lambda > 0.0)) throw ConfigError("lambda must be > 0");
    const SeConfig se = parse_se_config(cfg);
    StepSearch search;
    if (cfg.contains("search")) {
        const json& s = cfg["search"];
        search.lo = s.value("lo", search.lo);
        search.hi = s.value("hi", search.hi);
        search.tol = s.value("tol", search.tol);
    }

    std::vector<DetectorKind> detectors;
    for (const auto& name : cfg.value("detectors", std::vector<std::string>{})) {
        detectors.push_back(parse_detector(name));
    }
    if (detectors.empty()) throw ConfigError("config requires a nonempty \"detectors\" array");
    const std::vector<int> bits_grid = cfg.value("bits", std::vector<int>{});
    if (bits_grid.empty()) throw ConfigError("config requires a nonempty \"bits\" array");
    const std::vector<double> snrs = parse_grid(cfg, "snr_db");

    struct Row {
        double snr_db;
        int bits;
        DetectorKind detector;
        StepSizeResult result;
        double delta_norm;
    };
    std::vector<Row> rows;
    for (const double snr_db : snrs) {
        for (const int bits : bits_grid) {
            for (const DetectorKind detector : detectors) {
                rows.push_back({snr_db, bits, detector, {}, 0.0});
            }
        }
    }
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < static_cast<int>(rows.size()); ++i) {
        Row& row = rows[i];
        const double nv = SystemConfig::noise_variance_from_snr_db(row.snr_db);
        const TuneObjective objective{metric, row.detector, constellation, lambda, nv,
                                      row.bits};
        row.result = optimize_step_size(objective, search, se);
        row.delta_norm =
            row.result.irrelevant ? std::nan("") : normalize_step(row.result.delta, nv);
    }

    CsvWriter csv("snr_db,bits,detector,delta,delta_norm,metric_value,irrelevant,grid_fallback");
    for (const Row& row : rows) {
        csv.out << CsvWriter::num(row.snr_db) << ',' << row.bits << ','
                << detector_name(row.detector) << ',' << CsvWriter::num(row.result.delta)
                << ',' << CsvWriter::num(row.delta_norm) << ','
                << CsvWriter::num(row.result.metric_value) << ','
                << (row.result.irrelevant ? 1 : 0) << ','
                << (row.result.grid_fallback ? 1 : 0) << "\n";
    }
    const fs::path out = fs::path(ctx.out_dir) / "tune_step.csv";
    write_file(out, csv.out.str());
    ctx.outputs.push_back(out.string());
    write_manifest(ctx);
    return kExitOk;
}

// -------------------------------------------------------------- sweep-mixed

int cmd_sweep_mixed(RunContext& ctx, const json& cfg) {
    require_mode(cfg, "sweep-mixed");
    const std::string metric_name = cfg.value("metric", "mse");
    const Metric metric = metric_name == "ber"   ? Metric::BER
                        : metric_name == "mse" ? Metric::MSE
                                                : throw ConfigError("unknown metric: " + metric_name);
    const double lambda = cfg.value("lambda", 0.0);
    if (!(lambda > 0.0)) throw ConfigError("lambda must be > 0");
    if (!cfg.contains("base")) throw ConfigError("config requires a \"base\" adc spec");
    const double snr_db = cfg.value("snr_db", std::nan(""));
    if (std::isnan(snr_db)) throw ConfigError("config requires \"snr_db\"");
    const MixedSweepContext context{parse_spec(cfg["base"]), lambda,
                                    SystemConfig::noise_variance_from_snr_db(snr_db), metric,
                                    parse_constellation(cfg)};
    const std::vector<double> fractions = parse_grid(cfg, "fractions");

    const std::vector<MixedSweepPoint> points =
        sweep_mixed_profile(fractions, context, parse_se_config(cfg));

    CsvWriter csv("fraction,metric_dq,metric_pdq,gap_db");
    for (const MixedSweepPoint& p : points) {
        const double gap_db = 10.0 * std::log10(p.metric_pdq / p.metric_dq);
        csv.out << CsvWriter::num(p.fraction) << ',' << CsvWriter::num(p.metric_dq) << ','
                << CsvWriter::num(p.metric_pdq) << ',' << CsvWriter::num(gap_db) << "\n";
    }
    const fs::path out = fs::path(ctx.out_dir) / "sweep_mixed.csv";
    write_file(out, csv.out.str());
    ctx.outputs.push_back(out.string());
    write_manifest(ctx);
    return kExitOk;
}

// ----------------------------------------------------------------- validate

int cmd_validate(RunContext& ctx, const json& cfg) {
    if (!cfg.contains("mode") || !cfg["mode"].is_string()) {
        throw ConfigError("config must contain a string field \"mode\"");
    }
    const std::string mode = cfg["mode"].get<std::string>();
    if (mode == "simulate") {
        const int users = cfg.value("users", 0);
        const int antennas = cfg.value("antennas", 0);
        if (users < 1 || antennas < 1) throw ConfigError("users and antennas must be >= 1");
        if (cfg.value("trials", 0) < 1) throw ConfigError("trials must be >= 1");
        parse_grid(cfg, "snr_db");
        parse_constellation(cfg);
    } else if (mode == "se-predict") {
        parse_detector(cfg.value("detector", ""));
        parse_grid(cfg, "snr_db");
        parse_constellation(cfg);
        profile_from_config(cfg, 1.0);
    } else if (mode == "tune-step") {
        parse_grid(cfg, "snr_db");
        parse_constellation(cfg);
    } else if (mode == "sweep-mixed") {
        parse_grid(cfg, "fractions");
        parse_constellation(cfg);
    } else {
        throw ConfigError("unknown mode: " + mode);
    }
    std::cout << "config ok: mode " << mode << "\n";
    write_manifest(ctx);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mixed-resolution-ADC MIMO detector toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    int threads = 0;
    std::optional<std::uint64_t> seed;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config file")->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--threads", threads, "worker thread count (0 = default)");
        sub->add_option("--seed", seed, "override the config seed");
    };
    CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo detection runs");
    CLI::App* se_predict = app.add_subcommand("se-predict", "state-evolution predictions");
    CLI::App* tune_step = app.add_subcommand("tune-step", "quantizer step optimization");
    CLI::App* sweep_mixed = app.add_subcommand("sweep-mixed", "mixed-profile sweeps");
    CLI::App* validate = app.add_subcommand("validate", "config validation only");
    for (CLI::App* sub : {simulate, se_predict, tune_step, sweep_mixed, validate}) {
        add_common(sub);
    }

    CLI11_PARSE(app, argc, argv);
    if (threads > 0) omp_set_num_threads(threads);

    try {
        const json cfg = load_config(config_path);
        std::error_code ec;
        fs::create_directories(out_dir, ec);
        if (ec) throw ConfigError("cannot create output directory: " + out_dir);

        RunContext ctx;
        ctx.config_path = config_path;
        ctx.out_dir = out_dir;
        ctx.resolved = cfg;
        if (app.got_subcommand(simulate)) {
            ctx.command = "simulate";
            return cmd_simulate(ctx, cfg, seed);
        }
        if (app.got_subcommand(se_predict)) {
            ctx.command = "se-predict";
            return cmd_se_predict(ctx, cfg);
        }
        if (app.got_subcommand(tune_step)) {
            ctx.command = "tune-step";
            return cmd_tune_step(ctx, cfg);
        }
        if (app.got_subcommand(sweep_mixed)) {
            ctx.command = "sweep-mixed";
            return cmd_sweep_mixed(ctx, cfg);
        }
        ctx.command = "validate";
        return cmd_validate(ctx, cfg);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
}
