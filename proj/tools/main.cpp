// driftmle: estimate the drift parameter of a scalar ergodic diffusion from
// discrete observations on a rapidly refining, slowly widening time grid.
//
// Subcommands: check, simulate, estimate, experiment, table. Configuration
// comes from a JSON file (--config) with flag overrides; every artifact
// echoes the effective configuration so a run can be reproduced bit-exactly
// from its own output.

#include <algorithm>
#include <charconv>
#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "driftmle/errors.hpp"
#include "driftmle/est.hpp"
#include "driftmle/expr.hpp"
#include "driftmle/mc.hpp"
#include "driftmle/model.hpp"
#include "driftmle/quad.hpp"
#include "driftmle/rng.hpp"
#include "driftmle/sim.hpp"
#include "reference_tables.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace driftmle;

namespace {

// ---------------------------------------------------------------------------
// effective run configuration

struct IoSpec {
    std::string out_dir = ".";
    std::vector<std::string> formats = {"csv", "json"};
    bool requested = false;  // io section present or --out given
};

struct RunSpec {
    std::optional<DiffusionModel> model;
    ObservationScheme scheme{1000, 0.5, 1};
    Method method = Method::milstein;
    std::vector<int> ns;         // empty: singleton {scheme.n}
    std::vector<double> alphas;  // empty: singleton {scheme.alpha}
    int replicates = 100;
    std::uint64_t master_seed = 0;
    IoSpec io;
    int threads = 1;  // execution knob; never echoed into artifacts
    bool force = false;
};

struct Flags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> n;
    std::optional<double> alpha;
    std::optional<int> replicates;
    std::optional<std::string> method;
    std::optional<std::string> out;
    std::optional<int> threads;
    bool force = false;
    bool json_errors = false;
    // table extras
    std::optional<int> table_case;
    std::optional<std::string> cell;
    // estimate extra
    std::optional<std::string> path_file;
};

bool g_json_errors = false;

void emit_error(const char* type, const std::string& msg, int code) {
    if (g_json_errors) {
        json e = {{"error", {{"type", type}, {"message", msg}, {"exit_code", code}}}};
        std::fprintf(stderr, "%s\n", e.dump().c_str());
    } else {
        std::fprintf(stderr, "error: %s\n", msg.c_str());
    }
}

// ---------------------------------------------------------------------------
// config file parsing (strict: unknown keys are config errors)

void reject_unknown(const json& j, const std::string& prefix,
                    std::initializer_list<const char*> allowed) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                known = true;
                break;
            }
        if (!known)
            throw ConfigError(prefix.empty() ? it.key() : prefix + "." + it.key(),
                              "unknown key");
    }
}

const json& get_section(const json& j, const char* key) {
    const json& s = j.at(key);
    if (!s.is_object()) throw ConfigError(key, "must be an object");
    return s;
}

double get_number(const json& j, const char* key, const std::string& path) {
    const json& v = j.at(key);
    if (!v.is_number()) throw ConfigError(path, "must be a number");
    return v.get<double>();
}

int get_integer(const json& j, const char* key, const std::string& path) {
    const json& v = j.at(key);
    if (!v.is_number_integer()) throw ConfigError(path, "must be an integer");
    return v.get<int>();
}

std::string get_string(const json& j, const char* key, const std::string& path) {
    const json& v = j.at(key);
    if (!v.is_string()) throw ConfigError(path, "must be a string");
    return v.get<std::string>();
}

ExprPtr parse_coefficient(const std::string& text, const std::string& path) {
    try {
        return parse_expression(text);
    } catch (const Error& e) {
        throw ConfigError(path, e.what());
    }
}

void load_config(const std::string& file, RunSpec& spec) {
    std::ifstream in(file);
    if (!in) throw ConfigError(file, "cannot open config file");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(file, e.what());
    }
    if (!j.is_object()) throw ConfigError(file, "top level must be an object");
    reject_unknown(j, "", {"model", "scheme", "experiment", "io"});

    if (j.contains("model")) {
        const json& m = get_section(j, "model");
        reject_unknown(m, "model", {"a", "b", "theta", "x0"});
        for (const char* k : {"a", "b", "theta", "x0"})
            if (!m.contains(k))
                throw ConfigError(std::string("model.") + k, "missing required key");
        DiffusionModel model;
        model.a = parse_coefficient(get_string(m, "a", "model.a"), "model.a");
        model.b = parse_coefficient(get_string(m, "b", "model.b"), "model.b");
        model.theta = get_number(m, "theta", "model.theta");
        model.x0 = get_number(m, "x0", "model.x0");
        spec.model = std::move(model);
    }

    if (j.contains("scheme")) {
        const json& s = get_section(j, "scheme");
        reject_unknown(s, "scheme", {"n", "alpha", "substeps", "method"});
        if (s.contains("n")) spec.scheme.n = get_integer(s, "n", "scheme.n");
        if (s.contains("alpha"))
            spec.scheme.alpha = get_number(s, "alpha", "scheme.alpha");
        if (s.contains("substeps"))
            spec.scheme.substeps = get_integer(s, "substeps", "scheme.substeps");
        if (s.contains("method")) {
            try {
                spec.method = method_from_string(get_string(s, "method", "scheme.method"));
            } catch (const ConfigError& e) {
                throw ConfigError("scheme.method", e.what());
            }
        }
    }

    if (j.contains("experiment")) {
        const json& e = get_section(j, "experiment");
        reject_unknown(e, "experiment", {"ns", "alphas", "replicates", "master_seed"});
        if (e.contains("ns")) {
            const json& v = e.at("ns");
            if (!v.is_array() || v.empty())
                throw ConfigError("experiment.ns", "must be a non-empty array");
            spec.ns.clear();
            for (const json& x : v) {
                if (!x.is_number_integer())
                    throw ConfigError("experiment.ns", "entries must be integers");
                spec.ns.push_back(x.get<int>());
            }
            if (!std::is_sorted(spec.ns.begin(), spec.ns.end()))
                throw ConfigError("experiment.ns", "must be sorted ascending");
        }
        if (e.contains("alphas")) {
            const json& v = e.at("alphas");
            if (!v.is_array() || v.empty())
                throw ConfigError("experiment.alphas", "must be a non-empty array");
            spec.alphas.clear();
            for (const json& x : v) {
                if (!x.is_number())
                    throw ConfigError("experiment.alphas", "entries must be numbers");
                double a = x.get<double>();
                if (!(a > 0.0 && a < 1.0))
                    throw ConfigError("experiment.alphas", "entries must lie in (0, 1)");
                spec.alphas.push_back(a);
            }
        }
        if (e.contains("replicates"))
            spec.replicates = get_integer(e, "replicates", "experiment.replicates");
        if (e.contains("master_seed")) {
            const json& v = e.at("master_seed");
            if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<long long>() < 0))
                throw ConfigError("experiment.master_seed",
                                  "must be a non-negative integer");
            spec.master_seed = v.get<std::uint64_t>();
        }
    }

    if (j.contains("io")) {
        const json& io = get_section(j, "io");
        reject_unknown(io, "io", {"out_dir", "formats"});
        if (io.contains("out_dir"))
            spec.io.out_dir = get_string(io, "out_dir", "io.out_dir");
        if (io.contains("formats")) {
            const json& v = io.at("formats");
            if (!v.is_array() || v.empty())
                throw ConfigError("io.formats", "must be a non-empty array");
            spec.io.formats.clear();
            for (const json& x : v) {
                if (!x.is_string())
                    throw ConfigError("io.formats", "entries must be strings");
                std::string f = x.get<std::string>();
                if (f != "csv" && f != "json")
                    throw ConfigError("io.formats", "allowed formats are csv and json");
                spec.io.formats.push_back(std::move(f));
            }
        }
        spec.io.requested = true;
    }
}

RunSpec build_spec(const Flags& f) {
    RunSpec spec;
    if (!f.config_path.empty()) load_config(f.config_path, spec);
    if (f.n) spec.scheme.n = *f.n;
    if (f.alpha) spec.scheme.alpha = *f.alpha;
    if (f.replicates) spec.replicates = *f.replicates;
    if (f.method) spec.method = method_from_string(*f.method);
    if (f.seed) spec.master_seed = *f.seed;
    if (f.threads) spec.threads = *f.threads;
    if (f.out) {
        spec.io.out_dir = *f.out;
        spec.io.requested = true;
    }
    spec.force = f.force;
    return spec;
}

const DiffusionModel& require_model(const RunSpec& spec) {
    if (!spec.model)
        throw ConfigError("model", "this command needs a model section in --config");
    return *spec.model;
}

void validate_scheme(const ObservationScheme& s) {
    try {
        s.validate();
    } catch (const Error& e) {
        throw ConfigError("scheme", e.what());
    }
}

std::vector<int> effective_ns(const RunSpec& s) {
    return s.ns.empty() ? std::vector<int>{s.scheme.n} : s.ns;
}

std::vector<double> effective_alphas(const RunSpec& s) {
    return s.alphas.empty() ? std::vector<double>{s.scheme.alpha} : s.alphas;
}

json effective_config(const RunSpec& s) {
    json j;
    if (s.model)
        j["model"] = {{"a", render(*s.model->a)},
                      {"b", render(*s.model->b)},
                      {"theta", s.model->theta},
                      {"x0", s.model->x0}};
    j["scheme"] = {{"n", s.scheme.n},
                   {"alpha", s.scheme.alpha},
                   {"substeps", s.scheme.substeps},
                   {"method", to_string(s.method)}};
    j["experiment"] = {{"ns", effective_ns(s)},
                       {"alphas", effective_alphas(s)},
                       {"replicates", s.replicates},
                       {"master_seed", s.master_seed}};
    j["io"] = {{"out_dir", s.io.out_dir}, {"formats", s.io.formats}};
    return j;
}

// ---------------------------------------------------------------------------
// artifact writing

std::string num(double v) {
    char buf[32];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    q += '"';
    return q;
}

bool wants(const IoSpec& io, const char* format) {
    for (const std::string& f : io.formats)
        if (f == format) return true;
    return false;
}

// Writes via a temp file + rename so readers never observe partial output.
template <class Fn>
void write_atomic(const fs::path& target, Fn&& fill) {
    fs::path dir = target.parent_path();
    if (!dir.empty()) fs::create_directories(dir);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        fill(out);
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw Error("cannot write " + target.string());
        }
    }
    fs::rename(tmp, target);
}

std::string fingerprint_hex(std::uint64_t fp) {
    char buf[19];
    std::snprintf(buf, sizeof buf, "0x%016" PRIx64, fp);
    return buf;
}

// ---------------------------------------------------------------------------
// check

int cmd_check(const RunSpec& spec) {
    const DiffusionModel& m = require_model(spec);
    std::printf("model: a = %s, b = %s, theta = %g, x0 = %g\n",
                render(*m.a).c_str(), render(*m.b).c_str(), m.theta, m.x0);

    AssumptionReport rep = check_assumptions(m);
    std::printf("assumption checks:\n");
    for (const AssumptionEntry& e : rep.entries)
        std::printf("  %-3s %-13s %s\n", e.id.c_str(), to_string(e.status),
                    e.witness.c_str());

    bool law_ok = false;
    try {
        InvariantLaw law = invariant_law(m);
        double predicted = std::pow(static_cast<double>(spec.scheme.n),
                                    -0.5 * spec.scheme.alpha) /
                           std::sqrt(law.info);
        std::printf("invariant law: G = %.10g, info = %.10g\n", law.G, law.info);
        std::printf("predicted std of theta_hat at n = %d, alpha = %g: %.6g\n",
                    spec.scheme.n, spec.scheme.alpha, predicted);
        law_ok = true;
    } catch (const Error& e) {
        std::printf("invariant law unavailable: %s\n", e.what());
    }

    if (!rep.all_pass() && !spec.force) {
        std::string bad;
        for (const AssumptionEntry& e : rep.entries)
            if (e.status != CheckStatus::pass)
                bad += (bad.empty() ? "" : ", ") + e.id + " " + to_string(e.status);
        emit_error("assumptions", "assumption checks did not all pass (" + bad +
                                      "); use --force to proceed anyway",
                   2);
        return 2;
    }
    if (!law_ok) {
        emit_error("runtime", "invariant law could not be computed", 3);
        return 3;
    }
    return 0;
}

// ---------------------------------------------------------------------------
// simulate

void write_path_artifacts(const RunSpec& spec, const ObservedPath& path,
                          fs::path* json_file) {
    const fs::path dir = spec.io.out_dir;
    if (wants(spec.io, "json")) {
        fs::path target = dir / "path.json";
        json head = {{"kind", "path"},
                     {"config", effective_config(spec)},
                     {"seed", path.seed},
                     {"method", to_string(path.method)},
                     {"rng", kRngAlgorithm},
                     {"model_fingerprint", fingerprint_hex(path.fingerprint)},
                     {"derivative_fallbacks", path.derivative_fallbacks}};
        write_atomic(target, [&](std::ofstream& out) {
            std::string h = head.dump(2);
            h.erase(h.size() - 2);  // drop "\n}" to splice in the long array
            out << h << ",\n  \"values\": [";
            for (std::size_t i = 0; i < path.values.size(); ++i) {
                if (i) out << ',';
                out << num(path.values[i]);
            }
            out << "]\n}\n";
        });
        if (json_file) *json_file = target;
    }
    if (wants(spec.io, "csv")) {
        write_atomic(dir / "path.csv", [&](std::ofstream& out) {
            out << "k,t,x\n";
            const double n = static_cast<double>(path.scheme.n);
            for (std::size_t k = 0; k < path.values.size(); ++k)
                out << k << ',' << num(static_cast<double>(k) / n) << ','
                    << num(path.values[k]) << '\n';
        });
    }
}

int cmd_simulate(const RunSpec& spec, const Flags& flags) {
    const DiffusionModel& m = require_model(spec);
    validate_scheme(spec.scheme);
    const std::uint64_t seed = flags.seed ? *flags.seed : spec.master_seed;

    ObservedPath path = simulate_path(m, spec.scheme, spec.method, seed);
    fs::path json_file;
    write_path_artifacts(spec, path, &json_file);

    std::printf("simulated %zu observations (n = %d, alpha = %g, T = %g, %s, seed %" PRIu64
                ")\n",
                path.values.size() - 1, spec.scheme.n, spec.scheme.alpha,
                spec.scheme.horizon(), to_string(path.method), seed);
    std::printf("final value X_T = %.10g\n", path.values.back());
    if (!json_file.empty())
        std::printf("wrote %s\n", json_file.string().c_str());
    else
        std::printf("wrote %s\n", (fs::path(spec.io.out_dir) / "path.csv").string().c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// estimate

ObservedPath load_path_file(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError(file, "cannot open path file");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(file, e.what());
    }
    try {
        if (j.at("kind").get<std::string>() != "path")
            throw ConfigError(file, "not a path file (kind != \"path\")");
        const json& scheme = j.at("config").at("scheme");
        ObservedPath p;
        p.scheme.n = scheme.at("n").get<int>();
        p.scheme.alpha = scheme.at("alpha").get<double>();
        p.scheme.substeps = scheme.at("substeps").get<int>();
        p.method = method_from_string(scheme.at("method").get<std::string>());
        p.seed = j.at("seed").get<std::uint64_t>();
        p.values = j.at("values").get<std::vector<double>>();
        if (j.contains("model_fingerprint")) {
            std::string hex = j.at("model_fingerprint").get<std::string>();
            p.fingerprint = std::strtoull(hex.c_str(), nullptr, 16);
        }
        if (p.values.size() != p.scheme.N() + 1)
            throw ConfigError(file, "values length does not match the scheme");
        return p;
    } catch (const json::exception& e) {
        throw ConfigError(file, std::string("malformed path file: ") + e.what());
    }
}

int cmd_estimate(const RunSpec& spec, const Flags& flags) {
    const DiffusionModel& m = require_model(spec);

    ObservedPath path;
    std::uint64_t seed;
    if (flags.path_file) {
        path = load_path_file(*flags.path_file);
        seed = path.seed;
        if (path.fingerprint != 0 && path.fingerprint != model_fingerprint(m))
            std::fprintf(stderr,
                         "note: path file was simulated from a different model "
                         "(fingerprint mismatch); estimating anyway\n");
    } else {
        validate_scheme(spec.scheme);
        seed = flags.seed ? *flags.seed : spec.master_seed;
        path = simulate_path(m, spec.scheme, spec.method, seed);
    }

    EstimateResult r = estimate(path, m.a, m.b);
    std::printf("theta_hat       = %.12g\n", r.theta_hat);
    std::printf("numerator       = %.12g\n", r.numerator);
    std::printf("denominator_raw = %.12g\n", r.denominator_raw);
    std::printf("denominator_Dn  = %.12g\n", r.denominator_Dn);
    std::printf("N_used          = %zu\n", r.N_used);
    try {
        InvariantLaw law = invariant_law(m);
        double z = standardized_error(r, m.theta, law.info, path.scheme);
        std::printf("standardized error vs theta = %g (info %.6g): %.6g\n", m.theta,
                    law.info, z);
    } catch (const Error&) {
        std::printf("standardized error unavailable (no invariant law)\n");
    }

    if (spec.io.requested) {
        const fs::path dir = spec.io.out_dir;
        if (wants(spec.io, "json")) {
            json doc = {{"kind", "estimate"},
                        {"config", effective_config(spec)},
                        {"seed", seed},
                        {"rng", kRngAlgorithm},
                        {"result",
                         {{"theta_hat", r.theta_hat},
                          {"numerator", r.numerator},
                          {"denominator_raw", r.denominator_raw},
                          {"denominator_Dn", r.denominator_Dn},
                          {"N_used", r.N_used}}}};
            write_atomic(dir / "estimate.json",
                         [&](std::ofstream& out) { out << doc.dump(2) << '\n'; });
        }
        if (wants(spec.io, "csv")) {
            write_atomic(dir / "estimate.csv", [&](std::ofstream& out) {
                out << "seed,n,alpha,method,theta_hat,Dn,N_used\n";
                out << seed << ',' << path.scheme.n << ',' << num(path.scheme.alpha)
                    << ',' << to_string(path.method) << ',' << num(r.theta_hat) << ','
                    << num(r.denominator_Dn) << ',' << r.N_used << '\n';
            });
        }
    }
    return 0;
}

// ---------------------------------------------------------------------------
// experiment

int assumption_gate(const DiffusionModel& m, bool force) {
    AssumptionReport rep = check_assumptions(m);
    if (rep.all_pass() || force) return 0;
    std::string bad;
    for (const AssumptionEntry& e : rep.entries)
        if (e.status != CheckStatus::pass)
            bad += (bad.empty() ? "" : ", ") + e.id + " " + to_string(e.status) + " (" +
                   e.witness + ")";
    emit_error("assumptions",
               "assumption checks did not all pass: " + bad + "; use --force to run anyway",
               2);
    return 2;
}

void print_cells(const std::vector<CellSummary>& cells) {
    std::printf("%6s %7s %12s %12s %12s %10s %6s %9s\n", "n", "alpha", "mean", "std",
                "predicted", "ks", "ks5%", "failures");
    for (const CellSummary& c : cells)
        std::printf("%6d %7.3g %12.6g %12.6g %12.6g %10.4g %6s %9d\n", c.n, c.alpha,
                    c.mean_theta_hat, c.std_theta_hat, c.predicted_std, c.ks_statistic,
                    c.ks_pass_5pct ? "pass" : "fail", c.failures);
}

json cell_to_json(const CellSummary& c) {
    return {{"n", c.n},
            {"alpha", c.alpha},
            {"mean_theta_hat", c.mean_theta_hat},
            {"std_theta_hat", c.std_theta_hat},
            {"mean_Dn", c.mean_Dn},
            {"ks_statistic", c.ks_statistic},
            {"ks_pass_5pct", c.ks_pass_5pct},
            {"predicted_std", c.predicted_std},
            {"failures", c.failures}};
}

void write_replicates_csv(const fs::path& target, const std::string& case_label,
                          const std::vector<ReplicateRecord>& records) {
    write_atomic(target, [&](std::ofstream& out) {
        out << "case,n,alpha,replicate,seed,theta_hat,Dn,std_err,status\n";
        for (const ReplicateRecord& r : records) {
            out << case_label << ',' << r.n << ',' << num(r.alpha) << ',' << r.replicate
                << ',' << r.seed << ',';
            if (r.ok)
                out << num(r.theta_hat) << ',' << num(r.Dn) << ',' << num(r.std_err);
            else
                out << ",,";
            out << ',' << csv_field(r.status) << '\n';
        }
    });
}

int cmd_experiment(const RunSpec& spec) {
    const DiffusionModel& m = require_model(spec);
    if (spec.replicates < 2)
        throw ConfigError("experiment.replicates", "must be at least 2");
    if (spec.threads < 1) throw ConfigError("threads", "must be positive");
    for (int n : effective_ns(spec))
        for (double alpha : effective_alphas(spec))
            validate_scheme(ObservationScheme{n, alpha, spec.scheme.substeps});

    if (int rc = assumption_gate(m, spec.force)) return rc;

    ExperimentConfig cfg;
    cfg.model = m;
    cfg.ns = effective_ns(spec);
    cfg.alphas = effective_alphas(spec);
    cfg.replicates = spec.replicates;
    cfg.method = spec.method;
    cfg.master_seed = spec.master_seed;
    cfg.substeps = spec.scheme.substeps;
    cfg.threads = spec.threads;

    std::vector<ReplicateRecord> records;
    std::vector<CellSummary> cells = run_experiment(cfg, &records);
    print_cells(cells);

    const fs::path dir = spec.io.out_dir;
    if (wants(spec.io, "csv")) write_replicates_csv(dir / "replicates.csv", "custom", records);
    if (wants(spec.io, "json")) {
        json doc = {{"kind", "experiment"},
                    {"config", effective_config(spec)},
                    {"rng", kRngAlgorithm},
                    {"cells", json::array()}};
        for (const CellSummary& c : cells) doc["cells"].push_back(cell_to_json(c));
        write_atomic(dir / "summary.json",
                     [&](std::ofstream& out) { out << doc.dump(2) << '\n'; });
    }
    std::printf("wrote artifacts to %s\n", dir.string().c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// table

struct CellFilter {
    bool all = true;
    int n = 0;
    double alpha = 0.0;
};

CellFilter parse_cell(const std::string& text) {
    CellFilter f;
    f.all = false;
    bool have_n = false, have_alpha = false;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t comma = text.find(',', pos);
        std::string part = text.substr(pos, comma == std::string::npos ? comma : comma - pos);
        std::size_t eq = part.find('=');
        if (eq == std::string::npos)
            throw ConfigError("cell", "expected n=<int>,alpha=<number>, got \"" + text + "\"");
        std::string key = part.substr(0, eq), val = part.substr(eq + 1);
        try {
            if (key == "n") {
                f.n = std::stoi(val);
                have_n = true;
            } else if (key == "alpha") {
                f.alpha = std::stod(val);
                have_alpha = true;
            } else {
                throw ConfigError("cell", "unknown key \"" + key + "\"");
            }
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception&) {
            throw ConfigError("cell", "cannot parse value \"" + val + "\"");
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (!have_n || !have_alpha)
        throw ConfigError("cell", "both n and alpha are required, e.g. n=1000,alpha=0.9");
    return f;
}

const tables::RefCell* find_reference(const tables::RefCase& rc, int n, double alpha) {
    for (const tables::RefCell& c : rc.cells)
        if (c.n == n && std::fabs(c.alpha - alpha) < 1e-12) return &c;
    return nullptr;
}

int cmd_table(const RunSpec& spec, const Flags& flags) {
    if (flags.table_case && (*flags.table_case < 1 || *flags.table_case > 3))
        throw ConfigError("case", "must be 1, 2, or 3");
    CellFilter filter;
    if (flags.cell) filter = parse_cell(*flags.cell);
    if (!filter.all) {
        validate_scheme(ObservationScheme{filter.n, filter.alpha, spec.scheme.substeps});
    }
    if (spec.replicates < 2)
        throw ConfigError("experiment.replicates", "must be at least 2");

    json doc = {{"kind", "table"},
                {"rng", kRngAlgorithm},
                {"replicates", spec.replicates},
                {"master_seed", spec.master_seed},
                {"cases", json::array()}};

    for (const tables::RefCase& rc : tables::kReference) {
        if (flags.table_case && rc.index != *flags.table_case) continue;

        DiffusionModel m;
        m.a = parse_expression(rc.a);
        m.b = parse_expression(rc.b);
        m.theta = rc.theta;
        m.x0 = rc.x0;

        ExperimentConfig cfg;
        cfg.model = m;
        cfg.replicates = spec.replicates;
        cfg.method = spec.method;
        cfg.substeps = spec.scheme.substeps;
        cfg.threads = spec.threads;
        // one independent seed stream per case, so adding or filtering cases
        // never changes another case's numbers
        cfg.master_seed = derive_seed(spec.master_seed, static_cast<std::uint64_t>(rc.index));
        if (filter.all) {
            cfg.ns.assign(std::begin(tables::kNs), std::end(tables::kNs));
            cfg.alphas.assign(std::begin(tables::kAlphas), std::end(tables::kAlphas));
        } else {
            cfg.ns = {filter.n};
            cfg.alphas = {filter.alpha};
        }

        std::vector<ReplicateRecord> records;
        std::vector<CellSummary> cells = run_experiment(cfg, &records);
        std::map<std::pair<int, double>, const CellSummary*> by_cell;
        for (const CellSummary& c : cells) by_cell[{c.n, c.alpha}] = &c;

        std::printf("case %d: a = %s, b = %s (theta = %g, x0 = %g, %d replicates)\n",
                    rc.index, rc.a, rc.b, rc.theta, rc.x0, spec.replicates);
        json jcells = json::array();
        if (filter.all) {
            std::printf("%-19s", "");
            for (int n : tables::kNs) std::printf(" n=%-8d", n);
            std::printf("\n");
            for (double alpha : tables::kAlphas) {
                auto row = [&](const char* label, auto pick) {
                    std::printf("%-19s", label);
                    for (int n : tables::kNs) std::printf(" %-10.5f", pick(n));
                    std::printf("\n");
                };
                char head[32];
                std::snprintf(head, sizeof head, "alpha=%.1f  mean ref", alpha);
                row(head, [&](int n) { return find_reference(rc, n, alpha)->mean; });
                row("           this run",
                    [&](int n) { return by_cell.at({n, alpha})->mean_theta_hat; });
                row("           std  ref",
                    [&](int n) { return find_reference(rc, n, alpha)->std; });
                row("           this run",
                    [&](int n) { return by_cell.at({n, alpha})->std_theta_hat; });
            }
        } else {
            const CellSummary& c = cells.front();
            const tables::RefCell* ref = find_reference(rc, c.n, c.alpha);
            std::printf("  cell n=%d, alpha=%g:\n", c.n, c.alpha);
            if (ref) {
                std::printf("    mean %.5f (reference %.5f)\n", c.mean_theta_hat, ref->mean);
                std::printf("    std  %.5f (reference %.5f)\n", c.std_theta_hat, ref->std);
            } else {
                std::printf("    mean %.5f (no reference for this cell)\n", c.mean_theta_hat);
                std::printf("    std  %.5f\n", c.std_theta_hat);
            }
            std::printf("    predicted std %.5f, ks %.4f (%s), failures %d\n",
                        c.predicted_std, c.ks_statistic, c.ks_pass_5pct ? "pass" : "fail",
                        c.failures);
        }

        for (const CellSummary& c : cells) {
            const tables::RefCell* ref = find_reference(rc, c.n, c.alpha);
            json jc = cell_to_json(c);
            if (ref) {
                jc["reference_mean"] = ref->mean;
                jc["reference_std"] = ref->std;
            }
            jcells.push_back(std::move(jc));
        }
        doc["cases"].push_back({{"case", rc.index},
                                {"a", rc.a},
                                {"b", rc.b},
                                {"theta", rc.theta},
                                {"x0", rc.x0},
                                {"cells", std::move(jcells)}});
    }

    if (spec.io.requested && wants(spec.io, "json")) {
        write_atomic(fs::path(spec.io.out_dir) / "table.json",
                     [&](std::ofstream& out) { out << doc.dump(2) << '\n'; });
        std::printf("wrote %s\n",
                    (fs::path(spec.io.out_dir) / "table.json").string().c_str());
    }
    return 0;
}

}  // namespace

// ---------------------------------------------------------------------------

int main(int argc, char** argv) {
    CLI::App app{
        "driftmle: drift-parameter estimation for scalar ergodic diffusions "
        "observed on a rapidly refining grid"};
    app.require_subcommand(1);
    Flags f;

    auto add_common = [&f](CLI::App* sub) {
        sub->add_option("--config", f.config_path, "JSON config file");
        sub->add_option("--seed", f.seed, "seed (path seed / experiment master seed)");
        sub->add_option("--n", f.n, "observation frequency n");
        sub->add_option("--alpha", f.alpha, "horizon exponent alpha in (0,1)");
        sub->add_option("--replicates", f.replicates, "Monte Carlo replicates");
        sub->add_option("--method", f.method, "integrator: euler or milstein");
        sub->add_option("--out", f.out, "output directory for artifacts");
        sub->add_option("--threads", f.threads, "worker threads (results don't depend on it)");
        sub->add_flag("--force", f.force, "run even if assumption checks fail");
        sub->add_flag("--json-errors", f.json_errors, "machine-readable errors on stderr");
    };

    CLI::App* c_check =
        app.add_subcommand("check", "run assumption checks and report the invariant law");
    CLI::App* c_sim = app.add_subcommand("simulate", "simulate one observed path");
    CLI::App* c_est =
        app.add_subcommand("estimate", "estimate theta from a stored or fresh path");
    CLI::App* c_exp =
        app.add_subcommand("experiment", "run a Monte Carlo grid and write artifacts");
    CLI::App* c_tab = app.add_subcommand(
        "table", "run the three benchmark cases against their reference tables");
    for (CLI::App* sub : {c_check, c_sim, c_est, c_exp, c_tab}) add_common(sub);

    c_est->add_option("path", f.path_file, "stored path.json to estimate from");
    c_tab->add_option("--case", f.table_case, "restrict to one benchmark case (1-3)");
    c_tab->add_option("--cell", f.cell, "restrict to one cell, e.g. n=1000,alpha=0.9");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        g_json_errors = f.json_errors;
        emit_error("config", e.what(), 1);
        return 1;
    }
    g_json_errors = f.json_errors;

    try {
        RunSpec spec = build_spec(f);
        if (c_check->parsed()) return cmd_check(spec);
        if (c_sim->parsed()) return cmd_simulate(spec, f);
        if (c_est->parsed()) return cmd_estimate(spec, f);
        if (c_exp->parsed()) return cmd_experiment(spec);
        return cmd_table(spec, f);
    } catch (const ConfigError& e) {
        emit_error("config", e.what(), 1);
        return 1;
    } catch (const Error& e) {
        emit_error("runtime", e.what(), 3);
        return 3;
    } catch (const std::exception& e) {
        emit_error("internal", e.what(), 3);
        return 3;
    }
}
