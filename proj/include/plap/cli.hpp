#pragma once

// Command-line front end: `lambda`, `sweep`, `profile`, `verify`.
//
// Exit codes: 0 success, 1 verification or strict-mode failure, 2 usage or
// domain error, 3 numerical failure.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "plap/errors.hpp"
#include "plap/model.hpp"
#include "plap/pruefer.hpp"
#include "plap/spectrum.hpp"
#include "plap/verify.hpp"

namespace plap::cli {

enum ExitCode : int { ok = 0, verification_failed = 1, usage_error = 2, numerical_failure = 3 };

/// Inclusive range lo..hi with `count` evenly spaced points.
struct SweepRange {
    double lo = 0.0;
    double hi = 0.0;
    int count = 0;

    [[nodiscard]] std::vector<double> points() const {
        if (count < 1 || !(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
            throw DomainError("empty sweep range");
        }
        if (count == 1) {
            return {lo};
        }
        if (!(hi > lo)) {
            throw DomainError("sweep range with several points needs lo < hi");
        }
        std::vector<double> out;
        for (int k = 0; k < count; ++k) {
            out.push_back(lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(count - 1));
        }
        return out;
    }

    static SweepRange parse(const std::string& text) {
        SweepRange r;
        char c1 = 0;
        char c2 = 0;
        std::istringstream in(text);
        if (!(in >> r.lo >> c1 >> r.hi >> c2 >> r.count) || c1 != ':' || c2 != ':' || !(in >> std::ws).eof()) {
            throw DomainError("range must look like LO:HI:COUNT (got '" + text + "')");
        }
        return r;
    }
};

struct RunConfig {
    std::string command;
    double p = 2.0;
    double n = 2.0;
    std::optional<double> kappa;
    std::optional<double> D;
    std::optional<double> a;
    std::optional<double> alpha;
    std::optional<double> lambda;
    std::optional<int> family;
    double tol = 1e-10;
    std::optional<double> horizon;
    std::string format = "text";
    std::string out_path;
    bool strict = false;
    std::string suite = "all";
    bool at_lambda_D = false;
    std::string D_range;
    std::string a_range;
    std::string fault;
};

/// One output table; cells are numbers, integers or strings.
class Table {
  public:
    using Cell = std::variant<double, long, std::string>;

    explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    void add_row(std::vector<Cell> row) { rows_.push_back(std::move(row)); }
    void set_meta(const std::string& key, nlohmann::json value) { meta_[key] = std::move(value); }

    [[nodiscard]] const std::vector<std::string>& columns() const { return columns_; }
    [[nodiscard]] const std::vector<std::vector<Cell>>& rows() const { return rows_; }

    static std::string format_number(double v) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return buf;
    }

    static std::string to_text(const Cell& c) {
        if (const double* d = std::get_if<double>(&c)) {
            return format_number(*d);
        }
        if (const long* i = std::get_if<long>(&c)) {
            return std::to_string(*i);
        }
        return std::get<std::string>(c);
    }

    void write(std::ostream& os, const std::string& format) const {
        if (format == "csv") {
            write_separated(os, ",");
        } else if (format == "json") {
            nlohmann::json doc;
            doc["meta"] = meta_;
            doc["rows"] = nlohmann::json::array();
            for (const auto& row : rows_) {
                nlohmann::json obj = nlohmann::json::object();
                for (std::size_t k = 0; k < columns_.size(); ++k) {
                    std::visit([&](const auto& v) { obj[columns_[k]] = v; }, row[k]);
                }
                doc["rows"].push_back(std::move(obj));
            }
            os << doc.dump(2) << '\n';
        } else {
            write_aligned(os);
        }
    }

  private:
    void write_separated(std::ostream& os, const char* sep) const {
        for (std::size_t k = 0; k < columns_.size(); ++k) {
            os << (k ? sep : "") << columns_[k];
        }
        os << '\n';
        for (const auto& row : rows_) {
            for (std::size_t k = 0; k < row.size(); ++k) {
                os << (k ? sep : "") << to_text(row[k]);
            }
            os << '\n';
        }
    }

    void write_aligned(std::ostream& os) const {
        std::vector<std::size_t> width(columns_.size());
        for (std::size_t k = 0; k < columns_.size(); ++k) {
            width[k] = columns_[k].size();
            for (const auto& row : rows_) {
                width[k] = std::max(width[k], to_text(row[k]).size());
            }
        }
        for (std::size_t k = 0; k < columns_.size(); ++k) {
            os << (k ? "  " : "") << std::left << std::setw(static_cast<int>(width[k])) << columns_[k];
        }
        os << '\n';
        for (const auto& row : rows_) {
            for (std::size_t k = 0; k < row.size(); ++k) {
                os << (k ? "  " : "") << std::left << std::setw(static_cast<int>(width[k])) << to_text(row[k]);
            }
            os << '\n';
        }
    }

    std::vector<std::string> columns_;
    std::vector<std::vector<Cell>> rows_;
    nlohmann::json meta_ = nlohmann::json::object();
};

namespace detail {

inline Params point_params(const RunConfig& cfg, bool need_D) {
    if (!cfg.kappa) {
        throw DomainError("--kappa is required");
    }
    if (need_D && !cfg.D) {
        throw DomainError("--D is required");
    }
    return Params::make(cfg.p, cfg.n, *cfg.kappa, cfg.D);
}

inline Family chosen_family(const RunConfig& cfg, const Params& params) {
    return cfg.family ? family_from_index(*cfg.family) : comparison_family(params);
}

inline void common_meta(Table& table, const RunConfig& cfg) {
    table.set_meta("command", cfg.command);
    table.set_meta("p", cfg.p);
    table.set_meta("n", cfg.n);
    if (cfg.kappa) {
        table.set_meta("kappa", *cfg.kappa);
    }
    table.set_meta("tol", cfg.tol);
}

inline void emit(const Table& table, const RunConfig& cfg, std::ostream& out) {
    if (cfg.out_path.empty()) {
        table.write(out, cfg.format);
        return;
    }
    std::ofstream file(cfg.out_path);
    if (!file) {
        throw DomainError("cannot open output file " + cfg.out_path);
    }
    table.write(file, cfg.format);
}

inline ShootingOptions shooting(const RunConfig& cfg, const Params& params) {
    ShootingOptions opts;
    opts.tol = cfg.tol;
    if (cfg.family) {
        opts.family = chosen_family(cfg, params);
    }
    return opts;
}

inline std::vector<Table::Cell> lambda_row(const EigenResult& r, const Params& params) {
    return {r.lambda,        r.alpha,      r.residual,   static_cast<long>(r.iterations),
            static_cast<long>(index_of(r.family)), params.p, params.n, params.kappa, r.D};
}

inline const std::vector<std::string> kLambdaColumns = {"lambda_d", "alpha", "residual", "iterations", "family",
                                                        "p",        "n",     "kappa",    "d"};

inline double lambda_of(const RunConfig& cfg) {
    if (cfg.lambda && cfg.alpha) {
        throw DomainError("--lambda and --alpha are mutually exclusive");
    }
    if (cfg.lambda) {
        return *cfg.lambda;
    }
    if (cfg.alpha) {
        return lambda_from_alpha(*cfg.alpha, cfg.p);
    }
    throw DomainError("--lambda or --alpha is required");
}

}  // namespace detail

inline int cmd_lambda(const RunConfig& cfg, std::ostream& out, std::ostream&) {
    if (!cfg.D_range.empty() || !cfg.a_range.empty()) {
        throw DomainError("lambda takes a single point; use sweep for ranges");
    }
    const Params params = detail::point_params(cfg, true);
    const EigenResult r = lambda_D(params, detail::shooting(cfg, params));
    Table table(detail::kLambdaColumns);
    detail::common_meta(table, cfg);
    table.add_row(detail::lambda_row(r, params));
    detail::emit(table, cfg, out);
    return ok;
}

inline int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    if (cfg.D_range.empty() == cfg.a_range.empty()) {
        throw DomainError("sweep needs exactly one of --D-range or --a-range");
    }
    if (cfg.D) {
        throw DomainError("--D and a sweep range are mutually exclusive");
    }
    bool monotone = true;
    if (!cfg.D_range.empty()) {
        const std::vector<double> grid = SweepRange::parse(cfg.D_range).points();
        const Params params = detail::point_params(cfg, false);
        const DiameterTable result = lambda_of_diameter_table(params, grid, detail::shooting(cfg, params));
        Table table(detail::kLambdaColumns);
        detail::common_meta(table, cfg);
        table.set_meta("sweep", "D");
        for (const DiameterRow& row : result.rows) {
            table.add_row(detail::lambda_row(row.result, params.with_diameter(row.D)));
        }
        table.set_meta("strictly_decreasing", result.strictly_decreasing);
        if (!result.strictly_decreasing) {
            monotone = false;
            err << "warning: lambda_d is not strictly decreasing at row " << *result.first_violation << '\n';
        }
        detail::emit(table, cfg, out);
    } else {
        const std::vector<double> grid = SweepRange::parse(cfg.a_range).points();
        const Params params = detail::point_params(cfg, false);
        const Family family = detail::chosen_family(cfg, params);
        const double lambda = detail::lambda_of(cfg);
        const MaxMap map = max_map(family, params, lambda, grid, std::min(cfg.tol, 1e-10));
        Table table({"a", "m", "delta", "converged", "family", "p", "n", "kappa", "lambda"});
        detail::common_meta(table, cfg);
        table.set_meta("sweep", "a");
        table.set_meta("lambda", lambda);
        if (std::isfinite(map.m2)) {
            table.set_meta("m2", map.m2);
        }
        for (std::size_t k = 0; k < grid.size(); ++k) {
            table.add_row({map.a[k], map.m[k], map.delta[k], map.converged[k] ? 1L : 0L,
                           static_cast<long>(index_of(family)), params.p, params.n, params.kappa, lambda});
        }
        // expected shape: constant for family 2, decreasing for 3, increasing for 1
        for (std::size_t k = 1; k < grid.size(); ++k) {
            const double d = map.m[k] - map.m[k - 1];
            const bool bad = (family == Family::exponential && std::abs(d) > 1e-8) ||
                             (family == Family::cosh && !(d < 0.0)) || (family == Family::sinh && !(d > 0.0));
            if (bad && monotone) {
                monotone = false;
                err << "warning: m column breaks the expected shape for family " << index_of(family)
                    << " at row " << k << '\n';
            }
        }
        table.set_meta("expected_shape", monotone);
        detail::emit(table, cfg, out);
    }
    return (cfg.strict && !monotone) ? verification_failed : ok;
}

inline int cmd_profile(const RunConfig& cfg, std::ostream& out, std::ostream&) {
    if (cfg.at_lambda_D && (cfg.lambda || cfg.alpha)) {
        throw DomainError("--at-lambda-D excludes --lambda and --alpha");
    }
    const Params params = detail::point_params(cfg, cfg.at_lambda_D);
    const Family family = detail::chosen_family(cfg, params);
    double lambda = 0.0;
    if (cfg.at_lambda_D) {
        lambda = lambda_D(params, detail::shooting(cfg, params)).lambda;
    } else {
        lambda = detail::lambda_of(cfg);
    }
    double a = 0.0;
    if (cfg.a) {
        a = *cfg.a;
    } else if (params.D) {
        a = -0.5 * *params.D;
    } else {
        throw DomainError("--a or --D is required");
    }

    IntegrationOptions opts;
    opts.tol = std::min(cfg.tol, 1e-10);
    if (cfg.horizon) {
        opts.t_max = a + *cfg.horizon;
    }
    const Trajectory first = integrate_pruefer(family, params, a, lambda, opts);
    opts.max_step = (first.end.t - a) / 1000.0;
    const SolutionProfile prof = reconstruct_profile(integrate_pruefer(family, params, a, lambda, opts));

    std::vector<double> E(prof.t.size(), std::numeric_limits<double>::quiet_NaN());
    std::optional<double> t0;
    if (prof.converged) {
        try {
            const EnvelopeDiagnostic env = e_function(prof, family, params);
            t0 = env.t0;
            std::size_t k = 0;
            for (std::size_t i = 0; i < env.s.size(); ++i) {
                while (k < prof.t.size() && prof.t[k] < env.s[i]) {
                    ++k;
                }
                if (k < prof.t.size() && prof.t[k] == env.s[i]) {
                    E[k] = env.E[i];
                }
            }
        } catch (const StateError&) {
            // no zero of w: E undefined, column stays NaN
        }
    }

    Table table({"t", "w", "w_prime", "phi", "log_e", "E"});
    detail::common_meta(table, cfg);
    table.set_meta("family", index_of(family));
    table.set_meta("a", a);
    table.set_meta("lambda", lambda);
    table.set_meta("alpha", prof.alpha);
    table.set_meta("converged", prof.converged);
    if (prof.converged) {
        table.set_meta("b", prof.b);
        table.set_meta("delta", prof.delta);
        table.set_meta("m", prof.m);
    }
    if (t0) {
        table.set_meta("t0", *t0);
    }
    for (std::size_t k = 0; k < prof.t.size(); ++k) {
        table.add_row({prof.t[k], prof.w[k], prof.w_prime[k], prof.phi[k], prof.log_e[k], E[k]});
    }
    detail::emit(table, cfg, out);
    return ok;
}

inline int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    if (cfg.suite != "all") {
        const std::vector<std::string> names = verify::suite_names();
        if (std::find(names.begin(), names.end(), cfg.suite) == names.end()) {
            throw DomainError("unknown suite '" + cfg.suite + "'");
        }
    }
    verify::FaultInjection faults;
    if (cfg.fault == "t3-sign") {
        faults.flip_cosh_drift = true;
    } else if (!cfg.fault.empty()) {
        throw DomainError("unknown fault '" + cfg.fault + "'");
    }
    const std::vector<verify::CheckResult> results = verify::run_suite(cfg.suite, faults);
    Table table({"suite", "check", "status", "value", "threshold", "detail"});
    detail::common_meta(table, cfg);
    bool all_pass = true;
    for (const verify::CheckResult& r : results) {
        all_pass = all_pass && r.passed;
        table.add_row({r.suite, r.name, std::string(r.passed ? "PASS" : "FAIL"), r.value, r.threshold, r.detail});
        if (!r.passed) {
            err << "failed: " << r.suite << '.' << r.name << '\n';
        }
    }
    table.set_meta("passed", all_pass);
    detail::emit(table, cfg, out);
    return all_pass ? ok : verification_failed;
}

/// Parses argv and dispatches; never throws.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Neumann eigenvalue bounds for the weighted p-Laplacian comparison models", "plap"};
    app.require_subcommand(1, 1);
    app.fallthrough();
    app.set_config("--config", "", "read key=value options from a file");

    RunConfig cfg;
    app.add_option("--p", cfg.p, "exponent p > 1")->capture_default_str();
    app.add_option("--n", cfg.n, "dimension parameter n >= 1")->capture_default_str();
    app.add_option("--kappa", cfg.kappa, "curvature parameter (nonzero)");
    app.add_option("--D", cfg.D, "diameter");
    app.add_option("--a", cfg.a, "start of the initial value problem");
    app.add_option("--alpha", cfg.alpha, "phase speed alpha = (lambda/(p-1))^(1/p)");
    app.add_option("--lambda", cfg.lambda, "eigenvalue parameter");
    app.add_option("--family", cfg.family, "drift model 0, 1, 2 or 3")->check(CLI::Range(0, 3));
    app.add_option("--tol", cfg.tol, "tolerance")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_option("--horizon", cfg.horizon, "integration length past the start")->check(CLI::PositiveNumber);
    app.add_option("--format", cfg.format, "output format")
        ->capture_default_str()
        ->check(CLI::IsMember({"csv", "json", "text"}));
    app.add_option("--out", cfg.out_path, "write output to PATH");
    app.add_flag("--strict", cfg.strict, "nonzero exit on monotonicity violations");
    app.add_option("--suite", cfg.suite, "verify suite: all, ptrig, model, pruefer, spectrum, envelope, oracle")
        ->capture_default_str();
    app.add_flag("--at-lambda-D", cfg.at_lambda_D, "profile at lambda = lambda_D");
    app.add_option("--D-range", cfg.D_range, "diameter sweep LO:HI:COUNT");
    app.add_option("--a-range", cfg.a_range, "start sweep LO:HI:COUNT");
    app.add_option("--inject-fault", cfg.fault, "test hook")->group("");

    CLI::App* lambda_cmd = app.add_subcommand("lambda", "first nonzero Neumann eigenvalue lambda_D");
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "lambda_D over diameters or m(i, a) over starts");
    CLI::App* profile_cmd = app.add_subcommand("profile", "solution profile and E-function samples");
    CLI::App* verify_cmd = app.add_subcommand("verify", "run the property suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return usage_error;
    }

    try {
        if (lambda_cmd->parsed()) {
            cfg.command = "lambda";
            return cmd_lambda(cfg, out, err);
        }
        if (sweep_cmd->parsed()) {
            cfg.command = "sweep";
            return cmd_sweep(cfg, out, err);
        }
        if (profile_cmd->parsed()) {
            cfg.command = "profile";
            return cmd_profile(cfg, out, err);
        }
        if (verify_cmd->parsed()) {
            cfg.command = "verify";
            return cmd_verify(cfg, out, err);
        }
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return usage_error;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return numerical_failure;
    } catch (const StateError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return numerical_failure;
    } catch (const std::exception& e) {
        err << "failure: " << e.what() << '\n';
        return numerical_failure;
    }
    err << "error: no command\n";
    return usage_error;
}

}  // namespace plap::cli
