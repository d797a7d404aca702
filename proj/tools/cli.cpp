#include "cli.hpp"

#include "binstream/binned_matrix.hpp"
#include "binstream/binning.hpp"
#include "binstream/errors.hpp"
#include "binstream/factorization.hpp"
#include "binstream/mechanism.hpp"
#include "binstream/toeplitz.hpp"
#include "binstream/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

namespace binstream::cli {

namespace {

struct SpecFlags {
    std::size_t n = 0;
    double alpha = 1.0;
    double beta = 0.0;

    ToeplitzSpec spec() const { return {alpha, beta, n}; }
};

void add_spec_flags(CLI::App* cmd, SpecFlags& f, bool n_required = true) {
    auto* n_opt = cmd->add_option("--n", f.n, "Matrix dimension / stream length")->check(CLI::PositiveNumber);
    if (n_required) n_opt->required();
    cmd->add_option("--alpha", f.alpha, "Weight decay alpha")->capture_default_str();
    cmd->add_option("--beta", f.beta, "Momentum beta")->capture_default_str();
}

// Relative --out paths land in $BINSTREAM_OUT_DIR when it is set.
std::filesystem::path resolve_out(const std::string& out) {
    std::filesystem::path p(out);
    if (p.is_relative()) {
        if (const char* dir = std::getenv("BINSTREAM_OUT_DIR"); dir != nullptr && *dir != '\0') {
            p = std::filesystem::path(dir) / p;
        }
    }
    return p;
}

class Sink {
public:
    Sink(const std::string& out_path, std::ostream& fallback) : stream_(&fallback) {
        if (out_path.empty()) return;
        path_ = resolve_out(out_path);
        if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
        file_.open(path_);
        if (!file_) throw InputError("cannot open output file " + path_.string());
        stream_ = &file_;
    }

    std::ostream& stream() {
        *stream_ << std::setprecision(15);
        return *stream_;
    }

    void finish() {
        stream_->flush();
        if (!*stream_) throw InputError("write failed" + (path_.empty() ? std::string() : " for " + path_.string()));
    }

private:
    std::filesystem::path path_;
    std::ofstream file_;
    std::ostream* stream_;
};

std::string opt_str(const std::optional<double>& v) {
    if (!v) return {};
    std::ostringstream os;
    os << std::setprecision(15) << *v;
    return os.str();
}

constexpr const char* kReportHeader =
    "method,n,alpha,beta,c,tau,bin_size,frobenius_L,row_max_L,sensitivity,mean_se,max_se,mean_se_ratio,max_se_ratio";

void write_report_csv(std::ostream& os, const FactorizationReport& r) {
    os << to_string(r.method) << ',' << r.n << ',' << r.alpha << ',' << r.beta << ',' << opt_str(r.c) << ','
       << opt_str(r.tau) << ',' << r.bin_size << ',' << r.frobenius_L << ',' << r.row_max_L << ',' << r.sensitivity
       << ',' << r.mean_se << ',' << r.max_se << ',' << r.mean_se_ratio << ',' << r.max_se_ratio << '\n';
}

nlohmann::json report_json(const FactorizationReport& r) {
    nlohmann::json j{{"method", to_string(r.method)},
                     {"n", r.n},
                     {"alpha", r.alpha},
                     {"beta", r.beta},
                     {"bin_size", r.bin_size},
                     {"frobenius_L", r.frobenius_L},
                     {"row_max_L", r.row_max_L},
                     {"sensitivity", r.sensitivity},
                     {"mean_se", r.mean_se},
                     {"max_se", r.max_se},
                     {"mean_se_ratio", r.mean_se_ratio},
                     {"max_se_ratio", r.max_se_ratio}};
    j["c"] = r.c ? nlohmann::json(*r.c) : nlohmann::json(nullptr);
    j["tau"] = r.tau ? nlohmann::json(*r.tau) : nlohmann::json(nullptr);
    return j;
}

FactorizationReport baseline_report(Method m, const ToeplitzSpec& spec) {
    switch (m) {
    case Method::sqrt: return sqrt_baseline_report(spec);
    case Method::binary: return binary_baseline_report(spec);
    case Method::identity: return identity_baseline_report(spec);
    case Method::binned: break;
    }
    throw ParameterError("binned is not a baseline");
}

// ------------------------------------------------------------------ coeffs

struct CoeffsFlags {
    SpecFlags spec;
    std::string kind = "b";
    std::string out;
};

int cmd_coeffs(const CoeffsFlags& f, std::ostream& out) {
    const auto spec = f.spec.spec();
    std::span<const double> values;
    if (f.kind == "a") values = spec.counting_coeffs();
    else if (f.kind == "b") values = spec.sqrt_coeffs();
    else values = spec.inv_sqrt_coeffs();
    Sink sink(f.out, out);
    auto& os = sink.stream();
    os << "k,value\n";
    for (std::size_t k = 0; k < values.size(); ++k) os << k << ',' << values[k] << '\n';
    sink.finish();
    return kOk;
}

// --------------------------------------------------------------- factorize

struct FactorizeFlags {
    SpecFlags spec;
    std::optional<double> c;
    std::optional<double> tau;
    std::optional<double> xi;
    bool exact_kappa = false;
    std::string method = "binned";
    std::string format;
    std::string out;
};

int cmd_factorize(const FactorizeFlags& f, std::ostream& out) {
    const auto spec = f.spec.spec();
    const Method method = f.method == "binned" ? Method::binned
                          : f.method == "sqrt" ? Method::sqrt
                          : f.method == "binary" ? Method::binary
                                                 : Method::identity;
    FactorizationReport report;
    if (method == Method::binned) {
        if (f.xi.has_value() == (f.c.has_value() || f.tau.has_value())) {
            throw ParameterError("give exactly one of (--c and --tau) or --xi");
        }
        BinningParams params{};
        if (f.xi) {
            params = theorem_params(*f.xi, spec, f.exact_kappa ? KappaMode::exact : KappaMode::bound);
        } else {
            if (!f.c || !f.tau) throw ParameterError("--c and --tau must be given together");
            params = {*f.c, *f.tau};
        }
        report = sqrt_binned_report(spec, params);
    } else {
        report = baseline_report(method, spec);
    }

    std::string format = f.format;
    if (format.empty()) format = f.out.ends_with(".json") ? "json" : "csv";
    Sink sink(f.out, out);
    auto& os = sink.stream();
    if (format == "json") {
        os << report_json(report).dump(2) << '\n';
    } else {
        os << kReportHeader << '\n';
        write_report_csv(os, report);
    }
    sink.finish();
    return kOk;
}

// ------------------------------------------------------------------- sweep

struct SweepFlags {
    std::vector<std::size_t> n_list;
    double alpha = 1.0;
    double beta = 0.0;
    double d_min = 2.0;
    double d_max = 100.0;
    std::size_t d_steps = 10;
    bool baseline = false;
    bool no_timing = false;
    unsigned threads = 0;
    std::string out;
};

struct SweepTask {
    std::size_t n;
    std::optional<double> d;
    Method method;
};

SweepRow evaluate(const SweepTask& task, double alpha, double beta) {
    const auto start = std::chrono::steady_clock::now();
    const ToeplitzSpec spec(alpha, beta, task.n);
    SweepRow row;
    row.method = to_string(task.method);
    row.n = task.n;
    row.alpha = alpha;
    row.beta = beta;
    FactorizationReport rep;
    if (task.method == Method::binned) {
        row.d = *task.d;
        row.c = 1.0 - 1.0 / row.d;
        row.tau = 1.0 / static_cast<double>(task.n);
        rep = sqrt_binned_report(spec, {row.c, row.tau});
    } else {
        row.d = std::nan("");
        row.c = std::nan("");
        row.tau = std::nan("");
        rep = baseline_report(task.method, spec);
    }
    row.bin_size = rep.bin_size;
    row.mean_se_ratio = rep.mean_se_ratio;
    row.max_se_ratio = rep.max_se_ratio;
    row.wall_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return row;
}

std::string num_or_empty(double v) {
    if (std::isnan(v)) return {};
    std::ostringstream os;
    os << std::setprecision(15) << v;
    return os.str();
}

int cmd_sweep(const SweepFlags& f, std::ostream& out, std::ostream& err) {
    if (f.n_list.empty()) throw ParameterError("--n-list must not be empty");
    if (!(f.d_min > 1.0) || f.d_max < f.d_min) throw ParameterError("need 1 < d-min <= d-max");
    const ToeplitzSpec check(f.alpha, f.beta, 1);
    (void)check;

    std::vector<std::size_t> ns = f.n_list;
    std::sort(ns.begin(), ns.end());
    ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
    const auto ds = d_grid(f.d_min, f.d_max, f.d_steps);

    std::vector<SweepTask> tasks;
    for (std::size_t n : ns) {
        for (double d : ds) tasks.push_back({n, d, Method::binned});
        if (f.baseline) {
            for (Method m : {Method::sqrt, Method::binary, Method::identity}) {
                if (m == Method::binary && !(f.alpha == 1.0 && f.beta == 0.0)) continue;
                tasks.push_back({n, std::nullopt, m});
            }
        }
    }

    // Workers pull indices; results land in fixed slots so the output order
    // does not depend on scheduling.
    std::vector<std::optional<SweepRow>> rows(tasks.size());
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    const unsigned hw = std::max(1U, std::thread::hardware_concurrency());
    const unsigned workers =
        static_cast<unsigned>(std::min<std::size_t>(f.threads == 0 ? hw : f.threads, tasks.size()));
    auto work = [&] {
        for (std::size_t k = next++; k < tasks.size(); k = next++) {
            try {
                rows[k] = evaluate(tasks[k], f.alpha, f.beta);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);

    Sink sink(f.out, out);
    auto& os = sink.stream();
    os << "method,n,alpha,beta,c,tau,d,bin_size,mean_se_ratio,max_se_ratio,wall_time_ms\n";
    for (const auto& r : rows) {
        os << r->method << ',' << r->n << ',' << r->alpha << ',' << r->beta << ',' << num_or_empty(r->c) << ','
           << num_or_empty(r->tau) << ',' << num_or_empty(r->d) << ',' << r->bin_size << ',' << r->mean_se_ratio
           << ',' << r->max_se_ratio << ',' << (f.no_timing ? 0.0 : r->wall_time_ms) << '\n';
    }
    sink.finish();
    err << "sweep: " << rows.size() << " rows, " << workers << " worker(s)\n";
    return kOk;
}

// ------------------------------------------------------------------ stream

struct StreamFlags {
    std::string input;
    std::optional<std::size_t> n;
    double alpha = 1.0;
    double beta = 0.0;
    double c = 0.9;
    std::optional<double> tau;
    double epsilon = 1.0;
    double delta = 1e-6;
    std::uint64_t seed = 0;
    bool zero_sensitivity = false;
    std::string out;
};

std::vector<double> read_stream(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open input file " + path);
    std::vector<double> xs;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto last = line.find_last_not_of(" \t\r");
        const std::string token = line.substr(first, last - first + 1);
        std::size_t used = 0;
        double x = 0.0;
        try {
            x = std::stod(token, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != token.size()) {
            throw InputError(path + ":" + std::to_string(lineno) + ": malformed value '" + token + "'");
        }
        xs.push_back(x);
    }
    return xs;
}

int cmd_stream(const StreamFlags& f, std::ostream& out, std::ostream& err) {
    const auto xs = read_stream(f.input);
    const std::size_t n = f.n.value_or(xs.size());
    if (n == 0) throw InputError("empty input stream");
    if (xs.size() > n) {
        throw InputError("input has " + std::to_string(xs.size()) + " values but --n is " + std::to_string(n));
    }
    const ToeplitzSpec spec(f.alpha, f.beta, n);
    const BinningParams params{f.c, f.tau.value_or(1.0 / static_cast<double>(n))};
    params.validate();
    const PrivacyParams privacy{f.epsilon, f.delta, f.seed};
    privacy.validate();

    double sensitivity = 0.0;
    std::size_t bin_size = 0;
    if (f.zero_sensitivity) {
        bin_size = build_binning(toeplitz_source(spec.sqrt_coeffs()), n, params).size();
    } else {
        const auto rep = sqrt_binned_report(spec, params);
        sensitivity = rep.sensitivity;
        bin_size = rep.bin_size;
    }

    PrivateCounter counter(toeplitz_source(spec.sqrt_coeffs()), n, params, sensitivity, privacy);
    Sink sink(f.out, out);
    auto& os = sink.stream();
    os << "step,true_prefix,noisy_prefix\n";
    for (double x : xs) {
        const auto o = counter.push(x);
        os << o.step << ',' << o.true_prefix << ',' << o.noisy_prefix << '\n';
    }
    sink.finish();
    err << "memory: steps=" << xs.size() << " peak_buffer=" << counter.peak_buffer() << " bin_size=" << bin_size
        << " noise_stddev=" << counter.noise_stddev() << '\n';
    return kOk;
}

// ------------------------------------------------------------------ verify

struct VerifyFlags {
    std::optional<std::string> suite;
    bool dump_binning = false;
    SpecFlags spec;
    double c = 0.75;
    double tau = 0.02;
    std::string out;
};

int cmd_verify(const VerifyFlags& f, std::ostream& out) {
    Sink sink(f.out, out);
    auto& os = sink.stream();
    bool ok = true;
    if (f.dump_binning) {
        if (f.spec.n == 0) throw ParameterError("--dump-binning needs --n");
        const auto spec = f.spec.spec();
        const auto bin = build_binning(toeplitz_source(spec.sqrt_coeffs()), spec.n(), {f.c, f.tau});
        for (std::size_t i = 1; i <= bin.n(); ++i) os << i << ": " << format_partition(bin[i]) << '\n';
        const bool valid = verify_binning(bin);
        os << "# |B| = " << bin.size() << (valid ? ", valid" : ", INVALID") << '\n';
        ok = valid;
    }
    if (f.suite || !f.dump_binning) {
        const auto checks = run_verify_suite(f.suite.value_or("all"));
        std::size_t failed = 0;
        for (const auto& r : checks) {
            os << (r.passed ? "PASS " : "FAIL ") << r.suite << ": " << r.name << "  slack=" << r.slack;
            if (!r.detail.empty()) os << " (" << r.detail << ')';
            os << '\n';
            if (!r.passed) ++failed;
        }
        os << checks.size() - failed << '/' << checks.size() << " checks passed\n";
        ok = ok && failed == 0;
    }
    sink.finish();
    return ok ? kOk : kInvariantFailure;
}

} // namespace

std::vector<double> d_grid(double lo, double hi, std::size_t steps) {
    if (steps == 0) throw ParameterError("--d-steps must be positive");
    if (steps == 1 || lo == hi) return {lo};
    std::vector<double> ds(steps);
    const double ratio = std::log(hi / lo) / static_cast<double>(steps - 1);
    for (std::size_t k = 0; k < steps; ++k) ds[k] = lo * std::exp(ratio * static_cast<double>(k));
    ds.front() = lo;
    ds.back() = hi;
    return ds;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Binned square-root factorizations for private continual counting"};
    app.name("binstream");
    app.require_subcommand(1);

    CoeffsFlags coeffs;
    auto* c_cmd = app.add_subcommand("coeffs", "Print the Toeplitz coefficients of A, B or B^-1");
    add_spec_flags(c_cmd, coeffs.spec);
    c_cmd->add_option("--kind", coeffs.kind, "a (counting), b (square root) or s (inverse square root)")
        ->check(CLI::IsMember({"a", "b", "s"}))
        ->capture_default_str();
    c_cmd->add_option("--out", coeffs.out, "Output file (default stdout)");

    FactorizeFlags fac;
    auto* f_cmd = app.add_subcommand("factorize", "Bin the square root and report its error");
    add_spec_flags(f_cmd, fac.spec);
    auto* c_opt = f_cmd->add_option("--c", fac.c, "Ratio threshold c in (0,1)");
    auto* tau_opt = f_cmd->add_option("--tau", fac.tau, "Absolute threshold tau in (0,1)");
    auto* xi_opt = f_cmd->add_option("--xi", fac.xi, "Pick c, tau so that errors grow by at most 1+xi");
    xi_opt->excludes(c_opt)->excludes(tau_opt);
    c_opt->needs(tau_opt);
    tau_opt->needs(c_opt);
    f_cmd->add_flag("--exact-kappa", fac.exact_kappa, "Use power iteration for the condition number")->needs(xi_opt);
    f_cmd->add_option("--method", fac.method, "binned, or a baseline: sqrt, binary, identity")
        ->check(CLI::IsMember({"binned", "sqrt", "binary", "identity"}))
        ->capture_default_str();
    f_cmd->add_option("--format", fac.format, "csv or json (default from --out extension)")
        ->check(CLI::IsMember({"csv", "json"}));
    f_cmd->add_option("--out", fac.out, "Output file (default stdout)");

    SweepFlags sweep;
    auto* s_cmd = app.add_subcommand("sweep", "Error/space trade-off over c = 1 - 1/d, tau = 1/n");
    s_cmd->add_option("--n-list", sweep.n_list, "Dimensions to evaluate")->required()->delimiter(',');
    s_cmd->add_option("--alpha", sweep.alpha)->capture_default_str();
    s_cmd->add_option("--beta", sweep.beta)->capture_default_str();
    s_cmd->add_option("--d-min", sweep.d_min)->capture_default_str();
    s_cmd->add_option("--d-max", sweep.d_max)->capture_default_str();
    s_cmd->add_option("--d-steps", sweep.d_steps, "Number of geometrically spaced d values")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    s_cmd->add_flag("--baseline", sweep.baseline, "Add unbinned sqrt, binary mechanism and identity rows");
    s_cmd->add_flag("--no-timing", sweep.no_timing, "Write 0 in wall_time_ms for byte-stable output");
    s_cmd->add_option("--threads", sweep.threads, "Worker threads (0 = hardware concurrency)");
    s_cmd->add_option("--out", sweep.out, "Output file (default stdout)");

    StreamFlags stream;
    auto* st_cmd = app.add_subcommand("stream", "Run the private counter over a 0/1 stream");
    st_cmd->add_option("--input", stream.input, "One value in [0,1] per line")->required();
    st_cmd->add_option("--n", stream.n, "Horizon (default: input length)")->check(CLI::PositiveNumber);
    st_cmd->add_option("--alpha", stream.alpha)->capture_default_str();
    st_cmd->add_option("--beta", stream.beta)->capture_default_str();
    st_cmd->add_option("--c", stream.c)->capture_default_str();
    st_cmd->add_option("--tau", stream.tau, "Default 1/n");
    st_cmd->add_option("--epsilon", stream.epsilon)->capture_default_str();
    st_cmd->add_option("--delta", stream.delta)->capture_default_str();
    st_cmd->add_option("--seed", stream.seed)->capture_default_str();
    st_cmd->add_flag("--zero-sensitivity", stream.zero_sensitivity, "Testing: release without noise")
        ->group("Testing");
    st_cmd->add_option("--out", stream.out, "Output file (default stdout)");

    VerifyFlags verify;
    auto* v_cmd = app.add_subcommand("verify", "Run invariant checks");
    v_cmd->add_option("--suite", verify.suite, "kernels, binning, perturbation, streaming or all")
        ->check(CLI::IsMember({"kernels", "binning", "perturbation", "streaming", "all"}));
    v_cmd->add_flag("--dump-binning", verify.dump_binning, "Print the binning for --n/--alpha/--beta/--c/--tau");
    add_spec_flags(v_cmd, verify.spec, false);
    v_cmd->add_option("--c", verify.c)->capture_default_str();
    v_cmd->add_option("--tau", verify.tau)->capture_default_str();
    v_cmd->add_option("--out", verify.out, "Output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsageError;
    }

    try {
        if (c_cmd->parsed()) return cmd_coeffs(coeffs, out);
        if (f_cmd->parsed()) return cmd_factorize(fac, out);
        if (s_cmd->parsed()) return cmd_sweep(sweep, out, err);
        if (st_cmd->parsed()) return cmd_stream(stream, out, err);
        return cmd_verify(verify, out);
    } catch (const ParameterError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const DimensionError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kInvariantFailure;
    }
}

} // namespace binstream::cli
