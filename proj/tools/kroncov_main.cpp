// kroncov: Kronecker-structured correlation estimation, inference, model
// selection, simulation experiments, and minimum-variance-portfolio
// backtesting. CSV in, JSON out.

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "kroncov/csv.hpp"
#include "kroncov/infer.hpp"
#include "kroncov/manifest.hpp"
#include "kroncov/portfolio.hpp"
#include "kroncov/select.hpp"
#include "kroncov/simlab.hpp"

using nlohmann::json;
using namespace kroncov;

namespace {

struct CommonArgs {
    std::optional<std::uint64_t> seed;
    int threads = 0;
    std::string out_path;
    std::string format = "json";
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--seed", args.seed, "RNG seed (default: system entropy)");
    cmd->add_option("--threads", args.threads,
                    "Worker threads (default: KRONCOV_THREADS or all cores)");
    cmd->add_option("--out", args.out_path, "Write the JSON report to this file");
    cmd->add_option("--format", args.format, "Output rendering: json or table")
        ->check(CLI::IsMember({"json", "table"}));
}

std::uint64_t resolve_seed(const CommonArgs& args, bool* from_entropy) {
    if (args.seed) {
        *from_entropy = false;
        return *args.seed;
    }
    *from_entropy = true;
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

std::vector<int> parse_dims(const std::string& text) {
    std::vector<int> dims;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            dims.push_back(std::stoi(tok));
        } catch (...) {
            throw BadInput("cannot parse factor dimension '" + tok + "'");
        }
    }
    if (dims.empty()) throw BadInput("--dims needs at least one factor");
    return dims;
}

FactorizationSpec spec_for_panel(const std::vector<int>& dims, int n_data) {
    FactorizationSpec spec;
    spec.dims = dims;
    long prod = spec.n_effective();
    if (prod < n_data) {
        throw BadInput("factor dimensions multiply to " + std::to_string(prod) +
                       " < data dimension " + std::to_string(n_data));
    }
    spec.pad = static_cast<int>(prod - n_data);
    spec.validate();
    return spec;
}

Method parse_method(const std::string& name) {
    if (name == "md") return Method::MD;
    if (name == "onestep") return Method::OneStep;
    if (name == "qmle") return Method::QMLE;
    throw BadInput("unknown estimator '" + name + "'");
}

json interval_json(const IntervalEstimate& e) {
    return json{{"value", e.value}, {"se", e.se}, {"lower", e.lower()}, {"upper", e.upper()}};
}

json vector_json(const Vector& v) {
    json arr = json::array();
    for (int i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

// Every report shares this envelope; tables are rendered from the JSON.
void emit(const json& report, const CommonArgs& args, const std::string& table_text) {
    std::string text = report.dump(2);
    if (!args.out_path.empty()) {
        std::ofstream out(args.out_path);
        if (!out) throw BadInput("cannot write " + args.out_path);
        out << text << '\n';
    }
    if (args.format == "table") {
        std::cout << table_text;
    } else if (args.out_path.empty()) {
        std::cout << text << '\n';
    }
}

struct FitArgs {
    std::string csv_path;
    std::string dims_text;
    std::string estimator = "qmle";
    std::string weight = "identity";
    std::string na = "fail";
    CommonArgs common;
};

ReturnPanel load_panel(const std::string& path, const std::string& na) {
    CsvOptions opts;
    opts.na_policy = na == "drop-row" ? NaPolicy::DropRow : NaPolicy::Fail;
    return ingest_csv(path, opts);
}

ReturnPanel pad_panel(const ReturnPanel& panel, const FactorizationSpec& spec, Rng& rng) {
    if (spec.pad == 0) return panel;
    ReturnPanel padded;
    padded.X.resize(panel.T(), panel.n() + spec.pad);
    padded.X.leftCols(panel.n()) = panel.X;
    for (int t = 0; t < panel.T(); ++t)
        for (int k = 0; k < spec.pad; ++k) padded.X(t, panel.n() + k) = rng.normal();
    return padded;
}

struct FitOutcome {
    ThetaEstimate est;
    DesignMatrix dm;
    ReturnPanel fit_panel;
    FactorizationSpec spec;
};

FitOutcome run_fit(const ReturnPanel& panel, const std::vector<int>& dims,
                   const std::string& estimator, const std::string& weight, std::uint64_t seed) {
    FitOutcome out;
    out.spec = spec_for_panel(dims, panel.n());
    Rng pad_rng(seed, 0xfadULL);
    out.fit_panel = pad_panel(panel, out.spec, pad_rng);
    out.dm = DesignMatrix::build(out.spec);
    Method method = parse_method(estimator);

    WeightSpec w = WeightSpec::identity();
    if (weight == "optimal") w = make_optimal_weight(out.fit_panel, out.dm);

    PanelMoments mom = compute_moments(out.fit_panel);
    switch (method) {
        case Method::MD:
            out.est = md_estimate(mom.m, out.dm, w);
            out.est.loglik = gaussian_loglik(out.dm, out.est.theta, mom, mom.T);
            break;
        case Method::OneStep:
            out.est = one_step(md_estimate(mom.m, out.dm, w), out.dm, out.fit_panel);
            break;
        case Method::QMLE: {
            std::optional<Vector> init;
            try {
                init = md_estimate(mom.m, out.dm, w).theta;
            } catch (const NotPositiveDefinite&) {
            }
            out.est = qmle(out.fit_panel, out.dm, init);
            break;
        }
    }
    return out;
}

json fit_result_json(const FitOutcome& fit, const ReturnPanel& panel) {
    json res{{"dims", fit.spec.dims},
             {"pad", fit.spec.pad},
             {"n", panel.n()},
             {"T", panel.T()},
             {"q", fit.dm.q()},
             {"estimator", method_name(fit.est.method)},
             {"theta", vector_json(fit.est.theta)},
             {"iterations", fit.est.iterations},
             {"converged", fit.est.converged}};
    if (fit.est.loglik) res["loglik"] = *fit.est.loglik;
    if (fit.spec.is_binary()) {
        res["rho"] = vector_json(theta_to_rho(fit.dm, fit.est.theta));
    }
    return res;
}

int classify_exit(const Error& e) {
    const std::string& c = e.code();
    if (c == "parse_error" || c == "ragged_rows" || c == "non_numeric" || c == "bad_input") {
        return 2;
    }
    return 3;
}

std::string table_kv(const json& obj) {
    std::ostringstream os;
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        os << "  " << it.key() << ": " << it.value().dump() << '\n';
    }
    return os.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kronecker-structured covariance estimation toolkit"};
    app.require_subcommand(1);

    // fit
    FitArgs fit_args;
    CLI::App* fit_cmd = app.add_subcommand("fit", "Fit a Kronecker correlation model to CSV returns");
    fit_cmd->add_option("csv", fit_args.csv_path, "Input CSV")->required();
    fit_cmd->add_option("--dims", fit_args.dims_text, "Factor dimensions, e.g. 2,2,2")->required();
    fit_cmd->add_option("--estimator", fit_args.estimator, "md | onestep | qmle")
        ->check(CLI::IsMember({"md", "onestep", "qmle"}));
    fit_cmd->add_option("--weight", fit_args.weight, "identity | optimal")
        ->check(CLI::IsMember({"identity", "optimal"}));
    fit_cmd->add_option("--na-policy", fit_args.na, "fail | drop-row")
        ->check(CLI::IsMember({"fail", "drop-row"}));
    add_common(fit_cmd, fit_args.common);

    // infer
    FitArgs infer_args;
    std::string infer_variance = "empirical";
    CLI::App* infer_cmd =
        app.add_subcommand("infer", "Fit plus asymptotic standard errors and functionals");
    infer_cmd->add_option("csv", infer_args.csv_path, "Input CSV")->required();
    infer_cmd->add_option("--dims", infer_args.dims_text, "Factor dimensions")->required();
    infer_cmd->add_option("--estimator", infer_args.estimator, "md | onestep | qmle")
        ->check(CLI::IsMember({"md", "onestep", "qmle"}));
    infer_cmd->add_option("--weight", infer_args.weight, "identity | optimal")
        ->check(CLI::IsMember({"identity", "optimal"}));
    infer_cmd->add_option("--variance", infer_variance, "empirical | gaussian")
        ->check(CLI::IsMember({"empirical", "gaussian"}));
    infer_cmd->add_option("--na-policy", infer_args.na, "fail | drop-row")
        ->check(CLI::IsMember({"fail", "drop-row"}));
    add_common(infer_cmd, infer_args.common);

    // overid
    FitArgs overid_args;
    std::string overid_variance = "empirical";
    CLI::App* overid_cmd =
        app.add_subcommand("overid", "Over-identification test of the Kronecker restriction");
    overid_cmd->add_option("csv", overid_args.csv_path, "Input CSV")->required();
    overid_cmd->add_option("--dims", overid_args.dims_text, "Factor dimensions")->required();
    overid_cmd->add_option("--variance", overid_variance, "empirical | gaussian")
        ->check(CLI::IsMember({"empirical", "gaussian"}));
    overid_cmd->add_option("--na-policy", overid_args.na, "fail | drop-row")
        ->check(CLI::IsMember({"fail", "drop-row"}));
    add_common(overid_cmd, overid_args.common);

    // backtest
    std::string bt_csv;
    std::vector<std::string> bt_dims;
    int bt_window = 0;
    int bt_horizon = 21;
    std::string bt_estimator = "qmle";
    std::string bt_na = "fail";
    CommonArgs bt_common;
    CLI::App* bt_cmd = app.add_subcommand("backtest", "Rolling minimum-variance-portfolio backtest");
    bt_cmd->add_option("csv", bt_csv, "Input CSV")->required();
    bt_cmd->add_option("--dims", bt_dims, "Factor dimensions (repeatable)")->required();
    bt_cmd->add_option("--window", bt_window, "Estimation window length (days)")->required();
    bt_cmd->add_option("--horizon", bt_horizon, "Out-of-sample evaluation length");
    bt_cmd->add_option("--estimator", bt_estimator, "md | onestep | qmle")
        ->check(CLI::IsMember({"md", "onestep", "qmle"}));
    bt_cmd->add_option("--na-policy", bt_na, "fail | drop-row")
        ->check(CLI::IsMember({"fail", "drop-row"}));
    add_common(bt_cmd, bt_common);

    // simulate
    std::string sim_dgp = "kronecker";
    int sim_n = 16, sim_t = 300, sim_reps = 200;
    double sim_alpha2 = 0.05;
    std::string sim_estimator = "qmle";
    std::string sim_stream;
    CommonArgs sim_common;
    CLI::App* sim_cmd = app.add_subcommand("simulate", "Monte-Carlo experiment driver");
    sim_cmd->add_option("--dgp", sim_dgp, "kronecker | lognormal")
        ->check(CLI::IsMember({"kronecker", "lognormal"}));
    sim_cmd->add_option("--n", sim_n, "Cross-section dimension (power of 2)");
    sim_cmd->add_option("--t", sim_t, "Sample size");
    sim_cmd->add_option("--reps", sim_reps, "Replications");
    sim_cmd->add_option("--alpha2", sim_alpha2, "Eigenvalue dispersion (lognormal DGP)");
    sim_cmd->add_option("--estimator", sim_estimator, "md | onestep | qmle")
        ->check(CLI::IsMember({"md", "onestep", "qmle"}));
    sim_cmd->add_option("--stream", sim_stream, "Append per-replication JSON lines here");
    add_common(sim_cmd, sim_common);

    // select
    std::string sel_csv;
    std::vector<std::string> sel_dims;
    bool sel_auto = false;
    int sel_max_params = 30;
    int sel_pad_up_to = 0;
    std::string sel_estimator = "qmle";
    std::string sel_na = "fail";
    CommonArgs sel_common;
    CLI::App* sel_cmd = app.add_subcommand("select", "Enumerate factorizations and rank by BIC");
    sel_cmd->add_option("csv", sel_csv, "Input CSV")->required();
    sel_cmd->add_option("--dims", sel_dims, "Explicit candidate (repeatable)");
    sel_cmd->add_flag("--auto-factorize", sel_auto, "Enumerate candidate factorizations");
    sel_cmd->add_option("--max-params", sel_max_params, "Model-size cap for enumeration");
    sel_cmd->add_option("--pad-up-to", sel_pad_up_to, "Allow up to this many pseudo-variables");
    sel_cmd->add_option("--estimator", sel_estimator, "md | onestep | qmle")
        ->check(CLI::IsMember({"md", "onestep", "qmle"}));
    sel_cmd->add_option("--na-policy", sel_na, "fail | drop-row")
        ->check(CLI::IsMember({"fail", "drop-row"}));
    add_common(sel_cmd, sel_common);

    CLI11_PARSE(app, argc, argv);

    try {
        if (fit_cmd->parsed()) {
            bool entropy = false;
            std::uint64_t seed = resolve_seed(fit_args.common, &entropy);
            ReturnPanel panel = load_panel(fit_args.csv_path, fit_args.na);
            FitOutcome fit =
                run_fit(panel, parse_dims(fit_args.dims_text), fit_args.estimator, fit_args.weight, seed);
            json config{{"dims", fit.spec.dims},
                        {"estimator", fit_args.estimator},
                        {"weight", fit_args.weight},
                        {"na_policy", fit_args.na}};
            json report{{"schema", kSchemaVersion},
                        {"command", "fit"},
                        {"result", fit_result_json(fit, panel)},
                        {"manifest",
                         make_manifest("fit", config, seed, entropy, {fit_args.csv_path}).to_json()}};
            emit(report, fit_args.common, "fit " + fit.spec.to_string() + "\n" + table_kv(report["result"]));
            return 0;
        }

        if (infer_cmd->parsed()) {
            bool entropy = false;
            std::uint64_t seed = resolve_seed(infer_args.common, &entropy);
            ReturnPanel panel = load_panel(infer_args.csv_path, infer_args.na);
            FitOutcome fit = run_fit(panel, parse_dims(infer_args.dims_text), infer_args.estimator,
                                     infer_args.weight, seed);
            VarianceMode mode =
                infer_variance == "gaussian" ? VarianceMode::Gaussian : VarianceMode::Empirical;
            PanelMoments mom = compute_moments(fit.fit_panel);
            WeightSpec w = WeightSpec::identity();
            if (infer_args.weight == "optimal") w = make_optimal_weight(fit.fit_panel, fit.dm);
            JMatrix j = jhat(fit.fit_panel, mom.m, fit.dm, w, mode);

            json res = fit_result_json(fit, panel);
            res["variance_mode"] = variance_mode_name(mode);
            Vector se = (j.J.diagonal() / mom.T).cwiseMax(0.0).cwiseSqrt();
            res["theta_se"] = vector_json(se);
            if (fit.spec.is_binary()) {
                SpectralSummary spectral = spectral_params(fit.dm, fit.est.theta, j, mom.T);
                res["spectral"] = json{{"mean", interval_json(spectral.mean)},
                                       {"variance", interval_json(spectral.variance)}};
                ExtremeLogEigs ext = extreme_log_eigs(fit.dm, fit.est.theta, j, mom.T);
                res["extreme_log_eigenvalues"] = json{{"omega_max", interval_json(ext.omega_max)},
                                                      {"omega_min", interval_json(ext.omega_min)},
                                                      {"abs_correction", ext.abs_correction}};
                IntervalEstimate mvp = mvp_log_variance(fit.dm, fit.est.theta, j, mom.T);
                res["mvp_log_variance"] = interval_json(mvp);
            }
            json config{{"dims", fit.spec.dims},
                        {"estimator", infer_args.estimator},
                        {"weight", infer_args.weight},
                        {"variance", infer_variance},
                        {"na_policy", infer_args.na}};
            json report{{"schema", kSchemaVersion},
                        {"command", "infer"},
                        {"result", res},
                        {"manifest",
                         make_manifest("infer", config, seed, entropy, {infer_args.csv_path}).to_json()}};
            emit(report, infer_args.common, "infer " + fit.spec.to_string() + "\n" + table_kv(res));
            return 0;
        }

        if (overid_cmd->parsed()) {
            bool entropy = false;
            std::uint64_t seed = resolve_seed(overid_args.common, &entropy);
            ReturnPanel panel = load_panel(overid_args.csv_path, overid_args.na);
            FactorizationSpec spec = spec_for_panel(parse_dims(overid_args.dims_text), panel.n());
            if (spec.pad > 0) throw BadInput("overid does not support padded factorizations");
            DesignMatrix dm = DesignMatrix::build(spec);
            VarianceMode mode =
                overid_variance == "gaussian" ? VarianceMode::Gaussian : VarianceMode::Empirical;
            OveridResult res = overid_test(panel, dm, mode);
            json result{{"dims", spec.dims},
                        {"statistic", res.test.statistic},
                        {"df", res.test.df},
                        {"p_value", res.test.p_value},
                        {"rejected_5pct", res.test.rejected_5pct},
                        {"normalized", res.test.normalized},
                        {"s_condition", res.s_condition},
                        {"condition_warning", res.condition_warning},
                        {"theta", vector_json(res.theta)},
                        {"variance_mode", variance_mode_name(mode)}};
            json config{{"dims", spec.dims}, {"variance", overid_variance}};
            json report{{"schema", kSchemaVersion},
                        {"command", "overid"},
                        {"result", result},
                        {"manifest",
                         make_manifest("overid", config, seed, entropy, {overid_args.csv_path})
                             .to_json()}};
            emit(report, overid_args.common, "overid " + spec.to_string() + "\n" + table_kv(result));
            return 0;
        }

        if (bt_cmd->parsed()) {
            bool entropy = false;
            std::uint64_t seed = resolve_seed(bt_common, &entropy);
            ReturnPanel panel = load_panel(bt_csv, bt_na);
            BacktestConfig config;
            config.window_m = bt_window;
            config.horizon = bt_horizon;
            config.method = parse_method(bt_estimator);
            config.seed = seed;
            config.threads = bt_common.threads;
            for (const std::string& d : bt_dims) {
                config.specs.push_back(spec_for_panel(parse_dims(d), panel.n()));
            }
            BacktestReport rep = rolling_backtest(panel, config);
            json windows = json::array();
            for (int w = 0; w < rep.windows; ++w) {
                json row = json::array();
                for (const WindowOutcome& o : rep.outcomes[w]) {
                    if (o.ok) {
                        row.push_back(o.realized_variance);
                    } else {
                        row.push_back(nullptr);
                    }
                }
                windows.push_back(row);
            }
            json summaries = json::array();
            std::ostringstream table;
            table << "backtest: " << rep.windows << " windows of " << rep.window_m << "+"
                  << rep.horizon << " days\n";
            for (const EstimatorSummary& s : rep.summaries) {
                summaries.push_back(json{{"name", s.name},
                                         {"prop", s.prop},
                                         {"impr_pct", s.impr},
                                         {"windows_used", s.windows_used},
                                         {"failures", s.failures}});
                table << "  " << s.name << "  prop=" << s.prop << "  impr=" << s.impr << "%\n";
            }
            json result{{"windows", rep.windows},
                        {"window_m", rep.window_m},
                        {"horizon", rep.horizon},
                        {"estimators", rep.estimator_names},
                        {"summaries", summaries},
                        {"window_variances", windows}};
            json config_json{{"window", bt_window},
                             {"horizon", bt_horizon},
                             {"estimator", bt_estimator},
                             {"dims", bt_dims}};
            json report{{"schema", kSchemaVersion},
                        {"command", "backtest"},
                        {"result", result},
                        {"manifest",
                         make_manifest("backtest", config_json, seed, entropy, {bt_csv}).to_json()}};
            emit(report, bt_common, table.str());
            return 0;
        }

        if (sim_cmd->parsed()) {
            bool entropy = false;
            std::uint64_t seed = resolve_seed(sim_common, &entropy);
            SimConfig config;
            config.dgp = sim_dgp == "kronecker" ? Dgp::KroneckerTrue : Dgp::LognormalDiag;
            config.n = sim_n;
            config.T = sim_t;
            config.replications = sim_reps;
            config.seed = seed;
            config.alpha2 = sim_alpha2;
            config.estimator = parse_method(sim_estimator);
            config.threads = sim_common.threads;
            config.stream_path = sim_stream;
            SimResult res = run_experiment(config);
            json result{{"dgp", sim_dgp},
                        {"n", sim_n},
                        {"T", sim_t},
                        {"replications", sim_reps},
                        {"estimator", sim_estimator},
                        {"median_prial1", res.median_prial1},
                        {"median_prial2", res.median_prial2},
                        {"median_vr", res.median_vr},
                        {"completed", res.completed},
                        {"failures", res.failures},
                        {"seconds", res.seconds}};
            if (config.dgp == Dgp::LognormalDiag) result["alpha2"] = sim_alpha2;
            json config_json{{"dgp", sim_dgp},    {"n", sim_n},
                             {"t", sim_t},        {"reps", sim_reps},
                             {"alpha2", sim_alpha2}, {"estimator", sim_estimator}};
            json report{{"schema", kSchemaVersion},
                        {"command", "simulate"},
                        {"result", result},
                        {"manifest", make_manifest("simulate", config_json, seed, entropy, {}).to_json()}};
            std::ostringstream table;
            table << "simulate " << sim_dgp << " n=" << sim_n << " T=" << sim_t << " reps="
                  << sim_reps << '\n'
                  << "  PRIAL1 " << res.median_prial1 << "  PRIAL2 " << res.median_prial2
                  << "  VR " << res.median_vr << '\n';
            emit(report, sim_common, table.str());
            return 0;
        }

        if (sel_cmd->parsed()) {
            bool entropy = false;
            std::uint64_t seed = resolve_seed(sel_common, &entropy);
            ReturnPanel panel = load_panel(sel_csv, sel_na);
            std::vector<FactorizationSpec> candidates;
            for (const std::string& d : sel_dims) {
                candidates.push_back(spec_for_panel(parse_dims(d), panel.n()));
            }
            if (sel_auto) {
                auto enumerated =
                    enumerate_factorizations(panel.n(), sel_max_params, sel_pad_up_to);
                candidates.insert(candidates.end(), enumerated.begin(), enumerated.end());
            }
            if (candidates.empty()) {
                throw BadInput("no candidates: pass --dims or --auto-factorize");
            }
            SelectOptions opts;
            opts.method = parse_method(sel_estimator);
            opts.seed = seed;
            opts.threads = sel_common.threads;
            std::vector<ModelCandidate> ranked = select_model(panel, candidates, opts);

            // Group by padding: BIC values are only comparable within a group.
            std::map<int, json> groups;
            for (const ModelCandidate& c : ranked) {
                json entry{{"dims", c.spec.dims}, {"pad", c.spec.pad}, {"q", c.q}, {"ok", c.ok}};
                if (c.ok) {
                    entry["loglik"] = c.loglik;
                    entry["bic"] = c.bic;
                    entry["bic_per_t"] = c.bic / panel.T();
                } else {
                    entry["error"] = c.error;
                }
                if (!groups.count(c.spec.pad)) groups[c.spec.pad] = json::array();
                groups[c.spec.pad].push_back(entry);
            }
            json group_list = json::array();
            for (auto& [pad, arr] : groups) {
                group_list.push_back(json{{"pad", pad}, {"candidates", arr}});
            }
            std::ostringstream table;
            table << "select: " << ranked.size() << " candidates (BIC ascending per pad group)\n";
            for (const ModelCandidate& c : ranked) {
                table << "  " << c.spec.to_string() << "  q=" << c.q;
                if (c.ok) {
                    table << "  logL/T=" << c.loglik / panel.T() << "  BIC/T=" << c.bic / panel.T();
                } else {
                    table << "  failed: " << c.error;
                }
                table << '\n';
            }
            json config_json{{"auto_factorize", sel_auto},
                             {"max_params", sel_max_params},
                             {"pad_up_to", sel_pad_up_to},
                             {"estimator", sel_estimator}};
            json report{{"schema", kSchemaVersion},
                        {"command", "select"},
                        {"result", json{{"groups", group_list}}},
                        {"manifest",
                         make_manifest("select", config_json, seed, entropy, {sel_csv}).to_json()}};
            emit(report, sel_common, table.str());
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error [" << e.code() << "]: " << e.what() << '\n';
        return classify_exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 1;
}
