// Command-line front end: simulate preferentially sampled patterns, fit the
// semivariogram by composite likelihood / minimum contrast / Gaussian MLE,
// plug-in inference for the regression coefficients, and the Monte-Carlo
// benchmark drivers.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "prefgeo/dataset.hpp"
#include "prefgeo/experiments.hpp"
#include "prefgeo/serialize.hpp"

namespace fs = std::filesystem;
using namespace prefgeo;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

Window parse_window(const std::string& s) {
    std::stringstream ss(s);
    std::vector<double> v;
    std::string cell;
    while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
    if (v.size() != 4) throw DataError("window: want xmin,xmax,ymin,ymax");
    Window w{v[0], v[1], v[2], v[3]};
    w.validate();
    return w;
}

PointPattern load_pattern(const std::string& path, const std::string& window_arg) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open pattern file: " + path);
    if (!window_arg.empty()) return read_pattern_csv(in, parse_window(window_arg));
    // fall back to the bounding box (weights depend on the window; prefer
    // passing --window explicitly)
    std::stringstream buffer;
    buffer << in.rdbuf();
    std::string content = buffer.str();
    std::istringstream probe(content);
    std::string header, line;
    std::getline(probe, header);
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    while (std::getline(probe, line)) {
        if (line.empty()) continue;
        std::stringstream ls(line);
        std::string a, b;
        std::getline(ls, a, ',');
        std::getline(ls, b, ',');
        x0 = std::min(x0, std::stod(a));
        x1 = std::max(x1, std::stod(a));
        y0 = std::min(y0, std::stod(b));
        y1 = std::max(y1, std::stod(b));
    }
    std::cerr << "note: no --window given; using the point bounding box\n";
    std::istringstream again(content);
    return read_pattern_csv(again, Window{x0, x1, y0, y1});
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config file: " + path);
    nlohmann::json j;
    in >> j;
    return config_from_json(j);
}

void write_text(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << content;
}

template <class Writer>
void write_with(const fs::path& path, Writer&& w) {
    fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    w(out);
}

// §5-style scenario presets, overridable flag by flag
ScenarioConfig preset_config(int scenario, double phi, double nu) {
    ScenarioConfig cfg;
    cfg.scenario = scenario;
    cfg.y_params = {1.0, phi, nu};
    if (scenario == 2) {
        cfg.x_params = {1.8, 0.05, 0.5};
        cfg.xy_params = {1.0, 0.07, 0.75};
        cfg.y_params = {1.0, phi, nu};
    }
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"geostatistics under preferential sampling"};
    app.require_subcommand(1);
    app.fallthrough();

    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0;
    std::string out_arg;
    std::string config_arg;
    app.add_option("--seed", seed, "override the config seed")->each([&](const std::string&) {
        seed_set = true;
    });
    app.add_option("--threads", threads, "worker threads for replicate fan-out (0 = all)");
    app.add_option("--out", out_arg, "output file or directory");
    app.add_option("--config", config_arg, "scenario config JSON");

    // ---- simulate
    auto* sim_cmd = app.add_subcommand("simulate", "generate one pattern from a scenario config");
    sim_cmd->fallthrough();
    std::uint64_t sim_rep = 0;
    sim_cmd->add_option("--replicate", sim_rep, "replicate index within the seed stream");

    // ---- fit
    auto* fit_cmd = app.add_subcommand("fit", "fit the semivariogram to a pattern");
    fit_cmd->fallthrough();
    std::string fit_pattern, fit_window, fit_methods = "cl,mc,mle";
    double fit_R = 0.0, fit_nu = 0.5;
    fit_cmd->add_option("--pattern", fit_pattern, "pattern CSV (x,y,z,w1,...)")->required();
    fit_cmd->add_option("--window", fit_window, "xmin,xmax,ymin,ymax");
    fit_cmd->add_option("--R", fit_R, "dependence range (default: pilot fit, 4 x pilot phi)");
    fit_cmd->add_option("--nu", fit_nu, "fixed smoothness of the fitted family (default 0.5)");
    fit_cmd->add_option("--methods", fit_methods, "comma list from cl,mc,mle");

    // ---- infer
    auto* infer_cmd = app.add_subcommand("infer", "confidence intervals for the coefficients");
    infer_cmd->fallthrough();
    std::string infer_pattern, infer_window;
    double infer_R = 0.0, infer_level = 0.95;
    infer_cmd->add_option("--pattern", infer_pattern)->required();
    infer_cmd->add_option("--window", infer_window);
    infer_cmd->add_option("--R", infer_R, "lag cap / weight range (default: pilot fit)");
    infer_cmd->add_option("--level", infer_level, "confidence level (default 0.95)");

    // ---- curves
    auto* curves_cmd = app.add_subcommand("curves", "kernel semivariogram / cross-covariance");
    curves_cmd->fallthrough();
    std::string curves_pattern, curves_window;
    double curves_R = 0.0, curves_h = 0.0;
    curves_cmd->add_option("--pattern", curves_pattern)->required();
    curves_cmd->add_option("--window", curves_window);
    curves_cmd->add_option("--R", curves_R, "maximum lag (default: pilot fit)");
    curves_cmd->add_option("--bandwidth", curves_h, "kernel bandwidth (default: LOO-CV)");

    // ---- ingest
    auto* ingest_cmd = app.add_subcommand("ingest", "convert x,y,mark CSV to a pattern");
    ingest_cmd->fallthrough();
    std::string ingest_csv, ingest_raster, ingest_window;
    bool ingest_logdbh = false;
    ingest_cmd->add_option("--data", ingest_csv, "input CSV with header x,y,mark")->required();
    ingest_cmd->add_option("--raster", ingest_raster, "covariate raster file");
    ingest_cmd->add_option("--window", ingest_window);
    ingest_cmd->add_flag("--log-dbh", ingest_logdbh, "apply the log(mark - 9) transform");

    // ---- bench
    auto* bench_cmd = app.add_subcommand("bench", "Monte-Carlo studies");
    bench_cmd->fallthrough();
    std::string bench_kind;
    bench_cmd->add_option("kind", bench_kind, "table1 | expansion | coverage")->required();
    int bench_scenario = 1, bench_reps = 0, bench_resolution = 0;
    double bench_phi = 0.0, bench_nu = 0.0, bench_R = 0.0;
    std::string bench_gammas = "1,1.5,2,2.5,3";
    std::string bench_windows = "1,2,3";
    bool bench_mle = false, bench_no_mle = false;
    std::string bench_marks;
    bench_cmd->add_option("--scenario", bench_scenario, "1 or 2");
    bench_cmd->add_option("--phi", bench_phi, "true range of Y");
    bench_cmd->add_option("--nu", bench_nu, "true smoothness of Y");
    bench_cmd->add_option("--reps", bench_reps, "replicates (default: study-specific)");
    bench_cmd->add_option("--R", bench_R, "weight range (default 4 phi)");
    bench_cmd->add_option("--resolution", bench_resolution, "grid cells per unit length");
    bench_cmd->add_option("--gammas", bench_gammas, "coverage gamma grid");
    bench_cmd->add_option("--windows", bench_windows, "expansion window sides, comma list");
    bench_cmd->add_option("--marks", bench_marks, "mark mode: auto|exact|bilinear");
    bench_cmd->add_flag("--mle", bench_mle, "force the MLE on (heavy on large windows)");
    bench_cmd->add_flag("--no-mle", bench_no_mle, "skip the MLE");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        // ------------------------------------------------------ simulate
        if (sim_cmd->parsed()) {
            if (config_arg.empty()) throw DataError("simulate: --config required");
            ScenarioConfig cfg = load_config(config_arg);
            if (seed_set) cfg.seed = seed;
            FieldSimulator sim(cfg);
            PointPattern pat = sim.generate(sim_rep);
            std::ostringstream os;
            write_pattern_csv(pat, os);
            if (out_arg.empty())
                std::cout << os.str();
            else
                write_text(out_arg, os.str());
            std::cerr << "simulated " << pat.size() << " points\n";
            return 0;
        }

        // ------------------------------------------------------ fit
        if (fit_cmd->parsed()) {
            PointPattern pat = load_pattern(fit_pattern, fit_window);
            auto beta = ols_beta(pat);
            SemivariogramModel model(fit_nu);
            if (fit_R <= 0.0) {
                fit_R = choose_weight_range(pat, beta.beta_raw, model);
                std::cerr << "pilot-selected R = " << fit_R << "\n";
            }
            PairWeightSpec spec{fit_R, pat.window};
            nlohmann::json out = nlohmann::json::array();
            std::stringstream ms(fit_methods);
            std::string method;
            while (std::getline(ms, method, ',')) {
                if (method == "cl")
                    out.push_back(fit_record_json(fit(pat, beta.beta_raw, spec, FitMethod::CL, model)));
                else if (method == "mc")
                    out.push_back(fit_record_json(fit(pat, beta.beta_raw, spec, FitMethod::MC, model)));
                else if (method == "mle")
                    out.push_back(fit_record_json(mle_fit(pat, fit_nu)));
                else
                    throw DataError("fit: unknown method '" + method + "'");
            }
            nlohmann::json doc{{"beta_raw", beta.beta_raw}, {"fits", out}};
            std::string text = doc.dump(2) + "\n";
            if (out_arg.empty())
                std::cout << text;
            else
                write_text(out_arg, text);
            return 0;
        }

        // ------------------------------------------------------ infer
        if (infer_cmd->parsed()) {
            PointPattern pat = load_pattern(infer_pattern, infer_window);
            if (infer_R <= 0.0) {
                auto beta0 = ols_beta(pat);
                infer_R = choose_weight_range(pat, beta0.beta_raw, SemivariogramModel(0.5));
                std::cerr << "pilot-selected R = " << infer_R << "\n";
            }
            PatternAnalysis an = analyze_pattern(pat, infer_R, true, infer_level);
            nlohmann::json doc = infer_report_json(an.beta, *an.sw, an.ci);
            doc["bandwidth"] = an.bandwidth;
            doc["sill_hat"] = an.omega;
            std::string text = doc.dump(2) + "\n";
            if (out_arg.empty())
                std::cout << text;
            else
                write_text(out_arg, text);
            return 0;
        }

        // ------------------------------------------------------ curves
        if (curves_cmd->parsed()) {
            PointPattern pat = load_pattern(curves_pattern, curves_window);
            auto beta = ols_beta(pat);
            if (curves_R <= 0.0) {
                curves_R = choose_weight_range(pat, beta.beta_raw, SemivariogramModel(0.5));
                std::cerr << "pilot-selected R = " << curves_R << "\n";
            }
            double h = curves_h;
            if (h <= 0.0)
                h = select_bandwidth(pat, beta.beta_raw, default_bandwidth_candidates(curves_R),
                                     curves_R);
            auto lags = default_lag_grid(h, curves_R);
            auto vy = semivariogram_hat(pat, beta.beta_raw, lags, h);
            auto cxy = crosscov_hat(pat, beta.beta_raw, lags, h);
            std::string prefix = out_arg.empty() ? "curves" : out_arg;
            write_with(prefix + "_vy.csv", [&](std::ostream& os) { vy.write_csv(os); });
            write_with(prefix + "_cxy.csv", [&](std::ostream& os) { cxy.write_csv(os); });
            std::cerr << "bandwidth " << h << "; wrote " << prefix << "_vy.csv and "
                      << prefix << "_cxy.csv\n";
            return 0;
        }

        // ------------------------------------------------------ ingest
        if (ingest_cmd->parsed()) {
            std::ifstream in(ingest_csv);
            if (!in) throw DataError("cannot open " + ingest_csv);
            std::optional<Raster> raster;
            if (!ingest_raster.empty()) {
                std::ifstream rin(ingest_raster);
                if (!rin) throw DataError("cannot open " + ingest_raster);
                raster = Raster::read(rin);
            }
            std::optional<Window> win;
            if (!ingest_window.empty()) win = parse_window(ingest_window);
            IngestReport report;
            PointPattern pat =
                ingest_dataset(in, raster ? &*raster : nullptr, ingest_logdbh, win, &report);
            std::ostringstream os;
            write_pattern_csv(pat, os);
            if (out_arg.empty())
                std::cout << os.str();
            else
                write_text(out_arg, os.str());
            std::cerr << "kept " << report.kept << ", outside window " << report.rejected_outside
                      << ", transform-domain rejects " << report.rejected_domain << "\n";
            return 0;
        }

        // ------------------------------------------------------ bench
        if (bench_cmd->parsed()) {
            ScenarioConfig cfg;
            bool is_coverage = bench_kind == "coverage";
            bool is_expansion = bench_kind == "expansion";
            if (!config_arg.empty())
                cfg = load_config(config_arg);
            else {
                double phi = bench_phi > 0 ? bench_phi : (bench_kind == "table1" ? 0.05 : 0.1);
                double nu = bench_nu > 0 ? bench_nu : (bench_kind == "table1" ? 1.0 : 0.5);
                if (bench_scenario == 2 && bench_nu <= 0) nu = 1.0;
                if (bench_scenario == 2 && bench_phi <= 0) phi = 0.1;
                cfg = preset_config(bench_scenario, phi, nu);
            }
            if (seed_set) cfg.seed = seed;
            if (bench_resolution > 0) cfg.resolution = bench_resolution;
            if (!bench_marks.empty()) {
                if (bench_marks == "auto") cfg.mark_mode = MarkMode::Auto;
                else if (bench_marks == "exact") cfg.mark_mode = MarkMode::ExactConditional;
                else if (bench_marks == "bilinear") cfg.mark_mode = MarkMode::Bilinear;
                else throw DataError("bench: --marks must be auto|exact|bilinear");
            }

            BenchOptions opt;
            opt.threads = threads;
            opt.replicates = bench_reps > 0 ? bench_reps : (is_coverage ? 200 : 100);
            opt.R = bench_R;
            if (bench_no_mle) opt.run_mle = false;

            fs::path out_dir = out_arg.empty() ? fs::path("bench_out") : fs::path(out_arg);
            fs::create_directories(out_dir);

            if (bench_kind == "table1") {
                SummaryTable table = run_table1(cfg, opt);
                write_with(out_dir / "summary.csv",
                           [&](std::ostream& os) { table.write_summary_csv(os); });
                write_with(out_dir / "records.csv",
                           [&](std::ostream& os) { table.write_records_csv(os); });
                write_with(out_dir / "timing.csv",
                           [&](std::ostream& os) { table.write_timing_csv(os); });
                write_text(out_dir / "table.txt", table.text_table());
                std::cout << table.text_table();
                if (table.failures > 0)
                    std::cerr << table.failures << " replicate(s) failed and were excluded\n";
            } else if (is_expansion) {
                // MLE on the larger windows is a dense n^3 likelihood per
                // evaluation; off unless forced
                if (!bench_mle) opt.run_mle = false;
                std::vector<ExpansionWindow> windows;
                std::stringstream ws(bench_windows);
                std::string side;
                while (std::getline(ws, side, ',')) {
                    double L = std::stod(side);
                    int res = bench_resolution > 0 ? bench_resolution : (L <= 1.0 ? 64 : 32);
                    windows.push_back({Window{0, L, 0, L}, res});
                }
                auto results = run_expansion(cfg, windows, opt);
                for (const auto& [w, table] : results) {
                    std::string tag = "w" + std::to_string(static_cast<int>(w.window.xmax));
                    write_with(out_dir / ("summary_" + tag + ".csv"),
                               [&, t = &table](std::ostream& os) { t->write_summary_csv(os); });
                    write_with(out_dir / ("records_" + tag + ".csv"),
                               [&, t = &table](std::ostream& os) { t->write_records_csv(os); });
                    write_with(out_dir / ("timing_" + tag + ".csv"),
                               [&, t = &table](std::ostream& os) { t->write_timing_csv(os); });
                    std::cout << "window [0," << w.window.xmax << "]^2\n" << table.text_table();
                }
            } else if (is_coverage) {
                if (!bench_mle) opt.run_mle = false;
                std::vector<double> gammas;
                std::stringstream gs(bench_gammas);
                std::string g;
                while (std::getline(gs, g, ',')) gammas.push_back(std::stod(g));
                if (cfg.window.area() <= 1.0 + 1e-9 && config_arg.empty()) {
                    cfg.window = Window{0, 3, 0, 3};
                    cfg.resolution = bench_resolution > 0 ? bench_resolution : 32;
                }
                CoverageResult cov = run_coverage(cfg, gammas, opt);
                write_with(out_dir / "coverage.csv",
                           [&](std::ostream& os) { cov.write_csv(os); });
                std::ostringstream preview;
                cov.write_csv(preview);
                std::cout << preview.str();
            } else {
                throw DataError("bench: kind must be table1 | expansion | coverage");
            }
            return 0;
        }
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitUsage;
}
