// Command-line driver: spectra, survival probability, Poincare sections,
// Lyapunov and participation-ratio maps, spreading contours and Gaussian
// sequence fits, all configured through a JSON file with optional flag
// overrides. Exit codes: 0 ok, 1 usage or config error, 2 convergence
// failure, 3 analytic description not applicable.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dicke/classical.hpp"
#include "dicke/coherent.hpp"
#include "dicke/config.hpp"
#include "dicke/errors.hpp"
#include "dicke/io.hpp"
#include "dicke/model.hpp"
#include "dicke/quantum_dynamics.hpp"
#include "dicke/scan.hpp"
#include "dicke/sp_analytic.hpp"
#include "dicke/spectrum.hpp"
#include "dicke/svg.hpp"

namespace {

struct Overrides {
    std::string config;
    std::string output;
    std::string cache_dir;
    std::int64_t seed = -1;
    int threads = 0;
    bool plot = false;
    bool coarse = false;
};

dicke::RunConfig load_and_override(const Overrides& o) {
    dicke::RunConfig cfg = dicke::load_config(o.config);
    if (!o.output.empty()) cfg.io.output_dir = o.output;
    if (!o.cache_dir.empty()) cfg.io.cache_dir = o.cache_dir;
    if (o.seed >= 0) cfg.seed = static_cast<std::uint64_t>(o.seed);
    if (o.threads > 0) cfg.threads = o.threads;
    if (o.plot) cfg.io.plot = true;
    if (o.coarse) cfg.grid = dicke::GridSpec{40, 40};
    return cfg;
}

std::string out_path(const dicke::RunConfig& cfg, const std::string& name) {
    std::filesystem::create_directories(cfg.io.output_dir);
    return (std::filesystem::path(cfg.io.output_dir) / name).string();
}

double require_surface_energy(const dicke::RunConfig& cfg) {
    if (!cfg.surface_energy)
        throw std::invalid_argument("config: this command needs a 'surface' block");
    return *cfg.surface_energy;
}

const dicke::StateSpec& require_state(const dicke::RunConfig& cfg) {
    if (!cfg.state) throw std::invalid_argument("config: this command needs a 'state' block");
    return *cfg.state;
}

dicke::PhasePoint resolve_state(const dicke::RunConfig& cfg) {
    const dicke::StateSpec& spec = require_state(cfg);
    const double energy = spec.on_surface ? require_surface_energy(cfg) : 0.0;
    return spec.resolve(energy, cfg.model);
}

int resolve_n_max(const dicke::RunConfig& cfg, const dicke::PhasePoint& pt) {
    if (cfg.n_max > 0) return cfg.n_max;
    const int n = dicke::suggested_n_max(dicke::phase_to_labels(pt, cfg.model, true));
    std::fprintf(stderr, "auto basis cutoff: n_max = %d\n", n);
    return n;
}

dicke::EigenSystem obtain_eigensystem(const dicke::RunConfig& cfg, int n_max) {
    if (n_max <= 0)
        throw std::invalid_argument("config: basis.n_max required (or derivable from a state)");
    auto cached = dicke::io::load_eigensystem(cfg.io.cache_dir, cfg.model, n_max);
    if (cached) {
        std::fprintf(stderr, "cache hit: %s\n",
                     dicke::io::cache_key(cfg.model, n_max, +1).c_str());
        return std::move(*cached);
    }
    dicke::BasisSpec basis = dicke::build_basis(cfg.model, n_max);
    std::fprintf(stderr, "cache miss: diagonalizing dim = %d\n", basis.dim());
    dicke::EigenSystem es = dicke::diagonalize(dicke::build_hamiltonian(cfg.model, basis));
    const std::string path = dicke::io::save_eigensystem(cfg.io.cache_dir, es);
    std::fprintf(stderr, "cached: %s\n", path.c_str());
    return es;
}

// per-level weight beyond the last tenth of the Fock layers; a vanishing
// tail is the standard witness that the boson cutoff has converged
Eigen::VectorXd tail_weights(const dicke::EigenSystem& es) {
    const int n_max = es.basis.n_max;
    const int tail_layers = std::max(1, (n_max + 1) / 10);
    const int start = es.basis.block_offset[n_max + 1 - tail_layers];
    const int dim = es.basis.dim();
    Eigen::VectorXd tails(dim);
    for (int k = 0; k < dim; ++k) tails[k] = es.vectors.col(k).segment(start, dim - start).squaredNorm();
    return tails;
}

// ---------------------------------------------------------------- spectrum ----

int cmd_spectrum(const Overrides& o) {
    dicke::RunConfig cfg = load_and_override(o);
    if (cfg.n_max <= 0) throw std::invalid_argument("config: spectrum needs basis.n_max > 0");
    const dicke::EigenSystem es = obtain_eigensystem(cfg, cfg.n_max);

    const Eigen::VectorXd tails = tail_weights(es);
    const int dim = es.basis.dim();
    const int n_report = cfg.spectrum_n_levels > 0 ? std::min(cfg.spectrum_n_levels, dim) : dim;
    int converged = 0, first_bad = -1;
    for (int k = 0; k < n_report; ++k) {
        if (tails[k] < cfg.spectrum_tail_tol) {
            ++converged;
        } else if (first_bad < 0) {
            first_bad = k;
        }
    }

    std::string csv = "level,energy,energy_per_j,tail_weight\n";
    for (int k = 0; k < n_report; ++k)
        csv += std::to_string(k) + "," + dicke::io::format_g17(es.energies[k]) + "," +
               dicke::io::format_g17(es.energies[k] / cfg.model.j) + "," +
               dicke::io::format_g17(tails[k]) + "\n";
    const std::string levels_path = out_path(cfg, "spectrum_levels.csv");
    dicke::io::write_text_atomic(levels_path, csv);

    nlohmann::json report = {
        {"model", dicke::io::model_json(cfg.model)},
        {"n_max", cfg.n_max},
        {"dim", dim},
        {"levels_reported", n_report},
        {"tail_tol", cfg.spectrum_tail_tol},
        {"levels_converged", converged},
        {"first_unconverged_level", first_bad},
        {"ground_energy", es.energies[0]},
        {"ground_energy_per_j", es.energies[0] / cfg.model.j},
        {"degenerate_pairs", es.degenerate_pairs.size()},
    };
    dicke::io::write_manifest(out_path(cfg, "spectrum_report.json"), report);
    std::printf("%s\n", levels_path.c_str());

    if (converged < n_report) {
        std::fprintf(stderr, "convergence: %d of %d requested levels converged (tail > %g from level %d)\n",
                     converged, n_report, cfg.spectrum_tail_tol, first_bad);
        throw dicke::convergence_error("spectrum: unconverged levels in the requested window");
    }
    std::fprintf(stderr, "all %d requested levels converged\n", n_report);
    return 0;
}

// ---------------------------------------------------------------- survival ----

int cmd_survival(const Overrides& o, bool analytic) {
    dicke::RunConfig cfg = load_and_override(o);
    if (!cfg.times) throw std::invalid_argument("config: survival needs a 'times' block");
    const dicke::PhasePoint pt = resolve_state(cfg);
    const int n_max = resolve_n_max(cfg, pt);
    const dicke::EigenSystem es = obtain_eigensystem(cfg, n_max);

    const dicke::CoherentParams labels = dicke::phase_to_labels(pt, cfg.model, true);
    const dicke::CoherentVector cv = dicke::coherent_vector(labels, cfg.model, es.basis);
    const dicke::Decomposition dec = dicke::decompose(cv, es, cfg.sp_min_capture);

    const Eigen::VectorXd times =
        dicke::log_linear_times(cfg.times->t_max, cfg.times->n_points);
    const dicke::SPSeries sp = dicke::survival_probability(dec, times);
    const dicke::EquilibrationStats eq = dicke::equilibration_stats(sp, dec);

    // numeric artifacts first: they must survive an exit-3 analytic failure
    std::string comp = "level,energy,energy_per_j,weight\n";
    for (Eigen::Index k = 0; k < dec.energies.size(); ++k)
        if (dec.weights[k] > 0.0)
            comp += std::to_string(k) + "," + dicke::io::format_g17(dec.energies[k]) + "," +
                    dicke::io::format_g17(dec.energies[k] / cfg.model.j) + "," +
                    dicke::io::format_g17(dec.weights[k]) + "\n";
    dicke::io::write_text_atomic(out_path(cfg, "components.csv"), comp);

    nlohmann::json dj = {
        {"model", dicke::io::model_json(cfg.model)},
        {"n_max", n_max},
        {"state", {{"q", pt.q}, {"p", pt.p}, {"jz", pt.jz}, {"phi", pt.phi}}},
        {"classical_energy", dicke::hcl(pt, cfg.model)},
        {"mean_energy", dec.mean_energy},
        {"mean_energy_per_j", dec.mean_energy / cfg.model.j},
        {"energy_spread", dec.energy_spread},
        {"participation_ratio", dec.participation_ratio},
        {"plateau", sp.plateau},
        {"norm_captured", dec.norm_captured},
        {"capture_ratio", dec.capture_ratio},
        {"equilibration",
         {{"t_start", eq.t_start},
          {"window_average", eq.time_average},
          {"rms_fluctuation", eq.rms_fluctuation},
          {"ratio_to_plateau", eq.ratio_to_plateau}}},
    };
    dicke::io::write_manifest(out_path(cfg, "decomposition.json"), dj);

    const std::string sp_path = out_path(cfg, "survival.csv");
    const auto write_numeric_only = [&]() {
        std::string csv = "t,sp\n";
        for (Eigen::Index i = 0; i < times.size(); ++i)
            csv += dicke::io::format_g17(times[i]) + "," + dicke::io::format_g17(sp.sp[i]) + "\n";
        dicke::io::write_text_atomic(sp_path, csv);
    };

    const auto emit_plot = [&](const dicke::AnalyticSP* an) {
        if (!cfg.io.plot) return;
        std::vector<dicke::svg::Series> series;
        dicke::svg::Series numeric;
        numeric.x.assign(times.data(), times.data() + times.size());
        numeric.y.assign(sp.sp.data(), sp.sp.data() + sp.sp.size());
        numeric.label = "numeric";
        series.push_back(numeric);
        if (an) {
            dicke::svg::Series a;
            a.x = numeric.x;
            a.y.assign(an->series.sp.data(), an->series.sp.data() + an->series.sp.size());
            a.color = "#d62728";
            a.label = "analytic";
            series.push_back(a);
        }
        dicke::svg::PlotOptions po;
        po.title = "survival probability";
        po.xlabel = "t";
        po.ylabel = "SP(t)";
        po.log_y = true;
        po.hlines = {{sp.plateau, "1/P_R"}};
        dicke::svg::write_plot(out_path(cfg, "survival.svg"), dicke::svg::line_plot(series, po));
    };

    if (!analytic) {
        write_numeric_only();
        emit_plot(nullptr);
        std::printf("%s\n", sp_path.c_str());
        return 0;
    }

    try {
        const dicke::SequenceSet ss = dicke::detect_sequences(dec, cfg.detect);
        const dicke::AnalyticSP an = dicke::sp_analytic(ss, times);

        std::string csv = "t,sp,sp_analytic";
        for (const auto& label : an.labels) csv += "," + label;
        csv += "\n";
        for (Eigen::Index i = 0; i < times.size(); ++i) {
            csv += dicke::io::format_g17(times[i]) + "," + dicke::io::format_g17(sp.sp[i]) +
                   "," + dicke::io::format_g17(an.series.sp[i]);
            for (Eigen::Index r = 0; r < an.terms.rows(); ++r)
                csv += "," + dicke::io::format_g17(an.terms(r, i));
            csv += "\n";
        }
        dicke::io::write_text_atomic(sp_path, csv);

        nlohmann::json sj = {{"omega1_seed", ss.omega1_seed},
                             {"thresholded_weight", ss.thresholded_weight},
                             {"residual_weight", ss.residual_weight},
                             {"structured", ss.structured},
                             {"n_discarded_sequences", ss.n_discarded_sequences},
                             {"analytic_plateau", an.series.plateau},
                             {"sequences", nlohmann::json::array()}};
        for (const auto& s : ss.sequences)
            sj["sequences"].push_back({{"amplitude", s.amplitude},
                                       {"mean_energy", s.mean_energy},
                                       {"sigma", s.sigma},
                                       {"omega1", s.omega1},
                                       {"e2", s.e2},
                                       {"decay_time", s.decay_time()},
                                       {"plateau", s.plateau()},
                                       {"r_squared", s.r_squared},
                                       {"total_weight", s.total_weight},
                                       {"n_members", s.members.size()}});
        dicke::io::write_manifest(out_path(cfg, "sequences.json"), sj);
        emit_plot(&an);
        std::printf("%s\n", sp_path.c_str());
        return 0;
    } catch (const dicke::unstructured_error& e) {
        write_numeric_only();
        emit_plot(nullptr);
        std::printf("%s\n", sp_path.c_str());
        std::fprintf(stderr, "analytic description not applicable: %s\n", e.what());
        return 3;
    }
}

// -------------------------------------------------------------------- maps ----

int cmd_map(const Overrides& o, dicke::ScanTask task) {
    dicke::RunConfig cfg = load_and_override(o);
    dicke::ScanJob job;
    job.params = cfg.model;
    job.surface.energy = require_surface_energy(cfg);
    job.grid = cfg.grid;
    job.task = task;
    job.n_crossings = cfg.n_crossings;
    job.benettin = cfg.dynamics;
    job.global_seed = cfg.seed;
    job.n_threads = cfg.threads;
    job.output_dir = cfg.io.output_dir;

    dicke::EigenSystem es;  // must outlive run_scan for the pr task
    switch (task) {
        case dicke::ScanTask::sections: job.name = "poincare"; break;
        case dicke::ScanTask::lyapunov: job.name = "lyapunov"; break;
        case dicke::ScanTask::pr: {
            job.name = "pr";
            int n_max = cfg.n_max;
            if (n_max == 0) {
                // the one shared basis must hold the widest state on the shell
                for (int row = 0; row < job.grid.n_jz; ++row)
                    for (int col = 0; col < job.grid.n_phi; ++col) {
                        const auto pt = job.surface.point_at(job.grid.phi_at(col),
                                                             job.grid.jz_at(row), cfg.model);
                        if (!pt) continue;
                        n_max = std::max(
                            n_max, dicke::suggested_n_max(
                                       dicke::phase_to_labels(*pt, cfg.model, true)));
                    }
                if (n_max == 0)
                    std::fprintf(stderr, "empty shell: no basis needed\n");
                else
                    std::fprintf(stderr, "auto basis cutoff: n_max = %d\n", n_max);
            }
            if (n_max > 0) {
                es = obtain_eigensystem(cfg, n_max);
            } else {
                // empty shell: run_scan still wants an eigensystem reference,
                // so hand it a minimal one; every point comes back missing
                es = dicke::diagonalize(
                    dicke::build_hamiltonian(cfg.model, dicke::build_basis(cfg.model, 1)));
            }
            job.eigen = &es;
            break;
        }
    }

    const dicke::ScanResult res = dicke::run_scan(job);
    std::printf("%s\n", res.csv_path.c_str());
    std::fprintf(stderr, "points: %d ok, %d missing, %d failed (%d resumed), hash %s\n",
                 res.map.count(dicke::PointStatus::ok),
                 res.map.count(dicke::PointStatus::missing),
                 res.map.count(dicke::PointStatus::failed), res.n_resumed,
                 res.content_hash.c_str());
    if (res.shell_empty)
        std::fprintf(stderr, "empty map: energy shell vanished at E = %.17g\n",
                     job.surface.energy);

    if (cfg.io.plot && !res.shell_empty) {
        if (task == dicke::ScanTask::sections) {
            // scatter of all crossings, one colour per orbit
            static const char* palette[8] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                             "#9467bd", "#8c564b", "#e377c2", "#17becf"};
            const dicke::MapField& map = res.map;
            const auto table = dicke::io::parse_csv(dicke::io::read_text_file(res.sections_path));
            std::vector<dicke::svg::Series> series;
            std::string current;
            for (const auto& row : table.rows) {
                if (row[0] != current) {
                    current = row[0];
                    dicke::svg::Series s;
                    s.color = palette[series.size() % 8];
                    s.marker_radius = 1.1;
                    series.push_back(s);
                }
                series.back().x.push_back(dicke::io::parse_double(row[4]));
                series.back().y.push_back(dicke::io::parse_double(row[5]));
            }
            dicke::svg::PlotOptions po;
            po.title = "Poincare section, E = " + dicke::svg::detail::num(map.energy);
            po.xlabel = "phi";
            po.ylabel = "jz / j";
            dicke::svg::write_plot(out_path(cfg, job.name + ".svg"),
                                   dicke::svg::line_plot(series, po));
        } else {
            dicke::svg::HeatmapOptions ho;
            ho.title = std::string(task == dicke::ScanTask::pr ? "P_R" : "lambda") +
                       ", E = " + dicke::svg::detail::num(res.map.energy);
            ho.xlabel = "phi";
            ho.ylabel = "jz / j";
            ho.x_min = 0.0;
            ho.x_max = 2.0 * M_PI;
            ho.y_min = -1.0;
            ho.y_max = 1.0;
            dicke::svg::write_plot(
                out_path(cfg, job.name + ".svg"),
                dicke::svg::heatmap(res.map.values, res.map.grid.n_phi, res.map.grid.n_jz, ho));
        }
    }
    return 0;
}

// ----------------------------------------------------------------- contour ----

int cmd_contour(const Overrides& o) {
    dicke::RunConfig cfg = load_and_override(o);
    const double energy = require_surface_energy(cfg);
    const dicke::PhasePoint pt = resolve_state(cfg);
    const dicke::SpreadingContour sc = dicke::spreading_contour(pt, energy, cfg.model);

    std::string csv = "phi,jz_tilde,q,overlap,clipped\n";
    for (const auto& c : sc.points)
        csv += dicke::io::format_g17(c.phi) + "," + dicke::io::format_g17(c.jz_tilde) + "," +
               dicke::io::format_g17(c.q) + "," + dicke::io::format_g17(c.overlap) + "," +
               (c.clipped ? "1" : "0") + "\n";
    const std::string path = out_path(cfg, "contour.csv");
    dicke::io::write_text_atomic(path, csv);

    nlohmann::json cj = {{"model", dicke::io::model_json(cfg.model)},
                         {"energy", energy},
                         {"center", {{"phi", sc.center.phi}, {"jz_tilde", sc.center.jz / cfg.model.j}}},
                         {"area", sc.area},
                         {"any_clipped", sc.any_clipped},
                         {"n_points", sc.points.size()}};
    dicke::io::write_manifest(out_path(cfg, "contour.json"), cj);

    if (cfg.io.plot) {
        dicke::svg::Series ring;
        for (const auto& c : sc.points) {
            ring.x.push_back(c.phi);
            ring.y.push_back(c.jz_tilde);
        }
        if (!sc.points.empty()) {  // close the loop
            ring.x.push_back(sc.points.front().phi);
            ring.y.push_back(sc.points.front().jz_tilde);
        }
        dicke::svg::Series center;
        center.x = {sc.center.phi};
        center.y = {sc.center.jz / cfg.model.j};
        center.color = "#d62728";
        center.marker_radius = 3.0;
        dicke::svg::PlotOptions po;
        po.title = "coherent-state spreading contour";
        po.xlabel = "phi";
        po.ylabel = "jz / j";
        dicke::svg::write_plot(out_path(cfg, "contour.svg"),
                               dicke::svg::line_plot({ring, center}, po));
    }
    std::printf("%s\n", path.c_str());
    return 0;
}

// ----------------------------------------------------------- fit-sequences ----

int cmd_fit_sequences(const Overrides& o) {
    dicke::RunConfig cfg = load_and_override(o);
    const dicke::PhasePoint pt = resolve_state(cfg);
    const int n_max = resolve_n_max(cfg, pt);
    const dicke::EigenSystem es = obtain_eigensystem(cfg, n_max);
    const dicke::CoherentParams labels = dicke::phase_to_labels(pt, cfg.model, true);
    const dicke::CoherentVector cv = dicke::coherent_vector(labels, cfg.model, es.basis);
    const dicke::Decomposition dec = dicke::decompose(cv, es, cfg.sp_min_capture);

    std::string comp = "level,energy,energy_per_j,weight\n";
    for (Eigen::Index k = 0; k < dec.energies.size(); ++k)
        if (dec.weights[k] > 0.0)
            comp += std::to_string(k) + "," + dicke::io::format_g17(dec.energies[k]) + "," +
                    dicke::io::format_g17(dec.energies[k] / cfg.model.j) + "," +
                    dicke::io::format_g17(dec.weights[k]) + "\n";
    dicke::io::write_text_atomic(out_path(cfg, "components.csv"), comp);

    const dicke::SequenceSet ss = dicke::detect_sequences(dec, cfg.detect);  // may throw exit-3

    nlohmann::json sj = {{"omega1_seed", ss.omega1_seed},
                         {"thresholded_weight", ss.thresholded_weight},
                         {"residual_weight", ss.residual_weight},
                         {"structured", ss.structured},
                         {"n_discarded_sequences", ss.n_discarded_sequences},
                         {"sequences", nlohmann::json::array()}};
    for (const auto& s : ss.sequences) {
        nlohmann::json one = {{"amplitude", s.amplitude},
                              {"mean_energy", s.mean_energy},
                              {"sigma", s.sigma},
                              {"omega1", s.omega1},
                              {"e2", s.e2},
                              {"decay_time", s.decay_time()},
                              {"plateau", s.plateau()},
                              {"r_squared", s.r_squared},
                              {"total_weight", s.total_weight},
                              {"members", s.members}};
        sj["sequences"].push_back(one);
    }
    const std::string path = out_path(cfg, "sequences.json");
    dicke::io::write_manifest(path, sj);
    std::printf("%s\n", path.c_str());
    if (!ss.structured) {
        std::fprintf(stderr, "decomposition is unstructured: kept weight below threshold\n");
        return 3;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dicke model: quantum and classical chaos toolkit"};
    app.require_subcommand(1);
    app.fallthrough();

    Overrides o;
    app.add_option("--config", o.config, "JSON run configuration")->required();
    app.add_option("--output", o.output, "output directory (overrides io.output_dir)");
    app.add_option("--cache-dir", o.cache_dir, "eigen cache directory (overrides io.cache_dir)");
    app.add_option("--seed", o.seed, "global seed (overrides config)");
    app.add_option("--threads", o.threads, "worker threads (overrides config)");
    app.add_flag("--plot", o.plot, "emit SVG plots next to the data files");
    app.add_flag("--coarse", o.coarse, "40x40 grid preset for quick runs");

    auto* spectrum = app.add_subcommand("spectrum", "diagonalize and cache the spectrum");
    auto* survival = app.add_subcommand("survival", "coherent-state survival probability");
    bool analytic = false;
    survival->add_flag("--analytic", analytic, "add Gaussian-sequence analytic SP");
    auto* poincare = app.add_subcommand("poincare", "Poincare section sweep");
    auto* lyap = app.add_subcommand("lyapunov-map", "Lyapunov exponent map");
    auto* pr = app.add_subcommand("pr-map", "participation ratio map");
    auto* contour = app.add_subcommand("contour", "coherent-state spreading contour");
    auto* fitseq = app.add_subcommand("fit-sequences", "Gaussian energy-sequence fits");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (spectrum->parsed()) return cmd_spectrum(o);
        if (survival->parsed()) return cmd_survival(o, analytic);
        if (poincare->parsed()) return cmd_map(o, dicke::ScanTask::sections);
        if (lyap->parsed()) return cmd_map(o, dicke::ScanTask::lyapunov);
        if (pr->parsed()) return cmd_map(o, dicke::ScanTask::pr);
        if (contour->parsed()) return cmd_contour(o);
        if (fitseq->parsed()) return cmd_fit_sequences(o);
    } catch (const dicke::unstructured_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const dicke::convergence_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::length_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 1;
}
