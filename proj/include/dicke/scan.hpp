#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "dicke/classical.hpp"
#include "dicke/coherent.hpp"
#include "dicke/errors.hpp"
#include "dicke/io.hpp"
#include "dicke/numerics.hpp"
#include "dicke/phase_space.hpp"
#include "dicke/quantum_dynamics.hpp"
#include "dicke/spectrum.hpp"

// Grid sweeps over the Poincare surface p = 0, q = q+: section collages,
// Lyapunov maps and participation-ratio maps. Scans are deterministic
// (static row partition, per-point seeds derived from the global seed) and
// resumable through a per-point completion ledger.

namespace dicke {

// ------------------------------------------------------------------ grid ----

struct GridSpec {
    int n_phi = 100;
    int n_jz = 100;

    bool operator==(const GridSpec&) const = default;

    void validate() const {
        if (n_phi < 1 || n_jz < 1) throw std::invalid_argument("GridSpec: empty grid");
    }
    // cell centers tile [0, 2pi) x (-1, 1); centers never touch the poles
    double phi_at(int col) const { return (col + 0.5) * 2.0 * M_PI / n_phi; }
    double jz_at(int row) const { return -1.0 + (row + 0.5) * 2.0 / n_jz; }
    int size() const { return n_phi * n_jz; }
    int index(int row, int col) const { return row * n_phi + col; }
};

enum class ScanTask { sections, lyapunov, pr };
enum class PointStatus { ok, missing, failed };

inline const char* to_string(ScanTask t) {
    switch (t) {
        case ScanTask::sections: return "sections";
        case ScanTask::lyapunov: return "lyapunov";
        case ScanTask::pr: return "pr";
    }
    return "?";
}

inline const char* to_string(PointStatus s) {
    switch (s) {
        case PointStatus::ok: return "ok";
        case PointStatus::missing: return "missing";
        case PointStatus::failed: return "failed";
    }
    return "?";
}

struct MapField {
    GridSpec grid;
    ScanTask task = ScanTask::lyapunov;
    double energy = 0.0;
    std::vector<double> values;        // NaN unless status is ok
    std::vector<PointStatus> status;

    int count(PointStatus s) const {
        return static_cast<int>(std::count(status.begin(), status.end(), s));
    }
};

struct ScanJob {
    ModelParams params;
    PoincareSurface surface;
    GridSpec grid;
    ScanTask task = ScanTask::lyapunov;

    int n_crossings = 200;       // sections task
    BenettinOptions benettin;    // lyapunov task (per-point seed overrides)
    double pr_min_capture = 0.99;
    const EigenSystem* eigen = nullptr;  // required for the pr task

    std::uint64_t global_seed = 1;
    int n_threads = 1;

    std::string output_dir = "out";
    std::string name = "map";
};

struct ScanResult {
    MapField map;
    std::string csv_path;
    std::string manifest_path;
    std::string ledger_path;
    std::string sections_path;  // only for the sections task
    std::string content_hash;
    bool shell_empty = false;
    int n_resumed = 0;
    double seconds = 0.0;
};

// ---------------------------------------------------------------- ledger ----

namespace detail {

struct PointRecord {
    PointStatus status = PointStatus::missing;
    double value = std::numeric_limits<double>::quiet_NaN();
    std::vector<SectionPoint> crossings;  // sections task only
};

// the fingerprint pins a ledger to one exact job so stale files cannot leak
// into a different scan
inline std::string job_fingerprint(const ScanJob& job) {
    std::string s = io::format_g17(job.params.omega) + "," + io::format_g17(job.params.omega0) +
                    "," + io::format_g17(job.params.gamma) + "," + io::format_g17(job.params.j) +
                    "," + io::format_g17(job.surface.energy) + "," + std::to_string(job.grid.n_phi) +
                    "," + std::to_string(job.grid.n_jz) + "," + to_string(job.task) + "," +
                    std::to_string(job.global_seed) + "," + std::to_string(job.n_crossings) + "," +
                    io::format_g17(job.benettin.t_total) + "," +
                    io::format_g17(job.benettin.renorm_interval) + "," +
                    io::format_g17(job.benettin.d0) + "," + io::format_g17(job.benettin.rtol);
    return io::fnv1a64_hex(s);
}

// Every line ends in a sentinel field: a line cut short by a kill mid-write
// could otherwise still parse (a truncated double is a valid double), which
// would silently corrupt a resumed run.
inline std::string ledger_line(int index, const PointRecord& r) {
    std::string line = std::to_string(index);
    line += ",";
    line += to_string(r.status);
    line += ",";
    line += io::format_g17(r.value);
    for (const auto& c : r.crossings) {
        line += "," + io::format_g17(c.t) + "," + io::format_g17(c.phi) + "," +
                io::format_g17(c.jz_tilde) + "," + io::format_g17(c.q) + "," +
                io::format_g17(c.p) + "," + io::format_g17(c.energy);
    }
    line += ",.";
    return line;
}

inline PointStatus status_from_string(const std::string& s) {
    if (s == "ok") return PointStatus::ok;
    if (s == "missing") return PointStatus::missing;
    if (s == "failed") return PointStatus::failed;
    throw std::invalid_argument("ledger: unknown status '" + s + "'");
}

// returns completed records keyed by point index; throws if the ledger
// belongs to a different job
inline std::vector<std::optional<PointRecord>> read_ledger(const std::string& path,
                                                           const ScanJob& job) {
    std::vector<std::optional<PointRecord>> out(job.grid.size());
    if (!io::file_exists(path)) return out;
    std::ifstream in(path);
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const std::string want = "# scan-ledger " + job_fingerprint(job);
            if (line != want)
                throw std::invalid_argument("ledger " + path + " belongs to a different job");
            have_header = true;
            continue;
        }
        if (!have_header)
            throw std::invalid_argument("ledger " + path + " is missing its header");
        const auto parts = io::split_csv_line(line);
        // a complete line carries the terminal sentinel; anything else is a
        // torn tail from a kill and that point is simply redone
        if (parts.size() < 4 || parts.back() != ".") continue;
        if ((parts.size() - 4) % 6 != 0) continue;
        PointRecord r;
        const int index = std::stoi(parts[0]);
        if (index < 0 || index >= job.grid.size())
            throw std::invalid_argument("ledger: point index out of range");
        r.status = status_from_string(parts[1]);
        r.value = io::parse_double(parts[2]);
        for (std::size_t k = 3; k + 6 < parts.size(); k += 6) {
            SectionPoint c;
            c.t = io::parse_double(parts[k]);
            c.phi = io::parse_double(parts[k + 1]);
            c.jz_tilde = io::parse_double(parts[k + 2]);
            c.q = io::parse_double(parts[k + 3]);
            c.p = io::parse_double(parts[k + 4]);
            c.energy = io::parse_double(parts[k + 5]);
            r.crossings.push_back(c);
        }
        out[index] = std::move(r);
    }
    return out;
}

}  // namespace detail

// ------------------------------------------------------------- map files ----

inline std::string map_csv_content(const MapField& map) {
    std::string csv = "phi,jz_tilde,value,status\n";
    for (int row = 0; row < map.grid.n_jz; ++row)
        for (int col = 0; col < map.grid.n_phi; ++col) {
            const int i = map.grid.index(row, col);
            csv += io::format_g17(map.grid.phi_at(col)) + "," +
                   io::format_g17(map.grid.jz_at(row)) + "," + io::format_g17(map.values[i]) +
                   "," + to_string(map.status[i]) + "\n";
        }
    return csv;
}

inline MapField load_map(const std::string& csv_path) {
    const auto table = io::parse_csv(io::read_text_file(csv_path));
    if (table.header != std::vector<std::string>{"phi", "jz_tilde", "value", "status"})
        throw std::invalid_argument("load_map: unexpected columns in " + csv_path);
    // recover the grid shape from the coordinate layout (row-major in jz)
    int n_phi = 0;
    for (const auto& r : table.rows) {
        if (n_phi > 0 && r[0] == table.rows[0][0] && r[1] != table.rows[0][1]) break;
        ++n_phi;
    }
    MapField map;
    map.grid.n_phi = n_phi;
    map.grid.n_jz = static_cast<int>(table.rows.size()) / std::max(1, n_phi);
    if (map.grid.size() != static_cast<int>(table.rows.size()))
        throw std::invalid_argument("load_map: ragged grid in " + csv_path);
    map.values.reserve(table.rows.size());
    map.status.reserve(table.rows.size());
    for (const auto& r : table.rows) {
        map.values.push_back(io::parse_double(r[2]));
        map.status.push_back(detail::status_from_string(r[3]));
    }
    return map;
}

// ---------------------------------------------------------------- points ----

namespace detail {

inline PointRecord scan_point(const ScanJob& job, int index) {
    const int row = index / job.grid.n_phi;
    const int col = index % job.grid.n_phi;

    PointRecord rec;
    const auto start = job.surface.point_at(job.grid.phi_at(col), job.grid.jz_at(row), job.params);
    if (!start) return rec;  // off shell: status stays missing

    try {
        switch (job.task) {
            case ScanTask::sections: {
                SectionOptions opts;
                const SectionResult sec = poincare_section(*start, job.n_crossings, job.params, opts);
                rec.status = PointStatus::ok;
                rec.value = static_cast<double>(sec.crossings.size());
                rec.crossings = sec.crossings;
                break;
            }
            case ScanTask::lyapunov: {
                BenettinOptions opts = job.benettin;
                opts.seed = derive_seed(job.global_seed, static_cast<std::uint64_t>(index));
                const LyapunovEstimate est = lyapunov_benettin(*start, job.params, opts);
                rec.status = PointStatus::ok;
                rec.value = est.lambda;
                break;
            }
            case ScanTask::pr: {
                const CoherentParams labels = phase_to_labels(*start, job.params);
                const CoherentVector cv =
                    coherent_vector(labels, job.params, job.eigen->basis);
                const Decomposition d = decompose(cv, *job.eigen, job.pr_min_capture);
                rec.status = PointStatus::ok;
                rec.value = d.participation_ratio;
                break;
            }
        }
    } catch (const std::exception&) {
        // budget exhausted or truncation too poor: record the point as failed
        rec.status = PointStatus::failed;
        rec.value = std::numeric_limits<double>::quiet_NaN();
    }
    return rec;
}

}  // namespace detail

// --------------------------------------------------------------- run_scan ----

inline ScanResult run_scan(const ScanJob& job) {
    job.params.validate();
    job.grid.validate();
    if (job.task == ScanTask::pr) {
        if (!job.eigen) throw std::invalid_argument("run_scan: pr task needs a cached eigensystem");
        if (!(job.eigen->params == job.params))
            throw std::invalid_argument("run_scan: eigensystem parameters do not match the job");
    }
    if (job.task == ScanTask::sections && job.n_crossings < 1)
        throw std::invalid_argument("run_scan: n_crossings must be positive");
    if (job.n_threads < 1) throw std::invalid_argument("run_scan: n_threads must be positive");
    if (job.name.empty() || job.output_dir.empty())
        throw std::invalid_argument("run_scan: output name and directory required");

    const auto t_begin = std::chrono::steady_clock::now();
    std::filesystem::create_directories(job.output_dir);
    ScanResult result;
    const auto out_path = [&](const std::string& suffix) {
        return (std::filesystem::path(job.output_dir) / (job.name + suffix)).string();
    };
    result.csv_path = out_path(".csv");
    result.manifest_path = out_path(".manifest.json");
    result.ledger_path = out_path(".ledger");

    // shell pre-check: every grid point is classified analytically up front,
    // so the missing mask matches the discriminant sign pointwise
    const int n_points = job.grid.size();
    std::vector<char> on_shell(n_points, 0);
    int n_on_shell = 0;
    for (int row = 0; row < job.grid.n_jz; ++row)
        for (int col = 0; col < job.grid.n_phi; ++col) {
            const bool in = job.surface
                                .point_at(job.grid.phi_at(col), job.grid.jz_at(row), job.params)
                                .has_value();
            on_shell[job.grid.index(row, col)] = in;
            n_on_shell += in;
        }
    result.shell_empty = (n_on_shell == 0);

    // resume: collect completed points, then schedule only the remainder
    auto records = detail::read_ledger(result.ledger_path, job);
    std::vector<int> todo;
    for (int i = 0; i < n_points; ++i) {
        if (records[i]) {
            ++result.n_resumed;
        } else if (on_shell[i]) {
            todo.push_back(i);
        } else {
            records[i] = detail::PointRecord{};  // missing, value NaN
        }
    }

    const bool fresh_ledger = !io::file_exists(result.ledger_path);
    std::ofstream ledger(result.ledger_path, std::ios::app);
    if (!ledger) throw std::runtime_error("cannot open ledger " + result.ledger_path);
    if (fresh_ledger) {
        ledger << "# scan-ledger " << detail::job_fingerprint(job) << "\n";
        ledger.flush();
    }
    std::mutex ledger_mutex;

    // static partition by grid row: worker w owns rows with row % n_threads == w
    const int n_threads = std::min(job.n_threads, std::max(1, static_cast<int>(todo.size())));
    const auto worker = [&](int w) {
        for (int idx : todo) {
            if ((idx / job.grid.n_phi) % n_threads != w) continue;
            detail::PointRecord rec = detail::scan_point(job, idx);
            {
                std::lock_guard<std::mutex> lock(ledger_mutex);
                ledger << detail::ledger_line(idx, rec) << "\n";
                ledger.flush();
                records[idx] = std::move(rec);
            }
        }
    };
    if (n_threads == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (int w = 0; w < n_threads; ++w) pool.emplace_back(worker, w);
        for (auto& th : pool) th.join();
    }

    // deterministic assembly in index order, independent of scheduling
    result.map.grid = job.grid;
    result.map.task = job.task;
    result.map.energy = job.surface.energy;
    result.map.values.assign(n_points, std::numeric_limits<double>::quiet_NaN());
    result.map.status.assign(n_points, PointStatus::missing);
    for (int i = 0; i < n_points; ++i) {
        if (!records[i]) continue;
        result.map.values[i] = records[i]->value;
        result.map.status[i] = records[i]->status;
    }

    const std::string csv = map_csv_content(result.map);
    io::write_text_atomic(result.csv_path, csv);
    result.content_hash = io::fnv1a64_hex(csv);

    if (job.task == ScanTask::sections) {
        result.sections_path = out_path("_crossings.csv");
        std::string sc = "orbit_index,orbit_phi,orbit_jz_tilde,t,phi,jz_tilde,q\n";
        for (int row = 0; row < job.grid.n_jz; ++row)
            for (int col = 0; col < job.grid.n_phi; ++col) {
                const int i = job.grid.index(row, col);
                if (!records[i]) continue;
                const std::string prefix = std::to_string(i) + "," +
                                           io::format_g17(job.grid.phi_at(col)) + "," +
                                           io::format_g17(job.grid.jz_at(row)) + ",";
                for (const auto& c : records[i]->crossings)
                    sc += prefix + io::format_g17(c.t) + "," + io::format_g17(c.phi) + "," +
                          io::format_g17(c.jz_tilde) + "," + io::format_g17(c.q) + "\n";
            }
        io::write_text_atomic(result.sections_path, sc);
    }

    result.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin).count();

    nlohmann::json manifest = {
        {"task", to_string(job.task)},
        {"model", io::model_json(job.params)},
        {"surface_energy", job.surface.energy},
        {"grid", {{"n_phi", job.grid.n_phi}, {"n_jz", job.grid.n_jz}}},
        {"global_seed", job.global_seed},
        {"counts",
         {{"ok", result.map.count(PointStatus::ok)},
          {"missing", result.map.count(PointStatus::missing)},
          {"failed", result.map.count(PointStatus::failed)},
          {"resumed", result.n_resumed}}},
        {"content_hash", {{"algorithm", "fnv1a64"}, {"value", result.content_hash}}},
        {"timing", {{"seconds", result.seconds}}},
    };
    if (job.task == ScanTask::sections) manifest["n_crossings"] = job.n_crossings;
    if (job.task == ScanTask::lyapunov)
        manifest["benettin"] = {{"t_total", job.benettin.t_total},
                                {"renorm_interval", job.benettin.renorm_interval},
                                {"d0", job.benettin.d0},
                                {"rtol", job.benettin.rtol},
                                {"cutoff", job.benettin.cutoff}};
    if (result.shell_empty)
        manifest["diagnostic"] =
            "energy shell is empty at E = " + io::format_g17(job.surface.energy) +
            "; every grid point is off shell";
    io::write_manifest(result.manifest_path, manifest);
    return result;
}

// ------------------------------------------------------------- correlation ----

struct MapCorrelation {
    double spearman = 0.0;
    bool degenerate = false;  // one side has no rank variation; 0 by contract
    int n_points = 0;
    int n_bins = 20;
    std::vector<int> joint_counts;  // n_bins x n_bins, row-major in map_a bins
    double a_min = 0.0, a_max = 0.0, b_min = 0.0, b_max = 0.0;
};

inline MapCorrelation correlate_maps(const MapField& a, const MapField& b) {
    if (!(a.grid == b.grid)) throw std::invalid_argument("correlate_maps: grid mismatch");
    std::vector<double> va, vb;
    for (int i = 0; i < a.grid.size(); ++i)
        if (a.status[i] == PointStatus::ok && b.status[i] == PointStatus::ok) {
            va.push_back(a.values[i]);
            vb.push_back(b.values[i]);
        }
    MapCorrelation out;
    out.n_points = static_cast<int>(va.size());
    if (out.n_points < 2) {
        out.degenerate = true;
        return out;
    }
    const Eigen::Map<Eigen::VectorXd> ea(va.data(), static_cast<Eigen::Index>(va.size()));
    const Eigen::Map<Eigen::VectorXd> eb(vb.data(), static_cast<Eigen::Index>(vb.size()));
    const double amin = ea.minCoeff(), amax = ea.maxCoeff();
    const double bmin = eb.minCoeff(), bmax = eb.maxCoeff();
    out.a_min = amin;
    out.a_max = amax;
    out.b_min = bmin;
    out.b_max = bmax;
    if (amin == amax || bmin == bmax) {
        out.degenerate = true;  // constant map: correlation undefined, report 0
        out.spearman = 0.0;
    } else {
        out.spearman = spearman(ea, eb);
    }
    out.joint_counts.assign(out.n_bins * out.n_bins, 0);
    for (int k = 0; k < out.n_points; ++k) {
        const auto bin = [&](double v, double lo, double hi) {
            if (hi == lo) return 0;
            int idx = static_cast<int>((v - lo) / (hi - lo) * out.n_bins);
            return std::min(out.n_bins - 1, std::max(0, idx));
        };
        out.joint_counts[bin(va[k], amin, amax) * out.n_bins + bin(vb[k], bmin, bmax)]++;
    }
    return out;
}

}  // namespace dicke
