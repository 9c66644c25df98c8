#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "dicke/model.hpp"
#include "dicke/numerics.hpp"
#include "dicke/spectrum.hpp"

// File plumbing: doubles are printed with %.17g so that parsing our own
// output reproduces the in-memory bits exactly, artifacts are written
// atomically (tmp + rename), and eigen systems are cached in a checksummed
// binary format keyed on the model parameters.

namespace dicke::io {

// ------------------------------------------------------------- numbers ----

inline std::string format_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline double parse_double(std::string_view s) {
    std::string tmp(s);
    char* end = nullptr;
    const double v = std::strtod(tmp.c_str(), &end);
    if (end == tmp.c_str() || *end != '\0')
        throw std::invalid_argument("parse_double: not a number: '" + tmp + "'");
    return v;
}

// ---------------------------------------------------------------- text ----

inline bool file_exists(const std::string& path) { return std::filesystem::exists(path); }

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text_atomic(const std::string& path, const std::string& content) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp);
        out << content;
        if (!out.flush()) throw std::runtime_error("flush failed for " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

inline CsvTable parse_csv(const std::string& text) {
    CsvTable t;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (first) {
            t.header = split_csv_line(line);
            first = false;
        } else {
            t.rows.push_back(split_csv_line(line));
        }
    }
    return t;
}

inline std::string fnv1a64_hex(std::string_view data) {
    const std::uint64_t h = fnv1a64(data.data(), data.size());
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// ------------------------------------------------------------ manifest ----

inline void write_manifest(const std::string& path, const nlohmann::json& j) {
    write_text_atomic(path, j.dump(2) + "\n");
}

inline nlohmann::json model_json(const ModelParams& p) {
    return {{"omega", p.omega}, {"omega0", p.omega0}, {"gamma", p.gamma}, {"j", p.j}};
}

// ------------------------------------------------------ eigen cache ----

// cache key folds every input that determines the eigensystem
inline std::string cache_key(const ModelParams& p, int n_max, int parity) {
    std::string s = format_g17(p.omega) + "|" + format_g17(p.omega0) + "|" +
                    format_g17(p.gamma) + "|" + format_g17(p.j) + "|" +
                    std::to_string(n_max) + "|" + std::to_string(parity);
    return "eigs_" + fnv1a64_hex(s) + ".bin";
}

namespace detail {

constexpr std::uint64_t kEigMagic = 0x44434b4547563031ull;  // "DCKEGV01"

inline void put_u64(std::ofstream& out, std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
inline void put_f64(std::ofstream& out, double v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
inline std::uint64_t get_u64(std::ifstream& in) {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}
inline double get_f64(std::ifstream& in) {
    double v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}

inline std::uint64_t hash_doubles(std::uint64_t h, const double* p, std::size_t n) {
    return fnv1a64(reinterpret_cast<const char*>(p), n * sizeof(double), h);
}

}  // namespace detail

inline std::string save_eigensystem(const std::string& cache_dir, const EigenSystem& es) {
    std::filesystem::create_directories(cache_dir);
    const std::string name = cache_key(es.params, es.basis.n_max, es.basis.parity);
    const std::string path = (std::filesystem::path(cache_dir) / name).string();
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp);
        detail::put_u64(out, detail::kEigMagic);
        detail::put_f64(out, es.params.omega);
        detail::put_f64(out, es.params.omega0);
        detail::put_f64(out, es.params.gamma);
        detail::put_f64(out, es.params.j);
        detail::put_u64(out, static_cast<std::uint64_t>(es.basis.n_max));
        detail::put_u64(out, static_cast<std::uint64_t>(es.basis.two_j));
        detail::put_u64(out, static_cast<std::uint64_t>(es.basis.parity + 2));
        const std::uint64_t dim = es.energies.size();
        detail::put_u64(out, dim);
        out.write(reinterpret_cast<const char*>(es.energies.data()),
                  static_cast<std::streamsize>(dim * sizeof(double)));
        out.write(reinterpret_cast<const char*>(es.vectors.data()),
                  static_cast<std::streamsize>(dim * dim * sizeof(double)));
        std::uint64_t h = detail::hash_doubles(14695981039346656037ull, es.energies.data(), dim);
        h = detail::hash_doubles(h, es.vectors.data(), dim * dim);
        detail::put_u64(out, h);
        if (!out.flush()) throw std::runtime_error("flush failed for " + tmp);
    }
    std::filesystem::rename(tmp, path);
    return path;
}

// returns nothing if the cache entry is absent; throws on a corrupt entry
inline std::optional<EigenSystem> load_eigensystem(const std::string& cache_dir,
                                                   const ModelParams& params, int n_max,
                                                   int parity = +1) {
    const std::string path =
        (std::filesystem::path(cache_dir) / cache_key(params, n_max, parity)).string();
    if (!std::filesystem::exists(path)) return std::nullopt;
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    if (detail::get_u64(in) != detail::kEigMagic)
        throw std::runtime_error("eigen cache corrupt (bad magic): " + path);
    EigenSystem es;
    es.params.omega = detail::get_f64(in);
    es.params.omega0 = detail::get_f64(in);
    es.params.gamma = detail::get_f64(in);
    es.params.j = detail::get_f64(in);
    const int file_n_max = static_cast<int>(detail::get_u64(in));
    const int file_two_j = static_cast<int>(detail::get_u64(in));
    const int file_parity = static_cast<int>(detail::get_u64(in)) - 2;
    const std::uint64_t dim = detail::get_u64(in);
    if (!(es.params == params) || file_n_max != n_max || file_parity != parity)
        throw std::runtime_error("eigen cache key collision: " + path);
    es.basis = build_basis(params, n_max, parity);
    if (file_two_j != es.basis.two_j || dim != static_cast<std::uint64_t>(es.basis.dim()))
        throw std::runtime_error("eigen cache corrupt (dimension mismatch): " + path);
    es.energies.resize(static_cast<Eigen::Index>(dim));
    es.vectors.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    in.read(reinterpret_cast<char*>(es.energies.data()),
            static_cast<std::streamsize>(dim * sizeof(double)));
    in.read(reinterpret_cast<char*>(es.vectors.data()),
            static_cast<std::streamsize>(dim * dim * sizeof(double)));
    const std::uint64_t stored = detail::get_u64(in);
    if (!in) throw std::runtime_error("eigen cache corrupt (truncated): " + path);
    std::uint64_t h = detail::hash_doubles(14695981039346656037ull, es.energies.data(),
                                           static_cast<std::size_t>(dim));
    h = detail::hash_doubles(h, es.vectors.data(), static_cast<std::size_t>(dim * dim));
    if (h != stored) throw std::runtime_error("eigen cache corrupt (checksum): " + path);
    // degeneracy flags are not persisted; recompute them
    es.degenerate_pairs.clear();
    for (Eigen::Index k = 0; k + 1 < es.energies.size(); ++k)
        if (es.energies[k + 1] - es.energies[k] < es.degeneracy_tol * es.spectral_scale())
            es.degenerate_pairs.push_back(static_cast<int>(k));
    return es;
}

}  // namespace dicke::io
