#pragma once

// Persistence: the CSV trace and the typed key-value report. Both are
// written to a temporary file and renamed into place.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pklab/bounds.hpp"
#include "pklab/error.hpp"
#include "pklab/field_spec.hpp"
#include "pklab/functionals.hpp"

namespace pklab {

inline constexpr const char* csv_columns[] = {"t",        "dt",           "E",           "H",           "Psi",
                                              "F",        "Upsilon",      "R",           "norm_u_2",    "norm_grad_u_2",
                                              "norm_lap_u_2", "norm_u_px", "modular_u_p", "modular_v_m", "diss_residual"};

inline std::string csv_header() {
    std::string s;
    for (const char* c : csv_columns) {
        if (!s.empty()) s += ",";
        s += c;
    }
    return s;
}

inline std::string csv_row(const EnergySample& e) {
    auto num = [](double x) { return detail::format_double(x); };
    auto opt = [&](const std::optional<double>& x) { return x ? num(*x) : std::string(); };
    std::string s;
    for (const std::string& v : {num(e.t), num(e.dt), num(e.E), opt(e.H), opt(e.Psi), opt(e.F), opt(e.Upsilon), num(e.R),
                                 num(e.norm_u_2), num(e.norm_grad_u_2), num(e.norm_lap_u_2), num(e.norm_u_px),
                                 num(e.modular_u_p), num(e.modular_v_m), num(e.diss_residual)}) {
        if (!s.empty()) s += ",";
        s += v;
    }
    return s;
}

/// Writes `content` to path.tmp and renames it over `path`.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InvalidInput("cannot write '" + tmp.string() + "'");
        out << content;
        out.flush();
        if (!out) throw InvalidInput("write to '" + tmp.string() + "' failed");
    }
    std::filesystem::rename(tmp, path);
}

/// Streams CSV rows into a temporary file; commit() moves it into place.
class CsvTrace {
public:
    explicit CsvTrace(std::filesystem::path path) : path_(std::move(path)) {
        tmp_ = path_;
        tmp_ += ".tmp";
        out_.open(tmp_, std::ios::binary | std::ios::trunc);
        if (!out_) throw InvalidInput("cannot write '" + tmp_.string() + "'");
        out_ << csv_header() << "\n";
    }
    void add(const EnergySample& e) { out_ << csv_row(e) << "\n"; }
    void commit() {
        out_.close();
        std::filesystem::rename(tmp_, path_);
    }
    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_, tmp_;
    std::ofstream out_;
};

/// Ordered `key : type = value` lines. Absent values carry their reason.
class KeyValueReport {
public:
    void text(const std::string& key, const std::string& v) { add(key, "text", v); }
    void enumeration(const std::string& key, const std::string& v) { add(key, "enum", v); }
    void boolean(const std::string& key, bool v) { add(key, "bool", v ? "true" : "false"); }
    void integer(const std::string& key, long long v) { add(key, "int", std::to_string(v)); }
    void real(const std::string& key, double v) { add(key, "real", detail::format_double(v)); }
    void real(const std::string& key, const std::optional<double>& v, const std::string& why_absent = "not applicable") {
        if (v) real(key, *v);
        else add(key, "absent", why_absent);
    }

    const std::vector<std::pair<std::string, std::string>>& lines() const noexcept { return lines_; }

    std::optional<std::string> find(const std::string& key) const {
        for (const auto& [k, v] : lines_)
            if (k == key) return v;
        return std::nullopt;
    }

    std::string str() const {
        std::string s;
        for (const auto& [k, v] : lines_) s += k + " = " + v + "\n";
        return s;
    }

    void write(const std::filesystem::path& path) const { write_atomic(path, str()); }

private:
    void add(const std::string& key, const char* type, const std::string& v) {
        lines_.emplace_back(key + " : " + type, v);
    }
    std::vector<std::pair<std::string, std::string>> lines_;
};

inline std::string absent_reason(const BoundsReport& r, const std::string& field) {
    for (const auto& [f, why] : r.absent)
        if (f == field) return why;
    return "not applicable";
}

inline void add_bounds(KeyValueReport& kv, const BoundsReport& r, const std::string& prefix = "bounds.") {
    auto real = [&](const char* k, const std::optional<double>& v) { kv.real(prefix + k, v, absent_reason(r, k)); };
    kv.enumeration(prefix + "regime", to_string(r.regime));
    kv.real(prefix + "alpha1", r.alpha1);
    kv.real(prefix + "E1", r.E1);
    kv.real(prefix + "alpha0", r.alpha0);
    kv.real(prefix + "E0", r.E0);
    real("alpha2", r.alpha2);
    real("alpha2_tilde", r.alpha2_tilde);
    real("E2", r.E2);
    real("sigma", r.sigma);
    real("eps1", r.eps1);
    real("eps2", r.eps2);
    real("eps", r.eps);
    real("M1", r.M1);
    real("M2", r.M2);
    real("F0", r.F0);
    real("T_upper_thm31", r.T_upper_thm31);
    real("T_upper_thm31_statement", r.T_upper_thm31_statement);
    if (r.T_upper_thm31_statement)
        kv.text(prefix + "T_upper_thm31_statement_note", "uses M1/M2 as printed; the derivation gives M2/M1");
    real("C", r.C);
    real("rho", r.rho);
    real("omega", r.omega);
    real("T_upper_thm42", r.T_upper_thm42);
    real("levine_t2", r.levine_t2);
    real("R0", r.R0);
    real("K1", r.K1);
    real("K2", r.K2);
    real("T_lower", r.T_lower);
    kv.boolean(prefix + "T_lower_heuristic", r.T_lower_heuristic);
    real("E2_tilde", r.E2_tilde);
    real("delta", r.delta);
    real("eps4", r.eps4);
    real("eps5", r.eps5);
    real("K_decay", r.K_decay);
    kv.boolean(prefix + "tightened", r.tightened);
}

inline void add_constants(KeyValueReport& kv, const EmbeddingConstants& c, const std::string& prefix = "constants.") {
    kv.real(prefix + "B", c.B);
    kv.enumeration(prefix + "B_provenance", to_string(c.provenance_B));
    kv.real(prefix + "B1", c.B1);
    kv.real(prefix + "S", c.S);
    kv.enumeration(prefix + "S_provenance", to_string(c.provenance_S));
    kv.real(prefix + "S_star", c.S_star);
    kv.enumeration(prefix + "S_star_provenance", to_string(c.provenance_S_star));
    kv.real(prefix + "q_star", c.q_star);
    kv.boolean(prefix + "q_star_surrogate", c.q_star_surrogate);
    kv.real(prefix + "eps_est", c.eps_est);
    kv.real(prefix + "safety", c.safety);
}

}  // namespace pklab
