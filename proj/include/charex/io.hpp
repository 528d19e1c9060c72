#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "charex/collar.hpp"
#include "charex/radial.hpp"

namespace charex {

/// Shortest decimal that round-trips a double (17 significant digits).
inline std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, sep)) out.push_back(trim(tok));
    return out;
}

inline double to_double(const std::string& s, const std::string& where) {
    try {
        size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw IOError(where + ": cannot parse number '" + s + "'");
    }
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IOError("cannot open for writing: " + path);
    return f;
}

inline std::ifstream open_in(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IOError("cannot open for reading: " + path);
    return f;
}

/// Read a CSV with the exact expected header; returns the data rows as cells.
inline std::vector<std::vector<std::string>> read_csv(const std::string& path,
                                                      const std::string& header) {
    auto f = open_in(path);
    std::string line;
    if (!std::getline(f, line) || trim(line) != header)
        throw IOError(path + ": expected header '" + header + "'");
    std::vector<std::vector<std::string>> rows;
    const size_t ncol = split(header, ',').size();
    while (std::getline(f, line)) {
        if (trim(line).empty()) continue;
        auto cells = split(line, ',');
        if (cells.size() != ncol) throw IOError(path + ": malformed row '" + line + "'");
        rows.push_back(std::move(cells));
    }
    return rows;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Sphere metrics
// ---------------------------------------------------------------------------

inline void write_metric_csv(const std::string& path, const AxisymMetric& m) {
    auto f = detail::open_out(path);
    f << "theta,q,p\n";
    for (int i = 0; i < m.grid()->size(); ++i)
        f << fmt17(m.grid()->theta(i)) << ',' << fmt17(m.q()[i]) << ',' << fmt17(m.p()[i])
          << '\n';
}

inline AxisymMetric read_metric_csv(const std::string& path) {
    const auto rows = detail::read_csv(path, "theta,q,p");
    const int n = static_cast<int>(rows.size());
    GridPtr g = make_grid(n);
    Eigen::VectorXd q(n), p(n);
    for (int i = 0; i < n; ++i) {
        const double th = detail::to_double(rows[i][0], path);
        if (std::abs(th - g->theta(i)) > 1e-9)
            throw IOError(path + ": theta nodes do not form the expected half-offset grid");
        q[i] = detail::to_double(rows[i][1], path);
        p[i] = detail::to_double(rows[i][2], path);
    }
    return {std::move(g), std::move(q), std::move(p)};
}

inline void write_conformal_csv(const std::string& path, const ConformalData& cd) {
    auto f = detail::open_out(path);
    f << "theta,w\n";
    for (int i = 0; i < cd.grid()->size(); ++i)
        f << fmt17(cd.grid()->theta(i)) << ',' << fmt17(cd.w()[i]) << '\n';
}

/// Read a theta,w table and resample it onto the requested grid by an even
/// spline in cos(theta), then renormalize the area radius.
inline ConformalData read_conformal_csv(const std::string& path, const GridPtr& grid,
                                        double r_o) {
    const auto rows = detail::read_csv(path, "theta,w");
    const int m = static_cast<int>(rows.size());
    if (m < 4) throw IOError(path + ": need at least 4 rows");
    std::vector<double> cx(m), cy(m);
    for (int i = 0; i < m; ++i) {
        cx[m - 1 - i] = std::cos(detail::to_double(rows[i][0], path));
        cy[m - 1 - i] = detail::to_double(rows[i][1], path);
    }
    const CubicSpline w_of_x(std::move(cx), std::move(cy));
    Eigen::VectorXd w(grid->size());
    for (int i = 0; i < grid->size(); ++i) w[i] = w_of_x(std::cos(grid->theta(i)));
    return ConformalData::normalized(grid, std::move(w), r_o);
}

// ---------------------------------------------------------------------------
// Radial profiles
// ---------------------------------------------------------------------------

inline void write_profile_csv(const std::string& path, const RadialProfile& pr) {
    auto f = detail::open_out(path);
    f << "segment,s,f,fprime,fsecond,R,E2,margin,mH_CH,Qflux\n";
    const Eigen::VectorXd r = scalar_curvature(pr);
    const ElectricField e = electric_field(pr);
    const Eigen::VectorXd margin = dec_margin(pr);
    const Eigen::VectorXd mh = charged_hawking_profile(pr);
    for (Eigen::Index i = 0; i < pr.size(); ++i) {
        // flux through the slice: (1/4pi) E_normal * |S^n_f| = Q exactly
        const double flux = e.normal[i] * pr.f[i] * pr.f[i];
        f << segment_name(pr.tags[i]) << ',' << fmt17(pr.s[i]) << ',' << fmt17(pr.f[i]) << ','
          << fmt17(pr.fp[i]) << ',' << fmt17(pr.fpp[i]) << ',' << fmt17(r[i]) << ','
          << fmt17(e.norm2[i]) << ',' << fmt17(margin[i]) << ',' << fmt17(mh[i]) << ','
          << fmt17(flux) << '\n';
    }
}

inline RadialProfile read_profile_csv(const std::string& path, double q_total) {
    const auto rows =
        detail::read_csv(path, "segment,s,f,fprime,fsecond,R,E2,margin,mH_CH,Qflux");
    const Eigen::Index m = static_cast<Eigen::Index>(rows.size());
    if (m < 2) throw IOError(path + ": need at least 2 rows");
    Eigen::VectorXd s(m), f(m), fp(m), fpp(m);
    std::vector<SegmentTag> tags(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const std::string& seg = rows[i][0];
        if (seg == "COLLAR_NECK") tags[i] = SegmentTag::CollarNeck;
        else if (seg == "BRIDGE") tags[i] = SegmentTag::Bridge;
        else if (seg == "BENT_RN") tags[i] = SegmentTag::BentRN;
        else if (seg == "RN_TAIL") tags[i] = SegmentTag::RNTail;
        else throw IOError(path + ": unknown segment '" + seg + "'");
        s[i] = detail::to_double(rows[i][1], path);
        f[i] = detail::to_double(rows[i][2], path);
        fp[i] = detail::to_double(rows[i][3], path);
        fpp[i] = detail::to_double(rows[i][4], path);
    }
    return {2, q_total, std::move(s), std::move(f), std::move(fp), std::move(fpp),
            std::move(tags)};
}

// ---------------------------------------------------------------------------
// Collar dumps
// ---------------------------------------------------------------------------

inline void write_collar_csv(const std::string& path, const CollarBlock& blk,
                             const std::vector<Eigen::VectorXd>& margin) {
    auto f = detail::open_out(path);
    f << "t,theta,v,q,p,margin,H\n";
    const PolarGrid& g = *blk.path.grid;
    for (int k = 0; k < static_cast<int>(blk.path.t.size()); ++k)
        for (int i = 0; i < g.size(); ++i)
            f << fmt17(blk.path.t[k]) << ',' << fmt17(g.theta(i)) << ',' << fmt17(blk.v[k][i])
              << ',' << fmt17(blk.path.metrics[k].q()[i]) << ','
              << fmt17(blk.path.metrics[k].p()[i]) << ',' << fmt17(margin[k][i]) << ','
              << fmt17(blk.h[k][i]) << '\n';
}

inline void write_slices_csv(const std::string& path, const CollarBlock& blk) {
    auto f = detail::open_out(path);
    f << "t,area,mH_CH,flux,Hmin,Hmax\n";
    for (int k = 0; k < static_cast<int>(blk.path.t.size()); ++k)
        f << fmt17(blk.path.t[k]) << ',' << fmt17(blk.slice_area[k]) << ','
          << fmt17(blk.slice_mh[k]) << ',' << fmt17(blk.slice_flux[k]) << ','
          << fmt17(blk.h[k].minCoeff()) << ',' << fmt17(blk.h[k].maxCoeff()) << '\n';
}

/// Raw (t, theta) fields read back from a collar dump.
struct CollarDump {
    Eigen::VectorXd t;
    GridPtr grid;
    std::vector<Eigen::VectorXd> v, q, p, margin, h;
};

inline CollarDump read_collar_csv(const std::string& path) {
    const auto rows = detail::read_csv(path, "t,theta,v,q,p,margin,H");
    if (rows.empty()) throw IOError(path + ": empty collar dump");
    // count theta nodes of the first slice
    int n = 0;
    const std::string t0 = rows[0][0];
    while (n < static_cast<int>(rows.size()) && rows[n][0] == t0) ++n;
    if (n < 2 || rows.size() % n != 0)
        throw IOError(path + ": rows do not tile a (t, theta) tensor grid");
    const int n_t = static_cast<int>(rows.size()) / n;
    CollarDump d;
    d.grid = make_grid(n);
    d.t.resize(n_t);
    for (int k = 0; k < n_t; ++k) {
        Eigen::VectorXd v(n), q(n), p(n), mg(n), h(n);
        d.t[k] = detail::to_double(rows[k * n][0], path);
        for (int i = 0; i < n; ++i) {
            const auto& r = rows[k * n + i];
            if (std::abs(detail::to_double(r[1], path) - d.grid->theta(i)) > 1e-9)
                throw IOError(path + ": unexpected theta node layout");
            v[i] = detail::to_double(r[2], path);
            q[i] = detail::to_double(r[3], path);
            p[i] = detail::to_double(r[4], path);
            mg[i] = detail::to_double(r[5], path);
            h[i] = detail::to_double(r[6], path);
        }
        d.v.push_back(std::move(v));
        d.q.push_back(std::move(q));
        d.p.push_back(std::move(p));
        d.margin.push_back(std::move(mg));
        d.h.push_back(std::move(h));
    }
    return d;
}

/// Rebuild the normalized-path skeleton a collar verification needs from a
/// dump (eigenvalues and path constants are not required for re-checking).
inline MetricPath path_from_dump(const CollarDump& d, double amplitude, double r_o,
                                 double theta_cut) {
    MetricPath path;
    path.grid = d.grid;
    path.t = d.t;
    path.theta_cut = theta_cut;
    path.r_o = r_o;
    const int n_t = static_cast<int>(d.t.size());
    path.lambda = Eigen::VectorXd::Zero(n_t);
    for (int k = 0; k < n_t; ++k) {
        path.metrics.emplace_back(d.grid, d.q[k], d.p[k]);
        path.theta_maps.push_back(d.grid->nodes());
        path.u.push_back(ScalarField{d.grid, d.v[k] / amplitude});
    }
    return path;
}

// ---------------------------------------------------------------------------
// Flat JSON reports
// ---------------------------------------------------------------------------

/// Ordered key/value JSON emitter for flat reports with one nesting level.
class JsonObject {
public:
    JsonObject& put(const std::string& key, double v) { return raw(key, fmt17(v)); }
    JsonObject& put(const std::string& key, bool v) { return raw(key, v ? "true" : "false"); }
    JsonObject& put(const std::string& key, int v) { return raw(key, std::to_string(v)); }
    JsonObject& put(const std::string& key, const std::string& v) {
        return raw(key, "\"" + v + "\"");
    }
    JsonObject& put(const std::string& key, const JsonObject& nested) {
        return raw(key, nested.str());
    }
    std::string str() const { return "{" + body_ + "}"; }
    void write(const std::string& path) const {
        auto f = detail::open_out(path);
        f << str() << '\n';
    }

private:
    JsonObject& raw(const std::string& key, const std::string& v) {
        if (!body_.empty()) body_ += ",";
        body_ += "\n  \"" + key + "\": " + v;
        return *this;
    }
    std::string body_;
};

/// Extract every scalar "key": value pair of a flat JSON report (nested keys
/// must be globally unique, which our emitters guarantee).
inline std::map<std::string, std::string> read_flat_json(const std::string& path) {
    auto f = detail::open_in(path);
    std::stringstream ss;
    ss << f.rdbuf();
    const std::string text = ss.str();
    std::map<std::string, std::string> out;
    size_t pos = 0;
    while ((pos = text.find('"', pos)) != std::string::npos) {
        const size_t end = text.find('"', pos + 1);
        if (end == std::string::npos) break;
        const std::string key = text.substr(pos + 1, end - pos - 1);
        size_t colon = text.find_first_not_of(" \t\n", end + 1);
        if (colon == std::string::npos || text[colon] != ':') {
            pos = end + 1;
            continue;
        }
        size_t vstart = text.find_first_not_of(" \t\n", colon + 1);
        if (vstart == std::string::npos) break;
        if (text[vstart] == '{') {
            pos = vstart; // descend into the nested object
            continue;
        }
        size_t vend = text.find_first_of(",}\n", vstart);
        std::string val = detail::trim(text.substr(vstart, vend - vstart));
        if (!val.empty() && val.front() == '"') val = val.substr(1, val.size() - 2);
        out[key] = val;
        pos = vend;
    }
    return out;
}

inline double json_number(const std::map<std::string, std::string>& m, const std::string& key,
                          const std::string& where) {
    const auto it = m.find(key);
    if (it == m.end()) throw IOError(where + ": missing key '" + key + "'");
    return detail::to_double(it->second, where);
}

// ---------------------------------------------------------------------------
// Config files
// ---------------------------------------------------------------------------

/// Sectioned key = value text config ([section] headers, # comments).
class Config {
public:
    static Config parse_file(const std::string& path) {
        auto f = detail::open_in(path);
        std::stringstream ss;
        ss << f.rdbuf();
        return parse(ss.str(), path);
    }

    static Config parse(const std::string& text, const std::string& origin = "<config>") {
        Config cfg;
        cfg.origin_ = origin;
        std::stringstream ss(text);
        std::string line, section;
        int lineno = 0;
        while (std::getline(ss, line)) {
            ++lineno;
            const std::string s = detail::trim(line);
            if (s.empty() || s[0] == '#' || s[0] == ';') continue;
            if (s.front() == '[') {
                if (s.back() != ']')
                    throw ConfigError(origin + ":" + std::to_string(lineno) + ": bad section");
                section = detail::trim(s.substr(1, s.size() - 2));
                continue;
            }
            const auto eq = s.find('=');
            if (eq == std::string::npos)
                throw ConfigError(origin + ":" + std::to_string(lineno) +
                                  ": expected key = value");
            cfg.kv_[section + "." + detail::trim(s.substr(0, eq))] =
                detail::trim(s.substr(eq + 1));
        }
        return cfg;
    }

    bool has(const std::string& section, const std::string& key) const {
        return kv_.count(section + "." + key) > 0;
    }
    std::string get(const std::string& section, const std::string& key) const {
        const auto it = kv_.find(section + "." + key);
        if (it == kv_.end())
            throw ConfigError(origin_ + ": missing [" + section + "] " + key);
        return it->second;
    }
    std::string get(const std::string& section, const std::string& key,
                    const std::string& fallback) const {
        const auto it = kv_.find(section + "." + key);
        return it == kv_.end() ? fallback : it->second;
    }
    double number(const std::string& section, const std::string& key) const {
        return detail::to_double(get(section, key), origin_);
    }
    double number(const std::string& section, const std::string& key, double fallback) const {
        return has(section, key) ? number(section, key) : fallback;
    }
    void set(const std::string& section, const std::string& key, const std::string& v) {
        kv_[section + "." + key] = v;
    }

private:
    std::map<std::string, std::string> kv_;
    std::string origin_ = "<config>";
};

} // namespace charex
