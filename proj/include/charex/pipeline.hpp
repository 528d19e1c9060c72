#pragma once

#include <map>
#include <optional>
#include <string>

#include "charex/collar.hpp"
#include "charex/glue.hpp"
#include "charex/io.hpp"

namespace charex {

/// Discretization parameters for the end-to-end construction.
struct GridSpec {
    int n_theta = 129;
    int n_t = 65;
    double ds = 0.01;       // radial step for the exterior tail
    double theta_cut = 0.75;
};

/// Charged minimal Bartnik data in conformal form plus the target mass.
struct BartnikDataInput {
    ConformalData data;
    double q = 0.0; // total charge
    double m = 0.0; // target ADM mass of the extension
};

/// Hypothesis checks on the input data, with the normalized path kept for
/// reuse by the construction.
struct AdmissibilityReport {
    double r_o{}, kappa{}, lambda1_g0{}, mass_bound{};
    bool hyp_charge{}, hyp_kappa{}, hyp_lambda1{}, hyp_mass{};
    bool pass{};
    MetricPath path;
};

inline AdmissibilityReport check_admissibility(const BartnikDataInput& in, const GridSpec& gs) {
    AdmissibilityReport rep;
    rep.r_o = in.data.r_o();
    const RawConformalPath raw = conformal_path(in.data, gs.n_t);
    rep.path = normalize_path(raw, gs.theta_cut);
    rep.kappa = rep.path.kappa;
    rep.lambda1_g0 = rep.path.lambda[0];
    rep.mass_bound = 0.5 * rep.r_o + 0.5 * in.q * in.q / rep.r_o;
    rep.hyp_charge = in.q * in.q < rep.r_o * rep.r_o;
    rep.hyp_kappa = rep.kappa > in.q * in.q / std::pow(rep.r_o, 4);
    rep.hyp_lambda1 = rep.lambda1_g0 > 0.0;
    rep.hyp_mass = in.m > rep.mass_bound;
    rep.pass = rep.hyp_charge && rep.hyp_kappa && rep.hyp_lambda1 && rep.hyp_mass;
    return rep;
}

/// A constructed extension: the collar block (absent when the extension is an
/// exact exterior started at its horizon), the radial profile continuing it to
/// the exact tail, and the junction data of the final attachment.
struct Extension {
    std::optional<CollarBlock> collar;
    std::vector<Eigen::VectorXd> collar_margin; // pointwise collar DEC margin
    RadialProfile profile;
    JunctionReport junction;
    AmplitudeSelection amp_sel{};
    EpsilonReport eps_rep{};
    double m_e = 0.0;
    double q = 0.0;
    double sat_tol = 1e-6; // floor for DEC margins on saturating segments
};

/// Quantities recomputed from an extension, each with its acceptance flag.
struct ExtensionReport {
    double m_e{}, q{};
    double lower_bound{}, gap{};
    double boundary_area{}, boundary_mh{};
    double min_collar_margin = std::numeric_limits<double>::quiet_NaN();
    std::map<std::string, double> min_profile_margin;
    double max_flux_drift{};
    double min_h_collar = std::numeric_limits<double>::quiet_NaN();
    double min_h_profile{};
    double penrose_slack{};
    double first_integral_dev{}, tail_mass_dev{};
    double continuity_c0{}, continuity_c1{};
    double smoothness_resid{};
    bool flag_boundary_minimal{}, flag_mass_gap{}, flag_collar_dec{}, flag_profile_dec{},
        flag_flux{}, flag_mean_convex{}, flag_tail{}, flag_penrose{}, flag_continuity{},
        flag_smooth{};
    bool pass{};
};

/// Recompute every certified property of an extension from its stored state
/// alone; nothing from the construction is trusted.
inline ExtensionReport verify_extension(const Extension& ext) {
    const double pi = std::numbers::pi;
    ExtensionReport rep;
    rep.m_e = ext.m_e;
    rep.q = ext.q;
    const RadialProfile& pr = ext.profile;

    // Boundary slice: minimality, area, and charged Hawking mass.
    double f0;
    if (ext.collar) {
        const CollarBlock& blk = *ext.collar;
        const SliceDiagnostics d0 = slice_diagnostics(blk, 0);
        rep.flag_boundary_minimal = d0.h.cwiseAbs().maxCoeff() <= 1e-10;
        rep.boundary_area = d0.area;
        rep.boundary_mh = d0.mh;
        f0 = std::sqrt(d0.area / (4.0 * pi));
    } else {
        rep.flag_boundary_minimal = std::abs(pr.fp[0]) <= 1e-10;
        rep.boundary_area = 4.0 * pi * pr.f[0] * pr.f[0];
        rep.boundary_mh = charged_hawking_mass(pr.n, ext.q, pr.f[0], pr.fp[0]);
        f0 = pr.f[0];
    }
    rep.lower_bound = 0.5 * f0 + 0.5 * ext.q * ext.q / f0;
    rep.gap = rep.m_e - rep.lower_bound;
    rep.flag_mass_gap = rep.gap >= -1e-12 && std::abs(rep.boundary_mh - rep.lower_bound) <= 1e-8;

    // Collar interior: pointwise DEC margin, flux drift, mean convexity.
    rep.max_flux_drift = 0.0;
    if (ext.collar) {
        const CollarBlock& blk = *ext.collar;
        try {
            const auto margins = collar_dec_field(blk);
            rep.min_collar_margin = std::numeric_limits<double>::infinity();
            for (const auto& row : margins)
                rep.min_collar_margin = std::min(rep.min_collar_margin, row.minCoeff());
            rep.flag_collar_dec = rep.min_collar_margin > 0.0;
        } catch (const CollarDECError&) {
            rep.flag_collar_dec = false;
        }
        rep.min_h_collar = std::numeric_limits<double>::infinity();
        for (int k = 0; k < static_cast<int>(blk.path.t.size()); ++k) {
            const SliceDiagnostics d = slice_diagnostics(blk, k);
            rep.max_flux_drift = std::max(rep.max_flux_drift, std::abs(d.flux - ext.q));
            if (k > 0) rep.min_h_collar = std::min(rep.min_h_collar, d.h.minCoeff());
        }
    } else {
        rep.flag_collar_dec = true;
    }

    // Profile: region-classified DEC margins.  Rounded-off zones built from
    // exact exteriors saturate the inequality up to integration drift, so
    // their floor is -sat_tol; the constructed zones must be strictly
    // positive.
    const Eigen::VectorXd margin = dec_margin(pr);
    rep.flag_profile_dec = true;
    for (Eigen::Index i = 0; i < pr.size(); ++i) {
        const std::string seg = segment_name(pr.tags[i]);
        const auto it = rep.min_profile_margin.find(seg);
        if (it == rep.min_profile_margin.end()) rep.min_profile_margin[seg] = margin[i];
        else it->second = std::min(it->second, margin[i]);
        const bool saturating =
            pr.tags[i] == SegmentTag::BentRN || pr.tags[i] == SegmentTag::RNTail;
        if (saturating ? !(margin[i] >= -ext.sat_tol) : !(margin[i] > 0.0))
            rep.flag_profile_dec = false;
    }

    // Charge conservation along the profile (flux through every slice).
    const ElectricField e = electric_field(pr);
    for (Eigen::Index i = 0; i < pr.size(); ++i)
        rep.max_flux_drift = std::max(
            rep.max_flux_drift, std::abs(e.normal[i] * pr.f[i] * pr.f[i] - ext.q));
    rep.flag_flux = rep.max_flux_drift <= 1e-9 * std::max(1.0, std::abs(ext.q));

    // Mean convexity past the minimal boundary: H = 2 f'/f on profile slices.
    rep.min_h_profile = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 1; i < pr.size(); ++i)
        rep.min_h_profile = std::min(rep.min_h_profile, 2.0 * pr.fp[i] / pr.f[i]);
    rep.flag_mean_convex = rep.min_h_profile > 0.0 &&
                           (!ext.collar || ext.collar->eps == 0.0 ||
                            rep.min_h_collar > 0.0);

    // Exact tail: first-integral deviation and Hawking-mass constancy certify
    // that the end is the sub-extremal exterior of mass m_e and charge q.
    rep.first_integral_dev = 0.0;
    rep.tail_mass_dev = 0.0;
    int n_tail = 0;
    for (Eigen::Index i = 0; i < pr.size(); ++i) {
        if (pr.tags[i] != SegmentTag::RNTail) continue;
        ++n_tail;
        const double fi = 1.0 - 2.0 * ext.m_e / pr.f[i] +
                          ext.q * ext.q / (pr.f[i] * pr.f[i]);
        rep.first_integral_dev =
            std::max(rep.first_integral_dev, std::abs(pr.fp[i] * pr.fp[i] - fi));
        rep.tail_mass_dev = std::max(
            rep.tail_mass_dev,
            std::abs(charged_hawking_mass(pr.n, ext.q, pr.f[i], pr.fp[i]) - ext.m_e));
    }
    rep.flag_tail =
        n_tail > 0 && rep.first_integral_dev <= 1e-8 && rep.tail_mass_dev <= 1e-8;

    // Penrose-type lower bound with charge at the outermost minimal surface.
    const double penrose =
        std::sqrt(rep.boundary_area / (16.0 * pi)) +
        std::sqrt(pi / rep.boundary_area) * ext.q * ext.q;
    rep.penrose_slack = rep.m_e - penrose;
    rep.flag_penrose = rep.penrose_slack >= -1e-12;

    // Collar-to-profile matching (C^0 in the area radius, C^1 in the mean
    // curvature of the shared slice).
    if (ext.collar) {
        const CollarBlock& blk = *ext.collar;
        // The profile takes over at theta_cut, where the collar is already
        // rotationally symmetric; compare the shared slice from both sides.
        int kc = 0;
        while (kc + 1 < static_cast<int>(blk.path.t.size()) &&
               blk.path.t[kc] < blk.path.theta_cut - 1e-12)
            ++kc;
        const SliceDiagnostics dc = slice_diagnostics(blk, kc);
        try {
            const double u1 = neck_lapse_value(blk.eigen);
            const double sc = blk.amplitude * u1 * blk.path.t[kc];
            rep.continuity_c0 = std::abs(std::sqrt(dc.area / (4.0 * pi)) - pr.value(sc));
            rep.continuity_c1 =
                std::abs(dc.h.mean() - 2.0 * pr.deriv(sc) / pr.value(sc));
            rep.flag_continuity = rep.continuity_c0 <= 1e-8 && rep.continuity_c1 <= 1e-8;
        } catch (const NeckError&) {
            rep.flag_continuity = false;
        }
    } else {
        rep.flag_continuity = true;
    }

    // Internal consistency of (f, f', f''): the trapezoid defect of f' must
    // be explained by the recorded curvature change.  Catches hand-edited
    // profile data that keeps each column individually plausible.
    rep.smoothness_resid = 0.0;
    rep.flag_smooth = true;
    for (Eigen::Index i = 0; i + 1 < pr.size(); ++i) {
        const double h = pr.s[i + 1] - pr.s[i];
        const double r =
            std::abs(pr.f[i + 1] - pr.f[i] - 0.5 * h * (pr.fp[i] + pr.fp[i + 1]));
        const double allow =
            1e-8 * (1.0 + std::abs(pr.f[i])) + 0.5 * h * h * std::abs(pr.fpp[i + 1] - pr.fpp[i]);
        rep.smoothness_resid = std::max(rep.smoothness_resid, r - allow);
        if (r > allow) rep.flag_smooth = false;
    }

    rep.pass = rep.flag_boundary_minimal && rep.flag_mass_gap && rep.flag_collar_dec &&
               rep.flag_profile_dec && rep.flag_flux && rep.flag_mean_convex && rep.flag_tail &&
               rep.flag_penrose && rep.flag_continuity && rep.flag_smooth;
    return rep;
}

/// Full construction: admissibility, eigen path, lapse-amplitude and neck
/// parameter selection, collar assembly with certified interior, reduction to
/// a rotationally symmetric neck, and gluing to the exact exterior of mass m.
inline Extension build_extension(const BartnikDataInput& in, const GridSpec& gs,
                                 AdmissibilityReport* adm_out = nullptr) {
    AdmissibilityReport adm = check_admissibility(in, gs);
    if (adm_out) *adm_out = adm;
    if (!adm.pass) {
        std::string why = "build_extension: inadmissible data:";
        if (!adm.hyp_charge) why += " Q^2 < r_o^2 fails;";
        if (!adm.hyp_kappa) why += " kappa > Q^2/r_o^4 fails;";
        if (!adm.hyp_lambda1) why += " lambda_1(g_o) > 0 fails;";
        if (!adm.hyp_mass) why += " m > r_o/2 + Q^2/(2 r_o) fails;";
        throw AdmissibilityError(why);
    }

    Extension ext;
    ext.m_e = in.m;
    ext.q = in.q;

    const EigenPathData ep = eigen_path(adm.path);
    ext.amp_sel = select_amplitude(ep, adm.path.kappa, adm.r_o, in.q, adm.path.alpha);
    const double u1 = neck_lapse_value(ep);
    const double eps =
        select_epsilon(in.m, adm.r_o, in.q, ext.amp_sel.amplitude, u1, &ext.eps_rep);

    ext.collar = assemble_collar(adm.path, ext.amp_sel.amplitude, eps, in.q);
    ext.collar_margin = collar_dec_field(*ext.collar);

    const RadialProfile neck = collar_neck_profile(*ext.collar);
    ext.profile = glue_to_rn(neck, in.m, in.q, gs.ds, &ext.junction);
    return ext;
}

/// Exact sub-extremal exterior ingested as a trivial extension of its own
/// horizon data (the rigidity case: the mass gap is exactly zero).
inline Extension rn_extension(double m, double q, double s_max, double h) {
    Extension ext;
    ext.m_e = m;
    ext.q = q;
    ext.profile = rn_profile(RNParams(m, q), s_max, h);
    return ext;
}

// ---------------------------------------------------------------------------
// Report serialization
// ---------------------------------------------------------------------------

inline JsonObject junction_json(const JunctionReport& j) {
    JsonObject o;
    o.put("L", j.L)
        .put("gamma", j.gamma)
        .put("equal_slopes", j.equal_slopes)
        .put("eps_moll", j.eps_moll)
        .put("d", j.d)
        .put("d_raw", j.d_raw)
        .put("min_margin", j.min_margin)
        .put("offset", j.offset)
        .put("s_att", j.s_att)
        .put("eps_att", j.eps_att)
        .put("mu", j.mu)
        .put("delta", j.delta);
    return o;
}

/// Construction scalars a later verification run needs to rebuild the collar
/// from its dump.
inline JsonObject construction_json(const Extension& ext, const GridSpec& gs) {
    JsonObject o;
    o.put("m_e", ext.m_e).put("q", ext.q).put("sat_tol", ext.sat_tol);
    o.put("has_collar", static_cast<bool>(ext.collar));
    if (ext.collar) {
        const CollarBlock& blk = *ext.collar;
        o.put("amplitude", blk.amplitude)
            .put("eps", blk.eps)
            .put("r_o", blk.r_o)
            .put("theta_cut", blk.path.theta_cut)
            .put("kappa", blk.path.kappa)
            .put("alpha", blk.path.alpha)
            .put("inf_u2", blk.eigen.inf_u2)
            .put("sup_dt_log_u", blk.eigen.sup_dt_log_u)
            .put("amplitude_margin", ext.amp_sel.inequality_margin)
            .put("mh_boundary", ext.eps_rep.mh0)
            .put("mh_top", ext.eps_rep.mh1);
    }
    o.put("n_theta", gs.n_theta).put("n_t", gs.n_t).put("ds", gs.ds);
    return o;
}

inline JsonObject verification_json(const ExtensionReport& r) {
    JsonObject flags;
    flags.put("boundary_minimal", r.flag_boundary_minimal)
        .put("mass_gap", r.flag_mass_gap)
        .put("collar_dec", r.flag_collar_dec)
        .put("profile_dec", r.flag_profile_dec)
        .put("flux", r.flag_flux)
        .put("mean_convex", r.flag_mean_convex)
        .put("tail", r.flag_tail)
        .put("penrose", r.flag_penrose)
        .put("continuity", r.flag_continuity)
        .put("smooth", r.flag_smooth);
    JsonObject seg;
    for (const auto& [k, v] : r.min_profile_margin) seg.put(k, v);
    JsonObject o;
    o.put("m_e", r.m_e)
        .put("q", r.q)
        .put("lower_bound", r.lower_bound)
        .put("gap", r.gap)
        .put("boundary_area", r.boundary_area)
        .put("boundary_mH_CH", r.boundary_mh)
        .put("min_collar_margin", r.min_collar_margin)
        .put("min_profile_margin", seg)
        .put("max_flux_drift", r.max_flux_drift)
        .put("min_H_collar", r.min_h_collar)
        .put("min_H_profile", r.min_h_profile)
        .put("penrose_slack", r.penrose_slack)
        .put("first_integral_dev", r.first_integral_dev)
        .put("tail_mass_dev", r.tail_mass_dev)
        .put("continuity_c0", r.continuity_c0)
        .put("continuity_c1", r.continuity_c1)
        .put("smoothness_resid", r.smoothness_resid)
        .put("flags", flags)
        .put("pass", r.pass);
    return o;
}

inline void write_report_json(const std::string& path, const Extension& ext,
                              const ExtensionReport& rep, const GridSpec& gs) {
    JsonObject o;
    o.put("construction", construction_json(ext, gs));
    o.put("verification", verification_json(rep));
    o.write(path);
}

/// Write every artifact of a built extension into a directory.
inline void export_extension(const std::string& dir, const Extension& ext,
                             const ExtensionReport& rep, const GridSpec& gs) {
    write_profile_csv(dir + "/profile.csv", ext.profile);
    write_report_json(dir + "/report.json", ext, rep, gs);
    JsonObject junctions;
    junctions.put("rn_attachment", junction_json(ext.junction));
    junctions.write(dir + "/junctions.json");
    if (ext.collar) {
        write_collar_csv(dir + "/collar.csv", *ext.collar, ext.collar_margin);
        write_slices_csv(dir + "/slices.csv", *ext.collar);
    }
}

/// Rebuild an extension from exported artifacts for an independent
/// verification pass.  The collar invariants are re-enforced by
/// assemble_collar; nothing from the original run's verification is reused.
inline Extension load_extension(const std::string& dir) {
    const auto js = read_flat_json(dir + "/report.json");
    Extension ext;
    ext.m_e = json_number(js, "m_e", dir);
    ext.q = json_number(js, "q", dir);
    ext.sat_tol = json_number(js, "sat_tol", dir);
    ext.profile = read_profile_csv(dir + "/profile.csv", ext.q);
    const auto it = js.find("has_collar");
    if (it != js.end() && it->second == "true") {
        const double amp = json_number(js, "amplitude", dir);
        const double eps = json_number(js, "eps", dir);
        const double r_o = json_number(js, "r_o", dir);
        const double theta_cut = json_number(js, "theta_cut", dir);
        const CollarDump dump = read_collar_csv(dir + "/collar.csv");
        MetricPath path = path_from_dump(dump, amp, r_o, theta_cut);
        ext.collar = assemble_collar(path, amp, eps, ext.q);
        ext.collar_margin = dump.margin;
    }
    return ext;
}

} // namespace charex
