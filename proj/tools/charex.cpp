// charex: construct and verify charged asymptotically flat extensions of
// minimal Bartnik data.
//
// Subcommands:
//   eigen  --metric FILE                 first eigenpair of -Delta + K
//   path   --config FILE                 normalized metric path constants
//   rn     --m M --q Q [--smax S] [--ds H] [--out FILE]
//   collar --config FILE --out-dir DIR   collar assembly + dumps
//   glue   --left FILE --right FILE --q Q --out FILE
//   build  --config FILE --out-dir DIR   full pipeline + report
//   verify --out-dir DIR                 re-check exported artifacts
//
// Common flags: --ntheta N --nt N --ds H --json
// Exit codes: 0 pass, 1 usage/IO, 2 admissibility, 3 construction,
//             4 verification.

#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "charex/pipeline.hpp"

namespace fs = std::filesystem;
using namespace charex;

namespace {

struct Args {
    std::string subcommand;
    std::map<std::string, std::string> flags;
    bool json = false;

    bool has(const std::string& k) const { return flags.count(k) > 0; }
    std::string get(const std::string& k) const {
        const auto it = flags.find(k);
        if (it == flags.end()) throw ConfigError("missing required flag --" + k);
        return it->second;
    }
    std::string get(const std::string& k, const std::string& fb) const {
        const auto it = flags.find(k);
        return it == flags.end() ? fb : it->second;
    }
    double number(const std::string& k) const {
        try {
            return std::stod(get(k));
        } catch (const std::invalid_argument&) {
            throw ConfigError("flag --" + k + " is not a number");
        }
    }
    double number(const std::string& k, double fb) const {
        return has(k) ? number(k) : fb;
    }
};

Args parse_args(int argc, char** argv) {
    if (argc < 2) throw ConfigError("no subcommand given");
    Args a;
    a.subcommand = argv[1];
    for (int i = 2; i < argc; ++i) {
        std::string s = argv[i];
        if (s.rfind("--", 0) != 0) throw ConfigError("unexpected argument '" + s + "'");
        s = s.substr(2);
        if (s == "json") {
            a.json = true;
        } else {
            if (i + 1 >= argc) throw ConfigError("flag --" + s + " needs a value");
            a.flags[s] = argv[++i];
        }
    }
    return a;
}

void usage(std::ostream& os) {
    os << "usage: charex <eigen|path|rn|collar|glue|build|verify> [flags]\n"
          "  eigen  --metric FILE [--json]\n"
          "  path   --config FILE [--ntheta N] [--nt N]\n"
          "  rn     --m M --q Q [--smax S] [--ds H] [--out FILE]\n"
          "  collar --config FILE --out-dir DIR\n"
          "  glue   --left FILE --right FILE --q Q --out FILE\n"
          "  build  --config FILE --out-dir DIR [--ntheta N] [--nt N] [--ds H]\n"
          "  verify --out-dir DIR\n";
}

GridSpec grid_spec(const Config& cfg, const Args& a) {
    GridSpec gs;
    gs.n_theta = static_cast<int>(a.number("ntheta", cfg.number("grid", "ntheta", 129)));
    gs.n_t = static_cast<int>(a.number("nt", cfg.number("grid", "nt", 65)));
    gs.ds = a.number("ds", cfg.number("grid", "ds", 0.01));
    gs.theta_cut = cfg.number("grid", "theta_cut", 0.75);
    return gs;
}

BartnikDataInput bartnik_input(const Config& cfg, const GridSpec& gs,
                               const std::string& cfg_dir) {
    const std::string kind = cfg.get("bartnik", "metric");
    std::string file = cfg.get("bartnik", "file");
    if (!fs::path(file).is_absolute()) file = (fs::path(cfg_dir) / file).string();
    BartnikDataInput in{ConformalData::normalized(
                            make_grid(gs.n_theta),
                            Eigen::VectorXd::Zero(gs.n_theta), 1.0),
                        cfg.number("bartnik", "q"), cfg.number("target", "mass")};
    if (kind == "conformal") {
        in.data = read_conformal_csv(file, make_grid(gs.n_theta),
                                     cfg.number("bartnik", "r_o"));
    } else if (kind == "axisym") {
        in.data = conformal_representation(read_metric_csv(file));
    } else {
        throw ConfigError("[bartnik] metric must be 'conformal' or 'axisym'");
    }
    return in;
}

int run_eigen(const Args& a) {
    const AxisymMetric m = read_metric_csv(a.get("metric"));
    const auto pair = first_eigenpair(m);
    JsonObject o;
    o.put("lambda", pair.lambda)
        .put("u_min", pair.u.values.minCoeff())
        .put("u_max", pair.u.values.maxCoeff())
        .put("area", area(m));
    if (a.json) std::cout << o.str() << "\n";
    else
        std::cout << "lambda_1 = " << fmt17(pair.lambda)
                  << "\nu range  = [" << fmt17(pair.u.values.minCoeff()) << ", "
                  << fmt17(pair.u.values.maxCoeff()) << "]\narea     = " << fmt17(area(m))
                  << "\n";
    return 0;
}

int run_path(const Args& a) {
    const std::string cfg_path = a.get("config");
    const Config cfg = Config::parse_file(cfg_path);
    const GridSpec gs = grid_spec(cfg, a);
    const BartnikDataInput in =
        bartnik_input(cfg, gs, fs::path(cfg_path).parent_path().string());
    const AdmissibilityReport adm = check_admissibility(in, gs);
    JsonObject o;
    o.put("r_o", adm.r_o)
        .put("kappa", adm.kappa)
        .put("alpha", adm.path.alpha)
        .put("beta", adm.path.beta)
        .put("lambda1_g0", adm.lambda1_g0)
        .put("mass_bound", adm.mass_bound)
        .put("hyp_charge", adm.hyp_charge)
        .put("hyp_kappa", adm.hyp_kappa)
        .put("hyp_lambda1", adm.hyp_lambda1)
        .put("hyp_mass", adm.hyp_mass)
        .put("pass", adm.pass);
    std::cout << o.str() << "\n";
    return adm.pass ? 0 : 2;
}

int run_rn(const Args& a) {
    const double m = a.number("m"), q = a.number("q");
    const double smax = a.number("smax", 10.0), ds = a.number("ds", 0.01);
    const RadialProfile pr = rn_profile(RNParams(m, q), smax, ds);
    const std::string out = a.get("out", "rn_profile.csv");
    write_profile_csv(out, pr);
    std::cout << "wrote " << out << " (" << pr.size() << " nodes, r_+ = "
              << fmt17(pr.f[0]) << ")\n";
    return 0;
}

int run_collar(const Args& a) {
    const std::string cfg_path = a.get("config");
    const Config cfg = Config::parse_file(cfg_path);
    const GridSpec gs = grid_spec(cfg, a);
    const BartnikDataInput in =
        bartnik_input(cfg, gs, fs::path(cfg_path).parent_path().string());
    const std::string dir = a.get("out-dir");
    fs::create_directories(dir);

    const AdmissibilityReport adm = check_admissibility(in, gs);
    if (!adm.pass) {
        std::cerr << "admissibility failed\n";
        return 2;
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
    write_collar_csv(dir + "/collar.csv", *ext.collar, ext.collar_margin);
    write_slices_csv(dir + "/slices.csv", *ext.collar);
    construction_json(ext, gs).write(dir + "/selection.json");
    std::cout << "collar assembled: A = " << fmt17(ext.collar->amplitude)
              << ", eps = " << fmt17(ext.collar->eps) << "\n";
    return 0;
}

int run_glue(const Args& a) {
    const double q = a.number("q");
    const RadialProfile f1 = read_profile_csv(a.get("left"), q);
    const RadialProfile f2 = read_profile_csv(a.get("right"), q);
    JunctionReport rep;
    const RadialProfile glued = glue_profiles(f1, f2, q, &rep);
    write_profile_csv(a.get("out"), glued);
    std::cout << junction_json(rep).str() << "\n";
    return 0;
}

int run_build(const Args& a) {
    const std::string cfg_path = a.get("config");
    const Config cfg = Config::parse_file(cfg_path);
    const GridSpec gs = grid_spec(cfg, a);
    BartnikDataInput in =
        bartnik_input(cfg, gs, fs::path(cfg_path).parent_path().string());
    const std::string dir = a.get("out-dir");
    fs::create_directories(dir);

    AdmissibilityReport adm;
    Extension ext;
    try {
        ext = build_extension(in, gs, &adm);
        ext.sat_tol = cfg.number("tolerances", "sat_tol", ext.sat_tol);
    } catch (const Error& e) {
        const bool admissibility = dynamic_cast<const AdmissibilityError*>(&e) != nullptr;
        JsonObject o;
        o.put("pass", false)
            .put("stage", admissibility ? std::string("admissibility")
                                        : std::string("construction"))
            .put("error", std::string(e.what()));
        o.write(dir + "/report.json");
        std::cerr << e.what() << "\n";
        return admissibility ? 2 : 3;
    }

    ExtensionReport rep;
    try {
        rep = verify_extension(ext);
        export_extension(dir, ext, rep, gs);
    } catch (const std::exception& e) {
        std::cerr << "verification error: " << e.what() << "\n";
        return 4;
    }
    std::cout << verification_json(rep).str() << "\n";
    return rep.pass ? 0 : 4;
}

int run_verify(const Args& a) {
    const std::string dir = a.get("out-dir");
    Extension ext;
    ExtensionReport rep;
    try {
        ext = load_extension(dir);
        rep = verify_extension(ext);
    } catch (const IOError&) {
        throw; // missing or malformed artifacts are usage errors
    } catch (const Error& e) {
        // a dump whose invariants no longer hold fails verification
        std::cerr << "verification error: " << e.what() << "\n";
        return 4;
    }
    std::cout << verification_json(rep).str() << "\n";
    return rep.pass ? 0 : 4;
}

} // namespace

int main(int argc, char** argv) {
    try {
        const Args a = parse_args(argc, argv);
        if (a.subcommand == "eigen") return run_eigen(a);
        if (a.subcommand == "path") return run_path(a);
        if (a.subcommand == "rn") return run_rn(a);
        if (a.subcommand == "collar") return run_collar(a);
        if (a.subcommand == "glue") return run_glue(a);
        if (a.subcommand == "build") return run_build(a);
        if (a.subcommand == "verify") return run_verify(a);
        usage(std::cerr);
        return 1;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        usage(std::cerr);
        return 1;
    } catch (const IOError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const AdmissibilityError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
