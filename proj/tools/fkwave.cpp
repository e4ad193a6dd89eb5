// fkwave: travelling heteroclinic waves of the Frenkel-Kontorova advance-delay equation.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "fkwave/verify.hpp"

using namespace fkwave;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json default_config() {
    return json{
        {"c", 1.0},
        {"epsilon", 1e-3},
        {"gain", 1.0},
        {"B", 0.05},
        {"nu", -0.5},
        {"grid", {{"x_max", 60.0}, {"inv_h", 16}}},
        {"wavetrain", {{"N", 24}, {"a1", 0.1}, {"a2", 0.9}, {"a_step", 0.05}, {"nodes", 33}}},
        {"corrector",
         {{"mode", "picard"}, {"tol", 1e-8}, {"max_iter", 200}, {"damping", 0.7}, {"rho_guard", 0.2}}},
        {"evolve", {{"T", 40.0}, {"dt", 0.005}, {"J", 200}}},
        {"output_dir", "fkwave_out"},
        {"cache_dir", ".fkwave_cache"},
    };
}

void merge(json& base, const json& patch, const std::string& prefix) {
    if (!patch.is_object()) throw Error(ErrorKind::config, "config must be a JSON object");
    for (auto it = patch.begin(); it != patch.end(); ++it) {
        std::string key = prefix + it.key();
        if (!base.contains(it.key())) throw Error(ErrorKind::config, "unknown config key: " + key);
        json& slot = base[it.key()];
        if (slot.is_object()) {
            merge(slot, it.value(), key + ".");
        } else if (slot.is_number() != it.value().is_number() || slot.is_string() != it.value().is_string()) {
            throw Error(ErrorKind::config, "wrong type for config key: " + key);
        } else {
            slot = it.value();
        }
    }
}

void apply_set(json& cfg, const std::string& kv) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::config, "--set expects key=value, got: " + kv);
    std::string key = kv.substr(0, eq), raw = kv.substr(eq + 1);
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded() || value.is_object() || value.is_array()) value = raw;
    json patch = value;
    std::string rest = key;
    std::vector<std::string> parts;
    for (size_t pos; (pos = rest.find('.')) != std::string::npos; rest = rest.substr(pos + 1))
        parts.push_back(rest.substr(0, pos));
    parts.push_back(rest);
    for (auto it = parts.rbegin(); it != parts.rend(); ++it) patch = json{{*it, patch}};
    merge(cfg, patch, "");
}

struct RunConfig {
    ModelParams p;
    double gain = 1.0;
    double x_max = 60.0;
    int inv_h = 16;
    FamilyConfig family;
    double a_step = 0.05;
    CorrectorConfig corrector;
    EvolveOptions evolve;
    fs::path output_dir;
    fs::path cache_dir;
};

RunConfig load(const json& j) {
    RunConfig r;
    r.p = make_params(j["c"].get<double>(), j["epsilon"].get<double>(), j["B"].get<double>(), j["nu"].get<double>());
    if (!(std::abs(r.p.nu) < spectral_gap_p0(r.p)))
        throw Error(ErrorKind::config, "nu must satisfy |nu| < p0 (the kernel's decay rate)");
    r.gain = j["gain"].get<double>();
    if (!(r.gain >= 0.0)) throw Error(ErrorKind::config, "gain must be non-negative");
    r.x_max = j["grid"]["x_max"].get<double>();
    r.inv_h = j["grid"]["inv_h"].get<int>();
    if (r.x_max < 30.0 || r.inv_h < 4) throw Error(ErrorKind::config, "grid too small (x_max >= 30, inv_h >= 4)");
    r.family.B = r.p.B;
    r.family.N = j["wavetrain"]["N"].get<int>();
    r.family.a1 = j["wavetrain"]["a1"].get<double>();
    r.family.a2 = j["wavetrain"]["a2"].get<double>();
    r.family.cache_nodes = j["wavetrain"]["nodes"].get<int>();
    r.a_step = j["wavetrain"]["a_step"].get<double>();
    if (!(r.family.a1 > 0.0 && r.family.a1 < r.family.a2 && r.family.a2 < 1.0))
        throw Error(ErrorKind::config, "wavetrain window must satisfy 0 < a1 < a2 < 1");
    if (r.family.N < 8) throw Error(ErrorKind::config, "wavetrain.N must be at least 8");
    if (r.family.cache_nodes < 5) throw Error(ErrorKind::config, "wavetrain.nodes must be at least 5");
    std::string mode = j["corrector"]["mode"].get<std::string>();
    if (mode == "picard")
        r.corrector.mode = CorrectorMode::picard;
    else if (mode == "semi_implicit")
        r.corrector.mode = CorrectorMode::semi_implicit;
    else
        throw Error(ErrorKind::config, "corrector.mode must be picard or semi_implicit");
    r.corrector.tol = j["corrector"]["tol"].get<double>();
    r.corrector.max_iter = j["corrector"]["max_iter"].get<int>();
    r.corrector.damping = j["corrector"]["damping"].get<double>();
    r.corrector.rho_guard = j["corrector"]["rho_guard"].get<double>();
    if (!(r.corrector.tol > 0.0)) throw Error(ErrorKind::config, "corrector.tol must be positive");
    if (!(r.corrector.damping > 0.0 && r.corrector.damping <= 1.0))
        throw Error(ErrorKind::config, "damping must lie in (0, 1]");
    r.evolve.T = j["evolve"]["T"].get<double>();
    r.evolve.dt = j["evolve"]["dt"].get<double>();
    r.evolve.J = j["evolve"]["J"].get<int>();
    if (!(r.evolve.dt > 0.0 && r.evolve.dt <= 0.01)) throw Error(ErrorKind::config, "evolve.dt must lie in (0, 0.01]");
    if (r.evolve.J < 1) throw Error(ErrorKind::config, "evolve.J must be positive");
    r.output_dir = j["output_dir"].get<std::string>();
    r.cache_dir = j["cache_dir"].get<std::string>();
    if (const char* env = std::getenv("FKWAVE_CACHE_DIR")) r.cache_dir = env;
    return r;
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json num(double v) { return json::parse(fmt17(v)); }

void write_file(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error(ErrorKind::config, "cannot write " + path.string());
    os << text;
}

std::optional<std::string> read_file(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) return std::nullopt;
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

// FNV-1a over the printed parameters; stable across runs and platforms.
std::string key_of(const std::vector<double>& vals) {
    std::string s;
    for (double v : vals) s += fmt17(v) + ";";
    unsigned long long h = 1469598103934665603ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", h);
    return buf;
}

GreenKernel cached_kernel(const RunConfig& rc) {
    const double k_max = 40.0;
    const int n_k = 1 << 14;
    fs::path f = rc.cache_dir / ("kernel_" + key_of({rc.p.c, k_max, double(n_k)}) + ".csv");
    if (auto text = read_file(f)) {
        std::istringstream is(*text);
        std::string line;
        std::getline(is, line);
        std::vector<double> H;
        while (std::getline(is, line)) {
            auto comma = line.find(',');
            if (comma == std::string::npos) continue;
            H.push_back(std::stod(line.substr(comma + 1)));
        }
        if (static_cast<int>(H.size()) == n_k) return kernel_from_samples(rc.p, k_max, n_k, H);
    }
    GreenKernel K = build_kernel(rc.p, k_max, n_k);
    std::string out = "k,H_hat\n";
    for (size_t i = 0; i < K.k.size(); ++i) out += fmt17(K.k[i]) + "," + fmt17(K.H_hat[i]) + "\n";
    write_file(f, out);
    return K;
}

PotentialSpec make_spec(const RunConfig& rc) {
    return add_anharmonic_tail(make_mollified_sign(rc.p.epsilon), rc.gain);
}

TrainCache cached_trains(const RunConfig& rc, const PotentialSpec& spec) {
    fs::path f = rc.cache_dir / ("trains_" +
                                 key_of({rc.p.c, rc.p.epsilon, rc.gain, rc.family.a1, rc.family.a2,
                                         double(rc.family.N), double(rc.family.cache_nodes)}) +
                                 ".csv");
    if (auto text = read_file(f)) return TrainCache::from_csv(*text, rc.p, rc.family.a1, rc.family.a2);
    TrainCache c(spec, rc.p, rc.family.a1, rc.family.a2, rc.family.N, rc.family.cache_nodes);
    write_file(f, c.to_csv());
    return c;
}

std::string profile_csv(const std::vector<std::string>& names, const std::vector<const GridProfile*>& cols) {
    std::string out = "x";
    for (const auto& n : names) out += "," + n;
    out += "\n";
    const GridProfile& g = *cols.front();
    for (int i = 0; i < g.n(); ++i) {
        out += fmt17(g.x(i));
        for (const auto* c : cols) out += "," + fmt17(c->values[i]);
        out += "\n";
    }
    return out;
}

json invariant_json(const InvariantReport& rep) {
    json rows = json::array();
    for (const auto& r : rep.rows)
        rows.push_back({{"name", r.name}, {"pass", r.pass}, {"value", num(r.value)}, {"bound", num(r.bound)}});
    return json{{"pass", rep.pass}, {"rows", rows}};
}

struct Solved {
    GreenKernel kernel;
    FamilyContext ctx;
    SolveState st;
    InvariantReport inv;
};

Solved run_solve(const RunConfig& rc) {
    PotentialSpec spec = make_spec(rc);
    Solved s{cached_kernel(rc), {}, {}, {}};
    s.ctx = make_family_context(rc.p, spec, rc.family, s.kernel, cached_trains(rc, spec), rc.x_max, rc.inv_h);
    s.st = solve_corrector(s.ctx, s.kernel, rc.corrector);
    s.inv = invariant_suite(s.st, s.ctx, rc.corrector.tol);
    return s;
}

json solve_report(const RunConfig& rc, const Solved& s) {
    return json{{"c", num(rc.p.c)},
                {"epsilon", num(rc.p.epsilon)},
                {"beta", num(s.st.beta)},
                {"iterations", s.st.iter},
                {"residual_final", num(s.st.residual_history.back())},
                {"K0", num(s.st.K0)},
                {"r_norm", num(sup_norm(s.st.r))},
                {"lambda_star", num(lambda_star(rc.p))},
                {"flagged", s.st.flagged},
                {"invariants", invariant_json(s.inv)}};
}

int cmd_dispersion(const RunConfig& rc) {
    std::vector<double> roots = real_roots(rc.p, 40.0);
    std::string out = "root\n";
    for (double r : roots) out += fmt17(r) + "\n";
    write_file(rc.output_dir / "roots.csv", out);
    std::string curve = "k,D\n";
    for (int i = 0; i <= 800; ++i) {
        double k = -4.0 + 0.01 * i;
        curve += fmt17(k) + "," + fmt17(dispersion_D(k, rc.p)) + "\n";
    }
    write_file(rc.output_dir / "dispersion.csv", curve);
    std::printf("dispersion: c=%.6g alpha=%.10g real roots=%zu p0=%.10g\n", rc.p.c, rc.p.alpha, roots.size(),
                spectral_gap_p0(rc.p));
    return 0;
}

int cmd_certify(const RunConfig& rc) {
    PotentialSpec spec = make_spec(rc);
    CertifyReport rep = certify_bounds(spec, 1000.0);
    std::string out = "u,dpsi,d2psi\n";
    for (int i = 0; i <= 2000; ++i) {
        double u = -2.0 + 0.002 * i;
        out += fmt17(u) + "," + fmt17(spec.dpsi(u, 0)) + "," + fmt17(spec.dpsi(u, 1)) + "\n";
    }
    write_file(rc.output_dir / "potential.csv", out);
    json j{{"epsilon", num(rc.p.epsilon)}, {"C", num(rep.C)}, {"smallest_C", num(rep.smallest_C)},
           {"pass", rep.pass}};
    write_file(rc.output_dir / "certify.json", j.dump(2) + "\n");
    std::printf("potential-certify: epsilon=%.3g smallest C=%.6g pass=%d\n", rc.p.epsilon, rep.smallest_C, rep.pass);
    return rep.pass ? 0 : 4;
}

int cmd_exact(const RunConfig& rc) {
    GreenKernel K = cached_kernel(rc);
    HeteroclinicProfile up = compute_up(rc.p, K, rc.x_max, rc.inv_h);
    write_file(rc.output_dir / "up.csv", profile_csv({"u"}, {&up.profile}));
    json j{{"c", num(rc.p.c)},
           {"lambda_star", num(up.lambda_star)},
           {"tail_amplitude", num(up.profile.right->cos_amp[0])},
           {"slope0", num(up.slope0)},
           {"residual_sup", num(up.residual_sup)},
           {"mu", num(up.mu)}};
    write_file(rc.output_dir / "exact.json", j.dump(2) + "\n");
    std::printf("exact: lambda*=%.10g slope0=%.6g residual=%.3e\n", up.lambda_star, up.slope0, up.residual_sup);
    return 0;
}

int cmd_wavetrain(const RunConfig& rc) {
    PotentialSpec spec = make_spec(rc);
    TrainCache cache = cached_trains(rc, spec);
    write_file(rc.output_dir / "trains.csv", cache.to_csv());
    std::vector<double> grid;
    for (double a = rc.family.a1; a <= rc.family.a2 + 1e-12; a += rc.a_step) grid.push_back(a);
    std::vector<PeriodRow> rows = period_map(grid, spec, rc.p, rc.family.N);
    std::string out = "a,P,dP_da\n";
    double worst = 0.0;
    for (const auto& r : rows) {
        out += fmt17(r.a) + "," + fmt17(r.P) + "," + fmt17(r.dP_da) + "\n";
        worst = std::max(worst, std::abs(r.P - 4.0));
    }
    write_file(rc.output_dir / "period.csv", out);
    std::printf("wavetrain: epsilon=%.3g nodes=%zu max|P-4|=%.3e\n", rc.p.epsilon, cache.nodes().size(), worst);
    return 0;
}

int cmd_family(const RunConfig& rc) {
    PotentialSpec spec = make_spec(rc);
    GreenKernel K = cached_kernel(rc);
    FamilyContext ctx = make_family_context(rc.p, spec, rc.family, K, cached_trains(rc, spec), rc.x_max, rc.inv_h);
    std::vector<GridProfile> ws;
    std::vector<std::string> names;
    for (double b : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
        ws.push_back(w_beta(b, ctx));
        names.push_back("beta=" + fmt17(b));
    }
    std::vector<const GridProfile*> cols;
    for (const auto& w : ws) cols.push_back(&w);
    write_file(rc.output_dir / "family.csv", profile_csv(names, cols));
    K0Report kr = K0_estimate(ctx);
    json j{{"K0", num(kr.K0)}, {"orthogonality", num(orthogonality_constant(ctx.uo, rc.p))}};
    write_file(rc.output_dir / "family.json", j.dump(2) + "\n");
    std::printf("family: K0=%.6g\n", kr.K0);
    return 0;
}

int cmd_solve(const RunConfig& rc) {
    Solved s = run_solve(rc);
    write_file(rc.output_dir / "solution.csv", profile_csv({"u", "r"}, {&s.st.u, &s.st.r}));
    write_file(rc.output_dir / "solve.json", solve_report(rc, s).dump(2) + "\n");
    std::printf("solve: c=%.6g epsilon=%.3g beta=%.6e iterations=%d residual=%.3e invariants=%s\n", rc.p.c,
                rc.p.epsilon, s.st.beta, s.st.iter, s.st.residual_history.back(), s.inv.pass ? "pass" : "FAIL");
    return s.inv.pass ? 0 : 4;
}

int cmd_verify(const RunConfig& rc) {
    Solved s = run_solve(rc);
    OrthogonalityResult o = orthogonality_check(rc.p, rc.family, rc.x_max, rc.inv_h);
    InvariantReport rep = s.inv;
    rep.add("orthogonality", o.deviation <= 1e-6, o.deviation, 1e-6);
    WeightedNormSpec E{rc.p.nu, 2, NormKind::sup}, G{rc.p.nu, 0, NormKind::l2};
    double e = weighted_norm(s.st.r, E), g = weighted_norm(s.st.r, G);
    double bound = std::sqrt(2 * rc.x_max) * weighted_norm(s.st.r, WeightedNormSpec{rc.p.nu, 0, NormKind::sup});
    rep.add("G_le_sqrtL_E", g <= bound * (1 + 1e-12), g, bound);
    json j = solve_report(rc, s);
    j["invariants"] = invariant_json(rep);
    j["E_norm_r"] = num(e);
    j["G_norm_r"] = num(g);
    write_file(rc.output_dir / "verify.json", j.dump(2) + "\n");
    std::printf("verify: %zu checks, %s\n", rep.rows.size(), rep.pass ? "all pass" : "FAIL");
    for (const auto& r : rep.rows)
        if (!r.pass) std::printf("  failed %s: %.3e (bound %.3e)\n", r.name.c_str(), r.value, r.bound);
    return rep.pass ? 0 : 4;
}

int cmd_evolve(const RunConfig& rc) {
    Solved s = run_solve(rc);
    EvolveResult ev = evolve_lattice(s.st.u, rc.p, s.ctx.spec, rc.evolve);
    double err = propagation_error(ev, s.st.u, rc.p.c);
    fs::path f = rc.output_dir / "evolve_history.csv";
    fs::create_directories(f.parent_path());
    std::ofstream os(f, std::ios::binary);
    os << "t,j,v\n";
    for (const auto& cp : ev.history) {
        const int J = static_cast<int>(cp.pos.size() / 2);
        std::string chunk;
        for (int jj = -J; jj <= J; ++jj) chunk += fmt17(cp.t) + "," + std::to_string(jj) + "," + fmt17(cp.pos[jj + J]) + "\n";
        os << chunk;
    }
    json j{{"propagation_error", num(err)}, {"drift_rate", num(ev.drift_rate)}, {"T", num(rc.evolve.T)},
           {"dt", num(rc.evolve.dt)}, {"J", rc.evolve.J}};
    write_file(rc.output_dir / "evolve.json", j.dump(2) + "\n");
    std::printf("evolve: T=%.3g propagation error=%.3e drift=%.3e\n", rc.evolve.T, err, ev.drift_rate);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Travelling heteroclinic waves of the Frenkel-Kontorova advance-delay equation"};
    app.require_subcommand(1);
    std::string config_path;
    std::vector<std::string> sets;
    app.add_option("--config", config_path, "JSON configuration file");
    app.add_option("--set", sets, "override, key=value (dotted keys for nested entries)");
    struct Sub {
        const char* name;
        const char* help;
        int (*run)(const RunConfig&);
    };
    const Sub subs[] = {
        {"dispersion", "real roots and samples of the dispersion function", cmd_dispersion},
        {"potential-certify", "build the on-site potential and certify its bounds", cmd_certify},
        {"exact", "piecewise-quadratic baseline heteroclinic", cmd_exact},
        {"wavetrain", "wave-train cache and period map", cmd_wavetrain},
        {"family", "approximate-solution family and transversality constant", cmd_family},
        {"solve", "full solve with invariant suite", cmd_solve},
        {"verify", "solve plus extended verification", cmd_verify},
        {"evolve", "solve, then evolve the lattice and measure propagation error", cmd_evolve},
    };
    for (const auto& s : subs) {
        auto* sc = app.add_subcommand(s.name, s.help);
        sc->fallthrough();
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    try {
        json cfg = default_config();
        if (!config_path.empty()) {
            auto text = read_file(config_path);
            if (!text) throw Error(ErrorKind::config, "cannot read config " + config_path);
            json file = json::parse(*text, nullptr, false);
            if (file.is_discarded()) throw Error(ErrorKind::config, "config is not valid JSON");
            merge(cfg, file, "");
        }
        for (const auto& kv : sets) apply_set(cfg, kv);
        RunConfig rc = load(cfg);
        for (const auto& s : subs)
            if (app.got_subcommand(s.name)) return s.run(rc);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        switch (e.kind()) {
            case ErrorKind::config: return 2;
            case ErrorKind::numerical: return 3;
            case ErrorKind::invariant: return 4;
        }
    } catch (const nlohmann::json::exception& e) {
        std::fprintf(stderr, "error: config: %s\n", e.what());
        return 2;
    }
    return 2;
}
