// pseudofit.cpp — command-line driver: bath | fit | scaling | simulate | spectrum
//
// Every command reads one JSON config, writes its outputs into --out, and echoes the
// config for provenance. Exit codes: 0 success, 2 config error, 3 solver
// non-convergence, 4 resource cap.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "pseudofit/bath.hpp"
#include "pseudofit/dynamics.hpp"
#include "pseudofit/pipeline.hpp"
#include "pseudofit/serialize.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace pseudofit;

namespace {

struct CommandContext {
    json config;
    fs::path out_dir;
    long seed = 0;
};

json load_config(const std::string& path) {
    try {
        return json::parse(read_text_file(path));
    } catch (const json::parse_error& e) {
        throw InputError(std::string("config parse error: ") + e.what());
    }
}

void echo_config(const CommandContext& ctx) {
    json echoed = ctx.config;
    echoed["seed"] = ctx.seed;
    write_text_file(ctx.out_dir / "config_echo.json", echoed.dump(2) + "\n");
}

BathSpec bath_from_config(const json& cfg) {
    if (!cfg.contains("bath")) throw InputError("config: missing 'bath'");
    return bath_spec_from_json(cfg.at("bath").dump());
}

FitOptions fit_options_from_config(const json& cfg) {
    FitOptions opts;
    if (cfg.contains("fit")) {
        const json& f = cfg.at("fit");
        const std::string method = f.value("method", "time");
        if (method == "time") opts.method = FitMethod::time_domain;
        else if (method == "freq") opts.method = FitMethod::freq_domain;
        else throw InputError("config: fit.method must be 'time' or 'freq'");
        opts.order = f.value("order", -1);
        opts.sigma_rel = f.value("sigma_rel", 1e-12);
        opts.horizon = f.value("T", 10.0);
        opts.n_samples = f.value("n_samples", 401);
        opts.omega_lo = f.value("omega_lo", 0.0);
        opts.omega_hi = f.value("omega_hi", 0.0);
        opts.n_omega = f.value("n_omega", 1201);
        opts.refine = f.value("refine", false);
        opts.refine_iters = f.value("refine_iters", 200);
        opts.quad_tol = f.value("quad_tol", 1e-10);
    }
    if (cfg.contains("gauge")) {
        const json& g = cfg.at("gauge");
        opts.sdp.delta = g.value("delta", -1.0);
        opts.sdp.tol = g.value("tol_sdp", 1e-10);
        opts.sdp.max_iters = g.value("max_iters", 50000);
    }
    return opts;
}

json fit_report_json(const FitOutcome& out) {
    return json{{"epsilon", out.epsilon},
                {"epsilon_quasi", out.epsilon_quasi},
                {"equality_residual", out.gauge.equality_residual},
                {"lambda_min_Gamma", out.phys.gamma_min_eig},
                {"negative_weight", out.negative_weight},
                {"hermiticity_defect", out.phys.hermiticity_defect},
                {"bcf_t0_imag", out.phys.bcf_t0_imag},
                {"physical", out.phys.pass},
                {"sdp_converged", out.sdp_converged},
                {"sdp_iterations", out.gauge.iterations},
                {"N", out.model.size()}};
}

int cmd_bath(const CommandContext& ctx) {
    BathSpec bath = bath_from_config(ctx.config);
    const double t_max = ctx.config.value("t_max", 10.0);
    const int n_t = ctx.config.value("n_t", 201);
    const double quad_tol = ctx.config.value("quad_tol", 1e-10);
    const RealVector t_grid = linspace(0.0, t_max, n_t);

    if (bath.statistics == Statistics::fermionic) {
        auto hyb = hybridization(bath, t_grid, quad_tol);
        write_time_series_csv(ctx.out_dir / "hyb_lesser.csv", hyb.lesser, "Delta_lesser");
        write_time_series_csv(ctx.out_dir / "hyb_greater.csv", hyb.greater, "Delta_greater");
        return 0;
    }
    TimeSeries bcf = bcf_time(bath, t_grid, quad_tol);
    write_time_series_csv(ctx.out_dir / "bcf.csv", bcf, "C");

    const double s = bath.density.scale();
    const double lo = ctx.config.value("omega_min", -4.0 * s);
    const double hi = ctx.config.value("omega_max",
                                       std::isfinite(bath.density.support_hi())
                                           ? 1.2 * bath.density.support_hi()
                                           : 16.0 * s);
    const int n_w = ctx.config.value("n_omega", 401);
    RealVector w_grid = linspace(lo, hi, n_w);
    std::ostringstream dens;
    dens << "omega, J_eff, Ctilde\n";
    for (Index i = 0; i < w_grid.size(); ++i) {
        const double je = effective_density(bath, w_grid[i]);
        dens << format_double(w_grid[i]) << ", " << format_double(je) << ", "
             << format_double(M_PI * je) << "\n";
    }
    write_text_file(ctx.out_dir / "density.csv", dens.str());
    return 0;
}

int cmd_fit(const CommandContext& ctx) {
    BathSpec bath = bath_from_config(ctx.config);
    FitOptions opts = fit_options_from_config(ctx.config);
    if (bath.statistics == Statistics::fermionic) {
        // fit lesser/greater hybridization functions separately (time-domain path)
        const RealVector t_grid = linspace(0.0, opts.horizon, opts.n_samples);
        auto hyb = hybridization(bath, t_grid, opts.quad_tol);
        int rc = 0;
        const std::vector<std::pair<std::string, const TimeSeries*>> parts{
            {"lesser", &hyb.lesser}, {"greater", &hyb.greater}};
        for (const auto& [name, series] : parts) {
            FitOutcome out = fit_series(*series, opts);
            write_text_file(ctx.out_dir / ("quasi_model_" + name + ".json"),
                            to_json(out.quasi) + "\n");
            write_text_file(ctx.out_dir / ("coupled_model_" + name + ".json"),
                            to_json(out.model) + "\n");
            write_text_file(ctx.out_dir / ("fit_report_" + name + ".json"),
                            fit_report_json(out).dump(2) + "\n");
            if (!out.sdp_converged) rc = 3;
        }
        return rc;
    }
    FitOutcome out = fit_bath(bath, opts);
    write_text_file(ctx.out_dir / "quasi_model.json", to_json(out.quasi) + "\n");
    write_text_file(ctx.out_dir / "coupled_model.json", to_json(out.model) + "\n");
    write_text_file(ctx.out_dir / "fit_report.json", fit_report_json(out).dump(2) + "\n");
    return out.sdp_converged ? 0 : 3;
}

int cmd_scaling(const CommandContext& ctx) {
    BathSpec bath = bath_from_config(ctx.config);
    FitOptions base = fit_options_from_config(ctx.config);
    const json scfg = ctx.config.value("scaling", json::object());
    const double target_eps = scfg.value("target_eps", 1e-3);
    const int n_max = scfg.value("N_max", 12);
    std::vector<double> t_list = scfg.value("T_list", std::vector<double>{10.0, 20.0, 40.0, 80.0});
    std::vector<int> n_list = scfg.value("N_list", std::vector<int>{2, 3, 4, 5, 6, 7, 8});

    // N required to reach target_eps at each horizon
    std::ostringstream st;
    st << "T, N_required\n";
    for (double T : t_list) {
        int required = -1;
        for (int n = 1; n <= n_max; ++n) {
            FitOptions opts = base;
            opts.horizon = T;
            opts.n_samples = std::max(base.n_samples, int(T / 0.05) + 1);
            opts.order = n;
            try {
                FitOutcome out = fit_bath(bath, opts);
                if (out.epsilon <= target_eps) {
                    required = n;
                    break;
                }
            } catch (const SolverError&) {
                // leave this N unresolved and keep sweeping
            }
        }
        st << format_double(T) << ", " << (required > 0 ? std::to_string(required) : "nan") << "\n";
    }
    write_text_file(ctx.out_dir / "scaling_T.csv", st.str());

    // ε versus N at fixed horizon
    std::ostringstream sn;
    sn << "N, epsilon\n";
    for (int n : n_list) {
        FitOptions opts = base;
        opts.order = n;
        try {
            FitOutcome out = fit_bath(bath, opts);
            sn << n << ", " << format_double(out.epsilon) << "\n";
        } catch (const SolverError&) {
            sn << n << ", nan\n";
        }
    }
    write_text_file(ctx.out_dir / "scaling_N.csv", sn.str());
    return 0;
}

Matrix matrix_from_config(const json& j, const char* key) {
    if (!j.contains(key)) throw InputError(std::string("config: missing '") + key + "'");
    const json& m = j.at(key);
    if (!m.contains("re")) throw InputError(std::string("config: '") + key + "' needs re/im");
    const auto& re = m.at("re");
    const Index rows = Index(re.size());
    const Index cols = rows > 0 ? Index(re.at(0).size()) : 0;
    Matrix out(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index jj = 0; jj < cols; ++jj) {
            const double a = re.at(size_t(i)).at(size_t(jj)).get<double>();
            const double b = m.contains("im")
                                 ? m.at("im").at(size_t(i)).at(size_t(jj)).get<double>()
                                 : 0.0;
            out(i, jj) = Complex(a, b);
        }
    return out;
}

SystemSpec system_from_config(const json& cfg, const fs::path& base_dir) {
    if (!cfg.contains("system")) throw InputError("config: missing 'system'");
    const json& s = cfg.at("system");
    SystemSpec sys;
    sys.H_S = matrix_from_config(s, "H_S");
    sys.rho0 = matrix_from_config(s, "rho0");
    if (!s.contains("couplings") || !s.at("couplings").is_array())
        throw InputError("config: system.couplings must be an array");
    for (const auto& c : s.at("couplings")) {
        Matrix sop = matrix_from_config(c, "S");
        CoupledModel model;
        if (c.contains("model_file")) {
            fs::path p = c.at("model_file").get<std::string>();
            if (p.is_relative()) p = base_dir / p;
            model = coupled_model_from_json(read_text_file(p));
        } else if (c.contains("model")) {
            model = coupled_model_from_json(c.at("model").dump());
        } else {
            throw InputError("config: coupling needs 'model' or 'model_file'");
        }
        sys.couplings.emplace_back(std::move(sop), std::move(model));
    }
    sys.validate();
    return sys;
}

SimConfig sim_from_config(const json& cfg) {
    SimConfig sc;
    if (!cfg.contains("sim")) return sc;
    const json& s = cfg.at("sim");
    sc.fock_cutoff = s.value("fock_cutoff", 4);
    sc.dt = s.value("dt", 0.0);
    sc.horizon = s.value("T", 10.0);
    sc.out_dt = s.value("out_dt", 0.0);
    const std::string method = s.value("method", "rk4");
    if (method == "rk4") sc.method = Integrator::rk4;
    else if (method == "adaptive_rk45") sc.method = Integrator::adaptive_rk45;
    else throw InputError("config: sim.method must be rk4 or adaptive_rk45");
    sc.renormalize_trace = s.value("renormalize_trace", true);
    sc.dim_cap = s.value("dim_cap", Index(4096));
    sc.rtol = s.value("rtol", 1e-8);
    sc.atol = s.value("atol", 1e-10);
    return sc;
}

int cmd_simulate(const CommandContext& ctx, const fs::path& config_dir) {
    SystemSpec sys = system_from_config(ctx.config, config_dir);
    SimConfig sc = sim_from_config(ctx.config);
    try {
        Trajectory traj = propagate(sys, sc);
        write_trajectory_csv(ctx.out_dir / "trajectory.csv", traj);

        // cutoff convergence report: rerun at d+1 and compare populations
        SimConfig sc2 = sc;
        sc2.fock_cutoff = sc.fock_cutoff + 1;
        sc2.dim_cap = std::max<Index>(sc.dim_cap, sc.dim_cap * 8);
        json conv{{"fock_cutoff", sc.fock_cutoff}, {"fock_cutoff_next", sc2.fock_cutoff}};
        try {
            Trajectory traj2 = propagate(sys, sc2);
            double delta = 0.0;
            for (Index level = 0; level < sys.dim_s(); ++level) {
                RealVector a = population(traj, level);
                RealVector b = population(traj2, level);
                delta = std::max(delta, (a - b).cwiseAbs().maxCoeff());
            }
            conv["max_population_delta"] = delta;
        } catch (const ResourceError& e) {
            conv["max_population_delta"] = nullptr;
            conv["note"] = std::string("d+1 run skipped: ") + e.what();
        }
        write_text_file(ctx.out_dir / "convergence.json", conv.dump(2) + "\n");
    } catch (const ResourceError& e) {
        std::cerr << "resource cap: " << e.what() << "\n"
                  << "suggestion: lower sim.fock_cutoff or the number of modes, or raise sim.dim_cap\n";
        return 4;
    }
    return 0;
}

int cmd_spectrum(const CommandContext& ctx, const fs::path& config_dir) {
    TimeSeries cmu;
    if (ctx.config.contains("cmu_csv")) {
        fs::path p = ctx.config.at("cmu_csv").get<std::string>();
        if (p.is_relative()) p = config_dir / p;
        cmu = time_series_from_csv(p);
    } else {
        SystemSpec sys = system_from_config(ctx.config, config_dir);
        SimConfig sc = sim_from_config(ctx.config);
        Matrix mu = matrix_from_config(ctx.config.at("system"), "mu");
        try {
            cmu = dipole_correlation(sys, mu, sc);
        } catch (const ResourceError& e) {
            std::cerr << "resource cap: " << e.what() << "\n";
            return 4;
        }
        write_time_series_csv(ctx.out_dir / "cmu.csv", cmu, "Cmu");
    }
    const double lo = ctx.config.value("omega_min", -2.0);
    const double hi = ctx.config.value("omega_max", 2.0);
    const int n = ctx.config.value("n_omega", 801);
    const double eta = ctx.config.value("eta", 0.0);
    const bool esprit_tail = ctx.config.value("use_esprit_tail", true);
    EspritOptions eo;
    eo.target_order = ctx.config.value("esprit_order", -1);
    eo.sigma_rel = ctx.config.value("esprit_sigma_rel", 1e-10);
    FreqSeries spec = absorption_spectrum(cmu, linspace(lo, hi, n), eta, esprit_tail, eo);
    write_freq_series_csv(ctx.out_dir / "spectrum.csv", spec, "S");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"coupled-Lindblad pseudomode fitting and simulation"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    long seed = 0;
    for (const char* name : {"bath", "fit", "scaling", "simulate", "spectrum"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON config file")->required();
        sub->add_option("--out", out_dir, "output directory")->required();
        sub->add_option("--seed", seed, "seed for randomized choices");
    }

    CLI11_PARSE(app, argc, argv);
    const std::string cmd = app.get_subcommands().front()->get_name();

    try {
        CommandContext ctx;
        ctx.config = load_config(config_path);
        ctx.out_dir = out_dir;
        ctx.seed = seed;
        fs::create_directories(ctx.out_dir);
        echo_config(ctx);
        const fs::path config_dir = fs::absolute(fs::path(config_path)).parent_path();

        if (cmd == "bath") return cmd_bath(ctx);
        if (cmd == "fit") return cmd_fit(ctx);
        if (cmd == "scaling") return cmd_scaling(ctx);
        if (cmd == "simulate") return cmd_simulate(ctx, config_dir);
        if (cmd == "spectrum") return cmd_spectrum(ctx, config_dir);
        return 2;
    } catch (const InputError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ResourceError& e) {
        std::cerr << "resource cap: " << e.what() << "\n";
        return 4;
    } catch (const SolverError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 3;
    } catch (const AccuracyError& e) {
        std::cerr << "accuracy error: " << e.what() << " (achieved " << e.achieved << ")\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
