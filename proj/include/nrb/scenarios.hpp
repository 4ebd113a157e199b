#pragma once

// Scenario execution: each scenario consumes a validated ScenarioConfig,
// sweeps its grids in deterministic order, writes CSV/JSON artifacts into an
// output directory, and returns a manifest with content checksums. Per-point
// failures are recorded in the output (ok/error columns); they mark the run
// incomplete but do not abort it.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "nrb/config.hpp"
#include "nrb/correlations.hpp"
#include "nrb/csv.hpp"
#include "nrb/entanglement.hpp"
#include "nrb/errors.hpp"
#include "nrb/hilbert.hpp"
#include "nrb/liouvillian.hpp"
#include "nrb/model.hpp"
#include "nrb/parallel.hpp"
#include "nrb/trajectories.hpp"
#include "nrb/version.hpp"

namespace nrb {

struct OutputArtifact {
    std::string name; // file name inside the output directory
    uint64_t checksum = 0;
    size_t rows = 0; // CSV data rows (0 for JSON artifacts)
};

struct RunManifest {
    std::string scenario;
    std::string code_version = library_version;
    int schema_version = output_schema_version;
    uint64_t config_hash = 0;
    std::vector<OutputArtifact> outputs;
    double wall_seconds = 0;
    bool all_points_ok = true;
    std::vector<std::string> errors;
};

namespace detail {

inline std::string hex64(uint64_t v) {
    char buf[19];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline void write_manifest(const RunManifest& m, const std::string& dir) {
    nlohmann::json j;
    j["scenario"] = m.scenario;
    j["code_version"] = m.code_version;
    j["schema_version"] = m.schema_version;
    j["config_hash"] = hex64(m.config_hash);
    j["wall_seconds"] = m.wall_seconds;
    j["all_points_ok"] = m.all_points_ok;
    j["errors"] = m.errors;
    j["outputs"] = nlohmann::json::array();
    for (const auto& o : m.outputs)
        j["outputs"].push_back(
            {{"name", o.name}, {"checksum", hex64(o.checksum)}, {"rows", o.rows}});
    std::ofstream out(dir + "/manifest.json", std::ios::binary);
    if (!out) throw ConfigError("cannot write manifest to '" + dir + "'");
    out << j.dump(2) << "\n";
}

inline void register_output(RunManifest& m, const std::string& dir, const std::string& name,
                            size_t rows) {
    m.outputs.push_back({name, fnv1a_hash_file(dir + "/" + name), rows});
}

struct ResolvedDetuning {
    double delta_ad = 0;
    std::string method;
};

inline ResolvedDetuning resolve_detuning(const ScenarioConfig& cfg, DriveSide side) {
    ResolvedDetuning r;
    switch (cfg.detuning.mode) {
        case DetuningMode::explicit_value:
            r.delta_ad = cfg.detuning.value;
            r.method = "explicit";
            break;
        case DetuningMode::closed_form:
            r.delta_ad =
                resonance_detuning(cfg.detuning.kind, side, with_drive_side(cfg.model, side));
            r.method = "closed_form";
            break;
        case DetuningMode::effective_resonance:
            r.delta_ad =
                locate_effective_resonance(cfg.detuning.kind, side, cfg.model, cfg.space).delta_ad;
            r.method = "effective_resonance";
            break;
    }
    return r;
}

inline StateVector make_initial_state(const ScenarioConfig& cfg, const ModelParams& p) {
    if (cfg.initial_state.dressed_vacuum) {
        DressedPair d = dressed_states(p.delta_sigma_d(), p.xi);
        return dressed_basis_state(cfg.space, 0, 0, 0, +1, d);
    }
    return basis_state(cfg.space, cfg.initial_state.labels);
}

inline double nan_value() { return std::numeric_limits<double>::quiet_NaN(); }

// dressed populations of a mixed state: <psi|rho|psi> for |n_a n_b n_m +->
inline double dressed_population_mixed(const DensityMatrix& rho, int n_a, int n_b, int n_m,
                                       int sign, const DressedPair& d) {
    StateVector v = dressed_basis_state(rho.space, n_a, n_b, n_m, sign, d);
    return std::real(v.amplitudes.dot(rho.matrix * v.amplitudes));
}

} // namespace detail

// ---------------------------------------------------------------------------
// individual scenarios

inline void run_spectrum_scenario(const ScenarioConfig& cfg, const std::string& dir, int threads,
                                  RunManifest& man) {
    struct Point {
        DriveSide side;
        double delta_ad;
        bool ok = false;
        Occupations occ;
        std::string error;
    };
    std::vector<Point> pts;
    for (DriveSide side : cfg.sides)
        for (double d : cfg.detuning_grid) pts.push_back({side, d, false, {}, ""});

    parallel_for(pts.size(), threads, [&](size_t i) {
        Point& pt = pts[i];
        try {
            ModelParams p = with_drive_side(cfg.model, pt.side);
            p.delta_ad = pt.delta_ad;
            Operator H = build_hamiltonian(p, cfg.space);
            Liouvillian L = build_liouvillian(H, collapse_channels(p, cfg.space));
            DensityMatrix rho = steady_state(L);
            pt.occ = occupations(rho);
            pt.ok = true;
        } catch (const Error& e) {
            pt.error = e.what();
        }
    });

    CsvWriter csv(dir + "/spectrum.csv",
                  {"side", "delta_ad", "n_a", "n_b", "n_m", "p_e", "ok", "error"});
    for (const auto& pt : pts) {
        csv.row()
            .value(drive_side_name(pt.side))
            .value(pt.delta_ad)
            .value(pt.ok ? pt.occ.n_a : detail::nan_value())
            .value(pt.ok ? pt.occ.n_b : detail::nan_value())
            .value(pt.ok ? pt.occ.n_m : detail::nan_value())
            .value(pt.ok ? pt.occ.p_e : detail::nan_value())
            .value(pt.ok)
            .value(pt.error)
            .commit();
        if (!pt.ok) {
            man.all_points_ok = false;
            man.errors.push_back("spectrum point side=" + std::string(drive_side_name(pt.side)) +
                                 " delta_ad=" + format_double(pt.delta_ad) + ": " + pt.error);
        }
    }
    csv.close();
    detail::register_output(man, dir, "spectrum.csv", csv.rows_written());
}

inline void run_dynamics_scenario(const ScenarioConfig& cfg, const std::string& dir, int,
                                  RunManifest& man) {
    const bool closed = cfg.kind == ScenarioKind::closed_dynamics;
    std::string name = closed ? "dynamics_closed.csv" : "dynamics_open.csv";
    CsvWriter csv(dir + "/" + name, {"side", "delta_ad", "t", "n_a", "n_b", "n_m", "p_e",
                                     "p_000_plus", "p_101_minus", "p_110_minus"});
    for (DriveSide side : cfg.sides) {
        detail::ResolvedDetuning rd = detail::resolve_detuning(cfg, side);
        ModelParams p = with_drive_side(cfg.model, side);
        p.delta_ad = rd.delta_ad;
        DressedPair dp = dressed_states(p.delta_sigma_d(), p.xi);
        StateVector psi0 = detail::make_initial_state(cfg, p);
        Operator H = build_hamiltonian(p, cfg.space);
        NamedOps obs = default_observables(cfg.space);

        if (closed) {
            EvolutionRecord rec = evolve_closed(psi0, H, cfg.time_grid, obs);
            for (size_t i = 0; i < rec.times.size(); ++i) {
                const StateVector& psi = rec.pure_states[i];
                csv.row()
                    .value(drive_side_name(side))
                    .value(p.delta_ad)
                    .value(rec.times[i])
                    .value(std::real(rec.observables.at("n_a")[i]))
                    .value(std::real(rec.observables.at("n_b")[i]))
                    .value(std::real(rec.observables.at("n_m")[i]))
                    .value(std::real(rec.observables.at("p_e")[i]))
                    .value(dressed_population(psi, 0, 0, 0, +1, dp))
                    .value(dressed_population(psi, 1, 0, 1, -1, dp))
                    .value(dressed_population(psi, 1, 1, 0, -1, dp))
                    .commit();
            }
        } else {
            Liouvillian L = build_liouvillian(H, collapse_channels(p, cfg.space));
            EvolutionRecord rec =
                evolve_open(DensityMatrix::from_pure(psi0), L, cfg.time_grid, obs);
            for (size_t i = 0; i < rec.times.size(); ++i) {
                const DensityMatrix& rho = rec.mixed_states[i];
                csv.row()
                    .value(drive_side_name(side))
                    .value(p.delta_ad)
                    .value(rec.times[i])
                    .value(std::real(rec.observables.at("n_a")[i]))
                    .value(std::real(rec.observables.at("n_b")[i]))
                    .value(std::real(rec.observables.at("n_m")[i]))
                    .value(std::real(rec.observables.at("p_e")[i]))
                    .value(detail::dressed_population_mixed(rho, 0, 0, 0, +1, dp))
                    .value(detail::dressed_population_mixed(rho, 1, 0, 1, -1, dp))
                    .value(detail::dressed_population_mixed(rho, 1, 1, 0, -1, dp))
                    .commit();
            }
        }
    }
    csv.close();
    detail::register_output(man, dir, name, csv.rows_written());
}

inline void run_trajectory_scenario(const ScenarioConfig& cfg, const std::string& dir, int threads,
                                    RunManifest& man, std::optional<uint64_t> seed_override) {
    uint64_t seed0 = seed_override.value_or(cfg.seeds.seed0);
    const int n = cfg.seeds.n_trajectories;
    const int detailed = std::min(n, 8); // per-seed series kept for the first few seeds

    CsvWriter obs_csv(dir + "/trajectory_observables.csv",
                      {"side", "seed", "t", "n_a", "n_b", "n_m", "p_e", "p_000_plus",
                       "p_101_minus", "p_110_minus"});
    CsvWriter jump_csv(dir + "/trajectory_jumps.csv", {"side", "seed", "time", "channel"});
    CsvWriter ens_csv(dir + "/trajectory_ensemble.csv",
                      {"side", "t", "n_a_mean", "n_a_se", "n_b_mean", "n_b_se", "n_m_mean",
                       "n_m_se", "p_e_mean", "p_e_se"});
    CsvWriter delay_csv(dir + "/trajectory_delays.csv", {"side", "kind", "delay"});

    for (DriveSide side : cfg.sides) {
        detail::ResolvedDetuning rd = detail::resolve_detuning(cfg, side);
        ModelParams p = with_drive_side(cfg.model, side);
        p.delta_ad = rd.delta_ad;
        DressedPair dp = dressed_states(p.delta_sigma_d(), p.xi);
        StateVector psi0 = detail::make_initial_state(cfg, p);
        const char* sname = drive_side_name(side);

        TrajectoryOptions topt;
        topt.store_states = false;
        topt.track_dressed_populations = true;
        for (int k = 0; k < detailed; ++k) {
            TrajectoryRecord rec =
                run_trajectory(p, cfg.space, psi0, cfg.time_grid, seed0 + uint64_t(k), topt);
            for (size_t i = 0; i < rec.times.size(); ++i) {
                auto pop = [&](int na, int nb, int nm, int sign) {
                    for (const auto& e : rec.dressed_table[i])
                        if (e.n_a == na && e.n_b == nb && e.n_m == nm && e.sign == sign)
                            return e.population;
                    return detail::nan_value();
                };
                obs_csv.row()
                    .value(sname)
                    .value(rec.seed)
                    .value(rec.times[i])
                    .value(rec.observables.at("n_a")[i])
                    .value(rec.observables.at("n_b")[i])
                    .value(rec.observables.at("n_m")[i])
                    .value(rec.observables.at("p_e")[i])
                    .value(pop(0, 0, 0, +1))
                    .value(pop(1, 0, 1, -1))
                    .value(pop(1, 1, 0, -1))
                    .commit();
            }
        }

        EnsembleSummary ens =
            ensemble_average(p, cfg.space, psi0, cfg.time_grid, n, seed0, threads);
        for (size_t i = 0; i < ens.times.size(); ++i) {
            ens_csv.row()
                .value(sname)
                .value(ens.times[i])
                .value(ens.mean.at("n_a")[i])
                .value(ens.std_error.at("n_a")[i])
                .value(ens.mean.at("n_b")[i])
                .value(ens.std_error.at("n_b")[i])
                .value(ens.mean.at("n_m")[i])
                .value(ens.std_error.at("n_m")[i])
                .value(ens.mean.at("p_e")[i])
                .value(ens.std_error.at("p_e")[i])
                .commit();
        }
        for (const auto& [channel, times] : ens.jump_times)
            for (double t : times)
                jump_csv.row().value(sname).value(uint64_t(0)).value(t).value(channel).commit();
        for (double d : ens.pair_delays.intra)
            delay_csv.row().value(sname).value("intra").value(d).commit();
        for (double d : ens.pair_delays.inter)
            delay_csv.row().value(sname).value("inter").value(d).commit();
    }
    obs_csv.close();
    jump_csv.close();
    ens_csv.close();
    delay_csv.close();
    detail::register_output(man, dir, "trajectory_observables.csv", obs_csv.rows_written());
    detail::register_output(man, dir, "trajectory_jumps.csv", jump_csv.rows_written());
    detail::register_output(man, dir, "trajectory_ensemble.csv", ens_csv.rows_written());
    detail::register_output(man, dir, "trajectory_delays.csv", delay_csv.rows_written());
}

inline void run_correlation_sweep_scenario(const ScenarioConfig& cfg, const std::string& dir,
                                           int threads, RunManifest& man) {
    struct Point {
        DriveSide side;
        double kappa, delta_ad;
        double g1_ab, g2_ab, g1_am, g2_am;
        bool ok = false;
        std::string error;
    };
    std::vector<Point> pts;
    for (DriveSide side : cfg.sides) {
        detail::ResolvedDetuning rd = detail::resolve_detuning(cfg, side);
        for (double k : cfg.kappa_grid) {
            Point pt;
            pt.side = side;
            pt.kappa = k;
            pt.delta_ad = rd.delta_ad;
            pts.push_back(pt);
        }
    }

    parallel_for(pts.size(), threads, [&](size_t i) {
        Point& pt = pts[i];
        pt.g1_ab = pt.g2_ab = pt.g1_am = pt.g2_am = detail::nan_value();
        try {
            ModelParams p = with_drive_side(cfg.model, pt.side);
            p.delta_ad = pt.delta_ad;
            p.set_kappa(pt.kappa);
            Operator H = build_hamiltonian(p, cfg.space);
            Liouvillian L = build_liouvillian(H, collapse_channels(p, cfg.space));
            DensityMatrix rho = steady_state(L);
            auto try_g = [&](double& slot, auto&& fn) {
                try {
                    slot = fn();
                } catch (const UndefinedCorrelation&) {
                    slot = detail::nan_value(); // no signal on this pair; not a failure
                }
            };
            try_g(pt.g1_ab, [&] { return cross_g2_zero(rho, ModePair::photon_phonon); });
            try_g(pt.g2_ab, [&] { return bundle_g2_zero(rho, ModePair::photon_phonon); });
            try_g(pt.g1_am, [&] { return cross_g2_zero(rho, ModePair::photon_magnon); });
            try_g(pt.g2_am, [&] { return bundle_g2_zero(rho, ModePair::photon_magnon); });
            pt.ok = true;
        } catch (const Error& e) {
            pt.error = e.what();
        }
    });

    CsvWriter csv(dir + "/correlations.csv", {"side", "kappa", "delta_ad", "g1_ab", "g2_ab",
                                              "g1_am", "g2_am", "ok", "error"});
    for (const auto& pt : pts) {
        csv.row()
            .value(drive_side_name(pt.side))
            .value(pt.kappa)
            .value(pt.delta_ad)
            .value(pt.g1_ab)
            .value(pt.g2_ab)
            .value(pt.g1_am)
            .value(pt.g2_am)
            .value(pt.ok)
            .value(pt.error)
            .commit();
        if (!pt.ok) {
            man.all_points_ok = false;
            man.errors.push_back("correlation point side=" +
                                 std::string(drive_side_name(pt.side)) +
                                 " kappa=" + format_double(pt.kappa) + ": " + pt.error);
        }
    }
    csv.close();
    detail::register_output(man, dir, "correlations.csv", csv.rows_written());
}

inline void run_witness_sweep_scenario(const ScenarioConfig& cfg, const std::string& dir,
                                       int threads, RunManifest& man) {
    struct Point {
        DriveSide side;
        double kappa, delta_ad;
        std::map<std::string, WitnessReport> reports;
        bool ok = false;
        std::string error;
    };
    std::vector<Point> pts;
    for (DriveSide side : cfg.sides) {
        detail::ResolvedDetuning rd = detail::resolve_detuning(cfg, side);
        for (double k : cfg.kappa_grid) {
            Point pt;
            pt.side = side;
            pt.kappa = k;
            pt.delta_ad = rd.delta_ad;
            pts.push_back(pt);
        }
    }

    const std::vector<Partition> partitions = {Partition::ab, Partition::ab_sigma, Partition::am,
                                               Partition::am_sigma};
    parallel_for(pts.size(), threads, [&](size_t i) {
        Point& pt = pts[i];
        try {
            ModelParams p = with_drive_side(cfg.model, pt.side);
            p.delta_ad = pt.delta_ad;
            p.set_kappa(pt.kappa);
            Operator H = build_hamiltonian(p, cfg.space);
            Liouvillian L = build_liouvillian(H, collapse_channels(p, cfg.space));
            DensityMatrix rho = steady_state(L);
            for (Partition part : partitions)
                pt.reports.emplace(partition_name(part), witness_report(rho, part));
            pt.ok = true;
        } catch (const Error& e) {
            pt.error = e.what();
        }
    });

    CsvWriter csv(dir + "/witness.csv",
                  {"side", "kappa", "delta_ad", "d1_ab", "d1_ab_sigma", "d1_am", "d1_am_sigma",
                   "w1_ab", "w1_ab_sigma", "w1_am", "w1_am_sigma", "ok", "error"});
    nlohmann::json jreports = nlohmann::json::array();
    for (const auto& pt : pts) {
        auto d1 = [&](const char* k) {
            return pt.ok ? pt.reports.at(k).d1 : detail::nan_value();
        };
        auto w1 = [&](const char* k) {
            return pt.ok ? pt.reports.at(k).w1 : detail::nan_value();
        };
        csv.row()
            .value(drive_side_name(pt.side))
            .value(pt.kappa)
            .value(pt.delta_ad)
            .value(d1("ab"))
            .value(d1("ab_sigma"))
            .value(d1("am"))
            .value(d1("am_sigma"))
            .value(w1("ab"))
            .value(w1("ab_sigma"))
            .value(w1("am"))
            .value(w1("am_sigma"))
            .value(pt.ok)
            .value(pt.error)
            .commit();
        if (!pt.ok) {
            man.all_points_ok = false;
            man.errors.push_back("witness point side=" + std::string(drive_side_name(pt.side)) +
                                 " kappa=" + format_double(pt.kappa) + ": " + pt.error);
            continue;
        }
        for (const auto& [pname, rep] : pt.reports) {
            nlohmann::json jr;
            jr["side"] = drive_side_name(pt.side);
            jr["kappa"] = pt.kappa;
            jr["delta_ad"] = pt.delta_ad;
            jr["partition"] = pname;
            jr["particles"] = rep.particles;
            jr["f_q"] = rep.f_q;
            jr["b1"] = rep.b1;
            if (rep.b2) jr["b2"] = *rep.b2;
            jr["b3"] = rep.b3;
            jr["w1"] = rep.w1;
            if (rep.w2) jr["w2"] = *rep.w2;
            jr["d1"] = rep.d1;
            if (rep.d2) jr["d2"] = *rep.d2;
            jr["c"] = std::vector<double>(rep.c.data(), rep.c.data() + rep.c.size());
            auto matrix_json = [](const Eigen::MatrixXd& M) {
                nlohmann::json rows = nlohmann::json::array();
                for (Eigen::Index r = 0; r < M.rows(); ++r) {
                    nlohmann::json row = nlohmann::json::array();
                    for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
                    rows.push_back(row);
                }
                return rows;
            };
            jr["qfi_matrix"] = matrix_json(rep.qfi);
            jr["covariance_matrix"] = matrix_json(rep.covariance);
            jreports.push_back(jr);
        }
    }
    csv.close();
    {
        std::ofstream out(dir + "/witness_reports.json", std::ios::binary);
        if (!out) throw ConfigError("cannot write witness reports to '" + dir + "'");
        out << jreports.dump(2) << "\n";
    }
    detail::register_output(man, dir, "witness.csv", csv.rows_written());
    detail::register_output(man, dir, "witness_reports.json", 0);
}

inline void run_resonance_table_scenario(const ScenarioConfig& cfg, const std::string& dir, int,
                                         RunManifest& man) {
    CsvWriter csv(dir + "/resonances.csv", {"kind", "side", "delta_ad_closed_form", "residual",
                                            "delta_ad_effective", "gap"});
    for (ResonanceKind kind : {ResonanceKind::photon_phonon, ResonanceKind::photon_magnon}) {
        for (DriveSide side : cfg.sides) {
            ModelParams p = with_drive_side(cfg.model, side);
            double closed = resonance_detuning(kind, side, p);
            double res = resonance_residual(kind, side, p, closed);
            EffectiveResonance eff = locate_effective_resonance(kind, side, cfg.model, cfg.space);
            csv.row()
                .value(resonance_kind_name(kind))
                .value(drive_side_name(side))
                .value(closed)
                .value(res)
                .value(eff.delta_ad)
                .value(eff.gap)
                .commit();
        }
    }
    csv.close();
    detail::register_output(man, dir, "resonances.csv", csv.rows_written());
}

// ---------------------------------------------------------------------------
// dispatcher

inline RunManifest run_scenario(const ScenarioConfig& cfg, const std::string& out_dir,
                                int threads = 1, std::optional<uint64_t> seed_override = {}) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + out_dir + "': " + ec.message());

    RunManifest man;
    man.scenario = scenario_name(cfg.kind);
    man.config_hash = fnv1a_hash(cfg.raw_text);
    auto t0 = std::chrono::steady_clock::now();

    switch (cfg.kind) {
        case ScenarioKind::spectrum:
            run_spectrum_scenario(cfg, out_dir, threads, man);
            break;
        case ScenarioKind::closed_dynamics:
        case ScenarioKind::open_dynamics:
            run_dynamics_scenario(cfg, out_dir, threads, man);
            break;
        case ScenarioKind::trajectory:
            run_trajectory_scenario(cfg, out_dir, threads, man, seed_override);
            break;
        case ScenarioKind::correlation_sweep:
            run_correlation_sweep_scenario(cfg, out_dir, threads, man);
            break;
        case ScenarioKind::witness_sweep:
            run_witness_sweep_scenario(cfg, out_dir, threads, man);
            break;
        case ScenarioKind::resonance_table:
            run_resonance_table_scenario(cfg, out_dir, threads, man);
            break;
    }

    man.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    detail::write_manifest(man, out_dir);
    return man;
}

} // namespace nrb
