#pragma once

// Monte Carlo wave-function (quantum-jump) unraveling of the master equation.
// Between jumps the state follows H_eff = H - (i/2) sum_k rate_k c_k^+ c_k;
// a jump fires when |psi|^2 crosses a uniform random threshold, the crossing
// time is refined by bracketed secant iteration, and the channel is drawn
// with probability proportional to rate_k |c_k psi|^2.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "nrb/errors.hpp"
#include "nrb/hilbert.hpp"
#include "nrb/liouvillian.hpp"
#include "nrb/model.hpp"
#include "nrb/ode.hpp"
#include "nrb/parallel.hpp"
#include "nrb/rng.hpp"

namespace nrb {

enum class JumpChannel { photon, phonon, magnon, atom };

inline const char* jump_channel_name(JumpChannel c) {
    switch (c) {
        case JumpChannel::photon: return "photon";
        case JumpChannel::phonon: return "phonon";
        case JumpChannel::magnon: return "magnon";
        case JumpChannel::atom: return "atom";
    }
    throw InvalidArgument("jump_channel_name: unknown channel");
}

inline JumpChannel jump_channel_of(const std::string& name) {
    if (name == "photon") return JumpChannel::photon;
    if (name == "phonon") return JumpChannel::phonon;
    if (name == "magnon") return JumpChannel::magnon;
    if (name == "atom") return JumpChannel::atom;
    throw InvalidArgument("jump_channel_of: unknown channel '" + name + "'");
}

struct JumpEvent {
    double time = 0;
    JumpChannel channel = JumpChannel::photon;
};

struct DressedPopulationEntry {
    int n_a = 0, n_b = 0, n_m = 0;
    int sign = +1; // +1 upper, -1 lower dressed branch
    double population = 0;
};

// P_{n_a n_b n_m +-} = |<n_a n_b n_m +-|psi>|^2 over all retained Fock labels.
inline std::vector<DressedPopulationEntry> dressed_populations(const StateVector& psi,
                                                               const DressedPair& d) {
    const auto& sp = psi.space;
    std::vector<DressedPopulationEntry> out;
    out.reserve(size_t(sp.dimension()));
    for (int na = 0; na <= sp.photon_cutoff; ++na)
        for (int nb = 0; nb <= sp.phonon_cutoff; ++nb)
            for (int nm = 0; nm <= sp.magnon_cutoff; ++nm) {
                complexd g = psi.amplitudes(sp.index({0, na, nb, nm}));
                complexd e = psi.amplitudes(sp.index({1, na, nb, nm}));
                // <+| = c_+ <g| + c_- <e| ;  <-| = c_- <g| - c_+ <e|
                complexd ap = d.c_plus * g + d.c_minus * e;
                complexd am = d.c_minus * g - d.c_plus * e;
                out.push_back({na, nb, nm, +1, std::norm(ap)});
                out.push_back({na, nb, nm, -1, std::norm(am)});
            }
    return out;
}

inline double dressed_population(const StateVector& psi, int n_a, int n_b, int n_m, int sign,
                                 const DressedPair& d) {
    const auto& sp = psi.space;
    complexd g = psi.amplitudes(sp.index({0, n_a, n_b, n_m}));
    complexd e = psi.amplitudes(sp.index({1, n_a, n_b, n_m}));
    complexd amp = sign >= 0 ? d.c_plus * g + d.c_minus * e : d.c_minus * g - d.c_plus * e;
    return std::norm(amp);
}

struct TrajectoryRecord {
    uint64_t seed = 0;
    std::vector<double> times;
    std::vector<StateVector> states; // normalized samples; empty if not stored
    std::vector<JumpEvent> jumps;
    std::map<std::string, std::vector<double>> observables; // real expectations per sample
    std::vector<std::vector<DressedPopulationEntry>> dressed_table; // per sample, optional
};

struct TrajectoryOptions {
    bool store_states = true;
    bool track_dressed_populations = false;
    NamedOps observables; // defaults to mode occupations + excited-state population
    OdeOptions ode;
    double jump_time_rel_tol = 1e-10;
};

namespace detail {

struct JumpChannelOp {
    JumpChannel channel;
    double rate;
    SparseMatrixXc op;
};

inline double real_expect(const VectorXc& psi, const MatrixXc& op, double norm2) {
    return std::real(psi.dot(op * psi)) / norm2;
}

} // namespace detail

inline TrajectoryRecord run_trajectory(const ModelParams& params, const SpaceDescriptor& space,
                                       const StateVector& psi0, const std::vector<double>& times,
                                       uint64_t seed, const TrajectoryOptions& opt = {}) {
    if (!(psi0.space == space)) throw InvalidArgument("run_trajectory: state/space mismatch");
    if (times.empty()) throw InvalidArgument("run_trajectory: empty time grid");
    if (times.front() < 0) throw InvalidArgument("run_trajectory: negative start time");
    for (size_t i = 1; i < times.size(); ++i)
        if (times[i] < times[i - 1])
            throw InvalidArgument("run_trajectory: times must be ascending");
    if (std::abs(psi0.norm() - 1.0) > 1e-9)
        throw InvalidState("run_trajectory: initial state is not normalized");

    Operator H = build_hamiltonian(params, space);
    std::vector<detail::JumpChannelOp> channels;
    for (const auto& ch : collapse_channels(params, space))
        channels.push_back({jump_channel_of(ch.name), ch.rate, ch.op.sparse()});

    // H_eff = H - (i/2) sum rate c^+c, applied as one sparse matvec
    SparseMatrixXc Heff = H.sparse();
    for (const auto& ch : channels) {
        SparseMatrixXc n = SparseMatrixXc(ch.op.adjoint()) * ch.op;
        Heff = Heff + complexd(0.0, -0.5 * ch.rate) * n;
    }
    Heff.makeCompressed();
    auto rhs = [&Heff](double, const VectorXc& y, VectorXc& dy) {
        dy = complexd(0.0, -1.0) * (Heff * y);
    };

    NamedOps obs = opt.observables.empty() ? default_observables(space) : opt.observables;
    DressedPair dp = dressed_states(params.delta_sigma_d(), params.xi);

    CounterRng rng(seed);

    TrajectoryRecord rec;
    rec.seed = seed;
    rec.times = times;
    for (const auto& [name, op] : obs) rec.observables[name] = {};

    VectorXc psi = psi0.amplitudes; // unnormalized between jumps
    double t = 0.0;
    double threshold = rng.uniform_open0();

    auto record_sample = [&](const VectorXc& y) {
        double n2 = y.squaredNorm();
        if (n2 <= 0) throw IntegratorFailure("run_trajectory: state norm collapsed");
        for (const auto& [name, op] : obs)
            rec.observables[name].push_back(detail::real_expect(y, op.matrix, n2));
        if (opt.store_states || opt.track_dressed_populations) {
            StateVector s(space, y / std::sqrt(n2));
            if (opt.track_dressed_populations) rec.dressed_table.push_back(dressed_populations(s, dp));
            if (opt.store_states) rec.states.push_back(std::move(s));
        }
    };

    // advance (t, psi) to t_target, applying jumps as thresholds are crossed
    auto advance_to = [&](double t_target) {
        while (t < t_target) {
            if (channels.empty()) {
                Rk45 free_stepper(rhs, opt.ode);
                free_stepper.integrate(t, t_target, psi);
                t = t_target;
                return;
            }
            double t_hi = 0.0;
            VectorXc y_hi;
            bool crossed = false;
            Rk45 stepper(rhs, opt.ode);
            auto watch = [&](double, const VectorXc&, double t_new, const VectorXc& y_new) {
                if (y_new.squaredNorm() < threshold) {
                    t_hi = t_new;
                    y_hi = y_new;
                    crossed = true;
                    return false;
                }
                return true;
            };
            double t_reached = stepper.integrate(t, t_target, psi, watch);
            if (!crossed) {
                t = t_target;
                return;
            }
            // bracket [t_lo, t_hi]: norm^2(t_lo) >= threshold > norm^2(t_hi)
            double t_lo = t_reached;
            VectorXc y_lo = psi;
            double f_lo = y_lo.squaredNorm() - threshold;
            double f_hi = y_hi.squaredNorm() - threshold;
            double tol = opt.jump_time_rel_tol * std::max(1.0, std::abs(t_hi));
            int last_side = 0;
            for (int it = 0; t_hi - t_lo > tol; ++it) {
                if (it > 200)
                    throw IntegratorFailure("run_trajectory: jump-time refinement stalled");
                double tc = f_lo - f_hi > 0 ? (f_lo * t_hi - f_hi * t_lo) / (f_lo - f_hi)
                                            : 0.5 * (t_lo + t_hi);
                double guard = 0.01 * (t_hi - t_lo);
                tc = std::min(std::max(tc, t_lo + guard), t_hi - guard);
                VectorXc yc = y_lo;
                if (tc > t_lo) {
                    Rk45 refine(rhs, opt.ode);
                    refine.integrate(t_lo, tc, yc);
                }
                double fc = yc.squaredNorm() - threshold;
                if (fc >= 0) {
                    t_lo = tc;
                    y_lo = std::move(yc);
                    f_lo = fc;
                    if (last_side == +1) f_hi *= 0.5; // Illinois anti-stall
                    last_side = +1;
                } else {
                    t_hi = tc;
                    y_hi = std::move(yc);
                    f_hi = fc;
                    if (last_side == -1) f_lo *= 0.5;
                    last_side = -1;
                }
            }
            double t_jump = t_hi;
            // channel ~ rate_k |c_k psi|^2 at the jump time
            std::vector<double> weights(channels.size());
            double total = 0.0;
            for (size_t k = 0; k < channels.size(); ++k) {
                weights[k] = channels[k].rate * (channels[k].op * y_hi).squaredNorm();
                total += weights[k];
            }
            if (total <= 0)
                throw IntegratorFailure("run_trajectory: no channel available at jump");
            double u = rng.uniform() * total;
            size_t pick = channels.size() - 1;
            double acc = 0.0;
            for (size_t k = 0; k < channels.size(); ++k) {
                acc += weights[k];
                if (u < acc) {
                    pick = k;
                    break;
                }
            }
            VectorXc post = channels[pick].op * y_hi;
            double pn = post.norm();
            if (pn <= 0) throw IntegratorFailure("run_trajectory: jump annihilated the state");
            psi = post / pn;
            t = t_jump;
            rec.jumps.push_back({t_jump, channels[pick].channel});
            threshold = rng.uniform_open0();
        }
    };

    if (times.front() > 0) advance_to(times.front());
    record_sample(psi);
    for (size_t i = 1; i < times.size(); ++i) {
        advance_to(times[i]);
        record_sample(psi);
    }
    return rec;
}

// ---------------------------------------------------------------------------
// bundle pairing of the jump record

struct PairDelays {
    std::vector<double> intra; // photon<->partner-mode delay within one pair
    std::vector<double> inter; // gap between the end of a pair and the start of the next
};

// Atom jumps are excluded: the accompanying atomic photon lives at a different
// frequency and does not belong to the bundle. A pair is a photon jump and a
// phonon/magnon jump adjacent in the remaining record.
inline PairDelays bundle_pair_delays(const std::vector<JumpEvent>& jumps) {
    std::vector<JumpEvent> modes;
    for (const auto& j : jumps)
        if (j.channel != JumpChannel::atom) modes.push_back(j);
    PairDelays out;
    double prev_pair_end = -1.0;
    size_t i = 0;
    while (i + 1 < modes.size()) {
        bool photon_first = modes[i].channel == JumpChannel::photon;
        bool photon_second = modes[i + 1].channel == JumpChannel::photon;
        if (photon_first != photon_second) {
            out.intra.push_back(modes[i + 1].time - modes[i].time);
            if (prev_pair_end >= 0) out.inter.push_back(modes[i].time - prev_pair_end);
            prev_pair_end = modes[i + 1].time;
            i += 2;
        } else {
            ++i; // unpaired jump; skip it
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// ensemble averaging

struct EnsembleSummary {
    int n_trajectories = 0;
    std::vector<double> times;
    std::map<std::string, std::vector<double>> mean;
    std::map<std::string, std::vector<double>> std_error; // sample sd / sqrt(n)
    std::map<std::string, std::vector<double>> jump_times; // channel -> pooled times
    PairDelays pair_delays; // pooled over the ensemble
};

inline EnsembleSummary ensemble_average(const ModelParams& params, const SpaceDescriptor& space,
                                        const StateVector& psi0, const std::vector<double>& times,
                                        int n, uint64_t seed0, int n_threads = 1,
                                        TrajectoryOptions opt = {}) {
    if (n < 1) throw InvalidArgument("ensemble_average: need at least one trajectory");
    opt.store_states = false;
    opt.track_dressed_populations = false;

    std::vector<TrajectoryRecord> records(static_cast<size_t>(n));
    parallel_for(size_t(n), n_threads, [&](size_t i) {
        records[i] = run_trajectory(params, space, psi0, times, seed0 + uint64_t(i), opt);
    });

    EnsembleSummary s;
    s.n_trajectories = n;
    s.times = times;
    const size_t T = times.size();
    for (const auto& [name, series] : records.front().observables) {
        std::vector<double> sum(T, 0.0), sumsq(T, 0.0);
        for (const auto& rec : records) {
            const auto& v = rec.observables.at(name);
            for (size_t k = 0; k < T; ++k) {
                sum[k] += v[k];
                sumsq[k] += v[k] * v[k];
            }
        }
        std::vector<double> mean(T), se(T);
        for (size_t k = 0; k < T; ++k) {
            mean[k] = sum[k] / n;
            double var = n > 1 ? std::max(0.0, (sumsq[k] - n * mean[k] * mean[k]) / (n - 1)) : 0.0;
            se[k] = std::sqrt(var / n);
        }
        s.mean[name] = std::move(mean);
        s.std_error[name] = std::move(se);
    }
    for (const auto& rec : records) {
        for (const auto& j : rec.jumps)
            s.jump_times[jump_channel_name(j.channel)].push_back(j.time);
        PairDelays pd = bundle_pair_delays(rec.jumps);
        s.pair_delays.intra.insert(s.pair_delays.intra.end(), pd.intra.begin(), pd.intra.end());
        s.pair_delays.inter.insert(s.pair_delays.inter.end(), pd.inter.begin(), pd.inter.end());
    }
    for (auto& [name, v] : s.jump_times) std::sort(v.begin(), v.end());
    return s;
}

} // namespace nrb
