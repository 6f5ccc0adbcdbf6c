#include "ftl/experiment.hpp"

#include "ftl/drivers.hpp"
#include "ftl/errors.hpp"
#include "ftl/mixing.hpp"
#include "ftl/parallel.hpp"
#include "ftl/stats.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace ftl {

using nlohmann::json;
namespace fs = std::filesystem;

std::uint64_t fnv1a64(std::string_view bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string_view results_header(Command c)
{
    switch (c) {
    case Command::simulate:
        return "t,replica,leader_pos,gap_sum,gap_first,gap_last,events,replica_seed";
    case Command::generator_check:
        return "state,observable,closed_form,dynkin,std_error,bias_allowance,pass,state_seed";
    case Command::adjoint_check:
        return "point,closed_form,quadrature,abs_diff,pass,point_seed";
    case Command::stationary_test:
        return "replica,gap_sum,gap_first,gap_last,replica_seed";
    case Command::couple:
        return "replica,tau,censored,events,replica_seed";
    case Command::tmix_upper:
        return "t,p_hat,ci_low,ci_high,worst_init,replicas,seed";
    case Command::tmix_lower:
        return "t,phi_mean,phi_var,lower_bound,replicas,seed";
    case Command::frozen_beta:
        return "m,replica,beta,censored,replica_seed";
    case Command::dominance_check:
        return "m,path,replica,ok,events,violation_time,replica_seed";
    case Command::heavy_tail:
        return "replica,y1,replica_seed";
    case Command::fclt:
        return "x,replica,u,replica_seed";
    case Command::hitting_time:
        return "replica,tau,censored,events,replica_seed";
    }
    return "";
}

namespace {

std::string num(double v)
{
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string key_of(std::uint64_t seed, std::size_t replica, StreamRole role = StreamRole::simulation)
{
    return std::to_string(derive_stream_key(seed, replica, role));
}

json ci_json(double lo, double hi) { return json::array({lo, hi}); }

json record(std::string op, json params, json estimate, json ci, std::size_t replicas,
            std::uint64_t seed)
{
    return json{{"op", std::move(op)}, {"params", std::move(params)},
                {"estimate", std::move(estimate)}, {"ci", std::move(ci)},
                {"replicas", replicas}, {"seed", seed}};
}

json mean_record(const std::string& op, json params, std::span<const double> xs,
                 std::uint64_t seed)
{
    const MeanVar mv = mean_var(xs);
    const double half = 1.959963984540054 * mv.std_error();
    return record(op, std::move(params), mv.mean, ci_json(mv.mean - half, mv.mean + half),
                  xs.size(), seed);
}

struct Output {
    std::ostringstream csv;
    std::vector<json> estimates;
    std::vector<json> couplings;
    bool has_couplings = false;
};

std::vector<double> start_gaps(const ExperimentConfig& c)
{
    if (c.init == "zeros") return initial_gaps(c.n, InitKind::zeros());
    if (c.init == "spread") return initial_gaps(c.n, InitKind::spread(c.spread_scale));
    if (c.init == "custom") return initial_gaps(c.n, InitKind::custom(c.start));
    throw ConfigError("init", "'" + c.init + "' is not a fixed start");
}

StartSpec start_spec(const ExperimentConfig& c)
{
    if (c.init == "stationary") return StartSpec::stationary(1.0);
    return StartSpec::fixed(start_gaps(c));
}

double gap_sum(const std::vector<double>& y)
{
    double s = 0.0;
    for (double v : y) s += v;
    return s;
}

std::vector<std::size_t> m_values(const ExperimentConfig& c)
{
    if (!c.m_list.empty()) return c.m_list;
    if (c.n < 3) throw ConfigError("m_list", "empty and n < 3");
    return {c.n};
}

// ---------------------------------------------------------------------------

void cmd_simulate(const ExperimentConfig& c, Output& out, const fs::path& dir)
{
    const JumpLaw law = c.law.build();
    const auto grid = c.grid();
    const StartSpec start = start_spec(c);
    const bool logging = c.trajectory_log != "none";
    const LogFormat format = c.trajectory_log == "binary" ? LogFormat::binary : LogFormat::csv;
    if (logging) fs::create_directories(dir / "trajectories");

    std::vector<std::vector<Snapshot>> snaps(grid.size(), std::vector<Snapshot>(c.replicas));
    std::vector<double> leader0(c.replicas, 0.0);
    parallel_for(c.replicas, c.workers, [&](std::size_t r) {
        Stream rng = Stream::for_replica(c.seed, r, StreamRole::simulation);
        Simulator sim(SystemState(draw_start(c.n, start, c.seed, r)), law);
        std::ofstream log;
        std::optional<TrajectoryLog> observer;
        if (logging) {
            const auto name = "replica_" + std::to_string(r) +
                              (format == LogFormat::csv ? ".csv" : ".bin");
            log.open(dir / "trajectories" / name, std::ios::binary);
            if (!log) throw std::runtime_error("cannot write trajectory log " + name);
            observer.emplace(log, format);
        }
        Observer* obs[] = {observer ? &*observer : nullptr};
        std::span<Observer* const> observers(obs, observer ? 1 : 0);
        for (std::size_t g = 0; g < grid.size(); ++g) {
            sim.run_until(grid[g], rng, observers);
            snaps[g][r] = {sim.state().gaps, sim.state().leader_pos, sim.events()};
        }
        if (log && !log.flush()) throw std::runtime_error("trajectory log write failed");
    });
    for (std::size_t g = 0; g < grid.size(); ++g) {
        std::vector<double> sums, lead;
        for (std::size_t r = 0; r < c.replicas; ++r) {
            const Snapshot& s = snaps[g][r];
            const double phi = gap_sum(s.gaps);
            sums.push_back(phi);
            lead.push_back(s.leader_displacement);
            out.csv << num(grid[g]) << ',' << r << ',' << num(s.leader_displacement) << ','
                    << num(phi) << ',' << num(s.gaps.front()) << ',' << num(s.gaps.back())
                    << ',' << s.events << ',' << key_of(c.seed, r) << '\n';
        }
        out.estimates.push_back(mean_record("mean_gap_sum", {{"n", c.n}, {"t", grid[g]}}, sums, c.seed));
        out.estimates.push_back(
            mean_record("mean_leader_position", {{"n", c.n}, {"t", grid[g]}}, lead, c.seed));
    }
}

void cmd_generator_check(const ExperimentConfig& c, Output& out)
{
    const JumpLaw law = c.law.build();
    std::vector<Observable> fs{obs::Coordinate{1}};
    if (c.n >= 3) fs.push_back(obs::Coordinate{2});
    fs.push_back(obs::GapSum{});
    fs.push_back(obs::Lyapunov{kLyapunovAlpha});
    if (law.has_moment(2)) fs.push_back(obs::Power{1, 2});
    for (std::size_t s = 0; s < c.states; ++s) {
        Stream state_rng = Stream::for_replica(c.seed, s, StreamRole::initial_state);
        const auto y = sample_stationary_gaps(c.n, 1.0, state_rng);
        const std::uint64_t sub_seed = derive_stream_key(c.seed, s, StreamRole::probe);
        const auto est = dynkin_estimate(y, fs, law, c.h, std::max<std::size_t>(c.replicas, 2),
                                         sub_seed, c.workers);
        for (std::size_t j = 0; j < fs.size(); ++j) {
            const double exact = generator_apply(y, fs[j], law);
            const double bias = dynkin_bias_allowance(y, fs[j], c.h);
            const bool pass = std::abs(est[j].mean - exact) <= 3.0 * est[j].std_error + bias;
            out.csv << s << ',' << describe(fs[j]) << ',' << num(exact) << ',' << num(est[j].mean)
                    << ',' << num(est[j].std_error) << ',' << num(bias) << ',' << (pass ? 1 : 0)
                    << ',' << key_of(c.seed, s, StreamRole::initial_state) << '\n';
            out.estimates.push_back(record(
                "dynkin", {{"state", s}, {"observable", describe(fs[j])}, {"h", c.h}, {"gaps", y}},
                est[j].mean,
                ci_json(est[j].mean - 3.0 * est[j].std_error, est[j].mean + 3.0 * est[j].std_error),
                c.replicas, sub_seed));
        }
    }
}

void cmd_adjoint_check(const ExperimentConfig& c, Output& out)
{
    constexpr double kTol = 1e-6;
    double worst_closed = 0.0, worst_quad = 0.0;
    for (std::size_t p = 0; p < c.points; ++p) {
        Stream rng = Stream::for_replica(c.seed, p, StreamRole::initial_state);
        std::vector<double> y(c.n - 1);
        for (double& v : y) v = -std::log(rng.uniform_open());
        const double closed = adjoint_apply(y, density::ProductExpUnit{}, ClosedForm{});
        const double quad = adjoint_apply(y, density::ProductExpUnit{}, Quadrature{1e-8});
        worst_closed = std::max(worst_closed, std::abs(closed));
        worst_quad = std::max(worst_quad, std::abs(quad));
        const bool pass = std::abs(closed) <= kTol && std::abs(quad) <= kTol;
        out.csv << p << ',' << num(closed) << ',' << num(quad) << ',' << num(std::abs(closed - quad))
                << ',' << (pass ? 1 : 0) << ',' << key_of(c.seed, p, StreamRole::initial_state)
                << '\n';
    }
    out.estimates.push_back(record("adjoint_residual_max", {{"n", c.n}, {"mode", "closed_form"}},
                                   worst_closed, nullptr, c.points, c.seed));
    out.estimates.push_back(record("adjoint_residual_max", {{"n", c.n}, {"mode", "quadrature"}},
                                   worst_quad, nullptr, c.points, c.seed));
}

void cmd_stationary_test(const ExperimentConfig& c, Output& out)
{
    const JumpLaw law = c.law.build();
    const auto snaps = gap_snapshots(c.n, StartSpec::stationary(1.0), law, {c.t_end}, c.replicas,
                                     c.seed, c.workers)
                           .front();
    std::vector<double> sums;
    for (std::size_t r = 0; r < c.replicas; ++r) {
        const auto& y = snaps[r].gaps;
        sums.push_back(gap_sum(y));
        out.csv << r << ',' << num(sums.back()) << ',' << num(y.front()) << ',' << num(y.back())
                << ',' << key_of(c.seed, r) << '\n';
    }
    const double nm1 = static_cast<double>(c.n - 1);
    if (c.replicas >= 8) {
        const auto exp_cdf = [](double x) { return x <= 0.0 ? 0.0 : -std::expm1(-x); };
        std::vector<double> col(c.replicas);
        for (std::size_t i = 0; i + 1 < c.n; ++i) {
            for (std::size_t r = 0; r < c.replicas; ++r) col[r] = snaps[r].gaps[i];
            const KsResult ks = ks_test(col, exp_cdf);
            out.estimates.push_back(record("ks_marginal_exp1",
                                           {{"gap", i + 1}, {"t", c.t_end}, {"level", 0.01 / nm1}},
                                           {{"d", ks.d}, {"p", ks.p}}, nullptr, c.replicas, c.seed));
        }
    }
    out.estimates.push_back(mean_record("mean_gap_sum", {{"n", c.n}, {"t", c.t_end}}, sums, c.seed));
    out.estimates.push_back(record("var_gap_sum", {{"n", c.n}, {"t", c.t_end}},
                                   mean_var(sums).variance, nullptr, c.replicas, c.seed));
}

void write_coupling(Output& out, const ExperimentConfig& c, std::size_t r,
                    const CouplingOutcome& o, std::uint64_t init_tag, const char* init)
{
    json row{{"n", c.n}, {"seed", c.seed}, {"replica", r}, {"init", init},
             {"tau", o.tau ? json(*o.tau) : json(nullptr)}, {"censored", o.censored},
             {"events", o.events},
             {"replica_seed",
              Stream::for_replica(c.seed, r, StreamRole::simulation).split(init_tag).key()}};
    out.couplings.push_back(std::move(row));
}

void cmd_couple(const ExperimentConfig& c, Output& out)
{
    out.has_couplings = true;
    const JumpLaw law = c.law.build();
    InitKind init = c.init == "spread"   ? InitKind::spread(c.spread_scale)
                    : c.init == "custom" ? InitKind::custom(c.start)
                                         : InitKind::zeros();
    if (c.init == "stationary") throw ConfigError("init", "couple needs a fixed start");
    const auto grid = c.grid();
    const auto outcomes = coupling_replicas(c.n, init, grid.back(), c.replicas, c.seed, c.workers,
                                            law, 0);
    for (std::size_t r = 0; r < outcomes.size(); ++r) {
        const auto& o = outcomes[r];
        const std::string key = std::to_string(
            Stream::for_replica(c.seed, r, StreamRole::simulation).split(0).key());
        out.csv << r << ',' << (o.tau ? num(*o.tau) : std::string()) << ',' << (o.censored ? 1 : 0)
                << ',' << o.events << ',' << key << '\n';
        write_coupling(out, c, r, o, 0, c.init.c_str());
    }
    const auto tails = tails_from_outcomes(outcomes, grid);
    for (std::size_t g = 0; g < grid.size(); ++g)
        out.estimates.push_back(record("coupling_tail",
                                       {{"n", c.n}, {"t", grid[g]}, {"init", c.init},
                                        {"tau", "prefix-completion upper bound"}},
                                       tails[g].p_hat, ci_json(tails[g].ci_low, tails[g].ci_high),
                                       c.replicas, c.seed));
}

void cmd_tmix_upper(const ExperimentConfig& c, Output& out)
{
    out.has_couplings = true;
    const auto grid = c.grid();
    const JumpLaw law = JumpLaw::exp_unit();
    const auto zeros = coupling_replicas(c.n, InitKind::zeros(), grid.back(), c.replicas, c.seed,
                                         c.workers, law, 0);
    const auto spread = coupling_replicas(c.n, InitKind::spread(c.spread_scale), grid.back(),
                                          c.replicas, c.seed, c.workers, law, 1);
    const auto tz = tails_from_outcomes(zeros, grid);
    const auto ts = tails_from_outcomes(spread, grid);
    std::optional<double> t_mix;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const bool s_worse = ts[g].ci_high > tz[g].ci_high;
        const TailEstimate& w = s_worse ? ts[g] : tz[g];
        if (!t_mix && w.ci_high < 0.25) t_mix = grid[g];
        out.csv << num(grid[g]) << ',' << num(w.p_hat) << ',' << num(w.ci_low) << ','
                << num(w.ci_high) << ',' << (s_worse ? "spread" : "zeros") << ',' << c.replicas
                << ',' << c.seed << '\n';
    }
    for (std::size_t r = 0; r < c.replicas; ++r) write_coupling(out, c, r, zeros[r], 0, "zeros");
    for (std::size_t r = 0; r < c.replicas; ++r) write_coupling(out, c, r, spread[r], 1, "spread");
    out.estimates.push_back(record("t_mix_upper",
                                   {{"n", c.n}, {"spread_scale", c.spread_scale},
                                    {"resolved", t_mix.has_value()},
                                    {"tau", "prefix-completion upper bound"}},
                                   t_mix ? json(*t_mix) : json(nullptr), nullptr, c.replicas, c.seed));
}

void cmd_tmix_lower(const ExperimentConfig& c, Output& out)
{
    const auto m = tmix_lower_estimate(c.n, c.delta, c.grid(), c.replicas, c.seed, c.workers);
    for (std::size_t g = 0; g < m.t_grid.size(); ++g)
        out.csv << num(m.t_grid[g]) << ',' << num(m.phi_mean[g]) << ',' << num(m.phi_var[g]) << ','
                << num(m.lower_bounds[g]) << ',' << c.replicas << ',' << c.seed << '\n';
    out.estimates.push_back(
        record("t_mix_lower", {{"n", c.n}, {"delta", c.delta}, {"resolved", m.lower_resolved}},
               m.t_mix_lower ? json(*m.t_mix_lower) : json(nullptr), nullptr, c.replicas, c.seed));
}

void cmd_frozen_beta(const ExperimentConfig& c, Output& out)
{
    std::vector<double> ms, means;
    for (std::size_t m : m_values(c)) {
        const auto betas = frozen_betas(m, c.t_cap, c.replicas, c.seed, c.workers);
        std::vector<double> vals;
        for (std::size_t r = 0; r < betas.size(); ++r) {
            vals.push_back(betas[r].beta);
            out.csv << m << ',' << r << ',' << num(betas[r].beta) << ','
                    << (betas[r].censored ? 1 : 0) << ','
                    << Stream::for_replica(c.seed, r, StreamRole::simulation).split(m).key() << '\n';
        }
        out.estimates.push_back(mean_record("mean_beta", {{"m", m}, {"t_cap", c.t_cap}}, vals, c.seed));
        ms.push_back(static_cast<double>(m));
        means.push_back(mean_var(vals).mean);
    }
    if (ms.size() >= 2) {
        const auto fit = fit_power_law(ms, means);
        out.estimates.push_back(record("beta_power_law", {{"m_list", ms}},
                                       {{"exponent", fit.exponent}, {"prefactor", fit.prefactor}},
                                       nullptr, c.replicas, c.seed));
    }
}

void cmd_dominance_check(const ExperimentConfig& c, Output& out)
{
    for (std::size_t m : m_values(c)) {
        for (LeaderPath path : {LeaderPath::frozen, LeaderPath::exp_jumps}) {
            const char* name = path == LeaderPath::frozen ? "frozen" : "exp_jumps";
            const auto runs = dominance_runs(m, c.t_end, path, c.replicas, c.seed, c.workers);
            std::size_t violations = 0;
            const std::uint64_t tag = 2 * m + (path == LeaderPath::exp_jumps ? 1 : 0);
            for (std::size_t r = 0; r < runs.size(); ++r) {
                violations += runs[r].ok ? 0 : 1;
                out.csv << m << ',' << name << ',' << r << ',' << (runs[r].ok ? 1 : 0) << ','
                        << runs[r].events << ','
                        << (runs[r].violation ? num(runs[r].violation->time) : std::string()) << ','
                        << Stream::for_replica(c.seed, r, StreamRole::simulation).split(tag).key()
                        << '\n';
            }
            out.estimates.push_back(record("dominance_violations",
                                           {{"m", m}, {"path", name}, {"t_end", c.t_end}},
                                           violations, nullptr, c.replicas, c.seed));
        }
    }
}

void cmd_heavy_tail(const ExperimentConfig& c, Output& out)
{
    const JumpLaw law = c.law.build();
    const double burn = c.burn_in ? *c.burn_in : 10.0 * static_cast<double>(c.n);
    const auto snaps = gap_snapshots(c.n, start_spec(c), law, {burn},
                                     c.replicas, c.seed, c.workers)
                           .front();
    std::vector<double> y1;
    for (std::size_t r = 0; r < snaps.size(); ++r) {
        y1.push_back(snaps[r].gaps.front());
        out.csv << r << ',' << num(y1.back()) << ',' << key_of(c.seed, r) << '\n';
    }
    std::vector<double> positive;
    for (double v : y1)
        if (v > 0.0) positive.push_back(v);
    for (double f : {0.5 * c.k_fraction, c.k_fraction, 2.0 * c.k_fraction}) {
        const auto k = static_cast<std::size_t>(f * static_cast<double>(positive.size()));
        if (k < 1 || k >= positive.size()) continue;
        const auto h = hill_estimator(positive, k);
        json est = h.unbounded ? json(nullptr) : json(h.alpha);
        out.estimates.push_back(record("hill_tail_index",
                                       {{"k", k}, {"k_fraction", f}, {"burn_in", burn},
                                        {"heuristic_burn_in", true}, {"law", law.describe()}},
                                       est, json::array({hill_lower_bound(h), nullptr}), positive.size(),
                                       c.seed));
    }
    for (std::size_t size = std::max<std::size_t>(2, y1.size() >> 3); size <= y1.size(); size *= 2) {
        std::span<const double> head(y1.data(), size);
        const auto m3 = moment_ci(head, 3.0);
        out.estimates.push_back(record("moment3", {{"samples", size}}, m3.estimate,
                                       ci_json(m3.estimate - m3.half_width, m3.estimate + m3.half_width),
                                       size, c.seed));
        if (size == y1.size()) break;
    }
}

void cmd_fclt(const ExperimentConfig& c, Output& out)
{
    const JumpLaw law = c.law.build();
    const std::vector<double> xs = c.x_grid.empty() ? std::vector<double>{0.25, 0.5, 0.75, 1.0}
                                                    : c.x_grid;
    const auto snaps =
        gap_snapshots(c.n, start_spec(c), law, {c.t_end}, c.replicas, c.seed, c.workers).front();
    std::vector<std::vector<double>> u(xs.size(), std::vector<double>(c.replicas));
    for (std::size_t r = 0; r < c.replicas; ++r) {
        const auto prof = fclt_profile(snaps[r].gaps, xs);
        for (std::size_t g = 0; g < xs.size(); ++g) u[g][r] = prof[g];
    }
    for (std::size_t g = 0; g < xs.size(); ++g)
        for (std::size_t r = 0; r < c.replicas; ++r)
            out.csv << num(xs[g]) << ',' << r << ',' << num(u[g][r]) << ',' << key_of(c.seed, r)
                    << '\n';
    for (std::size_t g = 0; g < xs.size(); ++g) {
        const MeanVar mv = mean_var(u[g]);
        out.estimates.push_back(record("fclt_variance", {{"n", c.n}, {"x", xs[g]}, {"t", c.t_end}},
                                       mv.variance, nullptr, c.replicas, c.seed));
        if (c.replicas >= 8 && mv.variance > 0.0) {
            std::vector<double> z(c.replicas);
            const double sd = std::sqrt(mv.variance);
            for (std::size_t r = 0; r < c.replicas; ++r) z[r] = (u[g][r] - mv.mean) / sd;
            const auto ks = ks_test(z, [](double v) { return normal_cdf(v); });
            out.estimates.push_back(record("fclt_ks_normal", {{"n", c.n}, {"x", xs[g]}},
                                           {{"d", ks.d}, {"p", ks.p}}, nullptr, c.replicas, c.seed));
        }
        for (std::size_t h = g + 1; h < xs.size(); ++h) {
            const MeanVar mh = mean_var(u[h]);
            double cov = 0.0;
            for (std::size_t r = 0; r < c.replicas; ++r)
                cov += (u[g][r] - mv.mean) * (u[h][r] - mh.mean);
            cov /= static_cast<double>(std::max<std::size_t>(c.replicas, 2) - 1);
            out.estimates.push_back(record("fclt_covariance",
                                           {{"n", c.n}, {"x", json::array({xs[g], xs[h]})}},
                                           cov, nullptr, c.replicas, c.seed));
        }
    }
}

void cmd_hitting_time(const ExperimentConfig& c, Output& out)
{
    const JumpLaw law = c.law.build();
    const auto start = start_gaps(c);
    const auto hits = hitting_times(start, law, c.t_cap, c.replicas, c.seed, c.workers);
    std::vector<double> taus;
    for (std::size_t r = 0; r < hits.size(); ++r) {
        taus.push_back(hits[r].tau);
        out.csv << r << ',' << num(hits[r].tau) << ',' << (hits[r].censored ? 1 : 0) << ','
                << hits[r].events << ',' << key_of(c.seed, r) << '\n';
    }
    const auto grid = c.grid();
    const auto tails = survival(taus, grid);
    for (std::size_t g = 0; g < grid.size(); ++g)
        out.estimates.push_back(record("hitting_survival",
                                       {{"n", c.n}, {"t", grid[g]}, {"level", kLyapunovLevel},
                                        {"alpha", kLyapunovAlpha}},
                                       tails[g].p_hat, ci_json(tails[g].ci_low, tails[g].ci_high),
                                       c.replicas, c.seed));
}

std::string timestamp()
{
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

OutputFile write_file(const fs::path& dir, const std::string& name, const std::string& content)
{
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + (dir / name).string() + " for writing");
    f << content;
    if (!f.flush()) throw std::runtime_error("write failed for " + (dir / name).string());
    return {name, content.size(), fnv1a64(content)};
}

std::string hex64(std::uint64_t v)
{
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

void write_manifest(const fs::path& dir, const RunManifest& m)
{
    json files = json::array();
    for (const auto& f : m.files)
        files.push_back({{"name", f.name}, {"bytes", f.bytes}, {"fnv1a64", hex64(f.fnv1a64)}});
    json j{
        {"schema", std::string(kManifestSchema)},
        {"tool_version", std::string(kToolVersion)},
        {"config", json::parse(m.config_json)},
        {"started_at", m.started_at},
        {"finished_at", m.finished_at},
        {"status", m.status},
        {"seed_rule",
         "replica r, role g: key = derive_stream_key(seed, r, g); roles simulation=0x51, "
         "initial_state=0x52, stationary=0x53, partner=0x54, probe=0x55; coupling, frozen and "
         "dominance streams are further split by a documented tag"},
        {"files", files},
    };
    if (!m.error.empty()) j["error"] = m.error;
    std::ofstream f(dir / "manifest.json", std::ios::binary);
    f << j.dump(2) << '\n';
    if (!f.flush()) throw std::runtime_error("cannot write manifest.json");
}

} // namespace

RunManifest run_experiment(const ExperimentConfig& config)
{
    validate_config(config);
    RunManifest manifest;
    manifest.config_json = serialize_config(config, -1);
    manifest.started_at = timestamp();
    const fs::path dir(config.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
    fs::remove(dir / "PARTIAL", ec);

    Output out;
    out.csv << results_header(config.command) << '\n';
    try {
        switch (config.command) {
        case Command::simulate: cmd_simulate(config, out, dir); break;
        case Command::generator_check: cmd_generator_check(config, out); break;
        case Command::adjoint_check: cmd_adjoint_check(config, out); break;
        case Command::stationary_test: cmd_stationary_test(config, out); break;
        case Command::couple: cmd_couple(config, out); break;
        case Command::tmix_upper: cmd_tmix_upper(config, out); break;
        case Command::tmix_lower: cmd_tmix_lower(config, out); break;
        case Command::frozen_beta: cmd_frozen_beta(config, out); break;
        case Command::dominance_check: cmd_dominance_check(config, out); break;
        case Command::heavy_tail: cmd_heavy_tail(config, out); break;
        case Command::fclt: cmd_fclt(config, out); break;
        case Command::hitting_time: cmd_hitting_time(config, out); break;
        }
        manifest.files.push_back(write_file(dir, "results.csv", out.csv.str()));
        std::string est;
        for (const auto& e : out.estimates) est += e.dump() + '\n';
        manifest.files.push_back(write_file(dir, "estimates.jsonl", est));
        if (out.has_couplings) {
            std::string cp;
            for (const auto& e : out.couplings) cp += e.dump() + '\n';
            manifest.files.push_back(write_file(dir, "couplings.jsonl", cp));
        }
    } catch (const std::exception& e) {
        manifest.status = "partial";
        manifest.error = e.what();
        manifest.finished_at = timestamp();
        try {
            if (manifest.files.empty()) manifest.files.push_back(write_file(dir, "results.csv", out.csv.str()));
        } catch (...) {
        }
        try {
            write_file(dir, "PARTIAL", std::string(e.what()) + '\n');
            write_manifest(dir, manifest);
        } catch (...) {
        }
        throw;
    }
    manifest.status = "complete";
    manifest.finished_at = timestamp();
    write_manifest(dir, manifest);
    return manifest;
}

} // namespace ftl
