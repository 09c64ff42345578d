#include "cfs/sphere_minimize.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <random>
#include <thread>

#include "cfs/errors.hpp"

namespace cfs::sphere {
namespace {

double raw_potential(double c, double t2) {
    return 2.0 * t2 * (1.0 + c) * (2.0 - t2 * (1.0 - c));
}

double raw_slope(double c, double t2) { return 4.0 * t2 * (1.0 + t2 * c); }

// quadratic smoothing of max(0, d) around the kink; mu = 0 is the exact hinge
double hinge(double d, double mu) {
    if (mu <= 0.0) return d > 0.0 ? d : 0.0;
    if (d <= -mu) return 0.0;
    if (d >= mu) return d;
    const double s = d + mu;
    return s * s / (4.0 * mu);
}

double hinge_slope(double d, double mu) {
    if (mu <= 0.0) return d > 0.0 ? 1.0 : 0.0;
    if (d <= -mu) return 0.0;
    if (d >= mu) return 1.0;
    return (d + mu) / (2.0 * mu);
}

struct State {
    double tau = 1.0;
    std::vector<Vec3> x;
    std::vector<double> w;
    std::size_t size() const { return x.size(); }
};

double pair_value(const State& s, std::size_t i, std::size_t j, double mu) {
    const double t2 = s.tau * s.tau;
    const double c = std::clamp(dot(s.x[i], s.x[j]), -1.0, 1.0);
    return hinge(raw_potential(c, t2), mu);
}

double smooth_action(const State& s, double mu) {
    const std::size_t n = s.size();
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        total += s.w[i] * s.w[i] * pair_value(s, i, i, mu);
        for (std::size_t j = i + 1; j < n; ++j)
            total += 2.0 * s.w[i] * s.w[j] * pair_value(s, i, j, mu);
    }
    return total;
}

double exact_action(const State& s) { return smooth_action(s, 0.0); }

// value plus gradients; position gradient is projected onto tangent planes
double smooth_action_grad(const State& s, double mu, std::vector<Vec3>& gx,
                          std::vector<double>& gw) {
    const std::size_t n = s.size();
    const double t2 = s.tau * s.tau;
    gx.assign(n, Vec3{0.0, 0.0, 0.0});
    gw.assign(n, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double self = hinge(raw_potential(1.0, t2), mu);
        total += s.w[i] * s.w[i] * self;
        gw[i] += 2.0 * s.w[i] * self;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double c = std::clamp(dot(s.x[i], s.x[j]), -1.0, 1.0);
            const double d = raw_potential(c, t2);
            const double val = hinge(d, mu);
            const double sl = hinge_slope(d, mu) * raw_slope(c, t2);
            total += 2.0 * s.w[i] * s.w[j] * val;
            gw[i] += 2.0 * s.w[j] * val;
            gw[j] += 2.0 * s.w[i] * val;
            const double f = 2.0 * s.w[i] * s.w[j] * sl;
            for (int k = 0; k < 3; ++k) {
                gx[i][k] += f * s.x[j][k];
                gx[j][k] += f * s.x[i][k];
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double r = dot(gx[i], s.x[i]);
        for (int k = 0; k < 3; ++k) gx[i][k] -= r * s.x[i][k];
    }
    return total;
}

// Euclidean projection onto the probability simplex
void project_simplex(std::vector<double>& w) {
    std::vector<double> u = w;
    std::sort(u.begin(), u.end(), std::greater<double>());
    double css = 0.0, theta = 0.0;
    std::size_t rho = 0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        css += u[k];
        const double t = (css - 1.0) / static_cast<double>(k + 1);
        if (u[k] - t > 0.0) {
            rho = k + 1;
            theta = t;
        }
    }
    if (rho == 0) {
        std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(w.size()));
        return;
    }
    for (double& v : w) v = std::max(v - theta, 0.0);
    double total = 0.0;
    for (double v : w) total += v;
    if (total > 0.0)
        for (double& v : w) v /= total;
}

// alternating projected-gradient descent with backtracking line searches
void polish_mu(State& s, double mu, int iters, double tol) {
    const std::size_t n = s.size();
    if (n == 0) return;
    std::vector<Vec3> gx;
    std::vector<double> gw;
    double step_x = 0.05, step_w = 0.05;
    double cur = smooth_action(s, mu);
    int stalls = 0;
    for (int it = 0; it < iters && stalls < 6; ++it) {
        const double before = cur;

        smooth_action_grad(s, mu, gx, gw);
        double gnorm2 = 0.0;
        for (const Vec3& g : gx) gnorm2 += dot(g, g);
        if (gnorm2 > 1e-30) {
            State trial = s;
            for (int bt = 0; bt < 40; ++bt) {
                for (std::size_t i = 0; i < n; ++i) {
                    Vec3 p{s.x[i][0] - step_x * gx[i][0],
                           s.x[i][1] - step_x * gx[i][1],
                           s.x[i][2] - step_x * gx[i][2]};
                    trial.x[i] = normalized(p);
                }
                const double val = smooth_action(trial, mu);
                if (val <= cur - 1e-4 * step_x * gnorm2) {
                    s.x = trial.x;
                    cur = val;
                    step_x = std::min(step_x * 1.25, 1.0);
                    break;
                }
                step_x *= 0.5;
                if (step_x < 1e-14) break;
            }
        }

        smooth_action_grad(s, mu, gx, gw);
        {
            State trial = s;
            for (int bt = 0; bt < 40; ++bt) {
                for (std::size_t i = 0; i < n; ++i)
                    trial.w[i] = s.w[i] - step_w * gw[i];
                project_simplex(trial.w);
                const double val = smooth_action(trial, mu);
                if (val < cur - 1e-14) {
                    s.w = trial.w;
                    cur = val;
                    step_w = std::min(step_w * 1.25, 1.0);
                    break;
                }
                step_w *= 0.5;
                if (step_w < 1e-14) break;
            }
        }

        if (before - cur < tol)
            ++stalls;
        else
            stalls = 0;
    }
}

void normalize_state(State& s) {
    for (Vec3& p : s.x) p = normalized(p);
    double total = 0.0;
    for (double v : s.w) total += v;
    if (total > 0.0)
        for (double& v : s.w) v /= total;
}

// descend through progressively sharper smoothings, ending at the true hinge
void polish_continuation(State& s, bool wide, int stage_iters, double tol) {
    static const double wide_schedule[] = {0.5, 0.12, 0.03, 0.007, 0.0};
    static const double short_schedule[] = {0.12, 0.03, 0.007, 0.0};
    if (wide)
        for (double mu : wide_schedule) polish_mu(s, mu, stage_iters, tol);
    else
        for (double mu : short_schedule) polish_mu(s, mu, stage_iters, tol);
    normalize_state(s);
}

State merged_state(const State& s, double radius) {
    State out;
    out.tau = s.tau;
    std::vector<Vec3> sums;
    for (std::size_t i = 0; i < s.size(); ++i) {
        std::size_t hit = out.x.size();
        for (std::size_t k = 0; k < out.x.size(); ++k) {
            if (geodesic(out.x[k], s.x[i]) <= radius) {
                hit = k;
                break;
            }
        }
        if (hit == out.x.size()) {
            out.x.push_back(s.x[i]);
            out.w.push_back(s.w[i]);
            sums.push_back({s.w[i] * s.x[i][0], s.w[i] * s.x[i][1],
                            s.w[i] * s.x[i][2]});
        } else {
            for (int k = 0; k < 3; ++k) sums[hit][k] += s.w[i] * s.x[i][k];
            out.w[hit] += s.w[i];
            if (out.w[hit] > 0.0 && dot(sums[hit], sums[hit]) > 0.0)
                out.x[hit] = normalized(sums[hit]);
        }
    }
    normalize_state(out);
    return out;
}

// merge near-coincident clusters and drop points that carry no pull;
// every candidate is repolished and kept only if the action allows it
void consolidate(State& s, double& action, int polish_iters, double tol) {
    for (double radius : {0.3, 0.1, 0.03, 5e-3}) {
        State t = merged_state(s, radius);
        if (t.size() >= s.size()) continue;
        polish_continuation(t, false, polish_iters, tol);
        const double val = exact_action(t);
        if (val <= action + 1e-12) {
            s = std::move(t);
            action = val;
        }
    }
    while (s.size() > 1) {
        std::size_t weakest = 0;
        for (std::size_t i = 1; i < s.size(); ++i)
            if (s.w[i] < s.w[weakest]) weakest = i;
        State t;
        t.tau = s.tau;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (i == weakest) continue;
            t.x.push_back(s.x[i]);
            t.w.push_back(s.w[i]);
        }
        double total = 0.0;
        for (double v : t.w) total += v;
        if (total <= 0.0) break;
        for (double& v : t.w) v /= total;
        polish_continuation(t, false, polish_iters, tol);
        const double val = exact_action(t);
        if (val <= action + 1e-12) {
            s = std::move(t);
            action = val;
        } else {
            break;
        }
    }
}

Vec3 random_unit(std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    while (true) {
        Vec3 v{gauss(rng), gauss(rng), gauss(rng)};
        if (dot(v, v) > 1e-12) return normalized(v);
    }
}

Vec3 tangent_noise(const Vec3& p, double sigma, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, sigma);
    Vec3 g{gauss(rng), gauss(rng), gauss(rng)};
    const double r = dot(g, p);
    return {g[0] - r * p[0], g[1] - r * p[1], g[2] - r * p[2]};
}

struct ReplicaOutcome {
    State state;
    double action = std::numeric_limits<double>::infinity();
    std::vector<double> history;
};

// Metropolis phase over joint point moves and weight transfers, tracking
// the best visited configuration
void anneal(State& s, double& best_action, State& best_state,
            std::vector<double>& history, const MinimizeOptions& o,
            std::mt19937_64& rng) {
    const std::size_t n = s.size();
    const double t2 = s.tau * s.tau;
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);

    std::vector<double> L(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) L[i * n + j] = pair_value(s, i, j, 0.0);
    auto full_action = [&]() {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                total += s.w[i] * s.w[j] * L[i * n + j];
        return total;
    };
    double action = full_action();
    if (action < best_action) {
        best_action = action;
        best_state = s;
    }

    double temp = o.initial_temperature;
    const int steps = o.annealing_steps;
    std::vector<double> new_row(n);
    for (int sweep_i = 0; sweep_i < steps; ++sweep_i) {
        const double frac =
            steps > 1 ? static_cast<double>(sweep_i) / (steps - 1) : 0.0;
        const double sigma = 0.6 * std::pow(0.01 / 0.6, frac);

        for (std::size_t move = 0; move < n; ++move) {
            const std::size_t i = pick(rng);
            Vec3 noise = tangent_noise(s.x[i], sigma, rng);
            Vec3 cand{s.x[i][0] + noise[0], s.x[i][1] + noise[1],
                      s.x[i][2] + noise[2]};
            cand = normalized(cand);
            double ds = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) {
                    new_row[j] = L[i * n + i];
                    continue;
                }
                const double c = std::clamp(dot(cand, s.x[j]), -1.0, 1.0);
                new_row[j] = hinge(raw_potential(c, t2), 0.0);
                ds += s.w[j] * (new_row[j] - L[i * n + j]);
            }
            ds *= 2.0 * s.w[i];
            const double gate = uni(rng);
            if (ds <= 0.0 || (temp > 0.0 && gate < std::exp(-ds / temp))) {
                s.x[i] = cand;
                for (std::size_t j = 0; j < n; ++j) {
                    L[i * n + j] = new_row[j];
                    L[j * n + i] = new_row[j];
                }
                action += ds;
            }
        }

        if (n > 1) {
            for (std::size_t move = 0; move < n; ++move) {
                const std::size_t i = pick(rng);
                std::size_t j = pick(rng);
                const double u = uni(rng);
                if (j == i) continue;
                const double delta = s.w[i] * u * std::max(sigma / 0.6, 0.02);
                if (delta <= 0.0) continue;
                double li = 0.0, lj = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    li += L[i * n + k] * s.w[k];
                    lj += L[j * n + k] * s.w[k];
                }
                const double quad =
                    L[i * n + i] - 2.0 * L[i * n + j] + L[j * n + j];
                const double ds = 2.0 * delta * (lj - li) + delta * delta * quad;
                const double gate = uni(rng);
                if (ds <= 0.0 || (temp > 0.0 && gate < std::exp(-ds / temp))) {
                    s.w[i] -= delta;
                    s.w[j] += delta;
                    action += ds;
                }
            }
        }

        action = full_action();
        if (action < best_action) {
            best_action = action;
            best_state = s;
        }
        history.push_back(best_action);
        temp *= o.cooling_factor;
    }
}

ReplicaOutcome run_replica(double tau, int cap, const State* init,
                           const MinimizeOptions& o, std::uint64_t replica) {
    std::seed_seq seq{
        static_cast<std::uint32_t>(o.master_seed & 0xffffffffu),
        static_cast<std::uint32_t>(o.master_seed >> 32),
        static_cast<std::uint32_t>(cap),
        static_cast<std::uint32_t>(replica),
        0x9e3779b9u};
    std::mt19937_64 rng(seq);

    State s;
    if (init) {
        s = *init;
    } else {
        s.tau = tau;
        for (int i = 0; i < cap; ++i) s.x.push_back(random_unit(rng));
        s.w.assign(cap, 1.0 / cap);
    }

    ReplicaOutcome out;
    out.state = s;
    out.action = exact_action(s);
    out.history.push_back(out.action);

    anneal(s, out.action, out.state, out.history, o, rng);

    const double tol = o.convergence_tolerance;
    const int stage_iters = 350;
    const int short_iters = 250;

    // a candidate replaces the incumbent only when its action is no worse,
    // so the recorded action never drifts from the recorded state
    auto accept = [&](State&& t, double val) {
        if (val < out.action ||
            (val == out.action && t.size() < out.state.size())) {
            out.state = std::move(t);
            out.action = val;
        }
    };

    {
        State t = out.state;
        polish_continuation(t, true, stage_iters, tol);
        double val = exact_action(t);
        consolidate(t, val, short_iters, tol);
        accept(std::move(t), val);
        out.history.push_back(out.action);
    }

    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int round = 0; round < o.hop_rounds; ++round) {
        State t = out.state;
        const std::size_t n = t.size();
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        const int mode = round % 3;
        if (mode == 0) {
            t.x[pick(rng)] = random_unit(rng);
        } else if (mode == 1) {
            for (std::size_t i = 0; i < n; ++i) {
                Vec3 noise = tangent_noise(t.x[i], 0.2, rng);
                Vec3 p{t.x[i][0] + noise[0], t.x[i][1] + noise[1],
                       t.x[i][2] + noise[2]};
                t.x[i] = normalized(p);
            }
        } else {
            if (n < static_cast<std::size_t>(cap)) {
                const std::size_t i = pick(rng);
                Vec3 noise = tangent_noise(t.x[i], 0.1, rng);
                Vec3 p{t.x[i][0] + noise[0], t.x[i][1] + noise[1],
                       t.x[i][2] + noise[2]};
                t.x.push_back(normalized(p));
                t.w[i] *= 0.5;
                t.w.push_back(t.w[i]);
            } else {
                continue;
            }
        }
        polish_continuation(t, false, stage_iters, tol);
        double val = exact_action(t);
        consolidate(t, val, short_iters, tol);
        if (t.size() <= static_cast<std::size_t>(cap)) accept(std::move(t), val);
        out.history.push_back(out.action);
    }

    {
        State t = out.state;
        polish_mu(t, 0.0, o.polish_iterations, tol * 1e-4);
        normalize_state(t);
        double val = exact_action(t);
        consolidate(t, val, short_iters, tol);
        accept(std::move(t), val);
        out.history.push_back(out.action);
    }

    return out;
}

std::vector<std::array<double, 4>> canonical_rows(const State& s) {
    std::vector<std::array<double, 4>> rows;
    for (std::size_t i = 0; i < s.size(); ++i)
        rows.push_back({-s.w[i], s.x[i][0], s.x[i][1], s.x[i][2]});
    std::sort(rows.begin(), rows.end());
    return rows;
}

bool canonical_less(const State& a, const State& b) {
    return canonical_rows(a) < canonical_rows(b);
}

int replica_threads() {
    if (const char* env = std::getenv("CFS_LAB_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1)
            return static_cast<int>(std::min(v, 256L));
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

void check_options(const MinimizeOptions& o) {
    if (o.restarts < 1) throw InvalidOptions("restarts must be at least 1");
    if (!(o.initial_temperature > 0.0))
        throw InvalidOptions("initial temperature must be positive");
    if (!(o.cooling_factor > 0.0 && o.cooling_factor < 1.0))
        throw InvalidOptions("cooling factor must lie in (0, 1)");
    if (o.annealing_steps < 1)
        throw InvalidOptions("annealing steps must be at least 1");
    if (o.polish_iterations < 1)
        throw InvalidOptions("polish iterations must be at least 1");
    if (!(o.merge_tolerance > 0.0))
        throw InvalidOptions("merge tolerance must be positive");
    if (!(o.convergence_tolerance > 0.0))
        throw InvalidOptions("convergence tolerance must be positive");
    if (o.hop_rounds < 0)
        throw InvalidOptions("hop rounds must be non-negative");
}

MinimizationResult run(double tau, int cap, const State* init,
                       const MinimizeOptions& o) {
    check_options(o);
    if (cap < 1) throw InvalidOptions("point budget must be at least 1");

    std::vector<ReplicaOutcome> outcomes(o.restarts);
    std::vector<std::exception_ptr> errors(o.restarts);
    const int workers = std::min(replica_threads(), o.restarts);
    std::atomic<int> next{0};
    auto work = [&]() {
        while (true) {
            const int k = next.fetch_add(1);
            if (k >= o.restarts) return;
            try {
                outcomes[k] = run_replica(tau, cap, init, o,
                                          static_cast<std::uint64_t>(k));
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < workers; ++t) pool.emplace_back(work);
        for (std::thread& t : pool) t.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    int best = 0;
    for (int k = 1; k < o.restarts; ++k) {
        if (outcomes[k].action < outcomes[best].action ||
            (outcomes[k].action == outcomes[best].action &&
             canonical_less(outcomes[k].state, outcomes[best].state)))
            best = k;
    }

    const ReplicaOutcome& win = outcomes[best];
    MinimizationResult result;
    result.best = make_config(win.state.tau, win.state.x, win.state.w);
    result.action = exact_action(win.state);
    result.history = win.history;
    if (result.history.empty() || result.history.back() > result.action)
        result.history.push_back(result.action);
    for (const ReplicaOutcome& r : outcomes)
        result.restart_actions.push_back(r.action);

    State filtered;
    filtered.tau = win.state.tau;
    for (std::size_t i = 0; i < win.state.size(); ++i) {
        if (win.state.w[i] >= 1e-10) {
            filtered.x.push_back(win.state.x[i]);
            filtered.w.push_back(win.state.w[i]);
        }
    }
    normalize_state(filtered);
    SphereConfiguration support_in;
    support_in.tau = filtered.tau;
    support_in.points = filtered.x;
    support_in.weights = filtered.w;
    result.support = support_clusters(support_in, o.merge_tolerance);
    return result;
}

} // namespace

MinimizationResult minimize(double tau, int max_points,
                            const MinimizeOptions& options) {
    if (!(tau >= 1.0)) throw DomainError("coupling must satisfy tau >= 1");
    return run(tau, max_points, nullptr, options);
}

MinimizationResult minimize(const SphereConfiguration& initial,
                            const MinimizeOptions& options) {
    SphereConfiguration checked =
        make_config(initial.tau, initial.points, initial.weights);
    if (checked.points.empty())
        throw InvalidOptions("initial configuration is empty");
    State init;
    init.tau = checked.tau;
    init.x = checked.points;
    init.w = checked.weights;
    return run(checked.tau, static_cast<int>(init.size()), &init, options);
}

std::vector<SweepRow> sweep(const std::vector<double>& tau_grid,
                            const std::vector<int>& m_grid,
                            const MinimizeOptions& options) {
    check_options(options);
    std::vector<SweepRow> rows;
    for (double tau : tau_grid) {
        for (int m : m_grid) {
            MinimizationResult r = minimize(tau, m, options);
            SweepRow row;
            row.tau = tau;
            row.m = m;
            row.seed = options.master_seed;
            row.min_action = r.action;
            row.support_size = static_cast<int>(r.support.points.size());
            row.constraint_T = sphere_constraint(r.best);
            rows.push_back(row);
        }
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const SweepRow& a, const SweepRow& b) {
                         if (a.tau != b.tau) return a.tau < b.tau;
                         return a.m < b.m;
                     });
    return rows;
}

} // namespace cfs::sphere
