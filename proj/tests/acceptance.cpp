#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/SparseCholesky>

#include "latinflow/config.hpp"
#include "latinflow/elements.hpp"
#include "latinflow/interpolation.hpp"
#include "latinflow/latin.hpp"
#include "latinflow/local_stage.hpp"
#include "latinflow/mesh.hpp"
#include "latinflow/oracles.hpp"

using namespace latinflow;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::map<int, std::string> results;

void report(int id, bool pass, const std::string& detail)
{
    std::string line = "criterion " + std::to_string(id) + ": " + (pass ? "PASS" : "FAIL") + "  " + detail;
    std::cerr << line << std::endl;
    results[id] = std::move(line);
}

/// Runs a criterion body, turning any exception into a FAIL line.
void guarded(int id, const std::function<void()>& body)
{
    try {
        body();
    }
    catch (const std::exception& e) {
        report(id, false, std::string("error: ") + e.what());
    }
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

double max_abs_vx(const Solution& s, int n)
{
    double m = 0.0;
    for (int i = 0; i < s.velocity.rows(); i += 2) {
        m = std::max(m, std::abs(s.velocity(i, n)));
    }
    return m;
}

/// Relative L2 over all space-time samples t_1..t_N.
double relative_l2(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b)
{
    const int n = static_cast<int>(a.cols()) - 1;
    return (a.rightCols(n) - b.rightCols(n)).norm() / b.rightCols(n).norm();
}

struct Run {
    CaseConfig config;
    Mesh mesh;
    Solution solution;
    double seconds = 0.0;
};

Run run_case(CaseConfig config)
{
    Run r{config, build_mesh(config), {}, 0.0};
    const auto t0 = Clock::now();
    r.solution = run_latin(r.config, r.mesh, [](const IterationRecord& rec) {
        if (rec.iteration % 20 == 0) {
            std::cerr << "  iteration " << rec.iteration << " eta_v " << rec.eta_v << " eta_rho " << rec.eta_rho
                      << '\n';
        }
    });
    r.seconds = seconds_since(t0);
    r.solution.gauss.reset();
    return r;
}

std::string run_summary(const Run& r)
{
    const IterationRecord& last = r.solution.history.back();
    std::ostringstream os;
    os << (r.solution.converged ? "converged" : "not converged") << " after " << last.iteration
       << " iterations (eta_v " << last.eta_v << ", eta_rho " << last.eta_rho << "), modes v/rho " << last.n_modes_v
       << "/" << last.n_modes_rho << ", " << fmt("%.1f s", r.seconds);
    return os.str();
}

void criterion_1(const Run& fine, const Run& coarse)
{
    const double target = 8e-3;
    const double vf = max_abs_vx(fine.solution, fine.solution.n_steps());
    const double vc = max_abs_vx(coarse.solution, coarse.solution.n_steps());
    const double ef = std::abs(vf - target) / target;
    const double ec = std::abs(vc - target) / target;
    const bool pass = fine.solution.converged && ef < 0.015 && fine.seconds < 300.0 && coarse.solution.converged &&
                      ec < 0.03 && coarse.seconds < 20.0;
    std::ostringstream os;
    os << "128x16 max|v_x| " << vf << " (" << fmt("%.2f%%", 100 * ef) << "), " << run_summary(fine) << "; 32x8 max|v_x| "
       << vc << " (" << fmt("%.2f%%", 100 * ec) << "), " << run_summary(coarse);
    report(1, pass, os.str());
}

void criterion_2(const Run& fine)
{
    const ChannelSpec spec = channel_spec(fine.config);
    const Mesh& m = fine.mesh;
    const double dx = spec.length / fine.config.mesh.nx;
    const int N = fine.solution.n_steps();
    double worst = 0.0;
    int count = 0;
    for (int i = 0; i < m.n_q1(); ++i) {
        const Point& p = m.q1_node(i);
        if (std::abs(p.y()) > 1e-12 || p.x() < 2.0 * dx - 1e-12 || p.x() > spec.length - 2.0 * dx + 1e-12) {
            continue;
        }
        const double num = fine.solution.rT * fine.solution.density(i, N);
        const double ana = poiseuille(spec, p.x(), 0.0).p;
        worst = std::max(worst, std::abs(num - ana) / std::abs(spec.p_in - spec.p_out));
        ++count;
    }
    report(2, count > 0 && worst < 0.01,
           fmt("max |p_num - p_ana|/|dp| on the mean line = %.4g over %.0f nodes", worst, count));
}

void criterion_3(const Run& fine)
{
    const ChannelSpec spec = channel_spec(fine.config);
    const PoiseuilleValue steady = poiseuille(spec, 1.25, 0.0);
    const Solution& s = fine.solution;
    int settled = -1; // first step from which both stay within 1%
    double vx_end = 0.0, p_end = 0.0;
    for (int n = s.n_steps(); n >= 0; --n) {
        const PointValue pv = evaluate_at(fine.mesh, Point(1.25, 0.0), s.density.col(n), s.velocity.col(n));
        const double p = pv.rho * s.rT;
        if (n == s.n_steps()) {
            vx_end = pv.v.x();
            p_end = p;
        }
        const bool ok = std::abs(pv.v.x() - steady.v_x) <= 0.01 * std::abs(steady.v_x) &&
                        std::abs(p - steady.p) <= 0.01 * std::abs(steady.p);
        if (!ok) {
            break;
        }
        settled = n;
    }
    const bool pass = settled >= 0 && s.times[settled] <= 3.5e-3 + 1e-12;
    std::ostringstream os;
    os << "probe (1.25, 0) at final step v_x " << vx_end << " p " << p_end << "; ";
    if (settled >= 0) {
        os << "within 1% from t = " << s.times[settled] * 1e3 << " ms";
    }
    else {
        os << "not within 1% of (" << steady.v_x << ", " << steady.p << ") at the final step";
    }
    report(3, pass, os.str());
}

void criterion_4(const Run& fine)
{
    const auto t0 = Clock::now();
    const Solution mono = monolithic_solve(fine.config, fine.mesh);
    const double ev = relative_l2(fine.solution.velocity, mono.velocity);
    const double er = relative_l2(fine.solution.density, mono.density);
    report(4, ev < 0.01 && er < 0.01,
           fmt("relative space-time L2: velocity %.4g, density %.4g (monolithic %.1f s)", ev, er, seconds_since(t0)));
}

void criterion_5(const Run& fine)
{
    CaseConfig c = fine.config;
    c.solver.reference_mode = true;
    // the stopping rule is the only difference from the default run; when that
    // run never met eta_c = 1e-4 it is bitwise the reference-mode PGD run
    const Run pgd = fine.solution.converged ? run_case(c) : fine;
    c.solver.full_order = true;
    const Run full = run_case(c);
    const double ev = relative_l2(pgd.solution.velocity, full.solution.velocity);
    const double er = relative_l2(pgd.solution.density, full.solution.density);
    std::ostringstream os;
    os << fmt("PGD vs full-order relative space-time L2: velocity %.4g, density %.4g; ", ev, er)
       << "PGD " << run_summary(pgd) << "; full-order " << run_summary(full);
    report(5, pgd.solution.converged && full.solution.converged && ev < 1e-6 && er < 1e-6, os.str());
}

void criterion_6(const Run& fine)
{
    const IterationRecord& last = fine.solution.history.back();
    const bool pass = fine.solution.converged && last.n_modes_v <= 25 && last.n_modes_rho <= 12 &&
                      last.n_modes_v > last.n_modes_rho;
    report(6, pass, run_summary(fine));
}

void criterion_7()
{
    const Run cyl = run_case(load_config(LATINFLOW_CASES_DIR "/cylinder.case"));
    const Solution& s = cyl.solution;
    const IterationRecord& last = s.history.back();
    const int N = s.n_steps();
    const double axis = 0.2;
    // mirror pairs (x, axis + d), (x, axis - d) on a regular sample grid
    double diff = 0.0, norm = 0.0;
    int pairs = 0;
    for (double x = 0.01; x < 2.2; x += 0.02) {
        for (double d = 0.005; d < axis; d += 0.01) {
            const auto up = locate(cyl.mesh, Point(x, axis + d));
            const auto down = locate(cyl.mesh, Point(x, axis - d));
            if (!up || !down) {
                continue;
            }
            const PointValue a = evaluate_at(cyl.mesh, Point(x, axis + d), s.density.col(N), s.velocity.col(N));
            const PointValue b = evaluate_at(cyl.mesh, Point(x, axis - d), s.density.col(N), s.velocity.col(N));
            diff += (a.v - Vector2(b.v.x(), -b.v.y())).squaredNorm();
            norm += 0.5 * (a.v.squaredNorm() + b.v.squaredNorm());
            ++pairs;
        }
    }
    const double asym = norm > 0.0 ? std::sqrt(diff / norm) : INFINITY;
    const bool pass = s.converged && last.iteration <= 60 && last.n_modes_v <= 25 && last.n_modes_rho <= 12 &&
                      asym < 0.02;
    std::ostringstream os;
    os << run_summary(cyl) << fmt("; mirror asymmetry about y = 0.2: %.4g over %.0f pairs", asym, pairs);
    report(7, pass, os.str());
}

// ---- criterion 8: quick unit and property checks

struct Checks {
    std::vector<std::string> failed;
    int total = 0;
    void expect(bool ok, const std::string& what)
    {
        ++total;
        if (!ok) {
            failed.push_back(what);
        }
    }
};

void unit_checks(Checks& c)
{
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double pu = 0.0;
    for (int k = 0; k < 100; ++k) {
        const ShapeQ2 s = shape_q2(u(rng), u(rng));
        double sum = 0.0;
        for (double v : s.value) {
            sum += v;
        }
        pu = std::max(pu, std::abs(sum - 1.0));
    }
    c.expect(pu < 1e-13, "partition of unity");

    double quad = 0.0;
    for (int a = 0; a <= 5; ++a) {
        for (int b = 0; b <= 5; ++b) {
            double q = 0.0;
            for (const auto& p : gauss_3x3().points) {
                q += p.weight * std::pow(p.xi, a) * std::pow(p.eta, b);
            }
            const double ea = a % 2 ? 0.0 : 2.0 / (a + 1), eb = b % 2 ? 0.0 : 2.0 / (b + 1);
            quad = std::max(quad, std::abs(q - ea * eb));
        }
    }
    c.expect(quad < 1e-13, "quadrature exactness to degree 5");

    const Material mat;
    const SearchDirections sd = build_search_directions(mat, 2.5, 5e-3, 5e-3, 5e-4);
    const VoigtMatrix V = voigt_viscosity(mat);
    c.expect(V.llt().info() == Eigen::Success && (V - V.transpose()).norm() == 0.0, "Voigt operator SPD");
    const VoigtMatrix inv = invert_local_operator(mat, sd);
    std::normal_distribution<double> nd;
    double round_trip = 0.0;
    for (int k = 0; k < 100; ++k) {
        const Voigt x(nd(rng), nd(rng), nd(rng));
        round_trip = std::max(round_trip, (inv * ((V + sd.H_eps_sigma) * x) - x).norm() / x.norm());
    }
    c.expect(round_trip < 1e-12, "Voigt inverse round trip");

    // local-stage membership identities
    const int nt = 10, ng = 3;
    const double dt = 5e-4;
    GaussHistory h(nt, ng);
    for (int n = 0; n < nt; ++n) {
        for (int g = 0; g < ng; ++g) {
            h.A_bar(n, g) = Voigt(nd(rng), nd(rng), nd(rng));
            h.beta_bar(n, g) = Vector2(nd(rng), nd(rng)) * 1e-3;
            h.delta_bar(n, g) = Vector2(nd(rng), nd(rng)) * 1e-4;
            h.gamma_bar(n, g) = sd.H_rho_q * mat.rho0() * (1.0 + 0.1 * nd(rng));
        }
    }
    run_local_stage(h, mat, sd, dt);
    double gamma_defect = 0.0;
    for (int g = 0; g < ng; ++g) {
        double rho_prev = mat.rho0();
        Vector2 v_prev = Vector2::Zero();
        for (int n = 0; n < nt; ++n) {
            const double rho = h.rho_hat(n, g);
            const Vector2 v = h.v_hat(n, g);
            const Voigt s = V * h.eps_hat(n, g) - gas_pressure(mat, rho) * voigt_identity();
            gamma_defect = std::max(gamma_defect, (h.sigma_hat(n, g) - s).norm() / (1.0 + s.norm()));
            const Vector2 G = rho * (v - v_prev) / dt;
            gamma_defect = std::max(gamma_defect, (h.Gamma_hat(n, g) - G).norm() / (1.0 + G.norm()));
            gamma_defect = std::max(gamma_defect, (h.W_hat(n, g) - rho * v).norm() / (1.0 + (rho * v).norm()));
            gamma_defect = std::max(gamma_defect, std::abs(h.q_hat(n, g) - (rho - rho_prev) / dt) / (rho / dt));
            rho_prev = rho;
            v_prev = v;
        }
    }
    c.expect(gamma_defect < 1e-11, "local-stage membership identities");

    // backward Euler on rho' = -H rho
    double prev = 0.0, ode_ratio = 0.0;
    for (int k = 0; k < 3; ++k) {
        const int n = 40 << k;
        const auto r = solve_rho_hat(std::vector<double>(n, 0.0), 1.0, 1.0 / n, 2.0);
        const double err = std::abs(r.back() - std::exp(-2.0));
        if (prev > 0.0) {
            ode_ratio = prev / err;
        }
        prev = err;
    }
    c.expect(std::abs(ode_ratio - 2.0) < 0.1, "backward Euler order 1 on the ODE");

    // indicator identities
    const Mesh m = generate_rectangle(1.0, 0.5, 2, 1);
    const GaussGeometry geo(m);
    GaussHistory loc(2, geo.n_points());
    GaussFields glob(2, geo.n_points());
    for (int n = 0; n < 2; ++n) {
        for (int g = 0; g < geo.n_points(); ++g) {
            loc.rho_hat(n, g) = glob.rho(n, g) = 1.0 + 0.1 * g;
            loc.eps_hat(n, g) = glob.eps(n, g) = Voigt(0.1 * n, 0.2, g);
        }
    }
    const Indicators same = indicators(loc, glob, geo, mat, sd, 0.1);
    c.expect(same.eta_rho == 0.0 && same.eta_v == 0.0, "indicators vanish on equal fields");
    for (int n = 0; n < 2; ++n) {
        for (int g = 0; g < geo.n_points(); ++g) {
            glob.rho(n, g) *= 2.0;
            glob.eps(n, g) *= 2.0;
        }
    }
    const Indicators twice = indicators(loc, glob, geo, mat, sd, 0.1);
    c.expect(std::abs(twice.eta_rho - 0.63246) < 1e-5 && std::abs(twice.eta_v - 0.63246) < 1e-5,
             "indicators 0.63246 on the doubled field");

    // global operators factorize
    const Mesh ch = generate_rectangle(2.5, 0.4, 32, 8);
    const GaussGeometry chg(ch);
    const GlobalOperators ops = global_operators(ch, chg, mat, sd);
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> l1{Eigen::SparseMatrix<double>(ops.H_rho)};
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> l2{Eigen::SparseMatrix<double>(ops.H_v)};
    c.expect(l1.info() == Eigen::Success && l2.info() == Eigen::Success, "operator Cholesky");
}

void monolithic_order_check(Checks& c)
{
    auto cfg = [](int n) {
        return parse_config("case = c\nmesh.nx = 8\nmesh.ny = 2\nbc.inflow = pressure 2\nbc.outflow = pressure 1\n"
                            "bc.walls = no_slip\ntime.t_end = 1e-6\ntime.n_steps = " +
                            std::to_string(n) + "\n");
    };
    const Mesh m = build_mesh(cfg(1));
    const Solution ref = monolithic_solve(cfg(640), m);
    const Vector v_ref = ref.velocity.col(640);
    double prev = 0.0, ratio = 0.0;
    for (int n : {10, 20, 40}) {
        const Solution s = monolithic_solve(cfg(n), m);
        const double err = (s.velocity.col(n) - v_ref).norm() / v_ref.norm();
        if (prev > 0.0) {
            ratio = prev / err;
        }
        prev = err;
    }
    c.expect(ratio > 1.65 && ratio < 2.35, "backward Euler order 1 on the monolithic path");
}

void determinism_check(Checks& c)
{
    CaseConfig cfg = parse_config("case = c\nmesh.nx = 16\nmesh.ny = 4\nbc.inflow = pressure 2\n"
                                  "bc.outflow = pressure 1\nbc.walls = no_slip\ntime.t_end = 5e-3\n"
                                  "time.n_steps = 20\nsolver.max_iterations = 20\n");
    const Mesh m = build_mesh(cfg);
    const Solution a = run_latin(cfg, m);
    const Solution b = run_latin(cfg, m);
    bool same = a.history.size() == b.history.size();
    for (size_t i = 0; same && i < a.history.size(); ++i) {
        same = a.history[i].eta_v == b.history[i].eta_v && a.history[i].eta_rho == b.history[i].eta_rho &&
               a.history[i].n_modes_v == b.history[i].n_modes_v && a.history[i].n_modes_rho == b.history[i].n_modes_rho;
    }
    c.expect(same, "bitwise-identical histories");
}

void criterion_8()
{
    Checks c;
    unit_checks(c);
    monolithic_order_check(c);
    determinism_check(c);
    std::ostringstream os;
    os << c.total - c.failed.size() << "/" << c.total << " checks passed";
    for (const auto& f : c.failed) {
        os << "; failed: " << f;
    }
    report(8, c.failed.empty(), os.str());
}

} // namespace

int main()
{
    const auto t0 = Clock::now();
    guarded(8, criterion_8);

    const CaseConfig channel = load_config(LATINFLOW_CASES_DIR "/channel.case");
    std::optional<Run> fine;
    std::optional<Run> coarse;
    guarded(1, [&] {
        std::cerr << "channel 128x16\n";
        fine = run_case(channel);
        CaseConfig c = channel;
        c.mesh.nx = 32;
        c.mesh.ny = 8;
        std::cerr << "channel 32x8\n";
        coarse = run_case(c);
        criterion_1(*fine, *coarse);
    });
    auto with_fine = [&](int id, void (*body)(const Run&)) {
        guarded(id, [&] {
            if (!fine) {
                throw std::runtime_error("channel run unavailable");
            }
            body(*fine);
        });
    };
    with_fine(2, criterion_2);
    with_fine(3, criterion_3);
    with_fine(4, criterion_4);
    with_fine(6, criterion_6);
    with_fine(5, criterion_5);
    guarded(7, criterion_7);
    std::ofstream file("acceptance_report.txt");
    for (const auto& [id, line] : results) {
        std::cout << line << '\n';
        file << line << '\n';
    }
    std::cout << fmt("total %.1f s", seconds_since(t0)) << std::endl;
    return 0;
}
