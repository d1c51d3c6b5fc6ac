#include <cmath>
#include <sstream>

#include "ccr/experiment.hpp"
#include "ccr/zeroforcing.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace ccr;

namespace {

ExperimentConfig small_config(std::size_t n = 60) {
    ExperimentConfig cfg;
    cfg.realizations = n;
    cfg.pbs_snr_db = {6.0, 10.0};
    cfg.budget_db = {0.0, 10.0, 20.0, 30.0, 100.0};
    cfg.cu_rates = {0.1, 1.0};
    cfg.xi2 = {0.0, 0.05, 0.2};
    return cfg;
}

ExperimentConfig scalar_config(double g0p, double g1) {
    ExperimentConfig cfg;
    cfg.sys.M = 1;
    cfg.sys.N = 1;
    cfg.sys.K = 1;
    cfg.gamma0p = g0p;
    cfg.gamma = {g1};
    return cfg;
}

template <class F>
std::string render(F&& f) {
    std::ostringstream os;
    f(os);
    return os.str();
}

}  // namespace

TEST_CASE("config parsing") {
    std::istringstream in(R"(# comment
M = 2
N=3
pbs_snr_db = 1, 2 ,3
solvers = alg1, czf
fading = rayleigh
gamma0p = 0.5   # trailing comment
parallel = false
)");
    const ExperimentConfig cfg = parse_config(in);
    CHECK(cfg.sys.M == 2);
    CHECK(cfg.sys.N == 3);
    CHECK(cfg.pbs_snr_db == RVector{1, 2, 3});
    CHECK(cfg.solvers == std::vector<SolverId>{SolverId::alg1, SolverId::czf});
    CHECK(cfg.sys.fading == FadingMode::rayleigh);
    CHECK(*cfg.gamma0p == 0.5);
    CHECK(cfg.policy == ExecPolicy::serial);

    ExperimentConfig c2;
    CHECK_THROWS_AS(apply_setting(c2, "bogus", "1"), Error);
    CHECK_THROWS_AS(apply_setting(c2, "M", "two"), Error);
    CHECK_THROWS_AS(apply_setting(c2, "solvers", "alg3"), Error);
    std::istringstream bad("M 2\n");
    CHECK_THROWS_AS(parse_config(bad), Error);

    ExperimentConfig c3;
    c3.realizations = 0;
    CHECK_THROWS_AS(c3.validate(), Error);
    c3 = {};
    c3.xi2.clear();
    CHECK_THROWS_AS(c3.validate(), Error);
}

TEST_CASE("for_each_realization rethrows the first failure") {
    for (auto policy : {ExecPolicy::serial, ExecPolicy::parallel}) {
        std::vector<int> hit(20, 0);
        CHECK_THROWS_WITH(for_each_realization(
                              20,
                              [&](std::size_t i) {
                                  hit[i] = 1;
                                  if (i == 7 || i == 13) throw std::runtime_error("boom " + std::to_string(i));
                              },
                              policy),
                          "boom 7");
        for (int h : hit) CHECK(h == 1);
    }
}

TEST_CASE("serial and parallel runners write identical CSV") {
    ExperimentConfig cfg = small_config(40);
    cfg.solvers = {SolverId::alg2, SolverId::czf, SolverId::pzf};
    ExperimentConfig ser = cfg;
    ser.policy = ExecPolicy::serial;
    ExperimentConfig par = cfg;
    par.policy = ExecPolicy::parallel;

    auto sweep = [](const ExperimentConfig& c) {
        return render([&](std::ostream& os) { write_sweep_csv(os, c, cmd_sweep_pbs(c)); });
    };
    auto cdf = [](const ExperimentConfig& c) {
        return render([&](std::ostream& os) { write_cdf_csv(os, c, cmd_cdf(c)); });
    };
    auto outage = [](const ExperimentConfig& c) {
        return render([&](std::ostream& os) { write_outage_csv(os, c, cmd_outage(c)); });
    };
    auto robust = [](const ExperimentConfig& c) {
        return render([&](std::ostream& os) { write_robustness_csv(os, c, cmd_robustness(c)); });
    };
    auto eta = [](const ExperimentConfig& c) {
        return render([&](std::ostream& os) { write_eta_csv(os, c, cmd_eta(c)); });
    };
    CHECK(sweep(ser) == sweep(par));
    CHECK(cdf(ser) == cdf(par));
    CHECK(outage(ser) == outage(par));
    CHECK(robust(ser) == robust(par));
    CHECK(eta(ser) == eta(par));
    // Repeated runs are bit identical as well.
    CHECK(sweep(par) == sweep(par));
}

TEST_CASE("csv preamble and exclusion accounting") {
    ExperimentConfig cfg = small_config(80);
    cfg.sys.P0 = 1.0;
    const GridResult r = cmd_sweep_pbs(cfg);
    const std::string csv = render([&](std::ostream& os) { write_sweep_csv(os, cfg, r); });
    CHECK(csv.rfind("# ccr-csv v1 command=sweep-pbs seed=1 realizations=80", 0) == 0);
    for (std::size_t k = 0; k < r.axis.size(); ++k) {
        const RunSummary s = summarize(r.outcomes[k], r.solvers);
        CHECK(s.cooperation + s.mode_ii + s.infeasible == s.total);
        CHECK(r.paired(k).size() == s.cooperation);
    }
}

TEST_CASE("mode II realizations are classified, not solved") {
    ExperimentConfig cfg = small_config(30);
    cfg.sys.r0 = 0.1;  // the direct link alone meets this rate
    const InstanceOutcome o = solve_realization(cfg, cfg.sys, 0);
    CHECK(o.cls == InstanceClass::mode_ii);
    for (const auto& r : o.results) CHECK(*r.error == ErrorKind::ModeII);
}

TEST_CASE("convergence command") {
    SUBCASE("scalar instance") {
        const ExperimentConfig cfg = scalar_config(0.1, 1.0);
        const ConvergenceResult r = cmd_convergence(cfg, fx::scalar_channels());
        std::vector<ConvergenceRow> a1, a2;
        for (const auto& row : r.rows) (row.algorithm == "alg1" ? a1 : a2).push_back(row);
        CHECK(a2.size() <= 3);
        CHECK(a2.back().rel_change <= 1e-10);
        CHECK(a2.back().dual_objective == doctest::Approx(15.0 / 7.0).epsilon(1e-12));
        REQUIRE(a1.size() > 10);
        // Linear: strictly decreasing changes with a settled ratio.
        for (std::size_t k = 1; k < a1.size(); ++k)
            if (a1[k - 1].rel_change > 1e-14) CHECK(a1[k].rel_change < a1[k - 1].rel_change);
        const std::size_t k = a1.size() / 2;
        const double q1 = a1[k].rel_change / a1[k - 1].rel_change;
        const double q2 = a1[k + 1].rel_change / a1[k].rel_change;
        CHECK(q1 == doctest::Approx(q2).epsilon(0.02));
        CHECK(q1 == doctest::Approx(0.3).epsilon(0.02));
    }
    SUBCASE("zero targets give a single row with no change") {
        const ExperimentConfig cfg = scalar_config(0.0, 0.0);
        const ConvergenceResult r = cmd_convergence(cfg, fx::scalar_channels());
        REQUIRE(r.rows.size() == 2);  // one per algorithm
        for (const auto& row : r.rows) {
            CHECK(row.iter == 1);
            CHECK(row.rel_change == 0.0);
            CHECK(row.dual_objective == 0.0);
        }
    }
    SUBCASE("infeasible input exhausts the attempt cap") {
        const ExperimentConfig cfg = scalar_config(0.1, 10.0);
        try {
            cmd_convergence(cfg, fx::scalar_channels());
            FAIL("expected NoFeasibleInstance");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::NoFeasibleInstance);
        }
    }
    SUBCASE("skips infeasible realizations") {
        ExperimentConfig cfg = small_config();
        cfg.sys.P0 = from_db(4.0);
        cfg.sys.M = 1;
        const ConvergenceResult r = cmd_convergence(cfg);
        CHECK(r.index == cfg.start_index + r.skipped);
        CHECK_FALSE(r.rows.empty());
        cfg.attempt_cap = 1;
        cfg.gamma = {1e6};
        CHECK_THROWS_AS(cmd_convergence(cfg), Error);
    }
}

TEST_CASE("sweep: sandwich on paired means") {
    ExperimentConfig cfg = small_config(200);
    cfg.sys.fading = FadingMode::rayleigh;
    const GridResult r = cmd_sweep_pbs(cfg);
    for (std::size_t k = 0; k < r.axis.size(); ++k) {
        for (std::size_t i : r.paired(k)) {
            const auto& o = r.outcomes[k][i];
            const double opt = o.find(SolverId::alg2)->power;
            CHECK(opt <= std::min(o.find(SolverId::czf)->power, o.find(SolverId::pzf)->power) * (1 + 1e-8));
        }
        CHECK(r.mean_db(k, SolverId::alg2).mean <= r.mean_db(k, SolverId::czf).mean);
        CHECK(r.paired_diff_db(k, SolverId::pzf, SolverId::czf).mean > 0.0);
    }
}

TEST_CASE("cdf: CZF vs PZF ordering per realization for M = 1") {
    ExperimentConfig cfg = small_config(300);
    cfg.sys.M = 1;
    cfg.sys.fading = FadingMode::rayleigh;
    cfg.solvers = {SolverId::czf, SolverId::pzf};
    cfg.cu_rates = {0.1, 0.5, 1.0};
    const GridResult r = cmd_cdf(cfg);
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(r.paired(k).size() > 200);
        for (std::size_t i : r.paired(k)) {
            const double pc = r.outcomes[k][i].find(SolverId::czf)->power;
            const double pp = r.outcomes[k][i].find(SolverId::pzf)->power;
            if (k == 0) CHECK(pp <= pc * (1 + 1e-12));
            if (k == 1) CHECK(std::abs(pc - pp) <= 1e-9 * pc);
            if (k == 2) CHECK(pc <= pp * (1 + 1e-12));
        }
    }
    const std::string csv = render([&](std::ostream& os) { write_cdf_csv(os, cfg, r); });
    CHECK(csv.find("cu_rate,solver,rank,power_db,cdf,realization") != std::string::npos);
}

TEST_CASE("outage: monotone and never worse than no cooperation") {
    ExperimentConfig cfg = small_config(300);
    const OutageResult r = cmd_outage(cfg);
    CHECK(r.solver == SolverId::alg2);
    for (std::size_t k = 0; k < r.budget_db.size(); ++k) {
        CHECK(r.p_coop[k] <= r.p_nocoop[k]);
        if (k > 0) CHECK(r.p_coop[k] <= r.p_coop[k - 1]);
    }
    // At an enormous budget only infeasible realizations remain in outage.
    double infeasible = 0.0;
    for (std::size_t i = 0; i < r.coop_power.size(); ++i)
        infeasible += r.nocoop_outage[i] && std::isinf(r.coop_power[i]);
    CHECK(r.p_coop.back() == doctest::Approx(infeasible / r.coop_power.size()));

    ExperimentConfig half = cfg;
    half.nocoop_full_band = false;
    const OutageResult h = cmd_outage(half);
    for (std::size_t k = 0; k < r.budget_db.size(); ++k) CHECK(h.p_nocoop[k] >= r.p_nocoop[k]);
}

TEST_CASE("robustness: perfect CSI meets the PU rate") {
    ExperimentConfig cfg = small_config(100);
    cfg.sys.M = 1;
    const RobustnessResult r = cmd_robustness(cfg);
    REQUIRE(r.used > 50);
    for (std::size_t s = 0; s < r.solvers.size(); ++s)
        for (double rate : r.rates[0][s]) CHECK(rate >= cfg.sys.r0 - 1e-9);
    for (std::size_t k = 0; k < r.xi2.size(); ++k) CHECK(r.rates[k][0].size() == r.used);
    CHECK(r.nocoop.size() == r.used);
}

TEST_CASE("eta: message counts and ratio") {
    ExperimentConfig cfg = small_config(50);
    const EtaResult r = cmd_eta(cfg);
    REQUIRE_FALSE(r.rows.empty());
    for (const auto& row : r.rows) {
        CHECK(row.messages == 2 * row.n_iter * 3 + 16);
        CHECK(row.messages == row.predicted);
        CHECK(row.full_csi == 72);
        CHECK(row.eta == signaling_ratio(row.n_iter, 3, 4));
    }
    CHECK(r.rows.size() == r.summary.cooperation);
}

TEST_CASE("solve csv") {
    ExperimentConfig cfg = small_config();
    cfg.solvers = {SolverId::alg1, SolverId::alg2, SolverId::alg1_distributed, SolverId::czf, SolverId::pzf};
    const ChannelSet ch = generate_instance(cfg.sys, 0);
    const InstanceOutcome o = solve_channels(cfg, ch, experiment_targets(cfg, cfg.sys, ch), 0);
    REQUIRE(o.cls == InstanceClass::cooperation);
    const double opt = o.find(SolverId::alg2)->power;
    CHECK(o.find(SolverId::alg1)->power == doctest::Approx(opt).epsilon(1e-8));
    CHECK(o.find(SolverId::alg1_distributed)->power == doctest::Approx(opt).epsilon(1e-8));
    const std::string csv = render([&](std::ostream& os) { write_solve_csv(os, cfg, ch, o); });
    CHECK(csv.find("alg1-distributed,ok,") != std::string::npos);
}

TEST_CASE("statistics helpers") {
    const MeanSe m = mean_se(RVector{1.0, 2.0, 3.0, 4.0});
    CHECK(m.mean == 2.5);
    CHECK(m.se == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
    CHECK(to_db(100.0) == doctest::Approx(20.0));
    CHECK(from_db(30.0) == doctest::Approx(1000.0));
    ChannelSet ch = fx::scalar_channels(10.0);
    ch.h0p = {1.0};
    CHECK(nocoop_rate(ch, true) == doctest::Approx(std::log2(11.0)));
    CHECK(nocoop_rate(ch, false) == doctest::Approx(0.5 * std::log2(11.0)));
}
