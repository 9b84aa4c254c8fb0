#include <clocale>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "zesi/exponents.hpp"
#include "zesi/graph.hpp"
#include "zesi/io.hpp"
#include "zesi/kappa.hpp"
#include "zesi/prob.hpp"
#include "zesi/scheme.hpp"
#include "zesi/types.hpp"
#include "zesi/util.hpp"
#include "zesi/wz.hpp"

namespace {

using zesi::Json;

struct SubFlags {
    std::string input;
    std::string out;
    std::string format;
    std::uint64_t seed = 0;
    int grid = 0;
    int threads = 1;
    int cap_vertices = 64;
    std::uint64_t cap_typeclass = 4096;
    CLI::Option* seed_opt = nullptr;
};

SubFlags* add_common(CLI::App* sub, std::vector<std::unique_ptr<SubFlags>>& store, const char* default_format) {
    store.push_back(std::make_unique<SubFlags>());
    SubFlags* f = store.back().get();
    f->format = default_format;
    sub->add_option("input", f->input, "problem file (JSON)")->required();
    sub->add_option("--out", f->out, "write the result here instead of stdout");
    sub->add_option("--format", f->format, "output format")->check(CLI::IsMember({"json", "csv"}));
    f->seed_opt = sub->add_option("--seed", f->seed, "override the seed field of the problem file");
    sub->add_option("--grid", f->grid, "simplex grid resolution override (0 keeps defaults)");
    sub->add_option("--threads", f->threads, "worker thread cap")->check(CLI::PositiveNumber);
    sub->add_option("--cap-vertices", f->cap_vertices, "largest graph accepted");
    sub->add_option("--cap-typeclass", f->cap_typeclass, "largest type class the scheme colors");
    return f;
}

Json load_problem(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw zesi::ValidationError("cannot open input file: " + path);
    try {
        return Json::parse(in);
    } catch (const Json::exception& e) {
        throw zesi::ValidationError(std::string("JSON parse error: ") + e.what());
    }
}

void emit(const SubFlags& f, const std::string& text) {
    if (f.out.empty()) {
        std::fputs(text.c_str(), stdout);
        return;
    }
    std::ofstream o(f.out, std::ios::binary);
    if (!o) throw zesi::ValidationError("cannot open output file: " + f.out);
    o << text;
}

void require_json_format(const SubFlags& f, const char* cmd) {
    if (f.format != "json")
        throw zesi::ValidationError(std::string(cmd) + ": only json output is available");
}

void check_vertex_cap(const zesi::Graph& g, const SubFlags& f) {
    if (g.vertex_count() > f.cap_vertices)
        throw zesi::CapExceeded("graph has " + std::to_string(g.vertex_count()) + " vertices, cap is " +
                                std::to_string(f.cap_vertices));
}

void cmd_kappa(const SubFlags& f) {
    require_json_format(f, "kappa");
    Json root = load_problem(f.input);
    zesi::reject_unknown_keys(root, {"graph", "prior"}, "kappa input");
    zesi::Graph g = zesi::parse_graph(zesi::require_field(root, "graph", "kappa input"));
    check_vertex_cap(g, f);
    zesi::Distribution q = zesi::parse_distribution(zesi::require_field(root, "prior", "kappa input"), "prior");
    auto sol = zesi::kappa(g, q);
    Json out{{"value_bits", sol.value_bits},
             {"feasibility_residual", sol.feasibility_residual},
             {"iterations", sol.iterations},
             {"argmax_channel", zesi::json_matrix(sol.argmax_channel.rows())}};
    emit(f, zesi::dump_canonical(out));
}

void cmd_exponents(const SubFlags& f) {
    Json root = load_problem(f.input);
    zesi::reject_unknown_keys(root, {"joint", "rates"}, "exponents input");
    zesi::JointDistribution joint = zesi::parse_joint(zesi::require_field(root, "joint", "exponents input"));
    std::vector<double> rates = zesi::parse_vector(zesi::require_field(root, "rates", "exponents input"), "rates");
    if (rates.empty()) throw zesi::ValidationError("exponents input: rates must be nonempty");
    for (std::size_t i = 1; i < rates.size(); ++i)
        if (!(rates[i] > rates[i - 1]))
            throw zesi::ValidationError("exponents input: rates must be strictly increasing");
    zesi::ExponentGrid grid;
    if (f.grid > 0) grid.resolution = f.grid;
    grid.threads = f.threads;
    auto sweep = zesi::exponent_sweep(joint, rates, grid);
    if (f.format == "csv") {
        std::string text = "rate,e_new,e_oh,e_ck,e_sp,gamma_gx_log2\n";
        for (const auto& row : sweep.rows) {
            text += zesi::fmt12(row.rate) + "," + zesi::fmt12(row.e_new.value) + "," + zesi::fmt12(row.e_oh.value) +
                    "," + zesi::fmt12(row.e_ck.value) + "," + zesi::fmt12(row.e_sp.value) + "," +
                    zesi::fmt12(sweep.log2_gamma_gx) + "\n";
        }
        emit(f, text);
        return;
    }
    Json rows = Json::array();
    for (const auto& row : sweep.rows)
        rows.push_back(Json{{"rate", row.rate},
                            {"e_new", row.e_new.value},
                            {"e_oh", row.e_oh.value},
                            {"e_ck", row.e_ck.value},
                            {"e_sp", row.e_sp.value}});
    Json out{{"gamma_gx", sweep.gamma_gx},
             {"gamma_gx_log2", sweep.log2_gamma_gx},
             {"joint_resolution", sweep.joint_resolution},
             {"marginal_resolution", sweep.marginal_resolution},
             {"rows", rows}};
    emit(f, zesi::dump_canonical(out));
}

void cmd_simulate(const SubFlags& f) {
    require_json_format(f, "simulate");
    Json root = load_problem(f.input);
    zesi::reject_unknown_keys(root, {"joint", "n", "rate", "trials", "seed"}, "simulate input");
    zesi::JointDistribution joint = zesi::parse_joint(zesi::require_field(root, "joint", "simulate input"));
    auto n = zesi::parse_integer(zesi::require_field(root, "n", "simulate input"), "simulate.n");
    double rate = zesi::parse_number(zesi::require_field(root, "rate", "simulate input"), "simulate.rate");
    auto trials = zesi::parse_integer(zesi::require_field(root, "trials", "simulate input"), "simulate.trials");
    auto seed = zesi::parse_integer(zesi::require_field(root, "seed", "simulate input"), "simulate.seed");
    if (n < 1 || n > 30) throw zesi::ValidationError("simulate.n: must lie in [1, 30]");
    if (trials < 0) throw zesi::ValidationError("simulate.trials: must be nonnegative");
    std::uint64_t use_seed = f.seed_opt->count() ? f.seed : static_cast<std::uint64_t>(seed);
    auto rep = zesi::simulate(joint, static_cast<int>(n), rate, static_cast<std::uint64_t>(trials), use_seed,
                              f.threads, f.cap_typeclass);

    Json per_trials = Json::array(), per_errors = Json::array();
    for (auto v : rep.per_type_trials) per_trials.push_back(v);
    for (auto v : rep.per_type_errors) per_errors.push_back(v);
    Json out{{"config", Json{{"n", rep.n}, {"rate", rep.rate}, {"trials", rep.trials}, {"seed", rep.seed}}},
             {"errors", rep.errors},
             {"error_rate", rep.error_rate},
             {"empirical_exponent", rep.empirical_exponent},
             {"m1_size", rep.m1_size},
             {"type_count", rep.type_count},
             {"type_overhead_bound", rep.type_overhead_bound},
             {"colored_types", rep.colored_types},
             {"binned_types", rep.binned_types},
             {"exact_gamma_types", rep.exact_gamma_types},
             {"colored_trials", rep.colored_trials},
             {"colored_errors", rep.colored_errors},
             {"per_type_trials", per_trials},
             {"per_type_errors", per_errors}};
    emit(f, zesi::dump_canonical(out));
}

void cmd_wr_bound(const SubFlags& f) {
    require_json_format(f, "wr-bound");
    Json root = load_problem(f.input);
    zesi::reject_unknown_keys(root, {"graph", "n_values"}, "wr-bound input");
    zesi::Graph g = zesi::parse_graph(zesi::require_field(root, "graph", "wr-bound input"));
    check_vertex_cap(g, f);
    std::vector<std::int64_t> n_values;
    if (root.contains("n_values")) {
        for (const auto& v : root["n_values"]) {
            auto n = zesi::parse_integer(v, "wr-bound.n_values");
            if (n < 1 || n > 16) throw zesi::ValidationError("wr-bound.n_values: entries must lie in [1, 16]");
            n_values.push_back(n);
        }
    }
    zesi::SimplexSearchOptions opt;
    if (f.grid > 0) opt.grid_resolution = f.grid;
    opt.threads = f.threads;
    auto wb = zesi::witsenhausen_bound(g, opt);
    Json finite = Json::array();
    for (auto n : n_values) {
        auto fn = zesi::witsenhausen_finite_n(g, static_cast<int>(n));
        Json counts = Json::array();
        for (int c : fn.argmax.counts) counts.push_back(c);
        finite.push_back(Json{{"n", n}, {"value_bits", fn.value_bits}, {"argmax_type", counts}});
    }
    Json out{{"kappa_max", wb.kappa_max},
             {"argmax_q", zesi::json_vector(wb.argmax_q)},
             {"log2_gamma", wb.log2_gamma},
             {"gamma_exact", wb.gamma_exact},
             {"min_bound", wb.bound},
             {"finite_n_table", finite}};
    emit(f, zesi::dump_canonical(out));
}

void cmd_zec(const SubFlags& f) {
    require_json_format(f, "zec");
    Json root = load_problem(f.input);
    zesi::reject_unknown_keys(root, {"channel"}, "zec input");
    zesi::Channel w = zesi::parse_channel(zesi::require_field(root, "channel", "zec input"));
    zesi::Graph gw = zesi::characteristic_graph(w);
    check_vertex_cap(gw, f);
    zesi::SimplexSearchOptions opt;
    if (f.grid > 0) opt.grid_resolution = f.grid;
    opt.threads = f.threads;
    auto res = zesi::zero_error_capacity_lb(w, opt);
    Json out{{"lb_bits", res.lb_bits}, {"argmax_prior", zesi::json_vector(res.argmax_prior)}};
    if (gw.vertex_count() <= 64) {
        int alpha = zesi::independence_number(gw, 64);
        out["alpha_check"] = alpha;
        out["identity_residual"] = std::abs(res.lb_bits - std::log2(static_cast<double>(alpha)));
    } else {
        out["warning"] = "alpha check skipped: vertex count above the exact cap";
    }
    emit(f, zesi::dump_canonical(out));
}

}  // namespace

int main(int argc, char** argv) {
    std::setlocale(LC_ALL, "C");
    CLI::App app{"graph-entropy source coding toolkit"};
    app.require_subcommand(1);
    std::vector<std::unique_ptr<SubFlags>> store;
    std::function<void()> run;

    auto* sk = app.add_subcommand("kappa", "max-entropy graph functional of a prior");
    SubFlags* fk = add_common(sk, store, "json");
    sk->callback([&run, fk] { run = [fk] { cmd_kappa(*fk); }; });

    auto* se = app.add_subcommand("exponents", "error-exponent sweep for a joint source");
    SubFlags* fe = add_common(se, store, "csv");
    se->callback([&run, fe] { run = [fe] { cmd_exponents(*fe); }; });

    auto* ss = app.add_subcommand("simulate", "Monte Carlo run of the coloring/binning scheme");
    SubFlags* fs = add_common(ss, store, "json");
    ss->callback([&run, fs] { run = [fs] { cmd_simulate(*fs); }; });

    auto* sw = app.add_subcommand("wr-bound", "zero-error rate bounds for a graph");
    SubFlags* fw = add_common(sw, store, "json");
    sw->callback([&run, fw] { run = [fw] { cmd_wr_bound(*fw); }; });

    auto* sz = app.add_subcommand("zec", "zero-error capacity lower bound for a channel");
    SubFlags* fz = add_common(sz, store, "json");
    sz->callback([&run, fz] { run = [fz] { cmd_zec(*fz); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        run();
    } catch (const zesi::ValidationError& e) {
        std::fprintf(stderr, "validation error: %s\n", e.what());
        return 2;
    } catch (const zesi::CapExceeded& e) {
        std::fprintf(stderr, "cap exceeded: %s\n", e.what());
        return 4;
    } catch (const zesi::SolverError& e) {
        std::fprintf(stderr, "solver error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}
