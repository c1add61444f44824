#include "cahiers/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <ostream>
#include <random>

#include <CLI11.hpp>

#include "cahiers/bicomplex.hpp"
#include "cahiers/json_io.hpp"
#include "cahiers/parser.hpp"
#include "cahiers/variational.hpp"

namespace cahiers {

namespace {

struct CliError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Config {
    unsigned long long seed = 0;
    double tol = kOnShellTolerance;
    bool json = false;
    int threads = 1;
};

Json config_json(const Config& c) {
    return Json{{"seed", c.seed},
                {"tolerance", c.tol},
                {"format", c.json ? "json" : "text"},
                {"threads", c.threads}};
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::vector<std::string> split_on(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        out.push_back(s.substr(start, pos - start));
        if (pos == std::string::npos) return out;
        start = pos + 1;
    }
}

std::vector<std::string> parse_names(const std::string& s, const char* what) {
    std::vector<std::string> out = split_on(s, ',');
    for (const std::string& n : out)
        if (n.empty()) throw CliError(std::string("empty name in ") + what + " list '" + s + "'");
    return out;
}

// comma-separated "name=text" pairs
std::vector<std::pair<std::string, std::string>> parse_bindings(const std::string& s, const char* what) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const std::string& chunk : split_on(s, ',')) {
        const std::size_t eq = chunk.find('=');
        if (eq == std::string::npos || eq == 0)
            throw CliError(std::string("bad ") + what + " entry '" + chunk + "': expected name=value");
        for (const auto& [name, value] : out)
            if (name == chunk.substr(0, eq))
                throw CliError(std::string("duplicate ") + what + " entry '" + chunk.substr(0, eq) + "'");
        out.emplace_back(chunk.substr(0, eq), chunk.substr(eq + 1));
    }
    return out;
}

SectionData parse_section(const std::string& s) {
    SectionData phi;
    for (const auto& [name, text] : parse_bindings(s, "section")) phi[name] = parse(text);
    return phi;
}

void emit(const Config& cfg, std::ostream& out, const std::string& text, Json machine) {
    if (cfg.json) {
        machine["config"] = config_json(cfg);
        out << machine.dump(2) << "\n";
    } else {
        out << text;
    }
}

int run_weil_eval(const Config& cfg, const std::string& alg_s, const std::string& map_s,
                  const std::string& expr_s, std::ostream& out) {
    const WeilAlgebraPtr alg = parse_algebra_spec(alg_s);
    std::vector<std::pair<std::string, WeilElement>> binds;
    for (const auto& [name, text] : parse_bindings(map_s, "map"))
        binds.emplace_back(name, parse_element(text, alg));
    const WeilElement result = taylor_extend(parse(expr_s), binds);
    emit(cfg, out, result.str() + "\n",
         Json{{"algebra", algebra_to_json(alg)}, {"element", element_to_json(result)}, {"text", result.str()}});
    return 0;
}

int run_jet_prolong(const Config& cfg, const std::string& coords_s, const std::string& fields_s, int order,
                    const std::string& section_s, std::ostream& out) {
    const JetContext ctx(parse_names(coords_s, "coordinate"), parse_names(fields_s, "field"));
    const SectionData phi = parse_section(section_s);
    const auto table = prolong(ctx, phi, order);
    std::string text;
    Json jets = Json::object();
    for (const auto& [name, e] : table) {
        text += name + " = " + print(e) + "\n";
        jets[name] = Json{{"text", print(e)}, {"expr", expr_to_json(e)}};
    }
    emit(cfg, out, text,
         Json{{"coords", parse_names(coords_s, "coordinate")},
              {"fields", parse_names(fields_s, "field")},
              {"order", order},
              {"jets", std::move(jets)}});
    return 0;
}

int run_el_derive(const Config& cfg, const std::string& coords_s, const std::string& fields_s,
                  const std::string& lag_s, std::ostream& out) {
    const JetContext ctx(parse_names(coords_s, "coordinate"), parse_names(fields_s, "field"));
    const ELResult el = euler_lagrange(make_lagrangian(ctx, parse(lag_s)));
    std::string text;
    Json comps = Json::object();
    for (const auto& [field, e] : el.components) {
        text += "EL_" + field + " = " + print(e) + "\n";
        comps[field] = Json{{"text", print(e)}, {"expr", expr_to_json(e)}};
    }
    emit(cfg, out, text, Json{{"lagrangian", lag_s}, {"el", std::move(comps)}});
    return 0;
}

int run_el_check(const Config& cfg, const std::string& coords_s, const std::string& fields_s,
                 const std::string& lag_s, const std::string& section_s, const std::string& grid_s,
                 std::ostream& out) {
    const JetContext ctx(parse_names(coords_s, "coordinate"), parse_names(fields_s, "field"));
    const Lagrangian L = make_lagrangian(ctx, parse(lag_s));
    const ResidualReport r = residual(L, parse_section(section_s), parse_grid(grid_s));
    const bool ok = r.on_shell(cfg.tol);
    const std::string text = "residual = " + fmt_double(r.max_abs) + "\n" +
                             (ok ? "on-shell" : "off-shell") + " (tol " + fmt_double(cfg.tol) + ")\n";
    emit(cfg, out, text,
         Json{{"residual", r.max_abs},
              {"tol", cfg.tol},
              {"on_shell", ok},
              {"points", r.per_point.size()}});
    return ok ? 0 : 1;
}

int run_jacobi_derive(const Config& cfg, const std::string& coords_s, const std::string& fields_s,
                      const std::string& lag_s, std::ostream& out) {
    const JetContext ctx(parse_names(coords_s, "coordinate"), parse_names(fields_s, "field"));
    const JacobiOperator J = jacobi(make_lagrangian(ctx, parse(lag_s)));
    std::string text;
    Json coeffs = Json::array();
    for (const JacobiCoefficient& c : J.coefficients) {
        int col = 0;
        for (std::size_t b = 0; b < ctx.fields().size(); ++b)
            if (ctx.fields()[b] == c.col_field) col = static_cast<int>(b);
        const std::string var = ctx.jet_var_name(col, c.I);
        text += "J[" + c.row_field + "][" + var + "] = " + print(c.coefficient) + "\n";
        coeffs.push_back(Json{{"row", c.row_field},
                              {"var", var},
                              {"text", print(c.coefficient)},
                              {"expr", expr_to_json(c.coefficient)}});
    }
    if (J.coefficients.empty()) text = "0\n";
    emit(cfg, out, text, Json{{"lagrangian", lag_s}, {"coefficients", std::move(coeffs)}});
    return 0;
}

int run_bicomplex_verify(const Config& cfg, const std::string& coords_s, const std::string& fields_s,
                         int order, int trials, std::ostream& out) {
    const JetContext ctx(parse_names(coords_s, "coordinate"), parse_names(fields_s, "field"));
    const int max_p = std::min<int>(2, static_cast<int>(ctx.coords().size()));
    std::mt19937_64 rng(cfg.seed);
    std::uniform_int_distribution<int> p_pick(0, max_p), q_pick(0, 2);

    struct Failure {
        int trial;
        std::string identity;
        std::string form;
    };
    std::vector<Failure> failures;
    for (int t = 0; t < trials; ++t) {
        const int p = p_pick(rng), q = q_pick(rng);
        const LocalForm w = random_form(ctx, order, p, q, rng);
        const std::pair<const char*, LocalForm> checks[] = {
            {"d_H^2", d_H(d_H(w))},
            {"d_V^2", d_V(d_V(w))},
            {"d_H d_V + d_V d_H", d_H(d_V(w)) + d_V(d_H(w))},
        };
        for (const auto& [name, value] : checks)
            if (!is_zero_form(value, cfg.seed + static_cast<unsigned long long>(t)))
                failures.push_back({t, name, w.str()});
    }

    std::string text;
    for (const Failure& f : failures)
        text += "trial " + std::to_string(f.trial) + ": " + f.identity + " nonzero on " + f.form + "\n";
    text += std::to_string(trials - static_cast<int>(failures.size())) + "/" + std::to_string(trials) +
            " trials passed\n";
    text += failures.empty() ? "PASS\n" : "FAIL\n";

    Json jfails = Json::array();
    for (const Failure& f : failures)
        jfails.push_back(Json{{"trial", f.trial}, {"identity", f.identity}, {"form", f.form}});
    emit(cfg, out, text,
         Json{{"trials", trials}, {"order", order}, {"failures", std::move(jfails)},
              {"passed", failures.empty()}});
    return failures.empty() ? 0 : 1;
}

int run_perturb_expand(const Config& cfg, const std::string& fn_s, const std::string& at_s, int order,
                       std::ostream& out) {
    std::vector<std::pair<std::string, Expr>> point;
    for (const auto& [name, text] : parse_bindings(at_s, "point")) point.emplace_back(name, parse(text));
    const Perturbation p = perturb_expand(parse(fn_s), point, order);
    Json names = Json::array();
    for (const std::string& n : p.names) names.push_back(n);
    emit(cfg, out, p.str() + "\n",
         Json{{"order", order},
              {"names", std::move(names)},
              {"text", p.str()},
              {"polynomial", expr_to_json(p.polynomial())},
              {"element", element_to_json(p.element)}});
    return 0;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"symbolic-numeric engine for infinitesimal calculus on Weil algebras and jet bundles"};
    app.name("cahiers");
    app.require_subcommand(1);

    Config cfg;
    app.add_flag("--json", cfg.json, "emit machine-readable JSON");
    app.add_option("--seed", cfg.seed, "PRNG seed (env CAHIERS_SEED overrides)");
    app.add_option("--tol", cfg.tol, "tolerance for checks (default 1e-8)");
    app.add_option("--threads", cfg.threads, "worker threads (evaluation is sequential)")
        ->check(CLI::PositiveNumber);

    std::string w_alg, w_map, w_expr;
    auto* weil = app.add_subcommand("weil", "Weil-algebra arithmetic");
    weil->require_subcommand(1);
    weil->fallthrough();
    auto* weval = weil->add_subcommand("eval", "evaluate an expression under Weil-valued bindings");
    weval->fallthrough();
    weval->add_option("--algebra", w_alg, "algebra spec, e.g. \"D(1,1)\" or \"D(2,2);rel=e1*e2\"")
        ->required();
    weval->add_option("--map", w_map, "comma-separated var=element bindings, e.g. \"x=0+e1\"")->required();
    weval->add_option("--expr", w_expr, "expression to evaluate")->required();

    std::string j_coords, j_fields, j_section;
    int j_order = 1;
    auto* jet = app.add_subcommand("jet", "jet-bundle operations");
    jet->require_subcommand(1);
    jet->fallthrough();
    auto* jprolong = jet->add_subcommand("prolong", "print the jet prolongation of a section");
    jprolong->fallthrough();
    jprolong->add_option("--coords", j_coords, "comma-separated base coordinates")->required();
    jprolong->add_option("--fields", j_fields, "comma-separated field names")->required();
    jprolong->add_option("--order", j_order, "prolongation order")->check(CLI::NonNegativeNumber);
    jprolong->add_option("--section", j_section, "comma-separated field=expr assignments")->required();

    std::string e_coords, e_fields, e_lag, e_section, e_grid;
    auto* el = app.add_subcommand("el", "Euler-Lagrange operations");
    el->require_subcommand(1);
    el->fallthrough();
    auto* ederive = el->add_subcommand("derive", "derive the Euler-Lagrange expressions");
    ederive->fallthrough();
    ederive->add_option("--coords", e_coords, "comma-separated base coordinates")->required();
    ederive->add_option("--fields", e_fields, "comma-separated field names")->required();
    ederive->add_option("--lagrangian", e_lag, "Lagrangian density")->required();
    auto* echeck = el->add_subcommand("check", "evaluate the Euler-Lagrange residual on a grid");
    echeck->fallthrough();
    echeck->add_option("--coords", e_coords, "comma-separated base coordinates")->required();
    echeck->add_option("--fields", e_fields, "comma-separated field names")->required();
    echeck->add_option("--lagrangian", e_lag, "Lagrangian density")->required();
    echeck->add_option("--section", e_section, "comma-separated field=expr assignments")->required();
    echeck->add_option("--grid", e_grid, "grid spec name:lo:hi:count[:periodic],...")->required();

    std::string q_coords, q_fields, q_lag;
    auto* jac = app.add_subcommand("jacobi", "linearized Euler-Lagrange operator");
    jac->require_subcommand(1);
    jac->fallthrough();
    auto* jderive = jac->add_subcommand("derive", "print the Jacobi-operator coefficients");
    jderive->fallthrough();
    jderive->add_option("--coords", q_coords, "comma-separated base coordinates")->required();
    jderive->add_option("--fields", q_fields, "comma-separated field names")->required();
    jderive->add_option("--lagrangian", q_lag, "Lagrangian density")->required();

    std::string b_coords, b_fields;
    int b_order = 3, b_trials = 50;
    auto* bic = app.add_subcommand("bicomplex", "variational-bicomplex identities");
    bic->require_subcommand(1);
    bic->fallthrough();
    auto* bverify = bic->add_subcommand("verify", "check d_H^2 = d_V^2 = {d_H,d_V} = 0 on random forms");
    bverify->fallthrough();
    bverify->add_option("--coords", b_coords, "comma-separated base coordinates")->required();
    bverify->add_option("--fields", b_fields, "comma-separated field names")->required();
    bverify->add_option("--order", b_order, "maximum jet order of the random forms")
        ->check(CLI::NonNegativeNumber);
    bverify->add_option("--trials", b_trials, "number of random forms")->check(CLI::PositiveNumber);

    std::string p_fn, p_at;
    int p_order = 2;
    auto* perturb = app.add_subcommand("perturb", "perturbative expansion");
    perturb->require_subcommand(1);
    perturb->fallthrough();
    auto* pexpand = perturb->add_subcommand("expand", "expand a function around a point in powers of h");
    pexpand->fallthrough();
    pexpand->add_option("--fn", p_fn, "expression to expand")->required();
    pexpand->add_option("--at", p_at, "comma-separated var=value expansion point")->required();
    pexpand->add_option("--order", p_order, "truncation order")->check(CLI::NonNegativeNumber);

    std::vector<const char*> argv;
    argv.push_back("cahiers");
    for (const std::string& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    if (const char* es = std::getenv("CAHIERS_SEED")) {
        try {
            std::size_t used = 0;
            cfg.seed = std::stoull(es, &used);
            if (used != std::string(es).size()) throw std::invalid_argument(es);
        } catch (const std::exception&) {
            err << "error: CAHIERS_SEED must be an unsigned integer, got '" << es << "'\n";
            return 2;
        }
    }

    try {
        if (weval->parsed()) return run_weil_eval(cfg, w_alg, w_map, w_expr, out);
        if (jprolong->parsed()) return run_jet_prolong(cfg, j_coords, j_fields, j_order, j_section, out);
        if (ederive->parsed()) return run_el_derive(cfg, e_coords, e_fields, e_lag, out);
        if (echeck->parsed()) return run_el_check(cfg, e_coords, e_fields, e_lag, e_section, e_grid, out);
        if (jderive->parsed()) return run_jacobi_derive(cfg, q_coords, q_fields, q_lag, out);
        if (bverify->parsed()) return run_bicomplex_verify(cfg, b_coords, b_fields, b_order, b_trials, out);
        if (pexpand->parsed()) return run_perturb_expand(cfg, p_fn, p_at, p_order, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    err << "error: no subcommand selected\n\n" << app.help();
    return 2;
}

}  // namespace cahiers
