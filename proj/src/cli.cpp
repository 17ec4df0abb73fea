#include "cxls/cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "cxls/charax.hpp"
#include "cxls/dual.hpp"
#include "cxls/elicit.hpp"
#include "cxls/error.hpp"
#include "cxls/io.hpp"
#include "cxls/measures.hpp"

namespace cxls::cli {

namespace {

using io::json;

std::string num(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x < 0 ? "-inf" : "inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::string num(const ExtendedReal& x) { return x.is_neg_inf() ? "-inf" : num(x.value()); }

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

/// Two-column key/value listing followed by optional tabular blocks.
class Table {
public:
    void row(std::string key, std::string value) { rows_.emplace_back(std::move(key), std::move(value)); }
    void print(std::ostream& os) const {
        std::size_t width = 0;
        for (const auto& [k, v] : rows_) width = std::max(width, k.size());
        for (const auto& [k, v] : rows_) os << std::left << std::setw(static_cast<int>(width + 2)) << k << v << '\n';
    }

private:
    std::vector<std::pair<std::string, std::string>> rows_;
};

const std::string& need(const std::string& value, const char* field, const std::string& command) {
    if (value.empty()) throw ParseError(std::string(field) + ": required for " + command);
    return value;
}

double need_alpha(const RunConfig& c, const char* what) {
    if (!c.alpha) throw ParseError(std::string("alpha: required for ") + what);
    return *c.alpha;
}

UtilityFunctional build_utility(const RunConfig& c) {
    const std::string& kind = c.utility;
    if (kind == "mean") return UtilityFunctional::mean();
    if (kind == "essinf") return UtilityFunctional::essential_infimum();
    if (kind == "tvar") return UtilityFunctional::tvar(need_alpha(c, "--utility tvar"));
    if (kind == "expectile") return UtilityFunctional::expectile(need_alpha(c, "--utility expectile"));
    if (kind == "truncated-mean") return UtilityFunctional::truncated_mean(c.truncation.value_or(-1.0));
    if (kind == "kusuoka") {
        return UtilityFunctional::kusuoka(io::parse_kusuoka(io::read_json(need(c.kusuoka_path, "kusuoka", "--utility kusuoka"))));
    }
    if (kind == "shortfall") {
        return UtilityFunctional::shortfall(io::parse_loss(io::read_json(need(c.loss_path, "loss", "--utility shortfall"))));
    }
    throw ParseError("utility: unknown utility '" + kind + "'");
}

DiscreteDistribution load_dist(const std::string& path, const char* field, const std::string& command) {
    return io::parse_distribution(io::read_json(need(path, field, command)));
}

ScoringFunction build_score(const RunConfig& c) {
    if (c.score == "squared") return ScoringFunction::squared_error();
    if (c.score == "expectile") return ScoringFunction::expectile_score(need_alpha(c, "--score expectile"));
    if (c.score == "apq") {
        if (!c.w_over) throw ParseError("w-over: required for --score apq");
        if (!c.w_under) throw ParseError("w-under: required for --score apq");
        return ScoringFunction::asymmetric_piecewise_quadratic(*c.w_over, *c.w_under);
    }
    throw ParseError("score: unknown scoring function '" + c.score + "'");
}

json config_echo(const RunConfig& c) {
    return json{{"command", c.command},
                {"utility", c.utility},
                {"alpha", opt_json(c.alpha)},
                {"K", opt_json(c.truncation)},
                {"loss", c.loss_path},
                {"kusuoka", c.kusuoka_path},
                {"dist", c.dist_path},
                {"dist_g", c.dist_g_path},
                {"space", c.space_path},
                {"variable", c.variable},
                {"eta", c.eta},
                {"densities", c.densities_path},
                {"partition", c.partition},
                {"forecasts_a", c.forecasts_a_path},
                {"forecasts_b", c.forecasts_b_path},
                {"outcomes", c.outcomes_path},
                {"score", c.score},
                {"w_over", opt_json(c.w_over)},
                {"w_under", opt_json(c.w_under)},
                {"grid", c.grid},
                {"lambdas", c.lambdas},
                {"residual_grid", c.residual_grid},
                {"trials", c.trials ? json(*c.trials) : json(nullptr)},
                {"seed", c.seed}};
}

void write_table_file(const std::string& path, const std::vector<std::pair<double, std::string>>& rows) {
    std::ofstream os(path);
    if (!os) throw ParseError("table: cannot open '" + path + "' for writing");
    for (const auto& [x, v] : rows) os << num(x) << '\t' << v << '\n';
}

json violation_json(const CxlsViolation& v) {
    return json{{"trial", v.trial},
                {"f", io::to_json(v.f)},
                {"g", io::to_json(v.g)},
                {"lambda", v.lambda},
                {"deviation", v.deviation}};
}

json cxls_json(const CxlsReport& r) {
    json vs = json::array();
    for (const auto& v : r.violations) vs.push_back(violation_json(v));
    return json{{"seed", r.seed},
                {"trials", r.trials},
                {"violating_trials", r.violating_trials},
                {"max_deviation", r.max_deviation},
                {"violations", vs}};
}

json probe_json(const std::optional<ProbePair>& p) {
    if (!p) return nullptr;
    return json{{"k", p->k}, {"a", p->a}};
}

// ---------------------------------------------------------------------------

json cmd_evaluate(const RunConfig& c, Table& t) {
    const UtilityFunctional u = build_utility(c);
    const DiscreteDistribution f = load_dist(c.dist_path, "dist", c.command);
    const double v = u(f);
    t.row("utility", u.name());
    t.row("value", num(v));
    return json{{"utility", u.name()}, {"distribution", io::to_json(f)}, {"value", v}};
}

json cmd_curve(const RunConfig& c, Table& t) {
    const UtilityFunctional u = build_utility(c);
    const DiscreteDistribution f = load_dist(c.dist_path, "dist", c.command);
    const DiscreteDistribution g = load_dist(c.dist_g_path, "dist-g", c.command);
    if (c.lambdas < 2) throw InvariantError("lambdas: need at least 2 grid points");
    std::vector<double> grid(c.lambdas);
    for (std::size_t i = 0; i < c.lambdas; ++i) {
        grid[i] = static_cast<double>(i) / static_cast<double>(c.lambdas - 1);
    }
    const auto curve = mixture_curve(u, f, g, grid);
    t.row("utility", u.name());
    t.row("lambda", "value");
    json points = json::array();
    std::vector<std::pair<double, std::string>> rows;
    for (const auto& p : curve) {
        t.row(num(p.lambda), num(p.value));
        points.push_back(json::array({p.lambda, p.value}));
        rows.emplace_back(p.lambda, num(p.value));
    }
    if (!c.table_path.empty()) write_table_file(c.table_path, rows);
    return json{{"utility", u.name()}, {"f", io::to_json(f)}, {"g", io::to_json(g)}, {"points", points}};
}

json cmd_reconstruct(const RunConfig& c, Table& t) {
    const UtilityFunctional u = build_utility(c);
    const std::vector<double> grid = io::parse_grid(c.grid);
    const std::size_t trials = c.trials.value_or(500);

    const CxlsReport pre = check_cxls(u, trials, c.seed);
    if (pre.violating_trials > 0) {
        throw PreconditionError("utility: " + u.name() + " violates CxLS in " +
                                std::to_string(pre.violating_trials) + " of " + std::to_string(trials) +
                                " trials (max deviation " + num(pre.max_deviation) + ")");
    }

    ReconstructionOptions opts;
    opts.residual_grid = c.residual_grid;
    opts.agreement_trials = trials;
    opts.seed = c.seed;
    const ReconstructionReport r = reconstruct_phi(u, grid, opts);

    t.row("utility", u.name());
    t.row("K_hat", num(r.k_hat));
    t.row("k0", num(r.k0));
    t.row("max_consistency_residual", num(r.max_consistency_residual));
    t.row("consistent", r.consistent ? "yes" : "no");
    t.row("acceptance_agreement_rate", num(r.acceptance_agreement_rate));
    t.row("agreement_trials", std::to_string(r.agreement_trials));
    t.row("boundary_ties", std::to_string(r.boundary_ties));
    t.row("x", "phi_hat");
    json phi = json::array();
    std::vector<std::pair<double, std::string>> rows;
    for (const auto& s : r.phi_grid) {
        t.row(num(s.x), num(s.phi));
        phi.push_back(json::array({s.x, io::to_json(s.phi)}));
        rows.emplace_back(s.x, num(s.phi));
    }
    if (!c.table_path.empty()) write_table_file(c.table_path, rows);
    return json{{"utility", u.name()},
                {"cxls_precheck", cxls_json(pre)},
                {"K_hat", io::to_json(r.k_hat)},
                {"k0", r.k0},
                {"phi_grid", phi},
                {"residual_ks", r.residual_ks},
                {"residual_as", r.residual_as},
                {"max_consistency_residual", r.max_consistency_residual},
                {"consistent", r.consistent},
                {"acceptance_agreement_rate", r.acceptance_agreement_rate},
                {"agreement_trials", r.agreement_trials},
                {"boundary_ties", r.boundary_ties},
                {"seed", r.seed}};
}

json cmd_check_cxls(const RunConfig& c, Table& t) {
    const UtilityFunctional u = build_utility(c);
    const CxlsReport r = check_cxls(u, c.trials.value_or(1000), c.seed);
    t.row("utility", u.name());
    t.row("trials", std::to_string(r.trials));
    t.row("violating_trials", std::to_string(r.violating_trials));
    t.row("max_deviation", num(r.max_deviation));
    for (const auto& v : r.violations) {
        t.row("violation", "trial " + std::to_string(v.trial) + " lambda " + num(v.lambda) + " deviation " +
                               num(v.deviation));
    }
    json out = cxls_json(r);
    out["utility"] = u.name();
    return out;
}

json cmd_diagnose(const RunConfig& c, Table& t) {
    const UtilityFunctional u = build_utility(c);
    const auto ks = default_probe_ks();
    const auto as = default_probe_as();
    const auto pairs = default_robustness_pairs();
    const Diagnosis d = diagnose(u, ks, as, pairs);

    t.row("utility", u.name());
    t.row("verdict", to_string(d.verdict.tag));
    t.row("weber", d.weber ? "yes" : "no");
    t.row("K_hat", d.k_hat ? num(*d.k_hat) : "n/a");
    t.row("all_continuous", d.all_continuous ? "yes" : "no");
    json rob = json::array();
    for (const auto& r : d.robustness) {
        t.row("robustness (" + num(r.x) + ", " + num(r.y) + ")",
              std::string(r.continuous_at_zero ? "continuous" : "jump") + "  limit " + num(r.limit_estimate) +
                  "  u(delta_y) " + num(r.value_at_y));
        json seq = json::array();
        for (const auto& p : r.sequence) seq.push_back(json::array({p.lambda, p.value}));
        rob.push_back(json{{"x", r.x},
                           {"y", r.y},
                           {"limit_estimate", r.limit_estimate},
                           {"value_at_y", r.value_at_y},
                           {"continuous_at_zero", r.continuous_at_zero},
                           {"sequence", seq}});
    }
    return json{{"utility", u.name()},
                {"verdict", to_string(d.verdict.tag)},
                {"failing_probe", probe_json(d.verdict.failing)},
                {"holding_probe", probe_json(d.verdict.holding)},
                {"weber", d.weber},
                {"K_hat", d.k_hat ? io::to_json(*d.k_hat) : json(nullptr)},
                {"probe_ks", ks},
                {"probe_as", as},
                {"all_continuous", d.all_continuous},
                {"robustness", rob}};
}

json cmd_dual_check(const RunConfig& c, Table& t) {
    const io::FiniteSpaceDocument doc = io::parse_finite_space(io::read_json(need(c.space_path, "space", c.command)));
    const std::string& name = need(c.variable, "variable", c.command);
    const auto it = doc.variables.find(name);
    if (it == doc.variables.end()) throw ParseError("variable: no variable named '" + name + "'");
    const RandomVariable& xi = it->second;
    const double alpha = c.alpha.value_or(0.5);

    json out;
    const double primal = tvar(law(xi), alpha);
    const double dual = tvar_dual(xi, alpha);
    t.row("alpha", num(alpha));
    t.row("tvar", num(primal));
    t.row("tvar_dual", num(dual));
    out["tvar"] = json{{"alpha", alpha}, {"primal", primal}, {"dual", dual}, {"gap", dual - primal}};

    const auto structured = truncated_mean_structured_family(xi);
    const auto tm = truncated_mean_dual_check(xi, structured);
    t.row("truncated_mean_closed_form", num(tm.closed_form));
    t.row("truncated_mean_structured_dual", num(tm.min_over_family));
    t.row("truncated_mean_structured_gap", num(tm.gap));
    out["truncated_mean_structured"] =
        json{{"min_over_family", tm.min_over_family}, {"closed_form", tm.closed_form}, {"gap", tm.gap},
             {"family_size", structured.size()}};

    if (!c.densities_path.empty()) {
        const auto family = io::parse_density_family(io::read_json(c.densities_path), doc.space);
        const auto r = truncated_mean_dual_check(xi, family);
        t.row("truncated_mean_family_dual", num(r.min_over_family));
        t.row("truncated_mean_family_gap", num(r.gap));
        out["truncated_mean_family"] = json{{"min_over_family", r.min_over_family},
                                            {"closed_form", r.closed_form},
                                            {"gap", r.gap},
                                            {"family_size", family.size()}};
    }

    if (!c.partition.empty() || !c.eta.empty()) {
        const UtilityFunctional u = build_utility(c);
        t.row("utility", u.name());
        out["utility"] = u.name();
        if (!c.partition.empty()) {
            const auto r = conditioning_check(u, xi, io::parse_partition(c.partition, doc.space.size()));
            t.row("conditioning u(E[xi|G])", num(r.lhs));
            t.row("conditioning u(xi)", num(r.rhs));
            t.row("conditioning holds", r.holds ? "yes" : "no");
            out["conditioning"] = json{{"lhs", r.lhs}, {"rhs", r.rhs}, {"holds", r.holds}};
        }
        if (!c.eta.empty()) {
            const auto jt = doc.variables.find(c.eta);
            if (jt == doc.variables.end()) throw ParseError("eta: no variable named '" + c.eta + "'");
            if (c.lambdas < 2) throw InvariantError("lambdas: need at least 2 grid points");
            std::vector<double> lambdas(c.lambdas);
            for (std::size_t i = 0; i < c.lambdas; ++i) {
                lambdas[i] = static_cast<double>(i) / static_cast<double>(c.lambdas - 1);
            }
            const auto r = concavity_check(u, xi, jt->second, lambdas);
            t.row("concavity violations", std::to_string(r.violations.size()));
            t.row("concavity max_shortfall", num(r.max_shortfall));
            json vs = json::array();
            for (const auto& v : r.violations) vs.push_back(json{{"lambda", v.lambda}, {"lhs", v.lhs}, {"rhs", v.rhs}});
            out["concavity"] = json{{"violations", vs}, {"max_shortfall", r.max_shortfall}};
        }
    }
    return out;
}

json cmd_elicit(const RunConfig& c, Table& t) {
    const ScoringFunction s = build_score(c);
    const DiscreteDistribution f = load_dist(c.dist_path, "dist", c.command);
    const double x = elicit(s, f);
    const double score = expected_score(s, x, f);
    t.row("score", s.describe());
    t.row("elicited", num(x));
    t.row("expected_score", num(score));
    return json{{"score", s.describe()}, {"distribution", io::to_json(f)}, {"elicited", x}, {"expected_score", score}};
}

json cmd_compare(const RunConfig& c, Table& t) {
    const ScoringFunction s = build_score(c);
    const auto a = io::read_number_stream(need(c.forecasts_a_path, "forecasts-a", c.command));
    const auto b = io::read_number_stream(need(c.forecasts_b_path, "forecasts-b", c.command));
    const auto y = io::read_number_stream(need(c.outcomes_path, "outcomes", c.command));
    const ForecastComparison r = compare_forecasts(s, a, b, y);
    t.row("score", s.describe());
    t.row("n", std::to_string(r.n));
    t.row("mean_score_a", num(r.mean_score_a));
    t.row("mean_score_b", num(r.mean_score_b));
    t.row("winner", r.winner);
    return json{{"score", s.describe()},
                {"n", r.n},
                {"mean_score_a", r.mean_score_a},
                {"mean_score_b", r.mean_score_b},
                {"winner", r.winner}};
}

json dispatch(const RunConfig& c, Table& t) {
    if (c.command == "evaluate") return cmd_evaluate(c, t);
    if (c.command == "curve") return cmd_curve(c, t);
    if (c.command == "reconstruct") return cmd_reconstruct(c, t);
    if (c.command == "check-cxls") return cmd_check_cxls(c, t);
    if (c.command == "diagnose") return cmd_diagnose(c, t);
    if (c.command == "dual-check") return cmd_dual_check(c, t);
    if (c.command == "elicit") return cmd_elicit(c, t);
    if (c.command == "compare") return cmd_compare(c, t);
    throw ParseError("command: unknown command '" + c.command + "'");
}

int fail(std::ostream& err, int code, const std::exception& e) {
    err << "cxls: error: " << e.what() << '\n';
    return code;
}

}  // namespace

std::optional<RunConfig> parse_args(int argc, const char* const* argv, std::ostream& out) {
    RunConfig c;
    CLI::App app{"Law-invariant concave monetary utilities: evaluation, characterization and diagnostics", "cxls"};
    app.set_version_flag("--version", kToolVersion);

    app.add_option("command", c.command, "Command to run")
        ->required()
        ->check(CLI::IsMember({"evaluate", "curve", "reconstruct", "check-cxls", "diagnose", "dual-check",
                               "elicit", "compare"}));

    app.add_option("--utility", c.utility, "mean, essinf, tvar, expectile, truncated-mean, kusuoka, shortfall")
        ->check(CLI::IsMember({"mean", "essinf", "tvar", "expectile", "truncated-mean", "kusuoka", "shortfall"}));
    app.add_option("--alpha", c.alpha, "Level for tvar/expectile, or the expectile score level");
    app.add_option("--K", c.truncation, "Truncation point of the truncated mean (default -1)");
    app.add_option("--loss", c.loss_path, "Loss-function JSON for --utility shortfall");
    app.add_option("--kusuoka", c.kusuoka_path, "Kusuoka JSON for --utility kusuoka");

    app.add_option("--dist,--dist-f", c.dist_path, "Distribution JSON");
    app.add_option("--dist-g", c.dist_g_path, "Second distribution JSON (curve)");
    app.add_option("--space", c.space_path, "Finite space JSON (dual-check)");
    app.add_option("--variable", c.variable, "Random variable name in the space file");
    app.add_option("--eta", c.eta, "Second variable for the concavity check");
    app.add_option("--densities", c.densities_path, "Density family JSON");
    app.add_option("--partition", c.partition, "Partition blocks, e.g. \"0,1;2,3\"");
    app.add_option("--forecasts-a", c.forecasts_a_path, "Forecast stream A (one number per line)");
    app.add_option("--forecasts-b", c.forecasts_b_path, "Forecast stream B");
    app.add_option("--outcomes", c.outcomes_path, "Realized outcomes");

    app.add_option("--score", c.score, "squared, expectile, apq")
        ->check(CLI::IsMember({"squared", "expectile", "apq"}));
    app.add_option("--w-over", c.w_over, "Weight for over-forecasts (apq)");
    app.add_option("--w-under", c.w_under, "Weight for under-forecasts (apq)");

    app.add_option("--grid", c.grid, "Reconstruction grid start:stop:step")->capture_default_str();
    app.add_option("--lambdas", c.lambdas, "Number of lambda grid points")->capture_default_str();
    app.add_option("--residual-grid", c.residual_grid, "Side of the (k, a) residual grid")->capture_default_str();
    app.add_option("--trials", c.trials, "Random trials (check-cxls, reconstruct)");
    app.add_option("--seed", c.seed, "Random seed")->envname("CXLS_SEED")->capture_default_str();

    app.add_option("--output", c.output_path, "Write the JSON report here instead of stdout");
    app.add_option("--table", c.table_path, "Write a two-column plot table here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        app.exit(e, out, out);
        return std::nullopt;
    } catch (const CLI::ParseError& e) {
        std::string msg = e.what();
        if (!msg.empty() && msg.back() == '\n') msg.pop_back();
        throw ParseError(msg);
    }
    return c;
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
    try {
        Table table;
        json results = dispatch(config, table);
        json report{{"tool", "cxls"},
                    {"version", kToolVersion},
                    {"command", config.command},
                    {"seed", config.seed},
                    {"config", config_echo(config)},
                    {"results", std::move(results)}};
        table.print(out);
        const std::string text = report.dump(2) + "\n";
        if (config.output_path.empty()) {
            out << '\n' << text;
        } else {
            std::ofstream os(config.output_path);
            if (!os) throw ParseError("output: cannot open '" + config.output_path + "' for writing");
            os << text;
        }
        return 0;
    } catch (const ParseError& e) {
        return fail(err, 1, e);
    } catch (const io::json::exception& e) {
        return fail(err, 1, e);
    } catch (const InvariantError& e) {
        return fail(err, 2, e);
    } catch (const NumericError& e) {
        return fail(err, 3, e);
    } catch (const PreconditionError& e) {
        return fail(err, 4, e);
    }
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    std::optional<RunConfig> config;
    try {
        config = parse_args(argc, argv, out);
    } catch (const ParseError& e) {
        return fail(err, 1, e);
    }
    if (!config) return 0;
    return run(*config, out, err);
}

}  // namespace cxls::cli
