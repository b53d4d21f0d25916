// Command-line front end: one subcommand per library entry point, JSON/CSV
// on stdout, diagnostics on stderr. Exit codes: 0 success, 2 validation
// error, 3 numerical failure (infeasible LP or an enumeration/iteration cap).

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "privseg/io.hpp"
#include "privseg/lp_exact.hpp"

namespace {

struct Options {
    std::string input = "-";
    std::uint64_t seed = 0;
    std::uint64_t samples = 1000000;
    std::uint64_t trials = 1000000;
    std::string beta_grid;
    std::uint64_t lattice = 10;
    std::string svg_path;
    std::string csv_path;
    std::string target;
    bool exact = false;

    bool seed_set = false, samples_set = false, trials_set = false, grid_set = false;
};

std::string read_input(const std::string& path) {
    std::ostringstream buf;
    if (path == "-") {
        buf << std::cin.rdbuf();
    } else {
        std::ifstream f(path);
        if (!f) throw std::invalid_argument("cannot open input file '" + path + "'");
        buf << f.rdbuf();
    }
    return buf.str();
}

// Flag beats document field beats default.
std::uint64_t resolve(bool flag_set, std::uint64_t flag_value,
                      const std::optional<std::uint64_t>& doc_value, std::uint64_t fallback) {
    if (flag_set) return flag_value;
    if (doc_value) return *doc_value;
    return fallback;
}

void emit_json(const nlohmann::json& j) { std::cout << j.dump(2) << '\n'; }

privseg::ShiftVector make_shift(const privseg::ProblemDocument& doc, const Options& opt) {
    return privseg::shift_vector(doc.grid, doc.aggregate, doc.beta,
                                 resolve(opt.samples_set, opt.samples, doc.samples, 1000000),
                                 resolve(opt.seed_set, opt.seed, doc.seed, 0));
}

void run_regions(const privseg::ProblemDocument& doc, const Options&) {
    emit_json(privseg::to_json(privseg::pricing_regions(doc.grid, doc.beta)));
}

void run_shift(const privseg::ProblemDocument& doc, const Options& opt) {
    emit_json(privseg::to_json(make_shift(doc, opt)));
}

void run_polygon(const privseg::ProblemDocument& doc, const Options& opt) {
    privseg::ShiftVector shift = make_shift(doc, opt);
    privseg::SurplusPolygon set =
        privseg::surplus_set(doc.grid, doc.aggregate, doc.beta, shift, {opt.exact});
    privseg::write_points_csv(std::cout, set.vertices());
    if (!opt.svg_path.empty()) {
        std::ofstream f(opt.svg_path);
        if (!f) throw std::invalid_argument("cannot open svg output '" + opt.svg_path + "'");
        privseg::write_svg(f, set, privseg::non_private_triangle(doc.grid, doc.aggregate));
    }
}

void run_segment(const privseg::ProblemDocument& doc, const Options& opt) {
    double tc = 0.0, tp = 0.0;
    char tail = '\0';
    if (std::sscanf(opt.target.c_str(), "%lf,%lf%c", &tc, &tp, &tail) != 2)
        throw std::invalid_argument("--target expects 'consumer,producer'");
    privseg::ShiftVector shift = make_shift(doc, opt);
    nlohmann::json out{{"schema", privseg::kSchemaVersion},
                       {"target", privseg::to_json(privseg::SurplusPoint{tc, tp})}};

    if (doc.beta > 1.0 - 1e-12) {
        // Fully masked: the set is the single point c, any segmentation works.
        if (std::abs(tc - shift.point.consumer) > 1e-6 ||
            std::abs(tp - shift.point.producer) > 1e-6)
            throw privseg::NumericalFailure("segment: target outside the achievable set");
        std::vector<std::size_t> opt_set =
            privseg::optimal_price_set(doc.grid, doc.beta, doc.aggregate);
        privseg::PricedSegmentation seg({{1.0, doc.aggregate, opt_set.front()}});
        out["achieved"] = privseg::to_json(shift.point);
        out["segmentation"] = privseg::to_json(seg)["parts"];
        emit_json(out);
        return;
    }

    privseg::PolytopeLP P = privseg::build_polytope(doc.grid, doc.aggregate, doc.beta);
    double pc = (tc - doc.beta * shift.point.consumer) / (1.0 - doc.beta);
    double pp = (tp - doc.beta * shift.point.producer) / (1.0 - doc.beta);
    constexpr double eps = 1e-7;  // pin the target inside a tiny box, not an exact hyperplane
    privseg::LinearProgram lp = P.lp;
    auto pin = [&](const std::vector<double>& map, double value) {
        std::vector<double> row = map;
        lp.add_le(row, value + eps);
        for (double& c : row) c = -c;
        lp.add_le(std::move(row), -(value - eps));
    };
    pin(P.consumer_map, pc);
    pin(P.producer_map, pp);
    privseg::LpSolution sol = opt.exact ? privseg::solve_exact(lp, privseg::Sense::maximize)
                                        : privseg::solve(lp, privseg::Sense::maximize);
    if (sol.status != privseg::LpStatus::optimal)
        throw privseg::NumericalFailure("segment: target outside the achievable set");
    privseg::PricedSegmentation seg =
        privseg::build_segmentation(sol.point, doc.grid, doc.aggregate, doc.beta);
    privseg::SurplusPoint primed = privseg::surplus_objective(P, sol.point);
    out["achieved"] = privseg::to_json(
        privseg::SurplusPoint{doc.beta * shift.point.consumer + (1.0 - doc.beta) * primed.consumer,
                              doc.beta * shift.point.producer + (1.0 - doc.beta) * primed.producer});
    out["segmentation"] = privseg::to_json(seg)["parts"];
    emit_json(out);
}

void run_analyze(const privseg::ProblemDocument& doc, const Options& opt) {
    emit_json(privseg::to_json(
        privseg::diagnose(doc.grid, doc.aggregate, doc.beta,
                          resolve(opt.samples_set, opt.samples, doc.samples, 1000000),
                          resolve(opt.seed_set, opt.seed, doc.seed, 0))));
}

void run_curves(const privseg::ProblemDocument& doc, const Options& opt) {
    std::string spec = opt.grid_set ? opt.beta_grid : doc.beta_grid.value_or("");
    if (spec.empty())
        throw std::invalid_argument("curves: need --beta-grid a:b:step (or a beta_grid field)");
    std::vector<privseg::CurveRow> rows = privseg::extrema_curves(
        doc.grid, doc.aggregate, privseg::parse_beta_grid(spec),
        resolve(opt.samples_set, opt.samples, doc.samples, 1000000),
        resolve(opt.seed_set, opt.seed, doc.seed, 0), {opt.exact});
    privseg::write_curves_csv(std::cout, rows);
}

void run_simulate(const privseg::ProblemDocument& doc, const Options& opt) {
    privseg::PricedSegmentation seg =
        doc.segmentation ? *doc.segmentation : privseg::first_degree(doc.grid, doc.aggregate);
    privseg::SimReport rep = privseg::simulate(
        seg, doc.beta, doc.grid, resolve(opt.trials_set, opt.trials, doc.trials, 1000000),
        resolve(opt.seed_set, opt.seed, doc.seed, 0), privseg::TiePolicy::random_uniform,
        resolve(opt.samples_set, opt.samples, doc.samples, 1000000));
    emit_json(privseg::to_json(rep));
}

void run_oracle(const privseg::ProblemDocument& doc, const Options& opt) {
    privseg::ShiftVector shift = make_shift(doc, opt);
    privseg::GridCloud cloud =
        privseg::enumerate_cloud(doc.grid, doc.aggregate, doc.beta, opt.lattice, shift);
    privseg::SurplusPolygon set =
        privseg::surplus_set(doc.grid, doc.aggregate, doc.beta, shift, {opt.exact});
    privseg::ContainmentReport rep = privseg::containment_report(cloud, set);
    if (!opt.csv_path.empty()) {
        std::ofstream f(opt.csv_path);
        if (!f) throw std::invalid_argument("cannot open csv output '" + opt.csv_path + "'");
        privseg::write_points_csv(f, cloud.points);
    }
    emit_json(privseg::to_json(cloud, rep));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Achievable consumer/producer surplus under masked market segmentation"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    Options opt;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--input", opt.input, "problem JSON file, or - for stdin");
        sub->add_option("--seed", opt.seed, "RNG seed");
        sub->add_option("--samples", opt.samples, "Monte Carlo samples");
        sub->add_flag("--exact", opt.exact, "route LPs through the rational solver");
        return sub;
    };

    auto* regions = add_common(app.add_subcommand("regions", "per-price feasibility thresholds"));
    auto* shift = add_common(app.add_subcommand("shift", "fully-masked utility point and region probabilities"));
    auto* polygon = add_common(app.add_subcommand("polygon", "achievable-set vertices as CSV"));
    polygon->add_option("--svg", opt.svg_path, "also render the set to this SVG file");
    auto* segment = add_common(app.add_subcommand("segment", "segmentation achieving a target point"));
    segment->add_option("--target", opt.target, "consumer,producer target")->required();
    auto* analyze = add_common(app.add_subcommand("analyze", "privacy and comparative-statics diagnostics"));
    auto* curves = add_common(app.add_subcommand("curves", "extrema across a mask-rate grid as CSV"));
    curves->add_option("--beta-grid", opt.beta_grid, "mask-rate grid a:b:step");
    auto* simulate = add_common(app.add_subcommand("simulate", "Monte Carlo run of the mechanism"));
    simulate->add_option("--trials", opt.trials, "simulation trials");
    auto* oracle = add_common(app.add_subcommand("oracle", "lattice enumeration vs the polygon"));
    oracle->add_option("--lattice", opt.lattice, "lattice denominator D");
    oracle->add_option("--csv", opt.csv_path, "write the point cloud CSV to this file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    // Flag-vs-document precedence is per parsed subcommand: every subcommand
    // binds the same Options fields, so only presence needs looking up.
    CLI::App* active = app.get_subcommands().front();
    auto flag_given = [&](const std::string& name) {
        const CLI::Option* o = active->get_option_no_throw(name);
        return o != nullptr && o->count() > 0;
    };
    opt.seed_set = flag_given("--seed");
    opt.samples_set = flag_given("--samples");
    opt.trials_set = flag_given("--trials");
    opt.grid_set = flag_given("--beta-grid");

    try {
        privseg::ProblemDocument doc = privseg::parse_problem(read_input(opt.input));
        if (regions->parsed()) run_regions(doc, opt);
        else if (shift->parsed()) run_shift(doc, opt);
        else if (polygon->parsed()) run_polygon(doc, opt);
        else if (segment->parsed()) run_segment(doc, opt);
        else if (analyze->parsed()) run_analyze(doc, opt);
        else if (curves->parsed()) run_curves(doc, opt);
        else if (simulate->parsed()) run_simulate(doc, opt);
        else if (oracle->parsed()) run_oracle(doc, opt);
        return 0;
    } catch (const privseg::NumericalFailure& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 3;
    }
}
