#pragma once
// Wire formats: the shared JSON problem document, JSON reports for the
// structured subcommands, CSV point lists at 12 significant digits, the
// beta-grid mini-language, and SVG rendering of achievable sets.

#include <cstdio>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "privseg/analysis.hpp"
#include "privseg/core.hpp"
#include "privseg/geometry.hpp"
#include "privseg/measure.hpp"
#include "privseg/oracle.hpp"
#include "privseg/segmentation.hpp"
#include "privseg/simulation.hpp"

namespace privseg {

inline constexpr int kSchemaVersion = 1;

// 12 significant digits: enough to round-trip the suite's tolerances, short
// enough to keep CSV diffs readable.
inline std::string format_g12(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

struct ProblemDocument {
    ValueGrid grid;
    Market aggregate;
    double beta = 0.0;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> samples;
    std::optional<std::uint64_t> trials;
    std::optional<std::string> beta_grid;
    std::optional<PricedSegmentation> segmentation;
};

// "a:b:step" -> {a, a+step, ..., <= b (+ float slack)}.
inline std::vector<double> parse_beta_grid(const std::string& text) {
    double a = 0.0, b = 0.0, step = 0.0;
    char tail = '\0';
    if (std::sscanf(text.c_str(), "%lf:%lf:%lf%c", &a, &b, &step, &tail) != 3)
        throw std::invalid_argument("beta grid: expected a:b:step, got '" + text + "'");
    if (!(step > 0.0)) throw std::invalid_argument("beta grid: step must be positive");
    if (!(a <= b)) throw std::invalid_argument("beta grid: start exceeds end");
    if (!(a >= 0.0 && b < 1.0)) throw std::invalid_argument("beta grid: range must lie in [0,1)");
    std::vector<double> out;
    for (int k = 0;; ++k) {
        double v = a + step * k;
        if (v > b + 1e-12) break;
        out.push_back(std::min(v, b));
    }
    return out;
}

namespace detail {

inline const nlohmann::json& field(const nlohmann::json& j, const char* name) {
    auto it = j.find(name);
    if (it == j.end())
        throw std::invalid_argument(std::string("document: missing field '") + name + "'");
    return *it;
}

inline std::vector<double> number_list(const nlohmann::json& j, const char* name) {
    if (!j.is_array()) throw std::invalid_argument(std::string("document: '") + name + "' must be an array");
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& v : j) {
        if (!v.is_number())
            throw std::invalid_argument(std::string("document: '") + name + "' must contain numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

inline PricedSegmentation parse_segmentation(const nlohmann::json& j, std::size_t K) {
    const nlohmann::json& parts_j = field(j, "parts");
    if (!parts_j.is_array() || parts_j.empty())
        throw std::invalid_argument("segmentation: 'parts' must be a nonempty array");
    std::vector<PricedSegmentation::Part> parts;
    for (const auto& pj : parts_j) {
        double gamma = field(pj, "gamma").get<double>();
        std::vector<double> mass = number_list(field(pj, "market"), "market");
        if (mass.size() != K) throw std::invalid_argument("segmentation: market length mismatch");
        std::uint64_t price = field(pj, "price_index").get<std::uint64_t>();
        parts.push_back({gamma, Market(std::move(mass)), static_cast<std::size_t>(price)});
    }
    return PricedSegmentation(std::move(parts));
}

}  // namespace detail

inline ProblemDocument parse_problem(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("document: not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("document: top level must be an object");
    if (j.contains("schema") && j["schema"] != kSchemaVersion)
        throw std::invalid_argument("document: unsupported schema version");

    try {
        ValueGrid grid(detail::number_list(detail::field(j, "values"), "values"));
        Market aggregate(detail::number_list(detail::field(j, "aggregate"), "aggregate"));
        check_compatible(grid, aggregate);
        if (!detail::field(j, "beta").is_number())
            throw std::invalid_argument("document: beta must be a number");
        double beta = j["beta"].get<double>();
        if (!(beta >= 0.0 && beta <= 1.0))
            throw std::invalid_argument("document: beta must lie in [0,1]");

        ProblemDocument doc{std::move(grid), std::move(aggregate), beta, {}, {}, {}, {}, {}};
        if (j.contains("seed")) doc.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("samples")) doc.samples = j["samples"].get<std::uint64_t>();
        if (j.contains("trials")) doc.trials = j["trials"].get<std::uint64_t>();
        if (j.contains("beta_grid")) doc.beta_grid = j["beta_grid"].get<std::string>();
        if (j.contains("segmentation"))
            doc.segmentation = detail::parse_segmentation(j["segmentation"], doc.grid.size());
        return doc;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("document: malformed field: ") + e.what());
    }
}

// ---- JSON reports ------------------------------------------------------------

inline nlohmann::json to_json(const SurplusPoint& p) {
    return {{"consumer", p.consumer}, {"producer", p.producer}};
}

inline nlohmann::json to_json(const McEstimate& e) {
    return {{"value", e.value}, {"std_error", e.std_error}, {"samples", e.samples}};
}

inline nlohmann::json to_json(const PricingRegions& r) {
    return {{"schema", kSchemaVersion},
            {"beta", r.beta},
            {"bar_beta", r.bar_beta},
            {"feasible", r.feasible}};
}

inline nlohmann::json to_json(const ShiftVector& sv) {
    nlohmann::json regions = nlohmann::json::array();
    for (const McEstimate& e : sv.region_probs) regions.push_back(to_json(e));
    return {{"schema", kSchemaVersion},
            {"point", to_json(sv.point)},
            {"regions", regions},
            {"seed", sv.seed}};
}

inline nlohmann::json to_json(const PricedSegmentation& seg) {
    nlohmann::json parts = nlohmann::json::array();
    for (const PricedSegmentation::Part& p : seg.parts)
        parts.push_back({{"gamma", p.gamma}, {"market", p.market.mass()}, {"price_index", p.price_index}});
    return {{"schema", kSchemaVersion}, {"parts", parts}};
}

inline nlohmann::json to_json(const Diagnostics& d) {
    nlohmann::json j{{"schema", kSchemaVersion},
                     {"beta", d.beta},
                     {"leakage", d.leakage},
                     {"crossing", d.crossing},
                     {"q_included", d.q_included},
                     {"prop7_case", to_string(d.prop7)}};
    if (d.dp.constrained) {
        j["dp_epsilon"] = {{"ratio", d.dp.ratio}, {"log_ratio", d.dp.log_ratio}};
    } else {
        j["dp_epsilon"] = "unconstrained";
    }
    if (d.has_k2) {
        j["max_producer_monotone"] = d.max_producer_monotone_k2;
        j["min_consumer_monotone"] = d.min_consumer_monotone_k2;
        if (d.prop7 == Prop7Case::increasing_candidate) j["alpha_tilde"] = d.alpha_tilde;
    }
    return j;
}

inline nlohmann::json to_json(const SimReport& r) {
    return {{"schema", kSchemaVersion},
            {"consumer", to_json(r.consumer)},
            {"producer", to_json(r.producer)},
            {"analytic", to_json(r.analytic)},
            {"z_consumer", r.z_consumer},
            {"z_producer", r.z_producer}};
}

inline nlohmann::json to_json(const GridCloud& cloud, const ContainmentReport& rep) {
    return {{"schema", kSchemaVersion},
            {"denominator", cloud.denominator},
            {"segment_budget", cloud.segment_budget},
            {"candidates", cloud.candidates},
            {"cap", cloud.cap},
            {"points", cloud.points.size()},
            {"violations", rep.violations},
            {"max_excess", cloud.points.empty() ? nlohmann::json("-inf") : nlohmann::json(rep.max_excess)}};
}

// ---- CSV ---------------------------------------------------------------------

inline void write_points_csv(std::ostream& os, const std::vector<SurplusPoint>& pts) {
    os << "consumer,producer\n";
    for (const SurplusPoint& p : pts)
        os << format_g12(p.consumer) << ',' << format_g12(p.producer) << '\n';
}

inline void write_curves_csv(std::ostream& os, const std::vector<CurveRow>& rows) {
    os << "beta,max_producer,min_producer,max_consumer,min_consumer,"
          "k2_max_producer,k2_min_consumer\n";
    for (const CurveRow& r : rows) {
        os << format_g12(r.beta) << ',' << format_g12(r.max_producer) << ','
           << format_g12(r.min_producer) << ',' << format_g12(r.max_consumer) << ','
           << format_g12(r.min_consumer) << ',';
        if (r.has_k2_closed)
            os << format_g12(r.k2_max_producer) << ',' << format_g12(r.k2_min_consumer);
        else
            os << ',';
        os << '\n';
    }
}

// ---- SVG ---------------------------------------------------------------------

// The achievable set filled, the no-masking reference triangle dashed.
inline void write_svg(std::ostream& os, const SurplusPolygon& set,
                      const SurplusPolygon& reference) {
    double lo_c = std::min(set.min_along(1, 0), reference.min_along(1, 0));
    double hi_c = std::max(set.max_along(1, 0), reference.max_along(1, 0));
    double lo_p = std::min(set.min_along(0, 1), reference.min_along(0, 1));
    double hi_p = std::max(set.max_along(0, 1), reference.max_along(0, 1));
    double span_c = std::max(hi_c - lo_c, 1e-9), span_p = std::max(hi_p - lo_p, 1e-9);
    lo_c -= 0.05 * span_c;
    hi_c += 0.05 * span_c;
    lo_p -= 0.05 * span_p;
    hi_p += 0.05 * span_p;
    const double W = 640.0, H = 480.0;
    auto sx = [&](double c) { return (c - lo_c) / (hi_c - lo_c) * W; };
    auto sy = [&](double p) { return H - (p - lo_p) / (hi_p - lo_p) * H; };
    auto emit = [&](const SurplusPolygon& poly, const char* style) {
        os << "  <polygon points=\"";
        for (const SurplusPoint& v : poly.vertices())
            os << format_g12(sx(v.consumer)) << ',' << format_g12(sy(v.producer)) << ' ';
        os << "\" " << style << "/>\n";
    };
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
       << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n";
    os << "  <rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    emit(reference,
         "fill=\"none\" stroke=\"#888888\" stroke-width=\"1.5\" stroke-dasharray=\"6 4\"");
    emit(set, "fill=\"#4f81bd\" fill-opacity=\"0.45\" stroke=\"#1f4e79\" stroke-width=\"1.5\"");
    os << "  <text x=\"" << W - 8 << "\" y=\"" << H - 8
       << "\" text-anchor=\"end\" font-size=\"12\" font-family=\"sans-serif\">consumer</text>\n";
    os << "  <text x=\"8\" y=\"16\" font-size=\"12\" font-family=\"sans-serif\">producer</text>\n";
    os << "</svg>\n";
}

}  // namespace privseg
