#include "cxls/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cxls/error.hpp"

namespace cxls::io {

namespace {

const json& require(const json& doc, const char* field) {
    if (!doc.is_object()) throw ParseError(std::string(field) + ": enclosing document must be an object");
    auto it = doc.find(field);
    if (it == doc.end()) throw ParseError(std::string(field) + ": missing field");
    return *it;
}

double as_number(const json& v, const std::string& field) {
    if (!v.is_number()) throw ParseError(field + ": expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw InvariantError(field + ": value must be finite");
    return x;
}

std::vector<double> as_numbers(const json& v, const std::string& field) {
    if (!v.is_array()) throw ParseError(field + ": expected an array of numbers");
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto& e : v) out.push_back(as_number(e, field));
    return out;
}

double parse_double(std::string_view text, const std::string& field) {
    double x = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), x);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
        throw ParseError(field + ": '" + std::string(text) + "' is not a number");
    }
    if (!std::isfinite(x)) throw InvariantError(field + ": value must be finite");
    return x;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

}  // namespace

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path.string() + ": cannot open file");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

DiscreteDistribution parse_distribution(const json& doc) {
    std::vector<double> points = as_numbers(require(doc, "points"), "points");
    std::vector<double> probs = as_numbers(require(doc, "probs"), "probs");
    if (points.size() != probs.size()) throw InvariantError("probs: length does not match points");
    for (std::size_t i = 1; i < points.size(); ++i) {
        if (!(points[i] > points[i - 1])) throw InvariantError("points: must be strictly increasing");
    }
    for (double p : probs) {
        if (!(p > 0.0)) throw InvariantError("probs: weights must be positive");
    }
    return DiscreteDistribution(std::move(points), std::move(probs));
}

json to_json(const DiscreteDistribution& f) {
    return json{{"points", std::vector<double>(f.points().begin(), f.points().end())},
                {"probs", std::vector<double>(f.probs().begin(), f.probs().end())}};
}

ExtendedReal parse_extended(const json& value, const char* field) {
    if (value.is_string()) {
        if (value.get<std::string>() == "-inf") return ExtendedReal::neg_inf();
        throw ParseError(std::string(field) + ": expected a number or \"-inf\"");
    }
    return as_number(value, field);
}

json to_json(const ExtendedReal& x) {
    if (x.is_neg_inf()) return "-inf";
    return x.value();
}

ExtendedLossFunction parse_loss(const json& doc) {
    const json& kind_field = require(doc, "kind");
    if (!kind_field.is_string()) throw ParseError("kind: expected a string");
    const std::string kind = kind_field.get<std::string>();
    const ExtendedReal truncation =
        doc.contains("K") ? parse_extended(doc.at("K"), "K") : ExtendedReal::neg_inf();

    using Loss = ExtendedLossFunction;
    if (kind == "linear") return Loss::linear(truncation);
    if (kind == "expectile") return Loss::expectile(as_number(require(doc, "alpha"), "alpha"), truncation);
    if (kind == "zero_above_linear_below") return Loss::zero_above_linear_below(truncation);
    if (kind == "log_shift" || kind == "sqrt_shift") {
        if (truncation.is_neg_inf()) throw InvariantError("K: " + kind + " needs a finite K");
        return kind == "log_shift" ? Loss::log_shift(truncation.value())
                                   : Loss::sqrt_shift(truncation.value());
    }
    if (kind == "piecewise") {
        const json& knots_field = require(doc, "knots");
        if (!knots_field.is_array()) throw ParseError("knots: expected an array of [x, y] pairs");
        std::vector<Loss::Knot> knots;
        for (const auto& k : knots_field) {
            if (!k.is_array() || k.size() != 2) throw ParseError("knots: expected [x, y] pairs");
            knots.emplace_back(as_number(k[0], "knots"), as_number(k[1], "knots"));
        }
        return Loss::piecewise(std::move(knots), truncation);
    }
    throw ParseError("kind: unknown loss kind '" + kind + "'");
}

KusuokaSpec parse_kusuoka(const json& doc) {
    const json& comps = require(doc, "components");
    if (!comps.is_array()) throw ParseError("components: expected an array");
    std::vector<KusuokaComponent> out;
    for (const auto& c : comps) {
        KusuokaComponent k;
        k.levels = as_numbers(require(c, "levels"), "components.levels");
        k.weights = as_numbers(require(c, "weights"), "components.weights");
        k.penalty = c.contains("penalty") ? as_number(c.at("penalty"), "components.penalty") : 0.0;
        out.push_back(std::move(k));
    }
    return KusuokaSpec(std::move(out));
}

FiniteSpaceDocument parse_finite_space(const json& doc) {
    FiniteSpace space(as_numbers(require(doc, "probs"), "probs"));
    const json& vars = require(doc, "variables");
    if (!vars.is_object()) throw ParseError("variables: expected an object of name -> values");
    std::map<std::string, RandomVariable> variables;
    for (auto it = vars.begin(); it != vars.end(); ++it) {
        variables.emplace(it.key(), RandomVariable(space, as_numbers(it.value(), "variables." + it.key())));
    }
    return {std::move(space), std::move(variables)};
}

std::vector<Density> parse_density_family(const json& doc, const FiniteSpace& space) {
    if (!doc.is_array()) throw ParseError("densities: expected an array of q-vectors");
    std::vector<Density> family;
    for (const auto& q : doc) family.emplace_back(space, as_numbers(q, "densities"));
    return family;
}

std::vector<double> read_number_stream(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path.string() + ": cannot open file");
    std::vector<double> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty()) continue;
        out.push_back(parse_double(t, path.string() + ":" + std::to_string(lineno)));
    }
    return out;
}

std::vector<double> parse_grid(std::string_view text) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = text.find(':', start);
        parts.push_back(trim(text.substr(start, pos == std::string_view::npos ? std::string_view::npos
                                                                              : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    if (parts.size() != 3) throw ParseError("grid: expected start:stop:step");
    const double lo = parse_double(parts[0], "grid.start");
    const double hi = parse_double(parts[1], "grid.stop");
    const double step = parse_double(parts[2], "grid.step");
    if (!(step > 0.0)) throw InvariantError("grid.step: must be positive");
    if (hi < lo) throw InvariantError("grid.stop: must be >= start");
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 0.5));
    if (n > 10'000'000) throw InvariantError("grid.step: grid too fine");
    std::vector<double> out;
    out.reserve(n + 1);
    for (std::size_t i = 0; i <= n; ++i) out.push_back(lo + static_cast<double>(i) * step);
    return out;
}

Partition parse_partition(std::string_view text, std::size_t states) {
    std::vector<std::vector<std::size_t>> blocks;
    std::stringstream blocks_in{std::string(text)};
    std::string block;
    while (std::getline(blocks_in, block, ';')) {
        std::vector<std::size_t> ids;
        std::stringstream ids_in(block);
        std::string id;
        while (std::getline(ids_in, id, ',')) {
            const std::string t = trim(id);
            std::size_t v = 0;
            const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
            if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
                throw ParseError("partition: '" + t + "' is not a state index");
            }
            ids.push_back(v);
        }
        blocks.push_back(std::move(ids));
    }
    return Partition(states, std::move(blocks));
}

}  // namespace cxls::io
