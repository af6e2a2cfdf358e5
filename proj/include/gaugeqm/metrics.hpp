#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "gaugeqm/geometry.hpp"

namespace gaugeqm {

namespace metrics {

/// Constant metric with the given components.
inline ChartMetric constant(const Mat& g, std::string name,
                            Signature sig = Signature::positive_definite) {
    const int n = static_cast<int>(g.rows());
    ChartMetric m;
    m.dim = n;
    m.signature = sig;
    m.name = std::move(name);
    m.components = [g](const Point&) { return g; };
    m.first_partials = [n](const Point&) { return make_rank3(n); };
    m.second_partials = [n](const Point&) { return MetricHessian(n, make_rank3(n)); };
    return m;
}

inline ChartMetric flat(int n) {
    require(n >= 1, ErrorKind::invalid_argument, "flat chart needs dimension >= 1");
    return constant(Mat::Identity(n, n), "flat-" + std::to_string(n));
}

/// diag(+1, -1, ..., -1) with the time coordinate first, so that
/// box psi + m^2 psi = 0 has the mass shell omega^2 = |k|^2 + m^2.
inline ChartMetric minkowski(int n) {
    require(n >= 2, ErrorKind::invalid_argument, "minkowski chart needs dimension >= 2");
    Mat g = -Mat::Identity(n, n);
    g(0, 0) = 1.0;
    return constant(g, "minkowski-" + std::to_string(n), Signature::lorentzian);
}

inline ChartMetric diagonal(const std::vector<double>& c) {
    require(!c.empty(), ErrorKind::invalid_argument, "diag metric needs at least one entry");
    Mat g = Mat::Zero(c.size(), c.size());
    int negatives = 0;
    std::ostringstream name;
    name << "diag:";
    for (std::size_t i = 0; i < c.size(); ++i) {
        g(i, i) = c[i];
        negatives += c[i] < 0;
        name << (i ? "," : "") << c[i];
    }
    return constant(g, name.str(),
                    negatives == 0 ? Signature::positive_definite : Signature::lorentzian);
}

/// Round 2-sphere of radius a in (theta, phi).
inline ChartMetric sphere(double a) {
    require(a > 0, ErrorKind::invalid_argument, "sphere radius must be positive");
    ChartMetric m;
    m.dim = 2;
    m.name = "sphere:" + std::to_string(a);
    const double a2 = a * a;
    m.components = [a2](const Point& x) {
        const double s = std::sin(x(0));
        Mat g = Mat::Zero(2, 2);
        g(0, 0) = a2;
        g(1, 1) = a2 * s * s;
        return g;
    };
    m.first_partials = [a2](const Point& x) {
        Rank3 d = make_rank3(2);
        d[0](1, 1) = a2 * std::sin(2 * x(0));
        return d;
    };
    m.second_partials = [a2](const Point& x) {
        MetricHessian dd(2, make_rank3(2));
        dd[0][0](1, 1) = 2 * a2 * std::cos(2 * x(0));
        return dd;
    };
    m.in_domain = [](const Point& x) { return std::abs(std::sin(x(0))) > 1e-8; };
    return m;
}

/// Poincare half-plane diag(1/y^2, 1/y^2), y > 0.
inline ChartMetric hyperbolic2() {
    ChartMetric m;
    m.dim = 2;
    m.name = "hyperbolic2";
    m.components = [](const Point& x) {
        const double w = 1.0 / (x(1) * x(1));
        return Mat(Mat::Identity(2, 2) * w);
    };
    m.first_partials = [](const Point& x) {
        Rank3 d = make_rank3(2);
        d[1] = Mat::Identity(2, 2) * (-2.0 / std::pow(x(1), 3));
        return d;
    };
    m.second_partials = [](const Point& x) {
        MetricHessian dd(2, make_rank3(2));
        dd[1][1] = Mat::Identity(2, 2) * (6.0 / std::pow(x(1), 4));
        return dd;
    };
    m.in_domain = [](const Point& x) { return x(1) > 0; };
    return m;
}

/// One-dimensional periodic chart with g_11 = (1 + amp sin x)^2, |amp| < 1.
inline ChartMetric ring_warp(double amp) {
    require(std::abs(amp) < 1, ErrorKind::invalid_argument, "ring-warp amplitude must be < 1");
    ChartMetric m;
    m.dim = 1;
    m.name = "ring-warp:" + std::to_string(amp);
    m.components = [amp](const Point& x) {
        const double w = 1 + amp * std::sin(x(0));
        return Mat(Mat::Constant(1, 1, w * w));
    };
    m.first_partials = [amp](const Point& x) {
        Rank3 d = make_rank3(1);
        d[0](0, 0) = 2 * (1 + amp * std::sin(x(0))) * amp * std::cos(x(0));
        return d;
    };
    m.second_partials = [amp](const Point& x) {
        MetricHessian dd(1, make_rank3(1));
        const double s = std::sin(x(0)), c = std::cos(x(0));
        dd[0][0](0, 0) = 2 * (amp * amp * c * c - (1 + amp * s) * amp * s);
        return dd;
    };
    return m;
}

/// One monomial term c * prod x_i^p_i.
struct Monomial {
    double coeff = 0.0;
    std::vector<int> powers;
};

/// Diagonal metric whose entries are polynomials in the chart coordinates;
/// `entries[i]` is the table for g_ii.
inline ChartMetric diagonal_polynomial(int n, std::vector<std::vector<Monomial>> entries,
                                       std::string name = "diagonal-polynomial") {
    require(n >= 1 && static_cast<int>(entries.size()) == n, ErrorKind::invalid_metric,
            "diagonal-polynomial needs one coefficient table per dimension");
    for (const auto& table : entries)
        for (const auto& t : table)
            require(static_cast<int>(t.powers.size()) == n, ErrorKind::invalid_metric,
                    "monomial power list must have one entry per dimension");
    auto eval = [n](const std::vector<Monomial>& table, const Point& x, int da, int db) {
        double s = 0.0;
        for (const auto& t : table) {
            std::vector<int> p = t.powers;
            double c = t.coeff;
            for (int d : {da, db}) {
                if (d < 0) continue;
                c *= p[d];
                p[d] -= 1;
            }
            if (c == 0.0) continue;
            for (int i = 0; i < n; ++i) c *= std::pow(x(i), p[i]);
            s += c;
        }
        return s;
    };
    ChartMetric m;
    m.dim = n;
    m.name = std::move(name);
    m.components = [n, entries, eval](const Point& x) {
        Mat g = Mat::Zero(n, n);
        for (int i = 0; i < n; ++i) g(i, i) = eval(entries[i], x, -1, -1);
        return g;
    };
    m.first_partials = [n, entries, eval](const Point& x) {
        Rank3 d = make_rank3(n);
        for (int a = 0; a < n; ++a)
            for (int i = 0; i < n; ++i) d[a](i, i) = eval(entries[i], x, a, -1);
        return d;
    };
    m.second_partials = [n, entries, eval](const Point& x) {
        MetricHessian dd(n, make_rank3(n));
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                for (int i = 0; i < n; ++i) dd[a][b](i, i) = eval(entries[i], x, a, b);
        return dd;
    };
    m.in_domain = [n, entries, eval](const Point& x) {
        for (int i = 0; i < n; ++i)
            if (!(eval(entries[i], x, -1, -1) > 0)) return false;
        return true;
    };
    return m;
}

namespace detail {
inline double parse_number(const std::string& s, const std::string& id) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    require(used == s.size() && !s.empty(), ErrorKind::invalid_metric,
            "cannot parse number '" + s + "' in metric id '" + id + "'");
    return v;
}
} // namespace detail

/// Built-in metrics by id: "flat-<N>", "minkowski-<N>", "sphere:<a>",
/// "hyperbolic2", "diag:<c1,...,cN>", "ring-warp:<amp>".
inline ChartMetric by_name(const std::string& id) {
    auto starts = [&](const std::string& p) { return id.rfind(p, 0) == 0; };
    if (starts("flat-"))
        return flat(static_cast<int>(detail::parse_number(id.substr(5), id)));
    if (starts("minkowski-"))
        return minkowski(static_cast<int>(detail::parse_number(id.substr(10), id)));
    if (starts("sphere:")) return sphere(detail::parse_number(id.substr(7), id));
    if (id == "hyperbolic2") return hyperbolic2();
    if (starts("ring-warp:")) return ring_warp(detail::parse_number(id.substr(10), id));
    if (starts("diag:")) {
        std::vector<double> c;
        std::stringstream ss(id.substr(5));
        std::string item;
        while (std::getline(ss, item, ',')) c.push_back(detail::parse_number(item, id));
        return diagonal(c);
    }
    throw Error(ErrorKind::invalid_metric, "unknown metric id '" + id + "'");
}

/// User metric description:
///   {"dim": 2, "kind": "diagonal-polynomial",
///    "entries": [[{"c": 1.0, "pow": [0, 0]}], [{"c": 1.0, "pow": [2, 0]}]]}
inline ChartMetric from_json(const nlohmann::json& j) {
    require(j.is_object(), ErrorKind::invalid_metric, "metric description must be an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        require(it.key() == "dim" || it.key() == "kind" || it.key() == "entries" ||
                    it.key() == "name",
                ErrorKind::invalid_metric, "unknown field '" + it.key() + "' in metric");
    require(j.contains("dim") && j["dim"].is_number_integer(), ErrorKind::invalid_metric,
            "metric field 'dim' must be an integer");
    require(j.value("kind", std::string{}) == "diagonal-polynomial", ErrorKind::invalid_metric,
            "metric field 'kind' must be \"diagonal-polynomial\"");
    const int n = j["dim"].get<int>();
    require(j.contains("entries") && j["entries"].is_array(), ErrorKind::invalid_metric,
            "metric field 'entries' must be an array");
    std::vector<std::vector<Monomial>> entries;
    for (const auto& table : j["entries"]) {
        std::vector<Monomial> terms;
        require(table.is_array(), ErrorKind::invalid_metric,
                "each metric entry must be an array of terms");
        for (const auto& t : table) {
            require(t.is_object() && t.contains("c") && t.contains("pow"),
                    ErrorKind::invalid_metric, "metric term needs 'c' and 'pow'");
            terms.push_back({t["c"].get<double>(), t["pow"].get<std::vector<int>>()});
        }
        entries.push_back(std::move(terms));
    }
    return diagonal_polynomial(n, std::move(entries), j.value("name", "diagonal-polynomial"));
}

} // namespace metrics

} // namespace gaugeqm
