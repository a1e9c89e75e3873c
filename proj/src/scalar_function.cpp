#include "impulse/scalar_function.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "impulse/errors.hpp"

namespace impulse {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string join(const std::vector<double>& vs) {
    std::string out;
    for (std::size_t i = 0; i < vs.size(); ++i) {
        if (i) out += ", ";
        out += fmt(vs[i]);
    }
    return out;
}

double parse_number(const std::string& tok) {
    std::size_t pos = 0;
    double v;
    try {
        v = std::stod(tok, &pos);
    } catch (const std::exception&) {
        throw ValidationError("bad number in function spec: '" + tok + "'");
    }
    while (pos < tok.size() && std::isspace(static_cast<unsigned char>(tok[pos]))) ++pos;
    if (pos != tok.size())
        throw ValidationError("bad number in function spec: '" + tok + "'");
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

}  // namespace

ScalarFunction::ScalarFunction(std::function<double(double)> eval, std::string spec)
    : eval_(std::make_shared<const std::function<double(double)>>(std::move(eval))),
      spec_(std::move(spec)) {}

ScalarFunction ScalarFunction::constant(double c) {
    return {[c](double) { return c; }, "constant(" + fmt(c) + ")"};
}

ScalarFunction ScalarFunction::linear(double slope, double intercept) {
    std::string spec = intercept == 0.0 ? "linear(" + fmt(slope) + ")"
                                        : "linear(" + fmt(slope) + ", " + fmt(intercept) + ")";
    return {[slope, intercept](double x) { return slope * x + intercept; }, std::move(spec)};
}

ScalarFunction ScalarFunction::polynomial(std::vector<double> coeffs) {
    if (coeffs.empty()) throw ValidationError("polynomial needs at least one coefficient");
    std::string spec = "polynomial(" + join(coeffs) + ")";
    return {[c = std::move(coeffs)](double x) {
                double acc = 0.0;
                for (std::size_t k = c.size(); k-- > 0;) acc = acc * x + c[k];
                return acc;
            },
            std::move(spec)};
}

ScalarFunction ScalarFunction::tanh(double scale, double rate) {
    return {[scale, rate](double x) { return scale * std::tanh(rate * x); },
            "tanh(" + fmt(scale) + ", " + fmt(rate) + ")"};
}

ScalarFunction ScalarFunction::piecewise_linear(std::vector<double> xs, std::vector<double> ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw ValidationError("pwl needs >= 2 knots with matching x and y counts");
    if (!std::is_sorted(xs.begin(), xs.end()))
        throw ValidationError("pwl knots must have strictly increasing x");
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (xs[i] == xs[i - 1]) throw ValidationError("pwl knots must have strictly increasing x");
    std::string spec = "pwl(";
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) spec += ", ";
        spec += fmt(xs[i]) + ":" + fmt(ys[i]);
    }
    spec += ")";
    return {[xs = std::move(xs), ys = std::move(ys)](double x) {
                if (x <= xs.front()) return ys.front();
                if (x >= xs.back()) return ys.back();
                auto it = std::upper_bound(xs.begin(), xs.end(), x);
                const std::size_t i = static_cast<std::size_t>(it - xs.begin());
                const double w = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
                return ys[i - 1] + w * (ys[i] - ys[i - 1]);
            },
            std::move(spec)};
}

ScalarFunction ScalarFunction::capped_linear(double cap, double cost) {
    return {[cap, cost](double x) { return std::min(x, cap) - cost; },
            "capped_linear(" + fmt(cap) + ", " + fmt(cost) + ")"};
}

ScalarFunction ScalarFunction::capped_log(double cap, double scale, double cost) {
    return {[cap, scale, cost](double x) { return scale * std::log1p(std::min(x, cap)) - cost; },
            "capped_log(" + fmt(cap) + ", " + fmt(scale) + ", " + fmt(cost) + ")"};
}

ScalarFunction ScalarFunction::compact_polynomial(double half_width, std::vector<double> coeffs) {
    if (half_width <= 0.0) throw ValidationError("compact_polynomial needs half_width > 0");
    if (coeffs.empty()) throw ValidationError("compact_polynomial needs coefficients");
    std::string spec = "compact_polynomial(" + fmt(half_width) + ", " + join(coeffs) + ")";
    return {[w = half_width, c = std::move(coeffs)](double x) {
                if (std::abs(x) > w) return 0.0;
                double acc = 0.0;
                for (std::size_t k = c.size(); k-- > 0;) acc = acc * x + c[k];
                return acc;
            },
            std::move(spec)};
}

ScalarFunction ScalarFunction::parse(const std::string& spec) {
    const auto open = spec.find('(');
    const auto close = spec.rfind(')');
    if (open == std::string::npos || close == std::string::npos || close < open)
        throw ValidationError("malformed function spec: '" + spec + "'");
    std::string name = spec.substr(0, open);
    name.erase(std::remove_if(name.begin(), name.end(),
                              [](unsigned char c) { return std::isspace(c); }),
               name.end());
    const std::string body = spec.substr(open + 1, close - open - 1);

    std::vector<std::string> args;
    if (body.find_first_not_of(" \t") != std::string::npos) args = split(body, ',');

    auto num = [&](std::size_t i) { return parse_number(args.at(i)); };
    auto nums = [&]() {
        std::vector<double> vs;
        vs.reserve(args.size());
        for (const auto& a : args) vs.push_back(parse_number(a));
        return vs;
    };

    try {
        if (name == "constant" && args.size() == 1) return constant(num(0));
        if (name == "linear" && args.size() == 1) return linear(num(0));
        if (name == "linear" && args.size() == 2) return linear(num(0), num(1));
        if (name == "polynomial" && !args.empty()) return polynomial(nums());
        if (name == "tanh" && args.size() == 2) return tanh(num(0), num(1));
        if (name == "capped_linear" && args.size() == 2) return capped_linear(num(0), num(1));
        if (name == "capped_log" && args.size() == 3) return capped_log(num(0), num(1), num(2));
        if (name == "compact_polynomial" && args.size() >= 2) {
            auto vs = nums();
            const double w = vs.front();
            vs.erase(vs.begin());
            return compact_polynomial(w, std::move(vs));
        }
        if (name == "pwl" && args.size() >= 2) {
            std::vector<double> xs, ys;
            for (const auto& a : args) {
                const auto parts = split(a, ':');
                if (parts.size() != 2)
                    throw ValidationError("pwl knot must look like x:y, got '" + a + "'");
                xs.push_back(parse_number(parts[0]));
                ys.push_back(parse_number(parts[1]));
            }
            return piecewise_linear(std::move(xs), std::move(ys));
        }
    } catch (const std::out_of_range&) {
        throw ValidationError("wrong argument count in function spec: '" + spec + "'");
    }
    throw ValidationError("unknown function spec: '" + spec + "'");
}

}  // namespace impulse
