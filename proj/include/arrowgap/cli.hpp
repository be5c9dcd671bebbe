#pragma once

// Command runner behind the `arrowgap` executable. Kept separate from the
// numerical headers because it pulls in nlohmann/json.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "arrowgap/arrowgap.hpp"

namespace arrowgap::cli {

using json = nlohmann::json;

inline constexpr const char* kSchema = "arrowgap/1";
inline constexpr const char* kToolVersion = "1.0.0";

enum class OutputFormat { Json, Csv };

struct RunConfig {
    std::string command;
    json params = json::object();
    OutputFormat output_format = OutputFormat::Json;
    std::optional<std::string> plot_path;
};

struct RunResult {
    int exit_code = 0;
    json document;
    std::string csv;
    std::string svg;
};

/// Input validation failure; reported with the offending field.
class ParamError : public Error {
public:
    ParamError(const std::string& field, const std::string& what) : Error(field + ": " + what), field_(field) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

inline const std::vector<std::string>& commands()
{
    static const std::vector<std::string> c{"lqr-finite", "lqr-infinite", "bopt",  "gap",
                                            "margin",     "bicycle-sweep", "delay", "demo-all"};
    return c;
}

// ---------------------------------------------------------------- params --

namespace params {

inline const json& require(const json& p, const std::string& key)
{
    if (!p.contains(key)) throw ParamError(key, "required parameter missing");
    return p.at(key);
}

inline double number(const json& v, const std::string& field)
{
    if (v.is_number()) return v.get<double>();
    if (v.is_array() && v.size() == 1) return number(v[0], field);
    throw ParamError(field, "expected a number");
}

inline double number(const json& p, const std::string& key, double fallback)
{
    return p.contains(key) ? number(p.at(key), key) : fallback;
}

/// Scalar, flat list (column vector) or nested row-major arrays.
inline Matrix matrix(const json& v, const std::string& field)
{
    if (v.is_number()) return Matrix::Constant(1, 1, v.get<double>());
    if (!v.is_array()) throw ParamError(field, "expected a matrix (nested arrays)");
    if (v.empty()) return Matrix(0, 0);
    if (!v[0].is_array()) {
        Matrix m(static_cast<Eigen::Index>(v.size()), 1);
        for (std::size_t i = 0; i < v.size(); ++i) m(static_cast<Eigen::Index>(i), 0) = number(v[i], field);
        return m;
    }
    const std::size_t cols = v[0].size();
    Matrix m(static_cast<Eigen::Index>(v.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_array() || v[i].size() != cols) throw ParamError(field, "ragged matrix rows");
        for (std::size_t j = 0; j < cols; ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = number(v[i][j], field);
    }
    return m;
}

inline Vector vector(const json& v, const std::string& field)
{
    const Matrix m = matrix(v, field);
    if (m.cols() != 1 && m.rows() != 1) throw ParamError(field, "expected a vector");
    return Eigen::Map<const Vector>(m.data(), m.size());
}

/// Coefficients in descending powers of s.
inline Polynomial polynomial(const json& v, const std::string& field)
{
    if (v.is_number()) return Polynomial{v.get<double>()};
    if (!v.is_array() || v.empty()) throw ParamError(field, "expected coefficient list");
    std::vector<double> c;
    for (auto it = v.rbegin(); it != v.rend(); ++it) c.push_back(number(*it, field));
    return Polynomial(std::move(c));
}

inline TransferFunction transfer_function(const json& v, const std::string& field)
{
    if (v.is_number()) return {Polynomial{v.get<double>()}, Polynomial{1.0}};
    if (!v.is_object() || !v.contains("num")) throw ParamError(field, "expected {\"num\": [...], \"den\": [...]}");
    TransferFunction tf{polynomial(v.at("num"), field + ".num"),
                        v.contains("den") ? polynomial(v.at("den"), field + ".den") : Polynomial{1.0}};
    if (tf.den.is_zero()) throw ParamError(field, "zero denominator");
    return tf;
}

/// A plant given either as {"A","B","C"[,"D"]} or as {"num","den"}.
inline StateSpace system(const json& v, const std::string& field)
{
    if (v.is_object() && v.contains("A")) {
        const Matrix a = matrix(v.at("A"), field + ".A");
        const Matrix b = matrix(require(v, "B"), field + ".B");
        const Matrix c = matrix(require(v, "C"), field + ".C");
        const Matrix d = v.contains("D") ? matrix(v.at("D"), field + ".D") : Matrix::Zero(c.rows(), b.cols());
        try {
            return StateSpace(a, b, c, d);
        } catch (const Error& e) {
            throw ParamError(field, e.what());
        }
    }
    return realize(transfer_function(v, field));
}

inline Direction direction(const json& p, Direction fallback = Direction::Forward)
{
    if (!p.contains("direction")) return fallback;
    const std::string d = p.at("direction").get<std::string>();
    if (d == "f" || d == "forward") return Direction::Forward;
    if (d == "b" || d == "backward") return Direction::Backward;
    throw ParamError("direction", "expected f|b|forward|backward");
}

}  // namespace params

// ------------------------------------------------------------ conversion --

inline json to_json(const Matrix& m)
{
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

/// Descending powers, matching the input convention.
inline json to_json(const Polynomial& p)
{
    json c = json::array();
    for (int k = p.degree(); k >= 0; --k) c.push_back(p[k]);
    return c;
}

inline json to_json(const std::vector<Complex>& zs)
{
    json out = json::array();
    for (const Complex& z : zs) out.push_back({z.real(), z.imag()});
    return out;
}

inline std::string sig6(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// -------------------------------------------------------------- commands --

struct CommandOutput {
    json results = json::object();
    json residuals = json::object();
    json tolerances = json::object();
    std::string csv;
    std::string svg;
    bool ok = true;
};

inline LqrProblem lqr_problem(const json& p, bool finite)
{
    LqrProblem prob;
    const Matrix a = params::matrix(params::require(p, "A"), "A");
    const Matrix b = params::matrix(params::require(p, "B"), "B");
    const Matrix c = params::matrix(params::require(p, "C"), "C");
    try {
        prob.plant = StateSpace(a, b, c, Matrix::Zero(c.rows(), b.cols()));
    } catch (const Error& e) {
        throw ParamError("A/B/C", e.what());
    }
    prob.Q = params::matrix(params::require(p, "Q"), "Q");
    prob.R = params::matrix(params::require(p, "R"), "R");
    prob.x0 = params::vector(params::require(p, "x0"), "x0");
    prob.direction = params::direction(p);
    if (finite) {
        prob.horizon = params::number(params::require(p, "T"), "T");
        prob.H = params::matrix(params::require(p, "H"), "H");
    }
    return prob;
}

inline CommandOutput cmd_lqr_finite(const json& p)
{
    const LqrProblem prob = lqr_problem(p, true);
    const LqrFiniteResult r = lqr_cost_finite(prob);
    CommandOutput out;
    out.results["cost"] = r.cost;
    out.results["S0"] = to_json(r.S0);
    out.results["direction"] = to_string(prob.direction);
    out.results["gain_at_0"] = to_json(r.gains(0.0));
    out.tolerances["ode_successive_difference"] = 1e-8;
    return out;
}

inline CommandOutput cmd_lqr_infinite(const json& p)
{
    const LqrProblem prob = lqr_problem(p, false);
    const LqrInfiniteResult r = lqr_cost_infinite(prob);
    CommandOutput out;
    out.results["cost"] = r.cost;
    out.results["S"] = to_json(r.S);
    out.results["direction"] = to_string(prob.direction);
    out.residuals["riccati"] = r.residual;
    out.tolerances["hamiltonian_axis"] = kHamiltonianAxisTolerance;
    return out;
}

/// Plant for bopt: explicit system, or the near-cancellation plant 1 + eps/(s+1).
inline StateSpace bopt_plant(const json& p)
{
    if (p.contains("plant")) return params::system(p.at("plant"), "plant");
    if (p.contains("epsilon")) return StateSpace::siso(-1.0, params::number(p.at("epsilon"), "epsilon"), 1.0, 1.0);
    if (p.contains("A")) return params::system(p, "plant");
    throw ParamError("plant", "required parameter missing (plant, A/B/C/D or epsilon)");
}

inline json witness_json(const BoptWitness& w)
{
    json j;
    j["b_opt"] = w.b_opt;
    j["lambda_max_YX"] = w.lambda_max_YX;
    j["stabilizable"] = w.stabilizable;
    j["Y"] = to_json(w.Y);
    j["X"] = to_json(w.X);
    if (!w.diagnostic.empty()) j["diagnostic"] = w.diagnostic;
    return j;
}

inline CommandOutput cmd_bopt(const json& p)
{
    const StateSpace plant = bopt_plant(p);
    CommandOutput out;
    std::vector<Direction> dirs;
    if (p.contains("direction"))
        dirs.push_back(params::direction(p));
    else
        dirs = {Direction::Forward, Direction::Backward};
    for (Direction d : dirs) {
        const BoptWitness w = b_opt(plant, d);
        out.results[to_string(d)] = witness_json(w);
        out.residuals[std::string(to_string(d)) + "_riccati"] = w.riccati_residual;
        out.residuals[std::string(to_string(d)) + "_lyapunov"] = w.lyapunov_residual;
    }
    if (dirs.size() == 1) out.results["b_opt"] = out.results[to_string(dirs[0])]["b_opt"];
    out.tolerances["hamiltonian_axis"] = kHamiltonianAxisTolerance;
    return out;
}

inline CommandOutput cmd_gap(const json& p)
{
    const RationalFraction a = normalized_fraction(params::transfer_function(params::require(p, "P1"), "P1"));
    const RationalFraction b = normalized_fraction(params::transfer_function(params::require(p, "P2"), "P2"));
    const GapReport g = vgap(a, b);
    CommandOutput out;
    out.results["delta_l2"] = g.delta_l2;
    out.results["vgap_f"] = g.vgap_f;
    out.results["vgap_b"] = g.vgap_b;
    out.results["h"] = to_json(g.h);
    out.results["deg_h_plus"] = g.deg_h_plus;
    out.results["deg_h_minus"] = g.deg_h_minus;
    out.results["mu1"] = g.mu1;
    out.results["mu2"] = g.mu2;
    out.results["winding_defined"] = g.winding_defined;
    out.results["both_directions_close"] = g.both_directions_close;
    if (p.contains("direction")) {
        const Direction d = params::direction(p);
        out.results["direction"] = to_string(d);
        out.results["vgap"] = g.vgap(d);
    }
    out.residuals["delta_l2_grid_minus_hamiltonian"] = g.delta_l2_grid - g.delta_l2;
    out.tolerances["axis"] = kDefaultAxisTolerance;
    out.tolerances["unit_gap"] = kGapUnitTolerance;
    return out;
}

inline CommandOutput cmd_margin(const json& p)
{
    const StateSpace plant = params::system(params::require(p, "plant"), "plant");
    const StateSpace ctrl = params::system(params::require(p, "controller"), "controller");
    const MarginReport m = b_margin(plant, ctrl);
    CommandOutput out;
    out.results["b"] = m.b;
    out.results["internally_f_stable"] = m.internally_f_stable;
    if (std::isfinite(m.hinf_norm_H)) out.results["hinf_norm_H"] = m.hinf_norm_H;
    if (plant.is_siso()) {
        const BoptWitness w = b_opt(plant, Direction::Forward);
        out.results["b_opt_f"] = w.b_opt;
    }
    return out;
}

// ------------------------------------------------------------ bicycle ----

struct BicycleParams {
    double alpha = 1.0 / 3.0;
    double beta = 2.0;
    double gamma = 9.0;
    std::vector<double> v_grid;

    void validate() const
    {
        if (!(alpha > 0.0)) throw ParamError("alpha", "must be positive");
        if (!(beta > 0.0)) throw ParamError("beta", "must be positive");
        if (!(gamma > 0.0)) throw ParamError("gamma", "must be positive");
        if (v_grid.empty()) throw ParamError("V", "empty speed grid");
        for (std::size_t i = 0; i < v_grid.size(); ++i) {
            if (!(v_grid[i] > 0.0)) throw ParamError("V", "speeds must be positive");
            if (i > 0 && !(v_grid[i] > v_grid[i - 1])) throw ParamError("V", "speeds must be strictly increasing");
        }
    }
};

/// alpha V (s + beta V) / (s^2 - gamma) in controllable canonical form; a
/// pole-zero coincidence at beta V = sqrt(gamma) stays as a hidden mode.
inline StateSpace bicycle_plant(double alpha, double beta, double gamma, double V)
{
    return controllable_canonical({Polynomial{alpha * V * beta * V, alpha * V}, Polynomial{-gamma, 0.0, 1.0}});
}

struct BicycleRow {
    double V = 0.0;
    double b_opt_f = 0.0;
    double b_opt_b = 0.0;
    bool stabilizable_f = false;
    bool stabilizable_b = false;
    std::string diagnostic;
};

inline std::vector<BicycleRow> bicycle_sweep(const BicycleParams& bp)
{
    bp.validate();
    std::vector<std::future<BicycleRow>> jobs;
    for (double V : bp.v_grid) {
        jobs.push_back(std::async(std::launch::async, [&bp, V] {
            BicycleRow row;
            row.V = V;
            const StateSpace plant = bicycle_plant(bp.alpha, bp.beta, bp.gamma, V);
            const BoptWitness f = b_opt(plant, Direction::Forward);
            const BoptWitness b = b_opt(plant, Direction::Backward);
            row.b_opt_f = f.b_opt;
            row.b_opt_b = b.b_opt;
            row.stabilizable_f = f.stabilizable;
            row.stabilizable_b = b.stabilizable;
            row.diagnostic = !f.diagnostic.empty() ? f.diagnostic : b.diagnostic;
            return row;
        }));
    }
    std::vector<BicycleRow> rows;
    for (auto& j : jobs) rows.push_back(j.get());
    return rows;
}

inline std::vector<double> speed_grid(double vmin, double vmax, double step)
{
    if (!(step > 0.0)) throw ParamError("V-step", "must be positive");
    if (!(vmax >= vmin)) throw ParamError("V-max", "must not be below V-min");
    std::vector<double> g;
    const long n = std::lround(std::floor((vmax - vmin) / step + 1e-9));
    for (long i = 0; i <= n; ++i) g.push_back(vmin + static_cast<double>(i) * step);
    return g;
}

/// Two polylines over a framed plot area with ticks and axis labels.
inline std::string bicycle_svg(const std::vector<BicycleRow>& rows)
{
    const double W = 640, H = 420, left = 70, right = 20, top = 30, bottom = 60;
    const double vmin = rows.front().V, vmax = rows.back().V;
    auto px = [&](double v) { return left + (vmax > vmin ? (v - vmin) / (vmax - vmin) : 0.5) * (W - left - right); };
    auto py = [&](double b) { return top + (1.0 - b) * (H - top - bottom); };
    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    s << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << W - left - right << "\" height=\""
      << H - top - bottom << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double b = i / 5.0;
        s << "<text x=\"" << left - 8 << "\" y=\"" << py(b) + 4 << "\" font-size=\"12\" text-anchor=\"end\">"
          << sig6(b) << "</text>\n";
        const double v = vmin + (vmax - vmin) * i / 5.0;
        s << "<text x=\"" << px(v) << "\" y=\"" << H - bottom + 18 << "\" font-size=\"12\" text-anchor=\"middle\">"
          << sig6(v) << "</text>\n";
    }
    auto line = [&](auto get, const char* colour, const char* dash) {
        s << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"2\"" << dash << " points=\"";
        for (const auto& r : rows) s << px(r.V) << "," << py(get(r)) << " ";
        s << "\"/>\n";
    };
    line([](const BicycleRow& r) { return r.b_opt_f; }, "#1f77b4", "");
    line([](const BicycleRow& r) { return r.b_opt_b; }, "#d62728", " stroke-dasharray=\"6,4\"");
    s << "<text x=\"" << (left + W - right) / 2 << "\" y=\"" << H - 15
      << "\" font-size=\"14\" text-anchor=\"middle\">V (m/s)</text>\n";
    s << "<text x=\"18\" y=\"" << (top + H - bottom) / 2 << "\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << (top + H - bottom) / 2 << ")\">b_opt</text>\n";
    s << "<text x=\"" << W - right - 10 << "\" y=\"" << top + 20
      << "\" font-size=\"12\" text-anchor=\"end\" fill=\"#1f77b4\">b_opt,f</text>\n";
    s << "<text x=\"" << W - right - 10 << "\" y=\"" << top + 36
      << "\" font-size=\"12\" text-anchor=\"end\" fill=\"#d62728\">b_opt,b</text>\n";
    s << "</svg>\n";
    return s.str();
}

inline CommandOutput cmd_bicycle_sweep(const json& p)
{
    BicycleParams bp;
    bp.alpha = params::number(p, "alpha", bp.alpha);
    bp.beta = params::number(p, "beta", bp.beta);
    bp.gamma = params::number(p, "gamma", bp.gamma);
    if (p.contains("V"))
        for (const auto& v : p.at("V")) bp.v_grid.push_back(params::number(v, "V"));
    else
        bp.v_grid = speed_grid(params::number(p, "V-min", 0.25), params::number(p, "V-max", 10.0),
                               params::number(p, "V-step", 0.25));
    const std::vector<BicycleRow> rows = bicycle_sweep(bp);
    CommandOutput out;
    json table = json::array();
    std::ostringstream csv;
    csv << "V,b_opt_f,b_opt_b,stabilizable_f,stabilizable_b\n";
    for (const auto& r : rows) {
        json row{{"V", r.V},
                 {"b_opt_f", r.b_opt_f},
                 {"b_opt_b", r.b_opt_b},
                 {"stabilizable_f", r.stabilizable_f},
                 {"stabilizable_b", r.stabilizable_b}};
        if (!r.diagnostic.empty()) row["diagnostic"] = r.diagnostic;
        table.push_back(std::move(row));
        csv << sig6(r.V) << "," << sig6(r.b_opt_f) << "," << sig6(r.b_opt_b) << "," << (r.stabilizable_f ? 1 : 0)
            << "," << (r.stabilizable_b ? 1 : 0) << "\n";
    }
    out.results["rows"] = std::move(table);
    out.results["alpha"] = bp.alpha;
    out.results["beta"] = bp.beta;
    out.results["gamma"] = bp.gamma;
    out.csv = csv.str();
    out.svg = bicycle_svg(rows);
    return out;
}

inline CommandOutput cmd_delay(const json& p)
{
    const double tau = params::number(params::require(p, "tau"), "tau");
    const double R = params::number(p, "radius", default_contour_radius(tau));
    const DelayGapReport g = delay_gap(tau, R);
    const DelayStability st = delay_loop_stability(tau, R);
    CommandOutput out;
    out.results["tau"] = tau;
    out.results["delta_l2"] = g.delta_l2;
    out.results["winding"] = g.winding;
    out.results["vgap_f"] = g.vgap_f;
    out.results["attained_omega"] = g.attained_omega;
    out.results["rhp_root_count"] = st.rhp_root_count;
    out.results["f_stable"] = st.f_stable;
    out.results["contour_radius"] = R;
    out.tolerances["grid_points"] = 4096;
    return out;
}

// ---------------------------------------------------------------- demo ---

struct DemoCheck {
    std::string name;
    double value;
    double expected;
    double tolerance;
    bool pass() const { return std::abs(value - expected) <= tolerance; }
};

inline CommandOutput cmd_demo_all(const json&)
{
    std::vector<DemoCheck> checks;
    const json scalar_lqr{{"A", 1}, {"B", 1}, {"C", 1}, {"Q", 1}, {"R", 1}, {"T", 1}, {"H", 10}, {"x0", 1}};
    {
        json f = scalar_lqr;
        f["direction"] = "f";
        json b = scalar_lqr;
        b["direction"] = "b";
        checks.push_back({"lqr-finite forward cost", cmd_lqr_finite(f).results["cost"], 2.5415, 5e-4});
        checks.push_back({"lqr-finite backward cost", cmd_lqr_finite(b).results["cost"], 0.5495, 5e-4});
    }
    for (double eps : {0.01, 0.1}) {
        const Matrix one = Matrix::Constant(1, 1, 1.0);
        const RiccatiPair rp = care_extremal(one, Matrix::Constant(1, 1, eps), one, one, one);
        const double sp = rp.S_plus(0, 0), sm = rp.S_minus(0, 0);
        checks.push_back({"ARE S+ - (2/eps^2 + 1/2), eps=" + sig6(eps), sp - 2.0 / (eps * eps) - 0.5, 0.0, eps * eps});
        checks.push_back({"ARE S- + 1/2, eps=" + sig6(eps), sm + 0.5, 0.0, eps * eps});
    }
    {
        const RationalFraction one = normalized_fraction(TransferFunction{Polynomial{1.0}, Polynomial{1.0}});
        const RationalFraction integ = normalized_fraction(TransferFunction{Polynomial{1.0}, Polynomial{0.0, 1.0}});
        const RationalFraction dbl = normalized_fraction(TransferFunction{Polynomial{1.0}, Polynomial{0.0, 0.0, 1.0}});
        const GapReport g12 = vgap(one, integ);
        const GapReport g14 = vgap(one, dbl);
        checks.push_back({"vgap_f(1, 1/s)", g12.vgap_f, 1.0 / std::numbers::sqrt2, 1e-6});
        checks.push_back({"vgap_f(1, 1/s^2)", g14.vgap_f, 1.0, 0.0});
        checks.push_back({"vgap_b(1, 1/s^2)", g14.vgap_b, 1.0, 0.0});
    }
    for (double eps : {0.02, 0.1, 0.5}) {
        const StateSpace plant = StateSpace::siso(-1.0, eps, 1.0, 1.0);
        const double q = std::sqrt(1.0 + eps + eps * eps / 2.0);
        checks.push_back({"b_opt,f of 1+eps/(s+1), eps=" + sig6(eps), b_opt(plant, Direction::Forward).b_opt,
                          std::sqrt(1.0 - (q - 1.0 - eps / 2.0) / (2.0 * q)), 1e-6});
        checks.push_back({"b_opt,b of 1+eps/(s+1), eps=" + sig6(eps), b_opt(plant, Direction::Backward).b_opt,
                          std::sqrt(1.0 - (q + 1.0 + eps / 2.0) / (2.0 * q)), 1e-6});
    }
    {
        const StateSpace bike = bicycle_plant(1.0 / 3.0, 2.0, 9.0, 1.5);
        checks.push_back({"bicycle b_opt,b(V=1.5)", b_opt(bike, Direction::Backward).b_opt, 0.0, 1e-3});
    }
    checks.push_back({"delay vgap_f(tau=-0.1)", delay_gap(-0.1).vgap_f, 1.0, 0.0});
    {
        const DelayGapReport g = delay_gap(0.1);
        checks.push_back({"delay winding(tau=0.1)", static_cast<double>(g.winding), 0.0, 0.0});
        checks.push_back({"delay vgap_f(tau=0.1) below 0.1", g.vgap_f < 0.1 ? 0.0 : 1.0, 0.0, 0.0});
    }

    CommandOutput out;
    json list = json::array();
    bool all = true;
    for (const auto& c : checks) {
        all = all && c.pass();
        list.push_back({{"name", c.name},
                        {"value", c.value},
                        {"expected", c.expected},
                        {"tolerance", c.tolerance},
                        {"pass", c.pass()}});
    }
    out.results["checks"] = std::move(list);
    out.results["all_pass"] = all;
    out.ok = all;
    return out;
}

// ----------------------------------------------------------------- run ---

inline RunResult run(const RunConfig& cfg)
{
    RunResult rr;
    json& doc = rr.document;
    doc["schema"] = kSchema;
    doc["tool_version"] = kToolVersion;
    doc["command"] = cfg.command;
    doc["inputs"] = cfg.params;
    try {
        CommandOutput out;
        const json& p = cfg.params;
        if (cfg.command == "lqr-finite")
            out = cmd_lqr_finite(p);
        else if (cfg.command == "lqr-infinite")
            out = cmd_lqr_infinite(p);
        else if (cfg.command == "bopt")
            out = cmd_bopt(p);
        else if (cfg.command == "gap")
            out = cmd_gap(p);
        else if (cfg.command == "margin")
            out = cmd_margin(p);
        else if (cfg.command == "bicycle-sweep")
            out = cmd_bicycle_sweep(p);
        else if (cfg.command == "delay")
            out = cmd_delay(p);
        else if (cfg.command == "demo-all")
            out = cmd_demo_all(p);
        else
            throw ParamError("command", "unknown command '" + cfg.command + "'");
        doc["results"] = std::move(out.results);
        doc["diagnostics"] = {{"residuals", std::move(out.residuals)}, {"tolerances", std::move(out.tolerances)}};
        rr.csv = std::move(out.csv);
        rr.svg = std::move(out.svg);
        rr.exit_code = out.ok ? 0 : 1;
    } catch (const ParamError& e) {
        doc["error"] = e.what();
        doc["error_field"] = e.field();
        rr.exit_code = 2;
    } catch (const json::exception& e) {
        doc["error"] = std::string("malformed parameter: ") + e.what();
        rr.exit_code = 2;
    } catch (const Error& e) {
        doc["error"] = e.what();
        rr.exit_code = 1;
    }
    return rr;
}

/// Scalar results flattened to key,value rows; sweeps use their own table.
inline std::string to_csv(const RunResult& rr)
{
    if (!rr.csv.empty()) return rr.csv;
    std::ostringstream s;
    s << "key,value\n";
    if (rr.document.contains("error")) {
        s << "error,\"" << rr.document["error"].get<std::string>() << "\"\n";
        return s.str();
    }
    for (const auto& [k, v] : rr.document["results"].items()) {
        if (v.is_number())
            s << k << "," << sig6(v.get<double>()) << "\n";
        else if (v.is_boolean())
            s << k << "," << (v.get<bool>() ? "true" : "false") << "\n";
        else if (v.is_string())
            s << k << "," << v.get<std::string>() << "\n";
    }
    return s.str();
}

}  // namespace arrowgap::cli
