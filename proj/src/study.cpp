#include "ipmix/study.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include <json.hpp>

#include "ipmix/error.hpp"
#include "ipmix/parallel.hpp"

namespace ipmix
{

namespace
{

using Derivs = std::array<double, 3>; // g, g', g''
using Factor = std::function<Derivs(double)>;

/// u_a(x) = c_a prod_d g_{a,d}(x_d).
struct SeparableField
{
    int dim = 2;
    std::vector<double> scale;
    std::vector<std::vector<Factor>> factors;

    /// d^{|order|} u_a / prod_d dx_d^{order_d}, order_d <= 2.
    double derivative(int a, const Point& x, const std::array<int, 3>& order) const
    {
        double v = scale[a];
        for (int d = 0; d < dim; ++d)
            v *= factors[a][d](x(d))[order[d]];
        return v;
    }
};

double factorial(int n)
{
    double r = 1.0;
    for (int i = 2; i <= n; ++i)
        r *= i;
    return r;
}

ManufacturedCase make_case(const SeparableField& field, const Material& material)
{
    const int dim    = field.dim;
    const double mu  = material.mu;
    const double lam = material.lambda;

    auto grad = [field, dim](const Point& x) {
        SmallMatrix g(dim, dim);
        for (int a = 0; a < dim; ++a)
            for (int b = 0; b < dim; ++b)
            {
                std::array<int, 3> o{0, 0, 0};
                o[b] = 1;
                g(a, b) = field.derivative(a, x, o);
            }
        return g;
    };
    auto second = [field](int a, int b, int c, const Point& x) {
        std::array<int, 3> o{0, 0, 0};
        ++o[b];
        ++o[c];
        return field.derivative(a, x, o);
    };

    ManufacturedCase mc;
    mc.dim      = dim;
    mc.material = material;
    mc.u        = [field, dim](const Point& x) {
        Point u(dim);
        for (int a = 0; a < dim; ++a)
            u(a) = field.derivative(a, x, {0, 0, 0});
        return u;
    };
    mc.grad_u = grad;
    mc.sigma  = [grad, mu, lam, dim](const Point& x) {
        const SmallMatrix g   = grad(x);
        const SmallMatrix eps = 0.5 * (g + g.transpose());
        return SmallMatrix(2.0 * mu * eps + lam * eps.trace() * SmallMatrix::Identity(dim, dim));
    };
    mc.f = [second, mu, lam, dim](const Point& x) {
        Point f = Point::Zero(dim);
        for (int a = 0; a < dim; ++a)
            for (int b = 0; b < dim; ++b)
                f(a) += mu * (second(a, b, b, x) + second(b, a, b, x)) + lam * second(b, a, b, x);
        return f;
    };
    return mc;
}

std::string format_number(const char* fmt, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

nlohmann::json record_to_json(const ErrorRecord& r)
{
    return {{"m", r.m},
            {"err_u", r.err_u},
            {"err_sigma", r.err_sigma},
            {"err_div", r.err_div},
            {"err_jump", r.err_jump},
            {"err_star", r.err_star},
            {"penalty", r.penalty},
            {"dim_V", r.dim_v},
            {"dim_Sigma", r.dim_sigma}};
}

} // namespace

ManufacturedCase manufactured_case(int dim, const Material& material)
{
    const double pi = std::numbers::pi;
    SeparableField field;
    field.dim = dim;
    if (dim == 2)
    {
        // e^x x(1-x) and e^{-y} y(1-y) with their first two derivatives.
        const Factor px = [](double x) {
            const double e = std::exp(x);
            return Derivs{e * x * (1 - x), e * (1 - x - x * x), e * (-3 * x - x * x)};
        };
        const Factor qy = [](double y) {
            const double e = std::exp(-y);
            return Derivs{e * y * (1 - y), e * (1 - 3 * y + y * y), e * (-4 + 5 * y - y * y)};
        };
        const Factor s = [pi](double t) {
            return Derivs{std::sin(pi * t), pi * std::cos(pi * t), -pi * pi * std::sin(pi * t)};
        };
        field.scale   = {1.0, 1.0};
        field.factors = {{px, qy}, {s, s}};
    }
    else if (dim == 3)
    {
        const Factor b = [](double t) { return Derivs{t * (1 - t), 1 - 2 * t, -2.0}; };
        field.scale    = {16.0, 32.0, 64.0};
        field.factors  = {{b, b, b}, {b, b, b}, {b, b, b}};
    }
    else
    {
        throw ConfigError("manufactured_case: dim must be 2 or 3");
    }
    Material mat = material;
    mat.dim      = dim;
    return make_case(field, mat);
}

ManufacturedCase manufactured_case(int dim)
{
    return manufactured_case(dim, Material{0.5, 1.0, dim});
}

ErrorQuadrature parse_error_quadrature(const std::string& name)
{
    if (name == "accurate")
        return ErrorQuadrature::Accurate;
    if (name == "degree2")
        return ErrorQuadrature::Degree2;
    throw ConfigError("unknown error quadrature '" + name + "' (expected accurate or degree2)");
}

std::string to_string(ErrorQuadrature rule)
{
    return rule == ErrorQuadrature::Degree2 ? "degree2" : "accurate";
}

ErrorRecord evaluate_errors(const SimplicialMesh& mesh, const Discretization& disc, const Solution& solution,
                            const ManufacturedCase& mcase, double eta, const ErrorOptions& options)
{
    const int dim               = mesh.dim();
    const int k                 = disc.stress.k();
    const int ne                = mesh.num_elements();
    const DisplacementSpace& vs = disc.displacement;
    const int ns                = vs.scalar_size();
    const QuadratureRule& rule  = options.quadrature == ErrorQuadrature::Degree2
                                      ? symmetric_degree2_rule(dim)
                                      : quadrature_rule(dim, std::min(QuadratureDegrees::error(k), max_quadrature_degree));
    const std::vector<double> hf = penalty_lengths(mesh, options.penalty_length);

    std::vector<std::array<double, 3>> elem(ne);
    parallel_for(ne, [&](int e) {
        const SimplexGeometry geom   = simplex_geometry(mesh, e);
        const ElementStressDofs& eds = disc.stress.element(e);
        const ElementTabulation tab  = tabulate_stress(geom, eds, rule);
        const int nf                 = tab.nfields;
        std::array<double, 3> acc{0.0, 0.0, 0.0};
        for (std::size_t q = 0; q < rule.size(); ++q)
        {
            SmallMatrix sh = SmallMatrix::Zero(dim, dim);
            Point dh       = Point::Zero(dim);
            for (int c = 0; c < nf; ++c)
            {
                const double coeff = solution.sigma(eds.dofs[c]);
                sh += coeff * tab.values[q * nf + c];
                dh += coeff * tab.divergences[q * nf + c];
            }
            Point uh = Point::Zero(dim);
            for (int a = 0; a < ns; ++a)
            {
                const double phi = vs.monomials()[a].evaluate(rule.points[q]);
                for (int m = 0; m < dim; ++m)
                    uh(m) += solution.u(vs.dof(e, m, a)) * phi;
            }
            const Point& x = tab.points[q];
            const double w = tab.weights[q];
            acc[0] += w * (mcase.u(x) - uh).squaredNorm();
            acc[1] += w * (mcase.sigma(x) - sh).squaredNorm();
            acc[2] += w * (mcase.f(x) - dh).squaredNorm();
        }
        elem[e] = acc;
    });

    const QuadratureRule& frule = quadrature_rule(dim - 1, QuadratureDegrees::face(k));
    std::vector<int> interior;
    for (int f = 0; f < mesh.faces().size(); ++f)
        if (mesh.faces()[f].is_interior())
            interior.push_back(f);
    std::vector<double> face_sq(interior.size());
    parallel_for(static_cast<int>(interior.size()), [&](int idx) {
        const int f      = interior[idx];
        const Face& face = mesh.faces()[f];
        const auto plus  = face_trace_values(mesh, disc.stress, f, 0, frule);
        const auto minus = face_trace_values(mesh, disc.stress, f, 1, frule);
        const auto& dp   = disc.stress.element(face.elements[0]).dofs;
        const auto& dm   = disc.stress.element(face.elements[1]).dofs;
        const int np     = static_cast<int>(dp.size());
        const int nm     = static_cast<int>(dm.size());
        double acc       = 0.0;
        for (std::size_t q = 0; q < frule.size(); ++q)
        {
            SmallMatrix jump = SmallMatrix::Zero(dim, dim);
            for (int c = 0; c < np; ++c)
                jump += solution.sigma(dp[c]) * plus[q * np + c];
            for (int c = 0; c < nm; ++c)
                jump -= solution.sigma(dm[c]) * minus[q * nm + c];
            acc += frule.weights[q] * factorial(dim - 1) * face.measure * (jump * face.normal).squaredNorm();
        }
        face_sq[idx] = acc;
    });

    double su = 0.0, ss = 0.0, sd = 0.0;
    for (const auto& a : elem)
    {
        su += a[0];
        ss += a[1];
        sd += a[2];
    }
    double jump = 0.0, penalty = 0.0;
    for (std::size_t idx = 0; idx < interior.size(); ++idx)
    {
        jump += face_sq[idx];
        penalty += face_sq[idx] / hf[interior[idx]];
    }

    ErrorRecord r;
    r.err_u     = std::sqrt(su);
    r.err_sigma = std::sqrt(ss);
    r.err_div   = std::sqrt(sd);
    r.err_jump  = std::sqrt(jump) * (options.jump_norm == JumpNorm::EtaWeighted ? std::sqrt(eta) : 1.0);
    r.penalty   = penalty;
    r.err_star  = std::sqrt(ss + sd + eta * penalty);
    r.dim_v     = vs.num_dofs();
    r.dim_sigma = disc.stress.num_dofs();
    return r;
}

double default_eta(int dim, SpaceKind space)
{
    return dim == 3 && space == SpaceKind::S2 ? 0.1 : 1.0;
}

std::optional<double> ConvergenceReport::order(std::size_t i, double ErrorRecord::*column) const
{
    if (i == 0 || i >= records.size())
        return std::nullopt;
    const ErrorRecord& a = records[i - 1];
    const ErrorRecord& b = records[i];
    return std::log(a.*column / b.*column) / std::log(static_cast<double>(b.m) / a.m);
}

StudyConfig table_config(int dim, int k, SpaceKind space, std::vector<int> levels)
{
    StudyConfig c;
    c.dim              = dim;
    c.k                = k;
    c.space            = space;
    c.eta              = default_eta(dim, space);
    c.levels           = std::move(levels);
    c.material         = Material{0.5, 1.0, dim};
    c.penalty_length   = k == 0 ? PenaltyLength::MinEdge : PenaltyLength::MaxElementDiameter;
    c.error_quadrature = k == 0 ? ErrorQuadrature::Degree2 : ErrorQuadrature::Accurate;
    c.jump_norm        = JumpNorm::EtaWeighted;
    return c;
}

ErrorRecord run_level(const StudyConfig& config, int m)
{
    const SimplicialMesh mesh    = generate_uniform_mesh(config.dim, m);
    Material material            = config.material;
    material.dim                 = config.dim;
    const ManufacturedCase mcase = manufactured_case(config.dim, material);
    const Discretization disc    = build_discretization(mesh, config.k, config.space);
    const SaddlePointSystem sys =
        build_saddle_system(mesh, disc, material, config.eta, mcase.f, config.penalty_length);
    const Solution sol = solve_saddle(sys, config.solver);
    ErrorRecord r      = evaluate_errors(mesh, disc, sol, mcase, config.eta,
                                         ErrorOptions{config.penalty_length, config.error_quadrature, config.jump_norm});
    r.m                          = m;
    return r;
}

ConvergenceReport convergence_study(const StudyConfig& config, const std::function<void(const ErrorRecord&)>& on_level,
                                    ConvergenceReport* partial)
{
    for (std::size_t i = 1; i < config.levels.size(); ++i)
        if (config.levels[i] <= config.levels[i - 1])
            throw ConfigError("convergence_study: levels must be increasing");

    ConvergenceReport report;
    report.config = config;
    for (int m : config.levels)
    {
        try
        {
            report.records.push_back(run_level(config, m));
        }
        catch (...)
        {
            if (partial)
                *partial = report;
            throw;
        }
        if (on_level)
            on_level(report.records.back());
    }
    return report;
}

std::string report_to_csv(const ConvergenceReport& report)
{
    std::string out = "m,err_u,ord_u,err_sigma,ord_sigma,err_div,ord_div,err_jump,ord_jump,dim_V,dim_Sigma\n";
    const std::array<double ErrorRecord::*, 4> columns{&ErrorRecord::err_u, &ErrorRecord::err_sigma,
                                                        &ErrorRecord::err_div, &ErrorRecord::err_jump};
    for (std::size_t i = 0; i < report.records.size(); ++i)
    {
        const ErrorRecord& r = report.records[i];
        out += std::to_string(r.m);
        for (auto col : columns)
        {
            out += "," + format_number("%.6e", r.*col) + ",";
            if (const auto o = report.order(i, col))
                out += format_number("%.4f", *o);
        }
        out += "," + std::to_string(r.dim_v) + "," + std::to_string(r.dim_sigma) + "\n";
    }
    return out;
}

std::string report_to_json(const ConvergenceReport& report)
{
    const StudyConfig& c = report.config;
    nlohmann::json j;
    j["config"] = {{"dim", c.dim},
                   {"k", c.k},
                   {"space", to_string(c.space)},
                   {"eta", c.eta},
                   {"levels", c.levels},
                   {"mu", c.material.mu},
                   {"lambda", c.material.lambda},
                   {"penalty_length", to_string(c.penalty_length)},
                   {"error_quadrature", to_string(c.error_quadrature)},
                   {"jump_norm", c.jump_norm == JumpNorm::EtaWeighted ? "eta-weighted" : "plain"}};
    auto& recs = j["records"] = nlohmann::json::array();
    for (const auto& r : report.records)
        recs.push_back(record_to_json(r));
    return j.dump(2);
}

ConvergenceReport report_from_json(const std::string& text)
{
    try
    {
        const nlohmann::json j = nlohmann::json::parse(text);
        ConvergenceReport report;
        const auto& c          = j.at("config");
        report.config.dim      = c.at("dim").get<int>();
        report.config.k        = c.at("k").get<int>();
        report.config.space    = parse_space_kind(c.at("space").get<std::string>());
        report.config.eta      = c.at("eta").get<double>();
        report.config.levels   = c.at("levels").get<std::vector<int>>();
        report.config.material = Material{c.at("mu").get<double>(), c.at("lambda").get<double>(), report.config.dim};
        report.config.penalty_length   = parse_penalty_length(c.value("penalty_length", "face"));
        report.config.error_quadrature = parse_error_quadrature(c.value("error_quadrature", "accurate"));
        report.config.jump_norm =
            c.value("jump_norm", "plain") == "eta-weighted" ? JumpNorm::EtaWeighted : JumpNorm::Plain;
        for (const auto& r : j.at("records"))
        {
            ErrorRecord e;
            e.m         = r.at("m").get<int>();
            e.err_u     = r.at("err_u").get<double>();
            e.err_sigma = r.at("err_sigma").get<double>();
            e.err_div   = r.at("err_div").get<double>();
            e.err_jump  = r.at("err_jump").get<double>();
            e.err_star  = r.at("err_star").get<double>();
            e.penalty   = r.at("penalty").get<double>();
            e.dim_v     = r.at("dim_V").get<long long>();
            e.dim_sigma = r.at("dim_Sigma").get<long long>();
            report.records.push_back(e);
        }
        return report;
    }
    catch (const nlohmann::json::exception& ex)
    {
        throw IoError(std::string("report JSON: ") + ex.what());
    }
}

void export_report(const ConvergenceReport& report, const std::string& format, const std::string& path)
{
    std::string text;
    if (format == "csv")
        text = report_to_csv(report);
    else if (format == "json")
        text = report_to_json(report) + "\n";
    else
        throw ConfigError("export_report: unknown format '" + format + "'");

    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot open " + path + " for writing");
    out << text;
    if (!out)
        throw IoError("failed writing " + path);
}

} // namespace ipmix
