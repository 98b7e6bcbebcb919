#include "ipmix/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ipmix/error.hpp"
#include "ipmix/study.hpp"
#include "ipmix/verify.hpp"

namespace ipmix::cli
{

namespace
{

struct ArgumentError : Error
{
    using Error::Error;
};

void check_range(const char* name, int value, int lo, int hi)
{
    if (value < lo || value > hi)
        throw ArgumentError(std::string("unsupported ") + name + " " + std::to_string(value) + " (expected "
                            + std::to_string(lo) + ".." + std::to_string(hi) + ")");
}

std::vector<int> parse_levels(const std::string& text)
{
    std::vector<int> levels;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
    {
        try
        {
            std::size_t used = 0;
            const int m      = std::stoi(item, &used);
            if (used != item.size() || m < 1)
                throw std::invalid_argument(item);
            levels.push_back(m);
        }
        catch (const std::logic_error&)
        {
            throw ArgumentError("invalid level '" + item + "' in --levels");
        }
    }
    if (levels.empty())
        throw ArgumentError("--levels is empty");
    return levels;
}

void write_text(const std::string& path, const std::string& text)
{
    if (path.empty() || path == "-")
    {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot open '" + path + "' for writing");
    out << text;
}

StudyConfig make_config(int dim, int k, const std::string& space, std::optional<double> eta, double mu,
                        double lambda)
{
    check_range("--dim", dim, 2, 3);
    check_range("--k", k, 0, 2);
    StudyConfig cfg;
    cfg.dim = dim;
    cfg.k   = k;
    try
    {
        cfg.space = parse_space_kind(space);
    }
    catch (const ConfigError& ex)
    {
        throw ArgumentError(ex.what());
    }
    cfg.eta = eta ? *eta : default_eta(dim, cfg.space);
    if (!(cfg.eta >= 0.0))
        throw ArgumentError("--eta must be non-negative");
    cfg.material.mu     = mu;
    cfg.material.lambda = lambda;
    cfg.material.dim    = dim;
    try
    {
        cfg.material.validate();
    }
    catch (const ConfigError& ex)
    {
        throw ArgumentError(ex.what());
    }
    return cfg;
}

struct Protocol
{
    std::string preset = "default";
    std::optional<std::string> penalty_length;
    std::optional<std::string> error_quadrature;
    std::optional<std::string> jump_norm;
};

void apply_protocol(StudyConfig& cfg, const Protocol& p)
{
    try
    {
        if (p.preset == "table")
        {
            const StudyConfig t  = table_config(cfg.dim, cfg.k, cfg.space, {});
            cfg.penalty_length   = t.penalty_length;
            cfg.error_quadrature = t.error_quadrature;
            cfg.jump_norm        = t.jump_norm;
        }
        if (p.penalty_length)
            cfg.penalty_length = parse_penalty_length(*p.penalty_length);
        if (p.error_quadrature)
            cfg.error_quadrature = parse_error_quadrature(*p.error_quadrature);
        if (p.jump_norm)
            cfg.jump_norm = *p.jump_norm == "eta-weighted" ? JumpNorm::EtaWeighted : JumpNorm::Plain;
    }
    catch (const ConfigError& ex)
    {
        throw ArgumentError(ex.what());
    }
}

std::string solution_json(const StudyConfig& cfg, int m, const SimplicialMesh& mesh, const Discretization& disc,
                          const Solution& sol, const ErrorRecord& rec)
{
    nlohmann::json j;
    j["dim"]      = cfg.dim;
    j["k"]        = cfg.k;
    j["space"]    = to_string(cfg.space);
    j["eta"]      = cfg.eta;
    j["mu"]       = cfg.material.mu;
    j["lambda"]   = cfg.material.lambda;
    j["penalty_length"]   = to_string(cfg.penalty_length);
    j["error_quadrature"] = to_string(cfg.error_quadrature);
    j["m"]        = m;
    j["solver"]   = sol.method;
    j["residual"] = sol.residual;
    j["num_elements"] = mesh.num_elements();
    j["dim_sigma"]    = disc.stress.num_dofs();
    j["dim_v"]        = disc.displacement.num_dofs();
    j["errors"] = {{"u", rec.err_u},       {"sigma", rec.err_sigma}, {"div", rec.err_div},
                   {"jump", rec.err_jump}, {"star", rec.err_star},   {"penalty", rec.penalty}};
    j["sigma"] = std::vector<double>(sol.sigma.data(), sol.sigma.data() + sol.sigma.size());
    j["u"]     = std::vector<double>(sol.u.data(), sol.u.data() + sol.u.size());
    return j.dump(2) + "\n";
}

} // namespace

int run(int argc, char** argv)
{
    CLI::App app{"Interior-penalty mixed elements for linear elasticity"};
    app.require_subcommand(1);

    int dim = 2, k = 0, m = 8;
    std::string space = "s1", out, format, levels_text, export_prefix;
    Protocol protocol;
    std::optional<double> eta;
    double mu = 0.5, lambda = 1.0;
    bool all = false;

    auto* mesh_cmd = app.add_subcommand("mesh", "Write a uniform mesh of the unit cube as JSON");
    mesh_cmd->add_option("--dim", dim, "Spatial dimension (2 or 3)");
    mesh_cmd->add_option("--m", m, "Subdivisions per axis");
    mesh_cmd->add_option("--out", out, "Output file (stdout if omitted)");

    auto* verify_cmd = app.add_subcommand("verify", "Run the structural verification suite");
    verify_cmd->add_flag("--all", all, "Run every check");
    verify_cmd->add_option("--format", format, "text or json")->check(CLI::IsMember({"text", "json"}));
    verify_cmd->add_option("--out", out, "Output file (stdout if omitted)");

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--dim", dim, "Spatial dimension (2 or 3)");
        cmd->add_option("--k", k, "Polynomial order (0..2)");
        cmd->add_option("--space", space, "Stress space: s1 or s2");
        cmd->add_option("--eta", eta, "Penalty parameter");
        cmd->add_option("--mu", mu, "Lame parameter mu");
        cmd->add_option("--lambda", lambda, "Lame parameter lambda");
        cmd->add_option("--out", out, "Output file (stdout if omitted)");
        cmd->add_option("--protocol", protocol.preset, "default, or table for the reference-table conventions")
            ->check(CLI::IsMember({"default", "table"}));
        cmd->add_option("--penalty-length", protocol.penalty_length,
                        "h_F in the penalty: face, min-edge or max-diameter");
        cmd->add_option("--error-quadrature", protocol.error_quadrature, "Volume error rule: accurate or degree2");
        cmd->add_option("--jump-norm", protocol.jump_norm, "Jump column: plain or eta-weighted")
            ->check(CLI::IsMember({"plain", "eta-weighted"}));
    };
    auto* solve_cmd = app.add_subcommand("solve", "Solve the manufactured problem on one mesh");
    add_common(solve_cmd);
    solve_cmd->add_option("--m", m, "Subdivisions per axis");
    solve_cmd->add_option("--export-matrices", export_prefix, "Write A, B and rhs in MatrixMarket format");

    auto* study_cmd = app.add_subcommand("study", "Run a convergence study");
    add_common(study_cmd);
    study_cmd->add_option("--levels", levels_text, "Comma-separated subdivision counts")->required();
    study_cmd->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& ex)
    {
        const int code = app.exit(ex);
        return code == 0 ? 0 : 2;
    }

    try
    {
        if (mesh_cmd->parsed())
        {
            check_range("--dim", dim, 2, 3);
            check_range("--m", m, 1, 1 << 12);
            write_text(out, mesh_to_json(generate_uniform_mesh(dim, m)) + "\n");
            return 0;
        }
        if (verify_cmd->parsed())
        {
            if (!all)
                throw ArgumentError("verify: pass --all to run the suite");
            const VerificationReport report = run_all_checks();
            write_text(out, format == "json" ? report.to_json() + "\n" : report.to_text());
            if (!report.all_passed())
            {
                std::cerr << "verify: some checks failed\n";
                return 1;
            }
            return 0;
        }
        if (solve_cmd->parsed())
        {
            StudyConfig cfg = make_config(dim, k, space, eta, mu, lambda);
            apply_protocol(cfg, protocol);
            check_range("--m", m, 1, 1 << 12);
            const SimplicialMesh mesh   = generate_uniform_mesh(dim, m);
            const Discretization disc   = build_discretization(mesh, cfg.k, cfg.space);
            const ManufacturedCase mc   = manufactured_case(dim, cfg.material);
            const SaddlePointSystem sys = build_saddle_system(mesh, disc, cfg.material, cfg.eta, mc.f, cfg.penalty_length);
            if (!export_prefix.empty())
                export_matrix_market(sys, export_prefix);
            const Solution sol    = solve_saddle(sys, cfg.solver);
            const ErrorRecord rec = [&] {
                ErrorRecord r = evaluate_errors(mesh, disc, sol, mc, cfg.eta, ErrorOptions{cfg.penalty_length, cfg.error_quadrature, cfg.jump_norm});
                r.m           = m;
                return r;
            }();
            write_text(out, solution_json(cfg, m, mesh, disc, sol, rec));
            return 0;
        }
        if (study_cmd->parsed())
        {
            StudyConfig cfg = make_config(dim, k, space, eta, mu, lambda);
            cfg.levels      = parse_levels(levels_text);
            apply_protocol(cfg, protocol);
            if (format.empty())
                format = out.size() >= 5 && out.substr(out.size() - 5) == ".json" ? "json" : "csv";
            const ConvergenceReport report = convergence_study(cfg, [](const ErrorRecord& r) {
                std::cerr << "m=" << r.m << " done (dim Sigma " << r.dim_sigma << ")\n";
            });
            if (out.empty() || out == "-")
                std::cout << (format == "json" ? report_to_json(report) + "\n" : report_to_csv(report));
            else
                export_report(report, format, out);
            return 0;
        }
    }
    catch (const ArgumentError& ex)
    {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    }
    catch (const ConfigError& ex)
    {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    }
    catch (const std::exception& ex)
    {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 2;
}

} // namespace ipmix::cli
