// Acceptance run: one PASS/FAIL line per criterion, details indented.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "ipmix/study.hpp"
#include "ipmix/verify.hpp"

using namespace ipmix;

namespace
{

struct Row
{
    int m;
    double u, sigma, div, jump;
    double ord_u, ord_sigma, ord_div, ord_jump; ///< NAN on the first level
    long long dim_v, dim_sigma;
};

struct Table
{
    const char* name;
    int dim;
    int k;
    SpaceKind space;
    std::vector<Row> rows;
};

const double none = NAN;

const Table table_2d_s1{"2D k=0 S1", 2, 0, SpaceKind::S1,
                        {{8, 0.06731, 0.17195, 1.93423, 0.03804, none, none, none, none, 256, 800},
                         {16, 0.03355, 0.07954, 0.97005, 0.01391, 1.00, 1.11, 1.00, 1.45, 1024, 3136},
                         {32, 0.01676, 0.03886, 0.48539, 0.00496, 1.00, 1.03, 1.00, 1.49, 4096, 12416},
                         {64, 0.00838, 0.01931, 0.24274, 0.00176, 1.00, 1.01, 1.00, 1.50, 16384, 49408}}};

const Table table_2d_s2{"2D k=0 S2", 2, 0, SpaceKind::S2,
                        {{8, 0.11497, 0.27495, 1.93423, 0.08925, none, none, none, none, 256, 595},
                         {16, 0.06714, 0.10042, 0.97005, 0.04116, 0.78, 1.45, 1.00, 1.12, 1024, 2339},
                         {32, 0.03578, 0.03294, 0.48539, 0.01613, 0.91, 1.61, 1.00, 1.35, 4096, 9283},
                         {64, 0.01832, 0.01066, 0.24274, 0.00593, 0.97, 1.63, 1.00, 1.44, 16384, 36995}}};

const Table table_2d_k1{"2D k=1 S1", 2, 1, SpaceKind::S1,
                        {{4, 0.01983, 0.04152, 0.57945, 0.02688, none, none, none, none, 192, 416},
                         {8, 0.00503, 0.00821, 0.14651, 0.00509, 1.98, 2.34, 1.98, 2.40, 768, 1600},
                         {16, 0.00126, 0.00189, 0.03674, 0.00092, 1.99, 2.12, 2.00, 2.47, 3072, 6272},
                         {32, 0.00032, 0.00046, 0.00924, 0.00016, 2.00, 2.03, 1.99, 2.49, 12288, 24832}}};

const Table table_3d_s1{"3D k=0 S1", 3, 0, SpaceKind::S1,
                        {{2, 0.22624, 1.05758, 8.05894, 0.21689, none, none, none, none, 144, 936},
                         {4, 0.12549, 0.47884, 4.48971, 0.13908, 0.85, 1.14, 0.84, 0.64, 1152, 7200},
                         {8, 0.06345, 0.20060, 2.30280, 0.05726, 0.98, 1.25, 0.96, 1.28, 9216, 56448}}};

// The reference m=4 div entry of this table reads 4.48917; div sigma_h does not
// depend on the stress space, so the value shared with the S1 table is used.
const Table table_3d_s2{"3D k=0 S2", 3, 0, SpaceKind::S2,
                        {{2, 0.26120, 1.39194, 8.05894, 0.28483, none, none, none, none, 144, 378},
                         {4, 0.15504, 0.78910, 4.48971, 0.24513, 0.75, 0.81, 0.84, 0.22, 1152, 2766},
                         {8, 0.07923, 0.26868, 2.30280, 0.12466, 0.97, 1.55, 0.96, 0.98, 9216, 21654}}};

struct Optional3D
{
    SpaceKind space;
    int m;
    long long dim_v, dim_sigma;
};

const Optional3D optional_rows[] = {{SpaceKind::S1, 16, 73728, 446976}, {SpaceKind::S2, 16, 73728, 172326}};

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool report(int criterion, bool ok, const std::string& summary, double secs)
{
    std::printf("%s criterion %d: %s (%.1f s)\n", ok ? "PASS" : "FAIL", criterion, summary.c_str(), secs);
    std::fflush(stdout);
    return ok;
}

bool criterion_dimensions()
{
    const auto t0 = std::chrono::steady_clock::now();
    bool ok       = true;
    int compared  = 0;
    for (const Table* t : {&table_2d_s1, &table_2d_s2, &table_2d_k1, &table_3d_s1, &table_3d_s2})
        for (const Row& row : t->rows)
        {
            const SimplicialMesh mesh = generate_uniform_mesh(t->dim, row.m);
            const long long ds        = build_stress_space(mesh, t->k, t->space).num_dofs();
            const long long dv        = build_displacement_space(mesh, t->k).num_dofs();
            const bool match          = ds == row.dim_sigma && dv == row.dim_v;
            ok                        = ok && match;
            compared += 2;
            if (!match)
                std::printf("  %s m=%d: dim Sigma %lld (table %lld), dim V %lld (table %lld)\n", t->name, row.m, ds,
                            row.dim_sigma, dv, row.dim_v);
        }
    for (const auto& o : optional_rows)
    {
        // Optional rows: closed-form counts on the generated mesh.
        const SimplicialMesh mesh = generate_uniform_mesh(3, o.m);
        const long long ds        = o.space == SpaceKind::S1
                                        ? s1_dimension(3, 0, mesh.num_elements(), mesh.faces().num_interior())
                                        : s2_dimension(3, mesh.num_vertices(), mesh.faces().num_interior());
        const long long dv        = 3LL * mesh.num_elements();
        std::printf("  optional 3D %s m=%d: dim Sigma %lld (table %lld), dim V %lld (table %lld)%s\n",
                    to_string(o.space).c_str(), o.m, ds, o.dim_sigma, dv, o.dim_v,
                    ds == o.dim_sigma && dv == o.dim_v ? "" : "  MISMATCH");
    }
    return report(1, ok, std::to_string(compared) + " dimension entries, exact equality", seconds_since(t0));
}

struct Tally
{
    int values     = 0;
    int orders     = 0;
    double worst_rel = 0.0;
    double worst_ord = 0.0;
    bool ok          = true;
};

void compare_table(const Table& t, double rel_tol, bool check_orders, Tally& tally)
{
    const std::vector<int> levels = [&] {
        std::vector<int> l;
        for (const Row& r : t.rows)
            l.push_back(r.m);
        return l;
    }();
    const ConvergenceReport rep = convergence_study(table_config(t.dim, t.k, t.space, levels));
    double ErrorRecord::*cols[] = {&ErrorRecord::err_u, &ErrorRecord::err_sigma, &ErrorRecord::err_div,
                                   &ErrorRecord::err_jump};
    const char* names[]         = {"u", "sigma", "div", "jump"};
    for (std::size_t i = 0; i < t.rows.size(); ++i)
    {
        const Row& row         = t.rows[i];
        const ErrorRecord& rec = rep.records[i];
        const double ref[]     = {row.u, row.sigma, row.div, row.jump};
        const double ords[]    = {row.ord_u, row.ord_sigma, row.ord_div, row.ord_jump};
        std::printf("  %s m=%d:", t.name, row.m);
        for (int c = 0; c < 4; ++c)
        {
            const double got = rec.*cols[c];
            const double rel = std::abs(got / ref[c] - 1.0);
            tally.worst_rel  = std::max(tally.worst_rel, rel);
            ++tally.values;
            const bool good = rel <= rel_tol;
            tally.ok        = tally.ok && good;
            std::printf(" %s %.5g (%.5g)%s", names[c], got, ref[c], good ? "" : " !");
            if (check_orders && i > 0)
            {
                const double o  = *rep.order(i, cols[c]);
                const double d  = std::abs(o - ords[c]);
                tally.worst_ord = std::max(tally.worst_ord, d);
                ++tally.orders;
                const bool og = d <= 0.1;
                tally.ok      = tally.ok && og;
                std::printf(" ord %.2f (%.2f)%s", o, ords[c], og ? "" : " !");
            }
            std::printf(";");
        }
        std::printf("\n");
    }
}

bool criterion_2d()
{
    const auto t0 = std::chrono::steady_clock::now();
    Tally tally;
    for (const Table* t : {&table_2d_s1, &table_2d_s2, &table_2d_k1})
        compare_table(*t, 0.02, true, tally);
    char buf[200];
    std::snprintf(buf, sizeof buf, "%d values within 2%% (worst %.2f%%), %d orders within 0.1 (worst %.3f)",
                  tally.values, 100 * tally.worst_rel, tally.orders, tally.worst_ord);
    return report(2, tally.ok, buf, seconds_since(t0));
}

bool criterion_3d()
{
    const auto t0 = std::chrono::steady_clock::now();
    Tally tally;
    for (const Table* t : {&table_3d_s1, &table_3d_s2})
        compare_table(*t, 0.03, false, tally);
    char buf[200];
    std::snprintf(buf, sizeof buf, "%d values within 3%% (worst %.2f%%), m = 2, 4, 8", tally.values,
                  100 * tally.worst_rel);
    return report(3, tally.ok, buf, seconds_since(t0));
}

bool criterion_structural()
{
    const auto t0                   = std::chrono::steady_clock::now();
    const VerificationReport suite = run_all_checks();
    int failed                      = 0;
    for (const auto& c : suite.checks)
        if (!c.passed)
        {
            ++failed;
            std::printf("  FAILED %s: computed %s, expected %s\n", c.name.c_str(), c.computed.c_str(),
                        c.expected.c_str());
        }
    return report(4, failed == 0,
                  std::to_string(suite.checks.size() - failed) + "/" + std::to_string(suite.checks.size())
                      + " structural checks",
                  seconds_since(t0));
}

bool criterion_inf_sup()
{
    const auto t0 = std::chrono::steady_clock::now();
    bool ok       = true;
    std::string summary;
    for (SpaceKind kind : {SpaceKind::S1, SpaceKind::S2})
    {
        const CheckResult r = check_inf_sup(2, 0, kind, {2, 4, 8});
        std::printf("  %s: %s\n", r.name.c_str(), r.detail.c_str());
        ok = ok && r.passed;
        summary += (summary.empty() ? "" : "; ") + to_string(kind) + " " + r.computed;
    }
    return report(5, ok, summary + " (limit 2)", seconds_since(t0));
}

bool criterion_scaling()
{
    const auto t0 = std::chrono::steady_clock::now();
    bool ok       = true;
    for (int n : {2, 3})
    {
        const CheckResult r = check_scaling(n);
        std::printf("  %s: %s, expected %s\n", r.name.c_str(), r.computed.c_str(), r.expected.c_str());
        ok = ok && r.passed;
    }
    return report(6, ok, "face-bubble norm ratios within 5% for n = 2, 3", seconds_since(t0));
}

} // namespace

int main()
{
    bool ok = true;
    ok      = criterion_dimensions() && ok;
    ok      = criterion_2d() && ok;
    ok      = criterion_3d() && ok;
    ok      = criterion_structural() && ok;
    ok      = criterion_inf_sup() && ok;
    ok      = criterion_scaling() && ok;
    std::printf("%s\n", ok ? "all acceptance criteria passed" : "some acceptance criteria failed");
    return ok ? 0 : 1;
}
