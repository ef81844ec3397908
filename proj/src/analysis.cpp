#include "pnp/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pnp/errors.hpp"

namespace pnp {

bool DimensionlessReport::defined(const std::string& name) const {
    return std::find(undefined.begin(), undefined.end(), name) ==
           undefined.end();
}

std::string DimensionlessReport::table() const {
    std::ostringstream os;
    auto line = [&](const std::string& name, double value) {
        os << "  " << name;
        for (std::size_t i = name.size(); i < 12; ++i) os << ' ';
        if (defined(name))
            os << value << "\n";
        else
            os << "undefined\n";
    };
    os << "dimensionless groups\n";
    line("N", N);
    for (std::size_t i = 0; i < Pe.size(); ++i)
        line("Pe_" + std::to_string(i + 1), Pe[i]);
    line("L", L_nd);
    line("L^2", L_nd_sq);
    line("P", P);
    line("lambda_D", lambda_D);
    line("Da_f", Da_f);
    line("Da_r", Da_r);
    line("C_bar", C_bar);
    return os.str();
}

double ionic_strength(const ReferenceScales& s) {
    if (s.c_bar.size() != s.z.size())
        throw ConfigError("ionic_strength: c_bar/z size mismatch");
    double C = 0.0;
    for (std::size_t i = 0; i < s.c_bar.size(); ++i)
        C += 0.5 * s.z[i] * s.z[i] * s.c_bar[i];
    return C;
}

double debye_length(double eps, double T, double C_bar,
                    const PhysicalConstants& pc) {
    if (C_bar <= 0.0 || eps <= 0.0) return 0.0;
    return std::sqrt(eps * pc.k_B * T / (2.0 * pc.N_A * pc.e * pc.e * C_bar));
}

DimensionlessReport dimensionless_numbers(const ReferenceScales& s,
                                          const PhysicalConstants& pc_in) {
    PhysicalConstants pc = pc_in;
    pc.T = s.T;
    DimensionlessReport r;
    r.C_bar = ionic_strength(s);
    r.N = pc.F * s.phi_bar / (pc.R * pc.T);

    for (std::size_t i = 0; i < s.D.size(); ++i) {
        if (s.D[i] > 0.0) {
            r.Pe.push_back(s.U * s.L / s.D[i]);
        } else {
            r.Pe.push_back(0.0);
            r.undefined.push_back("Pe_" + std::to_string(i + 1));
        }
    }

    r.lambda_D = debye_length(s.eps, s.T, r.C_bar, pc);
    if (r.lambda_D > 0.0 && s.L > 0.0) {
        r.L_nd = r.lambda_D / s.L;
        r.L_nd_sq = r.L_nd * r.L_nd;
    } else {
        r.undefined.push_back("L");
        r.undefined.push_back("L^2");
        r.undefined.push_back("lambda_D");
    }

    if (s.mu > 0.0 && s.U != 0.0)
        r.P = 2.0 * pc.F * s.L * s.phi_bar * r.C_bar / (s.mu * s.U);
    else
        r.undefined.push_back("P");

    const double D1 = s.D.empty() ? 0.0 : s.D.front();
    if (D1 > 0.0 && s.L > 0.0) {
        r.Da_f = s.k_f * s.L / D1;
        r.Da_r = s.k_r * s.L / D1;
    } else {
        r.undefined.push_back("Da_f");
        r.undefined.push_back("Da_r");
    }
    if (r.C_bar <= 0.0) {
        r.undefined.push_back("lambda_D");
        r.undefined.push_back("C_bar-dependent");
    }
    return r;
}

} // namespace pnp
