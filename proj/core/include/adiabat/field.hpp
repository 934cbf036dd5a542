#pragma once

// Magnetic-field profiles B(s) for H = (mu/2) B . sigma in scaled time s = t/T,
// and the derived geometry: |B|, energies, polar angles and their rates.

#include "adiabat/expr.hpp"
#include "adiabat/jet.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace adiabat {

struct Pole {
    cplx location;
    int order = 1; // order of the pole of q0 = mu^2 B^2 / 4
};

struct NikitinParams {
    double b;
    double delta_e;
};

struct BermanParams {
    Expr f;
    double omega;
};

using Vec3c = std::array<cplx, 3>;
using JetVec = std::array<Jet5, 3>;

class FieldProfile {
public:
    enum class Kind { nikitin, berman, custom };

    // B = (de/mu) ((b^2+s^2)^(-3/2), 0, 1)
    static FieldProfile nikitin(double b, double delta_e, double mu = 1.0);
    // B = (f(s), 0, omega/mu)
    static FieldProfile berman(const Expr& f, double omega, double mu = 1.0,
                               std::vector<Pole> poles = {});
    static FieldProfile custom(const Expr& bx, const Expr& by, const Expr& bz, double mu = 1.0,
                               std::vector<Pole> poles = {}, std::vector<cplx> obstacles = {});

    Kind kind() const { return kind_; }
    double mu() const { return mu_; }
    const std::vector<Pole>& poles() const { return poles_; }
    // Points paths must avoid: declared poles plus user obstacles.
    std::vector<cplx> obstacles() const;
    const std::optional<NikitinParams>& nikitin_params() const { return nikitin_; }
    const std::optional<BermanParams>& berman_params() const { return berman_; }

    // Components (after the normalising rotation) and derivatives up to
    // `order` (<= 4). Closed form for Nikitin, symbolic derivatives otherwise;
    // coefficients above `order` are left zero.
    JetVec jets(cplx s, int order = 4) const;
    Vec3c components(cplx s) const;

    // Rotation applied so that B(+inf) points along +z; identity if already so.
    const std::array<std::array<double, 3>, 3>& rotation() const { return rot_; }
    bool rotated() const { return rotated_; }

    std::string describe() const;

private:
    Kind kind_ = Kind::custom;
    double mu_ = 1.0;
    std::vector<Pole> poles_;
    std::vector<cplx> extra_obstacles_;
    std::optional<NikitinParams> nikitin_;
    std::optional<BermanParams> berman_;
    // derivs_[i][k] = d^k B_i / ds^k (unrotated) for expression-backed fields
    std::array<std::array<Expr, 5>, 3> derivs_;
    std::array<std::array<double, 3>, 3> rot_{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
    bool rotated_ = false;

    JetVec raw_jets(cplx s, int order) const;
    void setup_expressions(const Expr& bx, const Expr& by, const Expr& bz);
    void normalise();
};

// Sign choice for the two square roots in the geometry. A hint selects the
// root nearest to it; without one the principal root is used, which is the
// positive value on the real axis for the fields we handle.
struct BranchHint {
    std::optional<cplx> B;
    std::optional<cplx> rho;
};

cplx branch_sqrt(cplx radicand, const std::optional<cplx>& hint);

struct FieldSample {
    cplx s;
    Vec3c Bvec, dBvec;
    cplx B2, B;         // B = sqrt(B . B)
    cplx rho;           // sqrt(Bx^2 + By^2)
    cplx E_plus, E_minus;
    cplx theta, phi;
    cplx cos_theta, sin_theta;
    cplx theta_dot, phi_dot;
    BranchHint branch() const { return {B, rho}; }
};

// Errors: pole-at-point, branch-ambiguity (within 1e-12 of a zero of B^2).
FieldSample eval_field(const FieldProfile& p, cplx s, const BranchHint& hint = {});

// F = (B - Bz)/(B + Bz). Equals -1 at turning points.
cplx eval_F(const FieldProfile& p, cplx s, const BranchHint& hint = {});

struct AssumptionCheck {
    std::string id;
    std::string name;
    bool passed;
    std::string detail;
};

struct AssumptionReport {
    std::vector<AssumptionCheck> checks;
    bool all_passed() const;
    const AssumptionCheck* find(const std::string& id) const;
};

struct ProbeGrid {
    double s_min = -50.0;
    double s_max = 50.0;
    int n_real = 401;
    double box_half_width = 4.0; // complex probe box for the B^2 root check
};

AssumptionReport validate_assumptions(const FieldProfile& p, const ProbeGrid& grid = {});

} // namespace adiabat
