#pragma once

#include "pbf/geometry.hpp"
#include "pbf/grid.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstddef>
#include <optional>
#include <vector>

namespace pbf {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct MaterialParams {
    double conductivity = 33.5;  // W/(m K)
    double diffusivity = 6e-6;   // m^2/s
    double absorptivity = 1.0;   // fraction of commanded power entering the part

    void validate() const;
};

struct BoundaryOptions {
    /// Zero-temperature sink under the bottom window slot and under build layer 1.
    bool substrate_dirichlet = true;
    /// Conductance of any face touching powder, relative to solid-solid faces.
    double powder_conductivity_ratio = 0.0;
};

/// alpha dt (1/dx^2 + 1/dy^2 + 1/dz^2); the explicit scheme needs this <= 1/2.
double cfl_number(const MeshSpec& spec, const MaterialParams& mat);

/**
 * Explicit step operator for one build layer: x(n+1) = A x(n) + B u(n).
 *
 * B is diagonal with the input gain on in-part elements of the top slot, so u
 * is a power distribution in watts and the state is a temperature rise in K.
 */
class SystemMatrices {
  public:
    MeshSpec mesh;
    int layer = 1;
    SparseMatrix A;
    SparseMatrix B;
    double input_gain = 0.0;
    /// In-part flags of the top slot (the layer being scanned).
    LayerMask top_mask;

    /// y = A x, touching only rows that differ from the identity.
    void apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const;
    /// Rows of A that are not identity rows (0-based).
    const std::vector<int>& active_rows() const { return active_; }

  private:
    friend SystemMatrices build_system(const MeshSpec&, const MaterialParams&, const PartGeometry&, int,
                                       const BoundaryOptions&);
    std::vector<int> active_;
    std::vector<int> row_ptr_;
    std::vector<int> cols_;
    std::vector<double> vals_;
};

/**
 * Assembles A and B for scanning build layer `layer`. Window slot d3 holds
 * build layer layer - L + d3; slots below build layer 1 are inert.
 * Throws StabilityError when the CFL bound is violated.
 */
SystemMatrices build_system(const MeshSpec& spec, const MaterialParams& mat, const PartGeometry& geom, int layer,
                            const BoundaryOptions& opts = {});

struct ThermalState {
    Eigen::VectorXd x;
    int layer = 1;
};

/// A x + B u.
ThermalState step(const ThermalState& state, const Eigen::VectorXd& u, const SystemMatrices& sys);

/// Window shift: slot d3 receives slot d3 + 1, the top slot is zeroed.
Eigen::VectorXd shift_window(const Eigen::VectorXd& x, const MeshSpec& spec);
SparseMatrix shift_matrix(const MeshSpec& spec);

/**
 * End-of-layer reset: x(0, l+1) = shift(A_r x(N_t, l)). Without an A_r the
 * reset operator is zero and so is the result.
 */
ThermalState recoat_and_shift(const ThermalState& state, const MeshSpec& spec,
                              const std::optional<SparseMatrix>& recoat = std::nullopt);

/**
 * Corner temperature after each camera sample when a 1 W pulse is held on the
 * top corner element (1,1) for one sample of `substeps` mesh steps. The block
 * is n1 x n2 x layers, solid everywhere, adiabatic on every face.
 */
std::vector<double> corner_pulse_decay(const MaterialParams& mat, const MeshSpec& spec, int samples, int substeps);

} // namespace pbf
