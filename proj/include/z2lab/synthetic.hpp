#pragma once

#include "z2lab/local.hpp"
#include "z2lab/spectral.hpp"

namespace z2lab {

/// Restriction of Re(a * (x1 + i x2)^(k + 1/2)) to the mesh, expressed in
/// the cocycle gauge by joint spanning-tree continuation of the argument
/// and of the cocycle transport. Requires the antipodal two-point
/// configuration (the formula's branch set is the z axis).
TwistedSection synthetic_axial_section(const SphereMesh& mesh, const MeshTables& tables,
                                       const SignCocycle& cocycle, int k, Complex amplitude);

/// Compactly supported section Re(a * (r e^{i theta})^(n + 1/2)) * bump(r)
/// in geodesic polar coordinates about the given branch point, with a
/// quintic cutoff equal to 1 below r_cutoff/2 and 0 beyond r_cutoff.
TwistedSection synthetic_local_section(const SphereMesh& mesh, const MeshTables& tables,
                                       const SignCocycle& cocycle, int branch_index, int n,
                                       Complex amplitude, double r_cutoff);

/// Smooth cutoff used above (C^2 quintic step).
double quintic_bump(double r, double r_cutoff);

}  // namespace z2lab
