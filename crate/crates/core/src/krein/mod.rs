//! `Γ(z)`, `Γ^{AB}(z)` and the resolvent of `H^{AB}`:
//!
//! `R^{AB}(z) = R(z) + Σ_{μμ'} [(Γ^{AB}(z))^{-1} B]_{μμ'} ⟨Φ^{z̄}_{μ'}, ·⟩ Φ^z_μ`.

mod apply;
mod boundary_data;
mod gamma;
mod kernel;

pub use apply::{apply_resolvent, apply_resolvent_on_grid, AppliedResolvent, ApplyOptions, GridResolvent};
pub use boundary_data::{extract_all, extract_boundary_data, verify_boundary_conditions, ExtractOptions, SiteData};
pub use gamma::{
    gamma_dressed, gamma_free, gamma_free_with, invert_dressed, near_pole_threshold, CutPolicy, DressedInverse,
    GammaKind, GammaMatrix,
};
pub use kernel::{resolvent_kernel, DefectFunction, KernelOptions, ResolventKernel};

pub(crate) use apply::{check_state, projections_1d, resolvent_on_grid_with};
pub(crate) use gamma::assemble;
pub(crate) use kernel::{channel_indices, check_compatible, defect_value, ensure_valid};
