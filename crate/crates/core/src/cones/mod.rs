//! Tangent cones: Grassmannian limits of dilated kernels, the cone sets and
//! the Helffer–Nourrigat cones, and the limit groupoid.

mod cone;
mod groupoid;
mod hn;
mod limit;
mod path;
mod subspace;

pub use cone::{cone_g0, conjugate, stratum_label, ClosureCheck, ConeMember, ConeSample, ConeSampling};
pub use groupoid::{
    canon_left, canon_right, groupoid_compose, groupoid_convergence_check, groupoid_inverse, groupoid_range,
    groupoid_source, ConvergenceRow, ConvergenceTable, GroupoidElement,
};
pub use hn::{
    hn_membership_def2, hn_membership_in, hn_sample_def1, CovectorFamily, CovectorPath, Def1Outcome, HnMembership,
};
pub use limit::{
    dilated_kernel, dilated_kernel_exact, is_subalgebra, limit_along, subalgebra_defect, ConeLimit,
    DivergenceReport, LimitOptions, LimitOutcome,
};
pub use path::{ApproachPath, Laurent};
pub use subspace::{grassmann_distance, Subspace};
