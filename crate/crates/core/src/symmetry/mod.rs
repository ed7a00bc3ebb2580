//! Rearrangements, polarizations and symmetry certificates on balls.

mod distribution;
mod polarization;
mod probe;
mod rearrangement;

pub use polarization::{distribution_gap, polarize, reflect, HalfSpace, HalfSpaceFamily, Polarized, PointFunction, Reflected};
pub use probe::{
    best_axis, foliated_deficit, polarization_violations, radial_deficit, schwarz_fixed, symmetry_breaking_probe,
    symmetry_report, BreakingReport, SymmetryReport, BREAKING_MARGIN, SYMMETRY_TOLERANCE,
};
pub use rearrangement::{schwarz_rearrange, talenti_check, Rearrangement, TalentiReport, TALENTI_SLACK};
