//! Correct-assignment rates [%] published with the original study, for
//! side-by-side comparison only. The study did not publish its noise
//! ranges, so these are not reproducible exactly.

use assoc_core::{CovarianceRegime, DistanceKind, ModelPolicy};

use CovarianceRegime::{ArbitraryShape, SteadyState};
use DistanceKind::{AssociationLogLikelihood as AssoLl, AssociationLogLikelihoodNoDimTerm as NoDim, Mahalanobis as Maha};
use ModelPolicy::{AllH1 as H1, AllH2 as H2, MixedH1H11 as Mixed};

/// Layout of one results table.
#[derive(Debug, Clone, Copy)]
pub struct TableLayout {
    pub file_name: &'static str,
    pub title: &'static str,
    pub regime: CovarianceRegime,
    pub policies: &'static [ModelPolicy],
    pub distances: &'static [DistanceKind],
}

pub const TRACK_COUNTS: [usize; 3] = [10, 30, 50];

pub const TABLES: [TableLayout; 4] = [
    TableLayout {
        file_name: "table2_steady_state.csv",
        title: "steady state, H1/H2",
        regime: SteadyState,
        policies: &[H1, H2],
        distances: &[Maha, AssoLl],
    },
    TableLayout {
        file_name: "table3_arbitrary_shape.csv",
        title: "arbitrary shape, H1/H2",
        regime: ArbitraryShape,
        policies: &[H1, H2],
        distances: &[Maha, AssoLl],
    },
    TableLayout {
        file_name: "table4_steady_state_mixed.csv",
        title: "steady state, H1 with H11",
        regime: SteadyState,
        policies: &[Mixed],
        distances: &[Maha, AssoLl, NoDim],
    },
    TableLayout {
        file_name: "table5_arbitrary_shape_mixed.csv",
        title: "arbitrary shape, H1 with H11",
        regime: ArbitraryShape,
        policies: &[Mixed],
        distances: &[Maha, AssoLl, NoDim],
    },
];

/// (regime, policy, distance, [N = 10, 30, 50])
const REFERENCE: [(CovarianceRegime, ModelPolicy, DistanceKind, [f64; 3]); 14] = [
    (SteadyState, H1, Maha, [79.3, 49.8, 34.5]),
    (SteadyState, H2, Maha, [79.8, 50.9, 35.6]),
    (SteadyState, H1, AssoLl, [81.9, 55.0, 40.5]),
    (SteadyState, H2, AssoLl, [82.3, 56.0, 41.5]),
    (ArbitraryShape, H1, Maha, [72.3, 39.2, 25.9]),
    (ArbitraryShape, H2, Maha, [70.8, 37.6, 24.7]),
    (ArbitraryShape, H1, AssoLl, [72.4, 39.4, 26.2]),
    (ArbitraryShape, H2, AssoLl, [70.8, 37.8, 24.9]),
    (SteadyState, Mixed, Maha, [72.1, 40.2, 27.4]),
    (SteadyState, Mixed, AssoLl, [79.8, 53.4, 40.9]),
    (SteadyState, Mixed, NoDim, [79.0, 51.7, 39.2]),
    (ArbitraryShape, Mixed, Maha, [65.7, 32.6, 21.4]),
    (ArbitraryShape, Mixed, AssoLl, [73.2, 42.3, 29.4]),
    (ArbitraryShape, Mixed, NoDim, [72.2, 40.7, 28.2]),
];

pub fn reference_rate(regime: CovarianceRegime, policy: ModelPolicy, distance: DistanceKind, n_tracks: usize) -> Option<f64> {
    let column = TRACK_COUNTS.iter().position(|&n| n == n_tracks)?;
    REFERENCE
        .iter()
        .find(|(r, p, d, _)| *r == regime && *p == policy && *d == distance)
        .map(|(.., values)| values[column])
}
