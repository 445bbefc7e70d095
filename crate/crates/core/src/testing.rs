//! Deliberate corruptions used to check that the harness notices broken maps.
//! Never enabled outside tests and the `--mutant` CLI switch.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mutation {
    #[default]
    None,
    /// Negates the Hilbert symbol whenever both arguments have odd top valuation.
    FlipHilbert,
    /// Multiplies every `N_{L/K}` by the canonical nonsquare unit.
    SkewNorm,
}
