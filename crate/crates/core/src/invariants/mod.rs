//! Link invariants used to certify an arrangement: pairwise linking numbers
//! (diagram count and Gauss integral), Milnor's triple linking number and
//! the Kauffman bracket.

use std::fmt;

use thiserror::Error;

use crate::diagram::{project, DiagramError, LinkDiagram};
use crate::knot::PolygonalKnot;
use crate::scalar::Scalar;

mod bracket;
mod gauss;
mod milnor;

pub use bracket::{
    borromean_bracket, bracket_from_pd, kauffman_bracket, loop_value, normalize, pd_code,
    LaurentPoly, DEFAULT_CROSSING_CAP,
};
pub use gauss::linking_number_gauss;
pub use milnor::{longitudes, milnor_mu123, Magnus};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InvariantError {
    #[error("odd signed crossing sum {sum} between components {i} and {j}")]
    CorruptDiagram { i: usize, j: usize, sum: i32 },
    #[error("component index out of range or repeated: {0}, {1}")]
    BadComponents(usize, usize),
    #[error("components too close for the Gauss integral (distance {0:e})")]
    TooClose(f64),
    #[error("pairwise linked (lk12 = {lk12}, lk13 = {lk13}, lk23 = {lk23}); triple linking number undefined")]
    PairwiseLinked { lk12: i64, lk13: i64, lk23: i64 },
    #[error("{count} crossings exceed the state-sum cap of {cap}")]
    TooManyCrossings { count: usize, cap: usize },
    #[error("expected a 3-component link, got {0}")]
    NotThreeComponents(usize),
    #[error("Wirtinger arc values did not stabilise")]
    NoConvergence,
    #[error("diagram: {0}")]
    Diagram(#[from] DiagramError),
}

/// Half the signed number of crossings between components `i` and `j`.
pub fn linking_number_diagram<T: Scalar>(
    d: &LinkDiagram<T>,
    i: usize,
    j: usize,
) -> Result<i64, InvariantError> {
    if i == j || i >= d.component_count() || j >= d.component_count() {
        return Err(InvariantError::BadComponents(i, j));
    }
    let sum = d.signed_sum_between(i, j);
    if sum % 2 != 0 {
        return Err(InvariantError::CorruptDiagram { i, j, sum });
    }
    Ok(i64::from(sum / 2))
}

/// Residuals above this fail the certificate.
pub const GAUSS_RESIDUAL_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Pass,
    Fail(String),
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Pass => write!(f, "pass"),
            Verdict::Fail(r) => write!(f, "fail ({r})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BorromeanCertificate {
    pub lk_12: i64,
    pub lk_13: i64,
    pub lk_23: i64,
    /// `Err(PairwiseLinked)` when the triple number is not defined.
    pub mu123: Result<i64, InvariantError>,
    /// Gauss integrals for the pairs (1,2), (1,3), (2,3).
    pub gauss: [f64; 3],
    pub gauss_residuals: [f64; 3],
    pub bracket: Option<LaurentPoly>,
    pub bracket_match: Option<bool>,
    pub crossings: usize,
    pub projection_direction: [f64; 3],
    pub verdict: Verdict,
}

impl BorromeanCertificate {
    pub fn lk(&self) -> [i64; 3] {
        [self.lk_12, self.lk_13, self.lk_23]
    }

    /// Recomputes the verdict from the recorded fields.
    pub fn evaluate(&self) -> Verdict {
        let mut reasons = Vec::new();
        for (name, v) in [
            ("lk12", self.lk_12),
            ("lk13", self.lk_13),
            ("lk23", self.lk_23),
        ] {
            if v != 0 {
                reasons.push(format!("{name} = {v}"));
            }
        }
        match &self.mu123 {
            Ok(m) if m.abs() == 1 => {}
            Ok(m) => reasons.push(format!("mu123 = {m}")),
            Err(e) => reasons.push(format!("mu123 undefined: {e}")),
        }
        for (k, r) in self.gauss_residuals.iter().enumerate() {
            if !(*r < GAUSS_RESIDUAL_LIMIT) {
                reasons.push(format!("gauss residual {k} = {r:e}"));
            }
        }
        if self.bracket_match == Some(false) {
            reasons.push("bracket differs from the Borromean rings".to_string());
        }
        if reasons.is_empty() {
            Verdict::Pass
        } else {
            Verdict::Fail(reasons.join("; "))
        }
    }
}

/// Full invariant check of a three-component link. The bracket is computed
/// only when `bracket_cap` is given and the diagram has at most that many
/// crossings.
pub fn certify_borromean<T: Scalar>(
    link: &[PolygonalKnot<T>],
    seed: u64,
    bracket_cap: Option<usize>,
) -> Result<BorromeanCertificate, InvariantError> {
    if link.len() != 3 {
        return Err(InvariantError::NotThreeComponents(link.len()));
    }
    let d = project(link, seed)?;
    let pairs = [(0, 1), (0, 2), (1, 2)];
    let mut lk = [0i64; 3];
    let mut gauss = [0f64; 3];
    let mut residuals = [0f64; 3];
    for (k, &(i, j)) in pairs.iter().enumerate() {
        lk[k] = linking_number_diagram(&d, i, j)?;
        gauss[k] = linking_number_gauss(&link[i], &link[j])?.as_f64();
        residuals[k] = (gauss[k] - lk[k] as f64).abs();
    }
    let mu123 = match milnor_mu123(&d) {
        Ok(m) => Ok(m),
        Err(e @ InvariantError::PairwiseLinked { .. }) => Err(e),
        Err(e) => return Err(e),
    };
    let bracket = match bracket_cap {
        Some(cap) if d.crossing_count() <= cap => Some(kauffman_bracket(&d, cap)?),
        _ => None,
    };
    let bracket_match = bracket.as_ref().map(|b| *b == borromean_bracket());
    let mut cert = BorromeanCertificate {
        lk_12: lk[0],
        lk_13: lk[1],
        lk_23: lk[2],
        mu123,
        gauss,
        gauss_residuals: residuals,
        bracket,
        bracket_match,
        crossings: d.crossing_count(),
        projection_direction: d.projection_direction.to_f64(),
        verdict: Verdict::Pass,
    };
    cert.verdict = cert.evaluate();
    Ok(cert)
}
