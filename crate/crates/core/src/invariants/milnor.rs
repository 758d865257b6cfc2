//! Milnor's triple linking number from a three-component diagram.
//!
//! Each Wirtinger arc carries the Magnus expansion of its meridian, a power
//! series in non-commuting `X1, X2, X3` truncated above degree two. Arc
//! values are propagated along the components through the crossing
//! relations until nothing changes; the longitude of the third component
//! is then read off as a product of meridians and its `X1 X2` coefficient
//! is the invariant.

use crate::diagram::LinkDiagram;
use crate::scalar::Scalar;

use super::InvariantError;

const VARS: usize = 3;

/// Truncated Magnus series: constant, linear and quadratic coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Magnus {
    pub constant: i64,
    pub linear: [i64; VARS],
    /// `quadratic[i][j]` is the coefficient of `Xi Xj`.
    pub quadratic: [[i64; VARS]; VARS],
}

impl Magnus {
    pub fn one() -> Self {
        Self {
            constant: 1,
            ..Self::default()
        }
    }

    /// Expansion of the generator `x_i`, i.e. `1 + X_i`.
    pub fn generator(i: usize) -> Self {
        let mut m = Self::one();
        m.linear[i] = 1;
        m
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut r = Self {
            constant: self.constant * o.constant,
            ..Self::default()
        };
        for i in 0..VARS {
            r.linear[i] = self.constant * o.linear[i] + self.linear[i] * o.constant;
            for j in 0..VARS {
                r.quadratic[i][j] = self.constant * o.quadratic[i][j]
                    + self.quadratic[i][j] * o.constant
                    + self.linear[i] * o.linear[j];
            }
        }
        r
    }

    /// Inverse of a series with constant term 1: `1 - A + A^2`.
    pub fn inverse(&self) -> Self {
        debug_assert_eq!(self.constant, 1);
        let mut r = Self::one();
        for i in 0..VARS {
            r.linear[i] = -self.linear[i];
            for j in 0..VARS {
                r.quadratic[i][j] = -self.quadratic[i][j] + self.linear[i] * self.linear[j];
            }
        }
        r
    }

    pub fn pow(&self, e: i32) -> Self {
        let base = if e < 0 { self.inverse() } else { *self };
        (0..e.unsigned_abs()).fold(Self::one(), |acc, _| acc.mul(&base))
    }
}

/// Wirtinger arcs of one component: the over-passages are assigned to arcs
/// and each undercrossing closes one arc and opens the next.
struct Arcs {
    /// For each passage position, the arc it lies on.
    arc_of: Vec<usize>,
    /// Positions of the undercrossings in traversal order.
    under: Vec<usize>,
}

impl Arcs {
    fn new(passages: &[crate::diagram::Passage]) -> Self {
        let under: Vec<usize> = passages
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.over)
            .map(|(k, _)| k)
            .collect();
        let m = under.len().max(1);
        let mut count = 0;
        let arc_of = passages
            .iter()
            .map(|p| {
                let a = count % m;
                if !p.over {
                    count += 1;
                }
                a
            })
            .collect();
        Self { arc_of, under }
    }

    fn count(&self) -> usize {
        self.under.len().max(1)
    }
}

/// Locates the over-arc of every crossing: `(component, arc)`.
fn over_arcs<T: Scalar>(d: &LinkDiagram<T>, arcs: &[Arcs]) -> Vec<(usize, usize)> {
    let mut out = vec![(0, 0); d.crossing_count()];
    for (c, comp) in d.components.iter().enumerate() {
        for (k, p) in comp.iter().enumerate() {
            if p.over {
                out[p.crossing] = (c, arcs[c].arc_of[k]);
            }
        }
    }
    out
}

pub(crate) const MAX_PASSES: usize = 16;

/// Longitudes of all three components as truncated Magnus series, each
/// corrected to have zero total exponent in its own meridian.
pub fn longitudes<T: Scalar>(d: &LinkDiagram<T>) -> Result<[Magnus; VARS], InvariantError> {
    if d.component_count() != VARS {
        return Err(InvariantError::NotThreeComponents(d.component_count()));
    }
    let arcs: Vec<Arcs> = d.components.iter().map(|c| Arcs::new(c)).collect();
    let over = over_arcs(d, &arcs);
    let mut values: Vec<Vec<Magnus>> = arcs
        .iter()
        .enumerate()
        .map(|(c, a)| vec![Magnus::generator(c); a.count()])
        .collect();
    let factor = |values: &Vec<Vec<Magnus>>, crossing: usize| {
        let (oc, oa) = over[crossing];
        values[oc][oa].pow(d.crossings[crossing].sign)
    };
    let mut converged = false;
    for _ in 0..MAX_PASSES {
        let mut changed = false;
        for (c, comp) in d.components.iter().enumerate() {
            let a = &arcs[c];
            // the last undercrossing leads back to arc 0, which stays x_c
            for k in 0..a.under.len().saturating_sub(1) {
                let w = factor(&values, comp[a.under[k]].crossing);
                let next = w.inverse().mul(&values[c][k]).mul(&w);
                if next != values[c][k + 1] {
                    values[c][k + 1] = next;
                    changed = true;
                }
            }
        }
        if !changed {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(InvariantError::NoConvergence);
    }
    let mut out = [Magnus::one(); VARS];
    for (c, comp) in d.components.iter().enumerate() {
        let mut l = Magnus::one();
        let mut own = 0;
        for &k in &arcs[c].under {
            let x = comp[k].crossing;
            l = l.mul(&factor(&values, x));
            if over[x].0 == c {
                own += d.crossings[x].sign;
            }
        }
        out[c] = l.mul(&Magnus::generator(c).pow(-own));
    }
    Ok(out)
}

/// `μ̄(123)`: coefficient of `X1 X2` in the longitude of the third
/// component. Refuses when any pairwise linking number is non-zero.
pub fn milnor_mu123<T: Scalar>(d: &LinkDiagram<T>) -> Result<i64, InvariantError> {
    if d.component_count() != VARS {
        return Err(InvariantError::NotThreeComponents(d.component_count()));
    }
    let lk = [
        super::linking_number_diagram(d, 0, 1)?,
        super::linking_number_diagram(d, 0, 2)?,
        super::linking_number_diagram(d, 1, 2)?,
    ];
    if lk.iter().any(|&l| l != 0) {
        return Err(InvariantError::PairwiseLinked {
            lk12: lk[0],
            lk13: lk[1],
            lk23: lk[2],
        });
    }
    let l = longitudes(d)?;
    Ok(l[2].quadratic[0][1])
}
