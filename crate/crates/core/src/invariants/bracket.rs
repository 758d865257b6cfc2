//! Kauffman bracket by state sum over a planar-diagram code.

use std::collections::BTreeMap;
use std::fmt;

use crate::diagram::LinkDiagram;
use crate::scalar::Scalar;

use super::InvariantError;

pub const DEFAULT_CROSSING_CAP: usize = 16;

/// Laurent polynomial in `A` with integer coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LaurentPoly {
    terms: BTreeMap<i32, i64>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn monomial(coeff: i64, exp: i32) -> Self {
        let mut p = Self::zero();
        p.add_term(exp, coeff);
        p
    }

    pub fn one() -> Self {
        Self::monomial(1, 0)
    }

    /// Builds from `(exponent, coefficient)` pairs.
    pub fn from_terms<I: IntoIterator<Item = (i32, i64)>>(terms: I) -> Self {
        let mut p = Self::zero();
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    fn add_term(&mut self, exp: i32, coeff: i64) {
        let c = self.terms.entry(exp).or_insert(0);
        *c += coeff;
        if *c == 0 {
            self.terms.remove(&exp);
        }
    }

    pub fn coeff(&self, exp: i32) -> i64 {
        self.terms.get(&exp).copied().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, i64)> + '_ {
        self.terms.iter().map(|(&e, &c)| (e, c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (e, c) in o.terms() {
            r.add_term(e, c);
        }
        r
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut r = Self::zero();
        for (e1, c1) in self.terms() {
            for (e2, c2) in o.terms() {
                r.add_term(e1 + e2, c1 * c2);
            }
        }
        r
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Self::one(), |acc, _| acc.mul(self))
    }

    /// Substitutes `A -> A^-1`.
    pub fn mirror(&self) -> Self {
        Self::from_terms(self.terms().map(|(e, c)| (-e, c)))
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (k, (e, c)) in self.terms().enumerate() {
            match (k, c < 0) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            match (c.abs(), e) {
                (m, 0) => write!(f, "{m}")?,
                (1, e) => write!(f, "A^{e}")?,
                (m, e) => write!(f, "{m}A^{e}")?,
            }
        }
        Ok(())
    }
}

/// Loop value `-A^2 - A^-2`.
pub fn loop_value() -> LaurentPoly {
    LaurentPoly::from_terms([(2, -1), (-2, -1)])
}

/// Planar-diagram code: per crossing the four incident edge labels,
/// counterclockwise starting from the incoming under-strand. Components
/// without crossings are returned as a count of free loops.
pub fn pd_code<T: Scalar>(d: &LinkDiagram<T>) -> (Vec<[usize; 4]>, usize) {
    let mut pd = vec![[usize::MAX; 4]; d.crossing_count()];
    let mut next_label = 0;
    let mut free = 0;
    for comp in &d.components {
        let m = comp.len();
        if m == 0 {
            free += 1;
            continue;
        }
        // edge k runs from passage k to passage k + 1
        let base = next_label;
        next_label += m;
        for (k, p) in comp.iter().enumerate() {
            let incoming = base + (k + m - 1) % m;
            let outgoing = base + k;
            let positive = d.crossings[p.crossing].sign > 0;
            let slot = &mut pd[p.crossing];
            if p.over {
                // positive: [in_u, out_o, out_u, in_o]; negative: [in_u, in_o, out_u, out_o]
                if positive {
                    slot[1] = outgoing;
                    slot[3] = incoming;
                } else {
                    slot[1] = incoming;
                    slot[3] = outgoing;
                }
            } else {
                slot[0] = incoming;
                slot[2] = outgoing;
            }
        }
    }
    (pd, free)
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Unnormalized bracket `<D>` of a PD code plus `free` crossingless loops.
pub fn bracket_from_pd(
    pd: &[[usize; 4]],
    free: usize,
    cap: usize,
) -> Result<LaurentPoly, InvariantError> {
    let n = pd.len();
    if n > cap {
        return Err(InvariantError::TooManyCrossings { count: n, cap });
    }
    let labels = pd.iter().flatten().copied().max().map_or(0, |m| m + 1);
    let mut counts: BTreeMap<(i32, usize), i64> = BTreeMap::new();
    let mut used = vec![false; labels];
    pd.iter().flatten().for_each(|&l| used[l] = true);
    let mut parent = vec![0; labels];
    for state in 0u64..(1u64 << n) {
        parent.iter_mut().enumerate().for_each(|(i, p)| *p = i);
        let mut a_minus_b = 0i32;
        for (k, x) in pd.iter().enumerate() {
            let (p, q) = if state >> k & 1 == 0 {
                a_minus_b += 1;
                ((x[0], x[1]), (x[2], x[3]))
            } else {
                a_minus_b -= 1;
                ((x[0], x[3]), (x[1], x[2]))
            };
            for (u, v) in [p, q] {
                let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
                parent[ru] = rv;
            }
        }
        let loops = (0..labels)
            .filter(|&i| used[i] && find(&mut parent, i) == i)
            .count()
            + free;
        *counts.entry((a_minus_b, loops)).or_insert(0) += 1;
    }
    let d = loop_value();
    let mut total = LaurentPoly::zero();
    for ((e, loops), c) in counts {
        let term = LaurentPoly::monomial(c, e).mul(&d.pow(loops as u32 - 1));
        total = total.add(&term);
    }
    Ok(total)
}

/// Writhe-normalized bracket `(-A^3)^-w <D>` of a diagram.
pub fn kauffman_bracket<T: Scalar>(
    d: &LinkDiagram<T>,
    cap: usize,
) -> Result<LaurentPoly, InvariantError> {
    let (pd, free) = pd_code(d);
    let raw = bracket_from_pd(&pd, free, cap)?;
    Ok(normalize(&raw, d.writhe()))
}

pub fn normalize(raw: &LaurentPoly, writhe: i32) -> LaurentPoly {
    let sign = if writhe % 2 == 0 { 1 } else { -1 };
    raw.mul(&LaurentPoly::monomial(sign, -3 * writhe))
}

/// Normalized bracket of the Borromean rings, the 64-state sum over the
/// standard six-crossing diagram.
pub fn borromean_bracket() -> LaurentPoly {
    LaurentPoly::from_terms([
        (-12, -1),
        (-8, 3),
        (-4, -2),
        (0, 4),
        (4, -2),
        (8, 3),
        (12, -1),
    ])
}
