use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_DEGREE: usize = 3;

/// Exponent multi-index `α`, one entry per coordinate.
pub type Monomial = Vec<u8>;

/// Monomials `x^α` with `1 <= |α| <= p`, in graded lexicographic order, minus
/// the exclusions imposed by unbiasedness constraints.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonomialBasis {
    dimension: usize,
    degree: usize,
    exponents: Vec<Monomial>,
    excluded: Vec<Monomial>,
}

impl MonomialBasis {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Every monomial of the unconstrained basis.
    pub fn exponents(&self) -> &[Monomial] {
        &self.exponents
    }

    pub fn excluded(&self) -> &[Monomial] {
        &self.excluded
    }

    /// Monomials that carry a control variate, in basis order.
    pub fn active(&self) -> impl Iterator<Item = &Monomial> + '_ {
        self.exponents.iter().filter(|m| !self.excluded.contains(m))
    }

    pub fn len(&self) -> usize {
        self.exponents.len() - self.excluded.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Builds the degree-`p` basis in `d` coordinates.
///
/// Order: total degree ascending, then lexicographically descending exponents,
/// so `d = 2, p = 2` gives `x1, x2, x1², x1x2, x2²`.
pub fn monomial_basis(d: usize, p: usize, exclusions: &[Monomial]) -> Result<MonomialBasis> {
    if !(1..=MAX_DEGREE).contains(&p) {
        return Err(Error::UnsupportedDegree(p));
    }
    if d == 0 {
        return Err(Error::Setup("basis dimension must be >= 1".into()));
    }
    let mut exponents = Vec::new();
    for total in 1..=p {
        let mut current = vec![0u8; d];
        fill(&mut current, 0, total as u8, &mut exponents);
    }
    let mut excluded: Vec<Monomial> = Vec::new();
    for ex in exclusions {
        if !exponents.contains(ex) {
            return Err(Error::Setup(format!(
                "excluded monomial {ex:?} is not part of the degree-{p} basis in {d} coordinates"
            )));
        }
        if !excluded.contains(ex) {
            excluded.push(ex.clone());
        }
    }
    Ok(MonomialBasis {
        dimension: d,
        degree: p,
        exponents,
        excluded,
    })
}

fn fill(current: &mut Monomial, pos: usize, remaining: u8, out: &mut Vec<Monomial>) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(current.clone());
        current[pos] = 0;
        return;
    }
    for e in (0..=remaining).rev() {
        current[pos] = e;
        fill(current, pos + 1, remaining - e, out);
    }
    current[pos] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_lex_order() {
        let b = monomial_basis(2, 2, &[]).unwrap();
        let expected: Vec<Monomial> = vec![vec![1, 0], vec![0, 1], vec![2, 0], vec![1, 1], vec![0, 2]];
        assert_eq!(b.exponents(), expected.as_slice());
    }

    #[test]
    fn exclusions() {
        let b = monomial_basis(1, 2, &[vec![1]]).unwrap();
        assert_eq!(b.active().cloned().collect::<Vec<_>>(), vec![vec![2u8]]);
        assert_eq!(b.len(), 1);
        assert!(monomial_basis(1, 2, &[vec![3]]).is_err());
    }

    #[test]
    fn unsupported_degree() {
        assert!(matches!(monomial_basis(2, 4, &[]), Err(Error::UnsupportedDegree(4))));
        assert!(matches!(monomial_basis(2, 0, &[]), Err(Error::UnsupportedDegree(0))));
    }
}
