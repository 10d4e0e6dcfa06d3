use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Regressor matrix and binary response of a probit/logit model.
///
/// Construction validates every invariant, so a value of this type always has
/// `n >= d`, no all-zero row, finite entries and full column rank.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryRegressionData {
    n: usize,
    d: usize,
    /// Row-major `n × d`.
    design: Vec<f64>,
    response: Vec<bool>,
}

impl BinaryRegressionData {
    pub fn new(rows: Vec<Vec<f64>>, response: Vec<u8>) -> Result<Self> {
        let n = rows.len();
        if n != response.len() {
            return Err(Error::Setup(format!(
                "design has {n} rows but response has {} entries",
                response.len()
            )));
        }
        let d = rows.first().map_or(0, Vec::len);
        if d == 0 {
            return Err(Error::Setup("design matrix has no columns".into()));
        }
        if n < d {
            return Err(Error::Setup(format!("need n >= d, got n = {n}, d = {d}")));
        }
        let mut design = Vec::with_capacity(n * d);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::Setup(format!(
                    "row {i} has {} columns, expected {d}",
                    row.len()
                )));
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::Setup(format!("row {i}, column {j}: non-finite value")));
            }
            if row.iter().all(|v| *v == 0.0) {
                return Err(Error::Setup(format!("row {i} is all zeros")));
            }
            design.extend_from_slice(row);
        }
        let response = response
            .into_iter()
            .enumerate()
            .map(|(i, y)| match y {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(Error::Setup(format!("response {i} is {other}, expected 0 or 1"))),
            })
            .collect::<Result<Vec<_>>>()?;

        let singular = DMatrix::from_row_slice(n, d, &design).singular_values();
        let tol = singular.max() * (n.max(d) as f64) * f64::EPSILON;
        let rank = singular.iter().filter(|s| **s > tol).count();
        if rank < d {
            return Err(Error::Setup(format!(
                "design matrix is rank deficient (rank {rank} < {d} columns)"
            )));
        }
        Ok(BinaryRegressionData {
            n,
            d,
            design,
            response,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.design[i * self.d..(i + 1) * self.d]
    }

    pub fn response(&self) -> &[bool] {
        &self.response
    }

    pub fn rows(&self) -> impl Iterator<Item = (&[f64], bool)> + '_ {
        self.design.chunks_exact(self.d).zip(self.response.iter().copied())
    }

    pub fn design_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n, self.d, &self.design)
    }

    /// The same data under `(x_i, y_i) -> (-x_i, 1 - y_i)`, which leaves the
    /// probit and logit likelihoods unchanged.
    pub fn reflected(&self) -> Self {
        BinaryRegressionData {
            n: self.n,
            d: self.d,
            design: self.design.iter().map(|v| -v).collect(),
            response: self.response.iter().map(|y| !y).collect(),
        }
    }

    /// Prepends a column of ones.
    pub fn with_intercept(&self) -> Result<Self> {
        let rows = self
            .design
            .chunks_exact(self.d)
            .map(|r| std::iter::once(1.0).chain(r.iter().copied()).collect())
            .collect();
        BinaryRegressionData::new(rows, self.response.iter().map(|&y| y as u8).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_invalid_designs() {
        assert!(BinaryRegressionData::new(vec![vec![1.0], vec![0.0]], vec![1, 0]).is_err());
        assert!(BinaryRegressionData::new(vec![vec![1.0], vec![2.0]], vec![1, 2]).is_err());
        let collinear = vec![vec![1.0, 2.0], vec![2.0, 4.0], vec![-1.0, -2.0]];
        let err = BinaryRegressionData::new(collinear, vec![1, 0, 1]).unwrap_err();
        assert!(err.to_string().contains("rank deficient"));
        assert!(BinaryRegressionData::new(vec![vec![1.0, 2.0]], vec![1]).is_err());
    }

    #[test]
    fn minimal_instance() {
        let data = BinaryRegressionData::new(vec![vec![-1.0], vec![1.0]], vec![0, 1]).unwrap();
        assert_eq!((data.n(), data.dimension()), (2, 1));
        let with = data.with_intercept().unwrap();
        assert_eq!(with.row(0), &[1.0, -1.0]);
        let refl = data.reflected();
        assert_eq!(refl.row(1), &[-1.0]);
        assert_eq!(refl.response(), &[true, false]);
    }
}
