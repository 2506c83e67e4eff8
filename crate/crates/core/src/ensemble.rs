use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Axis-aligned box `[lower_j, upper_j]` in every coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperrectangle {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Hyperrectangle {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        check_dim(lower.len(), upper.len())?;
        if lower.is_empty() {
            return Err(Error::Empty("box"));
        }
        for (l, u) in lower.iter().zip(&upper) {
            if !(l.is_finite() && u.is_finite()) {
                return Err(Error::NonFinite("box bounds"));
            }
            if l > u {
                return Err(Error::InvalidParameter(format!("empty box side [{l}, {u}]")));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The cube `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lower.iter().zip(&self.upper).map(|(l, u)| 0.5 * (l + u)).collect()
    }

    /// One uniform point; consumes exactly `dim` uniforms.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.lower.iter().zip(&self.upper).map(|(&l, &u)| l + (u - l) * rng.random::<f64>()).collect()
    }
}

/// `N` particles in `R^d`, stored row-major, together with the generation
/// counter. This is the empirical measure of one generation.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    positions: Vec<f64>,
    n: usize,
    dim: usize,
    generation: u64,
}

impl Ensemble {
    pub fn from_flat(n: usize, dim: usize, positions: Vec<f64>) -> Result<Self> {
        if n == 0 || dim == 0 {
            return Err(Error::Empty("ensemble"));
        }
        check_dim(n * dim, positions.len())?;
        if positions.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("ensemble positions"));
        }
        Ok(Self { positions, n, dim, generation: 0 })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map(Vec::len).ok_or(Error::Empty("ensemble"))?;
        let mut flat = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            check_dim(dim, r.len())?;
            flat.extend_from_slice(r);
        }
        Self::from_flat(rows.len(), dim, flat)
    }

    /// `n` i.i.d. uniform samples from `domain`.
    pub fn uniform<R: Rng + ?Sized>(n: usize, domain: &Hyperrectangle, rng: &mut R) -> Result<Self> {
        let dim = domain.dim();
        let mut flat = Vec::with_capacity(n * dim);
        for _ in 0..n {
            flat.extend(domain.sample(rng));
        }
        Self::from_flat(n, dim, flat)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.positions[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.positions.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.positions
    }

    /// Coordinate `j` of every particle.
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    /// Componentwise mean `m[f]`.
    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        for r in self.rows() {
            for (acc, v) in m.iter_mut().zip(r) {
                *acc += v;
            }
        }
        let inv = 1.0 / self.n as f64;
        m.iter_mut().for_each(|v| *v *= inv);
        m
    }

    /// Adds `shift` to every row.
    pub fn translate(&mut self, shift: &[f64]) -> Result<()> {
        check_dim(self.dim, shift.len())?;
        for r in self.positions.chunks_exact_mut(self.dim) {
            for (v, s) in r.iter_mut().zip(shift) {
                *v += s;
            }
        }
        Ok(())
    }

    /// Next generation built from new positions; the counter advances by one.
    pub(crate) fn successor(&self, positions: Vec<f64>) -> Self {
        debug_assert_eq!(positions.len(), self.positions.len());
        Self { positions, n: self.n, dim: self.dim, generation: self.generation + 1 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn rejects_bad_shapes() {
        assert!(Ensemble::from_flat(0, 1, vec![]).is_err());
        assert!(Ensemble::from_flat(2, 2, vec![0.0; 3]).is_err());
        assert!(Ensemble::from_flat(1, 1, vec![f64::NAN]).is_err());
        assert!(Ensemble::from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn uniform_stays_in_box() {
        let b = Hyperrectangle::cube(3, -2.0, 2.0).unwrap();
        let e = Ensemble::uniform(500, &b, &mut rng_from_seed(1)).unwrap();
        assert!(e.as_flat().iter().all(|v| (-2.0..2.0).contains(v)));
        assert_eq!(e.generation(), 0);
    }

    #[test]
    fn mean_and_translate() {
        let mut e = Ensemble::from_rows(&[vec![0.0, 1.0], vec![2.0, 3.0]]).unwrap();
        assert_eq!(e.mean(), vec![1.0, 2.0]);
        e.translate(&[1.0, -1.0]).unwrap();
        assert_eq!(e.row(1), &[3.0, 2.0]);
        assert_eq!(e.column(0), vec![1.0, 3.0]);
    }
}
