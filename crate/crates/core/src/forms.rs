//! Matrices and columns of forms, and the snake map into Λ.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grassmann::{Coeff, GeneratorSet, Multivector};

/// Square matrix of forms, row-major; entry `(j, k)` is the `e_j ⊗ e*_k` component.
#[derive(Clone, Debug)]
pub struct FormMatrix<C> {
    m: usize,
    entries: Vec<Multivector<C>>,
}

impl<C: Coeff> FormMatrix<C> {
    pub fn from_entries(m: usize, entries: Vec<Multivector<C>>) -> Result<Self> {
        if entries.len() != m * m {
            return Err(Error::InvalidArgument(format!(
                "{m}x{m} form matrix needs {} entries, got {}",
                m * m,
                entries.len()
            )));
        }
        Ok(FormMatrix { m, entries })
    }

    pub fn zeros(gens: GeneratorSet, m: usize) -> Self {
        FormMatrix {
            m,
            entries: vec![Multivector::zero(gens); m * m],
        }
    }

    pub fn identity(gens: GeneratorSet, m: usize, one: &C) -> Self {
        let mut out = Self::zeros(gens, m);
        for j in 0..m {
            out.entries[j * m + j] = Multivector::scalar(gens, one.clone());
        }
        out
    }

    pub fn rank(&self) -> usize {
        self.m
    }

    pub fn get(&self, j: usize, k: usize) -> &Multivector<C> {
        &self.entries[j * self.m + k]
    }

    pub fn entries(&self) -> &[Multivector<C>] {
        &self.entries
    }

    pub fn map<F: Fn(&Multivector<C>) -> Result<Multivector<C>>>(&self, f: F) -> Result<Self> {
        Ok(FormMatrix {
            m: self.m,
            entries: self.entries.iter().map(f).collect::<Result<_>>()?,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Ok(FormMatrix {
            m: self.m,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a.try_add(b))
                .collect::<Result<_>>()?,
        })
    }

    pub fn scale(&self, c: Complex64) -> Self {
        FormMatrix {
            m: self.m,
            entries: self.entries.iter().map(|e| e.scale(c)).collect(),
        }
    }

    /// Matrix product with entries multiplied by the wedge product.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        let m = self.m;
        let gens = self.entries[0].gens();
        let mut entries = Vec::with_capacity(m * m);
        for j in 0..m {
            for k in 0..m {
                let mut acc = Multivector::zero(gens);
                for l in 0..m {
                    acc = acc.try_add(&self.get(j, l).wedge(other.get(l, k))?)?;
                }
                entries.push(acc);
            }
        }
        Ok(FormMatrix { m, entries })
    }

    /// Determinant by cofactor expansion; entries must be even so they commute.
    pub fn det_even(&self) -> Result<Multivector<C>> {
        if let Some(t) = self
            .entries
            .iter()
            .flat_map(|e| e.terms())
            .find(|t| t.0.count_ones() % 2 == 1)
        {
            return Err(Error::Parity(t.0.count_ones()));
        }
        let cols: Vec<usize> = (0..self.m).collect();
        self.minor(0, &cols)
    }

    fn minor(&self, row: usize, cols: &[usize]) -> Result<Multivector<C>> {
        if cols.len() == 1 {
            return Ok(self.get(row, cols[0]).clone());
        }
        let gens = self.entries[0].gens();
        let mut acc = Multivector::zero(gens);
        for (idx, &c) in cols.iter().enumerate() {
            let entry = self.get(row, c);
            if entry.is_empty() {
                continue;
            }
            let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
            let term = entry.wedge(&self.minor(row + 1, &rest)?)?;
            acc = if idx % 2 == 0 {
                acc.try_add(&term)?
            } else {
                acc.try_sub(&term)?
            };
        }
        Ok(acc)
    }

    /// `ã = Σ a_jk ∧ e_j ∧ e*_k`.
    pub fn snake(&self) -> Result<Multivector<C>> {
        let gens = self.entries[0].gens();
        let mut terms = Vec::new();
        for j in 0..self.m {
            for k in 0..self.m {
                let bits = (1u64 << gens.e(j)) | (1u64 << gens.estar(k));
                for (mask, c) in self.get(j, k).terms() {
                    if mask & gens.bundle_mask() != 0 {
                        return Err(Error::InvalidArgument(
                            "snake needs scalar-form entries".into(),
                        ));
                    }
                    terms.push((mask | bits, c.clone()));
                }
            }
        }
        Ok(Multivector::from_terms(gens, terms))
    }

    /// Inverse of [`snake`](Self::snake); fails on terms that are not of the form `F ∧ e_j ∧ e*_k`.
    pub fn unsnake(a: &Multivector<C>) -> Result<Self> {
        let gens = a.gens();
        let m = gens.m();
        let mut buckets: Vec<Vec<(u64, C)>> = vec![Vec::new(); m * m];
        for (mask, c) in a.terms() {
            let e = mask & gens.e_mask();
            let s = mask & gens.estar_mask();
            if e.count_ones() != 1 || s.count_ones() != 1 {
                return Err(Error::InvalidArgument(
                    "element is not the snake of an endomorphism".into(),
                ));
            }
            let j = e.trailing_zeros() as usize - 2 * gens.n();
            let k = s.trailing_zeros() as usize - 2 * gens.n() - m;
            buckets[j * m + k].push((mask & gens.form_mask(), c.clone()));
        }
        Ok(FormMatrix {
            m,
            entries: buckets
                .into_iter()
                .map(|t| Multivector::from_terms(gens, t))
                .collect(),
        })
    }
}

/// `ξ̃ = Σ ξ_j ∧ e_j` for a column of scalar forms.
pub fn snake_column<C: Coeff>(gens: GeneratorSet, col: &[Multivector<C>]) -> Multivector<C> {
    let mut terms = Vec::new();
    for (j, x) in col.iter().enumerate() {
        for (mask, c) in x.terms() {
            terms.push((mask | 1u64 << gens.e(j), c.clone()));
        }
    }
    Multivector::from_terms(gens, terms)
}

/// `η̃ = Σ η_k ∧ e*_k` for a row of scalar forms.
pub fn snake_row<C: Coeff>(gens: GeneratorSet, row: &[Multivector<C>]) -> Multivector<C> {
    let mut terms = Vec::new();
    for (k, x) in row.iter().enumerate() {
        for (mask, c) in x.terms() {
            terms.push((mask | 1u64 << gens.estar(k), c.clone()));
        }
    }
    Multivector::from_terms(gens, terms)
}

/// Inverse of a square matrix of scalars in a coefficient ring, by Gauss-Jordan elimination
/// with pivots taken from `pivot_inv`.
pub fn invert_matrix<C: Coeff>(
    a: &[C],
    m: usize,
    pivot_inv: impl Fn(&C) -> Result<C>,
) -> Result<Vec<C>> {
    let mut w = a.to_vec();
    let one = a[0].constant_like(Complex64::new(1.0, 0.0));
    let zero = a[0].constant_like(Complex64::new(0.0, 0.0));
    let mut inv: Vec<C> = (0..m * m)
        .map(|i| if i / m == i % m { one.clone() } else { zero.clone() })
        .collect();
    for col in 0..m {
        let p = pivot_inv(&w[col * m + col])?;
        for k in 0..m {
            w[col * m + k] = w[col * m + k].mul(&p);
            inv[col * m + k] = inv[col * m + k].mul(&p);
        }
        for row in 0..m {
            if row == col {
                continue;
            }
            let factor = w[row * m + col].clone();
            if factor.magnitude() == 0.0 {
                continue;
            }
            for k in 0..m {
                let t = factor.mul(&w[col * m + k]);
                w[row * m + k] = w[row * m + k].sub(&t);
                let t = factor.mul(&inv[col * m + k]);
                inv[row * m + k] = inv[row * m + k].sub(&t);
            }
        }
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn snake_roundtrip_and_det() {
        let g = GeneratorSet::new(2, 3).unwrap();
        let one = c(1.0, 0.0);
        let vals = [
            c(1.0, 0.5),
            c(-0.2, 0.0),
            c(0.3, 0.1),
            c(0.0, 1.0),
            c(2.0, 0.0),
            c(0.4, -0.4),
            c(0.7, 0.0),
            c(0.1, 0.1),
            c(-1.0, 0.2),
        ];
        let entries = vals
            .iter()
            .map(|&v| Multivector::scalar(g, v))
            .collect::<Vec<_>>();
        let a = FormMatrix::from_entries(3, entries).unwrap();
        let back = FormMatrix::unsnake(&a.snake().unwrap()).unwrap();
        for (x, y) in a.entries().iter().zip(back.entries()) {
            assert!(x.distance(y).unwrap() < 1e-15);
        }
        let det = a.det_even().unwrap();
        let direct = Multivector::snake_matrix(g, &vals);
        let mut p = Multivector::one(g);
        for k in 1..=3 {
            p = (&p * &direct).scale(c(1.0 / k as f64, 0.0));
        }
        let via_berezin = p.berezin_e();
        assert!(det.distance(&via_berezin).unwrap() < 1e-13);
        let _ = one;
    }

    #[test]
    fn inverse_of_scalar_matrix() {
        let a = vec![c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(3.0, 0.0)];
        let inv = invert_matrix(&a, 2, |x| Ok(1.0 / x)).unwrap();
        let prod = [
            a[0] * inv[0] + a[1] * inv[2],
            a[0] * inv[1] + a[1] * inv[3],
            a[2] * inv[0] + a[3] * inv[2],
            a[2] * inv[1] + a[3] * inv[3],
        ];
        assert!((prod[0] - 1.0).norm() < 1e-15 && prod[1].norm() < 1e-15);
        assert!(prod[2].norm() < 1e-15 && (prod[3] - 1.0).norm() < 1e-15);
    }
}
