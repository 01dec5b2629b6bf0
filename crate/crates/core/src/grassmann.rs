//! Super-exterior algebra over `dz, dz̄, e, e*` with ring-valued coefficients.
//!
//! Monomials are bitmasks over the canonical generator order
//! `dz_1..dz_n, dz̄_1..dz̄_n, e_1..e_m, e*_1..e*_m`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

const PRUNE: f64 = 1e-300;

/// Coefficient ring of a [`Multivector`]: plain complex numbers or jets.
pub trait Coeff: Clone + fmt::Debug + Send + Sync {
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn scale(&self, c: Complex64) -> Self;
    fn add_assign(&mut self, other: &Self);
    fn conj(&self) -> Self;
    /// Largest absolute coefficient; used for pruning and comparisons.
    fn magnitude(&self) -> f64;
    /// The constant `c` in the same ring (same basepoint and order for jets).
    fn constant_like(&self, c: Complex64) -> Self;
    fn exp(&self) -> Result<Self>;
    fn inv(&self) -> Result<Self>;
}

impl Coeff for Complex64 {
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn scale(&self, c: Complex64) -> Self {
        self * c
    }
    fn add_assign(&mut self, other: &Self) {
        *self += other;
    }
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn constant_like(&self, c: Complex64) -> Self {
        c
    }
    fn exp(&self) -> Result<Self> {
        Ok(Complex64::exp(*self))
    }
    fn inv(&self) -> Result<Self> {
        if *self == Complex64::new(0.0, 0.0) {
            return Err(Error::SingularJet);
        }
        Ok(1.0 / self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GeneratorSet {
    n: usize,
    m: usize,
}

impl GeneratorSet {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidArgument(format!(
                "generator set needs n >= 1 and m >= 1, got n={n}, m={m}"
            )));
        }
        if 2 * n + 2 * m > 64 {
            return Err(Error::Unsupported(format!(
                "{} generators exceed the 64-bit monomial encoding",
                2 * n + 2 * m
            )));
        }
        Ok(GeneratorSet { n, m })
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn m(&self) -> usize {
        self.m
    }
    pub fn count(&self) -> usize {
        2 * self.n + 2 * self.m
    }

    pub fn dz(&self, i: usize) -> u32 {
        debug_assert!(i < self.n);
        i as u32
    }
    pub fn dzb(&self, i: usize) -> u32 {
        debug_assert!(i < self.n);
        (self.n + i) as u32
    }
    pub fn e(&self, j: usize) -> u32 {
        debug_assert!(j < self.m);
        (2 * self.n + j) as u32
    }
    pub fn estar(&self, j: usize) -> u32 {
        debug_assert!(j < self.m);
        (2 * self.n + self.m + j) as u32
    }

    pub fn holo_mask(&self) -> u64 {
        low_bits(self.n)
    }
    pub fn antiholo_mask(&self) -> u64 {
        low_bits(self.n) << self.n
    }
    pub fn form_mask(&self) -> u64 {
        low_bits(2 * self.n)
    }
    pub fn e_mask(&self) -> u64 {
        low_bits(self.m) << (2 * self.n)
    }
    pub fn estar_mask(&self) -> u64 {
        low_bits(self.m) << (2 * self.n + self.m)
    }
    pub fn bundle_mask(&self) -> u64 {
        self.e_mask() | self.estar_mask()
    }

    /// Bidegree `(p, q)` of the form part of a monomial.
    pub fn bidegree(&self, mask: u64) -> (u32, u32) {
        (
            (mask & self.holo_mask()).count_ones(),
            (mask & self.antiholo_mask()).count_ones(),
        )
    }

    fn check(&self, other: &GeneratorSet) -> Result<()> {
        if self != other {
            return Err(Error::DimensionMismatch(self.n, self.m, other.n, other.m));
        }
        Ok(())
    }
}

fn low_bits(k: usize) -> u64 {
    if k >= 64 {
        u64::MAX
    } else {
        (1u64 << k) - 1
    }
}

/// True when `a ∧ b` needs an odd number of transpositions to reach canonical order.
#[inline]
pub(crate) fn reorder_odd(a: u64, b: u64) -> bool {
    let mut swaps = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        swaps += (a >> j >> 1).count_ones();
        rest &= rest - 1;
    }
    swaps & 1 == 1
}

/// Sign and mask of the ordered product of single generators, `None` if it vanishes.
pub(crate) fn ordered_word(word: &[u32]) -> Option<(u64, bool)> {
    let mut mask = 0u64;
    let mut odd = false;
    for &g in word {
        let bit = 1u64 << g;
        if mask & bit != 0 {
            return None;
        }
        odd ^= reorder_odd(mask, bit);
        mask |= bit;
    }
    Some((mask, odd))
}

#[derive(Clone, Debug)]
pub struct Multivector<C> {
    gens: GeneratorSet,
    terms: Vec<(u64, C)>,
}

impl<C: Coeff> Multivector<C> {
    pub fn zero(gens: GeneratorSet) -> Self {
        Multivector {
            gens,
            terms: Vec::new(),
        }
    }

    pub fn scalar(gens: GeneratorSet, c: C) -> Self {
        Self::monomial(gens, 0, c)
    }

    pub fn monomial(gens: GeneratorSet, mask: u64, c: C) -> Self {
        debug_assert!(gens.count() == 64 || mask >> gens.count() == 0);
        Self::from_terms(gens, vec![(mask, c)])
    }

    /// Single generator with index in canonical order.
    pub fn generator(gens: GeneratorSet, index: u32, c: C) -> Self {
        Self::monomial(gens, 1u64 << index, c)
    }

    /// Builds from unsorted terms; duplicate masks are summed in input order.
    pub fn from_terms(gens: GeneratorSet, mut terms: Vec<(u64, C)>) -> Self {
        terms.sort_by_key(|t| t.0);
        let mut merged: Vec<(u64, C)> = Vec::with_capacity(terms.len());
        for (mask, c) in terms {
            match merged.last_mut() {
                Some(last) if last.0 == mask => last.1.add_assign(&c),
                _ => merged.push((mask, c)),
            }
        }
        merged.retain(|t| t.1.magnitude() >= PRUNE);
        Multivector {
            gens,
            terms: merged,
        }
    }

    /// Product of generators in the given order, e.g. `[e_1, e*_1]`.
    pub fn word(gens: GeneratorSet, word: &[u32], c: C) -> Self {
        match ordered_word(word) {
            None => Self::zero(gens),
            Some((mask, odd)) => Self::monomial(gens, mask, if odd { c.neg() } else { c }),
        }
    }

    pub fn gens(&self) -> GeneratorSet {
        self.gens
    }

    pub fn terms(&self) -> &[(u64, C)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, mask: u64) -> Option<&C> {
        self.terms
            .binary_search_by_key(&mask, |t| t.0)
            .ok()
            .map(|i| &self.terms[i].1)
    }

    pub fn max_norm(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.1.magnitude())
            .fold(0.0, f64::max)
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.gens.check(&other.gens)?;
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() || j < other.terms.len() {
            let take_left = j >= other.terms.len()
                || (i < self.terms.len() && self.terms[i].0 < other.terms[j].0);
            let take_right = i >= self.terms.len()
                || (j < other.terms.len() && other.terms[j].0 < self.terms[i].0);
            if take_left {
                out.push(self.terms[i].clone());
                i += 1;
            } else if take_right {
                out.push(other.terms[j].clone());
                j += 1;
            } else {
                let c = self.terms[i].1.add(&other.terms[j].1);
                if c.magnitude() >= PRUNE {
                    out.push((self.terms[i].0, c));
                }
                i += 1;
                j += 1;
            }
        }
        Ok(Multivector {
            gens: self.gens,
            terms: out,
        })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&other.neg_all())
    }

    fn neg_all(&self) -> Self {
        self.map(|c| c.neg())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = self.map(|x| x.scale(c));
        out.terms.retain(|t| t.1.magnitude() >= PRUNE);
        out
    }

    /// Multiplies every coefficient by a ring element.
    pub fn mul_coeff(&self, c: &C) -> Self {
        let mut out = self.map(|x| x.mul(c));
        out.terms.retain(|t| t.1.magnitude() >= PRUNE);
        out
    }

    pub fn map<F: Fn(&C) -> C>(&self, f: F) -> Self {
        Multivector {
            gens: self.gens,
            terms: self.terms.iter().map(|(m, c)| (*m, f(c))).collect(),
        }
    }

    pub fn map_coeffs<D: Coeff, F: Fn(&C) -> D>(&self, f: F) -> Multivector<D> {
        Multivector::from_terms(
            self.gens,
            self.terms.iter().map(|(m, c)| (*m, f(c))).collect(),
        )
    }

    pub fn try_map_coeffs<D: Coeff, F: Fn(&C) -> Result<D>>(&self, f: F) -> Result<Multivector<D>> {
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| Ok((*m, f(c)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Multivector::from_terms(self.gens, terms))
    }

    /// Keeps the terms whose mask satisfies the predicate.
    pub fn filter<F: Fn(u64) -> bool>(&self, keep: F) -> Self {
        Multivector {
            gens: self.gens,
            terms: self.terms.iter().filter(|t| keep(t.0)).cloned().collect(),
        }
    }

    pub fn wedge(&self, other: &Self) -> Result<Self> {
        self.gens.check(&other.gens)?;
        Ok(self.wedge_same(other))
    }

    fn wedge_same(&self, other: &Self) -> Self {
        let mut out = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if ma & mb != 0 {
                    continue;
                }
                let c = ca.mul(cb);
                let c = if reorder_odd(*ma, *mb) { c.neg() } else { c };
                out.push((ma | mb, c));
            }
        }
        Self::from_terms(self.gens, out)
    }

    /// Exact exponential of an even element.
    pub fn exp_even(&self) -> Result<Self> {
        if let Some(t) = self.terms.iter().find(|t| t.0.count_ones() % 2 == 1) {
            return Err(Error::Parity(t.0.count_ones()));
        }
        let scalar = self.coefficient(0).cloned();
        let nil = self.filter(|m| m != 0);
        let one = match (&scalar, self.terms.first()) {
            (Some(c), _) => c.constant_like(Complex64::new(1.0, 0.0)),
            (None, Some(t)) => t.1.constant_like(Complex64::new(1.0, 0.0)),
            (None, None) => {
                return Err(Error::InvalidArgument(
                    "exp_even of an empty element needs a coefficient ring sample; use exp_even_with"
                        .into(),
                ))
            }
        };
        let mut sum = Self::scalar(self.gens, one.clone());
        let mut power = Self::scalar(self.gens, one);
        let mut k = 1.0;
        while !nil.is_empty() {
            power = power.wedge_same(&nil).scale(Complex64::new(1.0 / k, 0.0));
            if power.is_empty() {
                break;
            }
            sum = sum.try_add(&power)?;
            k += 1.0;
        }
        match scalar {
            Some(c) => Ok(sum.mul_coeff(&c.exp()?)),
            None => Ok(sum),
        }
    }

    /// Like [`exp_even`](Self::exp_even) but defined for the zero element too.
    pub fn exp_even_with(&self, one: &C) -> Result<Self> {
        if self.is_empty() {
            return Ok(Self::scalar(
                self.gens,
                one.constant_like(Complex64::new(1.0, 0.0)),
            ));
        }
        self.exp_even()
    }

    /// `∫_e`: the form `ω'` in `ω = ω' ∧ Ĩ_m + (lower e-degree)`.
    pub fn berezin_e(&self) -> Self {
        let full = self.gens.bundle_mask();
        let m = self.gens.m as u64;
        let flip = (m * (m - 1) / 2) % 2 == 1;
        let terms = self
            .terms
            .iter()
            .filter(|t| t.0 & full == full)
            .map(|(mask, c)| (mask & !full, if flip { c.neg() } else { c.clone() }))
            .collect();
        Multivector {
            gens: self.gens,
            terms,
        }
    }

    /// Part of dz-degree `p` and dz̄-degree `q`.
    pub fn degree_project(&self, p: u32, q: u32) -> Self {
        let g = self.gens;
        self.filter(|mask| g.bidegree(mask) == (p, q))
    }

    /// Bidegree `(k, k)` part.
    pub fn component(&self, k: u32) -> Self {
        self.degree_project(k, k)
    }

    /// Part with `deg` bundle generators in total.
    pub fn bundle_degree(&self, deg: u32) -> Self {
        let b = self.gens.bundle_mask();
        self.filter(|mask| (mask & b).count_ones() == deg)
    }

    /// Complex conjugation of a scalar-valued form (no bundle generators allowed).
    pub fn conj_form(&self) -> Result<Self> {
        let g = self.gens;
        let n = g.n;
        let mut out = Vec::with_capacity(self.terms.len());
        for (mask, c) in &self.terms {
            if mask & g.bundle_mask() != 0 {
                return Err(Error::InvalidArgument(
                    "conjugation is only defined for scalar forms".into(),
                ));
            }
            let word: Vec<u32> = (0..2 * n as u32)
                .filter(|&b| mask >> b & 1 == 1)
                .map(|b| if (b as usize) < n { b + n as u32 } else { b - n as u32 })
                .collect();
            let (m2, odd) = ordered_word(&word).expect("distinct generators");
            let cc = c.conj();
            out.push((m2, if odd { cc.neg() } else { cc }));
        }
        Ok(Self::from_terms(g, out))
    }

    /// Interior multiplication `δ_f` by a section `f` of E, acting on the `e*` generators.
    pub fn contract(&self, f: &[C]) -> Result<Self> {
        let g = self.gens;
        if f.len() != g.m {
            return Err(Error::InvalidArgument(format!(
                "contraction needs {} components, got {}",
                g.m,
                f.len()
            )));
        }
        let mut out = Vec::new();
        for (mask, c) in &self.terms {
            for (k, fk) in f.iter().enumerate() {
                let bit = 1u64 << g.estar(k);
                if mask & bit == 0 {
                    continue;
                }
                let before = (mask & (bit - 1)).count_ones();
                let v = c.mul(fk);
                out.push((mask & !bit, if before % 2 == 1 { v.neg() } else { v }));
            }
        }
        Ok(Self::from_terms(g, out))
    }

    /// Largest coefficient magnitude of `self - other`.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        Ok(self.try_sub(other)?.max_norm())
    }
}

impl<C: Coeff> Mul for &Multivector<C> {
    type Output = Multivector<C>;
    fn mul(self, rhs: Self) -> Multivector<C> {
        assert_eq!(self.gens, rhs.gens, "wedge of multivectors over different generators");
        self.wedge_same(rhs)
    }
}

impl<C: Coeff> Add for &Multivector<C> {
    type Output = Multivector<C>;
    fn add(self, rhs: Self) -> Multivector<C> {
        self.try_add(rhs)
            .expect("sum of multivectors over different generators")
    }
}

impl<C: Coeff> Sub for &Multivector<C> {
    type Output = Multivector<C>;
    fn sub(self, rhs: Self) -> Multivector<C> {
        self.try_sub(rhs)
            .expect("difference of multivectors over different generators")
    }
}

impl<C: Coeff> Neg for &Multivector<C> {
    type Output = Multivector<C>;
    fn neg(self) -> Multivector<C> {
        self.neg_all()
    }
}

impl Multivector<Complex64> {
    /// `Ĩ = Σ_j e_j ∧ e*_j`.
    pub fn identity_tilde(gens: GeneratorSet) -> Self {
        let one = Complex64::new(1.0, 0.0);
        
        (0..gens.m)
            .map(|j| Self::word(gens, &[gens.e(j), gens.estar(j)], one))
            .fold(Self::zero(gens), |acc, t| &acc + &t)
    }

    /// `Ã = Σ a_jk e_j ∧ e*_k` for a scalar matrix in row-major order.
    pub fn snake_matrix(gens: GeneratorSet, a: &[Complex64]) -> Self {
        let m = gens.m;
        assert_eq!(a.len(), m * m);
        let mut out = Vec::new();
        for j in 0..m {
            for k in 0..m {
                if let Some((mask, odd)) = ordered_word(&[gens.e(j), gens.estar(k)]) {
                    let c = a[j * m + k];
                    out.push((mask, if odd { -c } else { c }));
                }
            }
        }
        Self::from_terms(gens, out)
    }

    pub fn one(gens: GeneratorSet) -> Self {
        Self::scalar(gens, Complex64::new(1.0, 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn det(a: &[Complex64], m: usize) -> Complex64 {
        // permutation expansion
        let mut perm: Vec<usize> = (0..m).collect();
        let mut total = c(0.0, 0.0);
        permute(&mut perm, 0, &mut |p| {
            let mut inv = 0;
            for i in 0..m {
                for j in i + 1..m {
                    if p[i] > p[j] {
                        inv += 1;
                    }
                }
            }
            let mut prod = c(if inv % 2 == 0 { 1.0 } else { -1.0 }, 0.0);
            for (i, &pi) in p.iter().enumerate() {
                prod *= a[i * m + pi];
            }
            total += prod;
        });
        total
    }

    fn permute(p: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
        if k == p.len() {
            f(p);
            return;
        }
        for i in k..p.len() {
            p.swap(k, i);
            permute(p, k + 1, f);
            p.swap(k, i);
        }
    }

    #[test]
    fn odd_generator_squares_to_zero() {
        let g = GeneratorSet::new(2, 1).unwrap();
        let dz = Multivector::generator(g, g.dz(0), c(1.0, 0.0));
        assert!((&dz * &dz).is_empty());
    }

    #[test]
    fn e_and_estar_anticommute() {
        let g = GeneratorSet::new(1, 1).unwrap();
        let e = Multivector::generator(g, g.e(0), c(1.0, 0.0));
        let es = Multivector::generator(g, g.estar(0), c(1.0, 0.0));
        let lhs = &e * &es;
        let rhs = -&(&es * &e);
        assert_eq!(lhs.distance(&rhs).unwrap(), 0.0);
    }

    #[test]
    fn identity_power_is_top_monomial() {
        for m in 1..=4 {
            let g = GeneratorSet::new(1, m).unwrap();
            let i = Multivector::identity_tilde(g);
            let mut p = Multivector::one(g);
            let mut fact = 1.0;
            for k in 1..=m {
                p = &p * &i;
                fact *= k as f64;
            }
            let p = p.scale(c(1.0 / fact, 0.0));
            let word: Vec<u32> = (0..m).flat_map(|j| [g.e(j), g.estar(j)]).collect();
            let top = Multivector::word(g, &word, c(1.0, 0.0));
            assert!(p.distance(&top).unwrap() < 1e-15, "m={m}");
            assert!((top.berezin_e().coefficient(0).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn exp_of_identity_m2() {
        let g = GeneratorSet::new(1, 2).unwrap();
        let one = c(1.0, 0.0);
        let e = Multivector::identity_tilde(g).exp_even().unwrap();
        let expected = [
            Multivector::one(g),
            Multivector::word(g, &[g.e(0), g.estar(0)], one),
            Multivector::word(g, &[g.e(1), g.estar(1)], one),
            Multivector::word(g, &[g.e(0), g.estar(0), g.e(1), g.estar(1)], one),
        ]
        .iter()
        .fold(Multivector::zero(g), |a, b| &a + b);
        assert!(e.distance(&expected).unwrap() < 1e-15);
    }

    #[test]
    fn exp_rejects_odd_terms() {
        let g = GeneratorSet::new(1, 1).unwrap();
        let dz = Multivector::generator(g, g.dz(0), c(1.0, 0.0));
        assert_eq!(dz.exp_even().unwrap_err(), Error::Parity(1));
    }

    #[test]
    fn mismatched_generators_error() {
        let a = Multivector::one(GeneratorSet::new(1, 1).unwrap());
        let b = Multivector::one(GeneratorSet::new(2, 1).unwrap());
        assert!(matches!(a.wedge(&b), Err(Error::DimensionMismatch(..))));
    }

    #[test]
    fn berezin_of_snake_is_determinant() {
        let mut state = 7u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        for m in 1..=4 {
            let g = GeneratorSet::new(1, m).unwrap();
            let a: Vec<Complex64> = (0..m * m).map(|_| c(next(), next())).collect();
            let at = Multivector::snake_matrix(g, &a);
            let mut pw = Multivector::one(g);
            for k in 1..=m {
                pw = (&pw * &at).scale(c(1.0 / k as f64, 0.0));
            }
            let d = pw.berezin_e().coefficient(0).copied().unwrap_or_default();
            assert!((d - det(&a, m)).norm() < 1e-12, "det m={m}");

            let mut api = a.clone();
            for j in 0..m {
                api[j * m + j] += 1.0;
            }
            let e = (&at + &Multivector::identity_tilde(g)).exp_even().unwrap();
            let d = e.berezin_e().coefficient(0).copied().unwrap();
            assert!((d - det(&api, m)).norm() < 1e-12, "det(A+I) m={m}");
        }
    }

    #[test]
    fn degree_projection() {
        let g = GeneratorSet::new(1, 1).unwrap();
        let one = c(1.0, 0.0);
        let w = Multivector::word(g, &[g.dz(0), g.dzb(0)], one);
        assert!(w.degree_project(1, 1).distance(&w).unwrap() == 0.0);
        assert!(w.degree_project(2, 0).is_empty());
        let s = &Multivector::one(g) + &w;
        assert!(s.degree_project(0, 0).distance(&Multivector::one(g)).unwrap() == 0.0);
    }

    #[test]
    fn conj_swaps_types() {
        let g = GeneratorSet::new(2, 1).unwrap();
        let w = Multivector::word(g, &[g.dz(0), g.dzb(1)], c(0.0, 2.0));
        let cw = w.conj_form().unwrap();
        let expected = Multivector::word(g, &[g.dzb(0), g.dz(1)], c(0.0, -2.0));
        assert!(cw.distance(&expected).unwrap() < 1e-15);
    }

    #[test]
    fn contraction_is_antiderivation() {
        let g = GeneratorSet::new(1, 2).unwrap();
        let one = c(1.0, 0.0);
        let f = [c(2.0, 0.0), c(0.0, 3.0)];
        let s1 = Multivector::word(g, &[g.dzb(0), g.estar(0)], one);
        let s2 = Multivector::generator(g, g.estar(1), one);
        let lhs = (&s1 * &s2).contract(&f).unwrap();
        let rhs = &(&s1.contract(&f).unwrap() * &s2) + &(&s1 * &s2.contract(&f).unwrap());
        assert!(lhs.distance(&rhs).unwrap() < 1e-14);
    }

    fn arb_mv(g: GeneratorSet, odd: bool) -> impl Strategy<Value = Multivector<Complex64>> {
        let count = g.count();
        prop::collection::vec((0u64..(1u64 << count), -1.0f64..1.0, -1.0f64..1.0), 1..6).prop_map(
            move |ts| {
                let terms = ts
                    .into_iter()
                    .filter(|t| (t.0.count_ones() % 2 == 1) == odd)
                    .map(|(m, re, im)| (m, Complex64::new(re, im)))
                    .collect();
                Multivector::from_terms(g, terms)
            },
        )
    }

    proptest! {
        #[test]
        fn graded_commutativity(a in arb_mv(GeneratorSet::new(2, 1).unwrap(), true),
                                b in arb_mv(GeneratorSet::new(2, 1).unwrap(), true)) {
            let ab = &a * &b;
            let ba = &b * &a;
            prop_assert!((&ab + &ba).max_norm() < 1e-14);
        }

        #[test]
        fn exp_inverse(a in arb_mv(GeneratorSet::new(1, 2).unwrap(), false)) {
            let a = a.filter(|m| m != 0);
            let g = a.gens();
            let one = Complex64::new(1.0, 0.0);
            let p = &a.exp_even_with(&one).unwrap() * &(-&a).exp_even_with(&one).unwrap();
            prop_assert!(p.distance(&Multivector::one(g)).unwrap() < 1e-12);
        }

        #[test]
        fn associativity_and_linearity(a in arb_mv(GeneratorSet::new(1, 2).unwrap(), false),
                                       b in arb_mv(GeneratorSet::new(1, 2).unwrap(), true),
                                       c2 in arb_mv(GeneratorSet::new(1, 2).unwrap(), true)) {
            let l = &(&a * &b) * &c2;
            let r = &a * &(&b * &c2);
            prop_assert!(l.distance(&r).unwrap() < 1e-13);
            let s = Complex64::new(0.3, -1.2);
            let lin = (&a.scale(s) + &b).berezin_e();
            let sep = &a.berezin_e().scale(s) + &b.berezin_e();
            prop_assert!(lin.distance(&sep).unwrap() < 1e-14);
            let dist = &(&a + &b) * &c2;
            let dist2 = &(&a * &c2) + &(&b * &c2);
            prop_assert!(dist.distance(&dist2).unwrap() < 1e-13);
        }
    }
}
