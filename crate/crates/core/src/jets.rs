//! Truncated power series in `(z - p, z̄ - p̄)` with `z` and `z̄` independent,
//! and the operators ∂, ∂̄ on jet-valued forms.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grassmann::{reorder_odd, Coeff, GeneratorSet, Multivector};

/// `ℵ = i / 2π`.
pub const ALEPH: Complex64 = Complex64::new(0.0, 1.0 / (2.0 * std::f64::consts::PI));

/// Monomial tables shared by all jets with the same variable count and order.
#[derive(Debug)]
struct Shape {
    nvars: usize,
    order: usize,
    exps: Vec<Vec<u8>>,
    /// `count_upto[k]` = number of monomials of degree ≤ k.
    count_upto: Vec<usize>,
    /// `(i, j, k)` with `x^i x^j = x^k`, sorted by degree of `k`.
    mul: Vec<(u16, u16, u16)>,
    mul_upto: Vec<usize>,
    /// Per variable: `(src, dst, factor)` for ∂/∂x_v, sorted by `src`.
    deriv: Vec<Vec<(u16, u16, f64)>>,
    deriv_upto: Vec<Vec<usize>>,
    conj: Vec<u16>,
}

impl Shape {
    fn build(n: usize, order: usize) -> Shape {
        let nvars = 2 * n;
        let mut exps: Vec<Vec<u8>> = Vec::new();
        let mut count_upto = Vec::with_capacity(order + 1);
        for deg in 0..=order {
            let mut layer = Vec::new();
            let mut cur = vec![0u8; nvars];
            compositions(deg, 0, &mut cur, &mut layer);
            layer.sort_by(|a, b| b.cmp(a));
            exps.extend(layer);
            count_upto.push(exps.len());
        }
        let index: HashMap<Vec<u8>, usize> =
            exps.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        let degree = |e: &[u8]| e.iter().map(|&x| x as usize).sum::<usize>();

        let mut mul = Vec::new();
        for (i, a) in exps.iter().enumerate() {
            for (j, b) in exps.iter().enumerate() {
                if degree(a) + degree(b) > order {
                    continue;
                }
                let sum: Vec<u8> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                mul.push((i as u16, j as u16, index[&sum] as u16));
            }
        }
        mul.sort_by_key(|&(i, j, k)| (degree(&exps[k as usize]), k, i, j));
        let mul_upto = (0..=order)
            .map(|o| {
                mul.iter()
                    .take_while(|t| degree(&exps[t.2 as usize]) <= o)
                    .count()
            })
            .collect();

        let mut deriv = Vec::with_capacity(nvars);
        let mut deriv_upto = Vec::with_capacity(nvars);
        for v in 0..nvars {
            let mut table = Vec::new();
            for (src, e) in exps.iter().enumerate() {
                if e[v] > 0 {
                    let mut d = e.clone();
                    d[v] -= 1;
                    table.push((src as u16, index[&d] as u16, e[v] as f64));
                }
            }
            let upto = (0..=order)
                .map(|o| table.iter().filter(|t| (t.0 as usize) < count_upto[o]).count())
                .collect();
            deriv.push(table);
            deriv_upto.push(upto);
        }

        let conj = exps
            .iter()
            .map(|e| {
                let mut s = e[n..].to_vec();
                s.extend_from_slice(&e[..n]);
                index[&s] as u16
            })
            .collect();

        Shape {
            nvars,
            order,
            exps,
            count_upto,
            mul,
            mul_upto,
            deriv,
            deriv_upto,
            conj,
        }
    }
}

fn compositions(deg: usize, pos: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    if pos == cur.len() - 1 {
        cur[pos] = deg as u8;
        out.push(cur.clone());
        return;
    }
    for k in 0..=deg {
        cur[pos] = k as u8;
        compositions(deg - k, pos + 1, cur, out);
    }
    cur[pos] = 0;
}

fn shape(n: usize, order: usize) -> Arc<Shape> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<Shape>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().expect("jet shape cache poisoned");
    map.entry((n, order))
        .or_insert_with(|| Arc::new(Shape::build(n, order)))
        .clone()
}

/// Expansion point and truncation order shared by a family of jets.
#[derive(Debug)]
pub struct JetSpace {
    shape: Arc<Shape>,
    basepoint: Vec<Complex64>,
}

impl JetSpace {
    pub fn new(basepoint: &[Complex64], order: usize) -> Result<Arc<JetSpace>> {
        if basepoint.is_empty() {
            return Err(Error::InvalidArgument("jet space needs n >= 1".into()));
        }
        if order > 12 {
            return Err(Error::Unsupported(format!("jet order {order} is too large")));
        }
        Ok(Arc::new(JetSpace {
            shape: shape(basepoint.len(), order),
            basepoint: basepoint.to_vec(),
        }))
    }

    pub fn dim(&self) -> usize {
        self.basepoint.len()
    }
    pub fn order(&self) -> usize {
        self.shape.order
    }
    pub fn basepoint(&self) -> &[Complex64] {
        &self.basepoint
    }

    pub fn constant(self: &Arc<Self>, c: Complex64) -> Jet {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); self.shape.exps.len()];
        coeffs[0] = c;
        Jet {
            space: self.clone(),
            order: self.shape.order as u8,
            coeffs,
        }
    }

    /// The coordinate function `z_i`.
    pub fn z(self: &Arc<Self>, i: usize) -> Jet {
        self.linear(i, self.basepoint[i])
    }

    /// The coordinate function `z̄_i`.
    pub fn zbar(self: &Arc<Self>, i: usize) -> Jet {
        self.linear(self.dim() + i, self.basepoint[i].conj())
    }

    fn linear(self: &Arc<Self>, var: usize, value: Complex64) -> Jet {
        let mut j = self.constant(value);
        if self.shape.order >= 1 {
            let mut e = vec![0u8; self.shape.nvars];
            e[var] = 1;
            let idx = self.shape.exps[1..self.shape.count_upto[1]]
                .iter()
                .position(|x| *x == e)
                .expect("linear monomial")
                + 1;
            j.coeffs[idx] = Complex64::new(1.0, 0.0);
        }
        j
    }
}

#[derive(Clone)]
pub struct Jet {
    space: Arc<JetSpace>,
    order: u8,
    coeffs: Vec<Complex64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Jet(order {}, value {})", self.order, self.coeffs[0])
    }
}

impl Jet {
    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    /// Usable order: derivatives consume one order each.
    pub fn order(&self) -> usize {
        self.order as usize
    }

    pub fn value(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// Coefficient of `(z-p)^α (z̄-p̄)^β`; zero beyond the usable order.
    pub fn coeff(&self, alpha: &[u8], beta: &[u8]) -> Complex64 {
        let mut e = alpha.to_vec();
        e.extend_from_slice(beta);
        self.space.shape.exps[..self.coeffs.len()]
            .iter()
            .position(|x| *x == e)
            .map(|i| self.coeffs[i])
            .unwrap_or_default()
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    fn aligned(&self, other: &Jet) -> usize {
        assert!(
            Arc::ptr_eq(&self.space, &other.space),
            "jets from different jet spaces"
        );
        self.order.min(other.order) as usize
    }

    pub fn truncate(&self, order: usize) -> Jet {
        let order = order.min(self.order as usize);
        Jet {
            space: self.space.clone(),
            order: order as u8,
            coeffs: self.coeffs[..self.space.shape.count_upto[order]].to_vec(),
        }
    }

    /// `Σ c_k (self - self(p))^k` for scalar Taylor coefficients `c_k`.
    pub fn compose(&self, series: &[Complex64]) -> Jet {
        let mut h = self.clone();
        h.coeffs[0] = Complex64::new(0.0, 0.0);
        let top = (self.order as usize).min(series.len() - 1);
        let mut acc = self.space.constant(series[top]).truncate(self.order as usize);
        for k in (0..top).rev() {
            acc = acc.mul(&h);
            acc.coeffs[0] += series[k];
        }
        acc
    }

    pub fn inv(&self) -> Result<Jet> {
        let a0 = self.nonzero_value()?;
        let r = 1.0 / a0;
        let mut series = Vec::with_capacity(self.order as usize + 1);
        let mut t = r;
        for _ in 0..=self.order {
            series.push(t);
            t *= -r;
        }
        Ok(self.compose(&series))
    }

    pub fn log(&self) -> Result<Jet> {
        let a0 = self.nonzero_value()?;
        let r = 1.0 / a0;
        let mut series = vec![a0.ln()];
        let mut t = r;
        for k in 1..=self.order as usize {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            series.push(t * (sign / k as f64));
            t *= r;
        }
        Ok(self.compose(&series))
    }

    pub fn exp_jet(&self) -> Jet {
        let e0 = self.coeffs[0].exp();
        let mut series = Vec::with_capacity(self.order as usize + 1);
        let mut t = e0;
        for k in 0..=self.order as usize {
            series.push(t);
            t /= (k + 1) as f64;
        }
        self.compose(&series)
    }

    /// `self^μ` through the principal branch at the basepoint.
    pub fn powc(&self, mu: Complex64) -> Result<Jet> {
        let a0 = self.nonzero_value()?;
        let mut series = Vec::with_capacity(self.order as usize + 1);
        let mut binom = Complex64::new(1.0, 0.0);
        for k in 0..=self.order as usize {
            series.push(binom * a0.powc(mu - k as f64));
            binom *= (mu - k as f64) / (k + 1) as f64;
        }
        Ok(self.compose(&series))
    }

    pub fn powf(&self, mu: f64) -> Result<Jet> {
        self.powc(Complex64::new(mu, 0.0))
    }

    pub fn powi(&self, k: u32) -> Jet {
        let mut out = self.space.constant(Complex64::new(1.0, 0.0)).truncate(self.order as usize);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    pub fn sqrt(&self) -> Result<Jet> {
        self.powf(0.5)
    }

    fn nonzero_value(&self) -> Result<Complex64> {
        let a0 = self.coeffs[0];
        if a0.norm() == 0.0 || !a0.is_finite() {
            return Err(Error::SingularJet);
        }
        Ok(a0)
    }

    /// ∂/∂z_i (`bar = false`) or ∂/∂z̄_i (`bar = true`).
    pub fn partial(&self, i: usize, bar: bool) -> Result<Jet> {
        if self.order == 0 {
            return Err(Error::InsufficientOrder);
        }
        let v = if bar { self.space.dim() + i } else { i };
        let shape = &self.space.shape;
        let order = self.order as usize - 1;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); shape.count_upto[order]];
        for &(src, dst, factor) in &shape.deriv[v][..shape.deriv_upto[v][self.order as usize]] {
            coeffs[dst as usize] += self.coeffs[src as usize] * factor;
        }
        Ok(Jet {
            space: self.space.clone(),
            order: order as u8,
            coeffs,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.norm() == 0.0)
    }
}

impl Coeff for Jet {
    fn add(&self, other: &Self) -> Self {
        let o = self.aligned(other);
        let len = self.space.shape.count_upto[o];
        Jet {
            space: self.space.clone(),
            order: o as u8,
            coeffs: (0..len).map(|i| self.coeffs[i] + other.coeffs[i]).collect(),
        }
    }

    fn sub(&self, other: &Self) -> Self {
        let o = self.aligned(other);
        let len = self.space.shape.count_upto[o];
        Jet {
            space: self.space.clone(),
            order: o as u8,
            coeffs: (0..len).map(|i| self.coeffs[i] - other.coeffs[i]).collect(),
        }
    }

    fn mul(&self, other: &Self) -> Self {
        let o = self.aligned(other);
        let shape = &self.space.shape;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); shape.count_upto[o]];
        for &(i, j, k) in &shape.mul[..shape.mul_upto[o]] {
            coeffs[k as usize] += self.coeffs[i as usize] * other.coeffs[j as usize];
        }
        Jet {
            space: self.space.clone(),
            order: o as u8,
            coeffs,
        }
    }

    fn neg(&self) -> Self {
        Jet {
            space: self.space.clone(),
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    fn scale(&self, c: Complex64) -> Self {
        Jet {
            space: self.space.clone(),
            order: self.order,
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
        }
    }

    fn add_assign(&mut self, other: &Self) {
        let o = self.aligned(other);
        if o < self.order as usize {
            self.coeffs.truncate(self.space.shape.count_upto[o]);
            self.order = o as u8;
        }
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
    }

    fn conj(&self) -> Self {
        let perm = &self.space.shape.conj;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); self.coeffs.len()];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[perm[i] as usize] = c.conj();
        }
        Jet {
            space: self.space.clone(),
            order: self.order,
            coeffs,
        }
    }

    fn magnitude(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    fn constant_like(&self, c: Complex64) -> Self {
        self.space.constant(c).truncate(self.order as usize)
    }

    fn exp(&self) -> Result<Self> {
        Ok(self.exp_jet())
    }

    fn inv(&self) -> Result<Self> {
        Jet::inv(self)
    }
}

/// A multivector with jet coefficients.
pub type FormField = Multivector<Jet>;

fn apply_partial(a: &FormField, bar: bool) -> Result<FormField> {
    let g = a.gens();
    let n = g.n();
    let mut out = Vec::new();
    for (mask, c) in a.terms() {
        for i in 0..n {
            let bit = 1u64 << if bar { g.dzb(i) } else { g.dz(i) };
            let dc = c.partial(i, bar)?;
            if mask & bit != 0 || dc.is_zero() {
                continue;
            }
            let dc = if reorder_odd(bit, *mask) { dc.neg() } else { dc };
            out.push((mask | bit, dc));
        }
    }
    Ok(FormField::from_terms(g, out))
}

/// ∂, differentiating coefficients and wedging `dz_i` on the left.
pub fn del(a: &FormField) -> Result<FormField> {
    apply_partial(a, false)
}

/// ∂̄, differentiating coefficients and wedging `dz̄_i` on the left.
pub fn delbar(a: &FormField) -> Result<FormField> {
    apply_partial(a, true)
}

pub fn d(a: &FormField) -> Result<FormField> {
    Ok(&del(a)? + &delbar(a)?)
}

/// `dd^c = 2ℵ∂∂̄`.
pub fn ddc(a: &FormField) -> Result<FormField> {
    Ok(del(&delbar(a)?)?.scale(ALEPH * 2.0))
}

pub fn scalar_form(gens: GeneratorSet, c: Jet) -> FormField {
    FormField::scalar(gens, c)
}

/// Evaluates every coefficient at the basepoint.
pub fn values(a: &FormField) -> Multivector<Complex64> {
    a.map_coeffs(|c| c.value())
}

/// Largest jet coefficient of `a - b`, relative to `max(1, |a|, |b|)`.
pub fn relative_defect(a: &FormField, b: &FormField) -> Result<f64> {
    let scale = 1f64.max(a.max_norm()).max(b.max_norm());
    Ok(a.distance(b)? / scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn inverse_of_one_plus_z() {
        let s = JetSpace::new(&[c(0.0, 0.0)], 2).unwrap();
        let one = s.constant(c(1.0, 0.0));
        let inv = one.add(&s.z(0)).inv().unwrap();
        assert_eq!(inv.coeff(&[0], &[0]), c(1.0, 0.0));
        assert_eq!(inv.coeff(&[1], &[0]), c(-1.0, 0.0));
        assert_eq!(inv.coeff(&[2], &[0]), c(1.0, 0.0));
    }

    #[test]
    fn log_of_one_vanishes() {
        let s = JetSpace::new(&[c(0.3, 0.1)], 4).unwrap();
        assert!(s.constant(c(1.0, 0.0)).log().unwrap().is_zero());
        assert_eq!(s.constant(c(0.0, 0.0)).log().unwrap_err(), Error::SingularJet);
    }

    #[test]
    fn z_times_zbar() {
        let s = JetSpace::new(&[c(0.0, 0.0)], 3).unwrap();
        let p = s.z(0).mul(&s.zbar(0));
        assert_eq!(p.coeff(&[1], &[1]), c(1.0, 0.0));
        assert_eq!(p.value(), c(0.0, 0.0));
    }

    #[test]
    fn series_functions_agree_with_pointwise_values() {
        let p = [c(0.4, -0.2), c(0.1, 0.5)];
        let s = JetSpace::new(&p, 4).unwrap();
        let x = s.z(0).mul(&s.zbar(1)).add(&s.constant(c(1.5, 0.2)));
        let v = p[0] * p[1].conj() + c(1.5, 0.2);
        assert!((x.log().unwrap().value() - v.ln()).norm() < 1e-15);
        assert!((x.powf(0.3).unwrap().value() - v.powf(0.3)).norm() < 1e-15);
        let e = x.log().unwrap().exp_jet();
        assert!(e.sub(&x).magnitude() < 1e-13);
        let sq = x.sqrt().unwrap();
        assert!(sq.mul(&sq).sub(&x).magnitude() < 1e-13);
        assert!(x.inv().unwrap().mul(&x).sub(&s.constant(c(1.0, 0.0))).magnitude() < 1e-13);
    }

    #[test]
    fn partials_reduce_order() {
        let s = JetSpace::new(&[c(0.5, 0.0)], 1).unwrap();
        let z = s.z(0);
        let dz = z.partial(0, false).unwrap();
        assert_eq!(dz.order(), 0);
        assert_eq!(dz.value(), c(1.0, 0.0));
        assert_eq!(dz.partial(0, false).unwrap_err(), Error::InsufficientOrder);
    }

    #[test]
    fn del_of_z_zbar() {
        let s = JetSpace::new(&[c(0.7, 0.2)], 3).unwrap();
        let g = GeneratorSet::new(1, 1).unwrap();
        let f = scalar_form(g, s.z(0).mul(&s.zbar(0)));
        let lhs = del(&f).unwrap();
        let rhs = FormField::generator(g, g.dz(0), s.zbar(0).truncate(2));
        assert!(lhs.distance(&rhs).unwrap() < 1e-15);
    }

    #[test]
    fn log_abs_z_is_pluriharmonic_in_one_variable() {
        let s = JetSpace::new(&[c(1.0, 0.0)], 3).unwrap();
        let g = GeneratorSet::new(1, 1).unwrap();
        let f = scalar_form(g, s.z(0).mul(&s.zbar(0)).log().unwrap());
        assert!(ddc(&f).unwrap().max_norm() < 1e-14);
    }

    #[test]
    fn fubini_study_potential() {
        let s = JetSpace::new(&[c(0.0, 0.0)], 3).unwrap();
        let g = GeneratorSet::new(1, 1).unwrap();
        let one = s.constant(c(1.0, 0.0));
        let pot = one.add(&s.z(0).mul(&s.zbar(0))).log().unwrap();
        let w = del(&delbar(&scalar_form(g, pot)).unwrap()).unwrap().scale(ALEPH);
        let v = values(&w);
        let expected = Multivector::word(g, &[g.dz(0), g.dzb(0)], ALEPH);
        assert!(v.distance(&expected).unwrap() < 1e-15);
    }

    #[test]
    fn nilpotency_and_anticommutation() {
        let p = [c(0.2, 0.1), c(-0.3, 0.4)];
        let s = JetSpace::new(&p, 4).unwrap();
        let g = GeneratorSet::new(2, 1).unwrap();
        let one = s.constant(c(1.0, 0.0));
        let h = one
            .add(&s.z(0).mul(&s.zbar(1)).scale(c(0.3, 0.2)))
            .add(&s.z(1).mul(&s.zbar(0)).mul(&s.z(0)))
            .log()
            .unwrap();
        let f = FormField::generator(g, g.dzb(1), h.clone())
            .try_add(&scalar_form(g, h.mul(&s.zbar(0))))
            .unwrap();
        assert!(del(&del(&f).unwrap()).unwrap().max_norm() < 1e-13);
        assert!(delbar(&delbar(&f).unwrap()).unwrap().max_norm() < 1e-13);
        assert!(d(&d(&f).unwrap()).unwrap().max_norm() < 1e-13);
        let a = del(&delbar(&f).unwrap()).unwrap();
        let b = delbar(&del(&f).unwrap()).unwrap();
        assert!((&a + &b).max_norm() < 1e-13);
    }

    #[test]
    fn leibniz_rule() {
        let p = [c(0.2, 0.1), c(-0.3, 0.4)];
        let s = JetSpace::new(&p, 3).unwrap();
        let g = GeneratorSet::new(2, 1).unwrap();
        let a = FormField::generator(g, g.dz(1), s.zbar(0).mul(&s.z(1)).exp_jet());
        let b = FormField::generator(g, g.dzb(0), s.z(0).mul(&s.zbar(1)));
        let lhs = del(&(&a * &b)).unwrap();
        let rhs = &(&del(&a).unwrap() * &b) - &(&a * &del(&b).unwrap());
        assert!(lhs.distance(&rhs).unwrap() < 1e-13);
    }

    #[test]
    fn conj_swaps_variables() {
        let p = [c(0.2, 0.1), c(-0.3, 0.4)];
        let s = JetSpace::new(&p, 3).unwrap();
        let x = s.z(0).mul(&s.z(0)).mul(&s.zbar(1)).scale(c(0.0, 1.0));
        let y = s.zbar(0).mul(&s.zbar(0)).mul(&s.z(1)).scale(c(0.0, -1.0));
        assert!(x.conj().sub(&y).magnitude() < 1e-15);
    }
}
