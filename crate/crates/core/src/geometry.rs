//! Chern connection, curvature and Chern forms of a Hermitian holomorphic bundle on a chart.
//!
//! Conventions: `⟨ξ,η⟩ = η†Gξ` for coefficient columns in a holomorphic frame,
//! `θ = G⁻¹∂G`, `Θ = ∂̄θ`, and `c(D) = ∫_e exp(ℵΘ̃ + Ĩ)`.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::forms::{invert_matrix, FormMatrix};
use crate::grassmann::{Coeff, GeneratorSet, Multivector};
use crate::jets::{del, delbar, relative_defect, values, FormField, Jet, JetSpace, ALEPH};
use crate::quadrature::GaussLegendre;

const ROUTE_TOL: f64 = 1e-10;

/// Gram matrix of jets, row-major, `G_ab = ⟨e_b, e_a⟩`.
#[derive(Clone, Debug)]
pub struct MetricField {
    m: usize,
    gram: Vec<Jet>,
}

impl MetricField {
    pub fn new(m: usize, gram: Vec<Jet>) -> Result<MetricField> {
        if m == 0 || gram.len() != m * m {
            return Err(Error::InvalidArgument(format!(
                "rank {m} metric needs {} entries, got {}",
                m * m,
                gram.len()
            )));
        }
        let field = MetricField { m, gram };
        let g = field.value_matrix();
        let herm = (&g - g.adjoint()).iter().map(|c| c.norm()).fold(0.0, f64::max);
        let scale = g.iter().map(|c| c.norm()).fold(1.0, f64::max);
        if herm > 1e-12 * scale {
            return Err(Error::NotHermitian(herm));
        }
        let eig = g.symmetric_eigenvalues();
        if eig.iter().any(|&l| !(l > 1e-14 * scale)) {
            return Err(Error::SingularMetric);
        }
        Ok(field)
    }

    pub fn rank(&self) -> usize {
        self.m
    }

    pub fn gram(&self) -> &[Jet] {
        &self.gram
    }

    pub fn get(&self, a: usize, b: usize) -> &Jet {
        &self.gram[a * self.m + b]
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        self.gram[0].space()
    }

    pub fn value_matrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.m, self.m, |a, b| self.get(a, b).value())
    }
}

/// Source of metric jets at arbitrary basepoints.
pub trait MetricSource: Send + Sync {
    fn rank(&self) -> usize;
    fn metric(&self, space: &Arc<JetSpace>) -> Result<MetricField>;
    /// Gram matrix value at a point, row-major.
    fn gram_value(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        let space = JetSpace::new(z, 0)?;
        Ok(self.metric(&space)?.gram.iter().map(|j| j.value()).collect())
    }
}

/// `G = exp(κ|z|²)(I + A(z)A(z)†)` with a random polynomial matrix `A`.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomMetric {
    pub n: usize,
    pub m: usize,
    pub kappa: f64,
    /// Monomial exponents and the row-major coefficient matrix of `A`.
    pub terms: Vec<(Vec<u32>, Vec<Complex64>)>,
}

impl RandomMetric {
    pub fn sample<R: Rng>(rng: &mut R, n: usize, m: usize, degree: u32, scale: f64) -> RandomMetric {
        let mut exps: Vec<Vec<u32>> = vec![vec![0; n]];
        for _ in 0..degree {
            let mut next = Vec::new();
            for e in &exps {
                for i in 0..n {
                    let mut f = e.clone();
                    f[i] += 1;
                    if !exps.contains(&f) && !next.contains(&f) {
                        next.push(f);
                    }
                }
            }
            exps.extend(next);
        }
        let terms = exps
            .into_iter()
            .map(|e| {
                let c = (0..m * m)
                    .map(|_| {
                        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                            * scale
                    })
                    .collect();
                (e, c)
            })
            .collect();
        RandomMetric {
            n,
            m,
            kappa: rng.random_range(-0.5..0.5),
            terms,
        }
    }

    fn a_matrix(&self, space: &Arc<JetSpace>) -> Vec<Jet> {
        let m = self.m;
        let mut a = vec![space.constant(Complex64::new(0.0, 0.0)); m * m];
        for (e, c) in &self.terms {
            let mut mono = space.constant(Complex64::new(1.0, 0.0));
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    mono = mono.mul(&space.z(i).powi(k));
                }
            }
            for (slot, ck) in a.iter_mut().zip(c) {
                *slot = slot.add(&mono.scale(*ck));
            }
        }
        a
    }
}

/// Named metric families used by scenarios.
#[derive(Clone, Debug, PartialEq)]
pub enum MetricModel {
    Trivial(usize),
    /// `diag((1+|w|²)^{-d_j})`, the chart form of the natural metric on `⊕O(d_j)`.
    FubiniStudy(Vec<i32>),
    Diagonal(Vec<Expr>),
    /// Upper triangle, row-major, including the diagonal; the lower triangle is conjugated.
    Entries { m: usize, upper: Vec<Expr> },
    Random(RandomMetric),
}

impl MetricModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            MetricModel::Trivial(m) if *m == 0 => Err(Error::InvalidArgument("rank 0".into())),
            MetricModel::FubiniStudy(d) if d.is_empty() => {
                Err(Error::InvalidArgument("no degrees".into()))
            }
            MetricModel::Diagonal(d) if d.is_empty() => {
                Err(Error::InvalidArgument("empty diagonal".into()))
            }
            MetricModel::Entries { m, upper } if upper.len() != m * (m + 1) / 2 => {
                Err(Error::InvalidArgument(format!(
                    "rank {m} metric needs {} upper-triangular entries, got {}",
                    m * (m + 1) / 2,
                    upper.len()
                )))
            }
            _ => Ok(()),
        }
    }
}

impl MetricSource for MetricModel {
    fn rank(&self) -> usize {
        match self {
            MetricModel::Trivial(m) => *m,
            MetricModel::FubiniStudy(d) => d.len(),
            MetricModel::Diagonal(d) => d.len(),
            MetricModel::Entries { m, .. } => *m,
            MetricModel::Random(r) => r.m,
        }
    }

    fn metric(&self, space: &Arc<JetSpace>) -> Result<MetricField> {
        self.validate()?;
        let m = self.rank();
        let zero = space.constant(Complex64::new(0.0, 0.0));
        let one = space.constant(Complex64::new(1.0, 0.0));
        let mut gram = vec![zero; m * m];
        match self {
            MetricModel::Trivial(_) => {
                for j in 0..m {
                    gram[j * m + j] = one.clone();
                }
            }
            MetricModel::FubiniStudy(degrees) => {
                let mut q = one.clone();
                for i in 0..space.dim() {
                    q = q.add(&space.z(i).mul(&space.zbar(i)));
                }
                for (j, &d) in degrees.iter().enumerate() {
                    gram[j * m + j] = q.powf(-(d as f64))?;
                }
            }
            MetricModel::Diagonal(entries) => {
                for (j, e) in entries.iter().enumerate() {
                    gram[j * m + j] = e.jet(space)?;
                }
            }
            MetricModel::Entries { upper, .. } => {
                let mut it = upper.iter();
                for a in 0..m {
                    for b in a..m {
                        let g = it.next().expect("validated length").jet(space)?;
                        if b != a {
                            gram[b * m + a] = g.conj();
                        }
                        gram[a * m + b] = g;
                    }
                }
            }
            MetricModel::Random(r) => {
                if r.n != space.dim() {
                    return Err(Error::InvalidArgument(format!(
                        "random metric drawn for n={} used in dimension {}",
                        r.n,
                        space.dim()
                    )));
                }
                let a = r.a_matrix(space);
                let mut q = space.constant(Complex64::new(0.0, 0.0));
                for i in 0..space.dim() {
                    q = q.add(&space.z(i).mul(&space.zbar(i)));
                }
                let weight = q.scale(Complex64::new(r.kappa, 0.0)).exp_jet();
                for i in 0..m {
                    for j in 0..m {
                        let mut g = if i == j { one.clone() } else { space.constant(Complex64::new(0.0, 0.0)) };
                        for k in 0..m {
                            g = g.add(&a[i * m + k].mul(&a[j * m + k].conj()));
                        }
                        gram[i * m + j] = g.mul(&weight);
                    }
                }
            }
        }
        MetricField::new(m, gram)
    }
}

/// Chern connection data at one basepoint.
#[derive(Clone, Debug)]
pub struct BundleGeometry {
    gens: GeneratorSet,
    metric: MetricField,
    gram_inv: Vec<Jet>,
    theta: FormMatrix<Jet>,
    curvature: FormMatrix<Jet>,
    curvature_tilde: FormField,
}

/// Builds `θ = G⁻¹∂G`, `Θ = ∂̄θ` and `Θ̃`.
pub fn chern_connection(metric: MetricField) -> Result<BundleGeometry> {
    let space = metric.space().clone();
    let m = metric.rank();
    let gens = GeneratorSet::new(space.dim(), m)?;
    let gram_inv = invert_matrix(metric.gram(), m, |p| p.inv().map_err(|_| Error::SingularMetric))?;
    let dgram: Vec<FormField> = metric
        .gram()
        .iter()
        .map(|g| del(&FormField::scalar(gens, g.clone())))
        .collect::<Result<_>>()?;
    let mut theta = Vec::with_capacity(m * m);
    for a in 0..m {
        for b in 0..m {
            let mut acc = FormField::zero(gens);
            for c in 0..m {
                acc = acc.try_add(&dgram[c * m + b].mul_coeff(&gram_inv[a * m + c]))?;
            }
            theta.push(acc);
        }
    }
    let theta = FormMatrix::from_entries(m, theta)?;
    let curvature = theta.map(delbar)?;
    let curvature_tilde = curvature.snake()?;
    Ok(BundleGeometry {
        gens,
        metric,
        gram_inv,
        theta,
        curvature,
        curvature_tilde,
    })
}

impl BundleGeometry {
    pub fn at(source: &dyn MetricSource, z: &[Complex64], order: usize) -> Result<BundleGeometry> {
        let space = JetSpace::new(z, order)?;
        chern_connection(source.metric(&space)?)
    }

    pub fn gens(&self) -> GeneratorSet {
        self.gens
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        self.metric.space()
    }

    pub fn rank(&self) -> usize {
        self.metric.rank()
    }

    pub fn metric(&self) -> &MetricField {
        &self.metric
    }

    pub fn gram_inv(&self) -> &[Jet] {
        &self.gram_inv
    }

    pub fn theta(&self) -> &FormMatrix<Jet> {
        &self.theta
    }

    pub fn curvature(&self) -> &FormMatrix<Jet> {
        &self.curvature
    }

    pub fn curvature_tilde(&self) -> &FormField {
        &self.curvature_tilde
    }

    pub fn constant(&self, c: Complex64) -> Jet {
        self.space().constant(c)
    }

    pub fn one(&self) -> FormField {
        FormField::scalar(self.gens, self.constant(Complex64::new(1.0, 0.0)))
    }

    pub fn identity_tilde(&self) -> FormField {
        Multivector::identity_tilde(self.gens).map_coeffs(|c| self.constant(*c))
    }

    /// Lifts a complex multivector to constant jets.
    pub fn lift(&self, a: &Multivector<Complex64>) -> FormField {
        a.map_coeffs(|c| self.constant(*c))
    }

    /// The connection action on the bundle generators, `e_b ↦ Σ_a θ_ab e_a`, `e*_k ↦ −Σ_j θ_kj e*_j`.
    fn connection_action(&self, w: &FormField) -> Result<FormField> {
        let g = self.gens;
        let m = self.rank();
        let mut acc = FormField::zero(g);
        for (mask, c) in w.terms() {
            let bundle = mask & g.bundle_mask();
            if bundle == 0 {
                continue;
            }
            let word: Vec<u32> = (0..g.count() as u32).filter(|b| mask >> b & 1 == 1).collect();
            for (pos, &gen) in word.iter().enumerate() {
                if 1u64 << gen & bundle == 0 {
                    continue;
                }
                let is_e = 1u64 << gen & g.e_mask() != 0;
                let idx = if is_e {
                    (gen - g.e(0)) as usize
                } else {
                    (gen - g.estar(0)) as usize
                };
                for other in 0..m {
                    let (entry, target, sign) = if is_e {
                        (self.theta.get(other, idx), g.e(other), 1.0)
                    } else {
                        (self.theta.get(idx, other), g.estar(other), -1.0)
                    };
                    if entry.is_empty() {
                        continue;
                    }
                    if target != gen && mask >> target & 1 == 1 {
                        continue;
                    }
                    let mut replaced = word.clone();
                    replaced[pos] = target;
                    let mono = FormField::word(g, &replaced, c.scale(Complex64::new(sign, 0.0)));
                    acc = acc.try_add(&entry.wedge(&mono)?)?;
                }
            }
        }
        Ok(acc)
    }

    /// `D` on Λ: the anti-derivation acting as `d` on forms and as the connection on `E`, `E*`.
    pub fn covariant(&self, w: &FormField) -> Result<FormField> {
        let dw = del(w)?.try_add(&delbar(w)?)?;
        dw.try_add(&self.connection_action(w)?)
    }

    /// `D'`, the (1,0) part of `D`.
    pub fn covariant_holo(&self, w: &FormField) -> Result<FormField> {
        del(w)?.try_add(&self.connection_action(w)?)
    }

    /// `∫_e exp(ℵΘ̃ + Ĩ)`.
    pub fn chern_form_berezin(&self) -> Result<FormField> {
        let x = self
            .curvature_tilde
            .scale(ALEPH)
            .try_add(&self.identity_tilde())?;
        Ok(x.exp_even()?.berezin_e())
    }

    /// `det(ℵΘ + I)` by cofactor expansion.
    pub fn chern_form_det(&self) -> Result<FormField> {
        let one = self.constant(Complex64::new(1.0, 0.0));
        let id = FormMatrix::identity(self.gens, self.rank(), &one);
        self.curvature.scale(ALEPH).add(&id)?.det_even()
    }

    /// `c(D)`, computed by both routes and cross-checked.
    pub fn chern_form(&self) -> Result<FormField> {
        let a = self.chern_form_berezin()?;
        let b = self.chern_form_det()?;
        let diff = relative_defect(&a, &b)?;
        if diff > ROUTE_TOL {
            return Err(Error::Consistency {
                what: "chern form (berezin vs determinant)".into(),
                diff,
            });
        }
        Ok(a)
    }

    /// `∫_0^1 ∫_e ℵγ̃ ∧ exp(ℵΘ̃_t + Ĩ) dt` with `Θ̃_t = Θ̃ − tDγ̃ + t²(γ∧γ)~`.
    pub fn transgress_numeric(&self, gamma: &FormField, steps: usize) -> Result<FormField> {
        let g = self.gens;
        for (mask, _) in gamma.terms() {
            if g.bidegree(*mask) != (1, 0) {
                return Err(Error::Degree(format!(
                    "transgression needs a (1,0) endomorphism form, found bidegree {:?}",
                    g.bidegree(*mask)
                )));
            }
        }
        if gamma.is_empty() {
            return Ok(FormField::zero(g));
        }
        let dgamma = self.covariant(gamma)?;
        let gm = FormMatrix::unsnake(gamma)?;
        let gg = gm.matmul(&gm)?.snake()?;
        let base = self
            .curvature_tilde
            .scale(ALEPH)
            .try_add(&self.identity_tilde())?;
        let lead = gamma.scale(ALEPH);
        let rule = GaussLegendre::new(steps)?;
        let mut acc = FormField::zero(g);
        for (t, w) in rule.on_interval(0.0, 1.0) {
            let theta_t = base
                .try_sub(&dgamma.scale(ALEPH * t))?
                .try_add(&gg.scale(ALEPH * t * t))?;
            let integrand = lead.wedge(&theta_t.exp_even()?)?.berezin_e();
            acc = acc.try_add(&integrand.scale(Complex64::new(w, 0.0)))?;
        }
        Ok(acc)
    }
}

/// Values of `c(D)` at a point, for quadrature.
pub fn chern_form_value(source: &dyn MetricSource, z: &[Complex64]) -> Result<Multivector<Complex64>> {
    Ok(values(&BundleGeometry::at(source, z, 2)?.chern_form_berezin()?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::{d, ddc};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn trivial_metric_is_flat() {
        let geo = BundleGeometry::at(&MetricModel::Trivial(2), &[c(0.3, 0.2), c(0.1, 0.0)], 3).unwrap();
        assert!(geo.curvature_tilde().is_empty());
        let cd = geo.chern_form().unwrap();
        assert!(cd.distance(&geo.one()).unwrap() < 1e-15);
    }

    #[test]
    fn fubini_study_first_chern_form_at_origin() {
        let geo = BundleGeometry::at(&MetricModel::FubiniStudy(vec![1]), &[c(0.0, 0.0)], 3).unwrap();
        let c1 = values(&geo.chern_form().unwrap().component(1));
        let g = geo.gens();
        let expected = Multivector::word(g, &[g.dz(0), g.dzb(0)], ALEPH);
        assert!(c1.distance(&expected).unwrap() < 1e-14);
    }

    #[test]
    fn diagonal_curvature_blocks() {
        let model = MetricModel::Diagonal(vec![
            Expr::parse("exp(z1*zb1)").unwrap(),
            Expr::parse("1 + 2*z1*zb1").unwrap(),
        ]);
        let p = [c(0.4, -0.1)];
        let geo = BundleGeometry::at(&model, &p, 3).unwrap();
        let g = geo.gens();
        let off = values(geo.curvature().get(0, 1));
        assert!(off.max_norm() < 1e-15);
        // Θ_11 = ∂̄∂(z z̄) = -dz∧dz̄
        let t00 = values(geo.curvature().get(0, 0));
        let expected = Multivector::word(g, &[g.dz(0), g.dzb(0)], c(-1.0, 0.0));
        assert!(t00.distance(&expected).unwrap() < 1e-14);
    }

    #[test]
    fn random_metrics_satisfy_bianchi_closedness_and_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..3 {
            let model = MetricModel::Random(RandomMetric::sample(&mut rng, 2, 2, 2, 0.5));
            let p = [c(0.2, -0.3), c(-0.1, 0.25)];
            let geo = BundleGeometry::at(&model, &p, 4).unwrap();
            let bianchi = geo.covariant(geo.curvature_tilde()).unwrap();
            assert!(bianchi.max_norm() < 1e-10, "{}", bianchi.max_norm());
            let cd = geo.chern_form().unwrap();
            assert!(d(&cd).unwrap().max_norm() < 1e-9);
            let gv = geo.metric().gram();
            let det = gv[0].mul(&gv[3]).sub(&gv[1].mul(&gv[2]));
            let logdet = FormField::scalar(geo.gens(), det.log().unwrap());
            let trace = ddc(&logdet).unwrap().scale(c(-0.5, 0.0));
            assert!(relative_defect(&cd.component(1), &trace).unwrap() < 1e-10);
        }
    }

    #[test]
    fn metric_compatibility() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let model = MetricModel::Random(RandomMetric::sample(&mut rng, 2, 2, 1, 0.7));
        let geo = BundleGeometry::at(&model, &[c(0.1, 0.1), c(0.2, -0.4)], 3).unwrap();
        let m = 2;
        // ∂G_cb = Σ_a G_ca θ_ab
        for cc in 0..m {
            for b in 0..m {
                let lhs = del(&FormField::scalar(geo.gens(), geo.metric().get(cc, b).clone())).unwrap();
                let mut rhs = FormField::zero(geo.gens());
                for a in 0..m {
                    rhs = rhs
                        .try_add(&geo.theta().get(a, b).mul_coeff(geo.metric().get(cc, a)))
                        .unwrap();
                }
                assert!(relative_defect(&lhs, &rhs).unwrap() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_non_hermitian_and_singular() {
        let s = JetSpace::new(&[c(0.0, 0.0)], 2).unwrap();
        let one = s.constant(c(1.0, 0.0));
        let bad = vec![one.clone(), s.constant(c(0.5, 0.0)), s.constant(c(0.0, 0.0)), one.clone()];
        assert!(matches!(MetricField::new(2, bad), Err(Error::NotHermitian(_))));
        let sing = vec![one.clone(), one.clone(), one.clone(), one];
        assert!(matches!(MetricField::new(2, sing), Err(Error::SingularMetric)));
    }

    #[test]
    fn transgression_of_zero_is_zero() {
        let geo = BundleGeometry::at(&MetricModel::FubiniStudy(vec![1, 2]), &[c(0.1, 0.0)], 3).unwrap();
        let z = geo.transgress_numeric(&FormField::zero(geo.gens()), 16).unwrap();
        assert!(z.is_empty());
        let g = geo.gens();
        let wrong = FormField::word(g, &[g.dzb(0), g.e(0), g.estar(0)], geo.constant(c(1.0, 0.0)));
        assert!(matches!(geo.transgress_numeric(&wrong, 16), Err(Error::Degree(_))));
    }
}
