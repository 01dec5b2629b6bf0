//! Pairings of the λ-regularized currents with test forms: graded polar quadrature
//! around the zero set, analytic closure of the innermost ball, and polynomial
//! extrapolation to λ → 0⁺.

use std::f64::consts::{LN_2, PI};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grassmann::{Coeff, GeneratorSet, Multivector};
use crate::jets::{ddc, values, FormField, Jet, JetSpace};
use crate::quadrature::{graded_rule, ordered_sum, periodic_rule, GaussLegendre};
use crate::section::{Ingredients, SectionField, SectionModel};
use crate::geometry::MetricSource;

pub const DEFAULT_LAMBDAS: [f64; 6] = [0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625];

const T_FLOOR: f64 = 1e-8;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Smooth test function `χ` with jets up to order 2, paired against bidegree-complementary
/// forms as `χ β^q` where `β = dd^c|z|²`.
pub trait Probe: Send + Sync {
    /// `χ β^q` and `dd^c χ ∧ β^q`.
    fn forms(&self, gens: GeneratorSet, z: &[Complex64], q: usize) -> Result<ProbeForms>;
    fn vanishes_at(&self, z: &[Complex64]) -> bool;
}

#[derive(Clone, Debug)]
pub struct ProbeForms {
    pub psi: Multivector<Complex64>,
    pub ddc_psi: Multivector<Complex64>,
}

/// `β = dd^c|z − c|²`, constant.
fn kahler_form(space: &Arc<JetSpace>, gens: GeneratorSet) -> Result<FormField> {
    let mut r2 = space.constant(c(0.0, 0.0));
    for i in 0..gens.n() {
        r2 = r2.add(&space.z(i).mul(&space.zbar(i)));
    }
    ddc(&FormField::scalar(gens, r2))
}

fn power(a: &FormField, q: usize, gens: GeneratorSet, space: &Arc<JetSpace>) -> Result<FormField> {
    let mut p = FormField::scalar(gens, space.constant(c(1.0, 0.0)));
    for _ in 0..q {
        p = p.wedge(a)?;
    }
    Ok(p)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Profile {
    /// `(1 − s)^q`.
    Polynomial(u32),
    /// 1 for `s ≤ 1/4`, then a quintic smoothstep down to 0 at `s = 1`.
    Plateau,
}

/// Radial test function of `s = |z − c|²/R²`, supported in the ball of radius `R`.
#[derive(Clone, Debug, PartialEq)]
pub struct Bump {
    pub center: Vec<Complex64>,
    pub radius: f64,
    pub profile: Profile,
}

fn smoothstep(u: f64) -> f64 {
    u * u * u * (10.0 + u * (-15.0 + 6.0 * u))
}

impl Bump {
    pub fn new(center: Vec<Complex64>, radius: f64, q: u32) -> Result<Bump> {
        if q < 3 {
            return Err(Error::InvalidArgument(format!("bump order {q} < 3")));
        }
        Bump::with_profile(center, radius, Profile::Polynomial(q))
    }

    pub fn plateau(center: Vec<Complex64>, radius: f64) -> Result<Bump> {
        Bump::with_profile(center, radius, Profile::Plateau)
    }

    fn with_profile(center: Vec<Complex64>, radius: f64, profile: Profile) -> Result<Bump> {
        if radius <= 0.0 || !radius.is_finite() {
            return Err(Error::InvalidArgument(format!("bump radius {radius}")));
        }
        Ok(Bump { center, radius, profile })
    }

    fn s(&self, z: &[Complex64]) -> f64 {
        dist2(z, &self.center) / (self.radius * self.radius)
    }

    pub fn value(&self, z: &[Complex64]) -> f64 {
        let s = self.s(z);
        if s >= 1.0 {
            return 0.0;
        }
        match self.profile {
            Profile::Polynomial(q) => (1.0 - s).powi(q as i32),
            Profile::Plateau if s <= 0.25 => 1.0,
            Profile::Plateau => 1.0 - smoothstep((s - 0.25) / 0.75),
        }
    }

    /// `∫ χ dV = π^n R^{2n} q!/(n+q)!` for the polynomial profile.
    pub fn volume_integral(&self) -> Option<f64> {
        let Profile::Polynomial(q) = self.profile else {
            return None;
        };
        let n = self.center.len();
        let ratio: f64 = (1..=n).map(|j| 1.0 / (q as f64 + j as f64)).product();
        Some(PI.powi(n as i32) * self.radius.powi(2 * n as i32) * ratio)
    }

    fn jet(&self, space: &Arc<JetSpace>) -> Jet {
        let mut sj = space.constant(c(0.0, 0.0));
        let scale = c(1.0 / (self.radius * self.radius), 0.0);
        for (i, ci) in self.center.iter().enumerate() {
            let a = space.z(i).sub(&space.constant(*ci));
            let b = space.zbar(i).sub(&space.constant(ci.conj()));
            sj = sj.add(&a.mul(&b).scale(scale));
        }
        let one = space.constant(c(1.0, 0.0));
        match self.profile {
            Profile::Polynomial(q) => one.sub(&sj).powi(q),
            Profile::Plateau if sj.value().re <= 0.25 => one,
            Profile::Plateau => {
                let u = sj.sub(&space.constant(c(0.25, 0.0))).scale(c(4.0 / 3.0, 0.0));
                let poly = u
                    .scale(c(6.0, 0.0))
                    .add(&space.constant(c(-15.0, 0.0)))
                    .mul(&u)
                    .add(&space.constant(c(10.0, 0.0)));
                one.sub(&poly.mul(&u.powi(3)))
            }
        }
    }
}

fn dist2(z: &[Complex64], w: &[Complex64]) -> f64 {
    z.iter().zip(w).map(|(a, b)| (a - b).norm_sqr()).sum()
}

impl Probe for Bump {
    fn forms(&self, gens: GeneratorSet, z: &[Complex64], q: usize) -> Result<ProbeForms> {
        if self.vanishes_at(z) {
            return Ok(ProbeForms {
                psi: Multivector::zero(gens),
                ddc_psi: Multivector::zero(gens),
            });
        }
        let space = JetSpace::new(z, 2)?;
        let chi = FormField::scalar(gens, self.jet(&space));
        let bq = power(&kahler_form(&space, gens)?, q, gens, &space)?;
        Ok(ProbeForms {
            psi: values(&chi.wedge(&bq)?),
            ddc_psi: values(&ddc(&chi)?.wedge(&bq)?),
        })
    }

    fn vanishes_at(&self, z: &[Complex64]) -> bool {
        dist2(z, &self.center) >= self.radius * self.radius
    }
}

/// Density of a top-degree form with respect to Lebesgue measure.
pub fn top_density(form: &Multivector<Complex64>) -> Complex64 {
    let g = form.gens();
    let top = g.holo_mask() | g.antiholo_mask();
    let mut vol = Multivector::one(g);
    for j in 0..g.n() {
        vol = &vol * &Multivector::word(g, &[g.dz(j), g.dzb(j)], c(0.0, 0.5));
    }
    let v = *vol.coefficient(top).expect("volume form is nonzero");
    form.coefficient(top).copied().unwrap_or_default() / v
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TGrading {
    Smooth,
    TowardZero,
    TowardOne,
    Both,
}

/// Polar region around `center`: `z = c + r·ω`, `r ∈ [r_min, r_max]`. For `n = 2`,
/// `ω = (√(1−t)e^{iθ₁}, √t e^{iθ₂})`; `t → 1` approaches `{z₁ = c₁}`, `t → 0` approaches `{z₂ = c₂}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Region {
    pub center: Vec<Complex64>,
    pub r_max: f64,
    pub r_min: f64,
    pub outer_tail: bool,
    pub grading: TGrading,
}

impl Region {
    /// Ball of radius `r` with the default inner cutoff `1e-6·r`.
    pub fn ball(center: Vec<Complex64>, r: f64) -> Region {
        Region {
            center,
            r_max: r,
            r_min: 1e-6 * r,
            outer_tail: false,
            grading: TGrading::Smooth,
        }
    }

    pub fn with_grading(mut self, grading: TGrading) -> Region {
        self.grading = grading;
        self
    }

    fn dim(&self) -> usize {
        self.center.len()
    }
}

/// Nodes per radial panel, `t`-nodes (about a quarter of them per panel when graded),
/// angles per circle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Grid {
    pub radial: usize,
    pub t: usize,
    pub theta: usize,
}

impl Default for Grid {
    fn default() -> Grid {
        Grid {
            radial: 8,
            t: 10,
            theta: 8,
        }
    }
}

impl Grid {
    pub fn halved(&self) -> Grid {
        Grid {
            radial: (self.radial / 2).max(2),
            t: (self.t / 2).max(2),
            theta: (self.theta / 2).max(2),
        }
    }

    pub fn scaled(&self, factor: usize) -> Grid {
        Grid {
            radial: self.radial * factor,
            t: self.t * factor,
            theta: self.theta * factor,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NodeValue {
    pub log_norm2: f64,
    pub values: Vec<Complex64>,
}

impl NodeValue {
    pub fn zeros(k: usize) -> NodeValue {
        NodeValue {
            log_norm2: 0.0,
            values: vec![c(0.0, 0.0); k],
        }
    }
}

/// How node values turn into integrands: as is, or as `λ e^{λ log|f|²} · value` per `λ`.
#[derive(Clone, Debug, PartialEq)]
pub enum Weighting {
    Plain,
    Lambda(Vec<f64>),
}

impl Weighting {
    fn width(&self) -> usize {
        match self {
            Weighting::Plain => 1,
            Weighting::Lambda(l) => l.len(),
        }
    }

    fn factor(&self, slot: usize, log_norm2: f64) -> f64 {
        match self {
            Weighting::Plain => 1.0,
            Weighting::Lambda(l) => l[slot] * (l[slot] * log_norm2).exp(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Integral {
    /// Indexed `value · width + slot`, where `slot` runs over the λ schedule.
    pub values: Vec<Complex64>,
    pub errors: Vec<f64>,
    /// The same integrals on the halved grid.
    pub coarse: Vec<Complex64>,
    pub nodes: usize,
    /// Whether the error estimate shrank from the coarse to the fine refinement.
    pub converging: bool,
}

impl Integral {
    pub fn get(&self, value: usize, slot: usize, width: usize) -> (Complex64, f64) {
        let i = value * width + slot;
        (self.values[i], self.errors[i])
    }
}

struct LevelRule {
    radial: Vec<(f64, f64)>,
    rays: Vec<(Vec<f64>, f64)>,
}

fn t_rule(grading: TGrading, count: usize) -> Result<Vec<(f64, f64)>> {
    let per_panel = ((count + 2) / 4).max(2);
    let flip = |v: Vec<(f64, f64)>| v.into_iter().map(|(u, w)| (1.0 - u, w)).collect::<Vec<_>>();
    Ok(match grading {
        TGrading::Smooth => GaussLegendre::new(count)?.on_interval(0.0, 1.0),
        TGrading::TowardZero => graded_rule(1.0, T_FLOOR, 2.0, per_panel)?,
        TGrading::TowardOne => flip(graded_rule(1.0, T_FLOOR, 2.0, per_panel)?),
        TGrading::Both => {
            let half = graded_rule(0.5, T_FLOOR, 2.0, per_panel)?;
            let mut all = half.clone();
            all.extend(flip(half));
            all
        }
    })
}

impl LevelRule {
    fn new(region: &Region, grid: Grid) -> Result<LevelRule> {
        let radial = graded_rule(region.r_max, region.r_min, 2.0, grid.radial)?;
        let theta = periodic_rule(grid.theta);
        let rays = match region.dim() {
            1 => theta.iter().map(|&(a, w)| (vec![a], w)).collect(),
            2 => {
                let t = t_rule(region.grading, grid.t)?;
                let mut rays = Vec::with_capacity(t.len() * theta.len() * theta.len());
                for &(tv, tw) in &t {
                    for &(a, aw) in &theta {
                        for &(b, bw) in &theta {
                            rays.push((vec![tv, a, b], tw * aw * bw));
                        }
                    }
                }
                rays
            }
            n => return Err(Error::Unsupported(format!("quadrature in dimension {n}"))),
        };
        Ok(LevelRule { radial, rays })
    }
}

fn point(region: &Region, ray: &[f64], r: f64) -> Vec<Complex64> {
    let cdir = |a: f64| Complex64::from_polar(1.0, a);
    match region.dim() {
        1 => vec![region.center[0] + cdir(ray[0]) * r],
        _ => {
            let t = ray[0];
            vec![
                region.center[0] + cdir(ray[1]) * (r * (1.0 - t).sqrt()),
                region.center[1] + cdir(ray[2]) * (r * t.sqrt()),
            ]
        }
    }
}

/// `κ_n r^{2n−1}`: the radial volume element.
fn measure(n: usize, r: f64) -> f64 {
    let kappa = if n == 1 { 1.0 } else { 0.5 };
    kappa * r.powi(2 * n as i32 - 1)
}

fn snap(x: f64) -> f64 {
    if (x - x.round()).abs() < 0.1 {
        x.round()
    } else {
        x
    }
}

/// Power-law extension of the ray integral below `r` (`outward = false`) or beyond it.
fn ray_end(
    near: &NodeValue,
    far: &NodeValue,
    r: f64,
    n: usize,
    weighting: &Weighting,
    outward: bool,
) -> Result<Vec<Complex64>> {
    let width = weighting.width();
    let mut out = vec![c(0.0, 0.0); near.values.len() * width];
    // near is at r, far at r/2
    let d = (near.log_norm2 - far.log_norm2) / (2.0 * LN_2);
    for (v, (b1, b2)) in near.values.iter().zip(&far.values).enumerate() {
        if b1.norm() == 0.0 || b2.norm() == 0.0 {
            continue;
        }
        let a = (b1.norm() / b2.norm()).ln() / LN_2;
        for slot in 0..width {
            let (a, d, lambda) = match weighting {
                Weighting::Plain => (a, 0.0, 0.0),
                Weighting::Lambda(l) if !outward => (snap(a), snap(d), l[slot]),
                Weighting::Lambda(l) => (a, d, l[slot]),
            };
            let denom = a + 2.0 * n as f64 + 2.0 * d * lambda;
            let scale = weighting.factor(slot, near.log_norm2) * measure(n, r) * r;
            // roundoff-level densities have no meaningful exponent
            if (b1 * scale).norm() < 1e-12 {
                continue;
            }
            let contribution = if outward {
                if denom > -1e-3 {
                    return Err(Error::Quadrature(format!(
                        "density does not decay at the outer radius (exponent {denom:.3})"
                    )));
                }
                -scale / denom
            } else {
                if denom < 1e-3 {
                    return Err(Error::Quadrature(format!(
                        "density is not integrable at the inner radius (exponent {denom:.3})"
                    )));
                }
                scale / denom
            };
            out[v * width + slot] = b1 * contribution;
        }
    }
    Ok(out)
}

fn integrate_level<F>(
    region: &Region,
    grid: Grid,
    weighting: &Weighting,
    outputs: usize,
    f: &F,
) -> Result<(Vec<Complex64>, usize)>
where
    F: Fn(&[Complex64]) -> Result<NodeValue> + Sync,
{
    let rule = LevelRule::new(region, grid)?;
    let n = region.dim();
    let width = weighting.width();
    let per_ray: Vec<Vec<Complex64>> = rule
        .rays
        .par_iter()
        .map(|(ray, aw)| {
            let mut acc = vec![Vec::with_capacity(rule.radial.len() + 2); outputs * width];
            for &(r, w) in &rule.radial {
                let nv = f(&point(region, ray, r))?;
                let base = w * measure(n, r) * aw;
                for (v, val) in nv.values.iter().enumerate() {
                    for slot in 0..width {
                        acc[v * width + slot].push(val * (base * weighting.factor(slot, nv.log_norm2)));
                    }
                }
            }
            let mut ends = Vec::new();
            let r0 = region.r_min;
            let inner = ray_end(
                &f(&point(region, ray, r0))?,
                &f(&point(region, ray, 0.5 * r0))?,
                r0,
                n,
                weighting,
                false,
            )?;
            ends.push(inner);
            if region.outer_tail {
                let r1 = region.r_max;
                ends.push(ray_end(
                    &f(&point(region, ray, r1))?,
                    &f(&point(region, ray, 0.5 * r1))?,
                    r1,
                    n,
                    weighting,
                    true,
                )?);
            }
            for e in ends {
                for (i, x) in e.into_iter().enumerate() {
                    acc[i].push(x * aw);
                }
            }
            Ok(acc
                .into_iter()
                .map(|terms| {
                    c(
                        ordered_sum(terms.iter().map(|t| t.re)),
                        ordered_sum(terms.iter().map(|t| t.im)),
                    )
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let total = (0..outputs * width)
        .map(|i| {
            c(
                ordered_sum(per_ray.iter().map(|v| v[i].re)),
                ordered_sum(per_ray.iter().map(|v| v[i].im)),
            )
        })
        .collect();
    Ok((total, rule.rays.len() * rule.radial.len()))
}

/// Integrates node values over the region at three refinements; errors are the
/// fine/coarse differences.
pub fn integrate_field<F>(
    region: &Region,
    grid: Grid,
    weighting: &Weighting,
    outputs: usize,
    f: F,
) -> Result<Integral>
where
    F: Fn(&[Complex64]) -> Result<NodeValue> + Sync,
{
    if let Weighting::Lambda(l) = weighting {
        if l.iter().any(|x| !(*x > 0.0)) {
            return Err(Error::InvalidArgument("λ must be positive".into()));
        }
    }
    if !(region.r_min > 0.0 && region.r_min < region.r_max) {
        return Err(Error::InvalidArgument(format!(
            "radii {} .. {}",
            region.r_min, region.r_max
        )));
    }
    let coarse_grid = grid.halved();
    let (fine, nodes) = integrate_level(region, grid, weighting, outputs, &f)?;
    let (coarse, _) = integrate_level(region, coarse_grid, weighting, outputs, &f)?;
    let (coarsest, _) = integrate_level(region, coarse_grid.halved(), weighting, outputs, &f)?;
    if fine.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Quadrature("non-finite value".into()));
    }
    let errors: Vec<f64> = fine.iter().zip(&coarse).map(|(a, b)| (a - b).norm()).collect();
    let converging = errors.iter().zip(coarse.iter().zip(&coarsest)).zip(&fine).all(
        |((e, (a, b)), v)| *e <= (a - b).norm() || *e <= 1e-9 * v.norm().max(1e-3),
    );
    Ok(Integral {
        values: fine,
        errors,
        coarse,
        nodes,
        converging,
    })
}

/// What is integrated against the probe.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Integrand {
    /// `∫χβ^n`.
    Probe,
    /// `λ|f|^{2λ}ℵ∂|f|²∧∂̄|f|²/|f|⁴ ∧ c_{k−1}(D_Q) ∧ χβ^{n−k}`.
    Mass { k: usize },
    /// The same prefactor against the terms `j ≥ p − 1` of the expansion of `c_{k−1}(D_Q)`.
    Mprecis { k: usize, p: usize },
    /// `W_{k−1}∧dd^c(χβ^{n−k})`, `c_k(D_E)∧χβ^{n−k}`, `c_k(D_Q)∧χβ^{n−k}`.
    Green { k: usize },
    /// `w∧dd^c(χβ^{n−p})`, `γ∧χβ^{n−p}`.
    Meo { p: usize },
}

impl Integrand {
    pub fn outputs(&self) -> usize {
        match self {
            Integrand::Probe | Integrand::Mass { .. } | Integrand::Mprecis { .. } => 1,
            Integrand::Green { .. } => 3,
            Integrand::Meo { .. } => 2,
        }
    }

    pub fn is_regularized(&self) -> bool {
        matches!(self, Integrand::Mass { .. } | Integrand::Mprecis { .. })
    }

    fn degree(&self, n: usize) -> Result<usize> {
        let k = match *self {
            Integrand::Probe => return Ok(0),
            Integrand::Mass { k } | Integrand::Mprecis { k, .. } | Integrand::Green { k } => k,
            Integrand::Meo { p } => p,
        };
        if k == 0 || k > n {
            return Err(Error::Degree(format!("bidegree ({k},{k}) in dimension {n}")));
        }
        Ok(k)
    }
}

#[derive(Clone)]
pub struct PairingTask {
    pub metric: Arc<dyn MetricSource>,
    pub section: SectionModel,
    pub probe: Arc<dyn Probe>,
    pub integrand: Integrand,
    pub region: Region,
    pub lambdas: Vec<f64>,
    pub grid: Grid,
}

impl PairingTask {
    fn weighting(&self) -> Weighting {
        if self.integrand.is_regularized() {
            Weighting::Lambda(self.lambdas.clone())
        } else {
            Weighting::Plain
        }
    }

    /// Node values for the integrand at `z`.
    pub fn node(&self, z: &[Complex64]) -> Result<NodeValue> {
        let outputs = self.integrand.outputs();
        if self.probe.vanishes_at(z) {
            return Ok(NodeValue::zeros(outputs));
        }
        let n = z.len();
        let k = self.integrand.degree(n)?;
        if let Integrand::Probe = self.integrand {
            let gens = GeneratorSet::new(n, self.section.rank())?;
            let pf = self.probe.forms(gens, z, n)?;
            return Ok(NodeValue {
                log_norm2: 0.0,
                values: vec![top_density(&pf.psi)],
            });
        }
        if self.section.value(z)?.iter().all(|v| v.norm() == 0.0) {
            return Ok(NodeValue::zeros(outputs));
        }
        let field = SectionField::at(&*self.metric, &self.section, z, 2)?;
        let ing: Ingredients<Complex64> = field.ingredients()?.values();
        let gens = ing.gens;
        let pf = self.probe.forms(gens, z, n - k)?;
        let dens = |a: &Multivector<Complex64>, b: &Multivector<Complex64>| -> Result<Complex64> {
            Ok(top_density(&a.wedge(b)?))
        };
        let values = match self.integrand {
            Integrand::Probe => unreachable!(),
            Integrand::Mass { k } => {
                let base = ing.log_gradient_form()?.wedge(&ing.cq()?.component(k as u32 - 1))?;
                vec![dens(&base, &pf.psi)?]
            }
            Integrand::Mprecis { k, p } => {
                if p == 0 {
                    return Err(Error::InvalidArgument("codimension must be positive".into()));
                }
                let base = ing.log_gradient_form()?.wedge(&ing.cq_partial(k, p - 1)?)?;
                vec![dens(&base, &pf.psi)?]
            }
            Integrand::Green { k } => {
                let w = ing.form_w()?.component(k as u32 - 1);
                let ce = values(&field.geometry().chern_form()?).component(k as u32);
                let cq = ing.cq()?.component(k as u32);
                vec![
                    dens(&w, &pf.ddc_psi)?,
                    dens(&ce, &pf.psi)?,
                    dens(&cq, &pf.psi)?,
                ]
            }
            Integrand::Meo { p } => {
                let (w, gamma) = ing.meo_forms(p)?;
                vec![dens(&w, &pf.ddc_psi)?, dens(&gamma, &pf.psi)?]
            }
        };
        Ok(NodeValue {
            log_norm2: ing.log_norm2.re,
            values,
        })
    }

    pub fn run(&self) -> Result<Integral> {
        integrate_field(
            &self.region,
            self.grid,
            &self.weighting(),
            self.integrand.outputs(),
            |z| self.node(z),
        )
    }
}

/// The pairing at a single `λ`, with its quadrature error estimate.
pub fn integrate(task: &PairingTask, lambda: f64) -> Result<(Complex64, f64)> {
    let mut t = task.clone();
    t.lambdas = vec![lambda];
    let out = t.run()?;
    Ok((out.values[0], out.errors[0]))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub lambda: f64,
    pub value: Complex64,
    pub error: f64,
    /// Value on the halved grid.
    pub coarse: Complex64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MassEstimate {
    pub limit: Complex64,
    pub error: f64,
    pub condition: f64,
    pub samples: Vec<Sample>,
    pub nodes: usize,
    pub converging: bool,
}

/// Value at `λ = 0` of the polynomial through the given samples, the weights realizing it,
/// and the condition number of the scaled Vandermonde matrix.
fn interpolate_at_zero(lambdas: &[f64], vals: &[Complex64]) -> Result<(Complex64, Vec<f64>, f64)> {
    let scale = lambdas.iter().copied().fold(0.0, f64::max);
    let k = lambdas.len();
    let a = DMatrix::from_fn(k, k, |i, j| (lambdas[i] / scale).powi(j as i32));
    let svd = a.clone().svd(false, false);
    let cond = svd.singular_values.max() / svd.singular_values.min();
    if !(cond < 1e12) {
        return Err(Error::IllConditioned(cond));
    }
    let inv = a.try_inverse().ok_or(Error::IllConditioned(cond))?;
    let w: Vec<f64> = inv.row(0).iter().copied().collect();
    let re = DVector::from_iterator(k, vals.iter().map(|v| v.re));
    let im = DVector::from_iterator(k, vals.iter().map(|v| v.im));
    let wv = DVector::from_vec(w.clone());
    Ok((c(wv.dot(&re), wv.dot(&im)), w, cond))
}

/// Richardson extrapolation to `λ = 0`: the cubic through the four smallest `λ` (fewer
/// with fewer samples). The error bar is the change from the next lower degree plus the
/// difference between the limits of the fine and the coarse samples. Returns
/// `(limit, error, condition)`.
pub fn extrapolate(samples: &[Sample]) -> Result<(Complex64, f64, f64)> {
    extrapolate_with_degree(samples, 3)
}

pub fn extrapolate_with_degree(samples: &[Sample], degree: usize) -> Result<(Complex64, f64, f64)> {
    if samples.len() < 3 || degree < 2 {
        return Err(Error::InvalidArgument(format!(
            "extrapolation needs at least 3 λ samples and degree ≥ 2, got {} samples",
            samples.len()
        )));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    let degree = degree.min(sorted.len() - 1);
    let used = &sorted[..=degree];
    let lambdas: Vec<f64> = used.iter().map(|s| s.lambda).collect();
    let vals: Vec<Complex64> = used.iter().map(|s| s.value).collect();
    let (hi, w, cond) = interpolate_at_zero(&lambdas, &vals)?;
    let (lo, _, _) = interpolate_at_zero(&lambdas[..degree], &vals[..degree])?;
    let quad: Complex64 = w.iter().zip(used).map(|(w, s)| (s.value - s.coarse) * *w).sum();
    Ok((hi, (hi - lo).norm() + quad.norm(), cond))
}

fn mass_from(task: &PairingTask, out: &Integral) -> Result<MassEstimate> {
    let width = task.lambdas.len();
    let samples: Vec<Sample> = task
        .lambdas
        .iter()
        .enumerate()
        .map(|(slot, &lambda)| {
            let (value, error) = out.get(0, slot, width);
            let coarse = out.coarse[slot];
            Sample { lambda, value, error, coarse }
        })
        .collect();
    let (limit, error, condition) = extrapolate(&samples)?;
    Ok(MassEstimate {
        limit,
        error,
        condition,
        samples,
        nodes: out.nodes,
        converging: out.converging,
    })
}

/// `⟨M_k, χβ^{n−k}⟩` through the regularized density.
pub fn extrapolate_mass(task: &PairingTask) -> Result<MassEstimate> {
    if !task.integrand.is_regularized() {
        return Err(Error::InvalidArgument("integrand has no λ dependence".into()));
    }
    mass_from(task, &task.run()?)
}

/// `⟨M_k, χβ^{n−k}⟩` through the expansion keeping only `j ≥ p − 1`.
pub fn mprecis_mass(task: &PairingTask, k: usize, p: usize) -> Result<MassEstimate> {
    let mut t = task.clone();
    t.integrand = Integrand::Mprecis { k, p };
    extrapolate_mass(&t)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GreenReport {
    pub w_term: f64,
    pub ce_term: f64,
    pub cq_term: f64,
    pub mass: MassEstimate,
    pub residual: f64,
    pub largest: f64,
    pub error: f64,
}

/// Residual of `∫W_{k−1}∧dd^cψ − ∫c_k(D_E)∧ψ + ∫c_k(D_Q)∧ψ + ⟨M_k, ψ⟩`, `ψ = χβ^{n−k}`.
pub fn green_pairing(task: &PairingTask, k: usize) -> Result<GreenReport> {
    let mut t = task.clone();
    t.integrand = Integrand::Green { k };
    let plain = t.run()?;
    t.integrand = Integrand::Mass { k };
    let mass = extrapolate_mass(&t)?;
    let (w, ce, cq) = (plain.values[0].re, plain.values[1].re, plain.values[2].re);
    let m = mass.limit.re;
    let residual = w - ce + cq + m;
    let largest = [w, ce, cq, m].iter().map(|x| x.abs()).fold(0.0, f64::max);
    let error = plain.errors.iter().sum::<f64>() + mass.error;
    Ok(GreenReport {
        w_term: w,
        ce_term: ce,
        cq_term: cq,
        mass,
        residual,
        largest,
        error,
    })
}

/// Irreducible components of a desk-scale zero set.
#[derive(Clone, Debug, PartialEq)]
pub enum Component {
    Point(Vec<Complex64>),
    /// `{z_axis = value}`.
    Hyperplane { axis: usize, value: Complex64 },
}

impl Component {
    pub fn codim(&self, n: usize) -> usize {
        match self {
            Component::Point(_) => n,
            Component::Hyperplane { .. } => 1,
        }
    }
}

/// `∫_Z χβ^{dim Z}` for a point or a coordinate hyperplane meeting the bump.
pub fn component_integral(bump: &Bump, component: &Component, grid: Grid) -> Result<f64> {
    let n = bump.center.len();
    match component {
        Component::Point(p) => {
            if p.len() != n {
                return Err(Error::InvalidArgument("point has the wrong dimension".into()));
            }
            Ok(bump.value(p))
        }
        Component::Hyperplane { axis, value } => {
            if n != 2 || *axis >= 2 {
                return Err(Error::Unsupported(format!(
                    "hyperplane z{} in dimension {n}",
                    axis + 1
                )));
            }
            let other = 1 - axis;
            let offset = (value - bump.center[*axis]).norm_sqr();
            let rho2 = bump.radius * bump.radius - offset;
            if rho2 <= 0.0 {
                return Ok(0.0);
            }
            let gens = GeneratorSet::new(2, 1)?;
            let mask = (1u64 << gens.dz(other)) | (1u64 << gens.dzb(other));
            let gl = GaussLegendre::new(grid.radial.max(4) * 4)?;
            let mut terms = Vec::new();
            for (r, w) in gl.on_interval(0.0, rho2.sqrt()) {
                for (a, aw) in periodic_rule(grid.theta.max(4)) {
                    let mut z = bump.center.clone();
                    z[*axis] = *value;
                    z[other] += Complex64::from_polar(r, a);
                    let pf = bump.forms(gens, &z, 1)?;
                    // dz∧dz̄ = −2i dA
                    let coef = pf.psi.coefficient(mask).copied().unwrap_or_default() * c(0.0, -2.0);
                    terms.push(coef.re * r * w * aw);
                }
            }
            Ok(ordered_sum(terms))
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeoReport {
    pub w_term: f64,
    pub zero_term: f64,
    pub gamma_term: f64,
    pub residual: f64,
    pub largest: f64,
    pub error: f64,
}

/// Residual of `∫w∧dd^cψ − Σ α_j ∫_{Z_j} ψ + ∫γ∧ψ`, `ψ = χβ^{n−p}`.
pub fn meo_pairing(
    task: &PairingTask,
    bump: &Bump,
    p: usize,
    components: &[(Component, f64)],
) -> Result<MeoReport> {
    let n = task.region.dim();
    let mut t = task.clone();
    t.integrand = Integrand::Meo { p };
    let out = t.run()?;
    let mut zero_term = 0.0;
    for (comp, alpha) in components {
        if comp.codim(n) == p {
            zero_term += alpha * component_integral(bump, comp, task.grid)?;
        }
    }
    let (w, g) = (out.values[0].re, out.values[1].re);
    let residual = w - zero_term + g;
    let largest = [w, zero_term, g].iter().map(|x| x.abs()).fold(0.0, f64::max);
    Ok(MeoReport {
        w_term: w,
        zero_term,
        gamma_term: g,
        residual,
        largest,
        error: out.errors.iter().sum(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::MetricModel;

    fn task(section: &[&str], n: usize, integrand: Integrand, grid: Grid) -> PairingTask {
        let center = vec![c(0.0, 0.0); n];
        PairingTask {
            metric: Arc::new(MetricModel::Trivial(section.len())),
            section: SectionModel::parse(section).unwrap(),
            probe: Arc::new(Bump::new(center.clone(), 1.0, 3).unwrap()),
            integrand,
            region: Region::ball(center, 1.0),
            lambdas: DEFAULT_LAMBDAS.to_vec(),
            grid,
        }
    }

    #[test]
    fn probe_volume_matches_closed_form() {
        for n in 1..=2 {
            let t = task(&["1"], n, Integrand::Probe, Grid::default());
            let got = t.run().unwrap().values[0];
            // ∫χβ^n = n!(2/π)^n ∫χ dV
            let b = Bump::new(vec![c(0.0, 0.0); n], 1.0, 3).unwrap();
            let fact = if n == 2 { 2.0 } else { 1.0 };
            let want = fact * (2.0 / PI).powi(n as i32) * b.volume_integral().unwrap();
            assert!((got.re - want).abs() < 1e-8, "n={n}: {got} vs {want}");
            assert!(got.im.abs() < 1e-12);
        }
        let b = Bump::new(vec![c(0.0, 0.0)], 2.0, 4).unwrap();
        assert!(Bump::plateau(vec![c(0.0, 0.0)], 1.0).unwrap().volume_integral().is_none());
        let r = integrate_field(&Region::ball(vec![c(0.0, 0.0)], 2.0), Grid::default(), &Weighting::Plain, 1, |z| {
            Ok(NodeValue { log_norm2: 0.0, values: vec![c(b.value(z), 0.0)] })
        })
        .unwrap();
        assert!((r.values[0].re - 4.0 * PI / 5.0).abs() < 1e-9);
    }

    #[test]
    fn finite_lambda_line_case() {
        // λ ↦ k q!/Π_{j≤q}(kλ + j) for f = z^k against (1 − |z|²)^q
        for k in 1..=3u32 {
            let expr = format!("z1^{k}");
            let t = task(&[&expr], 1, Integrand::Mass { k: 1 }, Grid::default());
            let (v, err) = integrate(&t, 0.5).unwrap();
            let kl = k as f64 * 0.5;
            let want = k as f64 * 6.0 / ((kl + 1.0) * (kl + 2.0) * (kl + 3.0));
            assert!((v.re - want).abs() < 1e-8, "k={k}: {v} vs {want}");
            assert!(err < 1e-6);
        }
    }

    #[test]
    fn extrapolation_recovers_cubic() {
        let samples: Vec<Sample> = DEFAULT_LAMBDAS
            .iter()
            .map(|&l| Sample {
                lambda: l,
                value: c(2.0 - l + 3.0 * l * l - 5.0 * l * l * l, 0.5 * l),
                error: 0.0,
                coarse: c(2.0 - l + 3.0 * l * l - 5.0 * l * l * l, 0.5 * l),
            })
            .collect();
        let (v, err, cond) = extrapolate(&samples).unwrap();
        assert!((v - c(2.0, 0.0)).norm() < 1e-12);
        assert!(err > 0.0 && err < 1e-2 && cond > 1.0);
        let quad: Vec<Sample> = samples
            .iter()
            .map(|s| Sample {
                value: c(1.0 + s.lambda * s.lambda, 0.0),
                coarse: c(1.0 + s.lambda * s.lambda, 0.0),
                ..s.clone()
            })
            .collect();
        let (v, err, _) = extrapolate(&quad).unwrap();
        assert!((v.re - 1.0).abs() < 1e-12 && err < 1e-12);
        assert!(matches!(extrapolate(&samples[..2]), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn multiplicity_of_power() {
        let t = task(&["z1^2"], 1, Integrand::Mass { k: 1 }, Grid::default());
        let m = extrapolate_mass(&t).unwrap();
        assert!((m.limit.re - 2.0).abs() < 1e-3, "{m:?}");
        assert!(m.converging);
    }

    #[test]
    fn classical_green_case() {
        let t = task(&["z1"], 1, Integrand::Green { k: 1 }, Grid::default());
        let g = green_pairing(&t, 1).unwrap();
        assert!(g.residual.abs() < 1e-4 * g.largest, "{g:?}");
        assert!((g.w_term + 1.0).abs() < 1e-4);
    }

    #[test]
    fn constant_section_has_zero_residual() {
        let t = task(&["2"], 1, Integrand::Green { k: 1 }, Grid::default());
        let g = green_pairing(&t, 1).unwrap();
        assert!(g.residual.abs() < 1e-10 && g.largest < 1e-10, "{g:?}");
    }

    #[test]
    fn hyperplane_integral() {
        let b = Bump::new(vec![c(0.0, 0.0), c(0.0, 0.0)], 1.0, 3).unwrap();
        let v = component_integral(&b, &Component::Hyperplane { axis: 0, value: c(0.0, 0.0) }, Grid::default())
            .unwrap();
        // (2/π) ∫(1 − |w|²)³ dA = (2/π)(π/4)
        assert!((v - 0.5).abs() < 1e-12, "{v}");
        assert!(matches!(
            component_integral(&Bump::new(vec![c(0.0, 0.0)], 1.0, 3).unwrap(), &Component::Hyperplane { axis: 0, value: c(0.0, 0.0) }, Grid::default()),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn plateau_is_smooth() {
        let b = Bump::plateau(vec![c(0.1, 0.0), c(0.0, 0.0)], 2.0).unwrap();
        let gens = GeneratorSet::new(2, 1).unwrap();
        assert_eq!(b.value(&[c(0.1, 0.0), c(0.5, 0.5)]), 1.0);
        // second derivatives match across both seams
        for s in [0.25f64, 1.0] {
            let r = 2.0 * s.sqrt();
            let lo = b.forms(gens, &[c(0.1 + r - 1e-7, 0.0), c(0.0, 0.0)], 0).unwrap();
            let hi = b.forms(gens, &[c(0.1 + r + 1e-7, 0.0), c(0.0, 0.0)], 0).unwrap();
            assert!(lo.ddc_psi.distance(&hi.ddc_psi).unwrap() < 1e-5, "s={s}");
        }
        let inside = b.forms(gens, &[c(0.2, 0.0), c(0.3, 0.0)], 0).unwrap();
        assert!(inside.ddc_psi.max_norm() == 0.0);
    }

    #[test]
    fn bump_rejects_low_order() {
        assert!(Bump::new(vec![c(0.0, 0.0)], 1.0, 2).is_err());
    }
}
