//! Pⁿ by its standard charts: Fubini–Study bundles `⊕O(d_j)`, homogenized systems,
//! chart-decomposed integrals and the Bezout mass count.

use std::sync::Arc;

use num_complex::Complex64;

use crate::currents::{
    extrapolate_mass, integrate_field, top_density, Bump, Grid, Integral, Integrand, MassEstimate, NodeValue,
    PairingTask, Probe, ProbeForms, Region, TGrading, Weighting, DEFAULT_LAMBDAS,
};
use crate::error::{Error, Result};
use crate::expr::Poly;
use crate::geometry::{BundleGeometry, MetricModel};
use crate::grassmann::{Coeff, GeneratorSet, Multivector};
use crate::jets::{ddc, values, FormField, JetSpace};
use crate::section::SectionModel;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `⊕O(d_j)` with the metric `Σ|h_j(z)|²/|z|^{2d_j}`: in every chart the Gram matrix is
/// `diag((1+|w|²)^{−d_j})`.
pub fn fs_bundle(degrees: &[u32]) -> Result<MetricModel> {
    if degrees.is_empty() || degrees.contains(&0) {
        return Err(Error::InvalidArgument(format!("degrees {degrees:?} must be positive")));
    }
    Ok(MetricModel::FubiniStudy(degrees.iter().map(|&d| d as i32).collect()))
}

/// `ω = ½ dd^c log(1 + |w|²)` as a jet-level form in a chart.
pub fn fs_form(space: &Arc<JetSpace>, gens: GeneratorSet) -> Result<FormField> {
    let mut q = space.constant(c(1.0, 0.0));
    for i in 0..space.dim() {
        q = q.add(&space.z(i).mul(&space.zbar(i)));
    }
    Ok(ddc(&FormField::scalar(gens, q.log()?))?.scale(c(0.5, 0.0)))
}

/// Homogeneous coordinates of the chart point `w` (with `Z_chart = 1`).
pub fn homogeneous(chart: usize, w: &[Complex64]) -> Vec<Complex64> {
    let mut z = w.to_vec();
    z.insert(chart, c(1.0, 0.0));
    z
}

/// Affine coordinates `Z_i/Z_0`, if `Z_0 ≠ 0`.
pub fn affine(z: &[Complex64]) -> Option<Vec<Complex64>> {
    if z[0].norm() == 0.0 {
        return None;
    }
    Some(z[1..].iter().map(|x| x / z[0]).collect())
}

/// Partition weight `|Z_j|²/|Z|²` of chart `j` at its own coordinates.
pub fn chart_weight(w: &[Complex64]) -> f64 {
    1.0 / (1.0 + w.iter().map(|x| x.norm_sqr()).sum::<f64>())
}

/// Integral of a global form over Pⁿ: chart `j` contributes its density times the
/// partition weight (the callback includes the weight).
pub fn chart_integral<F>(
    n: usize,
    r_max: f64,
    grid: Grid,
    weighting: &Weighting,
    outputs: usize,
    f: F,
) -> Result<Vec<Integral>>
where
    F: Fn(usize, &[Complex64]) -> Result<NodeValue> + Sync,
{
    let region = Region {
        center: vec![c(0.0, 0.0); n],
        r_max,
        r_min: 1e-6,
        outer_tail: true,
        grading: TGrading::Smooth,
    };
    (0..=n)
        .map(|chart| integrate_field(&region, grid, weighting, outputs, |w| f(chart, w)))
        .collect()
}

fn sum_integrals(parts: &[Integral]) -> (Complex64, f64) {
    let v = parts.iter().map(|p| p.values[0]).sum();
    let e = parts.iter().map(|p| p.errors[0]).sum();
    (v, e)
}

/// `∫_{Pⁿ} ω^n`.
pub fn fs_volume(n: usize, grid: Grid) -> Result<(f64, f64)> {
    let gens = GeneratorSet::new(n, 1)?;
    let parts = chart_integral(n, 64.0, grid, &Weighting::Plain, 1, |_, w| {
        let space = JetSpace::new(w, 2)?;
        let om = values(&fs_form(&space, gens)?);
        let mut top = Multivector::one(gens);
        for _ in 0..n {
            top = top.wedge(&om)?;
        }
        Ok(NodeValue {
            log_norm2: 0.0,
            values: vec![top_density(&top) * chart_weight(w)],
        })
    })?;
    let (v, e) = sum_integrals(&parts);
    Ok((v.re, e))
}

/// `∫_{Pⁿ} c_n(D_E)` for `E = ⊕O(d_j)` of rank `n`.
pub fn chern_number(n: usize, degrees: &[u32], grid: Grid) -> Result<(f64, f64)> {
    if degrees.len() != n {
        return Err(Error::InvalidArgument(format!("rank {} on P^{n}", degrees.len())));
    }
    let metric = fs_bundle(degrees)?;
    let parts = chart_integral(n, 64.0, grid, &Weighting::Plain, 1, |_, w| {
        let geo = BundleGeometry::at(&metric, w, 2)?;
        let cn = values(&geo.chern_form()?).component(n as u32);
        Ok(NodeValue {
            log_norm2: 0.0,
            values: vec![top_density(&cn) * chart_weight(w)],
        })
    })?;
    let (v, e) = sum_integrals(&parts);
    Ok((v.re, e))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProjectiveScenario {
    pub n: usize,
    pub degrees: Vec<u32>,
    /// Affine polynomials `F_j` in `z_1..z_n`.
    pub polys: Vec<Poly>,
    /// Explicit affine zeros, used to split off the affine mass.
    pub zeros: Vec<Vec<Complex64>>,
    pub ball_radius: f64,
    pub chart_radius: f64,
    pub grid: Grid,
    pub lambdas: Vec<f64>,
}

impl ProjectiveScenario {
    pub fn new(n: usize, degrees: Vec<u32>, polys: Vec<Poly>, zeros: Vec<Vec<Complex64>>) -> Result<Self> {
        let s = ProjectiveScenario {
            n,
            degrees,
            polys,
            zeros,
            ball_radius: 0.5,
            chart_radius: 64.0,
            grid: Grid::default(),
            lambdas: DEFAULT_LAMBDAS.to_vec(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.degrees.len();
        if m == 0 || m > self.n || self.polys.len() != m {
            return Err(Error::InvalidArgument(format!(
                "{} polynomials with {} degrees on P^{}",
                self.polys.len(),
                m,
                self.n
            )));
        }
        for (p, &d) in self.polys.iter().zip(&self.degrees) {
            if p.n() != self.n {
                return Err(Error::InvalidArgument("polynomial in the wrong number of variables".into()));
            }
            if p.degree() > d {
                return Err(Error::Degree(format!("deg F = {} exceeds declared {d}", p.degree())));
            }
        }
        for z in &self.zeros {
            if z.len() != self.n {
                return Err(Error::InvalidArgument("zero has the wrong dimension".into()));
            }
            let r: f64 = self.polys.iter().map(|p| p.eval(z).norm()).fold(0.0, f64::max);
            if r > 1e-8 {
                return Err(Error::InvalidArgument(format!("listed zero {z:?} has residual {r:e}")));
            }
        }
        for (i, a) in self.zeros.iter().enumerate() {
            for b in &self.zeros[i + 1..] {
                let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
                if d < 2.0 * self.ball_radius {
                    return Err(Error::InvalidArgument("balls around listed zeros overlap".into()));
                }
            }
        }
        Ok(())
    }

    /// The section in chart `j`: homogenize, then set `Z_j = 1`.
    pub fn chart_section(&self, chart: usize) -> Result<SectionModel> {
        let entries = self
            .polys
            .iter()
            .zip(&self.degrees)
            .map(|(p, &d)| Ok(p.homogenize(d)?.dehomogenize(chart).to_expr()))
            .collect::<Result<Vec<_>>>()?;
        SectionModel::new(entries)
    }

    /// `d₁⋯d_m/(n−m)!`.
    pub fn bound(&self) -> f64 {
        let prod: f64 = self.degrees.iter().map(|&d| d as f64).product();
        let q = self.n - self.degrees.len();
        prod / (1..=q).map(|i| i as f64).product::<f64>()
    }
}

/// `weight · (1 − Σ χ_ζ) · ω_{q}` in a chart, with `ω_q = ω^q/q!`.
struct RemainderProbe {
    chart: usize,
    balls: Vec<Bump>,
}

impl Probe for RemainderProbe {
    fn forms(&self, gens: GeneratorSet, w: &[Complex64], q: usize) -> Result<ProbeForms> {
        let cut = match affine(&homogeneous(self.chart, w)) {
            Some(z) => 1.0 - self.balls.iter().map(|b| b.value(&z)).sum::<f64>(),
            None => 1.0,
        };
        let phi = c(chart_weight(w) * cut, 0.0);
        let mut psi = Multivector::scalar(gens, phi);
        if q > 0 {
            let space = JetSpace::new(w, 2)?;
            let om = values(&fs_form(&space, gens)?);
            let fact: f64 = (1..=q).map(|i| i as f64).product();
            for _ in 0..q {
                psi = psi.wedge(&om)?;
            }
            psi = psi.scale(c(1.0 / fact, 0.0));
        }
        Ok(ProbeForms {
            psi,
            ddc_psi: Multivector::zero(gens),
        })
    }

    fn vanishes_at(&self, _: &[Complex64]) -> bool {
        false
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BezoutReport {
    pub affine: Vec<MassEstimate>,
    pub affine_mass: f64,
    pub affine_error: f64,
    /// Per-chart masses outside the balls around the listed zeros.
    pub remainder: Vec<MassEstimate>,
    /// Mass outside the balls; in the limit it sits on the hyperplane at infinity.
    pub infinity_mass: f64,
    pub infinity_error: f64,
    pub total: f64,
    pub total_error: f64,
    pub bound: f64,
}

impl BezoutReport {
    pub fn slack(&self) -> f64 {
        self.bound - self.total
    }
}

/// `∫_{Pⁿ} M_m ∧ ω_{n−m}` split into the balls around the listed affine zeros and the rest.
pub fn bezout_run(scn: &ProjectiveScenario) -> Result<BezoutReport> {
    scn.validate()?;
    let n = scn.n;
    let m = scn.degrees.len();
    let metric: Arc<MetricModel> = Arc::new(fs_bundle(&scn.degrees)?);
    let affine_section = scn.chart_section(0)?;
    if m < n && !scn.zeros.is_empty() {
        return Err(Error::Unsupported("isolated zeros need m = n".into()));
    }
    let balls: Vec<Bump> = scn
        .zeros
        .iter()
        .map(|z| Bump::plateau(z.clone(), scn.ball_radius))
        .collect::<Result<_>>()?;
    let mut affine = Vec::new();
    for b in &balls {
        let task = PairingTask {
            metric: metric.clone(),
            section: affine_section.clone(),
            probe: Arc::new(b.clone()),
            integrand: Integrand::Mass { k: m },
            region: Region::ball(b.center.clone(), b.radius),
            lambdas: scn.lambdas.clone(),
            grid: scn.grid,
        };
        affine.push(extrapolate_mass(&task)?);
    }
    let mut remainder = Vec::new();
    for chart in 0..=n {
        let task = PairingTask {
            metric: metric.clone(),
            section: scn.chart_section(chart)?,
            probe: Arc::new(RemainderProbe {
                chart,
                balls: balls.clone(),
            }),
            integrand: Integrand::Mass { k: m },
            region: Region {
                center: vec![c(0.0, 0.0); n],
                r_max: scn.chart_radius,
                r_min: 1e-6,
                outer_tail: true,
                grading: TGrading::Smooth,
            },
            lambdas: scn.lambdas.clone(),
            grid: scn.grid,
        };
        remainder.push(extrapolate_mass(&task)?);
    }
    let affine_mass = affine.iter().map(|e| e.limit.re).sum();
    let affine_error = affine.iter().map(|e| e.error).sum::<f64>();
    let infinity_mass = remainder.iter().map(|e| e.limit.re).sum();
    let infinity_error = remainder.iter().map(|e| e.error).sum::<f64>();
    Ok(BezoutReport {
        total: affine_mass + infinity_mass,
        total_error: affine_error + infinity_error,
        affine,
        affine_mass,
        affine_error,
        remainder,
        infinity_mass,
        infinity_error,
        bound: scn.bound(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;
    use crate::jets::relative_defect;
    use crate::positivity::{bundle_positivity, Mode};

    fn poly(s: &str, n: usize) -> Poly {
        Poly::from_expr(&Expr::parse(s).unwrap(), n).unwrap()
    }

    #[test]
    fn chern_form_is_product_of_fs_factors() {
        for (degrees, n) in [(vec![1u32], 1usize), (vec![1, 1], 2), (vec![2, 3], 2)] {
            let p: Vec<Complex64> = (0..n).map(|i| c(0.3 - 0.2 * i as f64, 0.1 + 0.4 * i as f64)).collect();
            let geo = BundleGeometry::at(&fs_bundle(&degrees).unwrap(), &p, 3).unwrap();
            let om = fs_form(geo.space(), geo.gens()).unwrap();
            let mut want = geo.one();
            for &d in &degrees {
                let factor = geo.one().try_add(&om.scale(c(d as f64, 0.0))).unwrap();
                want = want.wedge(&factor).unwrap();
            }
            let got = geo.chern_form().unwrap();
            assert!(relative_defect(&got, &want).unwrap() < 1e-10, "{degrees:?}");
            assert!(bundle_positivity(&geo, Mode::BottChern).unwrap().positive);
        }
    }

    #[test]
    fn volumes() {
        let (v, e) = fs_volume(1, Grid::default()).unwrap();
        assert!((v - 1.0).abs() < 1e-6, "{v} ± {e}");
        let (v, _) = chern_number(1, &[1], Grid::default()).unwrap();
        assert!((v - 1.0).abs() < 1e-6);
    }

    #[test]
    fn homogenized_charts_agree_on_norms() {
        let scn = ProjectiveScenario::new(1, vec![3], vec![poly("z1^3 - 1", 1)], vec![]).unwrap();
        let s0 = scn.chart_section(0).unwrap();
        let s1 = scn.chart_section(1).unwrap();
        let w = c(0.7, -1.3);
        // the same point in chart 1 has coordinate 1/w
        let a = s0.value(&[w]).unwrap()[0].norm_sqr() / (1.0 + w.norm_sqr()).powi(3);
        let u = w.inv();
        let b = s1.value(&[u]).unwrap()[0].norm_sqr() / (1.0 + u.norm_sqr()).powi(3);
        assert!((a - b).abs() < 1e-12);
        assert_eq!(scn.bound(), 3.0);
    }

    #[test]
    fn rejects_bad_scenarios() {
        assert!(ProjectiveScenario::new(1, vec![1], vec![poly("z1^2", 1)], vec![]).is_err());
        assert!(ProjectiveScenario::new(1, vec![2], vec![poly("z1^2 - 1", 1)], vec![vec![c(2.0, 0.0)]]).is_err());
        assert!(fs_bundle(&[0]).is_err());
    }

    #[test]
    fn constant_of_degree_two_sits_at_infinity() {
        let mut scn = ProjectiveScenario::new(1, vec![2], vec![poly("1", 1)], vec![]).unwrap();
        scn.grid = Grid { radial: 6, t: 2, theta: 8 };
        let r = bezout_run(&scn).unwrap();
        assert!((r.infinity_mass - 2.0).abs() < 0.02, "{r:?}");
        assert!(r.affine_mass == 0.0);
    }
}
