//! Executes the tasks of a scenario and collects checks and λ-samples.

use std::fmt;
use std::sync::Arc;

use chernform::currents::{
    extrapolate_mass, green_pairing, meo_pairing, mprecis_mass, Bump, Component, Grid, Integrand, MassEstimate,
    PairingTask, Region, TGrading,
};
use chernform::identities::{metric_identities, section_identities, Residual};
use chernform::jets::{relative_defect, values};
use chernform::positivity::{bundle_positivity, positive_form_test, Mode, PSD_TOL};
use chernform::projective::{bezout_run, chern_number, fs_form, fs_volume, ProjectiveScenario};
use chernform::{
    BundleGeometry, Error, Expr, GeneratorSet, MetricModel, Multivector, Poly, RandomMetric, Result, SectionField,
    SectionModel,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::scenario::{MetricSpec, Scenario, SectionSpec, Task, TaskKind, ZeroComponent};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    /// `|value − target| ≤ tol`.
    Near,
    AtLeast,
    AtMost,
    /// Printed, never fails.
    Info,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Info,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Info => "INFO",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub id: String,
    pub paper_ref: String,
    pub value: f64,
    pub target: f64,
    pub tol: f64,
    pub relation: Relation,
}

impl Check {
    pub fn status(&self) -> Status {
        let ok = match self.relation {
            Relation::Info => return Status::Info,
            Relation::Near => (self.value - self.target).abs() <= self.tol,
            Relation::AtLeast => self.value >= self.target - self.tol,
            Relation::AtMost => self.value <= self.target + self.tol,
        };
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleRow {
    pub scenario: String,
    pub k: usize,
    /// `0` marks the extrapolated limit, whose `quad_err` is the error bar.
    pub lambda: f64,
    pub value: Complex64,
    pub quad_err: f64,
    pub nodes: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Outcome {
    pub scenario: String,
    pub anchor: String,
    pub checks: Vec<Check>,
    pub samples: Vec<SampleRow>,
    pub notes: Vec<String>,
}

impl Outcome {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.status() == Status::Fail)
    }
}

/// Command-line replacements for scenario knobs.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub jet_order: Option<usize>,
    pub grid: Option<Grid>,
    pub lambdas: Option<Vec<f64>>,
}

impl Overrides {
    pub fn apply(&self, scn: &mut Scenario) {
        if let Some(s) = self.seed {
            scn.seed = s;
        }
        if let Some(j) = self.jet_order {
            scn.numerics.jet_order = j;
        }
        if let Some(g) = self.grid {
            scn.numerics.grid = g;
        }
        if let Some(l) = &self.lambdas {
            scn.numerics.lambdas = l.clone();
        }
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

struct Ctx<'a> {
    scn: &'a Scenario,
    prefix: String,
    anchor: Option<&'a str>,
    out: Outcome,
}

impl Ctx<'_> {
    fn check(&mut self, name: &str, anchor: &str, value: f64, target: f64, tol: f64, relation: Relation) {
        self.out.checks.push(Check {
            id: format!("{}.{name}", self.prefix),
            paper_ref: self.anchor.unwrap_or(anchor).to_string(),
            value,
            target,
            tol,
            relation,
        });
    }

    fn residuals(&mut self, rows: &[Vec<Residual>]) {
        let Some(first) = rows.first() else { return };
        for (i, r) in first.iter().enumerate() {
            let worst = rows.iter().map(|row| row[i].defect).fold(0.0, f64::max);
            match r.tol {
                Some(tol) => self.check(r.name, r.anchor, worst, 0.0, tol, Relation::AtMost),
                None => {
                    let best = rows.iter().map(|row| row[i].defect).fold(f64::INFINITY, f64::min);
                    self.check(r.name, r.anchor, best, 0.0, 0.0, Relation::Info)
                }
            }
        }
    }

    fn samples(&mut self, label: &str, k: usize, est: &MassEstimate) {
        let scenario = if label.is_empty() {
            self.prefix.clone()
        } else {
            format!("{}/{label}", self.prefix)
        };
        for s in &est.samples {
            self.out.samples.push(SampleRow {
                scenario: scenario.clone(),
                k,
                lambda: s.lambda,
                value: s.value,
                quad_err: s.error,
                nodes: est.nodes,
            });
        }
        self.out.samples.push(SampleRow {
            scenario,
            k,
            lambda: 0.0,
            value: est.limit,
            quad_err: est.error,
            nodes: est.nodes,
        });
        self.out.notes.push(format!(
            "{}{} k={k}: limit {:.8} ± {:.2e}, condition {:.1}, {} nodes{}",
            self.prefix,
            if label.is_empty() { String::new() } else { format!("/{label}") },
            est.limit.re,
            est.error,
            est.condition,
            est.nodes,
            if est.converging { "" } else { ", error grows under refinement" }
        ));
    }
}

fn task_rng(scn: &Scenario, idx: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(scn.seed ^ ((idx as u64 + 1) << 40))
}

fn random_point(rng: &mut ChaCha8Rng, n: usize, half: f64) -> Vec<Complex64> {
    (0..n)
        .map(|_| c(rng.random_range(-half..half), rng.random_range(-half..half)))
        .collect()
}

fn metric_model(spec: &MetricSpec, n: usize, rng: &mut ChaCha8Rng) -> MetricModel {
    match spec {
        MetricSpec::Trivial { rank } => MetricModel::Trivial(*rank),
        MetricSpec::Fs { degrees } => MetricModel::FubiniStudy(degrees.iter().map(|&d| d as i32).collect()),
        MetricSpec::Diag(d) => MetricModel::Diagonal(d.clone()),
        MetricSpec::Hermitian { rank, upper } => MetricModel::Entries { m: *rank, upper: upper.clone() },
        MetricSpec::Random { rank, degree, scale } => {
            MetricModel::Random(RandomMetric::sample(rng, n, *rank, *degree, *scale))
        }
    }
}

fn section_model(scn: &Scenario, rng: &mut ChaCha8Rng) -> Result<SectionModel> {
    match &scn.section {
        SectionSpec::None => Err(Error::InvalidArgument("task needs a [section]".into())),
        SectionSpec::Entries(e) => SectionModel::new(e.clone()),
        SectionSpec::Random { degree } => Ok(SectionModel::random(rng, scn.n, scn.metric.rank(), *degree)),
    }
}

fn eval_point(p: &[Expr]) -> Result<Vec<Complex64>> {
    p.iter().map(|e| e.eval(&[])).collect()
}

fn fs_degrees(scn: &Scenario) -> Result<Vec<u32>> {
    match &scn.metric {
        MetricSpec::Fs { degrees } => Ok(degrees.clone()),
        _ => Err(Error::InvalidArgument("task needs the fs metric preset".into())),
    }
}

/// Determinant by permutation expansion.
fn permutation_det(a: &[Complex64], m: usize) -> Complex64 {
    fn rec(a: &[Complex64], m: usize, row: usize, used: &mut Vec<bool>, sign: f64) -> Complex64 {
        if row == m {
            return c(sign, 0.0);
        }
        let mut total = c(0.0, 0.0);
        let mut inversions_left = 0;
        for col in 0..m {
            if used[col] {
                continue;
            }
            let s = if inversions_left % 2 == 0 { sign } else { -sign };
            used[col] = true;
            total += a[row * m + col] * rec(a, m, row + 1, used, s);
            used[col] = false;
            inversions_left += 1;
        }
        total
    }
    rec(a, m, 0, &mut vec![false; m], 1.0)
}

fn berezin(ctx: &mut Ctx, rng: &mut ChaCha8Rng, count: usize, max_rank: usize, tol: f64) -> Result<()> {
    let mut worst: f64 = 0.0;
    for i in 0..count {
        let m = 1 + i % max_rank;
        let a: Vec<Complex64> = (0..m * m)
            .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let g = GeneratorSet::new(1, m)?;
        let e = (&Multivector::snake_matrix(g, &a) + &Multivector::identity_tilde(g)).exp_even()?;
        let got = e.berezin_e().coefficient(0).copied().unwrap_or_default();
        let mut api = a.clone();
        for j in 0..m {
            api[j * m + j] += 1.0;
        }
        worst = worst.max((got - permutation_det(&api, m)).norm());
    }
    ctx.check(
        "det",
        "Berezin integral of exp(Ã + Ĩ) equals det(A + I)",
        worst,
        0.0,
        tol,
        Relation::AtMost,
    );
    Ok(())
}

fn chern(ctx: &mut Ctx, rng: &mut ChaCha8Rng, count: usize) -> Result<()> {
    let scn = ctx.scn;
    let draws: Vec<(MetricModel, Vec<Complex64>)> = (0..count)
        .map(|_| (metric_model(&scn.metric, scn.n, rng), random_point(rng, scn.n, 0.5)))
        .collect();
    let order = scn.numerics.jet_order;
    let rows = draws
        .par_iter()
        .map(|(m, z)| metric_identities(&BundleGeometry::at(m, z, order)?))
        .collect::<Result<Vec<_>>>()?;
    ctx.residuals(&rows);
    Ok(())
}

fn identities(ctx: &mut Ctx, rng: &mut ChaCha8Rng, points: usize, delta: f64, lambdas: &[f64]) -> Result<()> {
    let scn = ctx.scn;
    let mut draws = Vec::with_capacity(points);
    for _ in 0..points {
        let metric = metric_model(&scn.metric, scn.n, rng);
        let section = section_model(scn, rng)?;
        let mut tries = 0;
        let z = loop {
            let z = random_point(rng, scn.n, 1.0);
            let norm: f64 = section.value(&z)?.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            if norm >= delta {
                break z;
            }
            tries += 1;
            if tries > 1000 {
                return Err(Error::InvalidArgument(format!("no point with |f| ≥ {delta} found")));
            }
        };
        draws.push((metric, section, z));
    }
    let order = scn.numerics.jet_order;
    let rows = draws
        .par_iter()
        .map(|(m, s, z)| {
            let field = SectionField::at(m, s, z, order)?;
            let mut r = metric_identities(field.geometry())?;
            r.extend(section_identities(&field, lambdas)?);
            Ok(r)
        })
        .collect::<Result<Vec<_>>>()?;
    ctx.residuals(&rows);
    Ok(())
}

fn fs_chern(ctx: &mut Ctx, rng: &mut ChaCha8Rng, points: usize) -> Result<()> {
    let scn = ctx.scn;
    let degrees = fs_degrees(scn)?;
    let metric = metric_model(&scn.metric, scn.n, rng);
    let zs: Vec<_> = (0..points).map(|_| random_point(rng, scn.n, 1.5)).collect();
    let order = scn.numerics.jet_order;
    let defects = zs
        .par_iter()
        .map(|z| {
            let geo = BundleGeometry::at(&metric, z, order)?;
            let om = fs_form(geo.space(), geo.gens())?;
            let mut prod = geo.one();
            for &d in &degrees {
                prod = prod.wedge(&geo.one().try_add(&om.scale(c(d as f64, 0.0)))?)?;
            }
            relative_defect(&geo.chern_form()?, &prod)
        })
        .collect::<Result<Vec<f64>>>()?;
    let worst = defects.iter().copied().fold(0.0, f64::max);
    ctx.check("product", "c(D_E) = Π(1 + d_j ω)", worst, 0.0, 1e-10, Relation::AtMost);
    Ok(())
}

fn positivity(
    ctx: &mut Ctx,
    rng: &mut ChaCha8Rng,
    points: usize,
    trials: usize,
    mode: Mode,
    forms: &[usize],
) -> Result<()> {
    let scn = ctx.scn;
    let metric = metric_model(&scn.metric, scn.n, rng);
    let zs: Vec<_> = (0..points).map(|_| random_point(rng, scn.n, 2.0)).collect();
    let seed = scn.seed;
    let rows = zs
        .par_iter()
        .enumerate()
        .map(|(i, z)| {
            let geo = BundleGeometry::at(&metric, z, 2)?;
            let v = bundle_positivity(&geo, mode)?;
            let cf = values(&geo.chern_form()?);
            let mut form_mins = Vec::new();
            for &k in forms {
                let t = positive_form_test(&cf.component(k as u32), k, trials, seed + (i * 1000 + k) as u64, PSD_TOL)?;
                form_mins.push(if t.positive { t.min_value } else { t.min_value.min(-1.0) });
            }
            Ok((v.min_value, form_mins))
        })
        .collect::<Result<Vec<_>>>()?;
    let (name, anchor) = match mode {
        Mode::BottChern => ("bott-chern", "E ≥_B 0 for the Fubini–Study bundle"),
        Mode::Nakano => ("nakano", "Nakano positivity of the curvature"),
    };
    let min_eig = rows.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    ctx.check(name, anchor, min_eig, 0.0, PSD_TOL, Relation::AtLeast);
    for (j, &k) in forms.iter().enumerate() {
        let m = rows.iter().map(|r| r.1[j]).fold(f64::INFINITY, f64::min);
        ctx.check(
            &format!("c{k}-positive"),
            "Chern forms of a B-positive bundle are positive",
            m,
            0.0,
            PSD_TOL,
            Relation::AtLeast,
        );
    }
    Ok(())
}

fn origin_task(scn: &Scenario, rng: &mut ChaCha8Rng, integrand: Integrand, grading: TGrading) -> Result<(PairingTask, Bump)> {
    let metric = metric_model(&scn.metric, scn.n, rng);
    let section = section_model(scn, rng)?;
    let center = vec![c(0.0, 0.0); scn.n];
    let nm = &scn.numerics;
    let bump = Bump::new(center.clone(), nm.bump_radius, nm.bump_order)?;
    let task = PairingTask {
        metric: Arc::new(metric),
        section,
        probe: Arc::new(bump.clone()),
        integrand,
        region: Region::ball(center, nm.bump_radius).with_grading(grading),
        lambdas: nm.lambdas.clone(),
        grid: nm.grid,
    };
    Ok((task, bump))
}

#[allow(clippy::too_many_arguments)]
fn mass(
    ctx: &mut Ctx,
    rng: &mut ChaCha8Rng,
    k: usize,
    p: usize,
    target: f64,
    tol: f64,
    with_mprecis: bool,
    grading: TGrading,
) -> Result<()> {
    let (task, _) = origin_task(ctx.scn, rng, Integrand::Mass { k }, grading)?;
    let est = extrapolate_mass(&task)?;
    ctx.samples("", k, &est);
    if target == 0.0 && tol == 0.0 {
        ctx.check("mass", "M_k vanishes below the codimension", est.limit.re, 0.0, est.error, Relation::Near);
    } else {
        ctx.check("mass", "multiplicity through the λ-regularized mass", est.limit.re, target, tol, Relation::Near);
    }
    if k == p {
        ctx.check("nonneg", "M_p is a positive current", est.limit.re, 0.0, est.error, Relation::AtLeast);
    }
    ctx.check(
        "converging",
        "quadrature error shrinks under refinement",
        if est.converging { 1.0 } else { 0.0 },
        1.0,
        0.0,
        Relation::Near,
    );
    if with_mprecis {
        let mp = mprecis_mass(&task, k, p)?;
        ctx.samples("mprecis", k, &mp);
        ctx.check(
            "mprecis",
            "mass through the terms j ≥ p − 1 agrees with the full density",
            mp.limit.re,
            est.limit.re,
            mp.error + est.error,
            Relation::Near,
        );
    }
    Ok(())
}

fn green(ctx: &mut Ctx, rng: &mut ChaCha8Rng, k: usize, tol: f64, grading: TGrading) -> Result<()> {
    let (task, _) = origin_task(ctx.scn, rng, Integrand::Mass { k }, grading)?;
    let r = green_pairing(&task, k)?;
    ctx.samples("green-mass", k, &r.mass);
    let anchor = "Green current: dd^cW = [M] − c(D_E) + c(D_Q)";
    ctx.check("w-term", anchor, r.w_term, 0.0, 0.0, Relation::Info);
    ctx.check("ce-term", anchor, r.ce_term, 0.0, 0.0, Relation::Info);
    ctx.check("cq-term", anchor, r.cq_term, 0.0, 0.0, Relation::Info);
    ctx.check("mass-term", anchor, r.mass.limit.re, 0.0, 0.0, Relation::Info);
    ctx.check("residual", anchor, r.residual.abs() / r.largest, 0.0, tol, Relation::Near);
    Ok(())
}

fn meo(
    ctx: &mut Ctx,
    rng: &mut ChaCha8Rng,
    p: usize,
    comps: &[(ZeroComponent, f64)],
    tol: f64,
    grading: TGrading,
) -> Result<()> {
    let (task, bump) = origin_task(ctx.scn, rng, Integrand::Meo { p }, grading)?;
    let comps = comps
        .iter()
        .map(|(z, mult)| {
            let comp = match z {
                ZeroComponent::Point(pt) => Component::Point(eval_point(pt)?),
                ZeroComponent::Hyperplane { axis, value } => Component::Hyperplane {
                    axis: axis - 1,
                    value: value.eval(&[])?,
                },
            };
            Ok((comp, *mult))
        })
        .collect::<Result<Vec<_>>>()?;
    let r = meo_pairing(&task, &bump, p, &comps)?;
    let anchor = "Meo: dd^c w = Σ α_j [Z_j] + γ";
    ctx.check("w-term", anchor, r.w_term, 0.0, 0.0, Relation::Info);
    ctx.check("zero-term", anchor, r.zero_term, 0.0, 0.0, Relation::Info);
    ctx.check("gamma-term", anchor, r.gamma_term, 0.0, 0.0, Relation::Info);
    ctx.check("residual", anchor, r.residual.abs() / r.largest, 0.0, tol, Relation::Near);
    Ok(())
}

type Target = Option<(f64, f64)>;

fn bezout(
    ctx: &mut Ctx,
    zeros: &[Vec<Expr>],
    targets: [Target; 3],
    ball_radius: f64,
    chart_radius: f64,
) -> Result<()> {
    let scn = ctx.scn;
    let degrees = fs_degrees(scn)?;
    let SectionSpec::Entries(entries) = &scn.section else {
        return Err(Error::InvalidArgument("bezout needs explicit polynomial entries".into()));
    };
    let polys = entries
        .iter()
        .map(|e| Poly::from_expr(e, scn.n))
        .collect::<Result<Vec<_>>>()?;
    let zeros = zeros.iter().map(|z| eval_point(z)).collect::<Result<Vec<_>>>()?;
    let mut ps = ProjectiveScenario {
        ball_radius,
        chart_radius,
        grid: scn.numerics.grid,
        lambdas: scn.numerics.lambdas.clone(),
        ..ProjectiveScenario::new(scn.n, degrees, polys, Vec::new())?
    };
    ps.zeros = zeros;
    ps.validate()?;
    let r = bezout_run(&ps)?;
    let m = ps.degrees.len();
    for (i, est) in r.affine.iter().enumerate() {
        ctx.samples(&format!("ball{}", i + 1), m, est);
    }
    for (j, est) in r.remainder.iter().enumerate() {
        ctx.samples(&format!("chart{j}"), m, est);
    }
    let [affine, infinity, total] = targets;
    if let Some((t, tol)) = affine {
        ctx.check("affine", "affine zeros counted with multiplicity", r.affine_mass, t, tol, Relation::Near);
    }
    if let Some((t, tol)) = infinity {
        ctx.check(
            "infinity",
            "Bezout defect is the mass on the hyperplane at infinity",
            r.infinity_mass,
            t,
            tol,
            Relation::Near,
        );
    }
    if let Some((t, tol)) = total {
        ctx.check("total", "total mass of M_m over Pⁿ", r.total, t, tol, Relation::Near);
    }
    ctx.check("bound", "Bezout inequality", r.total, r.bound, r.total_error, Relation::AtMost);
    ctx.out.notes.push(format!(
        "{}: affine {:.8} ± {:.2e}, infinity {:.8} ± {:.2e}, bound {}",
        ctx.prefix, r.affine_mass, r.affine_error, r.infinity_mass, r.infinity_error, r.bound
    ));
    Ok(())
}

fn run_task(ctx: &mut Ctx, idx: usize, task: &Task) -> Result<()> {
    let scn = ctx.scn;
    let mut rng = task_rng(scn, idx);
    let n = scn.n;
    match &task.kind {
        TaskKind::Berezin { count, max_rank, tol } => berezin(ctx, &mut rng, *count, *max_rank, *tol),
        TaskKind::Chern { count } => chern(ctx, &mut rng, *count),
        TaskKind::Identities { points, delta, lambdas } => identities(ctx, &mut rng, *points, *delta, lambdas),
        TaskKind::FsVolume { target, tol } => {
            let (v, e) = fs_volume(n, scn.numerics.grid)?;
            ctx.check("volume", "Fubini–Study volume ∫ωⁿ = 1", v, *target, *tol, Relation::Near);
            ctx.out.notes.push(format!("{}: ∫ωⁿ = {v:.12} (quadrature {e:.1e})", ctx.prefix));
            Ok(())
        }
        TaskKind::ChernNumber { target, tol } => {
            let (v, e) = chern_number(n, &fs_degrees(scn)?, scn.numerics.grid)?;
            ctx.check("integral", "∫ c_n(D_E) = d₁⋯d_n", v, *target, *tol, Relation::Near);
            ctx.out.notes.push(format!("{}: ∫c_n = {v:.12} (quadrature {e:.1e})", ctx.prefix));
            Ok(())
        }
        TaskKind::FsChern { points } => fs_chern(ctx, &mut rng, *points),
        TaskKind::Positivity { points, trials, mode, forms } => {
            positivity(ctx, &mut rng, *points, *trials, *mode, forms)
        }
        TaskKind::Mass { k, p, target, tol, mprecis, grading } => {
            mass(ctx, &mut rng, *k, *p, *target, *tol, *mprecis, *grading)
        }
        TaskKind::Green { k, tol, grading } => green(ctx, &mut rng, *k, *tol, *grading),
        TaskKind::Meo { p, components, tol, grading } => meo(ctx, &mut rng, *p, components, *tol, *grading),
        TaskKind::Bezout { zeros, affine, infinity, total, ball_radius, chart_radius } => {
            bezout(ctx, zeros, [*affine, *infinity, *total], *ball_radius, *chart_radius)
        }
    }
}

/// Runs every task; a task that errors contributes one failing check carrying the message.
pub fn run_scenario(scn: &Scenario) -> Outcome {
    let mut out = Outcome {
        scenario: scn.name.clone(),
        anchor: scn.anchor.clone(),
        ..Outcome::default()
    };
    for (idx, task) in scn.tasks.iter().enumerate() {
        let mut ctx = Ctx {
            scn,
            prefix: format!("{}/t{}-{}", scn.name, idx + 1, task.kind.name()),
            anchor: task.anchor.as_deref(),
            out: std::mem::take(&mut out),
        };
        if let Err(e) = run_task(&mut ctx, idx, task) {
            ctx.out.notes.push(format!("{}: {e}", ctx.prefix));
            ctx.check("error", "task completed", f64::NAN, 0.0, 0.0, Relation::Near);
        }
        out = ctx.out;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_determinant() {
        let a = [c(2.0, 0.0), c(1.0, 0.0), c(0.0, 1.0), c(3.0, 0.0)];
        assert!((permutation_det(&a, 2) - c(6.0, -1.0)).norm() < 1e-15);
        let a: Vec<Complex64> = [1.0, 2.0, 3.0, 0.0, 1.0, 4.0, 5.0, 6.0, 0.0].iter().map(|&x| c(x, 0.0)).collect();
        assert!((permutation_det(&a, 3) - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn statuses() {
        let mut ch = Check {
            id: "x".into(),
            paper_ref: "y".into(),
            value: 1.005,
            target: 1.0,
            tol: 0.01,
            relation: Relation::Near,
        };
        assert_eq!(ch.status(), Status::Pass);
        ch.value = f64::NAN;
        assert_eq!(ch.status(), Status::Fail);
        ch.relation = Relation::AtLeast;
        ch.value = -0.005;
        ch.target = 0.0;
        assert_eq!(ch.status(), Status::Pass);
        ch.relation = Relation::Info;
        assert_eq!(ch.status(), Status::Info);
    }
}
