//! Objects built from a holomorphic section `f`: σ, φ, γ_a, γ_b, c(D_Q), the
//! transgression forms a, b, v, W, Meo's pair (w, γ) and the λ-regularized U, R, M.
//!
//! The algebra is generic in the coefficient ring so the same formulas serve
//! jet-level identity checks and pointwise quadrature values.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::expr::{Expr, Poly};
use crate::forms::FormMatrix;
use crate::geometry::{BundleGeometry, MetricSource};
use crate::grassmann::{Coeff, GeneratorSet, Multivector};
use crate::jets::{ddc, del, delbar, relative_defect, FormField, Jet, JetSpace, ALEPH};

const ROUTE_TOL: f64 = 1e-9;

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Holomorphic section given by one expression per frame element.
#[derive(Clone, Debug, PartialEq)]
pub struct SectionModel {
    entries: Vec<Expr>,
}

impl SectionModel {
    pub fn new(entries: Vec<Expr>) -> Result<SectionModel> {
        if entries.is_empty() {
            return Err(Error::InvalidArgument("section needs at least one entry".into()));
        }
        if let Some(j) = entries.iter().position(|e| !e.is_syntactically_holomorphic()) {
            return Err(Error::NotHolomorphic(j));
        }
        Ok(SectionModel { entries })
    }

    pub fn parse(entries: &[&str]) -> Result<SectionModel> {
        SectionModel::new(entries.iter().map(|s| Expr::parse(s)).collect::<Result<_>>()?)
    }

    /// Random polynomial entries of total degree ≤ `degree`.
    pub fn random<R: Rng>(rng: &mut R, n: usize, m: usize, degree: u32) -> SectionModel {
        let entries = (0..m)
            .map(|_| {
                let mut p = Poly::zero(n);
                let mut exps = vec![vec![0u32; n]];
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
                for e in exps {
                    let mut mono = Poly::constant(n, Complex64::new(
                        rng.random_range(-1.0..1.0),
                        rng.random_range(-1.0..1.0),
                    ));
                    for (i, &k) in e.iter().enumerate() {
                        for _ in 0..k {
                            mono = mono.mul(&Poly::var(n, i));
                        }
                    }
                    p = p.add(&mono);
                }
                p.to_expr()
            })
            .collect();
        SectionModel { entries }
    }

    pub fn rank(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Expr] {
        &self.entries
    }

    pub fn jets(&self, space: &Arc<JetSpace>) -> Result<Vec<Jet>> {
        self.entries.iter().map(|e| e.jet(space)).collect()
    }

    pub fn value(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        self.entries.iter().map(|e| e.eval(z)).collect()
    }
}

/// Everything the closed formulas need, in a coefficient ring `C`.
#[derive(Clone, Debug)]
pub struct Ingredients<C> {
    pub gens: GeneratorSet,
    pub one: C,
    /// Section components.
    pub f_coeffs: Vec<C>,
    /// `ℵΘ̃ + Ĩ`.
    pub x: Multivector<C>,
    pub theta_tilde: Multivector<C>,
    pub f: Multivector<C>,
    /// `f̃* = Σ s_k e*_k`, `s = f*`.
    pub s: Multivector<C>,
    pub dbar_s: Multivector<C>,
    pub sigma: Multivector<C>,
    pub dbar_sigma: Multivector<C>,
    pub df: Multivector<C>,
    pub gamma_a: Multivector<C>,
    pub d_gamma_a: Multivector<C>,
    pub gamma_b: Multivector<C>,
    pub dbar_gamma_b: Multivector<C>,
    pub norm2: C,
    pub log_norm2: C,
    pub del_log_norm2: Multivector<C>,
    pub dbar_log_norm2: Multivector<C>,
    /// `dd^c log|f|`.
    pub ddc_log_norm: Multivector<C>,
}

fn power<C: Coeff>(a: &Multivector<C>, k: usize, one: &C) -> Result<Multivector<C>> {
    let mut p = Multivector::scalar(a.gens(), one.clone());
    for _ in 0..k {
        if p.is_empty() {
            break;
        }
        p = p.wedge(a)?;
    }
    Ok(p)
}

/// `a^k / k!`.
fn divided_power<C: Coeff>(a: &Multivector<C>, k: usize, one: &C) -> Result<Multivector<C>> {
    let fact: f64 = (1..=k).map(|i| i as f64).product();
    Ok(power(a, k, one)?.scale(re(1.0 / fact)))
}

/// `Σ_ℓ coef(ℓ) a^ℓ` until the powers vanish.
fn series<C: Coeff>(
    a: &Multivector<C>,
    one: &C,
    coef: impl Fn(usize) -> f64,
) -> Result<Multivector<C>> {
    let mut p = Multivector::scalar(a.gens(), one.clone());
    let mut acc = p.scale(re(coef(0)));
    for l in 1.. {
        p = p.wedge(a)?;
        if p.is_empty() {
            break;
        }
        acc = acc.try_add(&p.scale(re(coef(l))))?;
    }
    Ok(acc)
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

impl<C: Coeff> Ingredients<C> {
    /// `ℵ Df ∧ ∂̄σ`.
    fn y(&self) -> Result<Multivector<C>> {
        Ok(self.df.wedge(&self.dbar_sigma)?.scale(ALEPH))
    }

    fn f_sigma(&self) -> Result<Multivector<C>> {
        self.f.wedge(&self.sigma)
    }

    /// `Σ_ℓ σ ∧ (∂̄σ)^ℓ`.
    fn sigma_series(&self) -> Result<Multivector<C>> {
        self.sigma.wedge(&series(&self.dbar_sigma, &self.one, |_| 1.0)?)
    }

    /// `∫_e f∧σ∧exp(Ĩ + ℵΘ̃ − ℵDf∧∂̄σ)`.
    pub fn cq(&self) -> Result<Multivector<C>> {
        let e = self.x.try_sub(&self.y()?)?.exp_even_with(&self.one)?;
        Ok(self.f_sigma()?.wedge(&e)?.berezin_e())
    }

    /// `Θ̃_a = Θ̃ − Dγ̃_a + (γ_a∧γ_a)~`.
    pub fn theta_a_tilde(&self) -> Result<Multivector<C>> {
        let g = FormMatrix::unsnake(&self.gamma_a)?;
        let gg = g.matmul(&g)?.snake()?;
        self.theta_tilde.try_sub(&self.d_gamma_a)?.try_add(&gg)
    }

    /// `det(ℵΘ_a + I)` over E.
    pub fn cq_via_da(&self) -> Result<Multivector<C>> {
        let m = self.gens.m();
        let ta = FormMatrix::unsnake(&self.theta_a_tilde()?)?;
        let id = FormMatrix::identity(self.gens, m, &self.one);
        ta.scale(ALEPH).add(&id)?.det_even()
    }

    /// Closed ℓ-sum for `a`.
    pub fn form_a(&self) -> Result<Multivector<C>> {
        let lead = self.df.wedge(&self.sigma)?.scale(ALEPH);
        let ex = self.x.exp_even_with(&self.one)?;
        let tail = series(&self.y()?.scale(re(-1.0)), &self.one, |l| 1.0 / factorial(l + 1))?;
        Ok(lead.wedge(&ex)?.wedge(&tail)?.berezin_e())
    }

    /// `a = −∫_e exp(Ĩ + ℵΘ̃ − ℵDf) ∧ Σ σ∧(∂̄σ)^ℓ`.
    pub fn form_a_factored(&self) -> Result<Multivector<C>> {
        let e = self.exp_minus_df()?;
        Ok(e.wedge(&self.sigma_series()?)?.berezin_e().scale(re(-1.0)))
    }

    /// `exp(ℵΘ̃ + Ĩ − ℵDf)`.
    pub fn exp_minus_df(&self) -> Result<Multivector<C>> {
        self.x
            .try_sub(&self.df.scale(ALEPH))?
            .exp_even_with(&self.one)
    }

    /// Closed ℓ-sum for `b`.
    pub fn form_b(&self) -> Result<Multivector<C>> {
        let lead = self.gamma_b.scale(ALEPH);
        let ex = self.x.exp_even_with(&self.one)?;
        let tail = series(&self.dbar_gamma_b.scale(-ALEPH), &self.one, |l| {
            1.0 / factorial(l + 1)
        })?;
        Ok(lead.wedge(&ex)?.wedge(&tail)?.berezin_e())
    }

    /// `v = Σ_{ℓ=1}^{m−1} (−1)^ℓ/(2ℓ) ∫_e f∧σ∧(Ĩ+ℵΘ̃−Y)_{m−1−ℓ}∧(−Y)_ℓ`, `Y = ℵDf∧∂̄σ`.
    pub fn form_v(&self) -> Result<Multivector<C>> {
        let m = self.gens.m();
        let y = self.y()?;
        let base = self.x.try_sub(&y)?;
        let neg_y = y.scale(re(-1.0));
        let fs = self.f_sigma()?;
        let mut acc = Multivector::zero(self.gens);
        for l in 1..m {
            let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
            let t = fs
                .wedge(&divided_power(&base, m - 1 - l, &self.one)?)?
                .wedge(&divided_power(&neg_y, l, &self.one)?)?
                .berezin_e();
            acc = acc.try_add(&t.scale(re(sign / (2.0 * l as f64))))?;
        }
        Ok(acc)
    }

    /// `W = log(1/|f|) c(D_Q) − v`.
    pub fn form_w(&self) -> Result<Multivector<C>> {
        let log_inv = self.log_norm2.scale(re(-0.5));
        self.cq()?.mul_coeff(&log_inv).try_sub(&self.form_v()?)
    }

    /// Meo's `w = log|f|(dd^c log|f|)^{p−1}` and `γ = −(dd^c log|f|)^p`.
    pub fn meo_forms(&self, p: usize) -> Result<(Multivector<C>, Multivector<C>)> {
        if p == 0 {
            return Err(Error::InvalidArgument("codimension must be positive".into()));
        }
        let log_norm = self.log_norm2.scale(re(0.5));
        let w = power(&self.ddc_log_norm, p - 1, &self.one)?.mul_coeff(&log_norm);
        let gamma = power(&self.ddc_log_norm, p, &self.one)?.scale(re(-1.0));
        Ok((w, gamma))
    }

    /// `|f|^{2λ}`.
    pub fn norm_pow(&self, lambda: f64) -> Result<C> {
        self.log_norm2.scale(re(lambda)).exp()
    }

    pub fn u_lambda(&self, lambda: f64) -> Result<Multivector<C>> {
        Ok(self.sigma_series()?.mul_coeff(&self.norm_pow(lambda)?))
    }

    /// `R^λ = ∂̄|f|^{2λ} ∧ σ ∧ Σ(∂̄σ)^ℓ`.
    pub fn r_lambda(&self, lambda: f64) -> Result<Multivector<C>> {
        let d = self
            .dbar_log_norm2
            .mul_coeff(&self.norm_pow(lambda)?)
            .scale(re(lambda));
        d.wedge(&self.sigma_series()?)
    }

    /// `ℵ ∂log|f|² ∧ ∂̄log|f|²`, the λ-free part of the mass density.
    pub fn log_gradient_form(&self) -> Result<Multivector<C>> {
        Ok(self
            .del_log_norm2
            .wedge(&self.dbar_log_norm2)?
            .scale(ALEPH))
    }

    /// `λ|f|^{2λ} ℵ∂|f|²∧∂̄|f|²/|f|⁴ ∧ c(D_Q)`.
    pub fn m_lambda(&self, lambda: f64) -> Result<Multivector<C>> {
        let c = self.norm_pow(lambda)?.scale(re(lambda));
        Ok(self.log_gradient_form()?.wedge(&self.cq()?)?.mul_coeff(&c))
    }

    /// The bidegree `(k−1, k−1)` factor of the mass density with only the terms `j ≥ j_min`
    /// of the expansion of `c_{k−1}(D_Q)` in powers of `−ℵDf∧∂̄s/|f|²`.
    pub fn cq_partial(&self, k: usize, j_min: usize) -> Result<Multivector<C>> {
        let m = self.gens.m();
        if k == 0 || k > m {
            return Ok(Multivector::zero(self.gens));
        }
        let inv = self.norm2.inv()?;
        let fs = self.f.wedge(&self.s)?.mul_coeff(&inv);
        let z = self.df.wedge(&self.dbar_s)?.scale(-ALEPH).mul_coeff(&inv);
        let at = self.theta_tilde.scale(ALEPH);
        let it = self.x.try_sub(&at)?;
        let tail = divided_power(&it, m - k, &self.one)?;
        let mut acc = Multivector::zero(self.gens);
        for j in j_min..k {
            let t = fs
                .wedge(&divided_power(&z, j, &self.one)?)?
                .wedge(&divided_power(&at, k - 1 - j, &self.one)?)?
                .wedge(&tail)?
                .berezin_e();
            acc = acc.try_add(&t)?;
        }
        Ok(acc)
    }
}

impl Ingredients<Jet> {
    /// Evaluates every coefficient at the basepoint.
    pub fn values(&self) -> Ingredients<Complex64> {
        let v = |a: &FormField| a.map_coeffs(|c| c.value());
        Ingredients {
            gens: self.gens,
            one: self.one.value(),
            f_coeffs: self.f_coeffs.iter().map(|c| c.value()).collect(),
            x: v(&self.x),
            theta_tilde: v(&self.theta_tilde),
            f: v(&self.f),
            s: v(&self.s),
            dbar_s: v(&self.dbar_s),
            sigma: v(&self.sigma),
            dbar_sigma: v(&self.dbar_sigma),
            df: v(&self.df),
            gamma_a: v(&self.gamma_a),
            d_gamma_a: v(&self.d_gamma_a),
            gamma_b: v(&self.gamma_b),
            dbar_gamma_b: v(&self.dbar_gamma_b),
            norm2: self.norm2.value(),
            log_norm2: self.log_norm2.value(),
            del_log_norm2: v(&self.del_log_norm2),
            dbar_log_norm2: v(&self.dbar_log_norm2),
            ddc_log_norm: v(&self.ddc_log_norm),
        }
    }
}

/// A holomorphic section together with the bundle geometry at one basepoint.
#[derive(Clone, Debug)]
pub struct SectionField {
    geo: BundleGeometry,
    f: Vec<Jet>,
    fstar: Vec<Jet>,
    norm2: Jet,
    f_tilde: FormField,
    df: FormField,
}

impl SectionField {
    pub fn new(geo: BundleGeometry, f: Vec<Jet>) -> Result<SectionField> {
        let m = geo.rank();
        if f.len() != m {
            return Err(Error::InvalidArgument(format!(
                "section has {} entries for a rank {m} bundle",
                f.len()
            )));
        }
        let n = geo.space().dim();
        for (j, fj) in f.iter().enumerate() {
            if fj.order() == 0 {
                continue;
            }
            let scale = fj.magnitude().max(1.0);
            for i in 0..n {
                if fj.partial(i, true)?.magnitude() > 1e-12 * scale {
                    return Err(Error::NotHolomorphic(j));
                }
            }
        }
        let gram = geo.metric().gram();
        let fstar: Vec<Jet> = (0..m)
            .map(|b| {
                let mut acc = geo.constant(re(0.0));
                for a in 0..m {
                    acc = acc.add(&f[a].conj().mul(&gram[a * m + b]));
                }
                acc
            })
            .collect();
        let mut norm2 = geo.constant(re(0.0));
        for b in 0..m {
            norm2 = norm2.add(&fstar[b].mul(&f[b]));
        }
        let g = geo.gens();
        let f_tilde = crate::forms::snake_column(
            g,
            &f.iter().map(|c| FormField::scalar(g, c.clone())).collect::<Vec<_>>(),
        );
        let df = geo.covariant(&f_tilde)?;
        Ok(SectionField {
            geo,
            f,
            fstar,
            norm2,
            f_tilde,
            df,
        })
    }

    pub fn at(
        metric: &dyn MetricSource,
        section: &SectionModel,
        z: &[Complex64],
        order: usize,
    ) -> Result<SectionField> {
        let geo = BundleGeometry::at(metric, z, order)?;
        let f = section.jets(geo.space())?;
        SectionField::new(geo, f)
    }

    pub fn geometry(&self) -> &BundleGeometry {
        &self.geo
    }

    pub fn gens(&self) -> GeneratorSet {
        self.geo.gens()
    }

    pub fn f(&self) -> &[Jet] {
        &self.f
    }

    pub fn f_tilde(&self) -> &FormField {
        &self.f_tilde
    }

    /// `s = f*`, row `Σ_a conj(f_a) G_ab`.
    pub fn fstar(&self) -> &[Jet] {
        &self.fstar
    }

    pub fn norm2(&self) -> &Jet {
        &self.norm2
    }

    /// `Df = D f̃`.
    pub fn df(&self) -> &FormField {
        &self.df
    }

    fn off_zero(&self) -> Result<()> {
        if !(self.norm2.value().re > 1e-300) {
            return Err(Error::OnZeroSet);
        }
        Ok(())
    }

    fn scalar(&self, c: Jet) -> FormField {
        FormField::scalar(self.gens(), c)
    }

    pub fn s_tilde(&self) -> FormField {
        let g = self.gens();
        crate::forms::snake_row(
            g,
            &self.fstar.iter().map(|c| self.scalar(c.clone())).collect::<Vec<_>>(),
        )
    }

    /// `σ̃ = Σ σ_k e*_k` with `σ = f*/|f|²`.
    pub fn sigma(&self) -> Result<FormField> {
        self.off_zero()?;
        Ok(self.s_tilde().mul_coeff(&self.norm2.inv()?))
    }

    pub fn log_norm2(&self) -> Result<Jet> {
        self.off_zero()?;
        self.norm2.log()
    }

    /// `φ = −∂ log|f|²`.
    pub fn phi(&self) -> Result<FormField> {
        Ok(del(&self.scalar(self.log_norm2()?))?.scale(re(-1.0)))
    }

    /// `γ̃_a = Df∧σ`.
    pub fn gamma_a(&self) -> Result<FormField> {
        self.df.wedge(&self.sigma()?)
    }

    /// `γ̃_b = (Df − f∧φ)∧σ`.
    pub fn gamma_b(&self) -> Result<FormField> {
        let fphi = self.f_tilde.wedge(&self.phi()?)?;
        self.df.try_sub(&fphi)?.wedge(&self.sigma()?)
    }

    pub fn ingredients(&self) -> Result<Ingredients<Jet>> {
        self.off_zero()?;
        let g = self.gens();
        let geo = &self.geo;
        let one = geo.constant(re(1.0));
        let theta_tilde = geo.curvature_tilde().clone();
        let x = theta_tilde.scale(ALEPH).try_add(&geo.identity_tilde())?;
        let sigma = self.sigma()?;
        let s = self.s_tilde();
        let gamma_a = self.gamma_a()?;
        let gamma_b = self.gamma_b()?;
        let log_norm2 = self.log_norm2()?;
        let l = self.scalar(log_norm2.clone());
        Ok(Ingredients {
            gens: g,
            one,
            f_coeffs: self.f.clone(),
            x,
            theta_tilde,
            f: self.f_tilde.clone(),
            dbar_s: delbar(&s)?,
            s,
            dbar_sigma: delbar(&sigma)?,
            sigma,
            df: self.df.clone(),
            d_gamma_a: geo.covariant(&gamma_a)?,
            gamma_a,
            dbar_gamma_b: delbar(&gamma_b)?,
            gamma_b,
            norm2: self.norm2.clone(),
            log_norm2,
            del_log_norm2: del(&l)?,
            dbar_log_norm2: delbar(&l)?,
            ddc_log_norm: ddc(&l)?.scale(re(0.5)),
        })
    }

    /// `c(D_Q)` by the Berezin formula, cross-checked against `det(ℵΘ_a + I)`.
    pub fn cq(&self) -> Result<FormField> {
        let ing = self.ingredients()?;
        let a = ing.cq()?;
        let b = ing.cq_via_da()?;
        let diff = relative_defect(&a, &b)?;
        if diff > ROUTE_TOL {
            return Err(Error::Consistency {
                what: "quotient chern form (berezin vs deformed determinant)".into(),
                diff,
            });
        }
        Ok(a)
    }

    /// `a`, computed by the ℓ-sum and by the factored form and cross-checked.
    pub fn form_a(&self) -> Result<FormField> {
        let ing = self.ingredients()?;
        let a = ing.form_a()?;
        let diff = relative_defect(&a, &ing.form_a_factored()?)?;
        if diff > ROUTE_TOL {
            return Err(Error::Consistency {
                what: "form a (series vs factored)".into(),
                diff,
            });
        }
        Ok(a)
    }

    pub fn form_b(&self) -> Result<FormField> {
        self.ingredients()?.form_b()
    }

    pub fn form_v(&self) -> Result<FormField> {
        self.ingredients()?.form_v()
    }

    pub fn form_w(&self) -> Result<FormField> {
        self.ingredients()?.form_w()
    }

    pub fn meo_forms(&self, p: usize) -> Result<(FormField, FormField)> {
        self.ingredients()?.meo_forms(p)
    }

    /// `(U^λ, R^λ, M^λ, A^λ = |f|^{2λ} a)`.
    pub fn lambda_objects(&self, lambda: f64) -> Result<LambdaObjects> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidArgument(format!("λ must be positive, got {lambda}")));
        }
        let ing = self.ingredients()?;
        let np = ing.norm_pow(lambda)?;
        Ok(LambdaObjects {
            u: ing.u_lambda(lambda)?,
            r: ing.r_lambda(lambda)?,
            m: ing.m_lambda(lambda)?,
            a: ing.form_a()?.mul_coeff(&np),
        })
    }

    /// `c(D_S) = 1 + dd^c log(1/|f|)`.
    pub fn cs(&self) -> Result<FormField> {
        let l = self.scalar(self.log_norm2()?);
        self.geo.one().try_add(&ddc(&l)?.scale(re(-0.5)))
    }
}

#[derive(Clone, Debug)]
pub struct LambdaObjects {
    pub u: FormField,
    pub r: FormField,
    pub m: FormField,
    pub a: FormField,
}
