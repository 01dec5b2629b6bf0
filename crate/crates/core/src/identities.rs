//! Pointwise identity suites evaluated at jet level.
//!
//! Each entry is a relative defect between two routes to the same form. Entries without a
//! tolerance are printed for reference only; they record the printed-sign variants that do
//! not hold.

use num_complex::Complex64;

use crate::error::Result;
use crate::geometry::BundleGeometry;
use crate::jets::{d, del, delbar, relative_defect, FormField, ALEPH};
use crate::section::SectionField;

pub const IDENTITY_TOL: f64 = 1e-9;
pub const LAMBDA_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct Residual {
    pub name: &'static str,
    pub anchor: &'static str,
    pub defect: f64,
    pub tol: Option<f64>,
}

impl Residual {
    fn checked(name: &'static str, anchor: &'static str, defect: f64, tol: f64) -> Residual {
        Residual { name, anchor, defect, tol: Some(tol) }
    }

    fn reference(name: &'static str, anchor: &'static str, defect: f64) -> Residual {
        Residual { name, anchor, defect, tol: None }
    }

    pub fn passed(&self) -> bool {
        self.tol.is_none_or(|t| self.defect < t)
    }
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Closedness of `c(D)`, the Bianchi identity and agreement of the two Chern form routes.
pub fn metric_identities(geo: &BundleGeometry) -> Result<Vec<Residual>> {
    let c = geo.chern_form()?;
    let zero = FormField::zero(geo.gens());
    let closed = relative_defect(&d(&c)?, &zero)?;
    let bianchi = relative_defect(&geo.covariant(geo.curvature_tilde())?, &zero)?;
    let routes = relative_defect(&geo.chern_form_berezin()?, &geo.chern_form_det()?)?;
    Ok(vec![
        Residual::checked("chern-closed", "d c(D) = 0", closed, IDENTITY_TOL),
        Residual::checked("bianchi", "Bianchi identity DΘ = 0", bianchi, IDENTITY_TOL),
        Residual::checked("chern-routes", "Berezin integral equals det(ℵΘ + I)", routes, IDENTITY_TOL),
    ])
}

/// Transgression relations, the two quotient Chern form routes and the finite-λ
/// factorizations at the basepoint of `s`.
pub fn section_identities(s: &SectionField, lambdas: &[f64]) -> Result<Vec<Residual>> {
    let ing = s.ingredients()?;
    let geo = s.geometry();
    let ce = geo.chern_form()?;
    let cq = ing.cq()?;
    let a = ing.form_a()?;
    let b = ing.form_b()?;
    let v = ing.form_v()?;
    let w = ing.form_w()?;
    let mut out = Vec::new();

    let cq_da = ing.cq_via_da()?;
    out.push(Residual::checked(
        "cq-routes",
        "quotient Chern form: Berezin route vs curvature of D_Q",
        relative_defect(&cq, &cq_da)?,
        IDENTITY_TOL,
    ));

    let dv = del(&v)?.scale(ALEPH * 2.0);
    out.push(Residual::checked(
        "dv-b",
        "transgression 2ℵ∂v = b",
        relative_defect(&dv, &b)?,
        IDENTITY_TOL,
    ));
    out.push(Residual::reference(
        "dv-b-printed",
        "transgression −2ℵ∂v = b as printed",
        relative_defect(&dv.scale(re(-1.0)), &b)?,
    ));

    let csq = s.cs()?.wedge(&cq)?;
    out.push(Residual::checked(
        "db",
        "db = c(D_E) − c(D_S)c(D_Q)",
        relative_defect(&d(&b)?, &ce.try_sub(&csq)?)?,
        IDENTITY_TOL,
    ));

    let da = d(&a)?;
    out.push(Residual::checked(
        "da",
        "da = c(D_E) − c(D_Q)",
        relative_defect(&da, &ce.try_sub(&cq)?)?,
        IDENTITY_TOL,
    ));
    out.push(Residual::checked(
        "dbar-a",
        "∂̄a = da",
        relative_defect(&delbar(&a)?, &da)?,
        IDENTITY_TOL,
    ));

    let corr = ing.del_log_norm2.scale(ALEPH).wedge(&cq)?;
    out.push(Residual::checked(
        "b-a",
        "b = a − ℵ∂log|f|²∧c(D_Q)",
        relative_defect(&b, &a.try_sub(&corr)?)?,
        IDENTITY_TOL,
    ));
    out.push(Residual::reference(
        "b-a-printed",
        "b = a + ℵ∂log|f|²∧c(D_Q) as printed",
        relative_defect(&b, &a.try_add(&corr)?)?,
    ));

    let dw = del(&w)?.scale(ALEPH * -2.0);
    out.push(Residual::checked(
        "dw-a",
        "Green form −2ℵ∂W = a",
        relative_defect(&dw, &a)?,
        IDENTITY_TOL,
    ));

    out.push(Residual::checked(
        "a-factored",
        "a = −∫_e exp(ℵΘ̃ + Ĩ − ℵDf)∧σ∧Σ(∂̄σ)^ℓ",
        relative_defect(&a, &ing.form_a_factored()?)?,
        IDENTITY_TOL,
    ));

    let e = ing.exp_minus_df()?;
    let mut lam = [0.0f64; 4];
    for &lambda in lambdas {
        let lo = s.lambda_objects(lambda)?;
        let np = ing.norm_pow(lambda)?;
        let np_form = FormField::scalar(s.gens(), np.clone());
        let lhs = delbar(&np_form)?.wedge(&a)?.scale(re(-1.0));
        let rhs = e.wedge(&lo.r)?.berezin_e();
        lam[0] = lam[0].max(relative_defect(&lhs, &rhs)?);
        let rhs = e.wedge(&lo.u)?.berezin_e().scale(re(-1.0));
        lam[1] = lam[1].max(relative_defect(&lo.a, &rhs)?);
        let rhs = e.wedge(&ing.f.wedge(&lo.u)?)?.berezin_e();
        lam[2] = lam[2].max(relative_defect(&cq.mul_coeff(&np), &rhs)?);
        let lhs = lo.u.contract(s.f())?.try_sub(&delbar(&lo.u)?)?;
        let rhs = np_form.try_sub(&lo.r)?;
        lam[3] = lam[3].max(relative_defect(&lhs, &rhs)?);
    }
    if !lambdas.is_empty() {
        out.push(Residual::checked(
            "lambda-r",
            "−∂̄|f|^{2λ}∧a = ∫_e exp(…)∧R^λ",
            lam[0],
            LAMBDA_TOL,
        ));
        out.push(Residual::checked(
            "lambda-a",
            "|f|^{2λ}a = −∫_e exp(…)∧U^λ",
            lam[1],
            LAMBDA_TOL,
        ));
        out.push(Residual::checked(
            "lambda-cq",
            "|f|^{2λ}c(D_Q) = ∫_e exp(…)∧f∧U^λ",
            lam[2],
            LAMBDA_TOL,
        ));
        out.push(Residual::checked(
            "lambda-delta",
            "(δ_f − ∂̄)U^λ = |f|^{2λ} − R^λ",
            lam[3],
            LAMBDA_TOL,
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{MetricModel, RandomMetric};
    use crate::section::SectionModel;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_data_passes_every_checked_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let metric = MetricModel::Random(RandomMetric::sample(&mut rng, 2, 2, 1, 0.5));
        let section = SectionModel::random(&mut rng, 2, 2, 1);
        let z = [Complex64::new(0.2, -0.1), Complex64::new(0.4, 0.3)];
        let s = SectionField::at(&metric, &section, &z, 4).unwrap();
        let mut all = metric_identities(s.geometry()).unwrap();
        all.extend(section_identities(&s, &[0.5, 1.0]).unwrap());
        for r in &all {
            assert!(r.passed(), "{} {}", r.name, r.defect);
        }
        let printed = all.iter().find(|r| r.name == "dv-b-printed").unwrap();
        assert!(printed.defect > 1e-4);
    }
}
