//! Bott–Chern and Nakano positivity of End-valued (1,1)-forms, PSD factorization,
//! and probabilistic positivity of (r,r)-forms.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::forms::FormMatrix;
use crate::geometry::{BundleGeometry, MetricSource};
use crate::grassmann::{GeneratorSet, Multivector};
use crate::jets::{values, ALEPH};
use crate::section::{SectionField, SectionModel};

pub const PSD_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    BottChern,
    Nakano,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Verdict {
    pub positive: bool,
    pub min_value: f64,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `T` with `T†GT = I`, from the Cholesky factor of `G`.
fn orthonormalizer(gram: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let chol = gram.clone().cholesky().ok_or(Error::SingularMetric)?;
    let l = chol.l();
    let linv = l.try_inverse().ok_or(Error::SingularMetric)?;
    Ok(linv.adjoint())
}

/// Values of `B = Σ B_jk ⊗ e_j ⊗ e*_k` in the frame `ε = eT`.
fn change_frame(
    b: &FormMatrix<Complex64>,
    t: &DMatrix<Complex64>,
) -> Result<FormMatrix<Complex64>> {
    let m = b.rank();
    let tinv = t.clone().try_inverse().ok_or(Error::SingularMetric)?;
    let gens = b.get(0, 0).gens();
    let mut entries = Vec::with_capacity(m * m);
    for j in 0..m {
        for k in 0..m {
            let mut acc = Multivector::zero(gens);
            for a in 0..m {
                for bb in 0..m {
                    let w = tinv[(j, a)] * t[(bb, k)];
                    if w != c(0.0, 0.0) {
                        acc = acc.try_add(&b.get(a, bb).scale(w))?;
                    }
                }
            }
            entries.push(acc);
        }
    }
    FormMatrix::from_entries(m, entries)
}

/// Coefficient of `dz_i ∧ dz̄_l` in a (1,1)-form.
fn coeff_11(w: &Multivector<Complex64>, i: usize, l: usize) -> Complex64 {
    let g = w.gens();
    let mask = (1u64 << g.dz(i)) | (1u64 << g.dzb(l));
    w.coefficient(mask).copied().unwrap_or_default()
}

fn check_bidegree(w: &Multivector<Complex64>, p: u32, q: u32) -> Result<()> {
    let g = w.gens();
    for (mask, _) in w.terms() {
        if g.bidegree(*mask) != (p, q) || mask & g.bundle_mask() != 0 {
            return Err(Error::Degree(format!(
                "expected a scalar ({p},{q})-form, found bidegree {:?}",
                g.bidegree(*mask)
            )));
        }
    }
    Ok(())
}

/// The `nm × nm` Hermitian matrix of `B = iA` (so `A_jk = −iB_jk`) at a point, in an
/// orthonormal frame. Rows are indexed by `(i, j)` ↦ `i·m + j`.
pub fn hermitian_curvature_matrix(
    b: &FormMatrix<Complex64>,
    gram: &DMatrix<Complex64>,
    mode: Mode,
) -> Result<DMatrix<Complex64>> {
    let m = b.rank();
    let n = b.get(0, 0).gens().n();
    for e in b.entries() {
        check_bidegree(e, 1, 1)?;
    }
    let ob = change_frame(b, &orthonormalizer(gram)?)?;
    let mut defect: f64 = 0.0;
    let mut scale: f64 = 1.0;
    for j in 0..m {
        for k in 0..m {
            let d = ob.get(j, k).distance(&ob.get(k, j).conj_form()?)?;
            defect = defect.max(d);
            scale = scale.max(ob.get(j, k).max_norm());
        }
    }
    if defect > 1e-10 * scale {
        return Err(Error::NotHermitian(defect));
    }
    let mut h = DMatrix::zeros(n * m, n * m);
    for i in 0..n {
        for l in 0..n {
            for j in 0..m {
                for k in 0..m {
                    let (r, s) = match mode {
                        Mode::BottChern => (j, k),
                        Mode::Nakano => (k, j),
                    };
                    h[(i * m + j, l * m + k)] = coeff_11(ob.get(r, s), i, l) * c(0.0, -1.0);
                }
            }
        }
    }
    Ok((&h + h.adjoint()) * c(0.5, 0.0))
}

fn min_eigenvalue(h: &DMatrix<Complex64>) -> f64 {
    h.clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

pub fn positivity_check(
    b: &FormMatrix<Complex64>,
    gram: &DMatrix<Complex64>,
    mode: Mode,
    tol: f64,
) -> Result<Verdict> {
    let h = hermitian_curvature_matrix(b, gram, mode)?;
    let min_value = min_eigenvalue(&h);
    Ok(Verdict {
        positive: min_value >= -tol,
        min_value,
    })
}

/// Positivity of `ℵΘ` for the bundle at the geometry's basepoint.
pub fn bundle_positivity(geo: &BundleGeometry, mode: Mode) -> Result<Verdict> {
    let b = geo.curvature().scale(ALEPH);
    let vals = FormMatrix::from_entries(b.rank(), b.entries().iter().map(values).collect())?;
    positivity_check(&vals, &geo.metric().value_matrix(), mode, PSD_TOL)
}

/// Factors `f_ℓ` with `B = Σ f_ℓ f_ℓ†`, from the eigendecomposition.
pub fn psd_factor(b: &DMatrix<Complex64>, tol: f64) -> Result<Vec<DVector<Complex64>>> {
    let herm = (b - b.adjoint()).iter().map(|x| x.norm()).fold(0.0, f64::max);
    let scale = b.iter().map(|x| x.norm()).fold(1.0, f64::max);
    if herm > tol * scale {
        return Err(Error::NotHermitian(herm));
    }
    let eig = b.clone().symmetric_eigen();
    let mut out = Vec::new();
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda < -tol * scale {
            return Err(Error::NegativeEigenvalue(lambda));
        }
        if lambda > tol * scale {
            out.push(eig.eigenvectors.column(k).into_owned() * c(lambda.sqrt(), 0.0));
        }
    }
    Ok(out)
}

/// The positive volume form `Π_j (i dz_j ∧ dz̄_j)`.
fn volume(gens: GeneratorSet) -> Multivector<Complex64> {
    let mut v = Multivector::one(gens);
    for j in 0..gens.n() {
        v = &v * &Multivector::word(gens, &[gens.dz(j), gens.dzb(j)], c(0.0, 1.0));
    }
    v
}

/// Random decomposable `(q,0)`-form.
fn random_decomposable<R: Rng>(rng: &mut R, gens: GeneratorSet, q: usize) -> Multivector<Complex64> {
    let mut a = Multivector::one(gens);
    for _ in 0..q {
        let mut terms = Vec::new();
        for i in 0..gens.n() {
            terms.push((
                1u64 << gens.dz(i),
                c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
            ));
        }
        a = &a * &Multivector::from_terms(gens, terms);
    }
    a
}

/// Pairing values `ω ∧ i^{q²} α∧ᾱ / vol` with `q = n − r`, for random decomposable α.
pub fn positive_form_pairings(
    w: &Multivector<Complex64>,
    r: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<Complex64>> {
    check_bidegree(w, r as u32, r as u32)?;
    let g = w.gens();
    let n = g.n();
    if r > n {
        return Err(Error::Degree(format!("({r},{r}) exceeds dimension {n}")));
    }
    let q = n - r;
    let vol = volume(g);
    let top = g.holo_mask() | g.antiholo_mask();
    let vol_c = *vol.coefficient(top).expect("volume form is nonzero");
    let iq = c(0.0, 1.0).powi((q * q) as i32);
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(t as u64));
            let a = random_decomposable(&mut rng, g, q);
            let test = a.wedge(&a.conj_form()?)?.scale(iq);
            let top_form = w.wedge(&test)?;
            Ok(top_form.coefficient(top).copied().unwrap_or_default() / vol_c)
        })
        .collect()
}

/// Probabilistic positivity of a pure `(r,r)`-form.
pub fn positive_form_test(
    w: &Multivector<Complex64>,
    r: usize,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<Verdict> {
    let vals = positive_form_pairings(w, r, trials, seed)?;
    let scale = vals.iter().map(|v| v.norm()).fold(1.0, f64::max);
    let min_value = vals.iter().map(|v| v.re).fold(f64::INFINITY, f64::min);
    let real = vals.iter().all(|v| v.im.abs() <= tol * scale);
    Ok(Verdict {
        positive: real && min_value >= -tol * scale,
        min_value,
    })
}

/// Hermitian matrix `h` of a (1,1)-form `ω = i Σ h_il dz_i ∧ dz̄_l`.
pub fn levi_matrix(w: &Multivector<Complex64>) -> Result<DMatrix<Complex64>> {
    check_bidegree(w, 1, 1)?;
    let n = w.gens().n();
    Ok(DMatrix::from_fn(n, n, |i, l| coeff_11(w, i, l) * c(0.0, -1.0)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanRow {
    pub k: usize,
    /// Smallest grid value that passed at every sampled point, if any.
    pub nu: Option<f64>,
    /// Smallest pairing of `−v_k + ν c_k(D_Q)` at that `ν` (or at the largest grid value).
    pub min_pairing: f64,
    pub points: usize,
}

/// For each `k`, the smallest `ν` on `grid` with `−v_k + ν c_k(D_Q)` positive at all `points`
/// where `|f| ≤ 1`.
pub fn w_positivity_scan(
    metric: &dyn MetricSource,
    section: &SectionModel,
    points: &[Vec<Complex64>],
    grid: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<ScanRow>> {
    let mut samples = Vec::new();
    for p in points {
        let s = SectionField::at(metric, section, p, 2)?;
        let norm2 = s.norm2().value().re;
        if norm2 > 1.0 || norm2 <= 0.0 {
            continue;
        }
        let ing = s.ingredients()?.values();
        samples.push((ing.form_v()?, ing.cq()?));
    }
    let m = section.rank();
    let n = points.first().map(|p| p.len()).unwrap_or(0);
    let mut rows = Vec::new();
    for k in 1..m.min(n + 1) {
        let mut found = None;
        let mut last_min = f64::NEG_INFINITY;
        for &nu in grid {
            let mut min_all = f64::INFINITY;
            let mut ok = true;
            for (idx, (v, cq)) in samples.iter().enumerate() {
                let form = &cq.component(k as u32).scale(c(nu, 0.0)) - &v.component(k as u32);
                let verdict =
                    positive_form_test(&form, k, trials, seed ^ ((idx as u64) << 20), PSD_TOL)?;
                ok &= verdict.positive;
                min_all = min_all.min(verdict.min_value);
            }
            last_min = min_all;
            if ok {
                found = Some(nu);
                break;
            }
        }
        rows.push(ScanRow {
            k,
            nu: found,
            min_pairing: last_min,
            points: samples.len(),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{MetricModel, RandomMetric};

    fn fs_geo(d: Vec<i32>, p: &[Complex64]) -> BundleGeometry {
        BundleGeometry::at(&MetricModel::FubiniStudy(d), p, 2).unwrap()
    }

    #[test]
    fn flat_is_positive_with_zero_eigenvalue() {
        let geo = BundleGeometry::at(&MetricModel::Trivial(2), &[c(0.1, 0.2), c(0.0, 0.3)], 2).unwrap();
        let v = bundle_positivity(&geo, Mode::BottChern).unwrap();
        assert!(v.positive);
        assert_eq!(v.min_value, 0.0);
    }

    #[test]
    fn fubini_study_sum_is_bott_chern_positive() {
        let geo = fs_geo(vec![1, 2], &[c(0.3, -0.2), c(0.5, 0.1)]);
        let v = bundle_positivity(&geo, Mode::BottChern).unwrap();
        assert!(v.positive && v.min_value > 0.0, "{v:?}");
    }

    #[test]
    fn bott_chern_is_dual_nakano() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..4 {
            let r = RandomMetric::sample(&mut rng, 2, 2, 2, 0.6);
            let p = [c(0.2, 0.1), c(-0.1, 0.3)];
            let geo = BundleGeometry::at(&MetricModel::Random(r.clone()), &p, 2).unwrap();
            // dual metric (G⁻¹)ᵀ in the dual frame
            let space = geo.space().clone();
            let inv = geo.gram_inv();
            let dual: Vec<_> = (0..4).map(|i| inv[(i % 2) * 2 + i / 2].clone()).collect();
            let dual_geo =
                crate::geometry::chern_connection(crate::geometry::MetricField::new(2, dual).unwrap())
                    .unwrap();
            assert!(std::sync::Arc::ptr_eq(dual_geo.space(), &space));
            let b = bundle_positivity(&geo, Mode::BottChern).unwrap();
            let hn = {
                let bm = dual_geo.curvature().scale(ALEPH);
                let vals = FormMatrix::from_entries(2, bm.entries().iter().map(values).collect()).unwrap();
                hermitian_curvature_matrix(&vals, &dual_geo.metric().value_matrix(), Mode::Nakano).unwrap()
            };
            let max_n = hn.symmetric_eigenvalues().iter().copied().fold(f64::NEG_INFINITY, f64::max);
            assert!((b.min_value + max_n).abs() < 1e-10, "{} {}", b.min_value, max_n);
        }
    }

    #[test]
    fn modes_agree_for_line_bundles_and_unitary_invariance() {
        let geo = BundleGeometry::at(
            &MetricModel::Diagonal(vec![crate::Expr::parse("exp(-z1*zb1 - 2*z2*zb2)").unwrap()]),
            &[c(0.3, 0.0), c(0.1, -0.4)],
            2,
        )
        .unwrap();
        let b = bundle_positivity(&geo, Mode::BottChern).unwrap();
        let n = bundle_positivity(&geo, Mode::Nakano).unwrap();
        assert!((b.min_value - n.min_value).abs() < 1e-14);
        assert!((b.min_value - 1.0 / (2.0 * std::f64::consts::PI)).abs() < 1e-12);
    }

    #[test]
    fn factorization_reassembles() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = DMatrix::from_fn(4, 4, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let b = &g * g.adjoint();
        let f = psd_factor(&b, 1e-12).unwrap();
        let mut re = DMatrix::zeros(4, 4);
        for v in &f {
            re += v * v.adjoint();
        }
        assert!((re - &b).iter().map(|x| x.norm()).fold(0.0, f64::max) < 1e-10);
        let v = DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 2.0)]);
        let f = psd_factor(&(&v * v.adjoint()), 1e-12).unwrap();
        assert_eq!(f.len(), 1);
        assert!((f[0].dotc(&v).norm() - 5.0).abs() < 1e-12);
        let neg = DMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0, 0.0), c(-1.0, 0.0)]));
        assert!(matches!(psd_factor(&neg, 1e-12), Err(Error::NegativeEigenvalue(_))));
    }

    #[test]
    fn simple_forms() {
        let g = GeneratorSet::new(1, 1).unwrap();
        let w = Multivector::word(g, &[g.dz(0), g.dzb(0)], c(0.0, 1.0));
        assert!(positive_form_test(&w, 1, 20, 1, PSD_TOL).unwrap().positive);
        assert!(!positive_form_test(&-&w, 1, 20, 1, PSD_TOL).unwrap().positive);
        assert!(matches!(
            positive_form_test(&Multivector::generator(g, g.dz(0), c(1.0, 0.0)), 1, 5, 1, PSD_TOL),
            Err(Error::Degree(_))
        ));
    }

    #[test]
    fn chern_forms_of_positive_bundle_are_positive() {
        let geo = fs_geo(vec![1, 1], &[c(0.4, 0.1), c(-0.2, 0.3)]);
        let cd = values(&geo.chern_form().unwrap());
        for k in 1..=2 {
            let v = positive_form_test(&cd.component(k), k as usize, 50, 9, PSD_TOL).unwrap();
            assert!(v.positive, "c_{k}: {v:?}");
        }
        let h = levi_matrix(&cd.component(1)).unwrap();
        assert!(min_eigenvalue(&h) > 0.0);
    }
}
