//! Two-component Hamiltonian and its Foldy-Wouthuysen forms.
//!
//! Every function of `T'` goes through one symmetric eigendecomposition
//! `T' = Q diag(t) Q^T`, so `epsilon = sqrt(T')`, `sqrt(epsilon)` and the
//! transformation operator share a basis.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};

use super::grid::{Components, GridOperator};
use super::Coupling;
use crate::error::{Error, Result};

/// Eigenvalues below `-CLIP * ||T'||` are clipped to zero.
const CLIP: f64 = 1e-10;
/// Eigenvalues below `-REJECT * ||T'||` make `sqrt(T')` undefined.
const REJECT: f64 = 1e-6;
/// Default threshold on `||[T', Upsilon']||_F / ||T'||_F` for calling a
/// result exact.
pub const EXACTNESS_TOL: f64 = 1e-10;

/// Symmetric eigendecomposition of a real operator with a clipped spectrum,
/// eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Spectral {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

impl Spectral {
    pub fn of(a: &GridOperator) -> Result<Self> {
        if !a.is_real() || a.components != Components::Scalar {
            return Err(Error::DimensionMismatch("spectral functions need a real scalar operator".into()));
        }
        let eig = SymmetricEigen::new(a.re.clone());
        let norm = eig.eigenvalues.amax();
        let lowest = eig.eigenvalues.min();
        if lowest < -REJECT * norm {
            return Err(Error::NegativeSpectrum { lowest, norm });
        }
        let values = eig.eigenvalues.map(|v| if v < 0.0 && v >= -CLIP * norm { 0.0 } else { v });
        if values.min() < 0.0 {
            // between the clipping and rejection thresholds
            return Err(Error::NegativeSpectrum { lowest, norm });
        }
        // ascending order
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
        let vectors = DMatrix::from_fn(values.len(), values.len(), |i, j| eig.eigenvectors[(i, order[j])]);
        let values = DVector::from_fn(values.len(), |j, _| values[order[j]]);
        Ok(Self { values, vectors })
    }

    /// `Q diag(f(t)) Q^T`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let scaled = DMatrix::from_fn(self.vectors.nrows(), self.vectors.ncols(), |i, j| {
            self.vectors[(i, j)] * f(self.values[j])
        });
        scaled * self.vectors.transpose()
    }
}

/// `sqrt(A)` for symmetric positive semidefinite `A`.
pub fn sqrt_psd(a: &GridOperator) -> Result<GridOperator> {
    let s = Spectral::of(a)?;
    Ok(GridOperator::real(s.map(f64::sqrt), a.grid.clone()))
}

fn check_pair(t: &GridOperator, u: &GridOperator) -> Result<()> {
    if t.dim() != u.dim() || t.components != Components::Scalar || u.components != Components::Scalar {
        return Err(Error::DimensionMismatch(format!(
            "T' is {0}x{0}, Upsilon' is {1}x{1}; both must be scalar operators on the same grid",
            t.dim(),
            u.dim()
        )));
    }
    if !t.is_real() {
        return Err(Error::DimensionMismatch("T' must be real".into()));
    }
    Ok(())
}

/// `-i Upsilon'` lifted to both components.
fn rotation_term(u: &GridOperator) -> Result<GridOperator> {
    u.scale(0.0, -1.0).lift([[1.0, 0.0], [0.0, 1.0]])
}

/// `H' = rho_3 (N^2 + T')/(2N) + i rho_2 (-N^2 + T')/(2N) - i Upsilon'`.
pub fn hamiltonian_prime(t: &GridOperator, u: &GridOperator, coupling: &Coupling) -> Result<GridOperator> {
    check_pair(t, u)?;
    coupling.validate()?;
    let n = coupling.n_param;
    let id = DMatrix::<f64>::identity(t.dim(), t.dim());
    let a = GridOperator::real((&id * (n * n) + &t.re) / (2.0 * n), t.grid.clone());
    let b = GridOperator::real((&t.re - &id * (n * n)) / (2.0 * n), t.grid.clone());
    // i rho_2 = [[0, 1], [-1, 0]]
    a.lift([[1.0, 0.0], [0.0, -1.0]])?
        .add(&b.lift([[0.0, 1.0], [-1.0, 0.0]])?)?
        .add(&rotation_term(u)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FwMethod {
    /// `rho_3 sqrt(T') - i Upsilon'` with the exactness condition satisfied.
    Exact,
    /// Same form, but `[T', Upsilon']` exceeds the tolerance.
    ExactFormUnverified,
    /// Includes the double-commutator correction.
    Approximate,
}

impl FwMethod {
    pub fn name(self) -> &'static str {
        match self {
            FwMethod::Exact => "exact",
            FwMethod::ExactFormUnverified => "exact-form-unverified",
            FwMethod::Approximate => "approximate",
        }
    }
}

#[derive(Debug, Clone)]
pub struct FwResult {
    pub h_fw: GridOperator,
    /// `||[T', Upsilon']||_F / ||T'||_F` (stationary metrics).
    pub exactness_defect: f64,
    pub pseudo_hermiticity_defect: f64,
    /// Frobenius norm of the double-commutator correction (zero for the
    /// exact form).
    pub correction_norm: f64,
    pub method: FwMethod,
}

/// `||[T', Upsilon']||_F / ||T'||_F`.
pub fn exactness_defect(t: &GridOperator, u: &GridOperator) -> Result<f64> {
    check_pair(t, u)?;
    let norm = t.norm();
    if norm == 0.0 {
        return Ok(0.0);
    }
    Ok(t.commutator(u)?.norm() / norm)
}

fn assemble_fw(epsilon: &DMatrix<f64>, u: &GridOperator, correction: Option<GridOperator>) -> Result<GridOperator> {
    let eps = GridOperator::real(epsilon.clone(), u.grid.clone());
    let mut h = eps.lift([[1.0, 0.0], [0.0, -1.0]])?.add(&rotation_term(u)?)?;
    if let Some(c) = correction {
        h = h.sub(&c.lift([[1.0, 0.0], [0.0, 1.0]])?)?;
    }
    Ok(h)
}

/// Exact FW Hamiltonian `rho_3 sqrt(T') - i Upsilon'`. The method is
/// [`FwMethod::Exact`] only when the exactness defect is at most `tol`.
pub fn fw_exact(t: &GridOperator, u: &GridOperator, tol: f64) -> Result<FwResult> {
    fw_exact_with(&Spectral::of(t)?, t, u, tol)
}

pub(crate) fn fw_exact_with(spectral: &Spectral, t: &GridOperator, u: &GridOperator, tol: f64) -> Result<FwResult> {
    let defect = exactness_defect(t, u)?;
    let h_fw = assemble_fw(&spectral.map(f64::sqrt), u, None)?;
    Ok(FwResult {
        pseudo_hermiticity_defect: h_fw.pseudo_hermiticity_defect()?,
        h_fw,
        exactness_defect: defect,
        correction_norm: 0.0,
        method: if defect <= tol { FwMethod::Exact } else { FwMethod::ExactFormUnverified },
    })
}

/// Approximate FW Hamiltonian for stationary metrics:
/// `rho_3 eps - i Upsilon' - (1/(2 sqrt eps)) [sqrt eps, [sqrt eps, i Upsilon']] (1/sqrt eps)`.
///
/// In the eigenbasis of `T'` the correction is
/// `X_ab (s_a - s_b)^2 / (2 s_a s_b)` with `s = T'^(1/4)` and `X = i Upsilon'`.
pub fn fw_approximate(t: &GridOperator, u: &GridOperator) -> Result<FwResult> {
    let defect = exactness_defect(t, u)?;
    let spectral = Spectral::of(t)?;
    let q = &spectral.vectors;
    let s: Vec<f64> = spectral.values.iter().map(|v| v.sqrt().sqrt()).collect();
    let x = u.scale(0.0, 1.0);
    let weight = |a: usize, b: usize| {
        if s[a] == 0.0 || s[b] == 0.0 {
            0.0
        } else {
            (s[a] - s[b]).powi(2) / (2.0 * s[a] * s[b])
        }
    };
    let rotate = |m: &DMatrix<f64>| {
        let hat = q.transpose() * m * q;
        let w = DMatrix::from_fn(hat.nrows(), hat.ncols(), |a, b| hat[(a, b)] * weight(a, b));
        q * w * q.transpose()
    };
    let correction = GridOperator {
        re: rotate(&x.re),
        im: x.im.as_ref().map(rotate),
        components: Components::Scalar,
        grid: t.grid.clone(),
    };
    let correction_norm = correction.norm();
    let h_fw = assemble_fw(&spectral.map(f64::sqrt), u, Some(correction))?;
    Ok(FwResult {
        pseudo_hermiticity_defect: h_fw.pseudo_hermiticity_defect()?,
        h_fw,
        exactness_defect: defect,
        correction_norm,
        method: FwMethod::Approximate,
    })
}

#[derive(Debug, Clone)]
pub struct FwTransform {
    /// `U = (eps + N + rho_1 (eps - N)) / (2 sqrt(eps N))`.
    pub u: GridOperator,
    /// `rho_3 U^dagger rho_3`, which equals `U^-1`.
    pub u_inv: GridOperator,
    /// `||U^dagger rho_3 U - rho_3||_F / ||rho_3||_F`.
    pub pseudounitarity_defect: f64,
}

/// Pseudounitarity is accepted up to this relative defect.
const PSEUDOUNITARY_TOL: f64 = 1e-10;

pub fn fw_transform_operator(t: &GridOperator, coupling: &Coupling) -> Result<FwTransform> {
    coupling.validate()?;
    let spectral = Spectral::of(t)?;
    let n = coupling.n_param;
    if n < 0.0 {
        return Err(Error::Config("the transformation operator needs N > 0".into()));
    }
    if spectral.values.min() <= 0.0 {
        return Err(Error::NegativeSpectrum { lowest: spectral.values.min(), norm: spectral.values.amax() });
    }
    let diag = |sign: f64| {
        spectral.map(|v| {
            let e = v.sqrt();
            (e + sign * n) / (2.0 * (e * n).sqrt())
        })
    };
    let a = GridOperator::real(diag(1.0), t.grid.clone());
    let b = GridOperator::real(diag(-1.0), t.grid.clone());
    let u = a.lift([[1.0, 0.0], [0.0, 1.0]])?.add(&b.lift([[0.0, 1.0], [1.0, 0.0]])?)?;
    let rho3 = GridOperator::rho(3, &t.grid)?;
    let u_inv = rho3.matmul(&u.adjoint())?.matmul(&rho3)?;
    let defect = u.adjoint().matmul(&rho3)?.matmul(&u)?.sub(&rho3)?.norm() / rho3.norm();
    if defect > PSEUDOUNITARY_TOL {
        return Err(Error::ConvergenceFailure(format!("U is not rho_3-pseudounitary: defect {defect:e}")));
    }
    Ok(FwTransform { u, u_inv, pseudounitarity_defect: defect })
}

fn is_zero(m: &DMatrix<f64>) -> bool {
    m.iter().all(|v| *v == 0.0)
}

/// First moment of `|v|^2` over unknown index, used to order degenerate
/// eigenvalues deterministically.
fn moment(v: impl Iterator<Item = f64>) -> f64 {
    v.enumerate().map(|(i, a)| i as f64 * a).sum()
}

fn hermitian_spectrum(h: &GridOperator) -> Vec<(f64, f64)> {
    match &h.im {
        None => {
            let eig = SymmetricEigen::new(h.re.clone());
            (0..h.dim())
                .map(|j| (eig.eigenvalues[j], moment(eig.eigenvectors.column(j).iter().map(|x| x * x))))
                .collect()
        }
        Some(im) => {
            let z = DMatrix::from_fn(h.dim(), h.dim(), |i, j| Complex::new(h.re[(i, j)], im[(i, j)]));
            let eig = SymmetricEigen::new(z);
            (0..h.dim())
                .map(|j| (eig.eigenvalues[j], moment(eig.eigenvectors.column(j).iter().map(|x| x.norm_sqr()))))
                .collect()
        }
    }
}

fn sort_and_take(mut pairs: Vec<(f64, f64)>, k: usize) -> Vec<f64> {
    let scale = pairs.iter().fold(0.0f64, |m, p| m.max(p.0.abs())).max(f64::MIN_POSITIVE);
    pairs.sort_by(|a, b| {
        if (a.0 - b.0).abs() <= 1e-12 * scale {
            a.1.total_cmp(&b.1)
        } else {
            a.0.total_cmp(&b.0)
        }
    });
    pairs.into_iter().take(k).map(|p| p.0).collect()
}

/// The `k` lowest physical (positive-branch) eigenvalues, ascending.
///
/// Scalar operators are treated as Hermitian. Block-diagonal two-component
/// operators use their upper block. Anything else is diagonalized in full and
/// the eigenvalues with positive real part are kept.
pub fn spectrum(h: &GridOperator, k: usize) -> Result<Vec<f64>> {
    match h.components {
        Components::Scalar => Ok(sort_and_take(hermitian_spectrum(h), k)),
        Components::TwoComponent => {
            let upper = h.block(0, 0)?;
            let off = [h.block(0, 1)?, h.block(1, 0)?];
            let block_diagonal = off.iter().all(|b| is_zero(&b.re) && b.im.as_ref().is_none_or(is_zero));
            if block_diagonal && upper.hermiticity_defect() <= 1e-12 {
                return Ok(sort_and_take(hermitian_spectrum(&upper), k));
            }
            let values: Vec<Complex<f64>> = match &h.im {
                None => h.re.clone().complex_eigenvalues().iter().copied().collect(),
                Some(im) => {
                    let z = DMatrix::from_fn(h.dim(), h.dim(), |i, j| Complex::new(h.re[(i, j)], im[(i, j)]));
                    nalgebra::Schur::try_new(z, 1e-14, 10_000)
                        .and_then(|s| s.eigenvalues())
                        .ok_or_else(|| Error::ConvergenceFailure("complex Schur iteration did not converge".into()))?
                        .iter()
                        .copied()
                        .collect()
                }
            };
            let scale = values.iter().fold(0.0f64, |m, z| m.max(z.norm()));
            let mut positive: Vec<f64> = values.iter().filter(|z| z.re > 0.0).map(|z| z.re).collect();
            if let Some(z) = values.iter().find(|z| z.re > 0.0 && z.im.abs() > 1e-8 * scale) {
                return Err(Error::ConvergenceFailure(format!("complex physical eigenvalue {z}")));
            }
            positive.sort_by(f64::total_cmp);
            positive.truncate(k);
            Ok(positive)
        }
    }
}
