//! Zero-mean Gaussian states in the covariance-matrix picture.
//!
//! Conventions: quadratures are ordered `(x1, p1, ..., xn, pn)` and scaled so
//! that the vacuum covariance matrix is the identity. A thermal mode with mean
//! photon number `N` then has covariance `(2N + 1) I`, every physical state has
//! symplectic eigenvalues `>= 1`, and the von Neumann entropy in bits is
//! `sum_k g((nu_k - 1) / 2)`.

use std::collections::HashSet;
use std::fmt;

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{check_nonnegative, Error, Result};

/// Symmetry tolerance for covariance matrices, relative to the largest entry.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Smallest symplectic eigenvalue accepted as physical is `1 - PHYSICAL_TOL`.
pub const PHYSICAL_TOL: f64 = 1e-9;
/// Tolerance for pairing the doubled spectrum of `i Omega sigma`.
pub const PAIRING_TOL: f64 = 1e-9;

const G_ZERO_CUTOFF: f64 = 1e-12;
const G_ASYMPTOTIC_CUTOFF: f64 = 1e15;

/// Entropy in bits of a thermal mode with mean photon number `x`:
/// `g(x) = (x + 1) log2(x + 1) - x log2(x)`.
pub fn entropy_g(x: f64) -> Result<f64> {
    check_nonnegative("mean photon number", x)?;
    Ok(g_unchecked(x))
}

pub(crate) fn g_unchecked(x: f64) -> f64 {
    if x < G_ZERO_CUTOFF {
        0.0
    } else if x > G_ASYMPTOTIC_CUTOFF {
        x.log2() + std::f64::consts::LOG2_E + 1.0 / (2.0 * x * std::f64::consts::LN_2)
    } else {
        // log2(1 + x) + x log2(1 + 1/x), free of the large cancellation in the
        // textbook form.
        x.ln_1p() / std::f64::consts::LN_2 + x * (1.0 / x).ln_1p() / std::f64::consts::LN_2
    }
}

/// Opaque identifier of a bosonic mode.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeLabel(String);

impl ModeLabel {
    pub fn new(name: impl Into<String>) -> Self {
        ModeLabel(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ModeLabel {
    fn from(s: &str) -> Self {
        ModeLabel(s.to_owned())
    }
}

impl From<String> for ModeLabel {
    fn from(s: String) -> Self {
        ModeLabel(s)
    }
}

/// Standard symplectic form, block diagonal `[[0, 1], [-1, 0]]` per mode.
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    omega
}

/// A Gaussian state given by its first and second quadrature moments.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceState {
    labels: Vec<ModeLabel>,
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl CovarianceState {
    /// Validating constructor: checks dimensions, label uniqueness, symmetry
    /// and the uncertainty relation.
    pub fn new(labels: Vec<ModeLabel>, mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let dim = 2 * labels.len();
        if labels.is_empty() {
            return Err(Error::EmptySubset);
        }
        if mean.len() != dim {
            return Err(Error::Dimension { expected: dim, found: mean.len() });
        }
        if cov.nrows() != dim || cov.ncols() != dim {
            return Err(Error::Dimension { expected: dim, found: cov.nrows().max(cov.ncols()) });
        }
        check_unique(&labels)?;
        let scale = cov.amax().max(1.0);
        let asym = (&cov - cov.transpose()).amax();
        if asym > SYMMETRY_TOL * scale {
            return Err(Error::Asymmetric(asym));
        }
        let state = CovarianceState { labels, mean, cov };
        let nu = state.symplectic_eigenvalues()?;
        let nu_min = nu.last().copied().unwrap_or(1.0);
        if nu_min < 1.0 - PHYSICAL_TOL {
            return Err(Error::Unphysical(nu_min));
        }
        Ok(state)
    }

    fn from_parts(labels: Vec<ModeLabel>, mean: DVector<f64>, cov: DMatrix<f64>) -> Self {
        CovarianceState { labels, mean, cov }
    }

    /// Vacuum on the given modes.
    pub fn vacuum(labels: Vec<ModeLabel>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::EmptySubset);
        }
        check_unique(&labels)?;
        let dim = 2 * labels.len();
        Ok(Self::from_parts(labels, DVector::zeros(dim), DMatrix::identity(dim, dim)))
    }

    pub fn labels(&self) -> &[ModeLabel] {
        &self.labels
    }

    pub fn n_modes(&self) -> usize {
        self.labels.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn index_of(&self, label: &ModeLabel) -> Result<usize> {
        self.labels.iter().position(|l| l == label).ok_or_else(|| Error::UnknownMode(label.to_string()))
    }

    /// Tensor product with another state on disjoint labels.
    pub fn tensor(&self, other: &CovarianceState) -> Result<Self> {
        let mut labels = self.labels.clone();
        labels.extend(other.labels.iter().cloned());
        check_unique(&labels)?;
        let (d1, d2) = (self.cov.nrows(), other.cov.nrows());
        let mut cov = DMatrix::zeros(d1 + d2, d1 + d2);
        cov.view_mut((0, 0), (d1, d1)).copy_from(&self.cov);
        cov.view_mut((d1, d1), (d2, d2)).copy_from(&other.cov);
        let mean = DVector::from_iterator(d1 + d2, self.mean.iter().chain(other.mean.iter()).copied());
        Ok(Self::from_parts(labels, mean, cov))
    }

    /// Replace the labels one-for-one, keeping the matrix untouched.
    pub fn relabel(&self, labels: Vec<ModeLabel>) -> Result<Self> {
        if labels.len() != self.labels.len() {
            return Err(Error::Dimension { expected: self.labels.len(), found: labels.len() });
        }
        check_unique(&labels)?;
        Ok(Self::from_parts(labels, self.mean.clone(), self.cov.clone()))
    }

    /// `cov <- S cov S^T`, `mean <- S mean`.
    pub fn apply(&self, t: &SymplecticTransform) -> Result<Self> {
        let s = &t.matrix;
        if s.nrows() != self.cov.nrows() {
            return Err(Error::Dimension { expected: self.cov.nrows(), found: s.nrows() });
        }
        let cov = s * &self.cov * s.transpose();
        let cov = (&cov + cov.transpose()) * 0.5;
        let mean = s * &self.mean;
        Ok(Self::from_parts(self.labels.clone(), mean, cov))
    }

    /// Partial trace onto `keep`; the result lists modes in the order given.
    pub fn reduce(&self, keep: &[ModeLabel]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::EmptySubset);
        }
        check_unique(keep)?;
        let idx = keep.iter().map(|l| self.index_of(l)).collect::<Result<Vec<_>>>()?;
        let quad: Vec<usize> = idx.iter().flat_map(|&i| [2 * i, 2 * i + 1]).collect();
        let d = quad.len();
        let cov = DMatrix::from_fn(d, d, |r, c| self.cov[(quad[r], quad[c])]);
        let mean = DVector::from_fn(d, |r, _| self.mean[quad[r]]);
        Ok(Self::from_parts(keep.to_vec(), mean, cov))
    }

    /// Symplectic eigenvalues, one per mode, sorted descending.
    ///
    /// These are the moduli of the eigenvalues of `i Omega sigma`. They are
    /// obtained from the real symmetric matrix `A^T A` with
    /// `A = sigma^{1/2} Omega sigma^{1/2}`, whose spectrum is `nu_k^2`, each
    /// twice.
    pub fn symplectic_eigenvalues(&self) -> Result<Vec<f64>> {
        let n = self.n_modes();
        let eig = self.cov.clone().symmetric_eigen();
        if let Some(&lo) = eig.eigenvalues.iter().min_by(|a, b| a.total_cmp(b)) {
            if lo <= 0.0 {
                return Err(Error::Unphysical(lo.max(0.0).sqrt()));
            }
        }
        let sqrt_d = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
        let root = &eig.eigenvectors * sqrt_d * eig.eigenvectors.transpose();
        let a = &root * symplectic_form(n) * &root;
        // i*A is Hermitian with eigenvalues +-nu; solving it directly avoids
        // squaring the condition number as A^T A would.
        let ia = DMatrix::from_fn(2 * n, 2 * n, |r, c| Complex::new(0.0, 0.5 * (a[(r, c)] - a[(c, r)])));
        let mut nu: Vec<f64> = ia.symmetric_eigenvalues().iter().map(|v| v.abs()).collect();
        nu.sort_by(|a, b| b.total_cmp(a));
        let mut paired = Vec::with_capacity(n);
        for pair in nu.chunks(2) {
            let gap = (pair[0] - pair[1]).abs();
            if gap > PAIRING_TOL * pair[0].max(1.0) {
                return Err(Error::NumericalDegeneracy(gap));
            }
            paired.push(0.5 * (pair[0] + pair[1]));
        }
        Ok(paired)
    }

    /// Von Neumann entropy in bits.
    pub fn von_neumann_entropy(&self) -> Result<f64> {
        let nu = self.symplectic_eigenvalues()?;
        Ok(nu.iter().map(|&v| g_unchecked(((v - 1.0) / 2.0).max(0.0))).sum())
    }

    /// Entropy of the marginal on `modes`; zero for the empty set.
    pub fn entropy_of(&self, modes: &[ModeLabel]) -> Result<f64> {
        if modes.is_empty() {
            return Ok(0.0);
        }
        self.reduce(modes)?.von_neumann_entropy()
    }

    /// `H(S1 | S2) = H(S1 S2) - H(S2)`. May be negative.
    pub fn conditional_entropy(&self, s1: &[ModeLabel], s2: &[ModeLabel]) -> Result<f64> {
        if s1.is_empty() {
            return Err(Error::EmptySubset);
        }
        if let Some(l) = s1.iter().find(|l| s2.contains(l)) {
            return Err(Error::Overlap(l.to_string()));
        }
        let joint: Vec<ModeLabel> = s1.iter().chain(s2.iter()).cloned().collect();
        Ok(self.entropy_of(&joint)? - self.entropy_of(s2)?)
    }

    /// Mean photon number of a single mode: `(tr sigma_k / 2 - 1) / 2`.
    pub fn mean_photon_number(&self, label: &ModeLabel) -> Result<f64> {
        let i = self.index_of(label)?;
        let tr = self.cov[(2 * i, 2 * i)] + self.cov[(2 * i + 1, 2 * i + 1)];
        Ok((tr / 2.0 - 1.0) / 2.0)
    }
}

fn check_unique(labels: &[ModeLabel]) -> Result<()> {
    let mut seen = HashSet::with_capacity(labels.len());
    for l in labels {
        if !seen.insert(l) {
            return Err(Error::DuplicateMode(l.to_string()));
        }
    }
    Ok(())
}

/// Two-mode squeezed vacuum with mean photon number `ns` per arm.
pub fn tmsv(ns: f64, a: ModeLabel, b: ModeLabel) -> Result<CovarianceState> {
    check_nonnegative("N_S", ns)?;
    if a == b {
        return Err(Error::DuplicateMode(a.to_string()));
    }
    let diag = 2.0 * ns + 1.0;
    let off = 2.0 * (ns * (ns + 1.0)).sqrt();
    let mut cov = DMatrix::identity(4, 4) * diag;
    cov[(0, 2)] = off;
    cov[(2, 0)] = off;
    cov[(1, 3)] = -off;
    cov[(3, 1)] = -off;
    Ok(CovarianceState::from_parts(vec![a, b], DVector::zeros(4), cov))
}

/// Single-mode thermal state.
pub fn thermal_state(n_bar: f64, label: ModeLabel) -> Result<CovarianceState> {
    check_nonnegative("mean photon number", n_bar)?;
    Ok(CovarianceState::from_parts(vec![label], DVector::zeros(2), DMatrix::identity(2, 2) * (2.0 * n_bar + 1.0)))
}

/// A real symplectic matrix acting on the quadrature vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticTransform {
    matrix: DMatrix<f64>,
}

impl SymplecticTransform {
    /// Accepts `matrix` if `S Omega S^T = Omega` within 1e-12.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || !matrix.nrows().is_multiple_of(2) {
            return Err(Error::Dimension { expected: matrix.nrows() + matrix.nrows() % 2, found: matrix.ncols() });
        }
        let t = SymplecticTransform { matrix };
        let dev = t.symplectic_defect();
        if dev > 1e-12 {
            return Err(Error::InvalidChannel(format!("matrix is not symplectic (defect {dev:e})")));
        }
        Ok(t)
    }

    pub fn identity(n_modes: usize) -> Self {
        SymplecticTransform { matrix: DMatrix::identity(2 * n_modes, 2 * n_modes) }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn n_modes(&self) -> usize {
        self.matrix.nrows() / 2
    }

    /// `max |S Omega S^T - Omega|`.
    pub fn symplectic_defect(&self) -> f64 {
        let omega = symplectic_form(self.n_modes());
        (&self.matrix * &omega * self.matrix.transpose() - omega).amax()
    }

    /// The transform that applies `self` first, then `next`.
    pub fn then(&self, next: &SymplecticTransform) -> Result<Self> {
        if self.matrix.nrows() != next.matrix.nrows() {
            return Err(Error::Dimension { expected: self.matrix.nrows(), found: next.matrix.nrows() });
        }
        Ok(SymplecticTransform { matrix: &next.matrix * &self.matrix })
    }
}

/// Beam splitter of transmittance `eta` between modes `mode_a` and `mode_b`
/// of an `n_modes` system:
///
/// ```text
/// a -> sqrt(eta) a + sqrt(1 - eta) b
/// b -> -sqrt(1 - eta) a + sqrt(eta) b
/// ```
pub fn beam_splitter(eta: f64, mode_a: usize, mode_b: usize, n_modes: usize) -> Result<SymplecticTransform> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::TransmittanceRange(eta));
    }
    for index in [mode_a, mode_b] {
        if index >= n_modes {
            return Err(Error::ModeIndex { index, n_modes });
        }
    }
    if mode_a == mode_b {
        return Err(Error::CoincidentModes(mode_a));
    }
    let (t, r) = (eta.sqrt(), (1.0 - eta).sqrt());
    let mut s = DMatrix::identity(2 * n_modes, 2 * n_modes);
    for q in 0..2 {
        let (ia, ib) = (2 * mode_a + q, 2 * mode_b + q);
        s[(ia, ia)] = t;
        s[(ia, ib)] = r;
        s[(ib, ia)] = -r;
        s[(ib, ib)] = t;
    }
    Ok(SymplecticTransform { matrix: s })
}
