//! Single-excitation model of an XY spin chain.
//!
//! The XY Hamiltonian conserves the number of up spins, so the dynamics of a
//! single excitation reduces to an `N x N` real symmetric "hopping" matrix
//! `H1`. Sites are indexed from zero: site `0` is whichever A-spin is
//! currently switched onto the chain and site `N - 1` is Bob.
//!
//! # Coupling conventions
//!
//! [`ChainSpec`] stores the hopping element that appears in `H1` directly.
//! The two common ways of writing the XY chain map onto it as follows:
//!
//! * `H = (J/2) sum (sx sx + sy sy)` has hopping element `J`
//!   ([`ChainSpec::from_half_xy`]).
//! * `H = J sum (sx sx + sy sy)` has hopping element `2 J`
//!   ([`ChainSpec::from_full_xy`]).
//!
//! A field term `B_n sz_n` contributes `2 B_n` to the diagonal once the
//! all-down ground energy is shifted to zero.
//!
//! Energies are in units of the hopping element and `hbar = 1`. The uniform
//! chain then has `E_k = 2 J cos(k pi / (N + 1))`; the opposite global sign is
//! sometimes quoted and leaves every transition probability unchanged.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{QstError, Result};

/// Orthogonality and reconstruction tolerance for [`SpectralData`].
pub const SPECTRAL_TOL: f64 = 1e-10;

const EIGEN_MAX_ITER: usize = 10_000;

/// One chain configuration: hopping elements between neighbours and on-site fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    couplings: Vec<f64>,
    fields: Vec<f64>,
}

impl ChainSpec {
    /// Builds a chain with `couplings.len() + 1` sites and zero fields.
    pub fn new(couplings: Vec<f64>) -> Result<Self> {
        let n = couplings.len() + 1;
        Self::with_fields(couplings, vec![0.0; n])
    }

    pub fn with_fields(couplings: Vec<f64>, fields: Vec<f64>) -> Result<Self> {
        let n = fields.len();
        if n < 2 {
            return Err(QstError::ChainTooShort(n));
        }
        if couplings.len() != n - 1 {
            return Err(QstError::LengthMismatch {
                what: "couplings",
                expected: n - 1,
                got: couplings.len(),
            });
        }
        for (index, &value) in couplings.iter().enumerate() {
            if !value.is_finite() {
                return Err(QstError::NonFinite("couplings"));
            }
            if value <= 0.0 {
                return Err(QstError::NonPositiveCoupling { index, value });
            }
        }
        if fields.iter().any(|b| !b.is_finite()) {
            return Err(QstError::NonFinite("fields"));
        }
        Ok(Self { couplings, fields })
    }

    /// Uniform chain of `n` sites with hopping element `j`.
    pub fn uniform(n: usize, j: f64) -> Result<Self> {
        if n < 2 {
            return Err(QstError::ChainTooShort(n));
        }
        Self::new(vec![j; n - 1])
    }

    /// Chain written as `sum (J_i / 2)(sx sx + sy sy)`.
    pub fn from_half_xy(couplings: &[f64]) -> Result<Self> {
        Self::new(couplings.to_vec())
    }

    /// Chain written as `sum J_i (sx sx + sy sy)`.
    pub fn from_full_xy(couplings: &[f64]) -> Result<Self> {
        Self::new(couplings.iter().map(|j| 2.0 * j).collect())
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    /// True when all couplings are equal and all fields vanish.
    pub fn is_uniform(&self) -> bool {
        let j0 = self.couplings[0];
        self.couplings.iter().all(|&j| j == j0) && self.fields.iter().all(|&b| b == 0.0)
    }

    /// Largest hopping element; sets the natural time scale of the chain.
    pub fn max_coupling(&self) -> f64 {
        self.couplings.iter().cloned().fold(f64::MIN, f64::max)
    }

    /// Same chain with every coupling and field multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::with_fields(
            self.couplings.iter().map(|j| j * s).collect(),
            self.fields.iter().map(|b| b * s).collect(),
        )
    }

    pub fn hamiltonian(&self) -> DMatrix<f64> {
        build_single_excitation_hamiltonian(self)
    }

    /// Spectral data, using the closed form for uniform chains.
    pub fn spectral(&self) -> Result<SpectralData> {
        if self.is_uniform() {
            Ok(SpectralData::uniform(self.len(), self.couplings[0]))
        } else {
            spectral_decompose(&self.hamiltonian())
        }
    }
}

/// `H1[n][n +- 1] = J`, `H1[n][n] = 2 B_n`, zero elsewhere.
pub fn build_single_excitation_hamiltonian(spec: &ChainSpec) -> DMatrix<f64> {
    let n = spec.len();
    let mut h = DMatrix::zeros(n, n);
    for (i, &j) in spec.couplings.iter().enumerate() {
        h[(i, i + 1)] = j;
        h[(i + 1, i)] = j;
    }
    for (i, &b) in spec.fields.iter().enumerate() {
        h[(i, i)] = 2.0 * b;
    }
    h
}

/// Eigenpairs of a single-excitation Hamiltonian, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SpectralData {
    eigenvalues: Vec<f64>,
    /// Columns are eigenvectors.
    eigenvectors: DMatrix<f64>,
}

impl SpectralData {
    /// Closed-form spectrum of the uniform chain with hopping `j`:
    /// `E_k = 2 j cos(k pi / (N + 1))`, `v_k(n) = sqrt(2 / (N + 1)) sin(pi k n / (N + 1))`.
    pub fn uniform(n: usize, j: f64) -> Self {
        let np1 = (n + 1) as f64;
        let norm = (2.0 / np1).sqrt();
        // k = N..1 gives ascending eigenvalues for j > 0
        let ks: Vec<usize> = (1..=n).rev().collect();
        let eigenvalues = ks
            .iter()
            .map(|&k| 2.0 * j * (k as f64 * PI / np1).cos())
            .collect();
        let eigenvectors = DMatrix::from_fn(n, n, |site, col| {
            let k = ks[col] as f64;
            norm * (PI * k * (site + 1) as f64 / np1).sin()
        });
        Self {
            eigenvalues,
            eigenvectors,
        }
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    /// `max |V^T V - I|`.
    pub fn orthogonality_error(&self) -> f64 {
        let v = &self.eigenvectors;
        let g = v.transpose() * v - DMatrix::identity(self.dim(), self.dim());
        g.amax()
    }

    /// `max |H V_k - E_k V_k|` over all eigenpairs.
    pub fn residual(&self, h: &DMatrix<f64>) -> f64 {
        let hv = h * &self.eigenvectors;
        let mut worst = 0.0f64;
        for (k, &e) in self.eigenvalues.iter().enumerate() {
            let r = hv.column(k) - self.eigenvectors.column(k) * e;
            worst = worst.max(r.amax());
        }
        worst
    }

    /// `V diag(E) V^T`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.eigenvalues));
        &self.eigenvectors * d * self.eigenvectors.transpose()
    }

    /// Phase factors `e^{-i E_k t}`.
    fn phases(&self, t: f64) -> Vec<Complex64> {
        self.eigenvalues
            .iter()
            .map(|&e| Complex64::from_polar(1.0, -e * t))
            .collect()
    }

    /// Full propagator `exp(-i H1 t)`.
    pub fn propagator(&self, t: f64) -> DMatrix<Complex64> {
        let n = self.dim();
        let phases = self.phases(t);
        let v = &self.eigenvectors;
        DMatrix::from_fn(n, n, |m, k| {
            (0..n)
                .map(|q| phases[q] * (v[(m, q)] * v[(k, q)]))
                .sum::<Complex64>()
        })
    }

    /// Applies `exp(-i H1 t)` to a state vector over the chain sites.
    pub fn evolve_vector(&self, psi: &[Complex64], t: f64) -> Vec<Complex64> {
        let n = self.dim();
        assert_eq!(psi.len(), n, "state length must match chain length");
        if t == 0.0 {
            return psi.to_vec();
        }
        let v = &self.eigenvectors;
        let phases = self.phases(t);
        let coeffs: Vec<Complex64> = (0..n)
            .map(|q| phases[q] * (0..n).map(|s| psi[s] * v[(s, q)]).sum::<Complex64>())
            .collect();
        (0..n)
            .map(|m| (0..n).map(|q| coeffs[q] * v[(m, q)]).sum())
            .collect()
    }
}

/// Symmetric eigendecomposition of `h1`.
pub fn spectral_decompose(h1: &DMatrix<f64>) -> Result<SpectralData> {
    let n = h1.nrows();
    if n != h1.ncols() {
        return Err(QstError::LengthMismatch {
            what: "matrix columns",
            expected: n,
            got: h1.ncols(),
        });
    }
    if h1.iter().any(|x| !x.is_finite()) {
        return Err(QstError::NonFinite("hamiltonian"));
    }
    let asym = (h1 - h1.transpose()).amax();
    if asym > SPECTRAL_TOL * h1.amax().max(1.0) {
        return Err(QstError::NotSymmetric(asym));
    }
    let eig =
        SymmetricEigen::try_new(h1.clone(), f64::EPSILON, EIGEN_MAX_ITER).ok_or_else(|| {
            QstError::Eigensolver(format!(
                "no convergence after {EIGEN_MAX_ITER} iterations on {n}x{n} matrix"
            ))
        })?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    let sd = SpectralData {
        eigenvalues,
        eigenvectors,
    };

    let scale = h1.amax().max(1.0);
    let orth = sd.orthogonality_error();
    let res = sd.residual(h1);
    if orth > SPECTRAL_TOL || res > SPECTRAL_TOL * scale {
        return Err(QstError::Eigensolver(format!(
            "inaccurate eigenpairs: orthogonality {orth:.3e}, residual {res:.3e}"
        )));
    }
    Ok(sd)
}

/// Transition amplitude `<m| exp(-i H1 t) |n>` via the spectral sum.
///
/// Panics if `m` or `n` is out of range.
pub fn propagator_amplitude(sd: &SpectralData, m: usize, n: usize, t: f64) -> Complex64 {
    let v = &sd.eigenvectors;
    assert!(m < sd.dim() && n < sd.dim(), "site index out of range");
    sd.eigenvalues
        .iter()
        .enumerate()
        .map(|(k, &e)| Complex64::from_polar(v[(m, k)] * v[(n, k)], -e * t))
        .sum()
}

/// End-to-end amplitude of the uniform chain evaluated directly from the
/// closed-form sum `2/(N+1) sum_k sin(pi k/(N+1)) sin(pi k N/(N+1)) e^{-i E_k t}`.
pub fn uniform_end_to_end_amplitude(n: usize, j: f64, t: f64) -> Complex64 {
    let np1 = (n + 1) as f64;
    (1..=n)
        .map(|k| {
            let k = k as f64;
            let w = (PI * k / np1).sin() * (PI * k * n as f64 / np1).sin();
            let e = 2.0 * j * (k * PI / np1).cos();
            Complex64::from_polar(w, -e * t)
        })
        .sum::<Complex64>()
        * (2.0 / np1)
}

/// Random-coupling ensemble: couplings uniform in `[J0 (1 - d), J0 (1 + d)]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisorderModel {
    pub base_coupling: f64,
    pub spread: f64,
    pub seed: u64,
}

impl DisorderModel {
    pub fn new(base_coupling: f64, spread: f64, seed: u64) -> Result<Self> {
        if !(0.0..1.0).contains(&spread) {
            return Err(QstError::InvalidSpread(spread));
        }
        if !(base_coupling.is_finite() && base_coupling > 0.0) {
            return Err(QstError::NonPositiveCoupling {
                index: 0,
                value: base_coupling,
            });
        }
        Ok(Self {
            base_coupling,
            spread,
            seed,
        })
    }

    pub fn sample(&self, n: usize) -> Result<ChainSpec> {
        sample_random_chain(self, n)
    }
}

pub fn sample_random_chain(dm: &DisorderModel, n: usize) -> Result<ChainSpec> {
    if !(0.0..1.0).contains(&dm.spread) {
        return Err(QstError::InvalidSpread(dm.spread));
    }
    if n < 2 {
        return Err(QstError::ChainTooShort(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(dm.seed);
    let couplings = (0..n - 1)
        .map(|_| {
            let u: f64 = rng.gen();
            dm.base_coupling * (1.0 + dm.spread * (2.0 * u - 1.0))
        })
        .collect();
    ChainSpec::new(couplings)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn two_site_matrix() {
        let h = ChainSpec::uniform(2, 1.0).unwrap().hamiltonian();
        assert_eq!(h, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
    }

    #[test]
    fn three_site_matrix_with_field() {
        let spec = ChainSpec::with_fields(vec![1.0, 1.0], vec![0.5, 0.0, 0.0]).unwrap();
        let h = spec.hamiltonian();
        let expected =
            DMatrix::from_row_slice(3, 3, &[1.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
        assert_eq!(h, expected);

        let h0 = ChainSpec::uniform(3, 1.0).unwrap().hamiltonian();
        let expected0 =
            DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
        assert_eq!(h0, expected0);
    }

    #[test]
    fn rejects_bad_specs() {
        assert_eq!(ChainSpec::uniform(1, 1.0), Err(QstError::ChainTooShort(1)));
        assert!(matches!(
            ChainSpec::new(vec![1.0, 0.0]),
            Err(QstError::NonPositiveCoupling { index: 1, .. })
        ));
        assert!(matches!(
            ChainSpec::new(vec![1.0, -2.0]),
            Err(QstError::NonPositiveCoupling { .. })
        ));
        assert!(matches!(
            ChainSpec::with_fields(vec![1.0], vec![0.0; 3]),
            Err(QstError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn conversion_conventions() {
        let half = ChainSpec::from_half_xy(&[3.0, 3.0]).unwrap();
        let full = ChainSpec::from_full_xy(&[1.5, 1.5]).unwrap();
        assert_eq!(half, full);
    }

    #[test]
    fn small_uniform_spectra() {
        let sd = spectral_decompose(&ChainSpec::uniform(2, 1.0).unwrap().hamiltonian()).unwrap();
        assert_close(sd.eigenvalues()[0], -1.0, 1e-12);
        assert_close(sd.eigenvalues()[1], 1.0, 1e-12);

        let sd = spectral_decompose(&ChainSpec::uniform(3, 1.0).unwrap().hamiltonian()).unwrap();
        let r2 = 2f64.sqrt();
        for (e, want) in sd.eigenvalues().iter().zip([-r2, 0.0, r2]) {
            assert_close(*e, want, 1e-12);
        }
    }

    #[test]
    fn closed_form_matches_eigensolver() {
        for n in 2..=20 {
            let spec = ChainSpec::uniform(n, 0.7).unwrap();
            let h = spec.hamiltonian();
            let numeric = spectral_decompose(&h).unwrap();
            let exact = SpectralData::uniform(n, 0.7);
            assert!(exact.orthogonality_error() < SPECTRAL_TOL);
            assert!(exact.residual(&h) < SPECTRAL_TOL);
            for (a, b) in numeric.eigenvalues().iter().zip(exact.eigenvalues()) {
                assert_close(*a, *b, 1e-10);
            }
            // non-degenerate spectrum: eigenvectors agree up to sign
            for k in 0..n {
                let dot: f64 = numeric
                    .eigenvectors()
                    .column(k)
                    .dot(&exact.eigenvectors().column(k));
                assert_close(dot.abs(), 1.0, 1e-10);
            }
        }
    }

    #[test]
    fn reconstruction() {
        let dm = DisorderModel::new(1.0, 0.4, 11).unwrap();
        let spec = ChainSpec::with_fields(
            dm.sample(7).unwrap().couplings().to_vec(),
            vec![0.1, 0.0, 0.3, 0.0, 0.0, 0.2, 0.05],
        )
        .unwrap();
        let h = spec.hamiltonian();
        let sd = spectral_decompose(&h).unwrap();
        assert!((sd.reconstruct() - &h).amax() < SPECTRAL_TOL);
        assert!(sd.orthogonality_error() < SPECTRAL_TOL);
    }

    #[test]
    fn rejects_asymmetric() {
        let h = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.5, 0.0]);
        assert!(matches!(
            spectral_decompose(&h),
            Err(QstError::NotSymmetric(_))
        ));
    }

    #[test]
    fn propagator_at_zero_is_identity() {
        let sd = ChainSpec::uniform(5, 1.3).unwrap().spectral().unwrap();
        for m in 0..5 {
            for n in 0..5 {
                let f = propagator_amplitude(&sd, m, n, 0.0);
                let want = if m == n { 1.0 } else { 0.0 };
                assert_close(f.re, want, 1e-12);
                assert_close(f.im, 0.0, 1e-12);
            }
        }
    }

    #[test]
    fn two_and_three_site_perfect_transfer() {
        let sd = ChainSpec::uniform(2, 1.0).unwrap().spectral().unwrap();
        let f = propagator_amplitude(&sd, 1, 0, PI / 2.0);
        assert_close(f.norm(), 1.0, 1e-12);
        // -i sin(J t)
        let t = 0.37;
        let f = propagator_amplitude(&sd, 1, 0, t);
        assert_close(f.re, 0.0, 1e-12);
        assert_close(f.im, -t.sin(), 1e-12);

        let sd = ChainSpec::uniform(3, 1.0).unwrap().spectral().unwrap();
        let f = propagator_amplitude(&sd, 2, 0, PI / 2f64.sqrt());
        assert_close(f.norm(), 1.0, 1e-12);
    }

    #[test]
    fn closed_form_end_to_end() {
        for n in 2..=20 {
            let sd = ChainSpec::uniform(n, 1.7).unwrap().spectral().unwrap();
            let numeric =
                spectral_decompose(&ChainSpec::uniform(n, 1.7).unwrap().hamiltonian()).unwrap();
            for i in 0..25 {
                let t = -3.0 + 0.61 * i as f64;
                let exact = uniform_end_to_end_amplitude(n, 1.7, t);
                assert!((propagator_amplitude(&sd, n - 1, 0, t) - exact).norm() < 1e-10);
                assert!((propagator_amplitude(&numeric, n - 1, 0, t) - exact).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn evolve_vector_matches_propagator() {
        let spec = DisorderModel::new(1.0, 0.3, 5).unwrap().sample(6).unwrap();
        let sd = spec.spectral().unwrap();
        let psi: Vec<Complex64> = (0..6)
            .map(|i| Complex64::new(0.1 * i as f64, 0.05 * (i * i) as f64))
            .collect();
        let u = sd.propagator(2.3);
        let direct = sd.evolve_vector(&psi, 2.3);
        for m in 0..6 {
            let want: Complex64 = (0..6).map(|n| u[(m, n)] * psi[n]).sum();
            assert!((direct[m] - want).norm() < 1e-12);
        }
    }

    #[test]
    fn disorder_sampling() {
        let exact = DisorderModel::new(2.5, 0.0, 3).unwrap().sample(9).unwrap();
        assert!(exact.couplings().iter().all(|&j| j == 2.5));

        let dm = DisorderModel::new(1.0, 0.1, 42).unwrap();
        assert_eq!(dm.sample(12).unwrap(), dm.sample(12).unwrap());
        let other = DisorderModel::new(1.0, 0.1, 43).unwrap();
        assert_ne!(dm.sample(12).unwrap(), other.sample(12).unwrap());

        let big = dm.sample(10_001).unwrap();
        let lo = big.couplings().iter().cloned().fold(f64::MAX, f64::min);
        let hi = big.couplings().iter().cloned().fold(f64::MIN, f64::max);
        assert!(lo >= 0.9 && hi <= 1.1, "range [{lo}, {hi}]");
        // a uniform sample this large comes close to both edges
        assert!(lo < 0.901 && hi > 1.099);

        assert_eq!(
            DisorderModel::new(1.0, 1.0, 0),
            Err(QstError::InvalidSpread(1.0))
        );
    }
}
