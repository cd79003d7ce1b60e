//! Complex Hermitian linear algebra and seeded random sampling.
//!
//! Everything downstream (correlation models, MMSE estimation, deterministic
//! equivalents) works with Hermitian positive semidefinite matrices, so this
//! module centralizes the validated wrappers: symmetrize-on-ingest, tagged PSD
//! checks, an eigendecomposition with a fixed ordering convention, and an
//! eigenvalue-clamping matrix square root. Random numbers come from counter
//! mode ChaCha streams so that equal `(seed, stream)` pairs reproduce bit
//! identical sequences on every platform and distinct streams are independent.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::linalg::SymmetricEigen;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rand::{Rng, SeedableRng, TryRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::{Error, Result};

/// Complex scalar used throughout the crate.
pub type C64 = Complex<f64>;
/// Dynamically sized complex matrix.
pub type CMat = DMatrix<C64>;
/// Dynamically sized complex column vector.
pub type CVec = DVector<C64>;

// ---------------------------------------------------------------------------
// Tolerances
// ---------------------------------------------------------------------------

/// Maximum absolute deviation from conjugate symmetry accepted when a matrix
/// is ingested as Hermitian. Inputs inside this band are symmetrized; anything
/// worse is rejected as a caller bug rather than rounding noise.
pub const HERMITIAN_INGEST_TOL: f64 = 1e-12;

/// Relative eigenvalue floor for the PSD tag: a Hermitian matrix passes the
/// check when every eigenvalue is at least `-PSD_TAG_REL * lambda_max`.
pub const PSD_TAG_REL: f64 = 1e-9;

/// Relative threshold below which [`psd_sqrt`] refuses the input instead of
/// clamping. Eigenvalues in `(-PSD_SQRT_REJECT_REL * lambda_max, 0)` are
/// treated as rounding dust and clamped to zero; anything more negative means
/// the matrix genuinely is not PSD.
pub const PSD_SQRT_REJECT_REL: f64 = 1e-6;

/// Relative reconstruction accuracy guaranteed by [`hermitian_eig`] and
/// [`psd_sqrt`] for the matrix sizes this crate targets (up to a few hundred
/// rows): `||V L V^H - A||_F <= RECONSTRUCT_REL * ||A||_F` and
/// `||S S - A||_F <= RECONSTRUCT_REL * ||A||_F`.
pub const RECONSTRUCT_REL: f64 = 1e-8;

/// Eigenvalues below `RANK_TRUNC_REL * lambda_max` are treated as exact zeros
/// by [`psd_sqrt`]. Rounding leaves O(1e-15 * n) dust on the spectrum of an
/// exactly rank-deficient matrix, and the square root amplifies dust to its
/// square root (1e-7 scale), which would leak into sampled vectors; truncation
/// changes `S S` by at most `RANK_TRUNC_REL * lambda_max`, far below the
/// reconstruction tolerance.
pub const RANK_TRUNC_REL: f64 = 1e-13;

// ---------------------------------------------------------------------------
// Hermitian ingestion
// ---------------------------------------------------------------------------

/// Returns the Hermitian part `(A + A^H) / 2` of a square matrix.
pub fn hermitian_part(a: &CMat) -> CMat {
    debug_assert_eq!(a.nrows(), a.ncols());
    let mut h = a.clone();
    for i in 0..a.nrows() {
        for j in 0..=i {
            let m = 0.5 * (a[(i, j)] + a[(j, i)].conj());
            h[(i, j)] = m;
            h[(j, i)] = m.conj();
        }
        h[(i, i)] = Complex::new(h[(i, i)].re, 0.0);
    }
    h
}

/// Largest absolute deviation of `a` from conjugate symmetry.
pub fn hermitian_deviation(a: &CMat) -> f64 {
    let mut dev: f64 = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            dev = dev.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    dev
}

/// A square complex matrix validated to be Hermitian, stored in exactly
/// symmetrized form, with an optional positive semidefiniteness tag.
///
/// The PSD tag is a recorded property, not an assumption: it is `false` until
/// [`Hermitian::verify_psd`] has run the eigenvalue check successfully.
#[derive(Clone, Debug)]
pub struct Hermitian {
    mat: CMat,
    psd_tagged: bool,
}

impl Hermitian {
    /// Validates conjugate symmetry to within [`HERMITIAN_INGEST_TOL`]
    /// (absolute), then stores the exactly symmetrized matrix.
    pub fn new(mat: CMat) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::InvalidInput(format!(
                "Hermitian matrix must be square, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let dev = hermitian_deviation(&mat);
        if dev > HERMITIAN_INGEST_TOL {
            return Err(Error::NotHermitian {
                deviation: dev,
                allowed: HERMITIAN_INGEST_TOL,
            });
        }
        Ok(Self {
            mat: hermitian_part(&mat),
            psd_tagged: false,
        })
    }

    /// Symmetrizes unconditionally. For matrices produced by closed-form
    /// expressions whose rounding dust can exceed the strict ingest tolerance;
    /// the deviation is still bounded by `tol` (absolute).
    pub fn symmetrized(mat: CMat, tol: f64) -> Result<Self> {
        let dev = hermitian_deviation(&mat);
        if dev > tol {
            return Err(Error::NotHermitian {
                deviation: dev,
                allowed: tol,
            });
        }
        Ok(Self {
            mat: hermitian_part(&mat),
            psd_tagged: false,
        })
    }

    /// Runs the eigenvalue PSD check (every eigenvalue at least
    /// `-PSD_TAG_REL * lambda_max`) and records the result in the tag.
    pub fn verify_psd(&mut self) -> Result<()> {
        let eig = hermitian_eig(&self.mat)?;
        let scale = eig.values[0].max(0.0);
        let min = eig.values[eig.values.len() - 1];
        if min < -PSD_TAG_REL * scale {
            self.psd_tagged = false;
            return Err(Error::NotPsd {
                min_eigenvalue: min,
                scale,
            });
        }
        self.psd_tagged = true;
        Ok(())
    }

    /// Whether [`verify_psd`](Self::verify_psd) has succeeded on this value.
    pub fn is_psd_tagged(&self) -> bool {
        self.psd_tagged
    }

    /// Borrows the symmetrized matrix.
    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    /// Consumes the wrapper, returning the symmetrized matrix.
    pub fn into_matrix(self) -> CMat {
        self.mat
    }
}

impl core::ops::Deref for Hermitian {
    type Target = CMat;

    fn deref(&self) -> &CMat {
        &self.mat
    }
}

// ---------------------------------------------------------------------------
// Eigendecomposition and matrix square root
// ---------------------------------------------------------------------------

/// Eigendecomposition of a Hermitian matrix: real eigenvalues in descending
/// order and the matching unitary eigenvector columns.
#[derive(Clone, Debug)]
pub struct EigH {
    /// Eigenvalues, largest first.
    pub values: DVector<f64>,
    /// Unitary matrix whose `k`-th column is the eigenvector of `values[k]`.
    pub vectors: CMat,
}

impl EigH {
    /// Rebuilds `V diag(values) V^H`.
    pub fn reconstruct(&self) -> CMat {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for k in 0..n {
            let s = Complex::new(self.values[k], 0.0);
            scaled.column_mut(k).scale_mut(s.re);
        }
        &scaled * self.vectors.adjoint()
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// The input is validated to conjugate symmetry within
/// [`HERMITIAN_INGEST_TOL`] and symmetrized before decomposing, so the
/// eigenvalues are exactly real. Eigenvalues come back sorted descending with
/// eigenvector columns permuted to match.
pub fn hermitian_eig(a: &CMat) -> Result<EigH> {
    if a.nrows() != a.ncols() {
        return Err(Error::InvalidInput(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let dev = hermitian_deviation(a);
    if dev > HERMITIAN_INGEST_TOL {
        return Err(Error::NotHermitian {
            deviation: dev,
            allowed: HERMITIAN_INGEST_TOL,
        });
    }
    let n = a.nrows();
    if n == 0 {
        return Ok(EigH {
            values: DVector::zeros(0),
            vectors: CMat::zeros(0, 0),
        });
    }
    let se = SymmetricEigen::new(hermitian_part(a));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        se.eigenvalues[j]
            .partial_cmp(&se.eigenvalues[i])
            .expect("eigenvalues are finite")
    });
    let values = DVector::from_fn(n, |k, _| se.eigenvalues[order[k]]);
    let mut vectors = CMat::zeros(n, n);
    for (k, &src) in order.iter().enumerate() {
        vectors.set_column(k, &se.eigenvectors.column(src));
    }
    Ok(EigH { values, vectors })
}

/// Hermitian PSD square root via eigendecomposition.
///
/// Eigenvalues in `(-PSD_SQRT_REJECT_REL * lambda_max, 0)` are clamped to
/// zero so that rank-deficient correlation matrices (exactly the interesting
/// case for null-space designs) pass through cleanly. A more negative
/// eigenvalue is a genuine PSD violation and is rejected.
pub fn psd_sqrt(a: &CMat) -> Result<CMat> {
    let eig = hermitian_eig(a)?;
    let n = eig.values.len();
    if n == 0 {
        return Ok(CMat::zeros(0, 0));
    }
    let lambda_max = eig.values[0];
    if lambda_max < 0.0 {
        return Err(Error::NotPsd {
            min_eigenvalue: eig.values[n - 1],
            scale: lambda_max,
        });
    }
    let floor = -PSD_SQRT_REJECT_REL * lambda_max;
    let trunc = RANK_TRUNC_REL * lambda_max;
    let mut scaled = eig.vectors.clone();
    for k in 0..n {
        let lam = eig.values[k];
        if lam < floor {
            return Err(Error::NotPsd {
                min_eigenvalue: lam,
                scale: lambda_max,
            });
        }
        let clamped = if lam <= trunc { 0.0 } else { lam };
        scaled.column_mut(k).scale_mut(clamped.sqrt());
    }
    Ok(hermitian_part(&(&scaled * eig.vectors.adjoint())))
}

/// Solves `A X = B` for Hermitian positive definite `A` via Cholesky.
pub fn solve_hpd(a: &CMat, b: &CMat) -> Result<CMat> {
    let chol = nalgebra::linalg::Cholesky::new(hermitian_part(a)).ok_or(Error::NotPsd {
        min_eigenvalue: f64::NAN,
        scale: f64::NAN,
    })?;
    Ok(chol.solve(b))
}

/// Real part of the trace.
pub fn re_trace(a: &CMat) -> f64 {
    let mut t = 0.0;
    for i in 0..a.nrows().min(a.ncols()) {
        t += a[(i, i)].re;
    }
    t
}

/// Frobenius inner product `tr(A^H B)`.
pub fn frob_inner(a: &CMat, b: &CMat) -> C64 {
    a.dotc(b)
}

// ---------------------------------------------------------------------------
// Random streams and Gaussian sampling
// ---------------------------------------------------------------------------

/// A deterministic random stream identified by `(seed, stream_id)`.
///
/// Equal pairs yield bit-identical sequences on every platform; distinct
/// stream ids under the same seed select different ChaCha counter streams,
/// which are independent by construction. Parallel code assigns one stream
/// per trial so that execution order cannot affect results.
pub struct RngStream(ChaCha12Rng);

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self(rng)
    }
}

impl TryRng for RngStream {
    type Error = core::convert::Infallible;

    fn try_next_u32(&mut self) -> core::result::Result<u32, Self::Error> {
        Ok(self.0.next_u32())
    }

    fn try_next_u64(&mut self) -> core::result::Result<u64, Self::Error> {
        Ok(self.0.next_u64())
    }

    fn try_fill_bytes(&mut self, dst: &mut [u8]) -> core::result::Result<(), Self::Error> {
        self.0.fill_bytes(dst);
        Ok(())
    }
}


/// One standard circularly-symmetric complex Gaussian scalar: real and
/// imaginary parts are independent `N(0, 1/2)`, so `E|z|^2 = 1`.
pub fn cgauss(rng: &mut RngStream) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex::new(re, im) * core::f64::consts::FRAC_1_SQRT_2
}

/// A vector of independent standard circularly-symmetric complex Gaussians.
pub fn sample_cgauss(dim: usize, rng: &mut RngStream) -> CVec {
    CVec::from_fn(dim, |_, _| cgauss(rng))
}

/// A matrix of independent standard circularly-symmetric complex Gaussians,
/// filled in column-major order.
pub fn sample_cgauss_mat(rows: usize, cols: usize, rng: &mut RngStream) -> CMat {
    CMat::from_fn(rows, cols, |_, _| cgauss(rng))
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
