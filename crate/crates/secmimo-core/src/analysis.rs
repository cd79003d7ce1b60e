//! Closed-form performance analysis in the large-array regime.
//!
//! Everything here consumes covariance-level inputs (correlation sets,
//! estimation filters, attack precoders) and produces deterministic limits:
//! the user and adversary signal-quality coefficients, secrecy rates, the
//! SNR threshold beyond which more transmit power hurts, the immunity result
//! for statistically orthogonal channels, the closed-form optimal power
//! split and its feasibility region, the switching rule between the
//! full-power and projected designs, and the single-cell single-user
//! criteria with their i.i.d. specialization.
//!
//! Quality coefficients are named `theta_*` throughout:
//!
//! ```text
//! SINR_user = p g theta_m / (p g theta_bp + q g theta_bq + 1)
//! SINR_eve  = p g theta_e / tr(est_own)
//! ```
//!
//! with `g` the transmit SNR, `(p, q)` the power split, `theta_e` evaluated
//! through the regularized adversary covariance, and every rate in bits per
//! channel use with base-2 logarithms.

use alloc::format;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::channel::{CorrelationSet, SystemConfig};
use crate::downlink::PowerSplit;
use crate::numerics::{
    frob_inner, hermitian_deviation, hermitian_eig, hermitian_part, re_trace, solve_hpd, CMat, C64,
};
use crate::uplink::{
    attack_precoder, estimate_covariances, ns_project, AttackMode, AttackPrecoder, EstimationSet,
};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Tolerances
// ---------------------------------------------------------------------------

/// Limit quantities that are provably nonnegative may carry rounding dust
/// this far below zero, relative to their natural scale.
pub const TERM_DUST_REL: f64 = 1e-9;

/// The regularized adversary covariance is the identity plus a nonnegative
/// multiple of positive semidefinite cell terms, so its smallest eigenvalue
/// must not fall below 1 by more than this fraction of its largest one.
/// The cell terms are finite-array evaluations of a limit, so eigenvalue
/// dust slightly below the floor is expected.
pub const Q_ASY_FLOOR_REL: f64 = 1e-6;

/// A polynomial coefficient whose magnitude is below this fraction of its
/// constituent products is treated as zero when a closed form divides by it.
pub const COEFF_DEGENERATE_REL: f64 = 1e-12;

/// Damping factor for the threshold fixed-point iteration.
pub const FIXED_POINT_DAMPING: f64 = 0.5;

/// Relative step tolerance that ends the fixed-point iteration.
pub const FIXED_POINT_TOL: f64 = 1e-8;

/// Iteration budget for the fixed-point solver.
pub const FIXED_POINT_MAX_ITER: usize = 500;

/// Statistical orthogonality is accepted when the summed overlap
/// `|sum_t tr(R_user R_adv)|` per cell stays below this fraction of the
/// antenna count (traces are normalized to the antenna count, so the
/// natural scale of each summand is `N_t`).
pub const ORTHOGONALITY_TOL: f64 = 1e-8;

/// `tr(A B)` for Hermitian `A`, `B` (real up to rounding).
fn htrace(a: &CMat, b: &CMat) -> f64 {
    frob_inner(a, b).re
}

// ---------------------------------------------------------------------------
// Secrecy-rate results
// ---------------------------------------------------------------------------

/// How a [`SecrecyResult`] was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RateMethod {
    /// Deterministic large-array closed form.
    Asymptotic,
    /// Sample average over simulated channel realizations.
    MonteCarlo,
}

/// A user rate, an adversary capacity, and their clipped difference.
#[derive(Clone, Copy, Debug)]
pub struct SecrecyResult {
    /// Achievable rate of the attacked user, bits per channel use.
    pub rate_user: f64,
    /// Capacity of the adversary's intercept channel, bits per channel use.
    pub cap_eve: f64,
    /// `max(0, rate_user - cap_eve)`.
    pub rate_secrecy: f64,
    /// Provenance of the numbers.
    pub method: RateMethod,
    /// Half-width of the 95% confidence interval on the secrecy rate;
    /// zero for closed-form results.
    pub ci_halfwidth: f64,
}

impl SecrecyResult {
    /// Wraps a closed-form rate pair.
    pub fn asymptotic(rate_user: f64, cap_eve: f64) -> Self {
        Self {
            rate_user,
            cap_eve,
            rate_secrecy: (rate_user - cap_eve).max(0.0),
            method: RateMethod::Asymptotic,
            ci_halfwidth: 0.0,
        }
    }

    /// Wraps a sample-average rate pair with its confidence half-width.
    pub fn monte_carlo(rate_user: f64, cap_eve: f64, ci_halfwidth: f64) -> Self {
        Self {
            rate_user,
            cap_eve,
            rate_secrecy: (rate_user - cap_eve).max(0.0),
            method: RateMethod::MonteCarlo,
            ci_halfwidth,
        }
    }
}

// ---------------------------------------------------------------------------
// Large-array quality coefficients
// ---------------------------------------------------------------------------

/// Deterministic limits of the signal, interference, noise-leakage, and
/// intercept powers for one attacked user.
///
/// The adversary-side pieces are stored per cell so the regularized
/// covariance can be assembled for any power split and SNR on demand.
#[derive(Clone, Debug)]
pub struct AsymptoticTerms {
    cells: usize,
    n_e: usize,
    theta_m: f64,
    theta_bp: f64,
    theta_bq: f64,
    lambda_0m: Vec<f64>,
    c_filters: Vec<CMat>,
    eta: Vec<CMat>,
    q_cells: Vec<CMat>,
    tr_est_own: f64,
    theta_e_tilde: f64,
}

impl AsymptoticTerms {
    /// Assembles terms from precomputed pieces, enforcing the sign and
    /// shape invariants. `eta` and `q_cells` hold one Hermitian
    /// adversary-antenna-sized matrix per cell; `c_filters` may be empty
    /// when the filters are not needed downstream.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        theta_m: f64,
        theta_bp: f64,
        theta_bq: f64,
        lambda_0m: Vec<f64>,
        c_filters: Vec<CMat>,
        eta: Vec<CMat>,
        q_cells: Vec<CMat>,
        tr_est_own: f64,
    ) -> Result<Self> {
        let cells = eta.len();
        if cells == 0 || q_cells.len() != cells || lambda_0m.len() != cells {
            return Err(Error::InvalidInput(format!(
                "need one eta, Q, and lambda entry per cell; got {} / {} / {}",
                eta.len(),
                q_cells.len(),
                lambda_0m.len()
            )));
        }
        if !c_filters.is_empty() && c_filters.len() != cells {
            return Err(Error::InvalidInput(format!(
                "filters must be absent or one per cell; got {}",
                c_filters.len()
            )));
        }
        let n_e = eta[0].nrows();
        for m in eta.iter().chain(q_cells.iter()) {
            if m.nrows() != n_e || m.ncols() != n_e {
                return Err(Error::InvalidInput(
                    "adversary-side matrices must share one square size".into(),
                ));
            }
            let dev = hermitian_deviation(m);
            let scale = m.norm().max(1.0);
            if dev > 1e-9 * scale {
                return Err(Error::NotHermitian {
                    deviation: dev,
                    allowed: 1e-9 * scale,
                });
            }
        }
        if !(tr_est_own > 0.0) {
            return Err(Error::DegenerateEstimate(format!(
                "own-cell estimate trace must be positive, got {tr_est_own}"
            )));
        }
        let theta_e_tilde = re_trace(&eta[0]) / tr_est_own;
        let scale = theta_m.abs().max(tr_est_own);
        if theta_m < tr_est_own - TERM_DUST_REL * scale {
            return Err(Error::InvalidInput(format!(
                "theta_m = {theta_m} below the own-estimate trace {tr_est_own}"
            )));
        }
        for (name, value) in [
            ("theta_bp", theta_bp),
            ("theta_bq", theta_bq),
            ("theta_e_tilde", theta_e_tilde),
        ] {
            if value < -TERM_DUST_REL * scale || !value.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "{name} must be nonnegative, got {value}"
                )));
            }
        }
        Ok(Self {
            cells,
            n_e,
            theta_m,
            theta_bp,
            theta_bq,
            lambda_0m,
            c_filters,
            eta,
            q_cells,
            tr_est_own,
            theta_e_tilde,
        })
    }

    /// Number of cells, attacked cell included.
    pub fn cells(&self) -> usize {
        self.cells
    }

    /// Adversary antenna count.
    pub fn n_e(&self) -> usize {
        self.n_e
    }

    /// Coherent signal coefficient of the attacked user.
    pub fn theta_m(&self) -> f64 {
        self.theta_m
    }

    /// Signal-power interference coefficient at the attacked user.
    pub fn theta_bp(&self) -> f64 {
        self.theta_bp
    }

    /// Artificial-noise leakage coefficient at the attacked user.
    pub fn theta_bq(&self) -> f64 {
        self.theta_bq
    }

    /// Per-cell aligned power of the attacked user's channel on the cell's
    /// own estimate direction.
    pub fn lambda_0m(&self, l: usize) -> f64 {
        self.lambda_0m[l]
    }

    /// Estimation filter of the attacked user at cell `l`, if stored.
    pub fn c_filter(&self, l: usize) -> Option<&CMat> {
        self.c_filters.get(l)
    }

    /// Per-cell intercepted-power matrix on the adversary's antennas.
    pub fn eta(&self, l: usize) -> &CMat {
        &self.eta[l]
    }

    /// Per-cell artificial-noise coverage matrix on the adversary's antennas.
    pub fn q_cell(&self, l: usize) -> &CMat {
        &self.q_cells[l]
    }

    /// Trace of the attacked user's own-cell estimated covariance.
    pub fn tr_est_own(&self) -> f64 {
        self.tr_est_own
    }

    /// Intercept coefficient with the noise shaping ignored
    /// (`tr(eta_own) / tr(est_own)`).
    pub fn theta_e_tilde(&self) -> f64 {
        self.theta_e_tilde
    }

    /// Regularized adversary covariance `q g sum_l Q_l + I` for a given
    /// split and SNR.
    pub fn q_asy(&self, split: &PowerSplit, gamma: f64) -> CMat {
        let mut q = CMat::identity(self.n_e, self.n_e);
        let weight = split.q() * gamma;
        for ql in &self.q_cells {
            q += ql * C64::new(weight, 0.0);
        }
        hermitian_part(&q)
    }

    /// Checks that the regularized adversary covariance sits above the
    /// identity floor for the given split and SNR.
    pub fn validate_q_asy(&self, split: &PowerSplit, gamma: f64) -> Result<()> {
        let q = self.q_asy(split, gamma);
        let eig = hermitian_eig(&q)?;
        let min = eig.values[eig.values.len() - 1];
        let scale = eig.values[0].abs().max(1.0);
        if min < 1.0 - Q_ASY_FLOOR_REL * scale {
            return Err(Error::NotPsd {
                min_eigenvalue: min,
                scale,
            });
        }
        Ok(())
    }

    /// Intercept coefficient through the regularized adversary covariance.
    ///
    /// This is a trace of a positive definite inverse applied to a positive
    /// semidefinite matrix, so the exact value is nonnegative; rounding dust
    /// is clamped at zero.
    pub fn theta_e(&self, split: &PowerSplit, gamma: f64) -> Result<f64> {
        let q = self.q_asy(split, gamma);
        let x = solve_hpd(&q, &self.eta[0])?;
        Ok(re_trace(&x).max(0.0))
    }

    /// Large-array signal-to-interference-plus-noise ratio of the attacked
    /// user for the given split and SNR.
    pub fn sinr_user(&self, split: &PowerSplit, gamma: f64) -> f64 {
        let pg = split.p() * gamma;
        let qg = split.q() * gamma;
        pg * self.theta_m / (pg * self.theta_bp + qg * self.theta_bq + 1.0)
    }

    /// Large-array intercept ratio of the adversary for the given split and
    /// SNR.
    pub fn sinr_eve(&self, split: &PowerSplit, gamma: f64) -> Result<f64> {
        Ok(split.p() * gamma * self.theta_e(split, gamma)? / self.tr_est_own)
    }
}

/// Computes every large-array quality coefficient for the attacked user from
/// the system geometry, the covariance-level estimates, and the adversary's
/// training precoder.
pub fn asymptotic_terms(
    config: &SystemConfig,
    corr: &CorrelationSet,
    est: &EstimationSet,
    attack: &AttackPrecoder,
) -> Result<AsymptoticTerms> {
    config.validate()?;
    let cells = config.cells();
    let users = config.k_users;
    let m = config.m_idx();
    if corr.cells() != cells || corr.users() != users || corr.n_t() != config.n_t {
        return Err(Error::InvalidInput(
            "correlation set does not match the configuration".into(),
        ));
    }
    if corr.n_e() != config.n_e || attack.matrix().nrows() != config.n_e {
        return Err(Error::InvalidInput(
            "adversary antenna counts disagree between config, correlations, and attack".into(),
        ));
    }
    if est.cells() != cells || est.users() != users || est.m_idx() != m {
        return Err(Error::InvalidInput(
            "estimation set does not match the configuration".into(),
        ));
    }

    let tau = config.tau as f64;
    let p_ul = config.pilot_power;
    let n0 = config.n0;
    let p_e = config.p_e;
    let n_e = config.n_e;

    // Own-estimate traces for the attacked user, one per cell.
    let mut tr_lm = Vec::with_capacity(cells);
    for l in 0..cells {
        let t = re_trace(est.est_cov(l, m));
        if !(t > 0.0) {
            return Err(Error::DegenerateEstimate(format!(
                "estimate of the attacked user at cell {l} has trace {t}"
            )));
        }
        tr_lm.push(t);
    }

    // Aligned power of the attacked user's channel on each cell's estimate
    // direction: a coherent part, a thermal part, cross-cell pickup from the
    // shared training slot, and the adversary's contamination.
    let mut lambda_0m = Vec::with_capacity(cells);
    for l in 0..cells {
        let c = est.filter(l, m);
        let r0 = corr.user(0, m, l);
        let coherent = (c * r0).trace();
        let sandwich = hermitian_part(&(c.adjoint() * r0 * c));
        let mut lam = tau * tau * p_ul * coherent.norm_sqr() + tau * n0 * re_trace(&sandwich);
        for t in 1..cells {
            lam += tau * tau * p_ul * htrace(&sandwich, corr.user(t, m, l));
        }
        if p_e > 0.0 {
            let r_l = attack.r_eff(corr.eve_rx(l));
            lam += tau * tau * p_e * r_l * htrace(&sandwich, corr.eve_tx(l));
        }
        lambda_0m.push(lam);
    }

    let tr0 = tr_lm[0];
    let theta_m = tr0 + htrace(est.err_cov(0, m), est.est_cov(0, m)) / tr0;

    // Matched-filter leakage from every other user's beam.
    let mut cross_mf = 0.0;
    for l in 0..cells {
        let r0 = corr.user(0, m, l);
        for k in 0..users {
            if k == m {
                continue;
            }
            let tr_lk = re_trace(est.est_cov(l, k));
            if !(tr_lk > 0.0) {
                return Err(Error::DegenerateEstimate(format!(
                    "estimate of user {k} at cell {l} has trace {tr_lk}"
                )));
            }
            cross_mf += htrace(r0, est.est_cov(l, k)) / tr_lk;
        }
    }
    let mut lambda_other = 0.0;
    for l in 1..cells {
        lambda_other += lambda_0m[l] / tr_lm[l];
    }
    let theta_bp = cross_mf + lambda_other;

    let mut tr_r0_sum = 0.0;
    for l in 0..cells {
        tr_r0_sum += re_trace(corr.user(0, m, l));
    }
    let mut lambda_all = 0.0;
    for l in 0..cells {
        lambda_all += lambda_0m[l] / tr_lm[l];
    }
    let theta_bq = tr_r0_sum - cross_mf - lambda_all;

    // Intercepted power per cell on the adversary's antennas: an incoherent
    // part weighted by the receive correlation and a coherent part along the
    // attacked training direction.
    let v = attack.column_sum();
    let mut eta = Vec::with_capacity(cells);
    for l in 0..cells {
        let c = est.filter(l, m);
        let ret = corr.eve_tx(l);
        let sandwich = hermitian_part(&(c.adjoint() * ret * c));
        let mut s1 = tau * n0 * re_trace(&sandwich);
        for t in 0..cells {
            s1 += tau * tau * p_ul * htrace(&sandwich, corr.user(t, m, l));
        }
        let mut h = corr.eve_rx(l) * C64::new(s1, 0.0);
        if p_e > 0.0 {
            let s2 = tau * tau * (p_e / n_e as f64) * (c * ret).trace().norm_sqr();
            let w = corr.eve_rx(l) * v;
            h += (&w * w.adjoint()) * C64::new(s2, 0.0);
        }
        eta.push(hermitian_part(&h));
    }

    // Artificial-noise coverage per cell: total adversary gain minus what the
    // other users' beams and the attacked beam already occupy.
    let mut q_cells = Vec::with_capacity(cells);
    for l in 0..cells {
        let ret = corr.eve_tx(l);
        let mut coeff = re_trace(ret);
        for k in 0..users {
            if k == m {
                continue;
            }
            coeff -= htrace(ret, est.est_cov(l, k)) / re_trace(est.est_cov(l, k));
        }
        let q = corr.eve_rx(l) * C64::new(coeff, 0.0) - &eta[l] * C64::new(1.0 / tr_lm[l], 0.0);
        q_cells.push(hermitian_part(&q));
    }

    let mut c_filters = Vec::with_capacity(cells);
    for l in 0..cells {
        c_filters.push(est.filter(l, m).clone());
    }

    AsymptoticTerms::from_parts(
        theta_m, theta_bp, theta_bq, lambda_0m, c_filters, eta, q_cells, tr0,
    )
}

/// Closed-form secrecy rate for a given split and SNR.
pub fn asymptotic_secrecy_rate(
    terms: &AsymptoticTerms,
    split: &PowerSplit,
    gamma: f64,
) -> Result<SecrecyResult> {
    if !gamma.is_finite() || gamma < 0.0 {
        return Err(Error::InvalidInput(format!(
            "transmit SNR must be finite and nonnegative, got {gamma}"
        )));
    }
    let su = terms.sinr_user(split, gamma);
    let se = terms.sinr_eve(split, gamma)?;
    Ok(SecrecyResult::asymptotic(
        (1.0 + su).log2(),
        (1.0 + se).log2(),
    ))
}

// ---------------------------------------------------------------------------
// Monotonicity threshold
// ---------------------------------------------------------------------------

/// SNR beyond which raising the transmit power lowers the all-signal
/// secrecy rate.
///
/// Convenience wrapper over [`gamma_threshold_from`] that reads the
/// coefficients out of [`AsymptoticTerms`]. `n_t` enters only through the
/// validity requirement `n_t > k` of the all-signal split.
pub fn gamma_threshold(terms: &AsymptoticTerms, k: usize, n_t: usize) -> Result<f64> {
    if k == 0 || n_t <= k {
        return Err(Error::InvalidInput(format!(
            "need 0 < users < antennas, got {k} users and {n_t} antennas"
        )));
    }
    gamma_threshold_from(terms.theta_m(), terms.theta_bp(), terms.theta_e_tilde(), k)
}

/// SNR beyond which the all-signal quality ratio decreases, from raw
/// coefficients.
///
/// At full signal power every stream carries the fraction `1/K`, so the
/// quality ratio is a function of the scaled variable `x = gamma / K`. The
/// stationary point is found in `x` and mapped back to the SNR axis by the
/// factor `K`. A negative return value means the ratio is already decreasing
/// at every positive SNR; when the stationary-point discriminant is negative
/// the same is true and zero is returned as the infimum of valid thresholds.
pub fn gamma_threshold_from(
    theta_m: f64,
    theta_bp: f64,
    theta_e_tilde: f64,
    k: usize,
) -> Result<f64> {
    let b = theta_bp * theta_e_tilde;
    if !(b > 0.0) {
        return Err(Error::DegenerateEstimate(format!(
            "threshold needs theta_bp > 0 and theta_e_tilde > 0, got {theta_bp} and {theta_e_tilde}"
        )));
    }
    // Derivative numerator of the quality ratio in x = gamma / K:
    //   g(x) = -(theta_bp + theta_m) b x^2 - 2 b x + (theta_m - theta_e_tilde).
    let a = (theta_bp + theta_m) * b;
    let c = theta_m - theta_e_tilde;
    let disc = b * b + a * c;
    if disc < 0.0 {
        return Ok(0.0);
    }
    Ok(k as f64 * (-b + disc.sqrt()) / a)
}

// ---------------------------------------------------------------------------
// Statistically orthogonal channels
// ---------------------------------------------------------------------------

/// Secrecy rate when the user channels are statistically orthogonal to the
/// adversary's uplink channel at every cell.
///
/// The overlap `sum_t tr(R_user R_adv)` is verified per cell first; once it
/// vanishes the contamination cannot reach any estimate and the intercepted
/// power is exactly zero in the limit, so the adversary capacity is reported
/// as zero and the result is independent of the attack power.
pub fn orthogonal_rate(
    config: &SystemConfig,
    corr: &CorrelationSet,
    split: &PowerSplit,
    gamma: f64,
) -> Result<SecrecyResult> {
    config.validate()?;
    let cells = config.cells();
    let m = config.m_idx();
    for l in 0..cells {
        let mut overlap = 0.0;
        for t in 0..cells {
            overlap += htrace(corr.user(t, m, l), corr.eve_tx(l));
        }
        if overlap.abs() > ORTHOGONALITY_TOL * config.n_t as f64 {
            return Err(Error::InvalidInput(format!(
                "cell {l}: user and adversary correlations overlap (sum of traces {overlap:.3e})"
            )));
        }
    }
    let attack = attack_precoder(corr.eve_rx(0), config.n_e, AttackMode::EigenUniform)?;
    let est = estimate_covariances(config, corr, &attack)?;
    let terms = asymptotic_terms(config, corr, &est, &attack)?;
    let su = terms.sinr_user(split, gamma);
    Ok(SecrecyResult::asymptotic((1.0 + su).log2(), 0.0))
}

// ---------------------------------------------------------------------------
// Single-adversary-antenna power optimization
// ---------------------------------------------------------------------------

/// Coefficients of the quality-ratio polynomials
/// `(a1 p^2 + b1 p + c1) / (a2 p^2 + b2 p + c2)` in the signal fraction `p`.
#[derive(Clone, Copy, Debug)]
pub struct PolyCoeffs {
    pub a1: f64,
    pub b1: f64,
    pub c1: f64,
    pub a2: f64,
    pub b2: f64,
    pub c2: f64,
}

impl PolyCoeffs {
    /// Quality ratio at signal fraction `p`.
    pub fn ratio(&self, p: f64) -> f64 {
        ((self.a1 * p + self.b1) * p + self.c1) / ((self.a2 * p + self.b2) * p + self.c2)
    }
}

/// Builds the ratio polynomials from the quality coefficients.
///
/// Multiplying every signal-quality numerator and denominator by
/// `N_t - K` turns them into four factors linear in `p`:
///
/// ```text
/// 1 + SINR_user = (su p + e) / (du p + e)
/// 1 + SINR_eve  = (se p + f) / (de p + f)
/// ```
///
/// whose products give the quadratic coefficients. Both constant terms are
/// the same product `e f`.
fn ratio_polynomials(
    theta_m: f64,
    theta_bp: f64,
    theta_bq: f64,
    theta_ee: f64,
    theta_eq: f64,
    gamma: f64,
    k: usize,
    n_t: usize,
) -> PolyCoeffs {
    let w = (n_t - k) as f64;
    let kf = k as f64;
    let su = gamma * (w * (theta_m + theta_bp) - kf * theta_bq);
    let du = gamma * (w * theta_bp - kf * theta_bq);
    let se = gamma * (w * theta_ee - kf * theta_eq);
    let de = -gamma * kf * theta_eq;
    let e = gamma * theta_bq + w;
    let f = gamma * theta_eq + w;
    PolyCoeffs {
        a1: su * de,
        b1: su * f + de * e,
        c1: e * f,
        a2: du * se,
        b2: du * f + se * e,
        c2: e * f,
    }
}

/// Stationary points of the quality ratio: roots of
/// `(a1 b2 - a2 b1) p^2 + 2 c (a1 - a2) p + c (b1 - b2)`.
///
/// Returns NaN pairs when the quadratic degenerates or has no real roots.
fn stationary_points(poly: &PolyCoeffs) -> (f64, f64) {
    let lead = poly.a1 * poly.b2 - poly.a2 * poly.b1;
    let scale = (poly.a1 * poly.b2).abs() + (poly.a2 * poly.b1).abs();
    if lead.abs() <= COEFF_DEGENERATE_REL * scale.max(f64::MIN_POSITIVE) {
        return (f64::NAN, f64::NAN);
    }
    let lin = 2.0 * poly.c1 * (poly.a1 - poly.a2);
    let cst = poly.c1 * (poly.b1 - poly.b2);
    let disc = lin * lin - 4.0 * lead * cst;
    if disc < 0.0 {
        return (f64::NAN, f64::NAN);
    }
    let s = disc.sqrt();
    ((-lin - s) / (2.0 * lead), (-lin + s) / (2.0 * lead))
}

/// Scalar quality coefficients and ratio polynomials for a single-antenna
/// adversary at a fixed SNR.
#[derive(Clone, Debug)]
pub struct SingleAntennaTerms {
    theta_ee: f64,
    theta_eq: f64,
    lambda_e: Vec<f64>,
    poly: PolyCoeffs,
    p1: f64,
    p2: f64,
    gamma: f64,
    k: usize,
    n_t: usize,
    theta_m: f64,
    theta_bp: f64,
    theta_bq: f64,
}

impl SingleAntennaTerms {
    /// Assembles the scalar terms directly from quality coefficients.
    #[allow(clippy::too_many_arguments)]
    pub fn from_thetas(
        theta_m: f64,
        theta_bp: f64,
        theta_bq: f64,
        theta_ee: f64,
        theta_eq: f64,
        lambda_e: Vec<f64>,
        gamma: f64,
        k: usize,
        n_t: usize,
    ) -> Result<Self> {
        if k == 0 || n_t <= k {
            return Err(Error::InvalidInput(format!(
                "need 0 < users < antennas, got {k} users and {n_t} antennas"
            )));
        }
        if !gamma.is_finite() || gamma <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "transmit SNR must be finite and positive, got {gamma}"
            )));
        }
        for (name, value) in [
            ("theta_m", theta_m),
            ("theta_bp", theta_bp),
            ("theta_bq", theta_bq),
            ("theta_ee", theta_ee),
            ("theta_eq", theta_eq),
        ] {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "{name} must be finite and nonnegative, got {value}"
                )));
            }
        }
        let poly = ratio_polynomials(
            theta_m, theta_bp, theta_bq, theta_ee, theta_eq, gamma, k, n_t,
        );
        let (p1, p2) = stationary_points(&poly);
        Ok(Self {
            theta_ee,
            theta_eq,
            lambda_e,
            poly,
            p1,
            p2,
            gamma,
            k,
            n_t,
            theta_m,
            theta_bp,
            theta_bq,
        })
    }

    /// Intercept coefficient of the adversary at the attacked cell.
    pub fn theta_ee(&self) -> f64 {
        self.theta_ee
    }

    /// Artificial-noise coverage coefficient summed over cells.
    pub fn theta_eq(&self) -> f64 {
        self.theta_eq
    }

    /// Per-cell intercepted power along the attacked beam.
    pub fn lambda_e(&self, l: usize) -> f64 {
        self.lambda_e[l]
    }

    /// Ratio polynomials at the SNR this value was built for.
    pub fn poly(&self) -> &PolyCoeffs {
        self.poly_ref()
    }

    fn poly_ref(&self) -> &PolyCoeffs {
        &self.poly
    }

    /// First stationary point of the quality ratio (NaN if none).
    pub fn p1(&self) -> f64 {
        self.p1
    }

    /// Second stationary point of the quality ratio (NaN if none).
    pub fn p2(&self) -> f64 {
        self.p2
    }

    /// SNR the polynomials were evaluated at.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Users per cell.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Transmit antennas.
    pub fn n_t(&self) -> usize {
        self.n_t
    }

    /// Ratio polynomials re-evaluated at another SNR.
    pub fn poly_at(&self, gamma: f64) -> PolyCoeffs {
        ratio_polynomials(
            self.theta_m,
            self.theta_bp,
            self.theta_bq,
            self.theta_ee,
            self.theta_eq,
            gamma,
            self.k,
            self.n_t,
        )
    }

    /// Adversary intercept ratio from the scalar coefficients.
    pub fn sinr_eve_scalar(&self, split: &PowerSplit, gamma: f64) -> f64 {
        split.p() * gamma * self.theta_ee / (split.q() * gamma * self.theta_eq + 1.0)
    }
}

/// Computes the scalar adversary coefficients and ratio polynomials for a
/// single-antenna adversary.
///
/// With one receive antenna the adversary's receive side collapses to a
/// scalar gain per cell, and the closed-form coefficients treat that gain
/// as unity toward every base station: the capture and coverage sums run
/// over the raw adversary transmit correlations. The estimation chain
/// feeding the filters keeps the physical per-cell gains; only the scalar
/// downlink coefficients here adopt the unit-gain convention, which is
/// also the regime the power-allocation and feasibility closed forms are
/// calibrated for.
pub fn single_antenna_terms(
    config: &SystemConfig,
    corr: &CorrelationSet,
    est: &EstimationSet,
    attack: &AttackPrecoder,
    gamma: f64,
) -> Result<SingleAntennaTerms> {
    if config.n_e != 1 {
        return Err(Error::WrongSpecialization(format!(
            "closed-form power optimization needs one adversary antenna, got {}",
            config.n_e
        )));
    }
    let terms = asymptotic_terms(config, corr, est, attack)?;
    let cells = config.cells();
    let users = config.k_users;
    let m = config.m_idx();
    let tau = config.tau as f64;
    let p_ul = config.pilot_power;
    let n0 = config.n0;
    let p_e = config.p_e;

    let mut lambda_e = Vec::with_capacity(cells);
    let mut theta_eq = 0.0;
    for l in 0..cells {
        let ret = corr.eve_tx(l);
        let c = est.filter(l, m);
        let sandwich = hermitian_part(&(c.adjoint() * ret * c));
        let mut lam = tau * n0 * re_trace(&sandwich);
        for t in 0..cells {
            lam += tau * tau * p_ul * htrace(&sandwich, corr.user(t, m, l));
        }
        lam += tau * tau * p_e * (c * ret).trace().norm_sqr();
        lambda_e.push(lam);

        let mut coeff = re_trace(ret);
        for k in 0..users {
            if k == m {
                continue;
            }
            coeff -= htrace(ret, est.est_cov(l, k)) / re_trace(est.est_cov(l, k));
        }
        theta_eq += coeff - lam / re_trace(est.est_cov(l, m));
    }
    let theta_ee = lambda_e[0] / terms.tr_est_own();

    SingleAntennaTerms::from_thetas(
        terms.theta_m(),
        terms.theta_bp(),
        terms.theta_bq(),
        theta_ee,
        theta_eq,
        lambda_e,
        gamma,
        config.k_users,
        config.n_t,
    )
}

/// Outcome of the closed-form power optimization.
#[derive(Clone, Copy, Debug)]
pub struct PowerAllocation {
    /// Optimal signal fraction per stream.
    pub p_star: f64,
    /// Artificial-noise fraction implied by the split identity.
    pub q_star: f64,
    /// Secrecy rate achieved at the optimum.
    pub rate: f64,
    /// True when the stationary-point quadratic degenerated and the
    /// decision fell back to endpoint comparison.
    pub degenerate: bool,
}

/// Picks the signal fraction maximizing the secrecy rate over `[0, 1/K]`.
///
/// Candidates are the real stationary points that fall inside the open
/// budget interval plus the all-signal endpoint; each is scored with the
/// scalar-system ratio the stationary points were derived from, so the
/// returned split is the exact maximizer of that closed form. When the
/// stationary-point quadratic degenerates the search falls back to the
/// endpoint alone and says so in the output.
pub fn optimal_power_allocation(
    sat: &SingleAntennaTerms,
    terms: &AsymptoticTerms,
    gamma: f64,
    k: usize,
    n_t: usize,
) -> Result<PowerAllocation> {
    if k != sat.k() || n_t != sat.n_t() {
        return Err(Error::InvalidInput(format!(
            "dimension mismatch: terms built for {} users / {} antennas, called with {k} / {n_t}",
            sat.k(),
            sat.n_t()
        )));
    }
    // The scalar terms carry their own copy of the user-side quality
    // coefficients; the matrix terms are accepted to confirm both views
    // describe the same link before the scalar system is optimized.
    let tm_scale = terms.theta_m().abs().max(sat.theta_m.abs()).max(1.0);
    if (terms.theta_m() - sat.theta_m).abs() > 1e-6 * tm_scale {
        return Err(Error::InvalidInput(format!(
            "quality coefficients disagree between the matrix and scalar views: {} vs {}",
            terms.theta_m(),
            sat.theta_m
        )));
    }
    let poly = sat.poly_at(gamma);
    let lead = poly.a1 * poly.b2 - poly.a2 * poly.b1;
    let scale = (poly.a1 * poly.b2).abs() + (poly.a2 * poly.b1).abs();
    let degenerate = lead.abs() <= COEFF_DEGENERATE_REL * scale.max(f64::MIN_POSITIVE);
    let cap = 1.0 / k as f64;

    let mut candidates: Vec<f64> = Vec::with_capacity(3);
    candidates.push(cap);
    if !degenerate {
        let (p1, p2) = stationary_points(&poly);
        for p in [p1, p2] {
            if p.is_finite() && p > 0.0 && p < cap {
                candidates.push(p);
            }
        }
    }

    // Score candidates with the same closed-form ratio the stationary
    // points were derived from, so the winner is its exact maximizer.
    let mut best_p = cap;
    let mut best_ratio = f64::NEG_INFINITY;
    for &p in &candidates {
        let ratio = poly.ratio(p);
        if ratio > best_ratio {
            best_ratio = ratio;
            best_p = p;
        }
    }
    let split = PowerSplit::from_signal_fraction(best_p, k, n_t)?;
    Ok(PowerAllocation {
        p_star: best_p,
        q_star: split.q(),
        rate: best_ratio.log2().max(0.0),
        degenerate,
    })
}

/// Feasibility region for a positive secrecy rate as a condition on the
/// signal fraction `p`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FeasiblePower {
    /// Positive secrecy requires `p` above the bound.
    Above { bound: f64 },
    /// Positive secrecy requires `p` below the bound.
    Below { bound: f64 },
    /// Every positive `p` achieves positive secrecy.
    All,
    /// No `p` achieves positive secrecy.
    None,
}

impl FeasiblePower {
    /// True for the two branches where the quadratic difference degenerated.
    pub fn degenerate(&self) -> bool {
        matches!(self, FeasiblePower::All | FeasiblePower::None)
    }
}

/// Characterizes which signal fractions give a positive secrecy rate at the
/// SNR the scalar terms were built for.
///
/// The quality ratio exceeds one exactly when
/// `p ((a1 - a2) p + (b1 - b2)) > 0`, so for positive `p` the region is a
/// half-line with endpoint `-(b1 - b2)/(a1 - a2)`, oriented by the sign of
/// `a1 - a2`; when `a1 = a2` the answer is uniform in `p` and decided by the
/// sign of `b1 - b2`.
pub fn secrecy_feasible_power(sat: &SingleAntennaTerms) -> FeasiblePower {
    let poly = sat.poly();
    let da = poly.a1 - poly.a2;
    let db = poly.b1 - poly.b2;
    let scale = poly.a1.abs() + poly.a2.abs();
    if da.abs() <= COEFF_DEGENERATE_REL * scale.max(f64::MIN_POSITIVE) {
        if db > 0.0 {
            FeasiblePower::All
        } else {
            FeasiblePower::None
        }
    } else {
        let bound = -db / da;
        if da > 0.0 {
            FeasiblePower::Above { bound }
        } else {
            FeasiblePower::Below { bound }
        }
    }
}

// ---------------------------------------------------------------------------
// Projected (null-space) design
// ---------------------------------------------------------------------------

/// Quality coefficients of the projected design.
#[derive(Clone, Copy, Debug)]
pub struct NsTerms {
    theta_m_null: f64,
    theta_bp_null: f64,
    a5: f64,
    a6: f64,
    k: usize,
}

impl NsTerms {
    /// Assembles projected-design terms from raw coefficients.
    pub fn from_thetas(theta_m_null: f64, theta_bp_null: f64, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidInput("need at least one user".into()));
        }
        if !(theta_m_null > 0.0) || theta_bp_null < 0.0 {
            return Err(Error::InvalidInput(format!(
                "need theta_m_null > 0 and theta_bp_null >= 0, got {theta_m_null} and {theta_bp_null}"
            )));
        }
        let kf = k as f64;
        Ok(Self {
            theta_m_null,
            theta_bp_null,
            a5: (theta_m_null + theta_bp_null) / kf,
            a6: theta_bp_null / kf,
            k,
        })
    }

    /// Coherent signal coefficient on the projected subspace.
    pub fn theta_m_null(&self) -> f64 {
        self.theta_m_null
    }

    /// Interference coefficient of the projected design.
    pub fn theta_bp_null(&self) -> f64 {
        self.theta_bp_null
    }

    /// Numerator slope of the projected quality ratio.
    pub fn a5(&self) -> f64 {
        self.a5
    }

    /// Denominator slope of the projected quality ratio.
    pub fn a6(&self) -> f64 {
        self.a6
    }

    /// Users per cell.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Secrecy rate of the projected design at the given SNR (the adversary
    /// intercepts nothing by construction).
    pub fn rate(&self, gamma: f64) -> f64 {
        ((self.a5 * gamma + 1.0) / (self.a6 * gamma + 1.0)).log2()
    }
}

/// Computes the projected-design quality coefficients.
///
/// The attacked user's signal and own-cell error terms come from the
/// projected estimation pipeline; the other users' matched-filter leakage
/// keeps full-space estimates, which never see the adversary because only
/// the attacked training slot is contaminated. No quantity here depends on
/// the attack power.
pub fn ns_asymptotic_terms(
    config: &SystemConfig,
    corr: &CorrelationSet,
    eigen_tol: f64,
) -> Result<NsTerms> {
    config.validate()?;
    let proj = ns_project(corr, config, eigen_tol)?;
    let attack = attack_precoder(corr.eve_rx(0), config.n_e, AttackMode::EigenUniform)?;
    let est = estimate_covariances(config, corr, &attack)?;

    let cells = config.cells();
    let users = config.k_users;
    let m = config.m_idx();
    let tau = config.tau as f64;
    let p_ul = config.pilot_power;
    let n0 = config.n0;

    let t0 = re_trace(proj.est_cov_null(0));
    if !(t0 > 0.0) {
        return Err(Error::DegenerateEstimate(format!(
            "projected estimate at the attacked cell has trace {t0}"
        )));
    }
    let theta_m_null = t0 + htrace(proj.err_cov_null(0), proj.est_cov_null(0)) / t0;

    let mut cross_mf = 0.0;
    for l in 0..cells {
        let r0 = corr.user(0, m, l);
        for k in 0..users {
            if k == m {
                continue;
            }
            cross_mf += htrace(r0, est.est_cov(l, k)) / re_trace(est.est_cov(l, k));
        }
    }

    let mut lambda_null = 0.0;
    for l in 1..cells {
        let c = proj.filter_null(l);
        let r0 = proj.user_null(0, l);
        let coherent = (c * r0).trace();
        let sandwich = hermitian_part(&(c.adjoint() * r0 * c));
        let mut lam = tau * tau * p_ul * coherent.norm_sqr() + tau * n0 * re_trace(&sandwich);
        for t in 1..cells {
            lam += tau * tau * p_ul * htrace(&sandwich, proj.user_null(t, l));
        }
        lambda_null += lam / re_trace(proj.est_cov_null(l));
    }
    let theta_bp_null = cross_mf + lambda_null;

    NsTerms::from_thetas(theta_m_null, theta_bp_null, config.k_users)
}

/// Secrecy rate of the projected design.
pub fn ns_asymptotic_rate(
    config: &SystemConfig,
    corr: &CorrelationSet,
    eigen_tol: f64,
    gamma: f64,
) -> Result<SecrecyResult> {
    if !gamma.is_finite() || gamma < 0.0 {
        return Err(Error::InvalidInput(format!(
            "transmit SNR must be finite and nonnegative, got {gamma}"
        )));
    }
    let terms = ns_asymptotic_terms(config, corr, eigen_tol)?;
    Ok(SecrecyResult::asymptotic(terms.rate(gamma), 0.0))
}

// ---------------------------------------------------------------------------
// Design switching rule
// ---------------------------------------------------------------------------

/// Coefficients of the design-switching comparison and the resulting
/// decision at one SNR.
#[derive(Clone, Copy, Debug)]
pub struct SwitchTerms {
    /// Full-power-design quality-ratio coefficients at the optimal split:
    /// the ratio is `(a3 g^2 + b3 g + 1) / (a4 g^2 + b4 g + 1)`.
    pub a3: f64,
    pub b3: f64,
    pub a4: f64,
    pub b4: f64,
    /// Projected-design slopes: the ratio is `(a5 g + 1) / (a6 g + 1)`.
    pub a5: f64,
    pub a6: f64,
    /// Difference-cubic coefficients: the full-power design wins exactly
    /// when `a7 g^2 + b7 g + c7 > 0`.
    pub a7: f64,
    pub b7: f64,
    pub c7: f64,
    /// Discriminant `b7^2 - 4 a7 c7`.
    pub delta: f64,
    /// Lower switching threshold, when the fixed-point solve converged.
    pub gamma_t1: Option<f64>,
    /// Upper switching threshold, when the fixed-point solve converged.
    pub gamma_t2: Option<f64>,
    /// 0 selects the full-power design, 1 the projected design.
    pub beta: u8,
    /// True when the threshold reporting fell back to the direct comparison
    /// (degenerate leading coefficient or a stalled iteration).
    pub fallback_direct: bool,
    /// Optimal signal fraction used on the full-power side.
    pub p_star: f64,
    /// Artificial-noise fraction used on the full-power side.
    pub q_star: f64,
}

/// Damped fixed-point iteration `x <- (1 - d) x + d map(x)`.
///
/// `map` may refuse a point by returning `None`; that, a non-finite update,
/// or running out of iterations yields a non-convergence error carrying the
/// last iterate.
pub fn damped_fixed_point<F: Fn(f64) -> Option<f64>>(
    map: F,
    start: f64,
    damping: f64,
    tol: f64,
    max_iter: usize,
) -> Result<f64> {
    let mut x = start;
    let mut residual = f64::INFINITY;
    for i in 0..max_iter {
        let target = match map(x) {
            Some(t) => t,
            None => {
                return Err(Error::NonConvergence {
                    iterations: i,
                    last: x,
                    residual,
                })
            }
        };
        let next = (1.0 - damping) * x + damping * target;
        residual = (next - x).abs();
        if !next.is_finite() {
            return Err(Error::NonConvergence {
                iterations: i,
                last: x,
                residual,
            });
        }
        x = next;
        if residual <= tol * x.abs().max(1.0) {
            return Ok(x);
        }
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
        last: x,
        residual,
    })
}

/// Comparison coefficients at one SNR, using the optimal split at that SNR.
struct SwitchCoeffs {
    a3: f64,
    b3: f64,
    a4: f64,
    b4: f64,
    a7: f64,
    b7: f64,
    c7: f64,
    p_star: f64,
    q_star: f64,
}

fn switch_coeffs_at(
    sat: &SingleAntennaTerms,
    terms: &AsymptoticTerms,
    ns_terms: &NsTerms,
    gamma: f64,
    k: usize,
    n_t: usize,
) -> Result<SwitchCoeffs> {
    let alloc = optimal_power_allocation(sat, terms, gamma, k, n_t)?;
    let (ps, qs) = (alloc.p_star, alloc.q_star);
    let tm = terms.theta_m();
    let tbp = terms.theta_bp();
    let tbq = terms.theta_bq();
    let tee = sat.theta_ee();
    let teq = sat.theta_eq();
    let a3 = qs * teq * (ps * (tm + tbp) + qs * tbq);
    let b3 = ps * (tm + tbp) + qs * tbq + qs * teq;
    let a4 = (ps * tbp + qs * tbq) * (ps * tee + qs * teq);
    let b4 = ps * tbp + qs * tbq + ps * tee + qs * teq;
    let a5 = ns_terms.a5();
    let a6 = ns_terms.a6();
    Ok(SwitchCoeffs {
        a3,
        b3,
        a4,
        b4,
        a7: a3 * a6 - a4 * a5,
        b7: a3 + a6 * b3 - a4 - a5 * b4,
        c7: b3 + a6 - b4 - a5,
        p_star: ps,
        q_star: qs,
    })
}

/// Decides between the full-power design (at its optimal split) and the
/// projected design at the given SNR.
///
/// The decision itself is the sign of the difference cubic, which equals the
/// direct rate comparison by construction. The two switching thresholds are
/// solved by damped fixed-point iteration for reporting; when that is not
/// possible (degenerate leading coefficient, negative discriminant along the
/// way, or a stalled iteration) the thresholds are left empty and
/// `fallback_direct` is set, while the decision stays valid.
pub fn design_switch(
    sat: &SingleAntennaTerms,
    terms: &AsymptoticTerms,
    ns_terms: &NsTerms,
    gamma: f64,
    k: usize,
) -> Result<SwitchTerms> {
    if k != sat.k() || ns_terms.k() != k {
        return Err(Error::InvalidInput(format!(
            "user counts disagree: {} / {} / {k}",
            sat.k(),
            ns_terms.k()
        )));
    }
    if !gamma.is_finite() || gamma <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "transmit SNR must be finite and positive, got {gamma}"
        )));
    }
    let n_t = sat.n_t();
    let here = switch_coeffs_at(sat, terms, ns_terms, gamma, k, n_t)?;
    let delta = here.b7 * here.b7 - 4.0 * here.a7 * here.c7;
    let cubic = (here.a7 * gamma + here.b7) * gamma + here.c7;
    let beta = if cubic > 0.0 { 0 } else { 1 };

    let a7_scale = (here.a3 * ns_terms.a6()).abs() + (here.a4 * ns_terms.a5()).abs();
    let a7_degenerate = here.a7.abs() <= COEFF_DEGENERATE_REL * a7_scale.max(f64::MIN_POSITIVE);

    let mut fallback = a7_degenerate;
    let mut gamma_t1 = None;
    let mut gamma_t2 = None;
    if !a7_degenerate && delta > 0.0 {
        let root = |g: f64, upper: bool| -> Option<f64> {
            let c = switch_coeffs_at(sat, terms, ns_terms, g, k, n_t).ok()?;
            let scale = (c.a3 * ns_terms.a6()).abs() + (c.a4 * ns_terms.a5()).abs();
            if c.a7.abs() <= COEFF_DEGENERATE_REL * scale.max(f64::MIN_POSITIVE) {
                return None;
            }
            let d = c.b7 * c.b7 - 4.0 * c.a7 * c.c7;
            if d < 0.0 {
                return None;
            }
            let s = d.sqrt();
            let r1 = (-c.b7 - s) / (2.0 * c.a7);
            let r2 = (-c.b7 + s) / (2.0 * c.a7);
            Some(if upper { r1.max(r2) } else { r1.min(r2) })
        };
        let s = delta.sqrt();
        let start_lo = ((-here.b7 - s) / (2.0 * here.a7)).min((-here.b7 + s) / (2.0 * here.a7));
        let start_hi = ((-here.b7 - s) / (2.0 * here.a7)).max((-here.b7 + s) / (2.0 * here.a7));
        match damped_fixed_point(
            |g| root(g, false),
            if start_lo.is_finite() { start_lo } else { gamma },
            FIXED_POINT_DAMPING,
            FIXED_POINT_TOL,
            FIXED_POINT_MAX_ITER,
        ) {
            Ok(g) => gamma_t1 = Some(g),
            Err(_) => fallback = true,
        }
        match damped_fixed_point(
            |g| root(g, true),
            if start_hi.is_finite() { start_hi } else { gamma },
            FIXED_POINT_DAMPING,
            FIXED_POINT_TOL,
            FIXED_POINT_MAX_ITER,
        ) {
            Ok(g) => gamma_t2 = Some(g),
            Err(_) => fallback = true,
        }
        if let (Some(lo), Some(hi)) = (gamma_t1, gamma_t2) {
            if lo > hi {
                gamma_t1 = Some(hi);
                gamma_t2 = Some(lo);
            }
        }
    }

    Ok(SwitchTerms {
        a3: here.a3,
        b3: here.b3,
        a4: here.a4,
        b4: here.b4,
        a5: ns_terms.a5(),
        a6: ns_terms.a6(),
        a7: here.a7,
        b7: here.b7,
        c7: here.c7,
        delta,
        gamma_t1,
        gamma_t2,
        beta,
        fallback_direct: fallback,
        p_star: here.p_star,
        q_star: here.q_star,
    })
}

// ---------------------------------------------------------------------------
// Single-cell single-user criteria
// ---------------------------------------------------------------------------

/// Closed-form quantities of the single-cell single-user topology.
#[derive(Clone, Debug)]
pub struct SingleUserTerms {
    eta1: f64,
    eta2: f64,
    lambda: f64,
    omega: CMat,
    beta01: f64,
    beta_e: f64,
    a_coh: f64,
    an_user: f64,
    an_eve: f64,
    tr_est: f64,
}

impl SingleUserTerms {
    /// Sign-determining coefficient of the secrecy condition.
    pub fn eta1(&self) -> f64 {
        self.eta1
    }

    /// Offset coefficient of the secrecy condition.
    pub fn eta2(&self) -> f64 {
        self.eta2
    }

    /// Aligned power of the adversary's channel on the estimate direction.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Deterministic estimation kernel `R (N0 I + tau (P R + P_E R_adv))^-1`.
    pub fn omega(&self) -> &CMat {
        &self.omega
    }

    /// Average per-antenna gain of the user's channel.
    pub fn beta01(&self) -> f64 {
        self.beta01
    }

    /// Average per-antenna gain of the adversary's channel.
    pub fn beta_e(&self) -> f64 {
        self.beta_e
    }

    /// User quality ratio from the closed forms.
    pub fn sinr_user(&self, split: &PowerSplit, gamma: f64) -> f64 {
        split.p() * gamma * self.a_coh / (split.q() * gamma * self.an_user + self.tr_est)
    }

    /// Adversary quality ratio from the closed forms.
    pub fn sinr_eve(&self, split: &PowerSplit, gamma: f64) -> f64 {
        split.p() * gamma * self.lambda / (split.q() * gamma * self.an_eve + self.tr_est)
    }

    /// Secrecy condition `(p - 1) gamma eta1 < eta2`.
    ///
    /// `p` is the total signal fraction with the remainder `1 - p` treated
    /// as the total noise budget, which is the convention the condition was
    /// stated in; the sign logic is unchanged under the per-dimension split
    /// identity because it only rescales the right-hand side by a positive
    /// constant.
    pub fn predicate(&self, p: f64, gamma: f64) -> bool {
        (p - 1.0) * gamma * self.eta1 < self.eta2
    }
}

/// Builds the single-cell single-user criteria from the topology's
/// correlations.
///
/// Both aligned powers follow the same pattern: the total cross gain
/// `tr(R_a) tr(est)` minus the part of `R_a` already captured along the
/// estimate direction. The user side subtracts its own aligned power (which
/// contains the coherent part), the adversary side subtracts `lambda`.
pub fn single_user_condition(
    config: &SystemConfig,
    corr: &CorrelationSet,
) -> Result<SingleUserTerms> {
    if config.l_cells != 0 || config.k_users != 1 || config.n_e != 1 {
        return Err(Error::WrongSpecialization(format!(
            "single-cell single-user criteria need L = 0, K = 1, N_e = 1; got {} / {} / {}",
            config.l_cells, config.k_users, config.n_e
        )));
    }
    config.validate()?;
    if corr.cells() != 1 || corr.users() != 1 || corr.n_t() != config.n_t || corr.n_e() != 1 {
        return Err(Error::InvalidInput(
            "correlation set does not match the single-cell single-user topology".into(),
        ));
    }
    let attack = attack_precoder(corr.eve_rx(0), 1, AttackMode::EigenUniform)?;
    let est = estimate_covariances(config, corr, &attack)?;

    let r = corr.user(0, 0, 0);
    let ret = corr.eve_tx(0);
    let rhat = est.est_cov(0, 0);
    let t = re_trace(rhat);
    let tau = config.tau as f64;
    let p01 = config.pilot_power;
    let n0 = config.n0;
    let pe = config.p_e;

    let omega = est.filter(0, 0) * C64::new(1.0 / p01.sqrt(), 0.0);

    let s_et = hermitian_part(&(omega.adjoint() * ret * &omega));
    let lambda = tau * tau * p01 * p01 * htrace(&s_et, r)
        + tau * tau * p01 * pe * (&omega * ret).trace().norm_sqr()
        + tau * p01 * n0 * re_trace(&s_et);

    let s_r = hermitian_part(&(omega.adjoint() * r * &omega));
    let lambda_user = tau * tau * p01 * p01 * (&omega * r).trace().norm_sqr()
        + tau * tau * p01 * pe * htrace(&s_r, ret)
        + tau * p01 * n0 * re_trace(&s_r);

    let a_coh = t * t + htrace(est.err_cov(0, 0), rhat);
    let an_user = re_trace(r) * t - lambda_user;
    let an_eve = re_trace(ret) * t - lambda;

    let cs_scale = (re_trace(ret) * t).max(1.0);
    if an_eve < -TERM_DUST_REL * cs_scale {
        return Err(Error::InvalidInput(format!(
            "aligned adversary power {lambda} exceeds the cross-gain bound {:.6e}",
            re_trace(ret) * t
        )));
    }

    let eta1 = a_coh * an_eve - an_user * lambda;
    let eta2 = (a_coh - lambda) * t;
    let n_t = config.n_t as f64;

    Ok(SingleUserTerms {
        eta1,
        eta2,
        lambda,
        omega,
        beta01: re_trace(r) / n_t,
        beta_e: re_trace(ret) / n_t,
        a_coh,
        an_user,
        an_eve,
        tr_est: t,
    })
}

/// Sign of the secrecy coefficient under i.i.d. fading, with the closed-form
/// leading-order value.
///
/// Returns `(sign, eta1)`: the sign of `p01 beta01 - pe beta_e` (which
/// decides achievability at high SNR) and the leading-order coefficient
/// `N_t^4 (tau p01 beta01 + tau pe beta_e + n0) (p01 beta01 - pe beta_e)`.
pub fn iid_sign_check(
    p01: f64,
    beta01: f64,
    pe: f64,
    beta_e: f64,
    tau: f64,
    n0: f64,
    n_t: usize,
) -> (i8, f64) {
    let margin = p01 * beta01 - pe * beta_e;
    let nt = n_t as f64;
    let eta1 = nt.powi(4) * (tau * p01 * beta01 + tau * pe * beta_e + n0) * margin;
    let sign = if margin > 0.0 {
        1
    } else if margin < 0.0 {
        -1
    } else {
        0
    };
    (sign, eta1)
}
