//! Closed-form second-order predictions for two-photon sideband transitions.
//!
//! Every formula here is homogeneous of degree one in frequency, so the
//! arithmetic is carried out directly in linear GHz: χ, δω_q, ε_m and the
//! rates come out as (angular quantity)/2π without any explicit 2π factors.

mod bessel;

use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use bessel::bessel_j1;

use crate::error::{Error, Result, Warning};
use crate::model::{DriveConfig, DriveTone, Space, SystemParams};

/// Drive-to-qubit detuning must exceed this multiple of ε for the
/// perturbative expansion to be trusted.
pub const VALIDITY_RATIO: f64 = 10.0;
/// Convergence tolerance of the matching fixed point, GHz.
pub const MATCHING_TOL_GHZ: f64 = 1e-9;
pub const MATCHING_MAX_ITER: usize = 200;
/// Residual of the matching condition above which a drive is considered stale.
pub const STALE_MATCHING_GHZ: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelVariant {
    Full,
    /// Rotating-wave drive: every drive sum Σ_i = ω_q + ω_d^(i) is sent to infinity.
    Rwa,
}

impl ModelVariant {
    pub const ALL: [ModelVariant; 2] = [ModelVariant::Full, ModelVariant::Rwa];

    fn inv_sigma(self, sigma: f64) -> f64 {
        match self {
            ModelVariant::Full => 1.0 / sigma,
            ModelVariant::Rwa => 0.0,
        }
    }
}

impl fmt::Display for ModelVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelVariant::Full => "full",
            ModelVariant::Rwa => "rwa",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SidebandKind {
    /// |g0⟩ ↔ |e1⟩
    Blue,
    /// |e0⟩ ↔ |g1⟩
    Red,
}

impl fmt::Display for SidebandKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SidebandKind::Blue => "blue",
            SidebandKind::Red => "red",
        })
    }
}

/// Detunings in GHz: per tone Δ_i = f_q' − f_i and Σ_i = f_q' + f_i, where f_q'
/// is the (possibly Stark-shifted) qubit frequency; plus the qubit–cavity pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Detunings {
    pub delta: Vec<f64>,
    pub sigma: Vec<f64>,
    pub delta_qc: f64,
    pub sigma_qc: f64,
}

impl Detunings {
    pub fn new(params: &SystemParams, drive: &DriveConfig, qubit_shift: f64) -> Result<Self> {
        let fq = params.f_q + qubit_shift;
        let tones = drive.tones();
        let mut delta = Vec::with_capacity(tones.len());
        let mut sigma = Vec::with_capacity(tones.len());
        for tone in &tones {
            let d = fq - tone.f_d;
            if d == 0.0 {
                return Err(Error::ResonantDrive { f_d: tone.f_d });
            }
            delta.push(d);
            sigma.push(fq + tone.f_d);
        }
        Ok(Self {
            delta,
            sigma,
            delta_qc: params.f_q - params.f_c,
            sigma_qc: params.f_q + params.f_c,
        })
    }
}

/// A value with the validity warnings raised while computing it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub warnings: Vec<Warning>,
}

fn validate(params: &SystemParams, drive: &DriveConfig) -> Result<()> {
    params.validate()?;
    drive.validate()
}

fn validity_warnings(params: &SystemParams, drive: &DriveConfig) -> Vec<Warning> {
    drive
        .tones()
        .iter()
        .filter_map(|tone| {
            let detuning = (params.f_q - tone.f_d).abs();
            let threshold = VALIDITY_RATIO * tone.eps;
            (tone.eps > 0.0 && detuning < threshold).then_some(Warning::PerturbativeValidity {
                f_d: tone.f_d,
                detuning,
                threshold,
            })
        })
        .collect()
}

/// χ = g²/Δ_qc + g²/Σ_qc in GHz.
pub fn dispersive_shift(params: &SystemParams) -> Result<f64> {
    params.validate()?;
    let delta_qc = params.f_q - params.f_c;
    if delta_qc == 0.0 {
        return Err(Error::DegenerateSystem);
    }
    let g2 = params.g * params.g;
    Ok(g2 / delta_qc + g2 / (params.f_q + params.f_c))
}

fn stark_value(tones: &[DriveTone], det: &Detunings, variant: ModelVariant) -> f64 {
    tones
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let e2 = t.eps * t.eps;
            2.0 * e2 / det.delta[i] + 2.0 * e2 * variant.inv_sigma(det.sigma[i])
        })
        .sum()
}

/// Drive-induced qubit shift δω_q/2π in GHz.
pub fn stark_shift(
    params: &SystemParams,
    drive: &DriveConfig,
    variant: ModelVariant,
) -> Result<Estimate> {
    validate(params, drive)?;
    let det = Detunings::new(params, drive, 0.0)?;
    Ok(Estimate {
        value: stark_value(&drive.tones(), &det, variant),
        warnings: validity_warnings(params, drive),
    })
}

fn modulation_value(
    drive: &DriveConfig,
    det: &Detunings,
    variant: ModelVariant,
) -> f64 {
    match drive {
        DriveConfig::Mono { tone } => {
            // 2ε²/Δ + 2ε²/Σ − 2ω_q ε²/(ΔΣ) with 2ω_q = Δ + Σ, so that the
            // Σ → ∞ limit at fixed Δ is taken consistently.
            let e2 = tone.eps * tone.eps;
            e2 / det.delta[0] + e2 * variant.inv_sigma(det.sigma[0])
        }
        DriveConfig::Bi { qubit, cavity } => {
            qubit.eps
                * cavity.eps
                * (1.0 / det.delta[0]
                    + 1.0 / det.delta[1]
                    + variant.inv_sigma(det.sigma[0])
                    + variant.inv_sigma(det.sigma[1]))
        }
    }
}

/// Amplitude ε_m/2π (GHz) of the derived longitudinal drive: the qubit
/// frequency modulation at 2ω_d (mono) or ω_dq ± ω_dc (bi).
pub fn modulation_amplitude(
    params: &SystemParams,
    drive: &DriveConfig,
    variant: ModelVariant,
) -> Result<Estimate> {
    validate(params, drive)?;
    let det = Detunings::new(params, drive, 0.0)?;
    Ok(Estimate {
        value: modulation_value(drive, &det, variant),
        warnings: validity_warnings(params, drive),
    })
}

/// Shifted transition frequency appearing on the right-hand side of the
/// matching condition: f_q + δ ± f_c + 2χ.
fn matching_rhs(
    params: &SystemParams,
    drive: &DriveConfig,
    kind: SidebandKind,
    variant: ModelVariant,
    chi: f64,
) -> Result<f64> {
    let det = Detunings::new(params, drive, 0.0)?;
    let shift = stark_value(&drive.tones(), &det, variant);
    Ok(match kind {
        SidebandKind::Blue => params.f_q + shift + params.f_c + 2.0 * chi,
        SidebandKind::Red => params.f_q + shift - params.f_c + 2.0 * chi,
    })
}

/// Signed residual (GHz) of the matching condition for the given drive:
/// 2f_d − rhs (mono) or f_dq ± f_dc − rhs (bi); absolute values for red.
pub fn matching_residual(
    params: &SystemParams,
    drive: &DriveConfig,
    kind: SidebandKind,
    variant: ModelVariant,
) -> Result<f64> {
    validate(params, drive)?;
    let chi = dispersive_shift(params)?;
    let rhs = matching_rhs(params, drive, kind, variant, chi)?;
    let lhs = match (drive, kind) {
        (DriveConfig::Mono { tone }, _) => 2.0 * tone.f_d,
        (DriveConfig::Bi { qubit, cavity }, SidebandKind::Blue) => qubit.f_d + cavity.f_d,
        (DriveConfig::Bi { qubit, cavity }, SidebandKind::Red) => (qubit.f_d - cavity.f_d).abs(),
    };
    Ok(match kind {
        SidebandKind::Blue => lhs - rhs,
        SidebandKind::Red => lhs - rhs.abs(),
    })
}

/// Solution of the self-consistent matching condition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchingSolution {
    /// f_d (mono) or f_dq (bi) in GHz.
    pub frequency: f64,
    pub iterations: usize,
    pub damped: bool,
    pub warnings: Vec<Warning>,
}

/// Solves for the drive frequency (f_d, or f_dq with f_dc held fixed) that
/// satisfies the blue or red matching condition, by damped fixed-point
/// iteration seeded at the zero-shift solution.
pub fn matching_frequency(
    params: &SystemParams,
    template: &DriveConfig,
    kind: SidebandKind,
    variant: ModelVariant,
) -> Result<MatchingSolution> {
    validate(params, template)?;
    let chi = dispersive_shift(params)?;

    let unshifted = match kind {
        SidebandKind::Blue => params.f_q + params.f_c + 2.0 * chi,
        SidebandKind::Red => params.f_q - params.f_c + 2.0 * chi,
    };
    // Red: the sign inside |·| is fixed at the seed.
    let orient = if unshifted < 0.0 { -1.0 } else { 1.0 };
    let oriented = |rhs: f64| match kind {
        SidebandKind::Blue => rhs,
        SidebandKind::Red => orient * rhs,
    };

    let (seed, map): (f64, Box<dyn Fn(f64) -> f64>) = match *template {
        DriveConfig::Mono { .. } => (oriented(unshifted) / 2.0, Box::new(|r: f64| r / 2.0)),
        DriveConfig::Bi { cavity, .. } => {
            let f_dc = cavity.f_d;
            match kind {
                SidebandKind::Blue => (unshifted - f_dc, Box::new(move |r: f64| r - f_dc)),
                SidebandKind::Red => {
                    // qubit-friendly branch: the root of |f_dq − f_dc| = R nearer f_q
                    let r0 = oriented(unshifted);
                    let up = f_dc + r0;
                    let down = f_dc - r0;
                    let branch =
                        if down > 0.0 && (down - params.f_q).abs() < (up - params.f_q).abs() {
                            -1.0
                        } else {
                            1.0
                        };
                    (f_dc + branch * r0, Box::new(move |r: f64| f_dc + branch * r))
                }
            }
        }
    };

    let step = |f: f64| -> Result<f64> {
        let drive = template.with_swept_frequency(f);
        let rhs = matching_rhs(params, &drive, kind, variant, chi)?;
        Ok(map(oriented(rhs)))
    };

    let mut history = vec![seed];
    let mut x = seed;
    let mut damping = 1.0;
    let mut last_delta = 0.0;
    for iter in 1..=MATCHING_MAX_ITER {
        if !(x.is_finite() && x > 0.0) {
            return Err(Error::Divergence { history });
        }
        let fx = step(x)?;
        let delta = fx - x;
        if delta.abs() < MATCHING_TOL_GHZ {
            let drive = template.with_swept_frequency(fx);
            return Ok(MatchingSolution {
                frequency: fx,
                iterations: iter,
                damped: damping < 1.0,
                warnings: validity_warnings(params, &drive),
            });
        }
        if iter > 1 && delta * last_delta < 0.0 && damping == 1.0 {
            damping = 0.5;
        }
        last_delta = delta;
        x += damping * delta;
        history.push(x);
    }
    Err(Error::Divergence { history })
}

/// Analytic prediction for one sideband under one model variant. Rates are
/// Ω/2π in GHz.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateBreakdown {
    pub matching_f: f64,
    pub omega0: f64,
    pub omega1: f64,
    /// Signed sum omega0 + omega1.
    pub total: f64,
    pub total_abs: f64,
    pub delta_wq: f64,
    pub eps_m: f64,
    pub variant: ModelVariant,
    pub kind: SidebandKind,
    pub warnings: Vec<Warning>,
}

/// Dimensionless coefficient multiplying 2g in Ω_sb^(0).
fn transverse_coefficient(
    params: &SystemParams,
    drive: &DriveConfig,
    det: &Detunings,
    kind: SidebandKind,
    variant: ModelVariant,
) -> f64 {
    let branch_above = kind == SidebandKind::Blue || params.qubit_above_cavity();
    match drive {
        DriveConfig::Mono { tone } => {
            let e2 = tone.eps * tone.eps;
            let (d, is) = (det.delta[0], variant.inv_sigma(det.sigma[0]));
            if branch_above {
                e2 / (d * d) + 2.0 * e2 / d * is
            } else {
                e2 * is * is + 2.0 * e2 / d * is
            }
        }
        DriveConfig::Bi { qubit, cavity } => {
            let p = qubit.eps * cavity.eps;
            let (d1, d2) = (det.delta[0], det.delta[1]);
            let (is1, is2) = (
                variant.inv_sigma(det.sigma[0]),
                variant.inv_sigma(det.sigma[1]),
            );
            match kind {
                SidebandKind::Blue => 2.0 * p / (d1 * d2) + p / d1 * is2 + p / d2 * is1,
                SidebandKind::Red if params.qubit_above_cavity() => {
                    p / (d1 * d2) + p / d2 * is1 + p * is1 * is2
                }
                SidebandKind::Red => p / (d1 * d2) + p / d1 * is2 + p * is1 * is2,
            }
        }
    }
}

/// Sideband rates at a drive that satisfies the matching condition.
///
/// Ω^(0) uses detunings with ω_q replaced by ω_q + δω_q; Ω^(1) = 2g·J₁(2ε_m/Δ_qc)
/// uses the bare-frequency ε_m.
pub fn sideband_rate(
    params: &SystemParams,
    drive: &DriveConfig,
    kind: SidebandKind,
    variant: ModelVariant,
) -> Result<RateBreakdown> {
    validate(params, drive)?;
    let residual = matching_residual(params, drive, kind, variant)?;
    if residual.abs() > STALE_MATCHING_GHZ {
        return Err(Error::StaleMatching {
            residual_mhz: residual * 1e3,
        });
    }
    let bare = Detunings::new(params, drive, 0.0)?;
    let delta_wq = stark_value(&drive.tones(), &bare, variant);
    let eps_m = modulation_value(drive, &bare, variant);
    let shifted = Detunings::new(params, drive, delta_wq)?;

    let omega0 = 2.0 * params.g * transverse_coefficient(params, drive, &shifted, kind, variant);
    let omega1 = 2.0 * params.g * bessel_j1(2.0 * eps_m / bare.delta_qc)?;
    let total = omega0 + omega1;
    let mut warnings = validity_warnings(params, drive);
    warnings.extend(params.dispersive_warning());
    Ok(RateBreakdown {
        matching_f: drive.swept_frequency(),
        omega0,
        omega1,
        total,
        total_abs: total.abs(),
        delta_wq,
        eps_m,
        variant,
        kind,
        warnings,
    })
}

/// Matching frequency followed by the rates at that frequency.
pub fn predict(
    params: &SystemParams,
    template: &DriveConfig,
    kind: SidebandKind,
    variant: ModelVariant,
) -> Result<RateBreakdown> {
    let solution = matching_frequency(params, template, kind, variant)?;
    let drive = template.with_swept_frequency(solution.frequency);
    let mut out = sideband_rate(params, &drive, kind, variant)?;
    for w in solution.warnings {
        if !out.warnings.contains(&w) {
            out.warnings.push(w);
        }
    }
    Ok(out)
}

/// Size of H_drive + H₁ left over after the frame change with β(t).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EliminationResidual {
    /// max_t ‖H_drive(t) + H₁(t)‖ in GHz.
    pub max_norm: f64,
    /// `max_norm` divided by the smallest drive sum Σ_i: the dimensionless
    /// size of the uncancelled term against its own energy denominator.
    pub relative: f64,
}

/// Builds β(t) = Σ_i ε_i/Δ_i e^{+iω_i t} + ε_i/Σ_i e^{−iω_i t} (Σ part dropped
/// for the RWA variant), forms H_drive + H₁ with
/// H₁ = −ω_q(β*σ₊ + βσ₋) − i(β̇σ₋ − β̇*σ₊) at each sample time, and returns
/// the largest spectral norm of the result.
pub fn verify_drive_elimination(
    params: &SystemParams,
    drive: &DriveConfig,
    t_samples: &[f64],
    variant: ModelVariant,
) -> Result<EliminationResidual> {
    use nalgebra::DMatrix;
    use num_complex::Complex64 as C;

    validate(params, drive)?;
    let det = Detunings::new(params, drive, 0.0)?;
    let tones = drive.tones();
    let wq = TAU * params.f_q;
    // The qubit factor is all that matters; ⊗ 1_cavity leaves the norm unchanged.
    let space = Space::new(2)?;
    let sp = space.sigma_plus().0;
    let sm = space.sigma_minus().0;
    let sx = space.sigma_x().0;
    let i = C::i();

    let mut max_norm: f64 = 0.0;
    for &t in t_samples {
        let mut beta = C::new(0.0, 0.0);
        let mut beta_dot = C::new(0.0, 0.0);
        let mut h_drive = 0.0;
        for (k, tone) in tones.iter().enumerate() {
            let w = TAU * tone.f_d;
            let eps = TAU * tone.eps;
            let co = eps / (TAU * det.delta[k]);
            let counter = match variant {
                ModelVariant::Full => eps / (TAU * det.sigma[k]),
                ModelVariant::Rwa => 0.0,
            };
            let up = C::from_polar(1.0, w * t);
            let down = up.conj();
            beta += up * co + down * counter;
            beta_dot += i * w * (up * co - down * counter);
            h_drive += 2.0 * eps * (w * t).cos();
        }
        let h1: DMatrix<C> = (&sp * beta.conj() + &sm * beta) * C::new(-wq, 0.0)
            - (&sm * beta_dot - &sp * beta_dot.conj()) * i;
        let total = &sx * C::new(h_drive, 0.0) + h1;
        let norm = total.svd(false, false).singular_values.max();
        max_norm = max_norm.max(norm / TAU);
    }
    let min_sigma = det.sigma.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(EliminationResidual {
        max_norm,
        relative: max_norm / min_sigma,
    })
}
