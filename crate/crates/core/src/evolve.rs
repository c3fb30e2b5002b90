//! Time-domain propagation of the driven, dissipationless system and the
//! endpoint-sampling protocol.
//!
//! The state is integrated with classical fixed-step RK4 in the interaction
//! picture of H_QRM: writing ψ(t) = Σ_k c_k(t) e^{−iE_k t}|k⟩ over the dressed
//! eigenbasis, the coefficients obey
//!
//! ```text
//! dc/dt = −i f(t) · P(t)* ⊙ X (P(t) ⊙ c),    P_k(t) = e^{−iE_k t}
//! ```
//!
//! with X the σ_x matrix in the dressed basis and f(t) the envelope-weighted
//! drive coefficient. The transformation is exact, so this is the same
//! Schrödinger equation i dψ/dt = H(t)ψ; the free evolution is carried by
//! the phases and the integrator only sees the drive.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analytic::SidebandKind;
use crate::error::{Error, Result};
use crate::model::{
    self, dressed_basis, BareLabel, DressedBasis, DriveConfig, PulseSpec, Space, SystemParams,
};

/// Norm drift beyond which a propagation is rejected.
pub const NORM_TOLERANCE: f64 = 1e-6;
/// Upper bound on the default time step, ns.
pub const MAX_DEFAULT_DT: f64 = 1e-3;
/// Exact phase recomputation interval for the rotating-phase recurrence.
const PHASE_RESYNC: usize = 512;
/// Dressed σ_x entries below this are parity-forbidden rounding noise.
const SPARSE_CUTOFF: f64 = 1e-13;

/// Norm drift allowed per ns of propagation at the default step.
const DRIFT_BUDGET_PER_NS: f64 = 2e-13;
/// RK4 norm drift per ns is about this times a² w⁴ dt⁵, with a the drive
/// amplitude and w the counter-rotating qubit frequency ω_q + ω_d (rad/ns).
const DRIFT_COEFF: f64 = 2.1e-4;

/// Default step: min(1/(40·f_max), 1 ps) with f_max the largest frequency
/// scale (f_q, f_c, each f_d, and twice the largest f_d), further reduced
/// when needed so that the norm drift stays below 2e-10 per μs.
pub fn default_dt(params: &SystemParams, drive: &DriveConfig) -> f64 {
    let tones = drive.tones();
    let max_drive = tones.iter().map(|t| t.f_d).fold(0.0, f64::max);
    let f_max = params.f_q.max(params.f_c).max(2.0 * max_drive);
    let amp = 2.0 * TAU * tones.iter().map(|t| t.eps.abs()).sum::<f64>();
    let w = TAU * (params.f_q + max_drive);
    let unitary = (DRIFT_BUDGET_PER_NS / (DRIFT_COEFF * amp * amp * w.powi(4))).powf(0.2);
    (1.0 / (40.0 * f_max)).min(MAX_DEFAULT_DT).min(unitary)
}

/// Pure state in the bare product basis (lab frame).
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    pub amplitudes: DVector<Complex64>,
}

impl QuantumState {
    pub fn bare(space: Space, label: BareLabel) -> Self {
        let mut amplitudes = DVector::zeros(space.dim());
        amplitudes[space.index(label)] = Complex64::new(1.0, 0.0);
        Self { amplitudes }
    }

    pub fn dressed(basis: &DressedBasis, label: BareLabel) -> Option<Self> {
        basis.vector(label).map(|v| Self {
            amplitudes: v.map(|x| Complex64::new(x, 0.0)),
        })
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// |⟨k|ψ⟩|² for every dressed eigenvector k, in eigenbasis order.
    pub fn dressed_populations(&self, basis: &DressedBasis) -> Vec<f64> {
        (0..basis.dim())
            .map(|k| {
                basis
                    .vectors
                    .column(k)
                    .iter()
                    .zip(self.amplitudes.iter())
                    .map(|(v, a)| a * *v)
                    .sum::<Complex64>()
                    .norm_sqr()
            })
            .collect()
    }

    pub fn bare_population(&self, space: Space, label: BareLabel) -> f64 {
        self.amplitudes[space.index(label)].norm_sqr()
    }
}

/// Initial and target dressed levels of a sideband and the measured contrast.
pub fn sideband_levels(kind: SidebandKind) -> (BareLabel, BareLabel) {
    match kind {
        SidebandKind::Blue => (BareLabel::g(0), BareLabel::e(1)),
        SidebandKind::Red => (BareLabel::e(0), BareLabel::g(1)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub t_ns: f64,
    pub observable: f64,
    pub norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TracePoint {
    pub flat_len: f64,
    pub observable: f64,
}

/// Endpoint observable against pulse flat length. Blue: P(e1) − P(g0);
/// red: P(e0) − P(g1), in the dressed basis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeTrace {
    pub kind: SidebandKind,
    pub points: Vec<TracePoint>,
}

impl TimeTrace {
    pub fn times(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.flat_len).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.observable).collect()
    }
}

/// Simulation knobs shared by the evolve and sweep layers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimOptions {
    pub n_fock: usize,
    /// Fixed RK4 step in ns; `None` selects [`default_dt`].
    pub dt: Option<f64>,
    pub edge_len: f64,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            n_fock: model::DEFAULT_N_FOCK,
            dt: None,
            edge_len: model::DEFAULT_EDGE_NS,
        }
    }
}

impl SimOptions {
    pub fn validate(&self) -> Result<()> {
        Space::new(self.n_fock)?;
        if let Some(dt) = self.dt {
            check_dt(dt)?;
        }
        PulseSpec::new(0.0, self.edge_len)?;
        Ok(())
    }

    pub fn dt_for(&self, params: &SystemParams, drive: &DriveConfig) -> f64 {
        self.dt.unwrap_or_else(|| default_dt(params, drive))
    }
}

/// Dressed-frame data for one (params, n_fock) pair; reusable across drives.
#[derive(Debug, Clone)]
pub struct Propagator {
    params: SystemParams,
    basis: DressedBasis,
    /// σ_x in the dressed basis as compressed rows; parity makes half of it vanish.
    x_rows: Vec<usize>,
    x_cols: Vec<usize>,
    x_vals: Vec<f64>,
}

impl Propagator {
    pub fn new(params: &SystemParams, n_fock: usize) -> Result<Self> {
        let basis = dressed_basis(params, n_fock)?;
        let space = Space::new(n_fock)?;
        let sx = space.sigma_x().real();
        let xd = basis.vectors.transpose() * sx * &basis.vectors;
        let dim = basis.dim();
        let mut x_rows = vec![0];
        let (mut x_cols, mut x_vals) = (Vec::new(), Vec::new());
        for i in 0..dim {
            for j in 0..dim {
                if xd[(i, j)].abs() > SPARSE_CUTOFF {
                    x_cols.push(j);
                    x_vals.push(xd[(i, j)]);
                }
            }
            x_rows.push(x_cols.len());
        }
        Ok(Self {
            params: *params,
            basis,
            x_rows,
            x_cols,
            x_vals,
        })
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn basis(&self) -> &DressedBasis {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// Interaction-frame coefficients of a lab-frame state at time `t`.
    pub fn to_frame(&self, state: &QuantumState, t: f64) -> Vec<Complex64> {
        (0..self.dim())
            .map(|k| {
                let overlap: Complex64 = self
                    .basis
                    .vectors
                    .column(k)
                    .iter()
                    .zip(state.amplitudes.iter())
                    .map(|(v, a)| a * *v)
                    .sum();
                overlap * Complex64::from_polar(1.0, self.basis.energies[k] * t)
            })
            .collect()
    }

    /// Lab-frame state from interaction-frame coefficients at time `t`.
    pub fn to_lab(&self, coeffs: &[Complex64], t: f64) -> QuantumState {
        let dim = self.dim();
        let rotated: Vec<Complex64> = coeffs
            .iter()
            .zip(&self.basis.energies)
            .map(|(c, e)| c * Complex64::from_polar(1.0, -e * t))
            .collect();
        let amplitudes = DVector::from_fn(dim, |i, _| {
            (0..dim)
                .map(|k| rotated[k] * self.basis.vectors[(i, k)])
                .sum()
        });
        QuantumState { amplitudes }
    }

    /// Advances interaction-frame coefficients from `t0` to `t1` with RK4
    /// steps no longer than `dt`. `observe` is called after every step.
    #[allow(clippy::too_many_arguments)]
    pub fn advance<F: FnMut(f64, &[Complex64])>(
        &self,
        drive: &DriveConfig,
        pulse: &PulseSpec,
        coeffs: &mut [Complex64],
        t0: f64,
        t1: f64,
        dt: f64,
        observe: &mut F,
    ) {
        if t1 <= t0 {
            return;
        }
        let steps = ((t1 - t0) / dt - 1e-9).ceil().max(1.0) as usize;
        let h = (t1 - t0) / steps as f64;
        let dim = self.dim();
        let tones: Vec<(f64, f64)> = drive
            .tones()
            .iter()
            .map(|t| (2.0 * TAU * t.eps, TAU * t.f_d))
            .collect();
        let coeff = |t: f64| -> f64 {
            let env = pulse.envelope(t);
            if env == 0.0 {
                0.0
            } else {
                env * tones.iter().map(|(a, w)| a * (w * t).cos()).sum::<f64>()
            }
        };

        let energies = &self.basis.energies;
        let half_rot: Vec<Complex64> = energies
            .iter()
            .map(|e| Complex64::from_polar(1.0, -e * h / 2.0))
            .collect();
        let exact = |t: f64, out: &mut [Complex64]| {
            for (p, e) in out.iter_mut().zip(energies) {
                *p = Complex64::from_polar(1.0, -e * t);
            }
        };

        let mut p0 = vec![Complex64::default(); dim];
        let mut p_half = vec![Complex64::default(); dim];
        let mut p1 = vec![Complex64::default(); dim];
        let mut k = [
            vec![Complex64::default(); dim],
            vec![Complex64::default(); dim],
            vec![Complex64::default(); dim],
            vec![Complex64::default(); dim],
        ];
        let mut tmp = vec![Complex64::default(); dim];
        let mut rotated = vec![Complex64::default(); dim];
        exact(t0, &mut p0);

        for step in 0..steps {
            let t = t0 + step as f64 * h;
            let (f0, fh, f1) = (coeff(t), coeff(t + 0.5 * h), coeff(t + h));
            if step % PHASE_RESYNC == 0 {
                exact(t, &mut p0);
            }
            for i in 0..dim {
                p_half[i] = p0[i] * half_rot[i];
                p1[i] = p_half[i] * half_rot[i];
            }
            if f0 != 0.0 || fh != 0.0 || f1 != 0.0 {
                let stages = [(f0, 0.0), (fh, 0.5), (fh, 0.5), (f1, 1.0)];
                for s in 0..4 {
                    let (f, frac) = stages[s];
                    let phase = match s {
                        0 => &p0,
                        3 => &p1,
                        _ => &p_half,
                    };
                    if s == 0 {
                        tmp.copy_from_slice(coeffs);
                    } else {
                        for i in 0..dim {
                            tmp[i] = coeffs[i] + k[s - 1][i] * (frac * h);
                        }
                    }
                    for i in 0..dim {
                        rotated[i] = tmp[i] * phase[i];
                    }
                    let out = &mut k[s];
                    for i in 0..dim {
                        let span = self.x_rows[i]..self.x_rows[i + 1];
                        let mut acc = Complex64::default();
                        for (&j, &x) in self.x_cols[span.clone()].iter().zip(&self.x_vals[span]) {
                            acc += rotated[j] * x;
                        }
                        // −i f · P* ⊙ (X P c)
                        let v = acc * phase[i].conj() * f;
                        out[i] = Complex64::new(v.im, -v.re);
                    }
                }
                for i in 0..dim {
                    coeffs[i] += (k[0][i] + (k[1][i] + k[2][i]) * 2.0 + k[3][i]) * (h / 6.0);
                }
            }
            std::mem::swap(&mut p0, &mut p1);
            observe(t + h, coeffs);
        }
    }

    /// Lab-frame (dressed-basis) map over one drive period of a flat-topped
    /// mono-chromatic drive, built from the same RK4 steps as [`Propagator::advance`]
    /// with the period split into whole steps. The step maps depend on time only
    /// through the drive phase, so the result applies from any `anchor + k·T`.
    fn period_map(
        &self,
        drive: &DriveConfig,
        pulse: &PulseSpec,
        anchor: f64,
        dt: f64,
    ) -> Option<(f64, DMatrix<Complex64>)> {
        let [tone] = drive.tones()[..] else {
            return None;
        };
        if tone.f_d <= 0.0 {
            return None;
        }
        let period = 1.0 / tone.f_d;
        let h = period / (period / dt - 1e-9).ceil();
        let dim = self.dim();
        let mut u = DMatrix::zeros(dim, dim);
        for j in 0..dim {
            let mut c = vec![Complex64::default(); dim];
            c[j] = Complex64::from_polar(1.0, self.basis.energies[j] * anchor);
            self.advance(drive, pulse, &mut c, anchor, anchor + period, h, &mut |_, _| {});
            for (i, z) in c.iter().enumerate() {
                u[(i, j)] = z * Complex64::from_polar(1.0, -self.basis.energies[i] * (anchor + period));
            }
        }
        Some((period, u))
    }

    /// Advances across a flat-top segment, jumping whole drive periods with
    /// the period map when that is cheaper than stepping.
    #[allow(clippy::too_many_arguments)]
    fn advance_flat(
        &self,
        drive: &DriveConfig,
        pulse: &PulseSpec,
        c: &mut [Complex64],
        t0: f64,
        t1: f64,
        dt: f64,
    ) {
        let dim = self.dim() as f64;
        let periods = drive
            .tones()
            .first()
            .map(|t| ((t1 - t0) * t.f_d).floor())
            .unwrap_or(0.0);
        let map = if periods > 2.0 * dim {
            self.period_map(drive, pulse, t0, dt)
        } else {
            None
        };
        let Some((period, u)) = map else {
            self.advance(drive, pulse, c, t0, t1, dt, &mut |_, _| {});
            return;
        };
        let mut flat = FlatTop::new(self, t0, period, u, c);
        let t = flat.jump_to(t1);
        flat.branch(c);
        self.advance(drive, pulse, c, t, t1, dt, &mut |_, _| {});
    }

    /// Sideband observable from interaction-frame coefficients (dressed populations).
    pub fn observable(&self, kind: SidebandKind, coeffs: &[Complex64]) -> f64 {
        let (from, to) = sideband_levels(kind);
        let pop = |l: BareLabel| {
            self.basis
                .index_of(l)
                .map(|k| coeffs[k].norm_sqr())
                .unwrap_or(0.0)
        };
        pop(to) - pop(from)
    }

    /// Full-pulse propagation of a lab-frame state; returns the lab-frame
    /// state at the end of the pulse.
    pub fn propagate(
        &self,
        drive: &DriveConfig,
        pulse: &PulseSpec,
        state0: &QuantumState,
        dt: f64,
    ) -> Result<QuantumState> {
        let end = pulse.total_duration();
        let mut c = self.to_frame(state0, 0.0);
        let n0 = norm(&c);
        let (rise, fall) = (pulse.edge_len, pulse.edge_len + pulse.flat_len);
        self.advance(drive, pulse, &mut c, 0.0, rise, dt, &mut |_, _| {});
        self.advance_flat(drive, pulse, &mut c, rise, fall, dt);
        self.advance(drive, pulse, &mut c, fall, end, dt, &mut |_, _| {});
        check_norm(n0, norm(&c), dt)?;
        Ok(self.to_lab(&c, end))
    }

    /// Like [`Propagator::propagate`] but also samples the observable every
    /// `sample_every` steps.
    pub fn propagate_dense(
        &self,
        drive: &DriveConfig,
        pulse: &PulseSpec,
        state0: &QuantumState,
        dt: f64,
        kind: SidebandKind,
        sample_every: usize,
    ) -> Result<(QuantumState, Vec<TrajectoryPoint>)> {
        let end = pulse.total_duration();
        let mut c = self.to_frame(state0, 0.0);
        let n0 = norm(&c);
        let mut points = vec![TrajectoryPoint {
            t_ns: 0.0,
            observable: self.observable(kind, &c),
            norm: n0,
        }];
        let every = sample_every.max(1);
        let mut count = 0usize;
        let mut record = |t: f64, c: &[Complex64]| {
            count += 1;
            if count.is_multiple_of(every) {
                points.push(TrajectoryPoint {
                    t_ns: t,
                    observable: self.observable(kind, c),
                    norm: norm(c),
                });
            }
        };
        self.run_segments(drive, pulse, &mut c, end, dt, &mut record)?;
        check_norm(n0, norm(&c), dt)?;
        Ok((self.to_lab(&c, end), points))
    }

    fn run_segments<F: FnMut(f64, &[Complex64])>(
        &self,
        drive: &DriveConfig,
        pulse: &PulseSpec,
        c: &mut [Complex64],
        end: f64,
        dt: f64,
        observe: &mut F,
    ) -> Result<()> {
        let bounds = [
            0.0,
            pulse.edge_len,
            pulse.edge_len + pulse.flat_len,
            end,
        ];
        for w in bounds.windows(2) {
            self.advance(drive, pulse, c, w[0], w[1], dt, observe);
        }
        Ok(())
    }

    /// Endpoint trace: for every flat length, the observable after the
    /// full edged pulse, starting from the dressed initial level.
    ///
    /// One run through the rise and the shared flat top serves all lengths;
    /// each length branches off with its own falling edge.
    pub fn endpoint_trace(
        &self,
        drive: &DriveConfig,
        kind: SidebandKind,
        flat_lens: &[f64],
        edge_len: f64,
        dt: f64,
    ) -> Result<TimeTrace> {
        validate_lengths(flat_lens)?;
        let (from, _) = sideband_levels(kind);
        let start = self.basis.index_of(from).ok_or(Error::InvalidParameter {
            field: "n_fock",
            reason: "initial level missing from the truncated space".into(),
        })?;
        let mut c = vec![Complex64::default(); self.dim()];
        c[start] = Complex64::new(1.0, 0.0);

        let longest = PulseSpec::new(*flat_lens.last().unwrap(), edge_len)?;
        self.advance(drive, &longest, &mut c, 0.0, edge_len, dt, &mut |_, _| {});
        // Whole drive periods of the flat top go through the period map; each
        // length then steps the sub-period remainder on its own branch.
        let mut flat = if longest.flat_len * drive.tones()[0].f_d > 2.0 * self.dim() as f64 {
            self.period_map(drive, &longest, edge_len, dt)
                .map(|(period, u)| FlatTop::new(self, edge_len, period, u, &c))
        } else {
            None
        };
        let mut t = edge_len;
        let mut points = Vec::with_capacity(flat_lens.len());
        for &len in flat_lens {
            let end = edge_len + len;
            let mut branch = match flat.as_mut() {
                Some(flat) => {
                    t = flat.jump_to(end);
                    let mut b = c.clone();
                    flat.branch(&mut b);
                    b
                }
                None => c.clone(),
            };
            self.advance(drive, &longest, &mut branch, t, end, dt, &mut |_, _| {});
            if flat.is_none() {
                c.copy_from_slice(&branch);
                t = end;
            }
            let pulse = PulseSpec::new(len, edge_len)?;
            self.advance(drive, &pulse, &mut branch, end, pulse.total_duration(), dt, &mut |_, _| {});
            check_norm(1.0, norm(&branch), dt)?;
            points.push(TracePoint {
                flat_len: len,
                observable: self.observable(kind, &branch),
            });
        }
        Ok(TimeTrace { kind, points })
    }
}

/// Trunk state on the flat top, held in the lab frame (dressed basis) at
/// whole drive periods after `anchor`.
struct FlatTop<'a> {
    prop: &'a Propagator,
    anchor: f64,
    period: f64,
    map: DMatrix<Complex64>,
    periods: u64,
    psi: DVector<Complex64>,
}

impl<'a> FlatTop<'a> {
    fn new(
        prop: &'a Propagator,
        anchor: f64,
        period: f64,
        map: DMatrix<Complex64>,
        coeffs: &[Complex64],
    ) -> Self {
        let energies = &prop.basis.energies;
        let psi = DVector::from_iterator(
            coeffs.len(),
            coeffs
                .iter()
                .zip(energies.iter())
                .map(|(c, e)| c * Complex64::from_polar(1.0, -e * anchor)),
        );
        Self {
            prop,
            anchor,
            period,
            map,
            periods: 0,
            psi,
        }
    }

    fn time(&self) -> f64 {
        self.anchor + self.periods as f64 * self.period
    }

    /// Applies whole periods up to the last boundary not after `t`; returns that boundary.
    fn jump_to(&mut self, t: f64) -> f64 {
        let target = ((t - self.anchor) / self.period + 1e-9).floor().max(0.0) as u64;
        while self.periods < target {
            self.psi = &self.map * &self.psi;
            self.periods += 1;
        }
        self.time()
    }

    /// Interaction-frame coefficients at the current boundary.
    fn branch(&self, out: &mut [Complex64]) {
        let t = self.time();
        for ((o, p), e) in out.iter_mut().zip(self.psi.iter()).zip(self.prop.basis.energies.iter()) {
            *o = p * Complex64::from_polar(1.0, e * t);
        }
    }
}

fn validate_lengths(flat_lens: &[f64]) -> Result<()> {
    let reason = if flat_lens.is_empty() {
        Some("at least one pulse length is required")
    } else if flat_lens.iter().any(|l| !l.is_finite() || *l < 0.0) {
        Some("pulse lengths must be finite and non-negative")
    } else if flat_lens.windows(2).any(|w| w[1] <= w[0]) {
        Some("pulse lengths must be strictly increasing")
    } else {
        None
    };
    match reason {
        Some(r) => Err(Error::InvalidParameter {
            field: "flat_lens",
            reason: r.into(),
        }),
        None => Ok(()),
    }
}

fn norm(c: &[Complex64]) -> f64 {
    c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn check_norm(before: f64, after: f64, dt: f64) -> Result<()> {
    let drift = (after - before).abs();
    if drift > NORM_TOLERANCE {
        Err(Error::StepSize { drift, dt })
    } else {
        Ok(())
    }
}

/// Propagates `state0` through the full edged pulse with step `dt`.
pub fn propagate(
    params: &SystemParams,
    drive: &DriveConfig,
    pulse: &PulseSpec,
    state0: &QuantumState,
    dt: f64,
    n_fock: usize,
) -> Result<QuantumState> {
    drive.validate()?;
    check_dt(dt)?;
    let prop = Propagator::new(params, n_fock)?;
    if state0.amplitudes.len() != prop.dim() {
        return Err(Error::InvalidParameter {
            field: "state0",
            reason: format!(
                "dimension {} does not match 2·n_fock = {}",
                state0.amplitudes.len(),
                prop.dim()
            ),
        });
    }
    prop.propagate(drive, pulse, state0, dt)
}

/// Endpoint trace with default step and edge length.
pub fn endpoint_observable(
    params: &SystemParams,
    drive: &DriveConfig,
    kind: SidebandKind,
    flat_lens: &[f64],
    n_fock: usize,
) -> Result<TimeTrace> {
    let opts = SimOptions {
        n_fock,
        ..SimOptions::default()
    };
    endpoint_observable_with(params, drive, kind, flat_lens, &opts)
}

pub fn endpoint_observable_with(
    params: &SystemParams,
    drive: &DriveConfig,
    kind: SidebandKind,
    flat_lens: &[f64],
    opts: &SimOptions,
) -> Result<TimeTrace> {
    drive.validate()?;
    let dt = opts.dt_for(params, drive);
    check_dt(dt)?;
    let prop = Propagator::new(params, opts.n_fock)?;
    prop.endpoint_trace(drive, kind, flat_lens, opts.edge_len, dt)
}

fn check_dt(dt: f64) -> Result<()> {
    if dt.is_finite() && dt > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            field: "dt",
            reason: format!("must be finite and positive, got {dt}"),
        })
    }
}
