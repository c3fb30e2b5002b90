//! Truncated qubit ⊗ cavity Hilbert space, quantum Rabi Hamiltonian, drive
//! terms, pulse envelope and the dressed eigenbasis.
//!
//! External quantities are linear frequencies in GHz and times in ns. Matrices
//! returned here are in angular units (rad/ns), i.e. every frequency is
//! multiplied by 2π before it enters an operator.
//!
//! Product basis ordering: index = q·N + n with q = 0 for |g⟩, q = 1 for |e⟩
//! and n the photon number, N the Fock truncation.

use std::f64::consts::TAU;
use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Warning};

/// Default Fock truncation for single-excitation sideband dynamics.
pub const DEFAULT_N_FOCK: usize = 6;
/// Default Gaussian rise/fall duration in ns.
pub const DEFAULT_EDGE_NS: f64 = 10.0;
/// Gaussian flank truncation point, in units of σ.
const EDGE_SIGMAS: f64 = 2.5;

/// Qubit and cavity frequencies and transverse coupling, all in GHz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemParams {
    pub f_q: f64,
    pub f_c: f64,
    pub g: f64,
}

impl SystemParams {
    pub fn new(f_q: f64, f_c: f64, g: f64) -> Result<Self> {
        let params = Self { f_q, f_c, g };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        positive("f_q", self.f_q)?;
        positive("f_c", self.f_c)?;
        if !(self.g.is_finite() && self.g >= 0.0) {
            return Err(Error::InvalidParameter {
                field: "g",
                reason: format!("must be finite and non-negative, got {}", self.g),
            });
        }
        Ok(())
    }

    pub fn qubit_above_cavity(&self) -> bool {
        self.f_q > self.f_c
    }

    /// Set when |f_q − f_c| < 5g.
    pub fn dispersive_warning(&self) -> Option<Warning> {
        let detuning = (self.f_q - self.f_c).abs();
        (detuning < 5.0 * self.g).then_some(Warning::NonDispersive {
            detuning,
            g: self.g,
        })
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            f_q: self.f_q * k,
            f_c: self.f_c * k,
            g: self.g * k,
        }
    }
}

fn positive(field: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            field,
            reason: format!("must be finite and positive, got {value}"),
        })
    }
}

/// One drive tone: strength ε_d = Ω_d/2 and frequency, both in GHz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveTone {
    pub eps: f64,
    pub f_d: f64,
}

impl DriveTone {
    pub fn new(eps: f64, f_d: f64) -> Result<Self> {
        let tone = Self { eps, f_d };
        tone.validate()?;
        Ok(tone)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps.is_finite() && self.eps >= 0.0) {
            return Err(Error::InvalidParameter {
                field: "eps",
                reason: format!("must be finite and non-negative, got {}", self.eps),
            });
        }
        positive("f_d", self.f_d)
    }
}

/// Monochromatic or bi-chromatic transverse drive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum DriveConfig {
    Mono { tone: DriveTone },
    /// `qubit` is the qubit-friendly tone (ω_dq), `cavity` the cavity-friendly one (ω_dc).
    Bi { qubit: DriveTone, cavity: DriveTone },
}

impl DriveConfig {
    pub fn mono(eps: f64, f_d: f64) -> Self {
        DriveConfig::Mono {
            tone: DriveTone { eps, f_d },
        }
    }

    pub fn bi(eps_q: f64, f_dq: f64, eps_c: f64, f_dc: f64) -> Self {
        DriveConfig::Bi {
            qubit: DriveTone {
                eps: eps_q,
                f_d: f_dq,
            },
            cavity: DriveTone {
                eps: eps_c,
                f_d: f_dc,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DriveConfig::Mono { tone } => tone.validate(),
            DriveConfig::Bi { qubit, cavity } => {
                qubit.validate()?;
                cavity.validate()?;
                if qubit.f_d == cavity.f_d {
                    return Err(Error::InvalidParameter {
                        field: "f_dq",
                        reason: "bi-chromatic tones must have different frequencies".into(),
                    });
                }
                Ok(())
            }
        }
    }

    pub fn tones(&self) -> Vec<DriveTone> {
        match *self {
            DriveConfig::Mono { tone } => vec![tone],
            DriveConfig::Bi { qubit, cavity } => vec![qubit, cavity],
        }
    }

    /// Frequency of the tone that the matching search moves (f_d or f_dq).
    pub fn swept_frequency(&self) -> f64 {
        match self {
            DriveConfig::Mono { tone } => tone.f_d,
            DriveConfig::Bi { qubit, .. } => qubit.f_d,
        }
    }

    pub fn with_swept_frequency(&self, f: f64) -> Self {
        let mut out = *self;
        match &mut out {
            DriveConfig::Mono { tone } => tone.f_d = f,
            DriveConfig::Bi { qubit, .. } => qubit.f_d = f,
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.tones().iter().all(|t| t.eps == 0.0)
    }

    pub fn scaled(&self, k: f64) -> Self {
        match *self {
            DriveConfig::Mono { tone } => DriveConfig::mono(tone.eps * k, tone.f_d * k),
            DriveConfig::Bi { qubit, cavity } => {
                DriveConfig::bi(qubit.eps * k, qubit.f_d * k, cavity.eps * k, cavity.f_d * k)
            }
        }
    }
}

/// Flat-top pulse with Gaussian rise and fall. `flat_len` excludes the edges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    pub flat_len: f64,
    pub edge_len: f64,
}

impl PulseSpec {
    pub fn new(flat_len: f64, edge_len: f64) -> Result<Self> {
        if !(flat_len.is_finite() && flat_len >= 0.0) {
            return Err(Error::InvalidParameter {
                field: "flat_len",
                reason: format!("must be finite and non-negative, got {flat_len}"),
            });
        }
        positive("edge_len", edge_len)?;
        Ok(Self { flat_len, edge_len })
    }

    pub fn with_flat(flat_len: f64) -> Self {
        Self {
            flat_len,
            edge_len: DEFAULT_EDGE_NS,
        }
    }

    pub fn total_duration(&self) -> f64 {
        self.flat_len + 2.0 * self.edge_len
    }

    /// Envelope amplitude in [0, 1]; zero outside the pulse.
    pub fn envelope(&self, t: f64) -> f64 {
        let total = self.total_duration();
        if !(0.0..=total).contains(&t) {
            return 0.0;
        }
        if t < self.edge_len {
            gaussian_flank(self.edge_len - t, self.edge_len)
        } else if t > self.edge_len + self.flat_len {
            gaussian_flank(t - self.edge_len - self.flat_len, self.edge_len)
        } else {
            1.0
        }
    }
}

/// Rescaled truncated Gaussian: 1 at `offset = 0`, exactly 0 at `offset = edge_len`.
fn gaussian_flank(offset: f64, edge_len: f64) -> f64 {
    let sigma = edge_len / EDGE_SIGMAS;
    let floor = (-0.5 * EDGE_SIGMAS * EDGE_SIGMAS).exp();
    let raw = (-0.5 * (offset / sigma).powi(2)).exp();
    ((raw - floor) / (1.0 - floor)).clamp(0.0, 1.0)
}

/// Dense complex operator on the truncated qubit ⊗ cavity space.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator(pub DMatrix<Complex64>);

impl Operator {
    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    /// max |H − H†| over all entries.
    pub fn hermiticity_error(&self) -> f64 {
        let m = &self.0;
        let mut err: f64 = 0.0;
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                err = err.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        err
    }

    /// Real part; the builders here only ever produce real matrices.
    pub fn real(&self) -> DMatrix<f64> {
        self.0.map(|z| z.re)
    }

    pub fn is_diagonal(&self) -> bool {
        let m = &self.0;
        (0..m.nrows()).all(|i| (0..m.ncols()).all(|j| i == j || m[(i, j)].norm() == 0.0))
    }
}

/// Qubit ⊗ truncated cavity product space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Space {
    pub n_fock: usize,
}

impl Space {
    pub fn new(n_fock: usize) -> Result<Self> {
        if n_fock < 2 {
            return Err(Error::InvalidTruncation(n_fock));
        }
        Ok(Self { n_fock })
    }

    pub fn dim(&self) -> usize {
        2 * self.n_fock
    }

    pub fn index(&self, label: BareLabel) -> usize {
        label.qubit.index() * self.n_fock + label.photons
    }

    pub fn label(&self, index: usize) -> BareLabel {
        BareLabel {
            qubit: if index < self.n_fock { Qubit::G } else { Qubit::E },
            photons: index % self.n_fock,
        }
    }

    fn build(&self, entry: impl Fn(BareLabel, BareLabel) -> f64) -> Operator {
        let dim = self.dim();
        Operator(DMatrix::from_fn(dim, dim, |i, j| {
            Complex64::new(entry(self.label(i), self.label(j)), 0.0)
        }))
    }

    pub fn sigma_z(&self) -> Operator {
        self.build(|r, c| if r == c { r.qubit.sign() } else { 0.0 })
    }

    pub fn sigma_x(&self) -> Operator {
        self.build(|r, c| {
            if r.photons == c.photons && r.qubit != c.qubit {
                1.0
            } else {
                0.0
            }
        })
    }

    /// σ₊ = |e⟩⟨g|.
    pub fn sigma_plus(&self) -> Operator {
        self.build(|r, c| {
            if r.photons == c.photons && r.qubit == Qubit::E && c.qubit == Qubit::G {
                1.0
            } else {
                0.0
            }
        })
    }

    pub fn sigma_minus(&self) -> Operator {
        Operator(self.sigma_plus().0.adjoint())
    }

    pub fn annihilation(&self) -> Operator {
        self.build(|r, c| {
            if r.qubit == c.qubit && c.photons == r.photons + 1 {
                (c.photons as f64).sqrt()
            } else {
                0.0
            }
        })
    }

    pub fn creation(&self) -> Operator {
        Operator(self.annihilation().0.adjoint())
    }

    pub fn number(&self) -> Operator {
        self.build(|r, c| if r == c { r.photons as f64 } else { 0.0 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Qubit {
    G,
    E,
}

impl Qubit {
    fn index(self) -> usize {
        match self {
            Qubit::G => 0,
            Qubit::E => 1,
        }
    }

    fn sign(self) -> f64 {
        match self {
            Qubit::G => -1.0,
            Qubit::E => 1.0,
        }
    }
}

/// Bare product-state label |q n⟩.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BareLabel {
    pub qubit: Qubit,
    pub photons: usize,
}

impl BareLabel {
    pub const fn g(photons: usize) -> Self {
        Self {
            qubit: Qubit::G,
            photons,
        }
    }

    pub const fn e(photons: usize) -> Self {
        Self {
            qubit: Qubit::E,
            photons,
        }
    }
}

impl fmt::Display for BareLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let q = match self.qubit {
            Qubit::G => 'g',
            Qubit::E => 'e',
        };
        write!(f, "|{q}{}⟩", self.photons)
    }
}

/// (ω_q/2)σ_z + ω_c a†a + g(a† + a)σ_x in rad/ns.
pub fn qrm_hamiltonian(params: &SystemParams, n_fock: usize) -> Result<Operator> {
    params.validate()?;
    let space = Space::new(n_fock)?;
    let (wq, wc, g) = (TAU * params.f_q, TAU * params.f_c, TAU * params.g);
    let a = space.annihilation().0;
    let coupling = (&a + a.adjoint()) * space.sigma_x().0;
    let h = space.sigma_z().0 * Complex64::new(wq / 2.0, 0.0)
        + space.number().0 * Complex64::new(wc, 0.0)
        + coupling * Complex64::new(g, 0.0);
    Ok(Operator(h))
}

/// Time-dependent drive coefficient multiplying σ_x, in rad/ns:
/// envelope(t) · Σ_i 2ε_i·2π · cos(2π f_i t).
pub fn drive_coefficient(drive: &DriveConfig, pulse: &PulseSpec, t: f64) -> f64 {
    let env = pulse.envelope(t);
    if env == 0.0 {
        return 0.0;
    }
    env * drive
        .tones()
        .iter()
        .map(|tone| 2.0 * TAU * tone.eps * (TAU * tone.f_d * t).cos())
        .sum::<f64>()
}

/// H_QRM + envelope(t)·Σ_i 2ε_i cos(ω_i t)·σ_x.
pub fn total_hamiltonian(
    params: &SystemParams,
    drive: &DriveConfig,
    pulse: &PulseSpec,
    t: f64,
    n_fock: usize,
) -> Result<Operator> {
    drive.validate()?;
    let h0 = qrm_hamiltonian(params, n_fock)?;
    let c = drive_coefficient(drive, pulse, t);
    let sx = Space::new(n_fock)?.sigma_x().0;
    Ok(Operator(h0.0 + sx * Complex64::new(c, 0.0)))
}

/// Eigenbasis of H_QRM with every eigenvector labeled by its dominant bare state.
#[derive(Debug, Clone)]
pub struct DressedBasis {
    pub n_fock: usize,
    /// Eigenvalues in rad/ns, ascending.
    pub energies: Vec<f64>,
    /// Orthonormal real eigenvectors as columns, in the bare product basis.
    /// Each column's sign makes its overlap with the labeled bare state positive.
    pub vectors: DMatrix<f64>,
    /// `labels[k]` is the bare label of eigenvector `k`.
    pub labels: Vec<BareLabel>,
    pub warnings: Vec<Warning>,
}

impl DressedBasis {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn index_of(&self, label: BareLabel) -> Option<usize> {
        self.labels.iter().position(|&l| l == label)
    }

    pub fn vector(&self, label: BareLabel) -> Option<DVector<f64>> {
        self.index_of(label)
            .map(|k| self.vectors.column(k).into_owned())
    }

    /// Energy of a labeled level in rad/ns.
    pub fn energy(&self, label: BareLabel) -> Option<f64> {
        self.index_of(label).map(|k| self.energies[k])
    }

    /// (E_to − E_from)/2π in GHz.
    pub fn transition_ghz(&self, from: BareLabel, to: BareLabel) -> Option<f64> {
        Some((self.energy(to)? - self.energy(from)?) / TAU)
    }

    /// |⟨bare|dressed_k⟩|² for the labeled state of eigenvector k.
    pub fn label_overlap(&self, k: usize) -> f64 {
        let space = Space {
            n_fock: self.n_fock,
        };
        self.vectors[(space.index(self.labels[k]), k)].powi(2)
    }
}

pub fn dressed_basis(params: &SystemParams, n_fock: usize) -> Result<DressedBasis> {
    let h = qrm_hamiltonian(params, n_fock)?;
    let space = Space::new(n_fock)?;
    let eig = SymmetricEigen::new(h.real());
    let dim = space.dim();

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let mut energies = Vec::with_capacity(dim);
    let mut vectors = DMatrix::zeros(dim, dim);
    let mut labels = Vec::with_capacity(dim);
    let mut owner: Vec<Option<usize>> = vec![None; dim];

    for (k, &src) in order.iter().enumerate() {
        let col = eig.eigenvectors.column(src);
        let (best, _) = col
            .iter()
            .enumerate()
            .fold((0, -1.0), |(bi, bv), (i, v)| {
                if v.abs() > bv {
                    (i, v.abs())
                } else {
                    (bi, bv)
                }
            });
        if let Some(first) = owner[best] {
            return Err(Error::LabelingConflict {
                first,
                second: k,
                label: space.label(best).to_string(),
            });
        }
        owner[best] = Some(k);
        let sign = if col[best] < 0.0 { -1.0 } else { 1.0 };
        vectors.set_column(k, &(col * sign));
        energies.push(eig.eigenvalues[src]);
        labels.push(space.label(best));
    }

    Ok(DressedBasis {
        n_fock,
        energies,
        vectors,
        labels,
        warnings: params.dispersive_warning().into_iter().collect(),
    })
}
