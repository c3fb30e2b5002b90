use std::fmt;

use serde::Serialize;

/// Errors raised by the model, analytic, evolve and sweep layers.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("Fock truncation must be at least 2, got {0}")]
    InvalidTruncation(usize),

    #[error("degenerate system: qubit and cavity are resonant (Δ_qc = 0)")]
    DegenerateSystem,

    #[error("drive tone at {f_d} GHz is resonant with the qubit")]
    ResonantDrive { f_d: f64 },

    #[error("dressed-state labeling conflict: eigenvectors {first} and {second} both map to {label}")]
    LabelingConflict {
        first: usize,
        second: usize,
        label: String,
    },

    #[error("matching-frequency iteration did not converge after {} iterations (last iterate {:?} GHz)", history.len(), history.last())]
    Divergence { history: Vec<f64> },

    #[error("drive frequencies do not satisfy the matching condition (residual {residual_mhz:.3} MHz)")]
    StaleMatching { residual_mhz: f64 },

    #[error("Bessel J1 argument {0} is outside the supported domain |x| < 10")]
    BesselDomain(f64),

    #[error("norm drift {drift:.3e} exceeds tolerance; reduce the time step (dt = {dt} ns)")]
    StepSize { drift: f64, dt: f64 },

    #[error("contrast peak sits on the edge of the sweep window at {edge_f} GHz")]
    WindowTooNarrow { edge_f: f64 },

    #[error("no sideband transition found in the sweep window (max contrast {max_contrast:.3})")]
    NoTransitionFound { max_contrast: f64 },

    #[error("trace does not oscillate (amplitude {amplitude:.3e})")]
    NoOscillation { amplitude: f64 },

    #[error("poor sinusoidal fit: rms residual {rms:.3e} vs amplitude {amplitude:.3e} (f = {frequency_ghz} GHz)")]
    PoorFit {
        rms: f64,
        amplitude: f64,
        frequency_ghz: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

/// Non-fatal conditions attached to results.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Warning {
    /// |f_q − f_c| < 5g: the dispersive picture behind the labels and shifts is marginal.
    NonDispersive { detuning: f64, g: f64 },
    /// A drive tone sits closer to the qubit than the validity threshold allows.
    PerturbativeValidity { f_d: f64, detuning: f64, threshold: f64 },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::NonDispersive { detuning, g } => write!(
                f,
                "qubit-cavity detuning {detuning:.4} GHz is less than 5g (g = {g} GHz)"
            ),
            Warning::PerturbativeValidity {
                f_d,
                detuning,
                threshold,
            } => write!(
                f,
                "drive at {f_d:.4} GHz is detuned by {detuning:.4} GHz from the qubit, below {threshold:.4} GHz"
            ),
        }
    }
}
