use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use qrm_sideband::analytic::SidebandKind;
use qrm_sideband::evolve::{self, Propagator, QuantumState, SimOptions};
use qrm_sideband::model::{
    drive_coefficient, qrm_hamiltonian, BareLabel, DriveConfig, PulseSpec, Space, SystemParams,
};
use qrm_sideband::sweep::{extract_rate, fit_cosine};

// Resonance and rate of the flat-top blue sideband at ε = 0.1, taken from the
// minimum quasi-energy gap of the one-period Floquet operator (independent
// SciPy DOP853 integration, rtol 1e-12, n_fock = 8).
const BLUE_RESONANCE_GHZ: f64 = 5.278041;
const BLUE_RATE_GHZ: f64 = 3.01861e-3;

fn params() -> SystemParams {
    SystemParams::new(6.5, 4.0, 0.2).unwrap()
}

fn blue_drive() -> DriveConfig {
    DriveConfig::mono(0.1, BLUE_RESONANCE_GHZ)
}

#[test]
fn norm_is_preserved_over_a_microsecond() {
    let prop = Propagator::new(&params(), 6).unwrap();
    let state = QuantumState::dressed(prop.basis(), BareLabel::g(0)).unwrap();
    let pulse = PulseSpec::with_flat(980.0);
    let dt = evolve::default_dt(&params(), &blue_drive());
    let (out, samples) = prop
        .propagate_dense(&blue_drive(), &pulse, &state, dt, SidebandKind::Blue, 997)
        .unwrap();
    let worst = samples
        .iter()
        .map(|p| (p.norm - 1.0).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-9, "{worst:e}");
    assert!((out.norm() - 1.0).abs() < 1e-9);
}

#[test]
fn halving_the_step_leaves_observables_unchanged() {
    let lens = [0.0, 60.0, 170.0];
    let run = |dt: f64| {
        let opts = SimOptions {
            dt: Some(dt),
            ..SimOptions::default()
        };
        evolve::endpoint_observable_with(&params(), &blue_drive(), SidebandKind::Blue, &lens, &opts)
            .unwrap()
            .values()
    };
    let dt = evolve::default_dt(&params(), &blue_drive());
    for (a, b) in run(dt).iter().zip(run(dt / 2.0)) {
        assert!((a - b).abs() < 1e-7, "{a} vs {b}");
    }
}

#[test]
fn fock_truncation_is_converged() {
    let cases = [
        (blue_drive(), SidebandKind::Blue),
        (DriveConfig::mono(0.1, 1.27276), SidebandKind::Red),
    ];
    for (drive, kind) in cases {
        let lens = [0.0, 80.0, 210.0];
        let at = |n| evolve::endpoint_observable(&params(), &drive, kind, &lens, n).unwrap().values();
        for (a, b) in at(6).iter().zip(at(8)) {
            assert!((a - b).abs() < 1e-5, "{kind}: {a} vs {b}");
        }
    }
}

/// Plain RK4 on i dψ/dt = H(t)ψ in the bare basis, with H rebuilt from the
/// model operators at every stage.
fn lab_frame_rk4(
    p: &SystemParams,
    drive: &DriveConfig,
    pulse: &PulseSpec,
    psi0: &DVector<Complex64>,
    n_fock: usize,
    dt: f64,
) -> DVector<Complex64> {
    let h0 = qrm_hamiltonian(p, n_fock).unwrap().0;
    let sx = Space::new(n_fock).unwrap().sigma_x().0;
    let minus_i = Complex64::new(0.0, -1.0);
    let rhs = |t: f64, psi: &DVector<Complex64>| -> DVector<Complex64> {
        let h: DMatrix<Complex64> = &h0 + &sx * Complex64::new(drive_coefficient(drive, pulse, t), 0.0);
        (h * psi) * minus_i
    };
    let end = pulse.total_duration();
    let steps = (end / dt).round() as usize;
    let h = end / steps as f64;
    let mut psi = psi0.clone();
    for s in 0..steps {
        let t = s as f64 * h;
        let k1 = rhs(t, &psi);
        let k2 = rhs(t + h / 2.0, &(&psi + &k1 * Complex64::new(h / 2.0, 0.0)));
        let k3 = rhs(t + h / 2.0, &(&psi + &k2 * Complex64::new(h / 2.0, 0.0)));
        let k4 = rhs(t + h, &(&psi + &k3 * Complex64::new(h, 0.0)));
        psi += (k1 + (k2 + k3) * Complex64::new(2.0, 0.0) + k4) * Complex64::new(h / 6.0, 0.0);
    }
    psi
}

#[test]
fn agrees_with_lab_frame_integration() {
    let n_fock = 4;
    let space = Space::new(n_fock).unwrap();
    let psi0 = QuantumState::bare(space, BareLabel::g(0));
    let pulse = PulseSpec::new(12.0, 10.0).unwrap();
    let drive = blue_drive();
    let reference = lab_frame_rk4(&params(), &drive, &pulse, &psi0.amplitudes, n_fock, 1e-4);
    let out = evolve::propagate(&params(), &drive, &pulse, &psi0, 1e-3, n_fock).unwrap();
    let diff = (&out.amplitudes - &reference).norm();
    assert!(diff < 1e-6, "{diff:e}");
}

#[test]
fn blue_trace_is_a_clean_sinusoid_at_the_sideband_rate() {
    let lens: Vec<f64> = (0..31).map(|i| i as f64 * 1000.0 / 30.0).collect();
    let trace = evolve::endpoint_observable(&params(), &blue_drive(), SidebandKind::Blue, &lens, 6).unwrap();
    let fit = extract_rate(&trace).unwrap();
    assert!((fit.omega_sb - BLUE_RATE_GHZ).abs() / BLUE_RATE_GHZ < 5e-3, "{}", fit.omega_sb);
    assert!(fit.amplitude > 0.98);
    assert!(fit.rms < 1e-3 * fit.amplitude);
}

/// Amplitude of the component at frequency f in evenly weighted samples.
fn component(t: &[f64], r: &[f64], f: f64) -> f64 {
    let (re, im) = t.iter().zip(r).fold((0.0, 0.0), |(re, im), (&ti, &ri)| {
        let (s, c) = (TAU * f * ti).sin_cos();
        (re + ri * c, im + ri * s)
    });
    2.0 * re.hypot(im) / t.len() as f64
}

#[test]
fn dense_trajectory_wiggles_at_twice_the_drive_frequency() {
    let prop = Propagator::new(&params(), 6).unwrap();
    let state = QuantumState::dressed(prop.basis(), BareLabel::g(0)).unwrap();
    let pulse = PulseSpec::with_flat(200.0);
    let (_, pts) = prop
        .propagate_dense(&blue_drive(), &pulse, &state, 1e-3, SidebandKind::Blue, 5)
        .unwrap();
    let flat: Vec<_> = pts.iter().filter(|p| p.t_ns > 20.0 && p.t_ns < 200.0).collect();
    let t: Vec<f64> = flat.iter().map(|p| p.t_ns).collect();
    let y: Vec<f64> = flat.iter().map(|p| p.observable).collect();
    let (ts, ys): (Vec<f64>, Vec<f64>) = t.iter().zip(&y).step_by(100).map(|(a, b)| (*a, *b)).unzip();
    let slow = fit_cosine(&ts, &ys).unwrap();
    let residual: Vec<f64> = t.iter().zip(&y).map(|(&ti, &yi)| yi - slow.eval(ti)).collect();
    let fd = BLUE_RESONANCE_GHZ;
    let at_fd = component(&t, &residual, fd);
    let at_2fd = component(&t, &residual, 2.0 * fd);
    assert!(at_2fd > 1e-5, "{at_2fd:e}");
    assert!(at_2fd > 100.0 * at_fd, "{at_2fd:e} vs {at_fd:e}");
}

#[test]
fn endpoint_sampling_removes_the_fast_component() {
    // lengths finely spaced across 2 ns resolve f_d and 2f_d directly
    let lens: Vec<f64> = (0..201).map(|i| 300.0 + i as f64 * 0.01).collect();
    let trace = evolve::endpoint_observable(&params(), &blue_drive(), SidebandKind::Blue, &lens, 6).unwrap();
    let t = trace.times();
    let y = trace.values();
    // remove the slow sideband motion, a straight line over 2 ns
    let n = t.len() as f64;
    let (mt, my) = (t.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let slope = t.iter().zip(&y).map(|(a, b)| (a - mt) * (b - my)).sum::<f64>()
        / t.iter().map(|a| (a - mt).powi(2)).sum::<f64>();
    let residual: Vec<f64> = t.iter().zip(&y).map(|(a, b)| b - my - slope * (a - mt)).collect();
    let sideband_amplitude = 1.0;
    for f in [BLUE_RESONANCE_GHZ, 2.0 * BLUE_RESONANCE_GHZ] {
        let c = component(&t, &residual, f);
        assert!(c < 1e-2 * sideband_amplitude, "{f}: {c:e}");
    }
}

#[test]
fn bare_and_dressed_measurement_agree_on_the_rate() {
    let prop = Propagator::new(&params(), 6).unwrap();
    let space = Space::new(6).unwrap();
    let drive = blue_drive();
    let lens: Vec<f64> = (0..25).map(|i| i as f64 * 800.0 / 24.0).collect();
    let dressed = prop.endpoint_trace(&drive, SidebandKind::Blue, &lens, 10.0, 1e-3).unwrap();

    let start = QuantumState::bare(space, BareLabel::g(0));
    let bare: Vec<f64> = lens
        .iter()
        .map(|&l| {
            let out = prop.propagate(&drive, &PulseSpec::with_flat(l), &start, 1e-3).unwrap();
            out.bare_population(space, BareLabel::e(1)) - out.bare_population(space, BareLabel::g(0))
        })
        .collect();
    let worst = dressed
        .values()
        .iter()
        .zip(&bare)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    // bare levels interfere with their dressing partners at O(g/Δ_qc)
    let mixing = 2.0 * 0.2 / 2.5;
    assert!(worst > 1e-3 && worst < mixing, "{worst}");
    let fd = extract_rate(&dressed).unwrap();
    let fb = fit_cosine(&lens, &bare).unwrap();
    assert!((fd.omega_sb - fb.omega_sb).abs() / fd.omega_sb < 0.02);
}

#[test]
fn wrong_state_dimension_is_rejected() {
    let space = Space::new(3).unwrap();
    let state = QuantumState::bare(space, BareLabel::g(0));
    assert!(evolve::propagate(&params(), &blue_drive(), &PulseSpec::with_flat(1.0), &state, 1e-3, 6).is_err());
}
