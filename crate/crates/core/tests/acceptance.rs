//! Acceptance report: one PASS/FAIL line per criterion. Runs without the
//! libtest harness so the lines always reach stdout.
//!
//! A criterion listed in `KNOWN_FAILURES` is reported as FAIL but does not
//! fail the target, provided it still reproduces the recorded value; any
//! other FAIL exits non-zero.

use std::f64::consts::TAU;
use std::process::ExitCode;
use std::thread;

use qrm_sideband::analytic::{
    self, dispersive_shift, matching_frequency, matching_residual, verify_drive_elimination,
    ModelVariant, SidebandKind,
};
use qrm_sideband::evolve::{self, Propagator, QuantumState, SimOptions};
use qrm_sideband::model::{BareLabel, DriveConfig, PulseSpec, SystemParams};
use qrm_sideband::sweep::{
    compare_models, expectation, fit_cosine, locate, DriveFamily, ScanSpec, ScanVariable,
    SweepOptions, DEFAULT_F_DC_OFFSET,
};

/// Criterion 5: (id, recorded Ω⁽¹⁾/total, tolerance on that value).
const KNOWN_FAILURES: &[(u8, f64, f64)] = &[(5, 0.243, 0.005)];

struct Outcome {
    id: u8,
    name: &'static str,
    pass: bool,
    detail: String,
    /// Value compared against `KNOWN_FAILURES` when the criterion fails.
    value: Option<f64>,
}

fn outcome(id: u8, name: &'static str, pass: bool, detail: String) -> Outcome {
    Outcome { id, name, pass, detail, value: None }
}

fn reference() -> SystemParams {
    SystemParams::new(6.5, 4.0, 0.2).unwrap()
}

fn trivial_limit() -> Outcome {
    let p = SystemParams::new(6.5, 4.0, 0.0).unwrap();
    let mut worst_f: f64 = 0.0;
    let mut worst_rate: f64 = 0.0;
    for eps in [0.0, 1e-9] {
        for variant in [ModelVariant::Full, ModelVariant::Rwa] {
            let r = analytic::predict(&p, &DriveConfig::mono(eps, 1.0), SidebandKind::Blue, variant)
                .unwrap();
            worst_f = worst_f.max((r.matching_f - 5.25).abs());
            worst_rate = worst_rate.max(r.omega0.abs()).max(r.omega1.abs()).max(r.total.abs());
        }
    }
    outcome(
        1,
        "trivial limit",
        worst_f <= 1e-9 && worst_rate == 0.0,
        format!("|f - 5.25| = {worst_f:.1e} GHz (tol 1e-9), max |rate| = {worst_rate:.1e}"),
    )
}

fn matching_reproduction() -> Outcome {
    let p = reference();
    let full = analytic::predict(&p, &DriveConfig::mono(0.1, 1.0), SidebandKind::Blue, ModelVariant::Full)
        .unwrap()
        .matching_f;
    let template = DriveConfig::mono(0.5, 1.0);
    let opts = SweepOptions::default();
    let sim = SimOptions::default();
    let numeric = expectation(&p, &template, SidebandKind::Blue, &opts)
        .and_then(|exp| locate(&p, &template, SidebandKind::Blue, &exp, &opts, &sim))
        .map(|s| s.best_f);
    let analytic_ok = (full - 5.2787).abs() <= 1e-3;
    let (numeric_ok, numeric_text) = match numeric {
        Ok(f) => ((f - 5.474).abs() <= 0.015, format!("{f:.6} GHz (5.474 ± 0.015)")),
        Err(e) => (false, e.to_string()),
    };
    outcome(
        2,
        "matching reproduction",
        analytic_ok && numeric_ok,
        format!("Full blue ε=0.1: {full:.6} GHz (5.2787 ± 0.001); chevron ε=0.5: {numeric_text}"),
    )
}

fn perturbative_agreement() -> Outcome {
    let scan = ScanSpec {
        params: reference(),
        family: DriveFamily::Mono { eps: 0.1 },
        kind: SidebandKind::Red,
        variable: ScanVariable::Eps,
        values: vec![0.1],
    };
    let row = &compare_models(&scan, &SweepOptions::default(), &SimOptions::default()).unwrap()[0];
    let (Some(num), Some(full), Some(rwa), Some(zero)) = (
        row.numeric_rate_mhz,
        row.full_total_mhz,
        row.rwa_total_mhz,
        row.full_omega0_mhz,
    ) else {
        return outcome(3, "perturbative agreement", false, format!("row incomplete: {}", row.status));
    };
    let err = |model: f64| (num - model.abs()).abs();
    let rel = err(full) / num;
    let pass = rel <= 0.15 && err(full) < err(rwa) && err(full) < err(zero);
    outcome(
        3,
        "perturbative agreement",
        pass,
        format!(
            "red ε=0.1 numeric {num:.4} MHz; Full {:.4} ({:.1}%, tol 15%); |err| Full {:.4} < RWA {:.4}, Ω0-only {:.4}",
            full.abs(),
            100.0 * rel,
            err(full),
            err(rwa),
            err(zero)
        ),
    )
}

fn rwa_null() -> Outcome {
    let p = SystemParams::new(4.0, 6.5, 0.2).unwrap();
    let mut worst: f64 = 0.0;
    for eps in [0.05, 0.1, 0.2, 0.3] {
        let r = analytic::predict(&p, &DriveConfig::mono(eps, 1.0), SidebandKind::Red, ModelVariant::Rwa)
            .unwrap();
        worst = worst.max(r.omega0.abs());
    }
    outcome(4, "RWA null result", worst == 0.0, format!("max |RWA Ω0| = {worst:e} over ε ∈ {{0.05..0.3}}"))
}

fn longitudinal_share() -> Outcome {
    let template = DriveFamily::Bi {
        eta: 1.0,
        f_dc_offset: DEFAULT_F_DC_OFFSET,
    }
    .template(&reference());
    let r = analytic::predict(&reference(), &template, SidebandKind::Blue, ModelVariant::Full).unwrap();
    let share = r.omega1 / r.total;
    Outcome {
        id: 5,
        name: "longitudinal share",
        pass: (0.10..=0.20).contains(&share),
        detail: format!(
            "bi blue η=1: Ω1 {:.3} MHz / total {:.3} MHz = {:.1}% (band 10-20%)",
            r.omega1 * 1e3,
            r.total * 1e3,
            100.0 * share
        ),
        value: Some(share),
    }
}

fn property_suites() -> Outcome {
    let p = reference();
    let drive = DriveConfig::mono(0.1, 5.278041);
    let kind = SidebandKind::Blue;
    let mut notes = Vec::new();
    let mut pass = true;
    let mut check = |ok: bool, text: String| {
        pass &= ok;
        notes.push(text);
    };

    let prop = Propagator::new(&p, 6).unwrap();
    let state = QuantumState::dressed(prop.basis(), BareLabel::g(0)).unwrap();
    let dt = evolve::default_dt(&p, &drive);
    let (_, samples) = prop
        .propagate_dense(&drive, &PulseSpec::with_flat(980.0), &state, dt, kind, 997)
        .unwrap();
    let norm = samples.iter().map(|s| (s.norm - 1.0).abs()).fold(0.0, f64::max);
    check(norm < 1e-9, format!("norm {norm:.1e}"));

    let lens = [0.0, 60.0, 170.0];
    let with_dt = |dt: f64| {
        let opts = SimOptions { dt: Some(dt), ..SimOptions::default() };
        evolve::endpoint_observable_with(&p, &drive, kind, &lens, &opts).unwrap().values()
    };
    let halving = max_diff(&with_dt(dt), &with_dt(dt / 2.0));
    check(halving < 1e-7, format!("dt/2 {halving:.1e}"));

    let with_fock = |n| evolve::endpoint_observable(&p, &drive, kind, &lens, n).unwrap().values();
    let fock = max_diff(&with_fock(6), &with_fock(8));
    check(fock < 1e-5, format!("fock {fock:.1e}"));

    let mut scale: f64 = 0.0;
    for template in [DriveConfig::mono(0.15, 1.0), DriveConfig::bi(0.025, 1.0, 0.317, 3.5)] {
        for kind in [SidebandKind::Blue, SidebandKind::Red] {
            let base = analytic_outputs(&p, &template, kind);
            for k in [0.3, 2.0, 7.5] {
                let scaled = analytic_outputs(&p.scaled(k), &template.scaled(k), kind);
                for (b, s) in base.iter().zip(&scaled) {
                    scale = scale.max((s - k * b).abs() / (k * b).abs());
                }
            }
        }
    }
    check(scale < 1e-10, format!("scaling {scale:.1e}"));

    let t: Vec<f64> = (0..40).map(|i| 600.0 * i as f64 / 39.0).collect();
    let y: Vec<f64> = t.iter().map(|x| -0.9 * (TAU * 0.004 * x + 0.4).cos() + 0.05).collect();
    let fit = fit_cosine(&t, &y).unwrap();
    let fit_err = (fit.omega_sb - 0.004).abs() / 0.004;
    check(fit_err < 1e-3, format!("fit {fit_err:.1e}"));

    let times: Vec<f64> = (0..200).map(|i| 0.013 * i as f64).collect();
    let mut elim: f64 = 0.0;
    for d in [DriveConfig::mono(0.1, 5.278), DriveConfig::bi(0.025, 7.1, 0.317, 3.5)] {
        elim = elim.max(verify_drive_elimination(&p, &d, &times, ModelVariant::Full).unwrap().max_norm);
    }
    check(elim < 1e-10, format!("elimination {elim:.1e}"));

    let mut fixed: f64 = 0.0;
    for kind in [SidebandKind::Blue, SidebandKind::Red] {
        for variant in [ModelVariant::Full, ModelVariant::Rwa] {
            for eps in [0.05, 0.1, 0.3] {
                let template = DriveConfig::mono(eps, 1.0);
                let sol = matching_frequency(&p, &template, kind, variant).unwrap();
                let drive = template.with_swept_frequency(sol.frequency);
                fixed = fixed.max(matching_residual(&p, &drive, kind, variant).unwrap().abs());
            }
        }
    }
    check(fixed < 1e-6, format!("fixed point {:.1e} kHz", fixed * 1e6));

    outcome(6, "property suites", pass, notes.join(", "))
}

fn analytic_outputs(p: &SystemParams, template: &DriveConfig, kind: SidebandKind) -> Vec<f64> {
    let r = analytic::predict(p, template, kind, ModelVariant::Full).unwrap();
    vec![
        dispersive_shift(p).unwrap(),
        r.matching_f,
        r.delta_wq,
        r.eps_m,
        r.omega0,
        r.omega1,
        r.total,
    ]
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn breakdown_growth() -> Outcome {
    let scans = [
        ScanSpec {
            params: reference(),
            family: DriveFamily::Mono { eps: 0.1 },
            kind: SidebandKind::Red,
            variable: ScanVariable::Eps,
            values: vec![0.1, 0.2, 0.3],
        },
        ScanSpec {
            params: SystemParams::new(4.0, 6.5, 0.1).unwrap(),
            family: DriveFamily::Mono { eps: 0.1 },
            kind: SidebandKind::Blue,
            variable: ScanVariable::G,
            values: vec![0.1, 0.3, 0.5],
        },
    ];
    let mut pass = true;
    let mut notes = Vec::new();
    for scan in &scans {
        let rows = compare_models(scan, &SweepOptions::default(), &SimOptions::default()).unwrap();
        let gaps: Vec<Option<f64>> = rows
            .iter()
            .map(|r| Some((r.numeric_rate_mhz? - r.full_total_mhz?.abs()).abs()))
            .collect();
        let monotone = gaps.iter().all(Option::is_some)
            && gaps.windows(2).all(|w| w[1].unwrap() > w[0].unwrap());
        pass &= monotone;
        let shown: Vec<String> = gaps
            .iter()
            .map(|g| g.map_or("n/a".into(), |g| format!("{g:.3}")))
            .collect();
        let label = match scan.variable {
            ScanVariable::G => "blue g",
            _ => "red ε",
        };
        notes.push(format!("{label} {:?}: |num - Full| = [{}] MHz", scan.values, shown.join(", ")));
    }
    outcome(7, "strong-drive breakdown", pass, notes.join("; "))
}

fn main() -> ExitCode {
    let criteria: [fn() -> Outcome; 7] = [
        trivial_limit,
        matching_reproduction,
        perturbative_agreement,
        rwa_null,
        longitudinal_share,
        property_suites,
        breakdown_growth,
    ];
    let outcomes: Vec<Outcome> = thread::scope(|s| {
        let handles: Vec<_> = criteria.iter().map(|c| s.spawn(c)).collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });

    let mut unexpected = 0;
    for o in &outcomes {
        let known = KNOWN_FAILURES.iter().find(|k| k.0 == o.id);
        let note = match (o.pass, known) {
            (true, _) => "",
            (false, Some(&(_, recorded, tol))) if o.value.is_some_and(|v| (v - recorded).abs() <= tol) => {
                " [known]"
            }
            (false, _) => {
                unexpected += 1;
                ""
            }
        };
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!("{verdict} {} {}: {}{note}", o.id, o.name, o.detail);
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{unexpected} unexpected failure(s)");
        ExitCode::FAILURE
    }
}
