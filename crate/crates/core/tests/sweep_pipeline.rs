use qrm_sideband::analytic::{self, ModelVariant, SidebandKind};
use qrm_sideband::evolve::{sideband_levels, SimOptions};
use qrm_sideband::model::{dressed_basis, DriveConfig, SystemParams};
use qrm_sideband::sweep::{
    compare_analytic, compare_models, expectation, find_matching_frequency_numeric, locate,
    DriveFamily, ScanSpec, ScanVariable, SweepOptions, Window,
};
use qrm_sideband::Error;

// Resonances and rates from the minimum quasi-energy gap of the one-period
// Floquet operator (SciPy DOP853, n_fock = 8), independent of this crate.
const WEAK_BLUE_RESONANCE_GHZ: f64 = 5.2700238;
const RED_RATE_MHZ: [(f64, f64); 2] = [(0.05, 0.1866), (0.1, 0.744047)];

fn params() -> SystemParams {
    SystemParams::new(6.5, 4.0, 0.2).unwrap()
}

fn sim() -> SimOptions {
    SimOptions::default()
}

/// Half the dressed zero-drive splitting of the sideband pair.
fn zero_drive_matching(p: &SystemParams, kind: SidebandKind) -> f64 {
    let basis = dressed_basis(p, 6).unwrap();
    let (from, to) = sideband_levels(kind);
    basis.transition_ghz(from, to).unwrap().abs() / 2.0
}

#[test]
fn weak_blue_drive_is_found_at_the_analytic_resonance() {
    let p = params();
    let template = DriveConfig::mono(0.025, 1.0);
    let opts = SweepOptions {
        refine: false,
        ..SweepOptions::default()
    };
    let exp = expectation(&p, &template, SidebandKind::Blue, &opts).unwrap();
    let sweep = locate(&p, &template, SidebandKind::Blue, &exp, &opts, &sim()).unwrap();
    let step = sweep.freqs[1] - sweep.freqs[0];
    assert!((sweep.best_f - WEAK_BLUE_RESONANCE_GHZ).abs() < step, "{}", sweep.best_f);

    // a 15-point grid over ±10 shifts around the Full prediction
    let full = exp.full.unwrap().matching_f;
    let shift = full - (p.f_q + p.f_c) / 2.0;
    let coarse_step = 20.0 * shift / 14.0;
    assert!((sweep.best_f - full).abs() < coarse_step);
    // the Full model misses by about twice the linewidth
    assert!((sweep.best_f - full).abs() < 3.0 * exp.rate.unwrap());
}

#[test]
fn zero_drive_shows_no_transition() {
    let p = params();
    let template = DriveConfig::mono(0.0, 1.0);
    let window = Window {
        center: 5.25,
        half_width: 0.01,
    };
    let lens: Vec<f64> = (0..8).map(|i| i as f64 * 20.0).collect();
    let err = find_matching_frequency_numeric(&p, &template, SidebandKind::Blue, window, 7, &lens, &sim())
        .unwrap_err();
    assert!(matches!(err, Error::NoTransitionFound { max_contrast } if max_contrast < 1e-6));
}

#[test]
fn too_narrow_window_is_reported() {
    let p = params();
    let window = Window {
        center: 5.284,
        half_width: 0.004,
    };
    let lens: Vec<f64> = (0..12).map(|i| i as f64 * 25.0).collect();
    let err = find_matching_frequency_numeric(
        &p,
        &DriveConfig::mono(0.1, 1.0),
        SidebandKind::Blue,
        window,
        7,
        &lens,
        &sim(),
    )
    .unwrap_err();
    assert!(matches!(err, Error::WindowTooNarrow { edge_f } if (edge_f - 5.280).abs() < 1e-9));
}

#[test]
fn doubling_the_grid_keeps_the_resonance() {
    let p = params();
    let template = DriveConfig::mono(0.3, 1.0);
    let opts = SweepOptions::default();
    let exp = expectation(&p, &template, SidebandKind::Blue, &opts).unwrap();
    let lens: Vec<f64> = (0..20).map(|i| i as f64 * 1.5 / 19.0 / exp.rate.unwrap()).collect();
    let run = |n| {
        find_matching_frequency_numeric(&p, &template, SidebandKind::Blue, exp.window, n, &lens, &sim())
            .unwrap()
    };
    let (coarse, fine) = (run(15), run(29));
    let fine_step = fine.freqs[1] - fine.freqs[0];
    assert!(
        (coarse.best_f - fine.best_f).abs() < 0.5 * fine_step,
        "{} vs {}",
        coarse.best_f,
        fine.best_f
    );
    for s in [&coarse, &fine] {
        assert!(s.contrast.iter().all(|c| (0.0..=2.0).contains(c)));
        assert!(s.best_f >= s.freqs[0] && s.best_f <= *s.freqs.last().unwrap());
        assert_eq!(s.chevron.len(), s.freqs.len());
    }
}

fn red_eps_scan(values: Vec<f64>) -> ScanSpec {
    ScanSpec {
        params: params(),
        family: DriveFamily::Mono { eps: 0.0 },
        kind: SidebandKind::Red,
        variable: ScanVariable::Eps,
        values,
    }
}

#[test]
fn red_scan_agrees_with_full_model_at_moderate_drive() {
    let scan = red_eps_scan(RED_RATE_MHZ.iter().map(|r| r.0).collect());
    let rows = compare_models(&scan, &SweepOptions::default(), &sim()).unwrap();
    // each model's offset is taken from its own zero-drive matching
    let f0 = zero_drive_matching(&params(), SidebandKind::Red);
    let undriven = DriveConfig::mono(0.0, 1.0);
    let f0_full = analytic::predict(&params(), &undriven, SidebandKind::Red, ModelVariant::Full)
        .unwrap()
        .matching_f;
    for (row, (eps, oracle)) in rows.iter().zip(RED_RATE_MHZ) {
        assert_eq!(row.scan_var, eps);
        assert_eq!(row.status, "ok");
        let numeric = row.numeric_rate_mhz.unwrap();
        assert!((numeric - oracle).abs() / oracle < 5e-3, "{eps}: {numeric}");
        let full = row.full_total_mhz.unwrap();
        assert!((numeric - full).abs() / numeric < 0.15, "{eps}: {numeric} vs {full}");

        let num_offset = row.numeric_matching_ghz.unwrap() - f0;
        let full_offset = row.full_matching_ghz.unwrap() - f0_full;
        assert!(
            (num_offset - full_offset).abs() / num_offset.abs() < 0.15,
            "{eps}: offsets {num_offset} vs {full_offset}"
        );
    }
}

#[test]
fn bichromatic_rows_carry_both_matching_frequencies() {
    let scan = ScanSpec {
        params: params(),
        family: DriveFamily::Bi {
            eta: 1.0,
            f_dc_offset: -0.5,
        },
        kind: SidebandKind::Blue,
        variable: ScanVariable::Eta,
        values: vec![0.5, 1.0, 2.0],
    };
    let rows = compare_analytic(&scan).unwrap();
    assert_eq!(rows.len(), 3);
    let mut last_shift = 0.0;
    for (row, eta) in rows.iter().zip([0.5, 1.0, 2.0]) {
        assert_eq!(row.scan_var, eta);
        assert_eq!(row.status, "ok");
        let (full, rwa) = (row.full_matching_ghz.unwrap(), row.rwa_matching_ghz.unwrap());
        assert!(full > 6.0 && rwa > 6.0);
        assert!(full != rwa);
        assert!(row.numeric_rate_mhz.is_none());
        // the qubit tone moves further from f_q + f_c − f_dc as η grows
        let shift = (full - 7.0).abs();
        assert!(shift > last_shift);
        last_shift = shift;
    }
}

#[test]
fn bichromatic_blue_sideband_is_measured() {
    let scan = ScanSpec {
        params: params(),
        family: DriveFamily::Bi {
            eta: 1.0,
            f_dc_offset: -0.5,
        },
        kind: SidebandKind::Blue,
        variable: ScanVariable::Eta,
        values: vec![1.0],
    };
    let opts = SweepOptions {
        refine: false,
        ..SweepOptions::default()
    };
    let row = &compare_models(&scan, &opts, &sim()).unwrap()[0];
    assert_eq!(row.status, "ok");
    let full = row.full_matching_ghz.unwrap();
    assert!((row.numeric_matching_ghz.unwrap() - full).abs() < 0.01);
    let (numeric, total) = (row.numeric_rate_mhz.unwrap(), row.full_total_mhz.unwrap());
    assert!((numeric - total).abs() / numeric < 0.25, "{numeric} vs {total}");
}

#[test]
fn rwa_transverse_rate_vanishes_for_red_below_the_cavity() {
    let scan = ScanSpec {
        params: SystemParams::new(4.0, 6.5, 0.2).unwrap(),
        ..red_eps_scan(vec![0.05, 0.1, 0.2, 0.3])
    };
    for row in compare_analytic(&scan).unwrap() {
        assert_eq!(row.rwa_omega0_mhz, Some(0.0));
        assert!(row.full_omega0_mhz.unwrap() > 0.0);
    }
}

#[test]
fn row_field_names_are_stable() {
    let rows = compare_analytic(&red_eps_scan(vec![0.1])).unwrap();
    let json = serde_json::to_value(&rows[0]).unwrap();
    let keys: Vec<&str> = json.as_object().unwrap().keys().map(String::as_str).collect();
    for name in [
        "scan_var",
        "numeric_matching_GHz",
        "numeric_rate_MHz",
        "full_total_MHz",
        "full_omega0_MHz",
        "rwa_total_MHz",
        "rwa_omega0_MHz",
        "full_matching_GHz",
        "rwa_matching_GHz",
        "status",
    ] {
        assert!(keys.contains(&name), "{name}");
    }
    assert_eq!(keys.len(), 10);
}

#[test]
fn analytic_rows_match_direct_predictions() {
    let rows = compare_analytic(&red_eps_scan(vec![0.1, 0.2])).unwrap();
    for row in rows {
        let drive = DriveConfig::mono(row.scan_var, 1.0);
        let full = analytic::predict(&params(), &drive, SidebandKind::Red, ModelVariant::Full).unwrap();
        assert_eq!(row.full_total_mhz, Some(full.total.abs() * 1e3));
        assert_eq!(row.full_matching_ghz, Some(full.matching_f));
    }
}

#[test]
fn bad_scans_are_rejected() {
    assert!(compare_analytic(&red_eps_scan(vec![])).is_err());
    assert!(compare_analytic(&red_eps_scan(vec![0.1, f64::NAN])).is_err());
    let wrong = ScanSpec {
        variable: ScanVariable::Eta,
        ..red_eps_scan(vec![1.0])
    };
    assert!(compare_analytic(&wrong).is_err());
}
