use qrm_sideband::analytic::SidebandKind;
use qrm_sideband_web::demo;

fn sys() -> qrm_sideband::model::SystemParams {
    demo::system(6.5, 4.0, 0.2).unwrap()
}

#[test]
fn rate_curve_grows_quadratically_at_weak_drive() {
    let c = demo::rate_curve(SidebandKind::Blue, &sys(), 0.02, 2).unwrap();
    assert_eq!(c.eps, vec![0.01, 0.02]);
    let (a, b) = (c.full_total_mhz[0].unwrap(), c.full_total_mhz[1].unwrap());
    assert!((b / a - 4.0).abs() < 0.02, "{a} {b}");
    assert!(c.rwa_matching_ghz.iter().all(Option::is_some));
}

#[test]
fn trace_starts_in_the_initial_level_and_swaps() {
    let t = demo::endpoint_trace(SidebandKind::Blue, &sys(), 0.1, None, 220.0, 23).unwrap();
    assert!((t.f_d - 5.2788).abs() < 1e-3);
    assert_eq!(t.flat_len_ns.len(), 23);
    let lo = t.observable.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = t.observable.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    assert!(hi - lo > 1.0, "contrast {}", hi - lo);
}

#[test]
fn chevron_is_brightest_near_the_centre() {
    let c = demo::chevron(SidebandKind::Blue, &sys(), 0.1, 0.01, 7, 9).unwrap();
    assert_eq!(c.grid.len(), 7);
    assert!(c.grid.iter().all(|row| row.len() == 9));
    let contrast: Vec<f64> = c
        .grid
        .iter()
        .map(|row| {
            let lo = row.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            hi - lo
        })
        .collect();
    let edge = contrast[0].max(contrast[6]);
    let middle = contrast[2..5].iter().cloned().fold(0.0, f64::max);
    assert!(middle > 2.0 * edge, "{contrast:?}");
}

#[test]
fn bad_inputs_are_rejected() {
    assert!(demo::kind("green").is_err());
    assert!(demo::system(6.5, 4.0, -0.1).is_err());
    assert!(demo::rate_curve(SidebandKind::Red, &sys(), 0.1, 1).is_err());
    assert!(demo::rate_curve(SidebandKind::Red, &sys(), 0.1, 10_000).is_err());
    assert!(demo::endpoint_trace(SidebandKind::Red, &sys(), 0.1, None, -5.0, 10).is_err());
    assert!(demo::chevron(SidebandKind::Red, &sys(), 0.0, 0.01, 5, 5).is_err());
}
