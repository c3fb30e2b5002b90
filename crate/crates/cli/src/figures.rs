//! Canned configurations for the published figures.
//!
//! Panels (a,b) use f_q = 6.5, f_c = 4.0 GHz and panels (c,d) the reverse,
//! with red in (a,c) and blue in (b,d). The g-scan panels use f_q = 4.0,
//! f_c = 6.5 GHz with mono drives in (a,b) and bi-chromatic drives in (c,d).

use qrm_sideband::analytic::SidebandKind;
use qrm_sideband::model::SystemParams;
use qrm_sideband::sweep::{DriveFamily, ScanVariable, DEFAULT_F_DC_OFFSET};

use crate::commands;
use crate::config::{RunConfig, ScanConfig};
use crate::output::Sink;
use crate::CliError;

pub const TARGETS: [&str; 20] = [
    "fig3a", "fig3b", "fig3c", "fig3d", "fig4a", "fig4b", "fig4c", "fig4d", "fig5a", "fig5b",
    "fig5c", "fig5d", "fig6", "fig7", "fig8", "fig9", "fig10", "fig3", "fig4", "fig5",
];

const EPS_VALUES: [f64; 6] = [0.05, 0.1, 0.15, 0.2, 0.25, 0.3];
const ETA_VALUES: [f64; 4] = [0.5, 1.0, 1.5, 2.0];
const G_VALUES: [f64; 5] = [0.1, 0.2, 0.3, 0.4, 0.5];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Workflow {
    Table,
    Trajectory,
    Chevron,
}

pub struct Panel {
    pub name: String,
    pub config: RunConfig,
    pub workflow: Workflow,
}

fn system(f_q: f64, f_c: f64, g: f64) -> SystemParams {
    SystemParams { f_q, f_c, g }
}

fn bi(eta: f64) -> DriveFamily {
    DriveFamily::Bi {
        eta,
        f_dc_offset: DEFAULT_F_DC_OFFSET,
    }
}

fn table(name: &str, sys: SystemParams, drive: DriveFamily, kind: SidebandKind, variable: ScanVariable, values: &[f64]) -> Panel {
    Panel {
        name: name.into(),
        config: RunConfig {
            kind,
            system: sys,
            drive,
            scan: Some(ScanConfig {
                variable,
                values: values.to_vec(),
            }),
            ..RunConfig::default()
        },
        workflow: Workflow::Table,
    }
}

/// One panel of the ε, η or g scans; `family` is 3, 4 or 5.
fn scan_panel(name: &str, family: u8, letter: char) -> Panel {
    let kind = if matches!(letter, 'a' | 'c') {
        SidebandKind::Red
    } else {
        SidebandKind::Blue
    };
    let ordered = if matches!(letter, 'a' | 'b') {
        system(6.5, 4.0, 0.2)
    } else {
        system(4.0, 6.5, 0.2)
    };
    match family {
        3 => table(name, ordered, DriveFamily::Mono { eps: 0.1 }, kind, ScanVariable::Eps, &EPS_VALUES),
        4 => table(name, ordered, bi(1.0), kind, ScanVariable::Eta, &ETA_VALUES),
        _ => {
            let drive = if matches!(letter, 'a' | 'b') {
                DriveFamily::Mono { eps: 0.1 }
            } else {
                bi(1.0)
            };
            table(name, system(4.0, 6.5, 0.2), drive, kind, ScanVariable::G, &G_VALUES)
        }
    }
}

fn family_panels(prefix: &str, family: u8) -> Vec<Panel> {
    "abcd"
        .chars()
        .map(|l| scan_panel(&format!("{prefix}{l}"), family, l))
        .collect()
}

/// The panels behind a target name.
pub fn panels(target: &str) -> Result<Vec<Panel>, CliError> {
    let reference = |eps: f64, name: &str, workflow| {
        let mut config = RunConfig {
            drive: DriveFamily::Mono { eps },
            ..RunConfig::default()
        };
        if workflow == Workflow::Trajectory {
            config.evolve.f_d = Some(5.278);
            config.evolve.max_len = Some(480.0);
            config.evolve.points = 49;
            config.evolve.dense = true;
        }
        Panel {
            name: name.into(),
            config,
            workflow,
        }
    };
    let panels = match target {
        "fig3" | "fig6" => family_panels(target, 3),
        "fig4" | "fig7" => family_panels(target, 4),
        "fig5" | "fig10" => family_panels(target, 5),
        "fig8" => vec![reference(0.1, "fig8", Workflow::Trajectory)],
        "fig9" => vec![reference(0.5, "fig9", Workflow::Chevron)],
        t if t.len() == 5 && t.starts_with("fig") => {
            let family = t.as_bytes()[3];
            let letter = t.as_bytes()[4] as char;
            if !(b"345".contains(&family) && "abcd".contains(letter)) {
                return Err(unknown(target));
            }
            vec![scan_panel(t, family - b'0', letter)]
        }
        _ => return Err(unknown(target)),
    };
    Ok(panels)
}

fn unknown(target: &str) -> CliError {
    CliError::Config(format!("unknown target {target}; expected one of {}", TARGETS.join(", ")))
}

pub fn run_panel(panel: &Panel, analytic_only: bool, config: &RunConfig, sink: &mut Sink) -> Result<(), CliError> {
    match panel.workflow {
        Workflow::Table => commands::table(config, sink, &panel.name, analytic_only),
        Workflow::Trajectory => commands::evolve(config, sink, &panel.name),
        Workflow::Chevron => commands::sweep(config, sink, &panel.name, analytic_only),
    }
}
