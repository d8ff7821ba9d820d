//! Report structures emitted by every subcommand, in a machine (JSON) and a
//! human rendering.

use serde::{Deserialize, Serialize};
use sofkit_core::eig::Spectrum;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

impl ToolInfo {
    pub fn current() -> Self {
        ToolInfo {
            name: "sofkit".into(),
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RiccatiSection {
    #[serde(rename = "P")]
    pub p: Vec<Vec<f64>>,
    pub residual: f64,
    #[serde(rename = "K", skip_serializing_if = "Option::is_none")]
    pub k: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PrecheckSection {
    #[serde(rename = "CB")]
    pub cb: Vec<Vec<f64>>,
    pub obstruction: bool,
    pub bpb_min_eig: f64,
    pub structure_residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultSection {
    #[serde(rename = "F")]
    pub f: Vec<Vec<f64>>,
    #[serde(rename = "F_bar", skip_serializing_if = "Option::is_none")]
    pub f_bar: Option<Vec<Vec<f64>>>,
    pub alpha: f64,
    pub certificate_min_eig: f64,
    /// Closed-loop eigenvalues as [re, im] pairs.
    pub closed_loop_spectrum: Vec<[f64; 2]>,
    pub closed_loop_abscissa: f64,
    pub status: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifySection {
    pub theorem1_max_eig: f64,
    pub theorem2_min_eig: f64,
    pub closed_loop_abscissa: f64,
    pub equivalence_consistent: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dissipation_max_violation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dissipation_ok: Option<bool>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulationSection {
    pub samples: usize,
    pub dt: f64,
    pub t_final: f64,
    pub terminal_state: Vec<f64>,
    pub terminal_norm: f64,
    pub diverged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diverged_at: Option<usize>,
}

/// The full report. Sections not produced by a given subcommand stay None
/// and are omitted from the serialized form.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub tool: ToolInfo,
    pub command: String,
    pub system: crate::io::SystemFile,
    #[serde(rename = "Q", skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<Vec<f64>>>,
    #[serde(rename = "R", skip_serializing_if = "Option::is_none")]
    pub r: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub riccati: Option<RiccatiSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precheck: Option<PrecheckSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<ResultSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifySection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

impl Report {
    pub fn new(command: &str, system: crate::io::SystemFile) -> Self {
        Report {
            tool: ToolInfo::current(),
            command: command.to_string(),
            system,
            q: None,
            r: None,
            riccati: None,
            precheck: None,
            result: None,
            verify: None,
            simulation: None,
            wall_time_ms: None,
        }
    }

    pub fn to_machine(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_human(&self) -> String {
        let mut out = String::new();
        let push = |out: &mut String, line: String| {
            out.push_str(&line);
            out.push('\n');
        };
        push(&mut out, format!("{} {} — {}", self.tool.name, self.tool.version, self.command));
        push(
            &mut out,
            format!(
                "system: n={} m={} p={} mode={}",
                self.system.n,
                self.system.m,
                self.system.p,
                self.system.mode.as_deref().unwrap_or("no-d")
            ),
        );
        if let Some(r) = &self.riccati {
            push(&mut out, format!("riccati residual: {:.3e}", r.residual));
            push(&mut out, format!("P = {}", fmt_mat(&r.p)));
            if let Some(k) = &r.k {
                push(&mut out, format!("K = {}", fmt_mat(k)));
            }
        }
        if let Some(pc) = &self.precheck {
            push(
                &mut out,
                format!(
                    "precheck: CB {}, obstruction={}, min eig(B'PB)={:.3e}, gain-structure residual={:.3e}",
                    fmt_mat(&pc.cb),
                    pc.obstruction,
                    pc.bpb_min_eig,
                    pc.structure_residual
                ),
            );
            if pc.obstruction {
                push(
                    &mut out,
                    "note: CB = 0 — no gain of the form FC can equal the LQR gain; the LMI synthesis is still attempted".to_string(),
                );
            }
        }
        if let Some(res) = &self.result {
            push(&mut out, format!("F = {}", fmt_mat(&res.f)));
            if let Some(fb) = &res.f_bar {
                push(&mut out, format!("F_bar = {}", fmt_mat(fb)));
            }
            push(&mut out, format!("alpha = {:.6e}", res.alpha));
            push(
                &mut out,
                format!("certificate min eig = {:.6e}", res.certificate_min_eig),
            );
            let eigs: Vec<String> = res
                .closed_loop_spectrum
                .iter()
                .map(|e| format!("{:.4}{:+.4}i", e[0], e[1]))
                .collect();
            push(&mut out, format!("closed-loop spectrum: [{}]", eigs.join(", ")));
            push(
                &mut out,
                format!("closed-loop abscissa = {:.6e}", res.closed_loop_abscissa),
            );
            push(&mut out, format!("status: {}", res.status));
        }
        if let Some(v) = &self.verify {
            push(
                &mut out,
                format!(
                    "verify: theorem-1 max eig = {:.6e}, theorem-2 min eig = {:.6e}, abscissa = {:.6e}, equivalence consistent = {}",
                    v.theorem1_max_eig, v.theorem2_min_eig, v.closed_loop_abscissa, v.equivalence_consistent
                ),
            );
            if let (Some(mv), Some(ok)) = (v.dissipation_max_violation, v.dissipation_ok) {
                push(
                    &mut out,
                    format!("dissipation audit: ok={} max violation={:.3e}", ok, mv),
                );
            }
            push(&mut out, format!("verdict: {}", if v.pass { "pass" } else { "fail" }));
        }
        if let Some(s) = &self.simulation {
            push(
                &mut out,
                format!(
                    "simulation: {} samples, dt={:.3e}, T={:.3e}, terminal norm={:.6e}, diverged={}",
                    s.samples, s.dt, s.t_final, s.terminal_norm, s.diverged
                ),
            );
        }
        if let Some(w) = self.wall_time_ms {
            push(&mut out, format!("wall time: {w:.1} ms"));
        }
        out
    }
}

fn fmt_mat(rows: &[Vec<f64>]) -> String {
    let body: Vec<String> = rows
        .iter()
        .map(|r| {
            let cells: Vec<String> = r.iter().map(|v| format!("{v:.6}")).collect();
            format!("[{}]", cells.join(", "))
        })
        .collect();
    format!("[{}]", body.join(", "))
}

pub fn spectrum_pairs(s: &Spectrum<f64>) -> Vec<[f64; 2]> {
    s.eigenvalues.iter().map(|z| [z.re, z.im]).collect()
}
