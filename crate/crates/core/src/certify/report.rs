use std::fmt;
use std::time::Duration;

use rug::{Float, Rational};
use serde::Serialize;

use super::pipeline::ProofSettings;
use super::{PositivityCertificate, ResidualCheck};
use crate::expr::Expression;
use crate::gfun::{EndpointLimit, LimitMethod};
use crate::precision::to_decimal_string;
use crate::remez::{EquioscillationReport, MinimaxResult};

/// Fixed text attached to every report.
pub const CAVEAT: &str = "The bound delta is the Remez levelled-error estimate, inflated by the \
margin factor and confirmed only on a finite sample grid; it is not a rigorous bound on |g - P|. \
Positivity of P - delta*margin is certified with outward-rounded interval arithmetic. A proven \
verdict is therefore conditional on delta and on the chosen working precision.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Proven,
    Disproven,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Proven => "proven",
            Verdict::Disproven => "disproven",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Limits,
    Precondition,
    BuildG,
    SignCheck,
    Minimax,
    Equioscillation,
    ResidualCheck,
    Certify,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Limits => "limits",
            Stage::Precondition => "precondition",
            Stage::BuildG => "build_g",
            Stage::SignCheck => "sign_check",
            Stage::Minimax => "minimax",
            Stage::Equioscillation => "equioscillation",
            Stage::ResidualCheck => "residual_check",
            Stage::Certify => "certify",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    NegativeAlpha,
    NegativeBeta,
    InteriorSample,
}

/// Evidence for a disproof. For endpoint kinds `value` is the limit itself.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub kind: WitnessKind,
    pub x: Float,
    pub value: Float,
}

/// Evaluations of `g` per stage, and wall-clock time when enabled.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StageCounts {
    entries: Vec<(Stage, usize, Option<Duration>)>,
}

impl StageCounts {
    pub fn record(&mut self, stage: Stage, evaluations: usize) {
        match self.entries.iter_mut().find(|e| e.0 == stage) {
            Some(e) => e.1 += evaluations,
            None => self.entries.push((stage, evaluations, None)),
        }
    }

    pub fn record_time(&mut self, stage: Stage, elapsed: Duration) {
        match self.entries.iter_mut().find(|e| e.0 == stage) {
            Some(e) => e.2 = Some(e.2.unwrap_or_default() + elapsed),
            None => self.entries.push((stage, 0, Some(elapsed))),
        }
    }

    pub fn evaluations(&self, stage: Stage) -> usize {
        self.entries
            .iter()
            .find(|e| e.0 == stage)
            .map_or(0, |e| e.1)
    }

    pub fn total_evaluations(&self) -> usize {
        self.entries.iter().map(|e| e.1).sum()
    }
}

/// Everything the pipeline learned, successful or not.
#[derive(Debug, Clone)]
pub struct ProofReport {
    pub verdict: Verdict,
    pub failed_stage: Option<Stage>,
    pub message: String,
    pub function: String,
    pub a: Float,
    pub b: Float,
    pub n: Rational,
    pub m: Rational,
    pub degree: usize,
    pub alpha: Option<EndpointLimit>,
    pub beta: Option<EndpointLimit>,
    pub witness: Option<Witness>,
    pub minimax: Option<MinimaxResult>,
    pub equioscillation: Option<EquioscillationReport>,
    pub residual_check: Option<ResidualCheck>,
    pub certificate: Option<PositivityCertificate>,
    pub counts: StageCounts,
    pub settings: ProofSettings,
}

impl ProofReport {
    pub(crate) fn new(
        f: &Expression,
        a: &Float,
        b: &Float,
        n: &Rational,
        m: &Rational,
        degree: usize,
        settings: &ProofSettings,
    ) -> ProofReport {
        ProofReport {
            verdict: Verdict::Inconclusive,
            failed_stage: None,
            message: String::new(),
            function: f.source_text().to_string(),
            a: a.clone(),
            b: b.clone(),
            n: n.clone(),
            m: m.clone(),
            degree,
            alpha: None,
            beta: None,
            witness: None,
            minimax: None,
            equioscillation: None,
            residual_check: None,
            certificate: None,
            counts: StageCounts::default(),
            settings: settings.clone(),
        }
    }

    /// Ends the run at `stage`: disproven with a witness, inconclusive without.
    pub(crate) fn finish_with(
        mut self,
        stage: Stage,
        message: String,
        witness: Option<Witness>,
    ) -> ProofReport {
        self.verdict = if witness.is_some() {
            Verdict::Disproven
        } else {
            Verdict::Inconclusive
        };
        self.failed_stage = Some(stage);
        self.message = message;
        self.witness = witness;
        self
    }

    /// Process exit code: 0 proven, 1 disproven, 2 inconclusive.
    pub fn exit_code(&self) -> i32 {
        match self.verdict {
            Verdict::Proven => 0,
            Verdict::Disproven => 1,
            Verdict::Inconclusive => 2,
        }
    }

    /// Pretty JSON with a fixed key order. Deterministic unless wall-clock
    /// timing was requested.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.view()).expect("report serialises")
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self.view()).expect("report serialises")
    }

    fn view(&self) -> ReportView {
        let digits = self.settings.precision.digits();
        let dec = |x: &Float| to_decimal_string(x, digits);
        let decs = |v: &[Float]| v.iter().map(dec).collect::<Vec<_>>();
        let limit = |l: &Option<EndpointLimit>| {
            l.as_ref().map(|l| LimitView {
                value: dec(&l.value),
                method: l.method,
                cross_check: l.cross_check.as_ref().map(dec),
            })
        };
        let mm = self.minimax.as_ref();
        let message = if self.verdict == Verdict::Proven && self.message.is_empty() {
            "P - delta*margin is positive on every subinterval".to_string()
        } else {
            self.message.clone()
        };
        let s = &self.settings;
        ReportView {
            verdict: self.verdict,
            failed_stage: self.failed_stage,
            message,
            function: self.function.clone(),
            interval: [dec(&self.a), dec(&self.b)],
            n: self.n.to_string(),
            m: self.m.to_string(),
            degree: self.degree,
            alpha: limit(&self.alpha),
            beta: limit(&self.beta),
            witness: self.witness.as_ref().map(|w| WitnessView {
                kind: w.kind,
                x: dec(&w.x),
                value: dec(&w.value),
            }),
            delta_hat: mm.map(|r| dec(&r.delta_hat)),
            lower_bound: mm.map(|r| dec(&r.lower_bound)),
            upper_bound: mm.map(|r| dec(&r.upper_bound)),
            nodes: mm.map(|r| decs(&r.nodes)),
            node_residuals: mm.map(|r| decs(&r.node_residuals)),
            polynomial_coefficients: mm.map(|r| decs(r.polynomial.coefficients())),
            monomial_coefficients: mm.map(|r| decs(&r.polynomial.to_monomial())),
            iterations: mm.map(|r| r.iterations),
            levelled_error_history: mm.map(|r| decs(&r.levelled_error_history)),
            equioscillation: self.equioscillation.as_ref().map(|e| EquioscillationView {
                passed: e.passed,
                relative_spread: dec(&e.relative_spread),
                offending: e.offending.clone(),
                zero_residual: e.zero_residual,
            }),
            residual_check: self.residual_check.as_ref().map(|r| ResidualView {
                passed: r.passed,
                points: r.points,
                max_residual: dec(&r.max_residual),
                max_location: dec(&r.max_location),
                threshold: dec(&r.threshold),
            }),
            global_min_bound: self.certificate.as_ref().map(|c| dec(&c.global_min_bound)),
            certificate: self.certificate.as_ref().map(|c| CertificateView {
                delta: dec(&c.delta),
                margin_factor: dec(&c.margin_factor),
                global_min_bound: dec(&c.global_min_bound),
                subintervals: c.subintervals.len(),
                tiling: c
                    .subintervals
                    .iter()
                    .map(|(l, r, lb)| [dec(l), dec(r), dec(lb)])
                    .collect(),
            }),
            caveat: CAVEAT,
            settings: SettingsView {
                precision_digits: digits,
                remez_tol: s.remez.tol,
                max_iterations: s.remez.max_iterations,
                grid_multiplier: s.remez.grid_multiplier,
                margin_factor: dec(&s.margin_factor),
                equioscillation_tol: s.equioscillation_tol,
                sign_samples: s.sign_samples,
                residual_grid_factor: s.residual_grid_factor,
                alpha_override: s.alpha_override.as_ref().map(dec),
                beta_override: s.beta_override.as_ref().map(dec),
            },
            timings: self
                .counts
                .entries
                .iter()
                .map(|(stage, evaluations, time)| StageView {
                    stage: *stage,
                    g_evaluations: *evaluations,
                    seconds: time.map(|d| d.as_secs_f64()),
                })
                .collect(),
        }
    }
}

#[derive(Serialize)]
struct ReportView {
    verdict: Verdict,
    failed_stage: Option<Stage>,
    message: String,
    function: String,
    interval: [String; 2],
    n: String,
    m: String,
    degree: usize,
    alpha: Option<LimitView>,
    beta: Option<LimitView>,
    witness: Option<WitnessView>,
    delta_hat: Option<String>,
    lower_bound: Option<String>,
    upper_bound: Option<String>,
    nodes: Option<Vec<String>>,
    node_residuals: Option<Vec<String>>,
    polynomial_coefficients: Option<Vec<String>>,
    monomial_coefficients: Option<Vec<String>>,
    iterations: Option<usize>,
    levelled_error_history: Option<Vec<String>>,
    equioscillation: Option<EquioscillationView>,
    residual_check: Option<ResidualView>,
    global_min_bound: Option<String>,
    certificate: Option<CertificateView>,
    caveat: &'static str,
    settings: SettingsView,
    timings: Vec<StageView>,
}

#[derive(Serialize)]
struct LimitView {
    value: String,
    method: LimitMethod,
    cross_check: Option<String>,
}

#[derive(Serialize)]
struct WitnessView {
    kind: WitnessKind,
    x: String,
    value: String,
}

#[derive(Serialize)]
struct EquioscillationView {
    passed: bool,
    relative_spread: String,
    offending: Vec<usize>,
    zero_residual: bool,
}

#[derive(Serialize)]
struct ResidualView {
    passed: bool,
    points: usize,
    max_residual: String,
    max_location: String,
    threshold: String,
}

#[derive(Serialize)]
struct CertificateView {
    delta: String,
    margin_factor: String,
    global_min_bound: String,
    subintervals: usize,
    tiling: Vec<[String; 3]>,
}

#[derive(Serialize)]
struct SettingsView {
    precision_digits: u32,
    remez_tol: f64,
    max_iterations: usize,
    grid_multiplier: usize,
    margin_factor: String,
    equioscillation_tol: f64,
    sign_samples: usize,
    residual_grid_factor: usize,
    alpha_override: Option<String>,
    beta_override: Option<String>,
}

#[derive(Serialize)]
struct StageView {
    stage: Stage,
    g_evaluations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    seconds: Option<f64>,
}
