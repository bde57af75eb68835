//! Re-verification of report artifacts, and a seeded random property suite.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::json::from_json;
use super::report::Report;
use super::{CliError, CliResult};
use crate::permutohedron::{membership, OrderedPartition};
use crate::projection::{brute_force_project, kkt_verify, project, ProjectionResult};
use crate::reparam::{build_diffeo, IntervalDiffeo};

/// Environment variable holding the seed of the random suite.
pub const SEED_VAR: &str = "MORSEFRAME_SEED";

/// One verified property.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub name: String,
    pub ok: bool,
    pub detail: String,
}

impl fmt::Display for CheckLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}: {}", if self.ok { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

/// Lines of a verification run.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOutcome {
    pub lines: Vec<CheckLine>,
}

impl SuiteOutcome {
    pub fn all_ok(&self) -> bool {
        self.lines.iter().all(|l| l.ok)
    }

    /// One line per check, newline terminated.
    pub fn render(&self) -> String {
        self.lines.iter().map(|l| format!("{l}\n")).collect()
    }
}

fn line(name: &str, ok: bool, detail: String) -> CheckLine {
    CheckLine {
        name: name.into(),
        ok,
        detail,
    }
}

/// Largest `|h(c'_j) - c_j|`.
fn value_error(h: &IntervalDiffeo) -> f64 {
    h.c_prime()
        .iter()
        .zip(h.c_values())
        .map(|(x, c)| (h.eval(*x) - c).abs())
        .fold(0.0, f64::max)
}

/// Largest `|h' - 1|` on the flat neighborhoods, sampled at 21 points each,
/// and the endpoint error `max |h(±ε/2) ∓ 1|`.
fn flatness_errors(h: &IntervalDiffeo) -> (f64, f64) {
    let (lo, hi) = h.domain();
    let r = h.flat_radius();
    let mut centers: Vec<f64> = h.c_prime().to_vec();
    centers.extend([lo, hi]);
    let mut worst: f64 = 0.0;
    for x in centers {
        for k in 0..=20 {
            let t = x - r + 2.0 * r * k as f64 / 20.0;
            // open neighborhoods, intersected with the domain
            if t <= x - r || t >= x + r || t < lo || t > hi {
                continue;
            }
            worst = worst.max((h.derivative(t) - 1.0).abs());
        }
    }
    let endpoints = (h.eval(lo) + 1.0).abs().max((h.eval(hi) - 1.0).abs());
    (worst, endpoints)
}

/// Smallest `h'` on a uniform sample of the domain.
fn min_derivative(h: &IntervalDiffeo, samples: usize) -> f64 {
    let (lo, hi) = h.domain();
    (0..=samples)
        .map(|k| h.derivative(lo + (hi - lo) * k as f64 / samples as f64))
        .fold(f64::INFINITY, f64::min)
}

/// Check a report without re-running the surface analysis: the projection
/// certificate, consistency of `c'` and offsets with a rebuilt `h`, the
/// value, flatness and monotonicity properties of `h`, and the location of
/// the scaled values.
pub fn verify_report(report: &Report) -> SuiteOutcome {
    let mut lines = Vec::new();
    let q = report.c.len();
    let eps = report.epsilon;
    let tol = report.tolerances.tol_kkt;

    lines.push(line(
        "counts",
        report.q == q && report.critical_points.len() == report.p + report.q + report.r,
        format!("p = {}, q = {}, r = {}", report.p, report.q, report.r),
    ));

    let bound = {
        let d_min = report
            .saddle_distances
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().enumerate().filter(move |(k, _)| *k != i).map(|(_, d)| *d))
            .fold(1.0f64, f64::min);
        let gap = 1.0 - report.c.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        d_min.min(gap) / 3.0
    };
    lines.push(line(
        "epsilon",
        eps > 0.0 && eps <= bound * (1.0 + 1e-15) && eps <= report.epsilon_formula,
        format!("ε = {eps:.6e}, formula bound {bound:.6e}"),
    ));

    if q > 0 {
        let kappa = eps / (q as f64 + 1.0);
        let cert = (|| {
            let kkt = report.kkt.as_ref()?;
            let face = OrderedPartition::from_one_based(q, &report.face).ok()?;
            let offsets = report.t_offsets.get(1..report.t_offsets.len().checked_sub(1)?)?.to_vec();
            Some(ProjectionResult {
                c_prime: report.c_prime.clone(),
                face,
                offsets,
                lambda: kkt.lambda,
                lambda_k: kkt.lambda_k.clone(),
            })
        })();
        match cert {
            Some(cert) => {
                let check = kkt_verify(&report.c, kappa, &cert, tol);
                lines.push(line(
                    "kkt",
                    check.ok && check.residual <= tol,
                    if check.ok {
                        format!("residual {:.3e}", check.residual)
                    } else {
                        check.violations.join("; ")
                    },
                ));
            }
            None => lines.push(line("kkt", false, "certificate fields missing or malformed".into())),
        }
    }

    match build_diffeo(&report.c, eps) {
        Err(e) => lines.push(line("rebuild", false, e.to_string())),
        Ok(h) => {
            let dc = h
                .c_prime()
                .iter()
                .zip(&report.c_prime)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            let dt = if h.offsets().len() == report.t_offsets.len() {
                h.offsets()
                    .iter()
                    .zip(&report.t_offsets)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            } else {
                f64::INFINITY
            };
            lines.push(line(
                "rebuild",
                h.c_prime().len() == q && dc <= 1e-12 && dt <= 1e-12,
                format!("max |Δc'| = {dc:.3e}, max |Δt| = {dt:.3e}"),
            ));
            let err = value_error(&h);
            lines.push(line("h(c') = c", err <= 1e-9, format!("max error {err:.3e}")));
            let (flat, ends) = flatness_errors(&h);
            lines.push(line(
                "h' = 1 near c' and ±ε/2",
                flat <= 1e-12 && ends <= 1e-12,
                format!("max |h' - 1| = {flat:.3e}, endpoint error {ends:.3e}"),
            ));
            let chain_ok = report.t_offsets.windows(2).all(|w| w[0] <= w[1]);
            let dmin = min_derivative(&h, 4000);
            lines.push(line(
                "monotone",
                chain_ok && dmin > 0.0,
                format!("min h' = {dmin:.3e}, offsets nondecreasing: {chain_ok}"),
            ));
        }
    }

    if q > 0 {
        let kappa = 2.0 / (q as f64 + 1.0);
        let scaled_ok = report
            .scaled_values
            .iter()
            .zip(&report.c_prime)
            .all(|(s, x)| (s - 2.0 / eps * x).abs() <= 1e-12 * s.abs().max(1.0));
        let inside = membership(&report.scaled_values, kappa, report.tolerances.tie_tol).unwrap_or(false);
        lines.push(line(
            "scaled values",
            scaled_ok && inside,
            format!("(2/ε)c' in (2/(q+1))·P: {inside}"),
        ));
    }

    if let Some(after) = &report.special_after {
        lines.push(line("special after", after.special, format!("{:?}", after.violations)));
    }
    if let Some(h) = &report.homotopy {
        lines.push(line(
            "homotopy face",
            !report.special_before.special || h.constant_face,
            format!("constant: {}", h.constant_face),
        ));
    }
    SuiteOutcome { lines }
}

/// Parse and verify a serialized report. Fails with exit code 3 when a
/// check fails.
pub fn verify_report_json(text: &str) -> CliResult<String> {
    let report: Report = from_json(text)?;
    let outcome = verify_report(&report);
    let rendered = outcome.render();
    if outcome.all_ok() {
        Ok(rendered)
    } else {
        Err(CliError::Verification(rendered))
    }
}

/// Seed from [`SEED_VAR`], `0` when unset.
pub fn seed_from_env() -> CliResult<u64> {
    match std::env::var(SEED_VAR) {
        Err(_) => Ok(0),
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{SEED_VAR} must be a decimal unsigned integer, got {s:?}"))),
    }
}

/// Seeded random checks of the projection and of `h`: `rounds` points per
/// `q ∈ {1, …, 5}` against the exhaustive oracle with KKT certificates, and
/// `rounds` random `(c, ε)` per `q ∈ {1, …, 6}` for the properties of `h`.
pub fn random_suite(seed: u64, rounds: usize) -> SuiteOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lines = Vec::new();
    for q in 1..=5usize {
        let mut worst = 0.0f64;
        let mut worst_residual = 0.0f64;
        let mut failures = 0usize;
        for _ in 0..rounds {
            let kappa = if rng.gen_bool(0.5) { 0.1 } else { 1.0 };
            let c: Vec<f64> = (0..q).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let (Ok(p), Ok(b)) = (project(&c, kappa), brute_force_project(&c, kappa)) else {
                failures += 1;
                continue;
            };
            let err = p.c_prime.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            worst = worst.max(err);
            let check = kkt_verify(&c, kappa, &p, 1e-9);
            worst_residual = worst_residual.max(check.residual);
            if !check.ok || err > 1e-8 {
                failures += 1;
            }
        }
        lines.push(line(
            &format!("projection q={q}"),
            failures == 0,
            format!("{rounds} points, max oracle error {worst:.3e}, max residual {worst_residual:.3e}"),
        ));
    }
    for q in 1..=6usize {
        let mut worst_value = 0.0f64;
        let mut worst_flat = 0.0f64;
        let mut failures = 0usize;
        for _ in 0..rounds {
            let eps = rng.gen_range(1e-3..1.0 / 3.0);
            let reach = 1.0 - 3.0 * eps;
            let c: Vec<f64> = (0..q).map(|_| rng.gen_range(-reach..=reach)).collect();
            let Ok(h) = build_diffeo(&c, eps) else {
                failures += 1;
                continue;
            };
            let v = value_error(&h);
            let (flat, ends) = flatness_errors(&h);
            worst_value = worst_value.max(v);
            worst_flat = worst_flat.max(flat.max(ends));
            if v > 1e-9 || flat > 1e-12 || ends > 1e-12 || min_derivative(&h, 200) <= 0.0 {
                failures += 1;
            }
        }
        lines.push(line(
            &format!("diffeomorphism q={q}"),
            failures == 0,
            format!("{rounds} instances, max |h(c')-c| {worst_value:.3e}, max flatness error {worst_flat:.3e}"),
        ));
    }
    SuiteOutcome { lines }
}
