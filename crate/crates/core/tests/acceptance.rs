//! Acceptance criteria. Each criterion prints one `PASS` or `FAIL` line;
//! the process exits nonzero if any fails.

use std::process::{Command, ExitCode};
use std::time::Instant;

use morseframe::permutohedron::{open_face_of, OrderedPartition};
use morseframe::projection::{brute_force_project, kkt_verify, project, ProjectionResult};
use morseframe::reparam::{build_diffeo, compose_unit, homotopy_from_report, normalize_with_eps};
use morseframe::surface::{
    analyze, find_critical_points, is_special, normalize_pair, verdict_from, FramedPair, Scene,
    SurfaceConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use std::f64::consts::PI;

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: String) -> Outcome {
    Outcome { ok, detail }
}

/// Random test points: uniform, centred, near the boundary and with ties.
fn sample_point(rng: &mut ChaCha8Rng, q: usize, kappa: f64, kind: usize) -> Vec<f64> {
    let spread = kappa * q as f64;
    let mut c: Vec<f64> = (0..q).map(|_| rng.gen_range(-spread..spread)).collect();
    match kind % 4 {
        1 => {
            let mean = c.iter().sum::<f64>() / q as f64;
            c.iter_mut().for_each(|x| *x -= mean);
        }
        2 => {
            // a vertex of the polytope, pushed slightly outward or inward
            let mut rho: Vec<usize> = (0..q).collect();
            for k in (1..q).rev() {
                rho.swap(k, rng.gen_range(0..=k));
            }
            let v = morseframe::permutohedron::vertex(&rho).unwrap();
            let s = 1.0 + rng.gen_range(-1e-6..1e-6);
            c = v.iter().map(|x| s * kappa * x).collect();
        }
        3 => {
            for k in 1..q {
                if rng.gen_bool(0.5) {
                    c[k] = c[k - 1];
                }
            }
        }
        _ => {}
    }
    c
}

struct ProjectionRuns {
    results: Vec<(Vec<f64>, f64, ProjectionResult, Vec<f64>)>,
    seconds: f64,
}

fn projection_runs() -> ProjectionRuns {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let start = Instant::now();
    let mut results = Vec::new();
    for q in 1..=5usize {
        for kappa in [0.1, 1.0] {
            for k in 0..1000 {
                let c = sample_point(&mut rng, q, kappa, k);
                let p = project(&c, kappa).expect("projection");
                let b = brute_force_project(&c, kappa).expect("oracle");
                results.push((c, kappa, p, b));
            }
        }
    }
    ProjectionRuns {
        results,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn criterion_1(runs: &ProjectionRuns) -> Outcome {
    let worst = runs
        .results
        .iter()
        .map(|(_, _, p, b)| p.c_prime.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
        .fold(0.0, f64::max);
    outcome(
        worst <= 1e-8 && runs.seconds <= 60.0 && runs.results.len() >= 10_000,
        format!(
            "{} points (q = 1..5, κ ∈ {{0.1, 1}}), max coordinate error {worst:.3e}, {:.2} s",
            runs.results.len(),
            runs.seconds
        ),
    )
}

fn criterion_2(runs: &ProjectionRuns) -> Outcome {
    let mut failures = 0;
    let mut worst_residual = 0.0f64;
    let mut min_lambda = f64::INFINITY;
    for (c, kappa, p, _) in &runs.results {
        let report = kkt_verify(c, *kappa, p, 1e-9);
        worst_residual = worst_residual.max(report.residual);
        min_lambda = p.lambda_k.iter().copied().fold(min_lambda, f64::min);
        let monotone = p.offsets.windows(2).all(|w| w[0] <= w[1]);
        if !report.ok || report.residual > 1e-9 || !monotone {
            failures += 1;
        }
    }
    outcome(
        failures == 0 && min_lambda >= -1e-9,
        format!(
            "{failures} failures, max residual {worst_residual:.3e}, min λ_k {:.3e}",
            if min_lambda.is_finite() { min_lambda } else { 0.0 }
        ),
    )
}

fn random_instance(rng: &mut ChaCha8Rng) -> (Vec<f64>, f64) {
    let q = rng.gen_range(1..=6usize);
    let eps = rng.gen_range(1e-3..1.0 / 3.0);
    let reach = 1.0 - 3.0 * eps;
    let mut c: Vec<f64> = (0..q).map(|_| rng.gen_range(-reach..=reach)).collect();
    if rng.gen_bool(0.3) {
        for k in 1..q {
            if rng.gen_bool(0.5) {
                c[k] = c[k - 1];
            }
        }
    }
    (c, eps)
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    let n = 2000;
    for _ in 0..n {
        let (c, eps) = random_instance(&mut rng);
        let h = build_diffeo(&c, eps).expect("diffeomorphism");
        for (x, cj) in h.c_prime().iter().zip(&c) {
            worst = worst.max((h.eval(*x) - cj).abs());
        }
    }
    outcome(worst <= 1e-9, format!("{n} instances, max |h(c'_j) - c_j| = {worst:.3e}"))
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_flat = 0.0f64;
    let mut worst_end = 0.0f64;
    let n = 1000;
    for _ in 0..n {
        let (c, eps) = random_instance(&mut rng);
        let h = build_diffeo(&c, eps).expect("diffeomorphism");
        let r = h.flat_radius();
        let (lo, hi) = h.domain();
        let mut centers = h.c_prime().to_vec();
        centers.extend([lo, hi]);
        for x in centers {
            for k in 1..40 {
                let t = x - r + 2.0 * r * k as f64 / 40.0;
                if (lo..=hi).contains(&t) {
                    worst_flat = worst_flat.max((h.derivative(t) - 1.0).abs());
                }
            }
        }
        worst_end = worst_end.max((h.eval(lo) + 1.0).abs()).max((h.eval(hi) - 1.0).abs());
    }
    outcome(
        worst_flat <= f64::EPSILON && worst_end <= 1e-12,
        format!("{n} instances, max |h' - 1| on flat neighbourhoods {worst_flat:.3e}, endpoint error {worst_end:.3e}"),
    )
}

/// Saddle values whose projection lies in the fine face `fine` while the
/// KKT offsets are constant over the blocks of the coarsening at `cuts`.
fn coarse_boundary_instance(
    rng: &mut ChaCha8Rng,
    q: usize,
    eps: f64,
) -> (Vec<f64>, OrderedPartition, Vec<usize>) {
    let kappa = eps / (q as f64 + 1.0);
    let mut perm: Vec<usize> = (0..q).collect();
    for k in (1..q).rev() {
        perm.swap(k, rng.gen_range(0..=k));
    }
    let fine_cuts: Vec<usize> = (1..q).filter(|_| rng.gen_bool(0.6)).chain([q]).collect();
    let coarse_cuts: Vec<usize> = fine_cuts.iter().copied().filter(|&m| m == q || rng.gen_bool(0.5)).collect();
    let mut mu: Vec<f64> = (0..coarse_cuts.len()).map(|_| rng.gen_range(-0.4..0.4)).collect();
    mu.sort_by(f64::total_cmp);
    let mut blocks = Vec::new();
    let mut c = vec![0.0; q];
    let mut start = 0;
    let mut coarse = 0;
    for &end in &fine_cuts {
        let block = perm[start..end].to_vec();
        let centre = kappa * ((start + 1 + end) as f64 / 2.0 - (q as f64 + 1.0) / 2.0);
        while coarse_cuts[coarse] < end {
            coarse += 1;
        }
        for &j in &block {
            c[j] = centre + mu[coarse];
        }
        blocks.push(block);
        start = end;
    }
    (c, OrderedPartition::new(q, blocks).unwrap(), coarse_cuts)
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let eps = 0.05;
    let mut worst_spread = 0.0f64;
    let mut face_mismatch = 0;
    let n = 1000;
    for _ in 0..n {
        let q = rng.gen_range(2..=6usize);
        let (c, fine, coarse_cuts) = coarse_boundary_instance(&mut rng, q, eps);
        let h = build_diffeo(&c, eps).expect("diffeomorphism");
        if h.face() != fine {
            face_mismatch += 1;
        }
        let t = &h.offsets()[1..h.offsets().len() - 1];
        let mut pos = 0;
        let mut group: Vec<f64> = Vec::new();
        for (k, block) in fine.blocks().iter().enumerate() {
            pos += block.len();
            group.push(t[k]);
            if coarse_cuts.contains(&pos) {
                let hi = group.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let lo = group.iter().copied().fold(f64::INFINITY, f64::min);
                worst_spread = worst_spread.max(hi - lo);
                group.clear();
            }
        }
    }

    // H(c, κ) across face boundaries: c on a tie between two blocks and on
    // the polytope boundary, perturbed by at most 1e-8
    let kappa = 0.1;
    let mut worst_jump = 0.0f64;
    for _ in 0..200 {
        let q = rng.gen_range(2..=5usize);
        let (c, _, _) = coarse_boundary_instance(&mut rng, q, kappa);
        let base = compose_unit(&c, kappa).expect("unit diffeomorphism");
        for _ in 0..4 {
            let moved: Vec<f64> = c.iter().map(|x| x + rng.gen_range(-1e-8..1e-8)).collect();
            let other = compose_unit(&moved, kappa).expect("unit diffeomorphism");
            for k in 0..=400 {
                let t = -1.0 + 2.0 * k as f64 / 400.0;
                worst_jump = worst_jump.max((base.eval(t) - other.eval(t)).abs());
            }
        }
    }
    outcome(
        worst_spread <= 1e-9 && face_mismatch == 0 && worst_jump <= 1e-6,
        format!(
            "{n} boundary instances, max merged-offset spread {worst_spread:.3e}, face mismatches {face_mismatch}; \
             sup |ΔH| = {worst_jump:.3e} for |Δc| ≤ 1e-8"
        ),
    )
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let config = SurfaceConfig::default();
    let pair = FramedPair::new(Scene::TwoCosines { a: 1.0, b: 1.0 }, 256).unwrap();
    let a = analyze(&pair, &config).expect("analysis");
    let v = verdict_from(&a.c, &a.graph, config.tie_tol);
    let seconds = start.elapsed().as_secs_f64();
    let expected = [([PI, PI], 0u8, -1.0), ([0.0, PI], 1, 0.0), ([PI, 0.0], 1, 0.0), ([0.0, 0.0], 2, 1.0)];
    let mut worst = 0.0f64;
    let shapes_ok = a.critical_points.len() == 4
        && a.critical_points.iter().zip(&expected).all(|(cp, (pos, index, value))| {
            worst = worst
                .max((cp.position[0] - pos[0]).abs())
                .max((cp.position[1] - pos[1]).abs())
                .max((cp.value - value).abs());
            cp.index == *index
        });
    let values_ok = a.c.len() == 2 && a.c.iter().all(|x| x.abs() <= 1e-8);
    outcome(
        shapes_ok && worst <= 1e-8 && values_ok && v.special && seconds <= 30.0,
        format!(
            "critical point error {worst:.3e}, saddle values {:?}, special = {}, {seconds:.2} s",
            a.c, v.special
        ),
    )
}

fn criterion_7() -> Outcome {
    let config = SurfaceConfig::default();
    let pair = FramedPair::new(Scene::TwoCosines { a: 3.0, b: 1.0 }, 256).unwrap();
    let before = is_special(&pair, &config).expect("verdict");
    let cps = find_critical_points(&pair, &config).expect("critical points");
    let c: Vec<f64> = cps.iter().filter(|p| p.is_saddle()).map(|p| p.value).collect();
    let (_, report, after) = normalize_pair(&pair, &config).expect("normalization");
    let s = &report.scaled_values;
    let err = (s[0] - 1.0 / 3.0).abs().max((s[1] + 1.0 / 3.0).abs());
    let values_ok = (c[0] - 0.5).abs() <= 1e-12 && (c[1] + 0.5).abs() <= 1e-12;
    outcome(
        values_ok && !before.special && !before.condition_i && err <= 1e-8 && after.special,
        format!(
            "c = {c:?}, before: special = {}, condition (i) = {}; scaled = {s:?} (error {err:.3e}), after: special = {}",
            before.special, before.condition_i, after.special
        ),
    )
}

fn criterion_8() -> Outcome {
    let config = SurfaceConfig::default();
    let mut pairs = 0;
    let mut violations = 0;
    for scene in Scene::registry() {
        let pair = FramedPair::new(scene, 256).unwrap();
        let a = analyze(&pair, &config).expect("analysis");
        for &(i, j) in &a.graph.saddle_saddle_pairs {
            pairs += 1;
            if (a.c[i] - a.c[j]).abs() < 3.0 * a.eps * (1.0 - 1e-12) {
                violations += 1;
            }
        }
    }
    // a synthetic connection between the two equal saddles of the special scene
    let pair = FramedPair::new(Scene::TwoCosines { a: 1.0, b: 1.0 }, 256).unwrap();
    let mut a = analyze(&pair, &config).expect("analysis");
    a.graph.saddle_saddle_pairs.insert((0, 1));
    let injected = verdict_from(&a.c, &a.graph, config.tie_tol);
    let flagged = !injected.special && injected.condition_ii == Some(false) && injected.violations == vec![(1, 2)];
    outcome(
        violations == 0 && flagged,
        format!(
            "{pairs} connected saddle pairs in the registry, {violations} closer than 3ε; injected edge flagged: {flagged}"
        ),
    )
}

fn criterion_9() -> Outcome {
    let config = SurfaceConfig::default();
    let pair = FramedPair::new(Scene::TwoCosines { a: 1.0, b: 1.0 }, 256).unwrap();
    let a = analyze(&pair, &config).expect("analysis");
    let report = normalize_with_eps(&a.c, a.eps).expect("normalization");
    let kappa = 2.0 / (a.c.len() as f64 + 1.0);
    let faces: Vec<Option<OrderedPartition>> = [0.0, 0.25, 0.5, 0.75, 1.0]
        .iter()
        .map(|&t| {
            let values = homotopy_from_report(&report, &a.c, t).expect("homotopy");
            open_face_of(&values, kappa, config.tie_tol).ok()
        })
        .collect();
    let constant = faces[0].is_some() && faces.iter().all(|f| f == &faces[0]);
    let shown = faces
        .iter()
        .map(|f| f.as_ref().map_or("outside".to_string(), |f| f.to_string()))
        .collect::<Vec<_>>()
        .join(" ");
    outcome(constant, format!("faces at t = 0, ¼, ½, ¾, 1: {shown}"))
}

fn criterion_10() -> Outcome {
    let exe = env!("CARGO_BIN_EXE_morseframe");
    let dir = std::env::temp_dir().join(format!("morseframe-acceptance-{}", std::process::id()));
    let run = |args: &[&str]| {
        Command::new(exe)
            .args(args)
            .env("MORSEFRAME_SEED", "42")
            .output()
            .expect("binary runs")
    };
    let mut identical = true;
    let mut produced = 0;
    for round in 0..2 {
        let out_dir = dir.join(format!("run{round}"));
        let plot = run(&["plot", "--a", "3", "--grid", "256", "--out", out_dir.to_str().unwrap()]);
        identical &= plot.status.success();
        let plot_values = run(&["plot", "--values", "0.9,-0.2,-0.1", "--kappa", "1", "--out", out_dir.join("values").to_str().unwrap()]);
        identical &= plot_values.status.success();
    }
    let json_a = run(&["normalize", "--a", "3", "--grid", "256", "--homotopy-samples", "5"]);
    let json_b = run(&["normalize", "--a", "3", "--grid", "256", "--homotopy-samples", "5"]);
    identical &= json_a.status.success() && json_a.stdout == json_b.stdout;
    let suite_a = run(&["verify", "--rounds", "50"]);
    let suite_b = run(&["verify", "--rounds", "50"]);
    identical &= suite_a.status.success() && suite_a.stdout == suite_b.stdout;
    produced += 2;
    for file in ["portrait.svg", "permutohedron.svg", "values/permutohedron.svg"] {
        let a = std::fs::read(dir.join("run0").join(file));
        let b = std::fs::read(dir.join("run1").join(file));
        match (a, b) {
            (Ok(a), Ok(b)) => {
                identical &= a == b;
                produced += 1;
            }
            _ => identical = false,
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
    outcome(
        identical,
        format!("{produced} artifacts (report JSON, suite output, 3 SVG files) compared across two runs"),
    )
}

fn main() -> ExitCode {
    let runs = projection_runs();
    let criteria: Vec<Criterion> = vec![
        ("projection oracle equivalence", Box::new(|| criterion_1(&runs))),
        ("KKT certificates", Box::new(|| criterion_2(&runs))),
        ("h(c'_j) = c_j", Box::new(criterion_3)),
        ("h' = 1 near marked points, endpoints", Box::new(criterion_4)),
        ("boundary coherence and H-continuity", Box::new(criterion_5)),
        ("two_cosines(1,1) end to end", Box::new(criterion_6)),
        ("two_cosines(3,1) normalization", Box::new(criterion_7)),
        ("separation inequality", Box::new(criterion_8)),
        ("homotopy face constancy", Box::new(criterion_9)),
        ("determinism", Box::new(criterion_10)),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        println!("{} criterion {:2} {name}: {}", if o.ok { "PASS" } else { "FAIL" }, k + 1, o.detail);
        failed += usize::from(!o.ok);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
