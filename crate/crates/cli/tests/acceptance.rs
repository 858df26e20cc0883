//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the process exits non-zero if any fails.

use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use switchtrack::bounds::{optimal_tuning, pods_bound};
use switchtrack::harness::{self, matched_state_cost_compare, LossModel, SyntheticSetup};
use switchtrack::learners::{specialists_step, LearnerSpec, SpecialistState};
use switchtrack::projection::project_with_stats;
use switchtrack::{kl_divergence, project, project_oracle, InteriorSimplexVector, LowerBounds, SimplexVector};

const BIN: &str = env!("CARGO_BIN_EXE_switchtrack");

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Random point of the open simplex, Dirichlet with a random shape.
fn dirichlet(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let shape = [0.3, 1.0, 4.0][r.random_range(0..3)];
    let g = Gamma::new(shape, 1.0).unwrap();
    loop {
        let x: Vec<f64> = (0..n).map(|_| g.sample(r)).collect();
        let s: f64 = x.iter().sum();
        let v: Vec<f64> = x.iter().map(|xi| xi / s).collect();
        if v.iter().all(|&vi| vi > 1e-300) && s.is_finite() {
            return v;
        }
    }
}

fn instance(r: &mut ChaCha8Rng, n: usize) -> (InteriorSimplexVector, LowerBounds) {
    let w = InteriorSimplexVector::new(dirichlet(r, n)).unwrap();
    let alpha = r.random_range(0.01..0.99);
    let beta = LowerBounds::new(dirichlet(r, n).iter().map(|b| alpha * b).collect()).unwrap();
    (w, beta)
}

fn kl(p: &[f64], w: &[f64]) -> f64 {
    p.iter()
        .zip(w)
        .filter(|(pi, _)| **pi > 0.0)
        .map(|(pi, wi)| pi * (pi / wi).ln())
        .sum()
}

/// Minimizer of `D(p || w)` over every candidate "clamp set S to beta,
/// rescale the rest" that is feasible.
fn exhaustive(w: &[f64], beta: &[f64]) -> Vec<f64> {
    let n = w.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 0u32..(1 << n) {
        let clamped = |i: usize| mask & (1 << i) != 0;
        let sb: f64 = (0..n).filter(|&i| clamped(i)).map(|i| beta[i]).sum();
        let sw: f64 = (0..n).filter(|&i| !clamped(i)).map(|i| w[i]).sum();
        if sw == 0.0 || sb >= 1.0 {
            continue;
        }
        let lambda = (1.0 - sb) / sw;
        let p: Vec<f64> = (0..n)
            .map(|i| if clamped(i) { beta[i] } else { lambda * w[i] })
            .collect();
        if (0..n).any(|i| p[i] < beta[i] - 1e-15) {
            continue;
        }
        let d = kl(&p, w);
        if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
            best = Some((d, p));
        }
    }
    best.expect("some candidate is feasible").1
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn bound_table_reproduction() -> Outcome {
    let text = fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/bound_curves.txt")).unwrap();
    let start = Instant::now();
    let out = Command::new(BIN)
        .args(["bounds", "--n", "500000", "--k", "40", "-T", "4000", "--c", "1", "--m-min", "2", "--m-max", "41"])
        .output()
        .unwrap();
    let elapsed = start.elapsed();
    if !out.status.success() {
        return outcome(false, format!("bounds exited with {}", out.status));
    }
    let csv = String::from_utf8(out.stdout).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let mut table: HashMap<(String, usize), f64> = HashMap::new();
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        let m: usize = cells[0].parse().unwrap();
        for (name, v) in header.iter().zip(&cells).skip(1) {
            table.insert((name.to_string(), m), v.parse().unwrap());
        }
    }
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for line in text.lines().filter(|l| !l.starts_with('#')) {
        let parts: Vec<&str> = line.split_whitespace().collect();
        let (name, m, plotted) = (parts[0], parts[1].parse::<usize>().unwrap(), parts[2].parse::<f64>().unwrap());
        let ours = table[&(name.to_string(), m)];
        worst = worst.max((ours - 100.0 * plotted).abs() / (100.0 * plotted));
        checked += 1;
    }
    let pass = worst <= 1e-4 && elapsed < Duration::from_secs(1);
    outcome(
        pass,
        format!("{checked} plotted values, max rel err {worst:.2e} (tol 1e-4), {elapsed:.2?} (limit 1 s)"),
    )
}

fn projection_correctness() -> Outcome {
    let start = Instant::now();
    let mut r = harness::rng(2);
    let mut vs_oracle: f64 = 0.0;
    for _ in 0..10_000 {
        let n = r.random_range(2..=64);
        let (w, beta) = instance(&mut r, n);
        let a = project(&w, &beta).unwrap();
        let b = project_oracle(&w, &beta).unwrap();
        vs_oracle = vs_oracle.max(max_gap(&a.p, &b.p));
    }
    let mut vs_exhaustive: f64 = 0.0;
    for _ in 0..1_000 {
        let n = r.random_range(2..=8);
        let (w, beta) = instance(&mut r, n);
        let a = project(&w, &beta).unwrap();
        vs_exhaustive = vs_exhaustive.max(max_gap(&a.p, &exhaustive(&w, &beta)));
    }
    let elapsed = start.elapsed();
    let pass = vs_oracle < 1e-10 && vs_exhaustive < 1e-10 && elapsed < Duration::from_secs(30);
    outcome(
        pass,
        format!(
            "vs oracle {vs_oracle:.2e} over 10000, vs 2^n search {vs_exhaustive:.2e} over 1000 (tol 1e-10), {elapsed:.2?} (limit 30 s)"
        ),
    )
}

fn linear_time() -> Outcome {
    let start = Instant::now();
    let mut r = harness::rng(3);
    let mut per_n = |n: usize| {
        let total: f64 = (0..20)
            .map(|_| {
                let (w, beta) = instance(&mut r, n);
                let (_, stats) = project_with_stats(&w, &beta).unwrap();
                stats.comparisons as f64 / n as f64
            })
            .sum();
        total / 20.0
    };
    let small = per_n(1 << 10);
    let large = per_n(1 << 20);
    let elapsed = start.elapsed();
    let pass = large <= 1.2 * small && elapsed < Duration::from_secs(60);
    outcome(
        pass,
        format!(
            "comparisons/n {small:.2} at 2^10, {large:.2} at 2^20, ratio {:.3} (limit 1.2), {elapsed:.2?} (limit 60 s)",
            large / small
        ),
    )
}

fn projection_progress() -> Outcome {
    let mut r = harness::rng(4);
    let mut worst = f64::INFINITY;
    for _ in 0..10_000 {
        let n = r.random_range(2..=32);
        let w_hat = InteriorSimplexVector::new(dirichlet(&mut r, n)).unwrap();
        let alpha = r.random_range(0.01..0.99);
        let beta = LowerBounds::new(dirichlet(&mut r, n).iter().map(|b| alpha * b).collect()).unwrap();
        let mut u = dirichlet(&mut r, n);
        if r.random_bool(0.5) {
            let keep = r.random_range(0..n);
            u = (0..n).map(|i| if i == keep { 1.0 } else { 0.0 }).collect();
        }
        let u = SimplexVector::new(u).unwrap();
        let p = InteriorSimplexVector::try_from(project(&w_hat, &beta).unwrap().p).unwrap();
        let gain = kl_divergence(&u, &w_hat).unwrap() - kl_divergence(&u, &p).unwrap();
        worst = worst.min(gain - (1.0 - alpha).ln());
    }
    outcome(
        worst >= -1e-9,
        format!("min of kl(u,w_hat) - kl(u,p) - ln(1-alpha) = {worst:.3e} over 10000 (floor -1e-9)"),
    )
}

fn share_vs_mpp(report: &harness::EquivalenceReport) -> Outcome {
    outcome(
        report.max_share_vs_mpp < 1e-9,
        format!(
            "max weight deviation {:.2e} over {} triples, T={}, n={} (tol 1e-9)",
            report.max_share_vs_mpp,
            report.cases.len(),
            report.horizon,
            report.n
        ),
    )
}

fn specialists_vs_share(report: &harness::EquivalenceReport) -> Outcome {
    outcome(
        report.max_specialists < 1e-9,
        format!(
            "max deviation of a/sum(a) vs w and s/pi_s vs v {:.2e} over {} triples, t <= {} (tol 1e-9)",
            report.max_specialists,
            report.cases.len(),
            report.horizon
        ),
    )
}

fn regret_within_bound() -> Outcome {
    let start = Instant::now();
    let mut cells = Vec::new();
    for noise in [0.0, 0.1] {
        for seed in 0..10 {
            let setup = SyntheticSetup {
                n: 16,
                horizon: 2000,
                k: 10,
                m: 3,
                loss: LossModel::Mix,
                noise,
                seed: 1000 + seed,
            };
            let (alpha, theta) = optimal_tuning(&setup.bound_inputs().unwrap()).unwrap();
            cells.push((LearnerSpec::Pods { alpha, theta }, setup));
            cells.push((LearnerSpec::Share { alpha, theta }, setup));
        }
    }
    let bound = pods_bound(&cells[0].1.bound_inputs().unwrap()).unwrap();
    let results = harness::run_cells(&cells);
    let mut worst = f64::NEG_INFINITY;
    let mut ok = true;
    for r in results {
        match r {
            Ok(r) => worst = worst.max(r.cumulative_regret),
            Err(_) => ok = false,
        }
    }
    let elapsed = start.elapsed();
    let pass = ok && worst <= bound && elapsed < Duration::from_secs(60);
    outcome(
        pass,
        format!(
            "20 runs x {{pods, share}}: max regret {worst:.3} <= bound {bound:.3} (one-sided), {elapsed:.2?} (limit 60 s)"
        ),
    )
}

fn matched_state_costs() -> Outcome {
    let mut r = harness::rng(8);
    let (mut sampled, mut strict, mut subset, mut identity) = (0, 0, 0, 0);
    let mut worst_identity: f64 = 0.0;
    while sampled < 10_000 {
        let n = r.random_range(2..=32);
        let w_hat = dirichlet(&mut r, n);
        let v = dirichlet(&mut r, n);
        let alpha = r.random_range(0.01..0.99);
        if w_hat.iter().zip(&v).all(|(w, vi)| *w >= alpha * vi) {
            continue;
        }
        sampled += 1;
        let w_hat = InteriorSimplexVector::new(w_hat).unwrap();
        let v = InteriorSimplexVector::new(v).unwrap();
        let c = matched_state_cost_compare(&w_hat, &v, alpha).unwrap();
        if c.projection_move < c.sharing_move {
            strict += 1;
        }
        let up_proj: Vec<usize> = (0..n).filter(|&i| c.projection[i] > w_hat[i]).collect();
        if up_proj.iter().all(|&i| c.shared[i] > w_hat[i]) {
            subset += 1;
        }
        let two_sided = |x: &[f64]| -> f64 {
            2.0 * x.iter().zip(w_hat.iter()).filter(|(a, b)| a > b).map(|(a, b)| a - b).sum::<f64>()
        };
        let gap = (c.projection_move - two_sided(&c.projection))
            .abs()
            .max((c.sharing_move - two_sided(&c.shared)).abs());
        worst_identity = worst_identity.max(gap);
        if gap <= 1e-12 {
            identity += 1;
        }
    }
    let pass = strict == sampled && subset == sampled && identity == sampled;
    outcome(
        pass,
        format!(
            "strict {strict}/{sampled}, increase-set subset {subset}/{sampled}, mass identity {identity}/{sampled} (max gap {worst_identity:.1e}, tol 1e-12)"
        ),
    )
}

fn specialists_mass() -> Outcome {
    let mut r = harness::rng(9);
    let (n, steps) = (8, 100_000);
    let (alpha, theta) = (r.random_range(0.05..0.95), r.random_range(0.05..0.95));
    let mut s = SpecialistState::from_share_params(n, alpha, theta).unwrap();
    let (mut awake, mut asleep): (f64, f64) = (0.0, 0.0);
    for _ in 0..steps {
        let losses: Vec<f64> = (0..n).map(|_| r.random::<f64>() * 3.0).collect();
        s = specialists_step(&s, &losses, 1.0).unwrap();
        awake = awake.max((s.a.iter().sum::<f64>() - s.pi_w()).abs());
        asleep = asleep.max((s.s.iter().sum::<f64>() - s.pi_s()).abs());
    }
    outcome(
        awake < 1e-9 && asleep < 1e-9,
        format!("max |sum a - pi_w| {awake:.2e}, |sum s - pi_s| {asleep:.2e} over {steps} steps (tol 1e-9)"),
    )
}

fn simulate_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    fs::write(
        &config,
        r#"{"learner":"pods","n":12,"T":800,"k":6,"m":3,"loss":"log","noise":0.1,"seeds":[5,6,7]}"#,
    )
    .unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let status = Command::new(BIN)
            .args(["simulate", config.to_str().unwrap(), "--full", "--out", out.to_str().unwrap()])
            .output()
            .unwrap();
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
        let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(&out)
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
            })
            .collect();
        files.sort();
        (files, status.stdout)
    };
    let (a, a_out) = run("first");
    let (b, b_out) = run("second");
    let pass = a == b && a_out == b_out && a.len() == 4;
    outcome(pass, format!("{} output files and stdout byte-identical across two runs", a.len()))
}

fn main() {
    let report = harness::run_equivalence(8, 200, 50, 6, None).expect("equivalence suite runs");
    type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);
    let criteria: Vec<Criterion> = vec![
        ("bound table reproduction", Box::new(bound_table_reproduction)),
        ("projection correctness", Box::new(projection_correctness)),
        ("linear-time comparisons", Box::new(linear_time)),
        ("projection progress", Box::new(projection_progress)),
        ("share-theta = geometric MPP", Box::new(|| share_vs_mpp(&report))),
        ("specialists = share-theta", Box::new(|| specialists_vs_share(&report))),
        ("regret within pods bound", Box::new(regret_within_bound)),
        ("projection moves less than sharing", Box::new(matched_state_costs)),
        ("specialists mass conservation", Box::new(specialists_mass)),
        ("simulate determinism", Box::new(simulate_determinism)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("acceptance {:>2} {tag}  {name}: {}", i + 1, o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
