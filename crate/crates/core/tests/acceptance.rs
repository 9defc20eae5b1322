//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::f64::consts::{PI, SQRT_2};
use std::time::{Duration, Instant};

use hoc_core::experiment::{run_experiment, ExperimentConfig, Outcome};
use hoc_core::fixtures::{catalog_laws, chaos_measures, MULTILINEAR_SHAPES};
use hoc_core::poly::gradnorm_lemma_check;
use hoc_core::rng::stream_rng;
use hoc_core::tensor::{certified_op_norm, iterative_op_norm, op_norm_auto};
use hoc_core::verify::empirical_lp;
use hoc_core::{Distribution, MeasureSpec, OpNormOptions, PolyFunction, SymTensor};
use rand_distr::{Distribution as _, StandardNormal};
use serde_json::Value;

const PRODUCT: &str = include_str!("../../../configs/product_certify.json");
const WIGNER: &str = include_str!("../../../configs/wigner_quadratic.json");
const CHAOS_GRID: [f64; 12] = [0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0, 6.0, 8.0];
const CHAOS_SEED: u64 = 20240602;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn run(text: &str) -> Outcome {
    let cfg = ExperimentConfig::parse(text).expect("shipped config parses");
    run_experiment(&cfg).expect("experiment runs")
}

fn csvs(out: &Outcome) -> Vec<String> {
    out.tables.iter().map(|t| t.to_csv().unwrap()).collect()
}

fn c1_tensor_norms() -> Verdict {
    let mut rng = stream_rng(1, 0);
    let opts = OpNormOptions::default();
    let (mut worst_cert, mut worst_eig) = (0.0f64, 0.0f64);
    let mut ok = true;
    for i in 0..50 {
        let n = 2 + i % 3;
        let d = 2 + (i / 3) % 3;
        let t = SymTensor::from_fn(n, d, |_| StandardNormal.sample(&mut rng)).unwrap();
        let it = iterative_op_norm(&t, &opts);
        let cert = certified_op_norm(&t).unwrap();
        let rel = (it - cert).abs() / cert;
        worst_cert = worst_cert.max(rel);
        ok &= rel <= 1e-4;
        if d == 2 {
            let m = nalgebra::DMatrix::from_row_slice(n, n, &t.to_matrix().unwrap());
            let eig = m.symmetric_eigenvalues().iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let ours = op_norm_auto(&t, &opts).unwrap();
            let rel = (ours - eig).abs() / eig;
            worst_eig = worst_eig.max(rel);
            ok &= rel <= 1e-8;
        }
    }
    verdict(
        ok,
        format!("50 tensors; iterative vs sphere search max rel {worst_cert:.2e} (tol 1e-4), d=2 vs eigendecomposition max rel {worst_eig:.2e} (tol 1e-8)"),
    )
}

fn c2_spectral_gap() -> Verdict {
    let u = Distribution::Uniform01.oracle().unwrap();
    let g = Distribution::standard_gaussian().oracle().unwrap();
    let e = Distribution::Exponential { rate: 1.0 }.oracle().unwrap();
    let ru = (u.lambda1 - PI * PI).abs() / (PI * PI);
    let rg = (g.sigma2 - 1.0).abs();
    let re = (e.sigma2 - 4.0).abs() / 4.0;
    verdict(
        ru <= 1e-3 && rg <= 1e-3 && re <= 2e-2,
        format!("uniform01 lambda1 rel {ru:.1e}, gaussian sigma2 rel {rg:.1e}, exponential(1) sigma2 = {:.5} rel {re:.1e}", e.sigma2),
    )
}

fn c3_centered_moments() -> Verdict {
    let mut worst = 0.0f64;
    let mut fails = 0;
    for (li, law) in catalog_laws().into_iter().enumerate() {
        let mu = MeasureSpec::iid(law, 3);
        let sigma = mu.sigma().unwrap();
        for q in 0..20u64 {
            let g = PolyFunction::random_dense(3, 2, 100 + q).centered(&mu).unwrap();
            let s = mu.sample(100_000, 1000 * li as u64 + q);
            let gv = s.map_rows(|x| g.eval(x).unwrap());
            let grad = s.map_rows(|x| g.gradient(x).unwrap().iter().map(|v| v * v).sum::<f64>().sqrt());
            for p in [2.0, 3.0, 4.0] {
                let lhs = empirical_lp(&gv, p).unwrap();
                let rhs = empirical_lp(&grad, p).unwrap();
                let bound = sigma * p / SQRT_2 * (rhs.estimate + 5.0 * rhs.se);
                let floor = lhs.estimate - 5.0 * lhs.se;
                worst = worst.max(floor / bound);
                if floor > bound {
                    fails += 1;
                }
            }
        }
    }
    verdict(
        fails == 0,
        format!("240 checks (20 quadratics x 4 laws x 3 p), {fails} failures, max (||g||_p - 5 SE) / bound = {worst:.3}"),
    )
}

fn c4_product_exp_moment() -> (Verdict, Vec<String>) {
    let out = run(PRODUCT);
    let e = &out.report["exp_moment"]["ledger"]["entries"][0];
    let est = e["empirical"].as_f64().unwrap();
    let slack = e["slack"].as_f64().unwrap();
    let a = out.report["exp_moment"]["certificate"]["constants"]["coefficient"].as_f64().unwrap();
    let c = hoc_core::bounds::EXP_MOMENT_C;
    let pass = (a - c).abs() < 1e-15 && e["pass"].as_bool().unwrap();
    let samples = out.report["samples"].as_u64().unwrap();
    (
        verdict(pass, format!("E exp(c|f|^(1/2)) = {est:.5}, 2 + 3 SE = {:.5}, coefficient = 1/(12e), m = {samples}", 2.0 + slack)),
        csvs(&out),
    )
}

fn chaos_config(name: &str, law: &str, dim: usize) -> String {
    let measure = match law {
        "gaussian" => format!(r#"{{"dim": {dim}, "coords": [{{"dist": "gaussian"}}]}}"#),
        _ => format!(r#"{{"dim": {dim}, "coords": [{{"dist": "laplace", "params": {{"scale": {}}}}}]}}"#, 1.0 / SQRT_2),
    };
    format!(
        r#"{{"schema_version": 1, "kind": "multilinear", "seed": {CHAOS_SEED}, "measure": {measure},
            "fixture": "{name}", "samples": 1000000, "profile_samples": 100000,
            "t_grid": {CHAOS_GRID:?}, "negative_control": true}}"#
    )
}

struct ChaosRun {
    label: String,
    report: Value,
    csvs: Vec<String>,
}

fn chaos_runs() -> Vec<ChaosRun> {
    let mut runs = Vec::new();
    for &(d, n) in &MULTILINEAR_SHAPES {
        for (law, _) in chaos_measures(n) {
            let name = format!("chaos-d{d}-n{n}");
            let out = run(&chaos_config(&name, law, n));
            runs.push(ChaosRun {
                label: format!("{name}-{law}"),
                csvs: csvs(&out),
                report: out.report,
            });
        }
    }
    runs
}

fn ledger_pass(report: &Value, tail: &str) -> bool {
    report["tails"][tail]["ledger"]["pass"].as_bool().unwrap_or(false)
}

fn c5_korr_domination(runs: &[ChaosRun]) -> Verdict {
    let dominated = runs.iter().filter(|r| ledger_pass(&r.report, "korr")).count();
    let control_failed = runs
        .iter()
        .filter(|r| r.report["negative_control"]["failed_somewhere"].as_bool().unwrap())
        .count();
    let failed_labels: Vec<&str> = runs
        .iter()
        .filter(|r| !ledger_pass(&r.report, "korr"))
        .map(|r| r.label.as_str())
        .collect();
    verdict(
        dominated == runs.len() && control_failed >= 1,
        format!(
            "korr tail dominates on {dominated}/{} runs x 12 t (failing: {failed_labels:?}); sigma/10 control fails on {control_failed}/{} runs (needs >= 1)",
            runs.len(),
            runs.len()
        ),
    )
}

fn c6_multilinear_forms(runs: &[ChaosRun]) -> Verdict {
    let hs = runs.iter().filter(|r| ledger_pass(&r.report, "hs")).count();
    let sup = runs.iter().filter(|r| ledger_pass(&r.report, "sup")).count();
    let norms = runs
        .iter()
        .filter(|r| r.report["hs_le_scaled_sup"].as_bool().unwrap())
        .count();
    let k = runs.len();
    verdict(
        hs == k && sup == k && norms == k,
        format!("HS-form dominates {hs}/{k}, sup-form dominates {sup}/{k}, ||A||_HS <= n^(d/2) ||A||_inf on {norms}/{k}"),
    )
}

fn c7_weighted() -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for (d, grid) in [(1, "[0.5, 1.0, 2.0, 4.0, 8.0, 16.0]"), (2, "[0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0]")] {
        let text = format!(
            r#"{{"schema_version": 1, "kind": "weighted", "seed": 20240603, "nu": 40.0, "order": {d},
                "p_values": [2.0, 4.0], "t_grid": {grid}, "samples": 1000000}}"#
        );
        let out = run(&text);
        let r = &out.report;
        let moments_ok = r["moments"].as_array().unwrap().iter().all(|m| m["pass"].as_bool().unwrap());
        let in_window = r["tail"]["in_window"].as_array().unwrap().iter().all(|v| v.as_bool().unwrap());
        let tail_ok = r["tail"]["ledger"]["pass"].as_bool().unwrap();
        ok &= moments_ok && in_window && tail_ok;
        parts.push(format!(
            "d={d}: moments {}, tail {} (C = {:.3}, window end {:.1}, grid inside: {in_window})",
            if moments_ok { "ok" } else { "FAIL" },
            if tail_ok { "ok" } else { "FAIL" },
            r["tail"]["C"].as_f64().unwrap(),
            r["tail"]["window_end"].as_f64().unwrap(),
        ));
    }
    verdict(ok, parts.join("; "))
}

fn c8_wigner() -> (Verdict, Vec<String>) {
    let out = run(WIGNER);
    let r = &out.report;
    let e = &r["exp_moment"]["ledger"]["entries"][0];
    let exp_ok = e["pass"].as_bool().unwrap();
    let var_ok = r["recentering_reduces_variance"].as_bool().unwrap();
    (
        verdict(
            exp_ok && var_ok,
            format!(
                "E exp(a|S~_N|^(1/2)) = {:.5} vs 2 + 3 SE = {:.5}; Var S~_N = {:.4} < Var S_N = {:.4}: {var_ok}",
                e["empirical"].as_f64().unwrap(),
                2.0 + e["slack"].as_f64().unwrap(),
                r["var_S_tilde_N"].as_f64().unwrap(),
                r["var_S_N"].as_f64().unwrap(),
            ),
        ),
        csvs(&out),
    )
}

fn c9_gradnorm() -> Verdict {
    let mut rng = stream_rng(9, 0);
    let mut worst = f64::NEG_INFINITY;
    let mut fails = 0;
    for q in 0..10u64 {
        let f = PolyFunction::random_dense(3, 4, 500 + q);
        for _ in 0..100 {
            let x = PolyFunction::random_point(3, 2.0, &mut rng);
            for k in 2..=4 {
                let c = gradnorm_lemma_check(&f, k, &x, 1e-5).unwrap();
                worst = worst.max(c.lhs - c.rhs);
                if !c.holds(1e-3) {
                    fails += 1;
                }
            }
        }
    }
    verdict(
        fails == 0,
        format!("3000 checks (10 quartics x 100 points x k = 2..4), {fails} failures, max lhs - rhs = {worst:.2e}"),
    )
}

fn c10_determinism(c4: &[String], c5: &[ChaosRun], c8: &[String]) -> Verdict {
    let same4 = c4_product_exp_moment().1 == c4;
    let again = chaos_runs();
    let same5 = again.len() == c5.len() && again.iter().zip(c5).all(|(a, b)| a.csvs == b.csvs);
    let same8 = c8_wigner().1 == c8;
    verdict(
        same4 && same5 && same8,
        format!("byte-identical CSVs on rerun: criterion 4 {same4}, criterion 5 {same5}, criterion 8 {same8}"),
    )
}

fn report(n: usize, v: &Verdict, elapsed: Duration, limit: Option<Duration>) -> bool {
    let in_time = limit.is_none_or(|l| elapsed <= l);
    let pass = v.pass && in_time;
    let timing = match limit {
        Some(l) => format!("{:.1}s of {}s", elapsed.as_secs_f64(), l.as_secs()),
        None => format!("{:.1}s", elapsed.as_secs_f64()),
    };
    println!(
        "criterion {n:>2}: {} | {} | {timing}",
        if pass { "PASS" } else { "FAIL" },
        v.detail
    );
    pass
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn main() {
    if let Ok(n) = std::env::var("HOC_THREADS").map(|s| s.parse::<usize>()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.unwrap_or(0)).build_global();
    }
    let min = |m: u64| Some(Duration::from_secs(60 * m));
    let mut all = true;

    let (v, t) = timed(c1_tensor_norms);
    all &= report(1, &v, t, min(2));
    let (v, t) = timed(c2_spectral_gap);
    all &= report(2, &v, t, min(1));
    let (v, t) = timed(c3_centered_moments);
    all &= report(3, &v, t, min(5));
    let ((v, csv4), t) = timed(c4_product_exp_moment);
    all &= report(4, &v, t, min(1));
    let (runs, t) = timed(chaos_runs);
    all &= report(5, &c5_korr_domination(&runs), t, min(10));
    all &= report(6, &c6_multilinear_forms(&runs), t, None);
    let (v, t) = timed(c7_weighted);
    all &= report(7, &v, t, min(5));
    let ((v, csv8), t) = timed(c8_wigner);
    all &= report(8, &v, t, min(10));
    let (v, t) = timed(c9_gradnorm);
    all &= report(9, &v, t, min(1));
    let (v, t) = timed(|| c10_determinism(&csv4, &runs, &csv8));
    all &= report(10, &v, t, None);

    if !all {
        std::process::exit(1);
    }
}
