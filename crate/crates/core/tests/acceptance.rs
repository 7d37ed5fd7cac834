//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! cargo test --release --test acceptance

use std::process::ExitCode;
use std::time::{Duration, Instant};

use conflict_lens::pipeline::{reproduce, ReproduceOptions};
use conflict_lens::sim::{
    occupancy_fractions, run_concurrent, run_single, AgentSpec, Coupling, Policy, ScenarioConfig,
    SimTrace, SliceConfig,
};
use conflict_lens::{
    build_ecdf, effective_weights, int_distance, ks_distance, rate_weights, step_interpolate,
    union_support, weighted_ecdf_average, Ecdf, StepCdf, TimingSpec, WeightVector,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn random_samples(rng: &mut ChaCha8Rng, max_len: usize) -> Vec<f64> {
    let n = rng.random_range(1..=max_len);
    // Coarse grids produce ties, fine ones produce distinct values.
    let grid = [0.0, 1.0, 0.5, 0.01][rng.random_range(0..4)];
    let scale = rng.random_range(0.1..1000.0);
    (0..n)
        .map(|_| {
            let x = rng.random::<f64>() * scale;
            if grid > 0.0 {
                (x / grid).round() * grid
            } else {
                x
            }
        })
        .collect()
}

fn is_valid_cdf(values: &[f64]) -> bool {
    values.iter().all(|p| (0.0..=1.0).contains(p))
        && values.windows(2).all(|w| w[0] <= w[1])
        && values.last() == Some(&1.0)
}

fn random_weights(rng: &mut ChaCha8Rng, k: usize) -> WeightVector {
    let periods: Vec<f64> = (0..k).map(|_| rng.random_range(0.01..100.0)).collect();
    rate_weights(&periods).expect("positive periods")
}

fn cdf_validity() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let cases = 10_000;
    for case in 0..cases {
        let k = rng.random_range(1..=4);
        let ecdfs: Vec<Ecdf> = (0..k)
            .map(|_| build_ecdf(&random_samples(&mut rng, 200)).unwrap())
            .collect();
        if !ecdfs.iter().all(|e| is_valid_cdf(e.probs())) {
            return outcome(false, format!("build_ecdf invalid at case {case}"));
        }
        let common = union_support(&ecdfs).unwrap();
        for e in &ecdfs {
            if !is_valid_cdf(&step_interpolate(e, &common).unwrap()) {
                return outcome(false, format!("step_interpolate invalid at case {case}"));
            }
        }
        let pred = weighted_ecdf_average(&ecdfs, &random_weights(&mut rng, k)).unwrap();
        if !is_valid_cdf(pred.probs()) {
            return outcome(
                false,
                format!("weighted_ecdf_average invalid at case {case}"),
            );
        }
    }
    let elapsed = start.elapsed();
    outcome(
        elapsed < Duration::from_secs(30),
        format!("{cases} cases in {:.2}s (limit 30s)", elapsed.as_secs_f64()),
    )
}

fn metric_axioms() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let cases = 10_000;
    let mut worst_affine = 0.0f64;
    for case in 0..cases {
        let xs = random_samples(&mut rng, 200);
        let ys = random_samples(&mut rng, 200);
        let (a, b) = (build_ecdf(&xs).unwrap(), build_ecdf(&ys).unwrap());
        let (ks, int) = (ks_distance(&a, &b), int_distance(&a, &b));
        if ks != ks_distance(&b, &a) || int != int_distance(&b, &a) {
            return outcome(false, format!("asymmetric at case {case}"));
        }
        if ks_distance(&a, &a) != 0.0 || int_distance(&a, &a) != 0.0 {
            return outcome(false, format!("d(a,a) != 0 at case {case}"));
        }
        if !(0.0 <= int && int <= ks && ks <= 1.0) {
            return outcome(
                false,
                format!("ordering broken at case {case}: int {int} ks {ks}"),
            );
        }
        let alpha = rng.random_range(0.1..10.0);
        let beta = rng.random_range(-100.0..100.0);
        let map = |v: &[f64]| v.iter().map(|x| alpha * x + beta).collect::<Vec<_>>();
        let (ma, mb) = (
            build_ecdf(&map(&xs)).unwrap(),
            build_ecdf(&map(&ys)).unwrap(),
        );
        if ma.len() != a.len() || mb.len() != b.len() {
            // Rounding merged two distinct samples; the map is no longer affine on the data.
            continue;
        }
        worst_affine = worst_affine
            .max((ks_distance(&ma, &mb) - ks).abs())
            .max((int_distance(&ma, &mb) - int).abs());
    }
    outcome(
        worst_affine <= 1e-9,
        format!("{cases} pairs, max affine deviation {worst_affine:.2e} (tol 1e-9)"),
    )
}

fn wasserstein_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cases = 1_000;
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let n = rng.random_range(1..=200);
        let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            let shift = rng.random_range(-50.0..50.0);
            let mut v: Vec<f64> = (0..n)
                .map(|_| rng.random_range(0.0..100.0) + shift)
                .collect();
            v.sort_by(f64::total_cmp);
            v
        };
        let (xs, ys) = (draw(&mut rng), draw(&mut rng));
        let w1: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - y).abs()).sum::<f64>() / n as f64;
        let lo = xs[0].min(ys[0]);
        let hi = xs[n - 1].max(ys[n - 1]);
        let d = int_distance(&build_ecdf(&xs).unwrap(), &build_ecdf(&ys).unwrap());
        worst = worst.max((d * (hi - lo) - w1).abs());
    }
    outcome(
        worst <= 1e-9,
        format!("{cases} pairs, max |INT*span - W1| {worst:.2e} (tol 1e-9)"),
    )
}

fn mixture_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let a: Vec<f64> = (0..5_000)
        .map(|_| (rng.random_range(3.0..13.0f64)).round())
        .collect();
    let b: Vec<f64> = (0..5_000)
        .map(|_| rng.random_range(20.0..50.0f64))
        .collect();
    let ecdfs = [build_ecdf(&a).unwrap(), build_ecdf(&b).unwrap()];
    let cases = [
        ("0.5/0.5", rate_weights(&[1.0, 1.0]).unwrap()),
        ("5/6,1/6", rate_weights(&[2.0, 10.0]).unwrap()),
        ("0.99/0.01", rate_weights(&[1.0, 99.0]).unwrap()),
    ];
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for (name, w) in &cases {
        let pred = weighted_ecdf_average(&ecdfs, w).unwrap();
        let draws: Vec<f64> = (0..1_000_000)
            .map(|_| {
                let src = if rng.random_bool(w.weights()[0]) {
                    &a
                } else {
                    &b
                };
                src[rng.random_range(0..src.len())]
            })
            .collect();
        let ks = ks_distance(&build_ecdf(&draws).unwrap(), &pred);
        worst = worst.max(ks);
        parts.push(format!("{name}: {ks:.5}"));
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 0.005 && elapsed < Duration::from_secs(10),
        format!(
            "KS {} (tol 0.005), {:.2}s (limit 10s)",
            parts.join(", "),
            elapsed.as_secs_f64()
        ),
    )
}

fn weight_formula() -> Outcome {
    let w = rate_weights(&[2.0, 10.0]).unwrap();
    let err = (w.weights()[0] - 5.0 / 6.0)
        .abs()
        .max((w.weights()[1] - 1.0 / 6.0).abs());
    outcome(
        err <= 1e-12,
        format!(
            "rate_weights([2,10]) = {:?}, error {err:.1e} (tol 1e-12)",
            w.weights()
        ),
    )
}

fn effective_periodicity() -> Outcome {
    let w = effective_weights(&[
        TimingSpec::every(1.0).with_hold(0.8),
        TimingSpec::every(1.0).with_hold(0.2),
    ])
    .unwrap();
    let werr = (w.weights()[0] - 0.8)
        .abs()
        .max((w.weights()[1] - 0.2).abs());

    let cfg = ScenarioConfig {
        duration: 1200.0,
        ..ScenarioConfig::default()
    };
    let agents = [
        AgentSpec::energy_saver("a", 1.0),
        AgentSpec::throughput_max("b", 1.0).with_offset(0.8),
    ];
    let occ = occupancy_fractions(&run_concurrent(&cfg, &agents).unwrap()).unwrap();
    let oerr = (occ["a"] - 0.8).abs().max((occ["b"] - 0.2).abs());
    outcome(
        werr <= 1e-12 && oerr <= 0.01,
        format!(
            "weights {:?}; occupancy a={:.4} b={:.4} over 1200 cycles (tol 0.01)",
            w.weights(),
            occ["a"],
            occ["b"]
        ),
    )
}

fn reproduce_run() -> (conflict_lens::pipeline::ReproduceSummary, Duration) {
    let dir = tempfile::tempdir().unwrap();
    let start = Instant::now();
    let (summary, _) = reproduce(&ReproduceOptions::new(dir.path())).unwrap();
    (summary, start.elapsed())
}

fn prediction_accuracy(
    summary: &conflict_lens::pipeline::ReproduceSummary,
    elapsed: Duration,
) -> Outcome {
    let mut pass = elapsed < Duration::from_secs(120);
    let mut parts = Vec::new();
    for dep in &summary.deployments {
        let row = |v: &str| summary.row(&dep.label, v).expect("row present");
        let prb = row("slice_prb").effective;
        let buf = row("dl_buffer_bytes").effective;
        let thr = row("tx_brate_dl_mbps").effective;
        pass &= prb.int <= 0.05 && prb.ks <= 0.15 && buf.int <= 0.05 && thr.int <= 0.05;
        parts.push(format!(
            "{}: prb int {:.4} ks {:.4}, buf int {:.4}, thr int {:.4}",
            dep.label, prb.int, prb.ks, buf.int, thr.int
        ));
    }
    outcome(
        pass,
        format!(
            "{}; {:.1}s (int<=0.05, prb ks<=0.15, limit 120s)",
            parts.join("; "),
            elapsed.as_secs_f64()
        ),
    )
}

fn dominance(summary: &conflict_lens::pipeline::ReproduceSummary) -> Outcome {
    let find = |label: &str| {
        summary
            .deployments
            .iter()
            .find(|d| d.label == label)
            .unwrap()
    };
    let fast_es = find("ES2-TM10");
    let fast_tm = find("ES10-TM2");
    outcome(
        fast_es.prb_int_to_es < fast_es.prb_int_to_tm
            && fast_tm.prb_int_to_tm < fast_tm.prb_int_to_es,
        format!(
            "ES2-TM10 to ES {:.4} vs TM {:.4}; ES10-TM2 to TM {:.4} vs ES {:.4}",
            fast_es.prb_int_to_es,
            fast_es.prb_int_to_tm,
            fast_tm.prb_int_to_tm,
            fast_tm.prb_int_to_es
        ),
    )
}

/// Random scenario whose energy-saver floors fit inside the budget together.
fn feasible_config(rng: &mut ChaCha8Rng) -> ScenarioConfig {
    loop {
        let rbg = [1u32, 2, 3, 4, 6][rng.random_range(0..5)];
        let total = rng.random_range(20..=120u32);
        let cap = rng.random_range(0.1..1.0);
        let n = rng.random_range(1..=4usize);
        let share = total as f64 * cap / n as f64;
        let demands: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..0.8 * share)).collect();
        let floors: u32 = demands
            .iter()
            .map(|d| {
                let need = (d / cap - 1e-9).ceil().max(0.0) as u32;
                need.div_ceil(rbg).max(1) * rbg
            })
            .sum();
        if floors > total {
            continue;
        }
        let mut left = total / rbg;
        let slices = demands
            .iter()
            .enumerate()
            .map(|(i, &d)| {
                let groups = rng.random_range(0..=left.min(total / rbg / n as u32 + 2));
                left -= groups;
                SliceConfig::new(format!("s{i}"), d, groups * rbg)
            })
            .collect();
        return ScenarioConfig {
            total_prbs: total,
            rbg_size: rbg,
            slices,
            tick: 0.1,
            duration: 600.0,
            seed: rng.random(),
            capacity_per_prb: cap,
            demand_jitter: rng.random_range(0.0..0.3),
            coupling: if rng.random_bool(0.5) {
                Coupling::Independent
            } else {
                Coupling::Shared
            },
        };
    }
}

fn random_agent(rng: &mut ChaCha8Rng, id: usize, policy: Policy) -> AgentSpec {
    let period = rng.random_range(0.2..10.0);
    let offset = rng.random_range(0.0..period);
    AgentSpec::new(
        format!("a{id}"),
        policy,
        TimingSpec::every(period).with_offset(offset),
    )
    .with_step(rng.random_range(1..=6))
}

fn check_trace(trace: &SimTrace) -> Result<(), String> {
    let n = trace.slices.len();
    let mut prev = vec![0u64; n];
    for tick in trace.records.chunks(n) {
        let used: u32 = tick.iter().map(|r| r.prbs).sum();
        if used > trace.total_prbs {
            return Err(format!(
                "tick {} uses {used} of {} PRBs",
                tick[0].tick, trace.total_prbs
            ));
        }
        for r in tick {
            if r.prbs % trace.rbg_size != 0 {
                return Err(format!("tick {} unaligned allocation {}", r.tick, r.prbs));
            }
            if r.buffer_bytes + r.served_bytes != prev[r.slice] + r.arrived_bytes
                || r.served_bytes > r.capacity_bytes
            {
                return Err(format!(
                    "tick {} slice {} violates conservation",
                    r.tick, r.slice
                ));
            }
            prev[r.slice] = r.buffer_bytes;
        }
    }
    Ok(())
}

fn simulator_safety() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let configs = 100;
    let mut worst_ratio = f64::INFINITY;
    for c in 0..configs {
        let cfg = feasible_config(&mut rng);
        let count = rng.random_range(1..=3);
        let agents: Vec<AgentSpec> = (0..count)
            .map(|i| {
                let policy = if rng.random_bool(0.5) {
                    Policy::EnergySaver
                } else {
                    Policy::ThroughputMax
                };
                random_agent(&mut rng, i, policy)
            })
            .collect();
        let mixed = if count == 1 {
            run_single(&cfg, &agents[0])
        } else {
            run_concurrent(&cfg, &agents)
        }
        .unwrap();
        if let Err(msg) = check_trace(&mixed) {
            return outcome(false, format!("config {c}: {msg}"));
        }

        let quiet = ScenarioConfig {
            demand_jitter: 0.0,
            ..cfg.clone()
        };
        let es = run_single(&quiet, &random_agent(&mut rng, 0, Policy::EnergySaver)).unwrap();
        if let Err(msg) = check_trace(&es) {
            return outcome(false, format!("config {c} (energy saver): {msg}"));
        }
        for (s, slice) in quiet.slices.iter().enumerate() {
            if slice.demand == 0.0 {
                continue;
            }
            let recs: Vec<_> = es.records.iter().filter(|r| r.slice == s).collect();
            let mean = recs.iter().map(|r| r.throughput_mbps).sum::<f64>() / recs.len() as f64;
            worst_ratio = worst_ratio.min(mean / slice.demand);
        }
    }
    outcome(
        worst_ratio >= 0.99,
        format!(
            "{configs} configs conserve bytes and respect the budget; worst energy-saver throughput {worst_ratio:.4} x demand (min 0.99)"
        ),
    )
}

fn median_time(mut f: impl FnMut()) -> Duration {
    f();
    let mut times: Vec<Duration> = (0..5)
        .map(|_| {
            let t = Instant::now();
            f();
            t.elapsed()
        })
        .collect();
    times.sort();
    times[2]
}

fn performance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut distinct = |offset: f64| -> Ecdf {
        let samples: Vec<f64> = (0..100_000)
            .map(|i| offset + i as f64 + rng.random_range(0.0..0.5))
            .collect();
        build_ecdf(&samples).unwrap()
    };
    let (a, b) = (distinct(0.0), distinct(0.25));
    assert_eq!(
        union_support(&[a.clone(), b.clone()]).unwrap().len(),
        200_000
    );
    let w = rate_weights(&[2.0, 10.0]).unwrap();
    let ecdfs = [a.clone(), b.clone()];
    let avg = median_time(|| {
        std::hint::black_box(weighted_ecdf_average(&ecdfs, &w).unwrap());
    });
    let ks = median_time(|| {
        std::hint::black_box(ks_distance(&a, &b));
    });
    let int = median_time(|| {
        std::hint::black_box(int_distance(&a, &b));
    });
    let ms = |d: Duration| d.as_secs_f64() * 1e3;
    outcome(
        avg < Duration::from_millis(100)
            && ks < Duration::from_millis(50)
            && int < Duration::from_millis(50),
        format!(
            "median of 5: average {:.1}ms (limit 100), ks {:.1}ms, int {:.1}ms (limit 50)",
            ms(avg),
            ms(ks),
            ms(int)
        ),
    )
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |n: usize, name: &str, o: Outcome| {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("{tag} {n:>2} {name}: {}", o.detail);
        if !o.pass {
            failed += 1;
        }
    };
    report(1, "cdf validity", cdf_validity());
    report(2, "metric axioms", metric_axioms());
    report(3, "int equals normalized w1", wasserstein_oracle());
    report(4, "mixture oracle", mixture_oracle());
    report(5, "weight formula", weight_formula());
    report(6, "effective periodicity", effective_periodicity());
    let (summary, elapsed) = reproduce_run();
    report(
        7,
        "prediction accuracy",
        prediction_accuracy(&summary, elapsed),
    );
    report(8, "dominance ordering", dominance(&summary));
    report(9, "simulator conservation and safety", simulator_safety());
    report(10, "performance", performance());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
