//! Acceptance criteria, one pass/fail line each.
//!
//! ```bash
//! cargo test --release --test acceptance            # all criteria
//! cargo test --release --test acceptance -- 1 3 7   # a subset
//! ```

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{close, pair_count_ari, random_data, random_labels};
use icvi_artmap::bench::{self, generate, speedup, GaussianSpec, SelectBy, SpeedSpec, SweepSpec};
use icvi_artmap::icvi::{batch_value, ClusterStats, IcviState};
use icvi_artmap::metrics::ari;
use icvi_artmap::trainer::{fit_with_init, CheckLevel};
use icvi_artmap::{kmeans, prepare, CviKind, CviMode, Matrix, TrainerConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn relabel_merge(labels: &mut [usize], k: usize, i: usize, j: usize) {
    let mut map = vec![0; k];
    let mut next = 0;
    for (m, slot) in map.iter_mut().enumerate() {
        if m == i || m == j {
            *slot = k - 2;
        } else {
            *slot = next;
            next += 1;
        }
    }
    labels.iter_mut().for_each(|l| *l = map[*l]);
}

/// One random swap, delete, merge or split; returns its name.
fn random_op(rng: &mut ChaCha8Rng, state: &mut IcviState, labels: &mut [usize], x: &Matrix) -> Result<&'static str, String> {
    let k = state.k();
    let min_k = state.kind().min_clusters().max(2);
    let err = |e: icvi_artmap::Error| e.to_string();
    match rng.random_range(0..10) {
        0..=4 => {
            let t = rng.random_range(0..labels.len());
            let from = labels[t];
            let to = rng.random_range(0..k);
            if to == from {
                return Ok("noop");
            }
            if state.size(from) >= 2 {
                state.move_sample(x.row(t), from, to).map_err(err)?;
                labels[t] = to;
                Ok("swap")
            } else if k > min_k {
                let new_to = state.move_last_member(x.row(t), from, to).map_err(err)?;
                labels[t] = to;
                labels.iter_mut().for_each(|l| *l -= usize::from(*l > from));
                debug_assert_eq!(labels[t], new_to);
                Ok("delete")
            } else {
                Ok("noop")
            }
        }
        5..=6 if k > min_k => {
            let i = rng.random_range(0..k);
            let j = (i + rng.random_range(1..k)) % k;
            state.update_merge(i, j).map_err(err)?;
            relabel_merge(labels, k, i, j);
            Ok("merge")
        }
        _ if k < 8 => {
            let c = rng.random_range(0..k);
            let members: Vec<usize> = (0..labels.len()).filter(|&r| labels[r] == c).collect();
            if members.len() < 2 {
                return Ok("noop");
            }
            // singletons are common so deletes get exercised
            let take = if rng.random_bool(0.3) { 1 } else { rng.random_range(1..members.len()) };
            let mut rows = members;
            for i in 0..take {
                let j = rng.random_range(i..rows.len());
                rows.swap(i, j);
            }
            rows.truncate(take);
            let id = state.update_split(c, &rows, x).map_err(err)?;
            rows.iter().for_each(|&r| labels[r] = id);
            Ok("split")
        }
        _ => Ok("noop"),
    }
}

fn criterion_1() -> Outcome {
    let mut checked = 0usize;
    let mut worst = 0.0f64;
    let mut counts = std::collections::BTreeMap::new();
    for kind in CviKind::ALL {
        for seq in 0..100u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seq * 31 + kind as u64);
            let n = rng.random_range(20..=200);
            let d = rng.random_range(1..=10);
            let k = rng.random_range(2..=8);
            let centers = rng.random_range(2..=8);
            let (x, _) = random_data(&mut rng, n, d, centers);
            let x = prepare(&icvi_artmap::Dataset::new(x).unwrap()).x_b;
            let mut labels = random_labels(&mut rng, n, k);
            let mut state = IcviState::init_batch(kind, &x, &labels).map_err(|e| e.to_string())?;
            for step in 0..40 {
                let op = random_op(&mut rng, &mut state, &mut labels, &x)?;
                *counts.entry(op).or_insert(0usize) += 1;
                let batch = batch_value(kind, &x, &labels).map_err(|e| e.to_string())?;
                let v = state.value();
                checked += 1;
                if v != batch {
                    worst = worst.max((v - batch).abs() / v.abs().max(batch.abs()));
                }
                ensure(close(v, batch, 1e-6), || {
                    format!("{kind} sequence {seq} step {step} ({op}): incremental {v} vs batch {batch}")
                })?;
            }
        }
    }
    Ok(format!("{checked} intermediate values, max relative error {worst:.1e}, ops {counts:?}"))
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut inverse, mut reduction) = (0.0f64, 0.0f64);
    for trial in 0..10_000 {
        let d = rng.random_range(1..=10);
        let n = rng.random_range(2..=50);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| rng.random_range(-3.0..3.0)).collect())
            .collect();
        let s = ClusterStats::from_rows(rows.iter().map(|r| r.as_slice()), d, true);
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();

        let round_trip = s.with_added(&x).with_removed(&x).map_err(|e| e.to_string())?;
        let e1 = round_trip.max_abs_diff(&s);
        inverse = inverse.max(e1);
        ensure(e1 <= 1e-9, || format!("trial {trial}: add then remove drifted by {e1:e}"))?;

        let via_merge = s.merged(&ClusterStats::singleton(&x, true));
        let e2 = via_merge.max_abs_diff(&s.with_added(&x));
        reduction = reduction.max(e2);
        ensure(e2 <= 1e-12, || format!("trial {trial}: merge with singleton differs from add by {e2:e}"))?;
    }
    Ok(format!("10000 trials, add/remove max error {inverse:.1e}, merge/add max error {reduction:.1e}"))
}

fn criterion_3() -> Outcome {
    let mut runs = 0;
    for ds_seed in 0..10u64 {
        let k = if ds_seed % 2 == 0 { 4 } else { 8 };
        let sep = [2.0, 3.0, 4.0][ds_seed as usize % 3];
        let (ds, _) = generate(&GaussianSpec::new(k, 10, 500, sep, 300 + ds_seed)).map_err(|e| e.to_string())?;
        let prep = prepare(&ds);
        let init = kmeans::best_of(&prep.x_b, k, kmeans::TRIALS, ds_seed).map_err(|e| e.to_string())?;
        for kind in CviKind::ALL {
            let cfg = TrainerConfig {
                rho_a: [0.0, 0.3, 0.6][ds_seed as usize % 3],
                rho_ab: [1.0, 0.5][ds_seed as usize % 2],
                seed: ds_seed,
                ..TrainerConfig::new(k, kind)
            };
            let incr = fit_with_init(&prep, &cfg, &init).map_err(|e| e.to_string())?;
            let batch = fit_with_init(&prep, &TrainerConfig { mode: CviMode::Batch, ..cfg }, &init)
                .map_err(|e| e.to_string())?;
            ensure(incr.labels == batch.labels, || {
                format!("dataset {ds_seed} (k = {k}), {kind}: final labels differ")
            })?;
            runs += 1;
        }
    }
    Ok(format!("{runs} incremental/batch pairs with identical labels"))
}

fn criterion_4() -> Outcome {
    let spec = SpeedSpec {
        ks: vec![4, 20],
        ..SpeedSpec::new(50, 2000, 20, 0)
    };
    let rows = bench::speed_study(&spec).map_err(|e| e.to_string())?;
    let mut report = Vec::new();
    let mut failures = Vec::new();
    for kind in CviKind::ALL {
        let s4 = speedup(&rows, kind, 4).unwrap();
        let s20 = speedup(&rows, kind, 20).unwrap();
        let need = if matches!(kind, CviKind::Ch | CviKind::Wb) { 5.0 } else { 2.0 };
        report.push(format!("{kind} {s4:.0}x->{s20:.0}x"));
        if s20 < need {
            failures.push(format!("{kind} speedup at k=20 is {s20:.1}x < {need}x"));
        }
        if s20 <= s4 {
            failures.push(format!("{kind} speedup does not grow ({s4:.1}x at k=4, {s20:.1}x at k=20)"));
        }
    }
    if failures.is_empty() {
        Ok(report.join(", "))
    } else {
        Err(failures.join("; "))
    }
}

/// Also covers criterion 6: every run uses epoch-level checks, which fail
/// the run on any bookkeeping or merge violation.
fn criterion_5() -> (Outcome, Outcome) {
    let mut report = Vec::new();
    let mut failures = Vec::new();
    let mut runs = 0usize;
    let mut merges = 0usize;
    for (k, d) in [(4, 2), (10, 2), (20, 2), (4, 10), (10, 10), (20, 10), (4, 50), (10, 50), (20, 50)] {
        let spec = GaussianSpec {
            n_total: None,
            n_per_cluster: (20, 60),
            ..GaussianSpec::new(k, d, 0, 6.0, 500 + (k * 100 + d) as u64)
        };
        let (ds, truth) = match generate(&spec) {
            Ok(v) => v,
            Err(e) => return (Err(e.to_string()), Err("fixture generation failed".into())),
        };
        let prep = prepare(&ds);
        let base = TrainerConfig {
            check: CheckLevel::Epoch,
            ..TrainerConfig::new(k, CviKind::Ni)
        };
        let outcome = bench::sweep(&prep, Some(&truth), &SweepSpec::for_dimension(d, SelectBy::Ari), &base);
        let out = match outcome {
            Ok(o) => o,
            Err(e) => {
                let msg = format!("{d}d-{k}c: {e}");
                return (Err(msg.clone()), Err(msg));
            }
        };
        runs += out.rows.len();
        let by_ari = out.best().ari.unwrap();
        let mut by_icvi = 0;
        for (i, r) in out.rows.iter().enumerate() {
            if base.kind.is_better(r.icvi, out.rows[by_icvi].icvi) {
                by_icvi = i;
            }
        }
        let icvi_ari = out.rows[by_icvi].ari.unwrap();
        report.push(format!("{d}d-{k}c {by_ari:.3}/{icvi_ari:.3}"));
        if by_ari < 0.98 {
            failures.push(format!("{d}d-{k}c ARI-selected {by_ari:.4} < 0.98"));
        }
        if icvi_ari < 0.95 {
            failures.push(format!("{d}d-{k}c index-selected {icvi_ari:.4} < 0.95"));
        }
        // merges of the selected run, replayed with checks on
        let best = out.best();
        let cfg = TrainerConfig {
            rho_a: best.rho_a,
            rho_ab: best.rho_ab,
            ..base.clone()
        };
        let init = kmeans::best_of(&prep.x_b, k, kmeans::TRIALS, 0).unwrap();
        merges += fit_with_init(&prep, &cfg, &init).map(|r| r.merges.len()).unwrap_or(0);
    }

    for (name, expected) in [("2d-4c-no0", 0.9941), ("2d-10c-no0", 0.9941)] {
        match bench::load_fixture(name) {
            Ok(None) => report.push(format!("{name} not supplied")),
            Err(e) => failures.push(format!("{name}: {e}")),
            Ok(Some((ds, truth))) => {
                let k = truth.distinct();
                let prep = prepare(&ds);
                let base = TrainerConfig::new(k, CviKind::Ni);
                match bench::sweep(&prep, Some(&truth), &SweepSpec::for_dimension(ds.d(), SelectBy::Ari), &base) {
                    Ok(out) => {
                        let got = out.best().ari.unwrap();
                        report.push(format!("{name} {got:.4} (reference {expected})"));
                        if (got - expected).abs() > 0.03 {
                            failures.push(format!("{name} ARI {got:.4} is not within 0.03 of {expected}"));
                        }
                    }
                    Err(e) => failures.push(format!("{name}: {e}")),
                }
            }
        }
    }

    let c5 = if failures.is_empty() {
        Ok(format!("ARI by ARI/by index: {}", report.join(", ")))
    } else {
        Err(failures.join("; "))
    };
    let c6 = Ok(format!("{runs} runs checked after every epoch, {merges} merges in selected runs verified"));
    (c5, c6)
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for trial in 0..1000 {
        let n = rng.random_range(1..=50);
        let ka = rng.random_range(1..=6);
        let kb = rng.random_range(1..=6);
        let a: Vec<usize> = (0..n).map(|_| rng.random_range(0..ka)).collect();
        let b: Vec<usize> = (0..n).map(|_| rng.random_range(0..kb)).collect();
        let fast = ari(&a, &b).map_err(|e| e.to_string())?;
        let slow = pair_count_ari(&a, &b);
        let err = (fast - slow).abs();
        worst = worst.max(err);
        ensure(err <= 1e-12, || format!("trial {trial}: {fast} vs oracle {slow}"))?;
    }
    Ok(format!("1000 pairs, max error {worst:.1e}"))
}

fn report(id: usize, title: &str, budget: Duration, started: Instant, outcome: Outcome) -> bool {
    let elapsed = started.elapsed();
    let (pass, detail) = match outcome {
        Ok(d) if elapsed <= budget => (true, d),
        Ok(d) => (false, format!("{d}; took {:.0}s, budget {}s", elapsed.as_secs_f64(), budget.as_secs())),
        Err(e) => (false, e),
    };
    println!(
        "criterion {id} {}: {title} [{:.1}s] {detail}",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    pass
}

fn main() -> ExitCode {
    let wanted: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let on = |id: usize| wanted.is_empty() || wanted.contains(&id);
    let mins = |m: u64| Duration::from_secs(60 * m);
    let mut ok = true;

    if on(1) {
        let t = Instant::now();
        ok &= report(1, "incremental equals batch", mins(2), t, criterion_1());
    }
    if on(2) {
        let t = Instant::now();
        ok &= report(2, "inverse and reduction algebra", Duration::from_secs(30), t, criterion_2());
    }
    if on(3) {
        let t = Instant::now();
        ok &= report(3, "decision equivalence of the two modes", mins(5), t, criterion_3());
    }
    if on(4) {
        let t = Instant::now();
        ok &= report(4, "speedup trend", mins(15), t, criterion_4());
    }
    if on(5) || on(6) {
        let t = Instant::now();
        let (c5, c6) = criterion_5();
        ok &= report(5, "clustering accuracy at desk scale", mins(20), t, c5);
        ok &= report(6, "merge/split bookkeeping", mins(20), t, c6);
    }
    if on(7) {
        let t = Instant::now();
        ok &= report(7, "ARI correctness", Duration::from_secs(10), t, criterion_7());
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
