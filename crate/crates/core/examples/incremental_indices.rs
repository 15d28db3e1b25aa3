//! Keeping a validity index current while samples move between clusters,
//! and checking every step against a from-scratch computation.
//!
//! ```bash
//! cargo run --example incremental_indices
//! ```

use icvi_artmap::bench::{generate, GaussianSpec};
use icvi_artmap::icvi::batch_value;
use icvi_artmap::{prepare, CviKind, IcviState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> icvi_artmap::Result<()> {
    let (ds, truth) = generate(&GaussianSpec::new(4, 3, 200, 6.0, 3))?;
    let x = prepare(&ds).x_b;
    let mut rng = ChaCha8Rng::seed_from_u64(1);

    for kind in CviKind::ALL {
        let mut labels = truth.0.clone();
        let mut state = IcviState::init_batch(kind, &x, &labels)?;
        let start = state.value();
        let mut worst = 0.0f64;
        let mut gap = 0.0f64;
        for _ in 0..200 {
            let t = rng.random_range(0..labels.len());
            let from = labels[t];
            if state.size(from) < 2 {
                continue;
            }
            let to = rng.random_range(0..state.k());
            if to == from {
                continue;
            }
            let predicted = state.score_swap(x.row(t), from, to)?;
            state.move_sample(x.row(t), from, to)?;
            labels[t] = to;
            let batch = batch_value(kind, &x, &labels)?;
            worst = worst.max(((state.value() - batch) / batch).abs());
            gap = gap.max((predicted - state.value()).abs());
        }
        println!(
            "{:>3} ({:?}-optimal): ground truth {start:>12.5} -> shuffled {:>12.5}, drift vs batch {worst:.1e}, score vs commit {gap:.1e}",
            kind,
            kind.optimality(),
            state.value()
        );
    }
    Ok(())
}
