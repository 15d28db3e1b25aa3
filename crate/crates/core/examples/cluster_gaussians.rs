//! End to end: generate a labelled fixture, cluster it with every index kind
//! and score the result.
//!
//! ```bash
//! cargo run --release --example cluster_gaussians
//! ```

use icvi_artmap::bench::{generate, GaussianSpec};
use icvi_artmap::metrics::ari;
use icvi_artmap::{fit, prepare, CviKind, TrainerConfig};

fn main() -> icvi_artmap::Result<()> {
    // overlapping blobs so that k-means alone is not already perfect
    let (ds, truth) = generate(&GaussianSpec::new(6, 2, 600, 2.0, 21))?;
    let prep = prepare(&ds);
    let kmeans = icvi_artmap::kmeans::best_of(&prep.x_b, 6, 10, 0)?;
    println!("k-means ARI {:.4}", ari(&kmeans.labels, truth.as_slice())?);

    for kind in CviKind::ALL {
        let cfg = TrainerConfig {
            rho_a: 0.3,
            rho_ab: 0.9,
            ..TrainerConfig::new(6, kind)
        };
        let r = fit(&prep, &cfg)?;
        println!(
            "{:>3}: ARI {:.4}  index {:>12.5}  epochs {:>2} ({:?})  merges {}  splits {}  categories {}",
            kind,
            ari(r.labels.as_slice(), truth.as_slice())?,
            r.value,
            r.epochs_run,
            r.stop_reason,
            r.merges.len(),
            r.splits,
            r.categories
        );
    }
    Ok(())
}
