//! Grid search over the two vigilance parameters, selecting either by ARI
//! against ground truth or by the final index value alone.
//!
//! ```bash
//! ICVI_ARTMAP_WORKERS=4 cargo run --release --example vigilance_sweep
//! ```

use icvi_artmap::bench::{generate, sweep, GaussianSpec, Grid, SelectBy, SweepSpec};
use icvi_artmap::{prepare, CviKind, TrainerConfig};

fn main() -> icvi_artmap::Result<()> {
    let (ds, truth) = generate(&GaussianSpec::new(5, 10, 400, 3.0, 8))?;
    let prep = prepare(&ds);
    let base = TrainerConfig::new(5, CviKind::Ni);

    for select_by in [SelectBy::Ari, SelectBy::Icvi] {
        let spec = SweepSpec {
            rho_ab: Grid::new(0.2, 1.0, 0.4),
            ..SweepSpec::for_dimension(ds.d(), select_by)
        };
        let out = sweep(&prep, Some(&truth), &spec, &base)?;
        let best = out.best();
        println!(
            "{select_by:?}: {} runs, selected rho_a = {}, rho_ab = {} (ARI {:.4}, NI {:.5})",
            out.rows.len(),
            best.rho_a,
            best.rho_ab,
            best.ari.unwrap_or(f64::NAN),
            best.icvi
        );
    }
    Ok(())
}
