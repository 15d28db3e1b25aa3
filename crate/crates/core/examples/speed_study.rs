//! Incremental versus batch index computation on the same runs.
//!
//! Both modes take identical decisions, so the label vectors match and the
//! only difference is time. Pass `k_max` (default 8) and optionally `d`.
//!
//! ```bash
//! cargo run --release --example speed_study -- 10 50
//! ```

use icvi_artmap::bench::{speed_study_with, speedup, SpeedSpec};

fn main() -> icvi_artmap::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("integer argument"));
    let k_max = args.next().unwrap_or(8);
    let d = args.next().unwrap_or(20);
    let spec = SpeedSpec::new(d, 1000, k_max, 0);

    let rows = speed_study_with(&spec, |r| eprintln!("{:>3} k={:<3} {:<11} {:.4}s", r.icvi, r.k, r.mode, r.seconds))?;
    print!("{:>4}", "k");
    for kind in &spec.kinds {
        print!("{kind:>8}");
    }
    println!();
    for &k in &spec.ks {
        print!("{k:>4}");
        for &kind in &spec.kinds {
            print!("{:>7.1}x", speedup(&rows, kind, k).unwrap_or(f64::NAN));
        }
        println!();
    }
    Ok(())
}
