//! Adjusted Rand index between labelings, including label files on disk.
//!
//! ```bash
//! cargo run --example compare_labelings -- a.labels b.labels
//! ```

use icvi_artmap::metrics::ari;
use icvi_artmap::Labels;

fn main() -> icvi_artmap::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if let [a, b] = &args[..] {
        let (a, b) = (Labels::load(a)?, Labels::load(b)?);
        println!("{}", ari(a.as_slice(), b.as_slice())?);
        return Ok(());
    }

    let truth = [0, 0, 0, 1, 1, 1, 2, 2, 2];
    let cases: [(&str, [u32; 9]); 4] = [
        ("renamed ids", [5, 5, 5, 9, 9, 9, 7, 7, 7]),
        ("one sample moved", [0, 0, 1, 1, 1, 1, 2, 2, 2]),
        ("two clusters merged", [0, 0, 0, 0, 0, 0, 2, 2, 2]),
        ("interleaved", [0, 1, 2, 0, 1, 2, 0, 1, 2]),
    ];
    for (name, labels) in cases {
        println!("{name:<20} {:+.4}", ari(&truth, &labels)?);
    }
    Ok(())
}
