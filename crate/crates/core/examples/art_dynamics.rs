//! Fuzzy ARTMAP on its own: category search, match tracking and the
//! map-field bookkeeping that merges and splits rely on.
//!
//! ```bash
//! cargo run --example art_dynamics
//! ```

use icvi_artmap::artmap::{ArtA, Artmap, MapField};

fn show(net: &Artmap) {
    for (j, (w, m)) in net.art.weights.iter().zip(&net.map.weights).enumerate() {
        println!("  category {j}: w_a = {w:.3?}  w_ab = {m:.3?}  predicts {}", net.map.predict(j));
    }
}

fn main() {
    // two clusters, complement-coded 1-d inputs
    let mut net = Artmap::new(ArtA::new(0.6, 0.001, 1.0), MapField::new(0.8, 1.0, 0.01, 2));
    let samples = [(0.10, 0), (0.15, 0), (0.90, 1), (0.85, 1), (0.12, 1)];

    for (v, cluster) in samples {
        let x = [v, 1.0 - v];
        let mut y = [0.0; 2];
        y[cluster] = 1.0;
        let r = net.search_and_resonate(&x, &y);
        println!(
            "x = {v:.2} taught as cluster {cluster}: category {}{}",
            r.category,
            if r.created { " (new)" } else { "" }
        );
    }
    println!("after training:");
    show(&net);

    // the last sample taught a different cluster near category 0, so match
    // tracking pushed it into its own category
    let merged = net.map.merge_columns(0, 1);
    println!("clusters 0 and 1 merged into column {merged}:");
    show(&net);

    let new_id = net.map.split_column(2);
    println!("category 2 split off into cluster {new_id}:");
    show(&net);
}
