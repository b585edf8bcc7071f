//! Enumerates flip words that close a catalog triangulation up to relabeling
//! and prints each loop's sign-stability verdict and stretch factor.
//!
//! Usage: `cargo run --release -p mutloop-core --example search_flip_words -- [torus|sphere4] [max_len]`

use mutloop_core::stability::Budget;
use mutloop_core::surfaces::{search_flip_loops, sphere4_triangulation, torus_triangulation};

fn main() {
    let mut args = std::env::args().skip(1);
    let surface = args.next().unwrap_or_else(|| "torus".into());
    let max_len: usize = args
        .next()
        .map_or(6, |s| s.parse().expect("max_len must be an integer"));
    let t = match surface.as_str() {
        "torus" => torus_triangulation(),
        "sphere4" => sphere4_triangulation(),
        other => panic!("unknown surface `{other}`"),
    };
    let budget = Budget {
        max_iterations: 100,
        ray_samples: 16,
        rng_seed: 0,
    };
    let hits = search_flip_loops(&t, max_len, budget).expect("search failed");
    for h in hits {
        println!("{}", serde_json::to_string(&h).expect("serializable"));
    }
}
