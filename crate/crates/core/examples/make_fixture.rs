//! Writes the synthetic annual panel used as the command-line fixture.
//!
//! `cargo run -p dynardl-core --example make_fixture -- [SEED] > panel.csv`

use dynardl_core::dataset::{Dataset, TimeSeries};
use dynardl_core::synthetic::macro_panel;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const NAMES: [&str; 5] = ["CE", "NE", "REN", "ERT", "EP"];
const THETAS: [f64; 4] = [-0.3, 0.5, 0.2, 0.4];

fn main() -> dynardl_core::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(2008);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let logs = macro_panel(&mut rng, 1990, 28, &NAMES, &THETAS)?;
    let levels = logs
        .series()
        .iter()
        .map(|s| {
            let v = s
                .complete_values()?
                .iter()
                .map(|x| (x.exp() * 1e6).round() / 1e6)
                .collect();
            TimeSeries::new(s.name(), s.start_year(), v)
        })
        .collect::<dynardl_core::Result<Vec<_>>>()?;
    print!("{}", Dataset::new(levels)?.to_csv_string()?);
    Ok(())
}
