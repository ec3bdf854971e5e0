//! Regenerates the recorded model, search and Wikimedia fixtures from the
//! simulation.

use storm_core::RunMode;
use storm_pipeline::{PrewritingConfig, WritingConfig};
use storm_testkit::wikimedia;

fn main() {
    let dir = std::env::args().nth(1).map(Into::into).unwrap_or_else(storm_testkit::fixtures_dir);
    let configs = [(PrewritingConfig::default(), WritingConfig::default())];
    if let Err(e) = storm_testkit::record_fixtures(&dir, &configs, &RunMode::ALL) {
        eprintln!("recording failed: {e}");
        std::process::exit(1);
    }
    if let Err(e) = wikimedia::record(&dir.join(wikimedia::CACHE_DIR)) {
        eprintln!("recording wikimedia fixtures failed: {e}");
        std::process::exit(1);
    }
    println!("fixtures written to {}", dir.display());
}
