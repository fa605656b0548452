//! Writes the six default experiment configurations into `configs/`.
//!
//! Run from the workspace root:
//!
//! ```text
//! cargo run --example write_default_configs
//! ```

use fock_ida::config::{ExperimentId, RunConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ids = [
        (ExperimentId::Equivalence, "e1-equivalence"),
        (ExperimentId::BergerCoburn, "e2-berger-coburn"),
        (ExperimentId::HsIdentity, "e3-hs-identity"),
        (ExperimentId::Compactness, "e4-compactness"),
        (ExperimentId::Beurling, "e5-beurling"),
        (ExperimentId::Toeplitz, "e6-toeplitz"),
    ];
    std::fs::create_dir_all("configs")?;
    for (id, name) in ids {
        let config = RunConfig::example(id);
        let path = format!("configs/{name}.json");
        let text = serde_json::to_string_pretty(&config)?;
        std::fs::write(&path, text + "\n")?;
        println!("wrote {path}");
    }
    Ok(())
}
