//! Drives the command-line layer from code: runs every bundled config
//! through its command and prints the verdicts.

use std::error::Error;
use std::fs;
use std::path::Path;

use qcausal::cli::execute;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let runs = [
        ("epr", "phi_plus.json"),
        ("chsh", "product.json"),
        ("consistency", "fig4.json"),
        ("consistency", "noncommuting.json"),
        ("consistency", "anticommuting.json"),
        ("intervene", "phi_plus.json"),
        ("net", "net4.json"),
    ];
    for (command, file) in runs {
        let text = fs::read_to_string(dir.join(file))?;
        let report = execute(command, &text, None, None)?;
        let failed: Vec<&str> = report
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.key.as_str())
            .collect();
        println!(
            "{command:<12} {file:<20} {}",
            if failed.is_empty() { "pass".to_string() } else { format!("fail: {}", failed.join(", ")) }
        );
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
