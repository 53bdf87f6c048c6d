//! The HTTP contract scenarios, each on its own runtime so a failing one is
//! reported by name without stopping the rest.

use crate::contract::SCENARIOS;

pub fn run() -> Result<String, String> {
    let mut failed = Vec::new();
    for &(name, scenario) in SCENARIOS {
        let outcome = std::thread::spawn(move || {
            tokio::runtime::Builder::new_current_thread()
                .enable_all()
                .build()
                .unwrap()
                .block_on(scenario())
        })
        .join();
        if outcome.is_err() {
            failed.push(name);
        }
    }
    if failed.is_empty() {
        Ok(format!("{} scenarios", SCENARIOS.len()))
    } else {
        Err(format!("{} of {} scenarios failed: {}", failed.len(), SCENARIOS.len(), failed.join(", ")))
    }
}
